use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use symstat_core::born::transition_matrix;
use symstat_core::bundled;
use symstat_core::reduction::randomization_strata;
use symstat_core::system::design_spec;
use symstat_core::{parse_scenario, ParameterSystem, QuantumSystem, RepMode, Tolerances};

fn parameter_systems(c: &mut Criterion) {
    for (name, text) in bundled::WITH_PARAMETERS {
        let spec = parse_scenario(text).unwrap();
        c.bench_function(&format!("assumptions/{name}"), |b| {
            b.iter(|| ParameterSystem::new(black_box(spec.clone()), None).unwrap())
        });
    }
}

fn quantum_systems(c: &mut Criterion) {
    for (name, text) in bundled::WITH_PARAMETERS {
        let params = ParameterSystem::new(parse_scenario(text).unwrap(), None).unwrap();
        c.bench_function(&format!("build/{name}"), |b| {
            b.iter(|| QuantumSystem::build(black_box(params.clone()), RepMode::Auto, Tolerances::default()).unwrap())
        });
    }
    let params = ParameterSystem::new(parse_scenario(bundled::QUBIT_TETRA).unwrap(), None).unwrap();
    let sys = QuantumSystem::build(params, RepMode::Auto, Tolerances::default()).unwrap();
    c.bench_function("born/qubit-tetra", |b| b.iter(|| transition_matrix(black_box(&sys.states), 0, 1).unwrap()));
}

fn strata(c: &mut Criterion) {
    let design = design_spec(&parse_scenario(bundled::BLOCKS).unwrap()).unwrap();
    c.bench_function("strata/blocks", |b| b.iter(|| randomization_strata(black_box(&design)).unwrap()));
}

criterion_group!(benches, parameter_systems, quantum_systems, strata);
criterion_main!(benches);
