use symstat_core::born::{born_with_density, check_transition_symmetry, transition_matrix};
use symstat_core::bundled;
use symstat_core::hilbert::{AbstractRep, HilbertError, RepOrigin};
use symstat_core::linalg::{self, c, CMatrix};
use symstat_core::reduction::randomization_strata;
use symstat_core::states::{check_state_assumptions, state_from_question};
use symstat_core::system::design_spec;
use symstat_core::{
    parse_scenario, run_pipeline, Command, DensityMatrix, ParameterSystem, PipelineOptions, QuantumSystem, RepMode,
    ScenarioError, SystemError, ToleranceProfile, Tolerances,
};

fn params(text: &str) -> ParameterSystem {
    ParameterSystem::new(parse_scenario(text).unwrap(), None).unwrap()
}

fn quantum(text: &str, mode: RepMode) -> Result<QuantumSystem, SystemError> {
    QuantumSystem::build(params(text), mode, Tolerances::default())
}

#[test]
fn triangle_assumptions() {
    let sys = params(bundled::TRIANGLE);
    let report = &sys.assumptions;
    assert_eq!(report.group_order, 6);
    assert!(!report.single_orbit_holds());
    assert!(report.generation_holds());
    assert!(report.transitions_hold());
    for check in &report.experiments {
        assert_eq!(check.subgroup.order(), 2);
        assert_eq!(check.value_orbits.len(), 3);
    }
}

#[test]
fn triangle_states_coincide_across_experiments() {
    let sys = quantum(bundled::TRIANGLE, RepMode::Auto).unwrap();
    assert_eq!(sys.w.origin(), RepOrigin::Derived);
    assert_eq!(sys.w.dimension(), 3);
    let v0 = state_from_question(&sys.states, 0, 0).unwrap();
    let report = check_state_assumptions(&sys.w, &v0, &sys.states, 1e-9);
    assert_eq!(report.orbit_size, 1);
    assert!(!report.injective());
    assert!(!report.coverage_surrogate());
    let m = transition_matrix(&sys.states, 0, 1).unwrap();
    for (i, row) in m.entries.iter().enumerate() {
        for (j, &p) in row.iter().enumerate() {
            assert!((p - f64::from(u8::from(i == j))).abs() < 1e-12);
        }
    }
}

#[test]
fn tetra_orbit_covers_every_question_but_is_not_injective() {
    let sys = quantum(bundled::QUBIT_TETRA, RepMode::Auto).unwrap();
    assert_eq!(sys.w.origin(), RepOrigin::Explicit { projective: true });
    assert!(sys.params.assumptions.all_hold());
    for check in &sys.params.assumptions.experiments {
        assert_eq!(check.subgroup.order(), 6);
    }
    let v0 = state_from_question(&sys.states, 0, 0).unwrap();
    let report = check_state_assumptions(&sys.w, &v0, &sys.states, 1e-9);
    assert_eq!(report.orbit_size, 8);
    assert!(report.coverage_surrogate());
    assert!(!report.injective());
}

#[test]
fn octahedral_derived_representation_is_rejected() {
    match quantum(bundled::SPIN_OCTA, RepMode::Derived) {
        Err(SystemError::Hilbert(HilbertError::AssumptionViolation { residual, .. })) => assert!(residual > 1e-8),
        other => panic!("expected an assumption violation, got {other:?}"),
    }
    let explicit = quantum(bundled::SPIN_OCTA, RepMode::Explicit).unwrap();
    assert!(explicit.w_check.homomorphism_residual < 1e-8);
    assert!(explicit.w_check.unitarity_residual < 1e-10);
}

#[test]
fn explicit_mode_without_matrices_is_an_error() {
    assert!(matches!(quantum(bundled::TRIANGLE, RepMode::Explicit), Err(SystemError::NoExplicitRep)));
}

#[test]
fn non_unitary_matrices_break_transition_symmetry() {
    let sys = quantum(bundled::SPIN_OCTA, RepMode::Auto).unwrap();
    let stretch = CMatrix::from_row_slice(2, 2, &[c(2.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]);
    let mut matrices: Vec<CMatrix> = sys.w.matrices().to_vec();
    for m in &mut matrices {
        *m = &stretch * &*m;
    }
    let bad = AbstractRep::from_matrices_unchecked(matrices, RepOrigin::Explicit { projective: true });
    let states: Vec<_> = sys.states.all_states().cloned().collect();
    assert!(check_transition_symmetry(&sys.w, &states, 1e-10).holds());
    assert!(!check_transition_symmetry(&bad, &states, 1e-10).holds());
}

#[test]
fn maximally_mixed_state_gives_uniform_outcomes() {
    for text in [bundled::QUBIT_TETRA, bundled::SPIN_OCTA] {
        let sys = quantum(text, RepMode::Auto).unwrap();
        let rho = DensityMatrix::maximally_mixed(2);
        assert!(linalg::distance(rho.matrix(), &linalg::identity(2).scale(0.5)) < 1e-12);
        for b in 0..sys.states.num_experiments() {
            for p in born_with_density(&rho, &sys.states, b).unwrap() {
                assert!((p - 0.5).abs() < 1e-10);
            }
        }
    }
}

#[test]
fn design_strata() {
    let crd = randomization_strata(&design_spec(&parse_scenario(bundled::CRD).unwrap()).unwrap()).unwrap();
    assert_eq!(crd.dimensions(), vec![1, 7]);
    let blocks = randomization_strata(&design_spec(&parse_scenario(bundled::BLOCKS).unwrap()).unwrap()).unwrap();
    assert_eq!(blocks.dimensions(), vec![1, 3, 8]);
    for r in [&crd, &blocks] {
        assert!(r.pattern_invariant);
        assert!(r.transitive());
        assert!(r.projector_sum_residual < 1e-10);
    }
}

#[test]
fn empty_scenario_is_a_parse_error() {
    let err = parse_scenario("").unwrap_err();
    assert!(matches!(err, ScenarioError::Parse(_)));
    assert!(err.diagnostics().iter().any(|d| d.message.contains("[phi]")));
}

#[test]
fn validate_flags_the_reported_value_that_disagrees() {
    let spec = parse_scenario(bundled::EXAMPLE1).unwrap();
    let out = run_pipeline(&Command::Validate, &spec, &PipelineOptions::default()).unwrap();
    assert!(out.report.contains("reported P(1 | experiment b, cards) = 16/36; enumeration gives 1/3 (disagrees)"));
    assert!(out.report.contains("P(1 | experiment b, die) = 11/36"));
}

#[test]
fn validate_fails_where_an_assumption_fails() {
    let opts = PipelineOptions::default();
    let triangle = run_pipeline(&Command::Validate, &parse_scenario(bundled::TRIANGLE).unwrap(), &opts).unwrap();
    assert!(!triangle.passed);
    assert!(triangle.report.contains("[FAIL] A w1"));
    assert!(triangle.report.contains("[PASS] B:"));
    let octa = parse_scenario(bundled::SPIN_OCTA).unwrap();
    let derived =
        run_pipeline(&Command::Validate, &octa, &PipelineOptions { mode: RepMode::Derived, ..opts.clone() }).unwrap();
    assert!(derived.report.contains("[FAIL] D:"));
}

#[test]
fn simulation_output_is_reproducible() {
    let spec = parse_scenario(bundled::EXAMPLE1).unwrap();
    let opts = PipelineOptions { seed: 9, n: 300, lifetime: Some(100), ..PipelineOptions::default() };
    let first = run_pipeline(&Command::Simulate, &spec, &opts).unwrap();
    let second = run_pipeline(&Command::Simulate, &spec, &opts).unwrap();
    assert_eq!(first, second);
    let names: Vec<&str> = first.files.iter().map(|(n, _)| n.as_str()).collect();
    assert_eq!(names, ["trace.csv", "posterior.csv", "posterior_run1.csv", "posterior_run2.csv"]);
    let other = run_pipeline(&Command::Simulate, &spec, &PipelineOptions { seed: 10, ..opts }).unwrap();
    assert_ne!(first.files[0], other.files[0]);
}

#[test]
fn strict_profile_still_builds_the_bundled_systems() {
    let strict = Tolerances::for_profile(ToleranceProfile::Strict);
    assert!((strict.gcs - 1e-11).abs() < 1e-20);
    for (name, text) in bundled::WITH_PARAMETERS {
        let spec = parse_scenario(text).unwrap();
        let opts = PipelineOptions { profile: ToleranceProfile::Strict, ..PipelineOptions::default() };
        let out = run_pipeline(&Command::Build, &spec, &opts).unwrap();
        assert!(out.passed, "{name}:\n{}", out.report);
    }
}

#[test]
fn born_csv_layout() {
    let spec = parse_scenario(bundled::QUBIT_TETRA).unwrap();
    let out =
        run_pipeline(&Command::Born { a: "A".into(), b: "B".into() }, &spec, &PipelineOptions::default()).unwrap();
    assert_eq!(out.files[0].0, "born_A_B.csv");
    assert_eq!(out.files[0].1, "value,+1,-1\n+1,0.333333333333,0.666666666667\n-1,0.666666666667,0.333333333333\n");
}
