use std::collections::BTreeSet;

use num_complex::Complex64;
use proptest::prelude::*;
use symstat_core::born::{born_with_density, clamp_probability, transition_probability};
use symstat_core::bundled;
use symstat_core::inference::{bayes_update, Posterior};
use symstat_core::linalg::{self, CMatrix, CVector};
use symstat_core::params::maximal_permissible_subgroup;
use symstat_core::scenario::{GeneratorSpec, ParameterSpec, PhiPoint};
use symstat_core::states::{commutant_analysis, density_from_distribution, question_from_state, state_from_question};
use symstat_core::{
    group::orbits, parse_scenario, serialize_scenario, DensityMatrix, FiniteGroup, GroupAction, ParameterMap,
    ParameterSystem, Permutation, PureState, QuantumSystem, RepMode, ScenarioSpec, Tolerances,
};

fn permutation(n: usize) -> impl Strategy<Value = Permutation> {
    Just((0..n).collect::<Vec<_>>()).prop_shuffle().prop_map(|v| Permutation::from_images(v).unwrap())
}

/// A group on up to five points given by one to three random generators.
fn small_group() -> impl Strategy<Value = (usize, Vec<Permutation>)> {
    (2usize..=5).prop_flat_map(|n| (Just(n), prop::collection::vec(permutation(n), 1..=3)))
}

fn tetra() -> QuantumSystem {
    let params = ParameterSystem::new(parse_scenario(bundled::QUBIT_TETRA).unwrap(), None).unwrap();
    QuantumSystem::build(params, RepMode::Auto, Tolerances::default()).unwrap()
}

fn partition_of(group: &FiniteGroup) -> BTreeSet<Vec<usize>> {
    orbits(&GroupAction::natural(group)).blocks().iter().cloned().collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn group_product_is_associative((n, gens) in small_group()) {
        let g = FiniteGroup::closure(n, &gens).unwrap();
        let m = g.order();
        for a in 0..m.min(12) {
            for b in 0..m.min(12) {
                for c in 0..m.min(12) {
                    prop_assert_eq!(g.product(g.product(a, b), c), g.product(a, g.product(b, c)));
                }
            }
        }
        prop_assert!(g.verify_axioms());
    }

    #[test]
    fn counting_measure_is_right_invariant(
        (n, gens) in small_group(),
        mask in prop::collection::vec(any::<bool>(), 6),
    ) {
        let g = FiniteGroup::closure(n, &gens).unwrap();
        let subset: Vec<usize> = (0..n).filter(|&i| mask[i]).collect();
        let action = GroupAction::natural(&g);
        for h in 0..g.order() {
            let image: BTreeSet<usize> = action.image_of_set(h, &subset).into_iter().collect();
            prop_assert_eq!(image.len(), subset.len());
        }
        // The same holds for translates of subsets of the group itself.
        let elements: Vec<usize> = (0..g.order()).filter(|&i| mask[i % 6]).collect();
        for h in 0..g.order() {
            let moved: BTreeSet<usize> = elements.iter().map(|&x| g.product(x, h)).collect();
            prop_assert_eq!(moved.len(), elements.len());
        }
    }

    #[test]
    fn orbits_do_not_depend_on_the_presentation((n, gens) in small_group(), seed in any::<u64>()) {
        let g = FiniteGroup::closure(n, &gens).unwrap();
        let mut shuffled = gens.clone();
        shuffled.rotate_left((seed as usize) % gens.len());
        shuffled.push(gens[0].then(gens.last().unwrap()));
        shuffled.push(gens[0].inverse());
        let h = FiniteGroup::closure(n, &shuffled).unwrap();
        prop_assert_eq!(g.order(), h.order());
        prop_assert_eq!(partition_of(&g), partition_of(&h));
    }

    #[test]
    fn maximal_permissible_subgroup_is_a_subgroup(
        (n, gens) in small_group(),
        table in prop::collection::vec(0usize..3, 6),
    ) {
        let g = FiniteGroup::closure(n, &gens).unwrap();
        let mut table: Vec<usize> = table[..n].to_vec();
        table[0] = 0;
        let k = *table.iter().max().unwrap() + 1;
        // Relabel so that every value is attained.
        let used: BTreeSet<usize> = table.iter().copied().collect();
        let relabel: Vec<usize> = (0..k).map(|v| used.iter().position(|&u| u == v).unwrap_or(0)).collect();
        let table: Vec<usize> = table.iter().map(|&v| relabel[v]).collect();
        let values: Vec<String> = (0..used.len()).map(|v| format!("v{v}")).collect();
        let map = ParameterMap::new("x", values, table).unwrap();
        let sub = maximal_permissible_subgroup(&map, &g).unwrap();
        prop_assert!(sub.verify_axioms());
        let members: BTreeSet<usize> = (0..sub.order()).map(|i| sub.to_parent(i)).collect();
        prop_assert!(members.contains(&g.identity_index()));
        for &a in &members {
            prop_assert!(members.contains(&g.inverse(a)));
            for &b in &members {
                prop_assert!(members.contains(&g.product(a, b)));
            }
        }
        prop_assert_eq!(g.order() % sub.order(), 0);
    }

    #[test]
    fn bayes_updates_compose(
        first in prop::collection::vec(any::<bool>(), 0..200),
        second in prop::collection::vec(any::<bool>(), 0..200),
        p in prop::collection::vec(0.01f64..0.99, 2..5),
    ) {
        let labels: Vec<String> = (0..p.len()).map(|i| format!("h{i}")).collect();
        let prior = Posterior::uniform(labels);
        let stepwise = bayes_update(&bayes_update(&prior, &p, &first).unwrap(), &p, &second).unwrap();
        let all: Vec<bool> = first.iter().chain(&second).copied().collect();
        let at_once = bayes_update(&prior, &p, &all).unwrap();
        for (x, y) in stepwise.probabilities.iter().zip(&at_once.probabilities) {
            prop_assert!((x - y).abs() < 1e-10);
        }
        prop_assert_eq!(stepwise.provenance, at_once.provenance);
    }

    #[test]
    fn probabilities_inside_the_unit_interval_are_untouched(p in 0.0f64..=1.0) {
        prop_assert_eq!(clamp_probability(p).unwrap(), p);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn density_mixtures_are_affine(
        w1 in prop::collection::vec(0.0f64..1.0, 2),
        w2 in prop::collection::vec(0.0f64..1.0, 2),
        t in 0.0f64..=1.0,
        a in 0usize..4,
        b in 0usize..4,
    ) {
        let sys = tetra();
        let normalize = |w: &[f64]| {
            let s: f64 = w.iter().sum::<f64>().max(1e-9);
            let mut v: Vec<f64> = w.iter().map(|x| x / s).collect();
            if w.iter().sum::<f64>() < 1e-9 { v = vec![1.0, 0.0]; }
            let total: f64 = v.iter().sum();
            v.iter().map(|x| x / total).collect::<Vec<_>>()
        };
        let (p1, p2) = (normalize(&w1), normalize(&w2));
        let r1 = density_from_distribution(&p1, sys.states.states(a)).unwrap();
        let r2 = density_from_distribution(&p2, sys.states.states(a)).unwrap();
        let mixed = DensityMatrix::new(r1.matrix().scale(t) + r2.matrix().scale(1.0 - t)).unwrap();
        let left = born_with_density(&mixed, &sys.states, b).unwrap();
        let q1 = born_with_density(&r1, &sys.states, b).unwrap();
        let q2 = born_with_density(&r2, &sys.states, b).unwrap();
        for k in 0..2 {
            prop_assert!((left[k] - (t * q1[k] + (1.0 - t) * q2[k])).abs() < 1e-10);
        }
    }

    #[test]
    fn commutant_dimension_is_the_sum_of_squared_multiplicities(
        mult in prop::collection::vec(1usize..=3, 1..=4),
        raw in prop::collection::vec(-1.0f64..1.0, 128),
    ) {
        let n: usize = mult.iter().sum();
        prop_assume!(n <= 8);
        let m = CMatrix::from_fn(n, n, |i, j| Complex64::new(raw[(i * n + j) % 128], raw[(i * n + j + 64) % 128]));
        let q = m.qr().q();
        let eigen: Vec<f64> = mult.iter().enumerate().flat_map(|(i, &k)| std::iter::repeat_n(i as f64 * 1.5 - 2.0, k)).collect();
        let t = &q * linalg::diagonal(&eigen) * q.adjoint();
        let report = commutant_analysis(&t, 1e-8);
        let expected: usize = mult.iter().map(|k| k * k).sum();
        prop_assert_eq!(report.dimension, expected);
        prop_assert_eq!(report.is_maximal(), mult.iter().all(|&k| k == 1));
    }
}

#[test]
fn global_phase_changes_nothing() {
    let sys = tetra();
    let v = state_from_question(&sys.states, 0, 0).unwrap();
    let u = state_from_question(&sys.states, 1, 1).unwrap();
    let base = transition_probability(&v, &u).unwrap();
    for i in 0..100 {
        let alpha = i as f64 * 0.0631;
        let rotated = PureState::new(v.vector() * Complex64::from_polar(1.0, alpha)).unwrap();
        assert!((transition_probability(&rotated, &u).unwrap() - base).abs() < 1e-12);
        assert_eq!(question_from_state(&sys.states, &rotated, 1e-9).unwrap(), vec![(0, 0)]);
        let raw = v.vector() * Complex64::from_polar(1.0, alpha);
        assert!(linalg::phase_mismatch(&raw, v.vector()) < 1e-12);
        let _: &CVector = rotated.vector();
    }
}

fn labels(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("p{i}")).collect()
}

fn random_spec() -> impl Strategy<Value = ScenarioSpec> {
    (2usize..=6).prop_flat_map(|n| {
        (
            prop::collection::vec(permutation(n), 1..=2),
            prop::collection::vec(0usize..3, n),
            prop::collection::vec(-10.0f64..10.0, 3),
        )
            .prop_map(move |(gens, mut table, eig)| {
                table[0] = 0;
                table[1 % n] = 1;
                let k = *table.iter().max().unwrap() + 1;
                if !(0..k).all(|v| table.contains(&v)) {
                    table = (0..n).map(|i| i % k).collect();
                }
                ScenarioSpec {
                    name: "random".into(),
                    base: Some("lam".into()),
                    phi: labels(n).into_iter().map(|label| PhiPoint { label, attributes: vec![] }).collect(),
                    generators: gens
                        .iter()
                        .enumerate()
                        .map(|(i, g)| GeneratorSpec { name: format!("g{i}"), images: g.images().to_vec() })
                        .collect(),
                    parameters: vec![ParameterSpec {
                        name: "lam".into(),
                        values: (0..k).map(|v| format!("v{v}")).collect(),
                        eigenvalues: Some((0..k).map(|v| v as f64 * 20.0 + eig[v]).collect()),
                        maximal: true,
                        assignment: table,
                    }],
                    experiments: vec![],
                    explicit_rep: None,
                    design: None,
                    options: vec![],
                }
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn serialized_scenarios_parse_back_unchanged(spec in random_spec()) {
        let text = serialize_scenario(&spec);
        let back = parse_scenario(&text).unwrap();
        prop_assert_eq!(&back, &spec);
        prop_assert_eq!(serialize_scenario(&back), text);
    }
}

#[test]
fn bundled_scenarios_survive_a_round_trip() {
    for (name, text) in bundled::ALL {
        let spec = parse_scenario(text).unwrap();
        let again = parse_scenario(&serialize_scenario(&spec)).unwrap();
        assert_eq!(spec, again, "{name}");
    }
}
