//! Library results checked against direct computations from the definitions.

use std::collections::BTreeSet;

use num_rational::Rational64;
use symstat_core::born::transition_matrix;
use symstat_core::bundled;
use symstat_core::hilbert::verify_subspace_transport;
use symstat_core::inference::{exact_outcome_count, exact_outcome_probability, Apparatus, Sampler, Statistic};
use symstat_core::params::{element_violation, maximal_permissible_subgroup};
use symstat_core::states::{factorizations, state_from_question};
use symstat_core::system::experiment_model;
use symstat_core::{parse_scenario, ParameterSystem, QuantumSystem, RegularRep, RepMode, Tolerances};

fn system(text: &str) -> ParameterSystem {
    ParameterSystem::new(parse_scenario(text).unwrap(), None).unwrap()
}

fn quantum(text: &str) -> QuantumSystem {
    QuantumSystem::build(system(text), RepMode::Auto, Tolerances::default()).unwrap()
}

/// `{g : λ(φ1) = λ(φ2) ⇒ λ(φ1·g) = λ(φ2·g)}` over every pair of points.
fn stabilizer_by_pairs(sys: &ParameterSystem, a: usize) -> BTreeSet<usize> {
    let map = &sys.maps[a];
    let n = map.domain_size();
    (0..sys.group.order())
        .filter(|&g| {
            let p = sys.group.element(g).images();
            (0..n)
                .all(|x| (0..n).all(|y| map.value_of(x) != map.value_of(y) || map.value_of(p[x]) == map.value_of(p[y])))
        })
        .collect()
}

#[test]
fn maximal_permissible_subgroups_match_the_pairwise_definition() {
    for (name, text) in bundled::WITH_PARAMETERS {
        let sys = system(text);
        for a in 0..sys.maps.len() {
            let sub = maximal_permissible_subgroup(&sys.maps[a], &sys.group).unwrap();
            let found: BTreeSet<usize> = (0..sub.order()).map(|i| sub.to_parent(i)).collect();
            assert_eq!(found, stabilizer_by_pairs(&sys, a), "{name} experiment {a}");
        }
    }
}

#[test]
fn triangle_first_window_subgroup_swaps_the_other_two_windows() {
    let sys = system(bundled::TRIANGLE);
    let spec = &sys.spec;
    let idx = |l: &str| spec.phi_index(l).unwrap();
    let sub = maximal_permissible_subgroup(&sys.maps[0], &sys.group).unwrap();
    assert_eq!(sub.order(), 2);
    let g = sub.element((0..2).find(|&i| !sub.element(i).is_identity()).unwrap());
    // Exchanging the second and third windows fixes what shows in the first.
    for (from, to) in [("ABC", "ACB"), ("CAB", "CBA"), ("BCA", "BAC")] {
        assert_eq!(g.apply(idx(from)), idx(to));
        assert_eq!(g.apply(idx(to)), idx(from));
    }
}

#[test]
fn triangle_swap_of_outer_windows_breaks_the_first_window() {
    let sys = system(bundled::TRIANGLE);
    let spec = &sys.spec;
    let swap13 = sys.group.element(sys.group.generators()[1]);
    let map = &sys.maps[0];
    let (x, y) = element_violation(map, swap13).expect("the swap is not permissible");
    assert_eq!(map.value_of(x), map.value_of(y));
    let pair: BTreeSet<_> = [x, y].into_iter().collect();
    assert_eq!(pair, [spec.phi_index("ABC").unwrap(), spec.phi_index("ACB").unwrap()].into_iter().collect());
    let images: BTreeSet<&str> = [x, y].iter().map(|&p| map.values()[map.value_of(swap13.apply(p))].as_str()).collect();
    assert_eq!(images, ["B", "C"].into_iter().collect());
}

#[test]
fn every_element_factors_once_through_the_base_subgroup() {
    for (name, text) in bundled::WITH_PARAMETERS {
        let sys = system(text);
        let family = sys.assumptions.family().unwrap().clone();
        let base_sub = &sys.subgroups()[sys.base];
        let members: BTreeSet<usize> = (0..base_sub.order()).map(|i| base_sub.to_parent(i)).collect();
        for g in 0..sys.group.order() {
            // Brute force over pairs using permutation composition directly.
            let target = sys.group.element(g);
            let count = members
                .iter()
                .flat_map(|&h| (0..family.len()).map(move |b| (h, b)))
                .filter(|&(h, b)| sys.group.element(h).then(sys.group.element(family.get(sys.base, b))) == *target)
                .count();
            assert_eq!(count, 1, "{name}: element {g}");
            assert_eq!(factorizations(&sys.group, base_sub, &family, sys.base, g).len(), 1);
        }
    }
}

fn int_product(a: &[Vec<i64>], b: &[Vec<i64>]) -> Vec<Vec<i64>> {
    let n = a.len();
    (0..n).map(|i| (0..n).map(|j| (0..n).map(|k| a[i][k] * b[k][j]).sum()).collect()).collect()
}

#[test]
fn regular_representation_is_an_exact_integer_homomorphism() {
    for (name, text) in bundled::WITH_PARAMETERS {
        let sys = system(text);
        let rep = RegularRep::new(&sys.group);
        let n = sys.group.degree();
        // U(g) has its one in row φ at column φ·g.
        let u = |g: usize| -> Vec<Vec<i64>> {
            let p = sys.group.element(g).images();
            (0..n).map(|r| (0..n).map(|c| i64::from(p[r] == c)).collect()).collect()
        };
        for g in 0..sys.group.order() {
            assert_eq!(rep.integer_matrix(g), u(g), "{name}");
            for h in 0..sys.group.order() {
                assert_eq!(int_product(&u(g), &u(h)), u(sys.group.product(g, h)), "{name}: {g}, {h}");
            }
        }
    }
}

#[test]
fn transport_fails_for_a_wrong_transition_element() {
    let sys = quantum(bundled::TRIANGLE);
    let subgroups = sys.params.subgroups();
    let good = verify_subspace_transport(
        &sys.rep,
        &sys.subspaces[0],
        &subgroups[0],
        &sys.subspaces[1],
        sys.family.get(0, 1),
        1e-9,
    );
    assert!(good.invariance_residual < 1e-10);
    assert!(good.transport_residual < 1e-9);
    let wrong = sys.params.group.identity_index();
    let bad = verify_subspace_transport(&sys.rep, &sys.subspaces[0], &subgroups[0], &sys.subspaces[1], wrong, 1e-9);
    assert!(bad.transport_residual > 0.1, "residual {}", bad.transport_residual);
}

/// Every ordered outcome of the apparatus, counted directly.
fn enumerate_outcomes(items: u32, draws: u32, replacement: bool) -> Vec<Vec<u32>> {
    let mut out = vec![vec![]];
    for _ in 0..draws {
        let mut next = Vec::new();
        for prefix in &out {
            for x in 0..items {
                if replacement || !prefix.contains(&x) {
                    let mut longer: Vec<u32> = prefix.clone();
                    longer.push(x);
                    next.push(longer);
                }
            }
        }
        out = next;
    }
    out
}

#[test]
fn robot_probabilities_match_direct_enumeration() {
    for (sampler, replacement) in [(Sampler::Replacement, true), (Sampler::WithoutReplacement, false)] {
        let outcomes = enumerate_outcomes(6, 2, replacement);
        let first = outcomes.iter().filter(|o| o[0] == 0).count() as i64;
        let any = outcomes.iter().filter(|o| o.contains(&0)).count() as i64;
        let total = outcomes.len() as i64;
        let app = Apparatus { sampler, items: 6, marked: 1, draws: 2 };
        assert_eq!(exact_outcome_probability(&app, Statistic::First).unwrap(), Rational64::new(first, total));
        assert_eq!(exact_outcome_probability(&app, Statistic::Any).unwrap(), Rational64::new(any, total));
        assert_eq!(exact_outcome_count(&app, Statistic::Any).unwrap(), (any as u64, total as u64));
    }
}

#[test]
fn robot_scenario_exact_values() {
    let model = experiment_model(&parse_scenario(bundled::EXAMPLE1).unwrap()).unwrap();
    let (a, b) = (model.experiment_index("a").unwrap(), model.experiment_index("b").unwrap());
    let (die, cards) = (model.hypothesis_index("die").unwrap(), model.hypothesis_index("cards").unwrap());
    assert_eq!(model.probability(a, die), Rational64::new(1, 6));
    assert_eq!(model.probability(a, cards), Rational64::new(1, 6));
    assert_eq!(model.probability(b, die), Rational64::new(11, 36));
    assert_eq!(model.probability(b, cards), Rational64::new(1, 3));
    // The reported figure for the pack disagrees with enumeration.
    assert_ne!(model.probability(b, cards), Rational64::new(16, 36));
}

#[test]
fn tetrahedral_transitions_match_bloch_geometry() {
    // For spin directions with cos θ = -1/3, |⟨+a|±b⟩|² = (1 ± cos θ)/2.
    let sys = quantum(bundled::QUBIT_TETRA);
    let cos = -1.0 / 3.0;
    for a in 0..4 {
        for b in 0..4 {
            if a == b {
                continue;
            }
            let m = transition_matrix(&sys.states, a, b).unwrap();
            assert!((m.entries[0][0] - (1.0 + cos) / 2.0).abs() < 1e-9);
            assert!((m.entries[0][1] - (1.0 - cos) / 2.0).abs() < 1e-9);
            let v = state_from_question(&sys.states, a, 0).unwrap();
            let e = symstat_core::born::conditional_expectation(&v, sys.states.operator(b).unwrap()).unwrap();
            assert!((e - cos).abs() < 1e-9);
        }
    }
}

#[test]
fn coordinate_axes_are_mutually_unbiased() {
    let sys = quantum(bundled::SPIN_OCTA);
    for a in 0..3 {
        for b in 0..3 {
            let m = transition_matrix(&sys.states, a, b).unwrap();
            for (i, row) in m.entries.iter().enumerate() {
                for (j, &p) in row.iter().enumerate() {
                    let expected = if a == b { f64::from(u8::from(i == j)) } else { 0.5 };
                    assert!((p - expected).abs() < 1e-9, "{a}->{b} [{i}][{j}] = {p}");
                }
            }
        }
    }
}
