//! Parameter maps from the total-parameter space onto finite value sets,
//! permissibility under a group, and the structural assumptions that the
//! Hilbert-space construction needs.

use thiserror::Error;

use crate::group::{orbits, FiniteGroup, GroupAction, GroupError, Partition, Permutation};

/// Default number of candidate transition families examined before giving up.
pub const DEFAULT_FAMILY_BUDGET: usize = 10_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParamError {
    #[error("parameter '{name}': point {point} maps to value index {value}, but only {count} values are declared")]
    ValueOutOfRange { name: String, point: usize, value: usize, count: usize },
    #[error("parameter '{name}': value '{value}' is never attained")]
    EmptyLevelSet { name: String, value: String },
    #[error("parameter '{name}': {got} eigenvalues declared for {expected} values")]
    EigenvalueCount { name: String, expected: usize, got: usize },
    #[error("parameter '{name}': eigenvalue {value} is repeated but the parameter is declared maximal")]
    DuplicateEigenvalue { name: String, value: f64 },
    #[error("parameter '{name}' is not permissible: {witness}")]
    NotPermissible { name: String, witness: PermissibilityWitness },
    #[error("parameters '{a}' and '{b}' do not share a domain and value set")]
    IncompatibleMaps { a: String, b: String },
    #[error(transparent)]
    Group(#[from] GroupError),
}

/// A map `λ` from total-parameter indices to a finite, ordered value set.
#[derive(Debug, Clone, PartialEq)]
pub struct ParameterMap {
    name: String,
    values: Vec<String>,
    eigenvalues: Option<Vec<f64>>,
    maximal: bool,
    table: Vec<usize>,
}

impl ParameterMap {
    /// `table[φ]` is the index into `values` of `λ(φ)`.  Every value must be
    /// attained.
    pub fn new(name: impl Into<String>, values: Vec<String>, table: Vec<usize>) -> Result<Self, ParamError> {
        let name = name.into();
        let mut hit = vec![false; values.len()];
        for (point, &value) in table.iter().enumerate() {
            if value >= values.len() {
                return Err(ParamError::ValueOutOfRange { name, point, value, count: values.len() });
            }
            hit[value] = true;
        }
        if let Some(k) = hit.iter().position(|h| !h) {
            return Err(ParamError::EmptyLevelSet { name, value: values[k].clone() });
        }
        Ok(ParameterMap { name, values, eigenvalues: None, maximal: true, table })
    }

    /// Attaches numeric values `λ_k`.  They must be pairwise distinct unless
    /// the parameter has been flagged non-maximal.
    pub fn with_eigenvalues(mut self, eigenvalues: Vec<f64>) -> Result<Self, ParamError> {
        if eigenvalues.len() != self.values.len() {
            return Err(ParamError::EigenvalueCount {
                name: self.name,
                expected: self.values.len(),
                got: eigenvalues.len(),
            });
        }
        if self.maximal {
            for (i, a) in eigenvalues.iter().enumerate() {
                if eigenvalues[..i].contains(a) {
                    return Err(ParamError::DuplicateEigenvalue { name: self.name, value: *a });
                }
            }
        }
        self.eigenvalues = Some(eigenvalues);
        Ok(self)
    }

    /// Marks the parameter as non-maximal, allowing repeated eigenvalues.
    pub fn non_maximal(mut self) -> Self {
        self.maximal = false;
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn values(&self) -> &[String] {
        &self.values
    }

    pub fn eigenvalues(&self) -> Option<&[f64]> {
        self.eigenvalues.as_deref()
    }

    pub fn is_maximal(&self) -> bool {
        self.maximal
    }

    pub fn num_values(&self) -> usize {
        self.values.len()
    }

    pub fn domain_size(&self) -> usize {
        self.table.len()
    }

    #[inline]
    pub fn value_of(&self, point: usize) -> usize {
        self.table[point]
    }

    pub fn table(&self) -> &[usize] {
        &self.table
    }

    /// Points grouped by value, in declared value order.
    pub fn level_sets(&self) -> Vec<Vec<usize>> {
        let mut sets = vec![Vec::new(); self.values.len()];
        for (point, &v) in self.table.iter().enumerate() {
            sets[v].push(point);
        }
        sets
    }
}

/// Two points with equal parameter value whose images under `element`
/// have different values.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PermissibilityWitness {
    pub first: usize,
    pub second: usize,
    pub element: usize,
}

impl std::fmt::Display for PermissibilityWitness {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "points {} and {} share a value but their images under element {} do not",
            self.first, self.second, self.element
        )
    }
}

/// Checks one group element against one parameter: `λ` must be constant on
/// `S·g` for every level set `S`.  Returns the offending pair.
pub fn element_violation(map: &ParameterMap, g: &Permutation) -> Option<(usize, usize)> {
    for set in map.level_sets() {
        let lead = set[0];
        let target = map.value_of(g.apply(lead));
        if let Some(&other) = set[1..].iter().find(|&&p| map.value_of(g.apply(p)) != target) {
            return Some((lead, other));
        }
    }
    None
}

/// First violation of permissibility in element order, if any.
pub fn find_permissibility_violation(map: &ParameterMap, group: &FiniteGroup) -> Option<PermissibilityWitness> {
    (0..group.order()).find_map(|g| {
        element_violation(map, group.element(g)).map(|(first, second)| PermissibilityWitness {
            first,
            second,
            element: g,
        })
    })
}

pub fn is_permissible(map: &ParameterMap, group: &FiniteGroup) -> bool {
    find_permissibility_violation(map, group).is_none()
}

/// The subgroup `{g ∈ G : λ is permissible under g}`, returned with
/// back-references to `G`.
pub fn maximal_permissible_subgroup(map: &ParameterMap, group: &FiniteGroup) -> Result<FiniteGroup, ParamError> {
    let members: Vec<usize> =
        (0..group.order()).filter(|&g| element_violation(map, group.element(g)).is_none()).collect();
    Ok(group.subgroup_from_set(&members)?)
}

/// The action `λ(φ)·g := λ(φ·g)` on value indices.
pub fn induced_action<'g>(map: &ParameterMap, group: &'g FiniteGroup) -> Result<GroupAction<'g>, ParamError> {
    if let Some(witness) = find_permissibility_violation(map, group) {
        return Err(ParamError::NotPermissible { name: map.name.clone(), witness });
    }
    let reps: Vec<usize> = map.level_sets().iter().map(|s| s[0]).collect();
    let table = group.elements().iter().map(|g| reps.iter().map(|&p| map.value_of(g.apply(p))).collect()).collect();
    Ok(GroupAction::from_table(group, map.num_values(), table)?)
}

fn check_compatible(a: &ParameterMap, b: &ParameterMap) -> Result<(), ParamError> {
    if a.domain_size() != b.domain_size() || a.values != b.values {
        return Err(ParamError::IncompatibleMaps { a: a.name.clone(), b: b.name.clone() });
    }
    Ok(())
}

fn is_transition(a: &ParameterMap, b: &ParameterMap, g: &Permutation) -> bool {
    (0..a.domain_size()).all(|p| b.value_of(p) == a.value_of(g.apply(p)))
}

/// Every `g` with `λ_b(φ) = λ_a(φ·g)` for all `φ`, in element order.
pub fn transition_candidates(
    a: &ParameterMap,
    b: &ParameterMap,
    group: &FiniteGroup,
) -> Result<Vec<usize>, ParamError> {
    check_compatible(a, b)?;
    Ok((0..group.order()).filter(|&g| is_transition(a, b, group.element(g))).collect())
}

/// First `g` with `λ_b(φ) = λ_a(φ·g)` for all `φ`.
pub fn find_transition_element(
    a: &ParameterMap,
    b: &ParameterMap,
    group: &FiniteGroup,
) -> Result<Option<usize>, ParamError> {
    check_compatible(a, b)?;
    Ok((0..group.order()).find(|&g| is_transition(a, b, group.element(g))))
}

/// Elements `g_ab` relating every pair of experiments, with `g_aa = e` and
/// `g_ab g_bc = g_ac`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransitionFamily {
    table: Vec<Vec<usize>>,
}

impl TransitionFamily {
    /// Wraps a table without checking it; see [`TransitionFamily::verify`].
    pub fn from_table(table: Vec<Vec<usize>>) -> Self {
        TransitionFamily { table }
    }

    pub fn len(&self) -> usize {
        self.table.len()
    }

    pub fn is_empty(&self) -> bool {
        self.table.is_empty()
    }

    /// `g_ab` as an element index of the ambient group.
    pub fn get(&self, a: usize, b: usize) -> usize {
        self.table[a][b]
    }

    /// First violated law, if any: the defining identity, `g_aa = e`, or the
    /// cocycle condition.
    pub fn verify(&self, maps: &[ParameterMap], group: &FiniteGroup) -> Option<String> {
        let m = self.table.len();
        for a in 0..m {
            if self.table[a][a] != group.identity_index() {
                return Some(format!("g_{a}{a} is not the identity"));
            }
            for b in 0..m {
                if !is_transition(&maps[a], &maps[b], group.element(self.table[a][b])) {
                    return Some(format!("g_{a}{b} does not carry '{}' onto '{}'", maps[a].name, maps[b].name));
                }
                for c in 0..m {
                    if group.product(self.table[a][b], self.table[b][c]) != self.table[a][c] {
                        return Some(format!("g_{a}{b} g_{b}{c} != g_{a}{c}"));
                    }
                }
            }
        }
        None
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TransitionFailure {
    /// No element carries parameter `a` onto parameter `b`.
    MissingPair {
        a: usize,
        b: usize,
    },
    /// Parameters `a` and `b` have different domains or value sets.
    Incompatible {
        a: usize,
        b: usize,
    },
    /// Every selection was examined and none satisfies the cocycle law.
    NoConsistentFamily {
        examined: usize,
    },
    BudgetExhausted {
        budget: usize,
    },
}

impl std::fmt::Display for TransitionFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            TransitionFailure::MissingPair { a, b } => {
                write!(f, "no group element carries experiment {a} onto experiment {b}")
            }
            TransitionFailure::Incompatible { a, b } => {
                write!(f, "experiments {a} and {b} do not share a value set")
            }
            TransitionFailure::NoConsistentFamily { examined } => {
                write!(f, "no selection satisfies g_ab g_bc = g_ac ({examined} examined)")
            }
            TransitionFailure::BudgetExhausted { budget } => {
                write!(f, "search budget of {budget} selections exhausted")
            }
        }
    }
}

/// Searches for a [`TransitionFamily`].
///
/// The first candidate of every pair is tried first.  If that selection
/// breaks the cocycle law, the search enumerates the row `g_0a`: a
/// consistent family is determined by that row through
/// `g_ab = g_0a⁻¹ g_0b`, so this covers every consistent family.
pub fn find_transition_family(
    maps: &[ParameterMap],
    group: &FiniteGroup,
    budget: usize,
) -> Result<TransitionFamily, TransitionFailure> {
    let m = maps.len();
    let mut candidates = vec![vec![Vec::new(); m]; m];
    for a in 0..m {
        for b in 0..m {
            let found = transition_candidates(&maps[a], &maps[b], group)
                .map_err(|_| TransitionFailure::Incompatible { a, b })?;
            if found.is_empty() {
                return Err(TransitionFailure::MissingPair { a, b });
            }
            candidates[a][b] = found;
        }
    }

    let greedy = TransitionFamily::from_table(
        (0..m)
            .map(|a| (0..m).map(|b| if a == b { group.identity_index() } else { candidates[a][b][0] }).collect())
            .collect(),
    );
    if greedy.verify(maps, group).is_none() {
        return Ok(greedy);
    }

    let mut row = vec![group.identity_index(); m];
    let mut examined = 0usize;
    let found = search_row(1, &mut row, &candidates, group, budget, &mut examined);
    match found {
        Some(true) => {
            let table =
                (0..m).map(|a| (0..m).map(|b| group.product(group.inverse(row[a]), row[b])).collect()).collect();
            let family = TransitionFamily::from_table(table);
            debug_assert!(family.verify(maps, group).is_none());
            Ok(family)
        }
        Some(false) => Err(TransitionFailure::NoConsistentFamily { examined }),
        None => Err(TransitionFailure::BudgetExhausted { budget }),
    }
}

/// Depth-first search over `row[a] = g_0a`.  `None` means the budget ran out.
fn search_row(
    a: usize,
    row: &mut Vec<usize>,
    candidates: &[Vec<Vec<usize>>],
    group: &FiniteGroup,
    budget: usize,
    examined: &mut usize,
) -> Option<bool> {
    let m = row.len();
    if a == m {
        return Some(true);
    }
    for &g in &candidates[0][a] {
        *examined += 1;
        if *examined > budget {
            return None;
        }
        row[a] = g;
        let consistent = (0..a).all(|b| {
            let g_ba = group.product(group.inverse(row[b]), g);
            let g_ab = group.inverse(g_ba);
            candidates[b][a].contains(&g_ba) && candidates[a][b].contains(&g_ab)
        });
        if consistent {
            match search_row(a + 1, row, candidates, group, budget, examined) {
                Some(true) => return Some(true),
                Some(false) => {}
                None => return None,
            }
        }
    }
    Some(false)
}

/// Outcome of the single-orbit check for one experiment.
#[derive(Debug, Clone)]
pub struct ExperimentCheck {
    pub name: String,
    pub num_values: usize,
    pub subgroup: FiniteGroup,
    /// Orbits of the induced action on the value set.
    pub value_orbits: Partition,
}

impl ExperimentCheck {
    pub fn single_orbit(&self) -> bool {
        self.value_orbits.is_single_block()
    }
}

/// Verdicts for the single-orbit, generation and transition assumptions.
#[derive(Debug, Clone)]
pub struct AssumptionReport {
    pub group_order: usize,
    pub experiments: Vec<ExperimentCheck>,
    /// Order of the group generated by all the maximal permissible subgroups.
    pub generated_order: usize,
    pub transitions: Result<TransitionFamily, TransitionFailure>,
}

impl AssumptionReport {
    pub fn single_orbit_holds(&self) -> bool {
        self.experiments.iter().all(ExperimentCheck::single_orbit)
    }

    pub fn generation_holds(&self) -> bool {
        self.generated_order == self.group_order
    }

    pub fn transitions_hold(&self) -> bool {
        self.transitions.is_ok()
    }

    pub fn all_hold(&self) -> bool {
        self.single_orbit_holds() && self.generation_holds() && self.transitions_hold()
    }

    pub fn family(&self) -> Option<&TransitionFamily> {
        self.transitions.as_ref().ok()
    }
}

pub fn check_assumptions(
    maps: &[ParameterMap],
    group: &FiniteGroup,
    budget: usize,
) -> Result<AssumptionReport, ParamError> {
    let mut experiments = Vec::with_capacity(maps.len());
    let mut union = Vec::new();
    for map in maps {
        let subgroup = maximal_permissible_subgroup(map, group)?;
        let value_orbits = orbits(&induced_action(map, &subgroup)?);
        union.extend(subgroup.parent_indices().unwrap_or(&[]).iter().copied());
        experiments.push(ExperimentCheck {
            name: map.name.clone(),
            num_values: map.num_values(),
            subgroup,
            value_orbits,
        });
    }
    union.sort_unstable();
    union.dedup();
    let generated_order = group.generated_subgroup(&union)?.order();
    let transitions = find_transition_family(maps, group, budget);
    Ok(AssumptionReport { group_order: group.order(), experiments, generated_order, transitions })
}
