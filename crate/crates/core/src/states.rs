//! Coherent states indexed by (experiment, value), density matrices, the
//! factorization `g = g^c g_cb`, and commutant analysis of parameter
//! operators.

use std::collections::HashSet;

use thiserror::Error;

use crate::group::FiniteGroup;
use crate::hilbert::{build_t, AbstractRep};
use crate::linalg::{self, CMatrix, CVector, HermitianEigen};
use crate::params::{ParameterMap, TransitionFamily};

/// Two unit vectors are the same state when `|1 − |⟨u, v⟩|| < GCS_TOLERANCE`.
pub const GCS_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StateError {
    #[error("unknown experiment '{0}'")]
    UnknownExperiment(String),
    #[error("experiment '{experiment}' has no value index {value}")]
    UnknownValue { experiment: String, value: usize },
    #[error("vector is not a coherent state of any experiment (best overlap {best_overlap:.12})")]
    NotGcs { best_overlap: f64 },
    #[error("state matches values of several experiments: {matches:?}")]
    AmbiguousState { matches: Vec<(usize, usize)> },
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("the zero vector is not a state")]
    ZeroVector,
    #[error("matrix is not a density matrix: {0}")]
    NotDensity(String),
    #[error("element {element} has no factorization g = g^c g_cb")]
    NoFactorization { element: usize },
    #[error("element {element} has {count} factorizations g = g^c g_cb")]
    NotUnique { element: usize, count: usize },
    #[error("parameter '{0}' has no numeric eigenvalues")]
    MissingEigenvalues(String),
}

/// A unit vector in canonical phase, optionally tagged with the
/// (experiment, value) question it answers.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    vector: CVector,
    annotation: Option<(usize, usize)>,
}

impl PureState {
    /// Normalizes and phase-canonicalizes `v`.
    pub fn new(v: CVector) -> Result<Self, StateError> {
        let norm = v.norm();
        if norm < linalg::PHASE_ZERO_THRESHOLD {
            return Err(StateError::ZeroVector);
        }
        Ok(PureState { vector: linalg::canonical_phase(&v.unscale(norm)), annotation: None })
    }

    pub fn annotated(mut self, experiment: usize, value: usize) -> Self {
        self.annotation = Some((experiment, value));
        self
    }

    pub fn vector(&self) -> &CVector {
        &self.vector
    }

    pub fn annotation(&self) -> Option<(usize, usize)> {
        self.annotation
    }

    pub fn dimension(&self) -> usize {
        self.vector.len()
    }

    pub fn overlap(&self, other: &PureState) -> f64 {
        linalg::inner(&self.vector, &other.vector).norm()
    }

    pub fn same_ray(&self, other: &PureState, tol: f64) -> bool {
        linalg::phase_mismatch(&self.vector, &other.vector) < tol
    }

    pub fn projector(&self) -> CMatrix {
        linalg::outer(&self.vector, &self.vector)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: CMatrix,
}

impl DensityMatrix {
    /// Accepts `m` if it is Hermitian within `1e-12`, has trace one within
    /// `1e-10`, and no eigenvalue below `-1e-10`.
    pub fn new(m: CMatrix) -> Result<Self, StateError> {
        let herm = linalg::hermiticity_residual(&m);
        if herm > 1e-12 {
            return Err(StateError::NotDensity(format!("hermiticity residual {herm:.3e}")));
        }
        let tr = linalg::trace(&m);
        if (tr.re - 1.0).abs() > 1e-10 || tr.im.abs() > 1e-10 {
            return Err(StateError::NotDensity(format!("trace {tr}")));
        }
        let eig = HermitianEigen::new(&m, 1e-12);
        if let Some(&low) = eig.values.first() {
            if low < -1e-10 {
                return Err(StateError::NotDensity(format!("negative eigenvalue {low:.3e}")));
            }
        }
        Ok(DensityMatrix { matrix: m })
    }

    pub fn maximally_mixed(n: usize) -> Self {
        DensityMatrix { matrix: linalg::identity(n).unscale(n as f64) }
    }

    pub fn pure(state: &PureState) -> Self {
        DensityMatrix { matrix: state.projector() }
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn dimension(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn purity(&self) -> f64 {
        linalg::trace(&(&self.matrix * &self.matrix)).re
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        HermitianEigen::new(&self.matrix, 1e-12).values
    }
}

/// `g = g^c · g_cb` with `g^c` in the base subgroup.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Factorization {
    pub base_part: usize,
    pub experiment: usize,
    pub transition: usize,
}

/// Every factorization of `g`, trying each experiment's `g_cb` in turn.
pub fn factorizations(
    group: &FiniteGroup,
    base_subgroup: &FiniteGroup,
    family: &TransitionFamily,
    base: usize,
    g: usize,
) -> Vec<Factorization> {
    let members: HashSet<usize> = (0..base_subgroup.order()).map(|i| base_subgroup.to_parent(i)).collect();
    (0..family.len())
        .filter_map(|b| {
            let transition = family.get(base, b);
            let h = group.product(g, group.inverse(transition));
            members.contains(&h).then_some(Factorization { base_part: h, experiment: b, transition })
        })
        .collect()
}

pub fn decompose(
    group: &FiniteGroup,
    base_subgroup: &FiniteGroup,
    family: &TransitionFamily,
    base: usize,
    g: usize,
) -> Result<Factorization, StateError> {
    let found = factorizations(group, base_subgroup, family, base, g);
    match found.as_slice() {
        [] => Err(StateError::NoFactorization { element: g }),
        [one] => Ok(*one),
        many => Err(StateError::NotUnique { element: g, count: many.len() }),
    }
}

/// The states `v_k^a = W(g_ca) e_k` for every experiment, together with the
/// parameter operators `T^a` when eigenvalues are declared.
#[derive(Debug, Clone)]
pub struct StateTable {
    names: Vec<String>,
    values: Vec<Vec<String>>,
    eigenvalues: Vec<Option<Vec<f64>>>,
    states: Vec<Vec<PureState>>,
    operators: Vec<Option<CMatrix>>,
}

impl StateTable {
    pub fn new(
        maps: &[ParameterMap],
        w: &AbstractRep,
        family: &TransitionFamily,
        base: usize,
    ) -> Result<Self, StateError> {
        let n = w.dimension();
        let mut states = Vec::with_capacity(maps.len());
        for (a, map) in maps.iter().enumerate() {
            if map.num_values() != n {
                return Err(StateError::DimensionMismatch { expected: n, got: map.num_values() });
            }
            let u = w.matrix(family.get(base, a));
            let row = (0..n)
                .map(|k| PureState::new(u * linalg::basis_vector(n, k)).map(|s| s.annotated(a, k)))
                .collect::<Result<Vec<_>, _>>()?;
            states.push(row);
        }
        let t_base = maps[base].eigenvalues().map(linalg::diagonal);
        let operators = (0..maps.len()).map(|a| t_base.as_ref().map(|t| build_t(w, t, family, base, a))).collect();
        Ok(StateTable {
            names: maps.iter().map(|m| m.name().to_string()).collect(),
            values: maps.iter().map(|m| m.values().to_vec()).collect(),
            eigenvalues: maps.iter().map(|m| m.eigenvalues().map(<[f64]>::to_vec)).collect(),
            states,
            operators,
        })
    }

    pub fn num_experiments(&self) -> usize {
        self.names.len()
    }

    pub fn dimension(&self) -> usize {
        self.states.first().map_or(0, |row| row.len())
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn values(&self, a: usize) -> &[String] {
        &self.values[a]
    }

    pub fn eigenvalues(&self, a: usize) -> Option<&[f64]> {
        self.eigenvalues[a].as_deref()
    }

    pub fn experiment_index(&self, name: &str) -> Result<usize, StateError> {
        self.names.iter().position(|n| n == name).ok_or_else(|| StateError::UnknownExperiment(name.to_string()))
    }

    pub fn states(&self, a: usize) -> &[PureState] {
        &self.states[a]
    }

    /// `T^a = W(g_ca) T^c W(g_ca)ᴴ`, present when the base experiment
    /// declares eigenvalues.
    pub fn operator(&self, a: usize) -> Option<&CMatrix> {
        self.operators[a].as_ref()
    }

    pub fn all_states(&self) -> impl Iterator<Item = &PureState> {
        self.states.iter().flatten()
    }
}

pub fn state_from_question(table: &StateTable, a: usize, k: usize) -> Result<PureState, StateError> {
    let row = table.states.get(a).ok_or_else(|| StateError::UnknownExperiment(format!("#{a}")))?;
    row.get(k).cloned().ok_or_else(|| StateError::UnknownValue { experiment: table.names[a].clone(), value: k })
}

/// Every `(a, k)` with `|⟨v_k^a, v⟩| > 1 − tol`.
pub fn question_from_state(table: &StateTable, v: &PureState, tol: f64) -> Result<Vec<(usize, usize)>, StateError> {
    if v.dimension() != table.dimension() {
        return Err(StateError::DimensionMismatch { expected: table.dimension(), got: v.dimension() });
    }
    let mut best = 0.0_f64;
    let mut matches = Vec::new();
    for (a, row) in table.states.iter().enumerate() {
        for (k, s) in row.iter().enumerate() {
            let overlap = s.overlap(v);
            best = best.max(overlap);
            if overlap > 1.0 - tol {
                matches.push((a, k));
            }
        }
    }
    if matches.is_empty() {
        return Err(StateError::NotGcs { best_overlap: best });
    }
    Ok(matches)
}

/// Like [`question_from_state`], but refuses states that answer questions
/// of more than one experiment.
pub fn identify_question(table: &StateTable, v: &PureState, tol: f64) -> Result<Vec<(usize, usize)>, StateError> {
    let matches = question_from_state(table, v, tol)?;
    if matches.iter().any(|&(a, _)| a != matches[0].0) {
        return Err(StateError::AmbiguousState { matches });
    }
    Ok(matches)
}

/// `{W(g) v0 : g ∈ G}` up to phase, in group element order.
pub fn gcs_orbit(w: &AbstractRep, v0: &PureState, tol: f64) -> Vec<PureState> {
    let mut orbit: Vec<PureState> = Vec::new();
    for m in w.matrices() {
        let s = PureState { vector: linalg::canonical_phase(&(m * v0.vector())), annotation: None };
        if !orbit.iter().any(|o| o.same_ray(&s, tol)) {
            orbit.push(s);
        }
    }
    orbit
}

#[derive(Debug, Clone)]
pub struct StateAssumptionReport {
    pub group_order: usize,
    pub orbit_size: usize,
    /// First pair `g ≠ h` with `W(g)v0` and `W(h)v0` on the same ray.
    pub injectivity_witness: Option<(usize, usize)>,
    /// Eigenbasis states `(a, k)` missing from the orbit of `v0`.
    pub coverage_missing: Vec<(usize, usize)>,
}

impl StateAssumptionReport {
    pub fn injective(&self) -> bool {
        self.injectivity_witness.is_none()
    }

    /// Finite stand-in for "the orbit is every unit vector": the orbit
    /// contains every eigenbasis state of every experiment.
    pub fn coverage_surrogate(&self) -> bool {
        self.coverage_missing.is_empty()
    }
}

pub fn check_state_assumptions(w: &AbstractRep, v0: &PureState, table: &StateTable, tol: f64) -> StateAssumptionReport {
    let images: Vec<CVector> = w.matrices().iter().map(|m| m * v0.vector()).collect();
    let mut injectivity_witness = None;
    'outer: for g in 0..images.len() {
        for h in g + 1..images.len() {
            if linalg::phase_mismatch(&images[g], &images[h]) < tol {
                injectivity_witness = Some((g, h));
                break 'outer;
            }
        }
    }
    let orbit = gcs_orbit(w, v0, tol);
    let mut coverage_missing = Vec::new();
    for (a, row) in table.states.iter().enumerate() {
        for (k, s) in row.iter().enumerate() {
            if !orbit.iter().any(|o| o.same_ray(s, tol)) {
                coverage_missing.push((a, k));
            }
        }
    }
    StateAssumptionReport { group_order: images.len(), orbit_size: orbit.len(), injectivity_witness, coverage_missing }
}

/// `ρ = Σ_k π(k) v_k v_kᴴ`.
pub fn density_from_distribution(pi: &[f64], states: &[PureState]) -> Result<DensityMatrix, StateError> {
    if pi.len() != states.len() {
        return Err(StateError::InvalidDistribution(format!("{} weights for {} states", pi.len(), states.len())));
    }
    if let Some(p) = pi.iter().find(|p| !p.is_finite() || **p < 0.0) {
        return Err(StateError::InvalidDistribution(format!("weight {p} is negative")));
    }
    let total: f64 = pi.iter().sum();
    if (total - 1.0).abs() > 1e-12 {
        return Err(StateError::InvalidDistribution(format!("weights sum to {total}")));
    }
    let n = states.first().map_or(0, PureState::dimension);
    let mut rho = CMatrix::zeros(n, n);
    for (p, s) in pi.iter().zip(states) {
        if *p > 0.0 {
            rho += s.projector().scale(*p);
        }
    }
    Ok(DensityMatrix { matrix: rho })
}

/// `Σ_k λ_k v_k v_kᴴ` over the states of experiment `a`.
pub fn parameter_operator(table: &StateTable, a: usize) -> Result<CMatrix, StateError> {
    let eig = table.eigenvalues(a).ok_or_else(|| StateError::MissingEigenvalues(table.names[a].clone()))?;
    let n = table.dimension();
    Ok(table.states[a].iter().zip(eig).fold(CMatrix::zeros(n, n), |acc, (s, &l)| acc + s.projector().scale(l)))
}

#[derive(Debug, Clone)]
pub struct CommutantReport {
    /// Dimension of `{X : TX = XT}` from the null space of the linear system.
    pub dimension: usize,
    pub basis: Vec<CMatrix>,
    pub multiplicities: Vec<usize>,
    /// A commuting matrix that is not a function of `T`, when one exists.
    pub witness: Option<CMatrix>,
}

impl CommutantReport {
    pub fn predicted_dimension(&self) -> usize {
        self.multiplicities.iter().map(|m| m * m).sum()
    }

    pub fn is_maximal(&self) -> bool {
        self.dimension == self.multiplicities.len() && self.multiplicities.iter().all(|&m| m == 1)
    }
}

/// Solves `TX − XT = 0` as an `n² × n²` linear system.
pub fn commutant_analysis(t: &CMatrix, tol: f64) -> CommutantReport {
    let n = t.nrows();
    let idx = |row: usize, col: usize| col * n + row;
    let mut system = CMatrix::zeros(n * n, n * n);
    for i in 0..n {
        for j in 0..n {
            let eq = idx(i, j);
            for l in 0..n {
                system[(eq, idx(l, j))] += t[(i, l)];
                system[(eq, idx(i, l))] -= t[(l, j)];
            }
        }
    }
    let basis: Vec<CMatrix> =
        linalg::null_space(&system, tol).into_iter().map(|v| CMatrix::from_column_slice(n, n, v.as_slice())).collect();
    let eig = HermitianEigen::new(t, tol);
    let witness = eig.blocks.iter().find(|b| b.len() > 1).map(|b| {
        let v1 = eig.vector(b.start);
        let v2 = eig.vector(b.start + 1);
        linalg::outer(&v1, &v1) + linalg::outer(&v2, &v2).scale(2.0)
    });
    CommutantReport { dimension: basis.len(), basis, multiplicities: eig.multiplicities(), witness }
}

/// Simultaneous eigenbasis of two commuting Hermitian matrices.
#[derive(Debug, Clone)]
pub struct CommonEigenbasis {
    pub vectors: CMatrix,
    /// Largest `‖A v − (vᴴAv) v‖` over the columns.
    pub residual_a: f64,
    pub residual_b: f64,
}

/// Diagonalizes `a`, then diagonalizes `b` inside each eigenspace of `a`.
/// Returns `None` when `‖AB − BA‖_F` exceeds `tol`.
pub fn common_eigenbasis(a: &CMatrix, b: &CMatrix, tol: f64) -> Option<CommonEigenbasis> {
    if linalg::distance(&(a * b), &(b * a)) > tol {
        return None;
    }
    let n = a.nrows();
    let eig_a = HermitianEigen::new(a, 1e-9);
    let mut vectors = CMatrix::zeros(n, n);
    for block in &eig_a.blocks {
        let q = eig_a.vectors.columns(block.start, block.len()).into_owned();
        let restricted = q.adjoint() * b * &q;
        let inner = HermitianEigen::new(&restricted, 1e-9);
        let rotated = q * inner.vectors;
        vectors.columns_mut(block.start, block.len()).copy_from(&rotated);
    }
    let residual = |m: &CMatrix| {
        (0..n)
            .map(|k| {
                let v = vectors.column(k).into_owned();
                let mu = linalg::inner(&v, &(m * &v));
                (m * &v - v * mu).norm()
            })
            .fold(0.0, f64::max)
    };
    Some(CommonEigenbasis { residual_a: residual(a), residual_b: residual(b), vectors })
}

/// The coordinate vector `e_k` as a state.
pub fn unit_state(n: usize, k: usize) -> PureState {
    PureState { vector: linalg::basis_vector(n, k), annotation: None }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c;

    #[test]
    fn new_state_is_normalized_and_canonical() {
        let v = CVector::from_vec(vec![c(0.0, 3.0), c(4.0, 0.0)]);
        let s = PureState::new(v).unwrap();
        assert!((s.vector().norm() - 1.0).abs() < 1e-15);
        assert!(s.vector()[0].im.abs() < 1e-15 && s.vector()[0].re > 0.0);
        assert_eq!(PureState::new(CVector::zeros(2)), Err(StateError::ZeroVector));
    }

    #[test]
    fn density_validation() {
        assert!(DensityMatrix::new(linalg::diagonal(&[0.5, 0.5])).is_ok());
        assert!(DensityMatrix::new(linalg::diagonal(&[1.5, -0.5])).is_err());
        assert!(DensityMatrix::new(linalg::diagonal(&[0.5, 0.4])).is_err());
        let rho = DensityMatrix::maximally_mixed(4);
        assert!((rho.purity() - 0.25).abs() < 1e-15);
    }

    #[test]
    fn distribution_weights_are_validated() {
        let states = vec![unit_state(2, 0), unit_state(2, 1)];
        assert!(density_from_distribution(&[0.5, 0.6], &states).is_err());
        assert!(density_from_distribution(&[1.2, -0.2], &states).is_err());
        assert!(density_from_distribution(&[1.0], &states).is_err());
        let rho = density_from_distribution(&[0.5, 0.5], &states).unwrap();
        assert!((rho.purity() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn commutant_of_small_diagonals() {
        let r = commutant_analysis(&linalg::diagonal(&[1.0, 2.0, 3.0]), 1e-10);
        assert_eq!((r.dimension, r.is_maximal()), (3, true));
        assert!(r.witness.is_none());

        let t = linalg::diagonal(&[1.0, 1.0, 2.0]);
        let r = commutant_analysis(&t, 1e-10);
        assert_eq!((r.dimension, r.is_maximal()), (5, false));
        let x = r.witness.unwrap();
        assert!(linalg::distance(&(&t * &x), &(&x * &t)) < 1e-12);
        // Not a function of T: differs on the degenerate eigenspace.
        assert!((x[(0, 0)] - x[(1, 1)]).norm() > 0.5);

        assert_eq!(commutant_analysis(&linalg::identity(3), 1e-10).dimension, 9);
    }

    #[test]
    fn common_basis_of_commuting_pair() {
        let a = linalg::diagonal(&[1.0, 1.0, 2.0]);
        let mut b = CMatrix::zeros(3, 3);
        b[(0, 1)] = c(1.0, 0.0);
        b[(1, 0)] = c(1.0, 0.0);
        let common = common_eigenbasis(&a, &b, 1e-12).unwrap();
        assert!(common.residual_a < 1e-8 && common.residual_b < 1e-8);
        let mut nc = b.clone();
        nc[(0, 2)] = c(1.0, 0.0);
        nc[(2, 0)] = c(1.0, 0.0);
        assert!(common_eigenbasis(&a, &nc, 1e-12).is_none());
    }
}
