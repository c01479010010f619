//! The regular representation on functions of the total parameter, the
//! invariant subspaces spanned by level-set indicators, and the abstract
//! representation `W` on the base subspace.

use std::collections::VecDeque;

use thiserror::Error;

use crate::group::{FiniteGroup, Permutation};
use crate::linalg::{self, c, CMatrix};
use crate::params::{ParameterMap, TransitionFamily};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HilbertError {
    #[error("parameter '{name}' has an empty level set for value '{value}'")]
    EmptyLevelSet { name: String, value: String },
    #[error("parameter '{0}' has no numeric eigenvalues")]
    MissingEigenvalues(String),
    #[error("subspace dimensions differ: {0:?}")]
    DimensionMismatch(Vec<usize>),
    #[error(
        "W is not well defined: element {element} reached with matrices {residual:.3e} apart \
         (via element {via} times generator {generator} of experiment {experiment})"
    )]
    AssumptionViolation { element: usize, via: usize, generator: usize, experiment: usize, residual: f64 },
    #[error("the experiment subgroups do not generate the group: {reached} of {order} elements reached")]
    NotGenerated { reached: usize, order: usize },
    #[error("matrix for generator {generator} is not unitary (residual {residual:.3e})")]
    UnitarityViolation { generator: usize, residual: f64 },
    #[error("explicit representation has {got} generator images for {expected} generators")]
    GeneratorCount { expected: usize, got: usize },
    #[error("explicit matrix for generator {generator} is {rows}x{cols}, expected {dim}x{dim}")]
    BadShape { generator: usize, rows: usize, cols: usize, dim: usize },
}

/// `U(g) f(φ) = f(φ·g)` on functions of the total parameter.
///
/// `U(g)` is the permutation matrix with a single one in row `φ`, at
/// column `φ·g`; only that column index is stored.
#[derive(Debug, Clone)]
pub struct RegularRep {
    columns: Vec<Permutation>,
}

/// Exact verification of `U(g)U(h) = U(gh)` over a multiplication table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegularRepCheck {
    pub pairs_checked: usize,
    pub failures: Vec<(usize, usize)>,
}

impl RegularRep {
    pub fn new(group: &FiniteGroup) -> Self {
        RegularRep { columns: group.elements().to_vec() }
    }

    pub fn dimension(&self) -> usize {
        self.columns.first().map_or(0, Permutation::degree)
    }

    pub fn len(&self) -> usize {
        self.columns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.columns.is_empty()
    }

    /// Column of the one in row `φ` of `U(g)`.
    #[inline]
    pub fn column(&self, g: usize, phi: usize) -> usize {
        self.columns[g].apply(phi)
    }

    /// `U(g)` as a 0/1 integer matrix.
    pub fn integer_matrix(&self, g: usize) -> Vec<Vec<i64>> {
        let n = self.dimension();
        (0..n).map(|row| (0..n).map(|col| i64::from(self.column(g, row) == col)).collect()).collect()
    }

    pub fn matrix(&self, g: usize) -> CMatrix {
        let n = self.dimension();
        CMatrix::from_fn(n, n, |r, col| if self.column(g, r) == col { c(1.0, 0.0) } else { c(0.0, 0.0) })
    }

    /// `U(g) M`: row `φ` of the result is row `φ·g` of `M`.
    pub fn apply_left(&self, g: usize, m: &CMatrix) -> CMatrix {
        CMatrix::from_fn(m.nrows(), m.ncols(), |r, col| m[(self.column(g, r), col)])
    }

    /// `U(g) M U(g)ᴴ`.
    pub fn conjugate(&self, g: usize, m: &CMatrix) -> CMatrix {
        CMatrix::from_fn(m.nrows(), m.ncols(), |r, col| m[(self.column(g, r), self.column(g, col))])
    }

    /// Multiplies the sparse permutation matrices for every pair and compares
    /// the result with `U(gh)` entry by entry.
    pub fn verify(&self, group: &FiniteGroup) -> RegularRepCheck {
        let m = group.order();
        let mut failures = Vec::new();
        for g in 0..m {
            for h in 0..m {
                let gh = group.product(g, h);
                let ok = (0..self.dimension()).all(|phi| self.column(h, self.column(g, phi)) == self.column(gh, phi));
                if !ok {
                    failures.push((g, h));
                }
            }
        }
        RegularRepCheck { pairs_checked: m * m, failures }
    }
}

/// The subspace of functions that depend on `φ` only through `λ(φ)`,
/// with its normalized indicator basis in declared value order.
#[derive(Debug, Clone)]
pub struct InvariantSubspace {
    pub experiment: String,
    /// `|Φ| × n`, column `k` is the indicator of level set `k` divided by
    /// the square root of its size.
    pub basis: CMatrix,
}

impl InvariantSubspace {
    pub fn dimension(&self) -> usize {
        self.basis.ncols()
    }

    pub fn projector(&self) -> CMatrix {
        &self.basis * self.basis.adjoint()
    }
}

pub fn indicator_basis(map: &ParameterMap) -> Result<InvariantSubspace, HilbertError> {
    let sets = map.level_sets();
    let mut basis = CMatrix::zeros(map.domain_size(), sets.len());
    for (k, set) in sets.iter().enumerate() {
        if set.is_empty() {
            return Err(HilbertError::EmptyLevelSet { name: map.name().to_string(), value: map.values()[k].clone() });
        }
        let w = 1.0 / (set.len() as f64).sqrt();
        for &phi in set {
            basis[(phi, k)] = c(w, 0.0);
        }
    }
    Ok(InvariantSubspace { experiment: map.name().to_string(), basis })
}

/// Residuals of the two invariance statements relating `H^a`, `H^b` and
/// the regular representation.
#[derive(Debug, Clone)]
pub struct SubspaceTransportReport {
    /// Largest `‖P U(g) P − U(g) P‖_F` over `g` in the subgroup of `a`.
    pub invariance_residual: f64,
    /// Parent indices of subgroup elements whose residual exceeded tolerance.
    pub invariance_failures: Vec<usize>,
    /// `‖P^b − U(g_ab) P^a U(g_ab)ᴴ‖_F`.
    pub transport_residual: f64,
    pub tolerance: f64,
}

impl SubspaceTransportReport {
    pub fn invariance_holds(&self) -> bool {
        self.invariance_failures.is_empty()
    }

    pub fn transport_holds(&self) -> bool {
        self.transport_residual < self.tolerance
    }
}

/// Checks that `H^a` is invariant under the subgroup of `a` and that
/// `U(g_ab)` carries `H^a` onto `H^b`.
///
/// `‖P U P − U P‖_F` equals `‖U B − B(Bᴴ U B)‖_F` for an orthonormal basis
/// `B` of the subspace, which avoids forming `|Φ| × |Φ|` products.
pub fn verify_subspace_transport(
    rep: &RegularRep,
    sub_a: &InvariantSubspace,
    subgroup_a: &FiniteGroup,
    sub_b: &InvariantSubspace,
    g_ab: usize,
    tolerance: f64,
) -> SubspaceTransportReport {
    let basis = &sub_a.basis;
    let mut invariance_residual = 0.0_f64;
    let mut invariance_failures = Vec::new();
    for i in 0..subgroup_a.order() {
        let g = subgroup_a.to_parent(i);
        let ub = rep.apply_left(g, basis);
        let coords = basis.adjoint() * &ub;
        let residual = linalg::distance(&ub, &(basis * coords));
        invariance_residual = invariance_residual.max(residual);
        if residual >= tolerance {
            invariance_failures.push(g);
        }
    }
    let transported = rep.conjugate(g_ab, &sub_a.projector());
    let transport_residual = linalg::distance(&sub_b.projector(), &transported);
    SubspaceTransportReport { invariance_residual, invariance_failures, transport_residual, tolerance }
}

/// The diagonal operator `S^a` in indicator coordinates.
pub fn build_s(map: &ParameterMap) -> Result<CMatrix, HilbertError> {
    let values = map.eigenvalues().ok_or_else(|| HilbertError::MissingEigenvalues(map.name().to_string()))?;
    Ok(linalg::diagonal(values))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RepOrigin {
    /// Assembled from the regular representation on the base subspace.
    Derived,
    /// Generator images supplied by the scenario.
    Explicit { projective: bool },
}

impl RepOrigin {
    pub fn is_projective(self) -> bool {
        matches!(self, RepOrigin::Explicit { projective: true })
    }
}

/// A unitary representation of the full group on an `n`-dimensional space.
#[derive(Debug, Clone)]
pub struct AbstractRep {
    dimension: usize,
    matrices: Vec<CMatrix>,
    origin: RepOrigin,
}

/// Residuals of the homomorphism and unitarity checks.
#[derive(Debug, Clone, Copy)]
pub struct RepCheck {
    pub pairs_checked: usize,
    /// Largest `‖W(g)W(h) − W(gh)‖_F`, taken up to a global phase for
    /// projective representations.
    pub homomorphism_residual: f64,
    pub unitarity_residual: f64,
    pub worst_pair: (usize, usize),
}

impl AbstractRep {
    /// Wraps matrices without any verification.  Intended for tests that
    /// need a deliberately broken representation.
    pub fn from_matrices_unchecked(matrices: Vec<CMatrix>, origin: RepOrigin) -> Self {
        let dimension = matrices.first().map_or(0, |m| m.nrows());
        AbstractRep { dimension, matrices, origin }
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn origin(&self) -> RepOrigin {
        self.origin
    }

    pub fn matrix(&self, g: usize) -> &CMatrix {
        &self.matrices[g]
    }

    pub fn matrices(&self) -> &[CMatrix] {
        &self.matrices
    }

    pub fn verify(&self, group: &FiniteGroup) -> RepCheck {
        let m = group.order();
        let projective = self.origin.is_projective();
        let mut homomorphism_residual = 0.0_f64;
        let mut worst_pair = (0, 0);
        for g in 0..m {
            for h in 0..m {
                let lhs = &self.matrices[g] * &self.matrices[h];
                let rhs = &self.matrices[group.product(g, h)];
                let r = if projective { linalg::phase_distance(&lhs, rhs) } else { linalg::distance(&lhs, rhs) };
                if r > homomorphism_residual {
                    homomorphism_residual = r;
                    worst_pair = (g, h);
                }
            }
        }
        let unitarity_residual = self.matrices.iter().map(linalg::unitarity_residual).fold(0.0, f64::max);
        RepCheck { pairs_checked: m * m, homomorphism_residual, unitarity_residual, worst_pair }
    }
}

/// Inputs for assembling `W` from the regular representation.
pub struct DerivedInputs<'a> {
    pub group: &'a FiniteGroup,
    pub rep: &'a RegularRep,
    /// One per experiment, in experiment order.
    pub subspaces: &'a [InvariantSubspace],
    /// Maximal permissible subgroup of each experiment, with parent indices.
    pub subgroups: &'a [FiniteGroup],
    pub family: &'a TransitionFamily,
    pub base: usize,
    /// Two products of the same element may differ by at most this much.
    pub consistency_tolerance: f64,
}

/// Assembles `W` on the base subspace `H = H^c`.
///
/// `K^a = U(g_ca) B^c` is the isometry from `H` onto `H^a` in indicator
/// coordinates.  Each element `g` of the subgroup of `a` is sent to
/// `K^aᴴ U(g) K^a`; these images are extended multiplicatively
/// breadth-first over the whole group, and every product reached by a
/// second route must agree with the first, up to a global phase.
pub fn build_w_derived(inputs: &DerivedInputs<'_>) -> Result<AbstractRep, HilbertError> {
    let DerivedInputs { group, rep, subspaces, subgroups, family, base, consistency_tolerance } = *inputs;
    let dims: Vec<usize> = subspaces.iter().map(InvariantSubspace::dimension).collect();
    if dims.windows(2).any(|w| w[0] != w[1]) {
        return Err(HilbertError::DimensionMismatch(dims));
    }
    let base_basis = &subspaces[base].basis;

    // Generator images: (parent element, experiment, matrix).
    let mut images = Vec::new();
    for (a, subgroup) in subgroups.iter().enumerate() {
        let k_a = rep.apply_left(family.get(base, a), base_basis);
        let k_a_adj = k_a.adjoint();
        for i in 0..subgroup.order() {
            let g = subgroup.to_parent(i);
            images.push((g, a, &k_a_adj * rep.apply_left(g, &k_a)));
        }
    }

    let matrices = extend_multiplicatively(group, &images, dims[base], consistency_tolerance)?;
    Ok(AbstractRep { dimension: dims[base], matrices, origin: RepOrigin::Derived })
}

/// Builds `W` from explicit generator images, one per generator of `group`
/// in presentation order.
pub fn build_w_explicit(
    group: &FiniteGroup,
    generator_images: &[CMatrix],
    projective: bool,
    tolerance: f64,
) -> Result<AbstractRep, HilbertError> {
    let gens = group.generators();
    if gens.len() != generator_images.len() {
        return Err(HilbertError::GeneratorCount { expected: gens.len(), got: generator_images.len() });
    }
    let dim = generator_images.first().map_or(1, |m| m.nrows());
    let mut images = Vec::with_capacity(gens.len());
    for (i, (&g, m)) in gens.iter().zip(generator_images).enumerate() {
        if m.nrows() != dim || m.ncols() != dim {
            return Err(HilbertError::BadShape { generator: i, rows: m.nrows(), cols: m.ncols(), dim });
        }
        let residual = linalg::unitarity_residual(m);
        if residual > tolerance {
            return Err(HilbertError::UnitarityViolation { generator: i, residual });
        }
        images.push((g, 0, m.clone()));
    }
    let consistency = if projective { tolerance } else { tolerance.min(1e-8) };
    let matrices = extend_multiplicatively(group, &images, dim, consistency)?;
    Ok(AbstractRep { dimension: dim, matrices, origin: RepOrigin::Explicit { projective } })
}

fn extend_multiplicatively(
    group: &FiniteGroup,
    images: &[(usize, usize, CMatrix)],
    dim: usize,
    tolerance: f64,
) -> Result<Vec<CMatrix>, HilbertError> {
    let m = group.order();
    let mut assigned: Vec<Option<CMatrix>> = vec![None; m];
    assigned[0] = Some(linalg::identity(dim));
    let mut queue = VecDeque::from([0usize]);
    let mut reached = 1;
    while let Some(x) = queue.pop_front() {
        let wx = assigned[x].clone().expect("queued elements are assigned");
        for (generator, (s, experiment, image)) in images.iter().enumerate() {
            let y = group.product(x, *s);
            let candidate = &wx * image;
            match &assigned[y] {
                None => {
                    assigned[y] = Some(candidate);
                    queue.push_back(y);
                    reached += 1;
                }
                Some(existing) => {
                    let exact = linalg::distance(existing, &candidate);
                    if exact > tolerance && linalg::phase_distance(existing, &candidate) > tolerance {
                        return Err(HilbertError::AssumptionViolation {
                            element: y,
                            via: x,
                            generator,
                            experiment: *experiment,
                            residual: exact,
                        });
                    }
                }
            }
        }
    }
    if reached < m {
        return Err(HilbertError::NotGenerated { reached, order: m });
    }
    Ok(assigned.into_iter().map(|w| w.expect("all elements reached")).collect())
}

/// `T^a = W(g_ca) T^c W(g_ca)ᴴ`.
///
/// For a linear representation this is `W(g_ca) T^c W(g_ac)`; using the
/// adjoint keeps `T^a` self-adjoint when `W` is only projective.
pub fn build_t(w: &AbstractRep, t_base: &CMatrix, family: &TransitionFamily, base: usize, a: usize) -> CMatrix {
    let u = w.matrix(family.get(base, a));
    u * t_base * u.adjoint()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::ParameterMap;

    fn labels(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    fn cyclic(n: usize) -> FiniteGroup {
        let shift = Permutation::from_images((0..n).map(|i| (i + 1) % n).collect()).unwrap();
        FiniteGroup::closure(n, &[shift]).unwrap()
    }

    #[test]
    fn identity_maps_to_identity_and_trace_counts_fixed_points() {
        let g = cyclic(5);
        let rep = RegularRep::new(&g);
        assert_eq!(rep.matrix(0), linalg::identity(5));
        for i in 0..g.order() {
            let tr: i64 = (0..5).map(|k| rep.integer_matrix(i)[k][k]).sum();
            assert_eq!(tr as usize, g.element(i).fixed_points());
        }
        assert!(rep.verify(&g).failures.is_empty());
    }

    #[test]
    fn indicator_basis_shapes() {
        let injective = ParameterMap::new("i", labels(&["a", "b", "c"]), vec![1, 2, 0]).unwrap();
        let sub = indicator_basis(&injective).unwrap();
        assert_eq!(sub.basis[(2, 0)], c(1.0, 0.0));
        assert_eq!(sub.basis[(0, 1)], c(1.0, 0.0));
        let constant = ParameterMap::new("k", labels(&["a"]), vec![0; 4]).unwrap();
        let sub = indicator_basis(&constant).unwrap();
        assert!(sub.basis.iter().all(|z| (z.re - 0.5).abs() < 1e-15));
    }

    #[test]
    fn s_operator_is_diagonal_in_value_order() {
        let map = ParameterMap::new("s", labels(&["down", "up"]), vec![0, 1])
            .unwrap()
            .with_eigenvalues(vec![-1.0, 1.0])
            .unwrap();
        assert_eq!(build_s(&map).unwrap(), linalg::diagonal(&[-1.0, 1.0]));
        let bare = ParameterMap::new("s", labels(&["down", "up"]), vec![0, 1]).unwrap();
        assert!(matches!(build_s(&bare), Err(HilbertError::MissingEigenvalues(_))));
    }

    #[test]
    fn single_experiment_w_is_coordinatized_regular_rep() {
        // Cyclic group on 4 points, parameter = point mod 2: the group swaps
        // the two values.
        let g = cyclic(4);
        let map = ParameterMap::new("p", labels(&["even", "odd"]), vec![0, 1, 0, 1]).unwrap();
        let sub = indicator_basis(&map).unwrap();
        let subgroup = crate::params::maximal_permissible_subgroup(&map, &g).unwrap();
        let family = TransitionFamily::from_table(vec![vec![0]]);
        let rep = RegularRep::new(&g);
        let w = build_w_derived(&DerivedInputs {
            group: &g,
            rep: &rep,
            subspaces: std::slice::from_ref(&sub),
            subgroups: std::slice::from_ref(&subgroup),
            family: &family,
            base: 0,
            consistency_tolerance: 1e-8,
        })
        .unwrap();
        for i in 0..g.order() {
            let direct = sub.basis.adjoint() * rep.apply_left(i, &sub.basis);
            assert!(linalg::distance(w.matrix(i), &direct) < 1e-12);
        }
        let check = w.verify(&g);
        assert!(check.homomorphism_residual < 1e-10);
        assert!(check.unitarity_residual < 1e-10);
    }

    #[test]
    fn explicit_rep_rejects_non_unitary_generator() {
        let g = cyclic(2);
        let bad = linalg::diagonal(&[2.0, 1.0]);
        let err = build_w_explicit(&g, &[bad], false, 1e-10).unwrap_err();
        assert!(matches!(err, HilbertError::UnitarityViolation { generator: 0, .. }));
    }

    #[test]
    fn explicit_rep_detects_broken_relation() {
        // The generator of C2 must square to the identity; diag(1, i) does not.
        let g = cyclic(2);
        let m = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![c(1.0, 0.0), c(0.0, 1.0)]));
        let err = build_w_explicit(&g, &[m], false, 1e-10).unwrap_err();
        assert!(matches!(err, HilbertError::AssumptionViolation { .. }));
    }
}
