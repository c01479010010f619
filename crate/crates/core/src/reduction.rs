//! Model reduction by orbit closure, the sign-pattern census for the
//! componentwise scale group, and randomization strata of block designs.

use thiserror::Error;

use crate::group::{GroupAction, Partition, Permutation};
use crate::linalg::{self, c, CMatrix, HermitianEigen};

/// Largest design handled by [`randomization_strata`].
pub const MAX_DESIGN_UNITS: usize = 64;
/// Largest coordinate count for [`zero_pattern_orbits`].
pub const MAX_PATTERN_COORDINATES: usize = 20;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ReductionError {
    #[error("{what} has size {size}, above the limit {limit}")]
    TooLarge { what: &'static str, size: usize, limit: usize },
    #[error("coordinate count must be at least one")]
    NoCoordinates,
    #[error("coordinate {index} is out of range for {p} coordinates")]
    BadCoordinate { index: usize, p: usize },
    #[error("constraint {0} relates several coordinates; only per-coordinate sign and zero constraints are checked")]
    OutOfScope(String),
    #[error("point {0} is outside the action domain")]
    BadPoint(usize),
    #[error("invalid design: {0}")]
    BadDesign(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClosureVerdict {
    pub closed: bool,
    /// A point of the subset and a generator (parent element index) that
    /// moves it outside.
    pub witness: Option<(usize, usize)>,
}

/// A subset is closed iff every generator maps each of its points back
/// into it; closed subsets are exactly the unions of orbits.
pub fn orbit_closure_check(subset: &[usize], action: &GroupAction<'_>) -> Result<ClosureVerdict, ReductionError> {
    let n = action.domain_size();
    let mut member = vec![false; n];
    for &p in subset {
        if p >= n {
            return Err(ReductionError::BadPoint(p));
        }
        member[p] = true;
    }
    for &p in subset {
        for &g in action.group().generators() {
            if !member[action.act(g, p)] {
                return Ok(ClosureVerdict { closed: false, witness: Some((p, g)) });
            }
        }
    }
    Ok(ClosureVerdict { closed: true, witness: None })
}

/// Sign of one coefficient, which is all the scale group can see.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SignAtom {
    Neg,
    Zero,
    Pos,
}

impl SignAtom {
    pub const ALL: [SignAtom; 3] = [SignAtom::Neg, SignAtom::Zero, SignAtom::Pos];

    /// Image under multiplication by a negative scale factor; positive
    /// factors fix every atom.
    pub fn flip(self) -> SignAtom {
        match self {
            SignAtom::Neg => SignAtom::Pos,
            SignAtom::Zero => SignAtom::Zero,
            SignAtom::Pos => SignAtom::Neg,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Constraint {
    Zero(usize),
    NonZero(usize),
    Positive(usize),
    Negative(usize),
    Equal(usize, usize),
}

impl std::fmt::Display for Constraint {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Constraint::Zero(i) => write!(f, "b{i} = 0"),
            Constraint::NonZero(i) => write!(f, "b{i} != 0"),
            Constraint::Positive(i) => write!(f, "b{i} > 0"),
            Constraint::Negative(i) => write!(f, "b{i} < 0"),
            Constraint::Equal(i, j) => write!(f, "b{i} = b{j}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignVerdict {
    pub closed: bool,
    /// Coordinate and allowed atom whose image is not allowed.
    pub witness: Option<(usize, SignAtom)>,
}

/// Checks whether the set of coefficient vectors cut out by `constraints`
/// is a union of scale-group orbits.
pub fn check_sign_candidate(p: usize, constraints: &[Constraint]) -> Result<SignVerdict, ReductionError> {
    if p == 0 {
        return Err(ReductionError::NoCoordinates);
    }
    let mut allowed = vec![SignAtom::ALL.to_vec(); p];
    for &con in constraints {
        let (i, keep): (usize, fn(SignAtom) -> bool) = match con {
            Constraint::Zero(i) => (i, |a| a == SignAtom::Zero),
            Constraint::NonZero(i) => (i, |a| a != SignAtom::Zero),
            Constraint::Positive(i) => (i, |a| a == SignAtom::Pos),
            Constraint::Negative(i) => (i, |a| a == SignAtom::Neg),
            Constraint::Equal(..) => return Err(ReductionError::OutOfScope(con.to_string())),
        };
        if i >= p {
            return Err(ReductionError::BadCoordinate { index: i, p });
        }
        allowed[i].retain(|&a| keep(a));
    }
    for (i, atoms) in allowed.iter().enumerate() {
        if let Some(&a) = atoms.iter().find(|a| !atoms.contains(&a.flip())) {
            return Ok(SignVerdict { closed: false, witness: Some((i, a)) });
        }
    }
    Ok(SignVerdict { closed: true, witness: None })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ZeroPatternCensus {
    pub p: usize,
    /// Orbits of one coordinate's atoms under the scale group.
    pub coordinate_orbits: Vec<Vec<SignAtom>>,
    pub patterns: usize,
    pub closed_patterns: usize,
}

/// Certifies every one of the `2^p` zero patterns as a union of orbits.
pub fn zero_pattern_orbits(p: usize) -> Result<ZeroPatternCensus, ReductionError> {
    if p == 0 {
        return Err(ReductionError::NoCoordinates);
    }
    if p > MAX_PATTERN_COORDINATES {
        return Err(ReductionError::TooLarge { what: "coordinate count", size: p, limit: MAX_PATTERN_COORDINATES });
    }
    let mut coordinate_orbits: Vec<Vec<SignAtom>> = Vec::new();
    for a in SignAtom::ALL {
        if !coordinate_orbits.iter().any(|o| o.contains(&a)) {
            let mut orbit = vec![a, a.flip()];
            orbit.sort();
            orbit.dedup();
            coordinate_orbits.push(orbit);
        }
    }
    let patterns = 1usize << p;
    let mut closed_patterns = 0;
    for mask in 0..patterns {
        let constraints: Vec<Constraint> = (0..p).filter(|i| mask >> i & 1 == 1).map(Constraint::Zero).collect();
        if check_sign_candidate(p, &constraints)?.closed {
            closed_patterns += 1;
        }
    }
    Ok(ZeroPatternCensus { p, coordinate_orbits, patterns, closed_patterns })
}

/// Units, their blocks, and the treatment applied to each unit.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignSpec {
    pub units: Vec<String>,
    pub blocks: Partition,
    pub treatments: Vec<String>,
}

impl DesignSpec {
    /// `blocks = None` puts every unit in one block.
    pub fn new(
        units: Vec<String>,
        blocks: Option<Vec<Vec<usize>>>,
        treatments: Vec<String>,
    ) -> Result<Self, ReductionError> {
        let n = units.len();
        if n == 0 {
            return Err(ReductionError::BadDesign("no units".into()));
        }
        if treatments.len() != n {
            return Err(ReductionError::BadDesign(format!("{} treatments for {n} units", treatments.len())));
        }
        let blocks = blocks.unwrap_or_else(|| vec![(0..n).collect()]);
        let mut seen = vec![false; n];
        for &u in blocks.iter().flatten() {
            if u >= n || std::mem::replace(&mut seen[u], true) {
                return Err(ReductionError::BadDesign(format!("unit {u} is out of range or repeated")));
            }
        }
        if let Some(u) = seen.iter().position(|s| !s) {
            return Err(ReductionError::BadDesign(format!("unit '{}' is in no block", units[u])));
        }
        Ok(DesignSpec { units, blocks: Partition::from_blocks(blocks), treatments })
    }

    pub fn len(&self) -> usize {
        self.units.len()
    }

    pub fn is_empty(&self) -> bool {
        self.units.is_empty()
    }
}

/// Generators of the largest unit permutation group that maps blocks to
/// blocks: adjacent transpositions inside each block, and swaps of
/// consecutive blocks of equal size.
pub fn block_respecting_generators(design: &DesignSpec) -> Vec<Permutation> {
    let n = design.len();
    let transposition = |pairs: &[(usize, usize)]| {
        let mut img: Vec<usize> = (0..n).collect();
        for &(x, y) in pairs {
            img.swap(x, y);
        }
        Permutation::from_images(img).expect("swaps of distinct units form a permutation")
    };
    let mut gens = Vec::new();
    for block in design.blocks.blocks() {
        for w in block.windows(2) {
            gens.push(transposition(&[(w[0], w[1])]));
        }
    }
    let blocks = design.blocks.blocks();
    for (i, first) in blocks.iter().enumerate() {
        if let Some(next) = blocks[i + 1..].iter().find(|b| b.len() == first.len()) {
            let pairs: Vec<(usize, usize)> = first.iter().copied().zip(next.iter().copied()).collect();
            gens.push(transposition(&pairs));
        }
    }
    gens
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn find(&mut self, x: usize) -> usize {
        let mut root = x;
        while self.0[root] != root {
            root = self.0[root];
        }
        let mut y = x;
        while self.0[y] != root {
            y = std::mem::replace(&mut self.0[y], root);
        }
        root
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.0[ra.max(rb)] = ra.min(rb);
        }
    }
}

fn primes(count: usize) -> Vec<u64> {
    let mut out: Vec<u64> = Vec::with_capacity(count);
    let mut candidate = 2u64;
    while out.len() < count {
        if out.iter().take_while(|&&p| p * p <= candidate).all(|p| !candidate.is_multiple_of(*p)) {
            out.push(candidate);
        }
        candidate += 1;
    }
    out
}

#[derive(Debug, Clone)]
pub struct Stratum {
    pub dimension: usize,
    pub eigenvalue: f64,
    pub projector: CMatrix,
}

#[derive(Debug, Clone)]
pub struct StrataReport {
    pub units: usize,
    /// Orbit label of each ordered pair of units, row-major.
    pub pair_classes: Vec<usize>,
    /// The value given to each pair orbit (distinct primes).
    pub class_values: Vec<f64>,
    /// Sorted by dimension, then eigenvalue.
    pub strata: Vec<Stratum>,
    pub unit_orbits: Partition,
    /// Pair labels are preserved by every generator.
    pub pattern_invariant: bool,
    /// Largest `‖P_g C P_gᵀ − C‖_F` over generators.
    pub covariance_invariance_residual: f64,
    /// `‖Σ P_s − I‖_F`.
    pub projector_sum_residual: f64,
    /// Largest `‖P_g P_s P_gᵀ − P_s‖_F` over generators and strata.
    pub stratum_invariance_residual: f64,
}

impl StrataReport {
    pub fn transitive(&self) -> bool {
        self.unit_orbits.is_single_block()
    }

    pub fn dimensions(&self) -> Vec<usize> {
        self.strata.iter().map(|s| s.dimension).collect()
    }

    pub fn class_count(&self) -> usize {
        self.class_values.len()
    }

    pub fn covariance(&self) -> CMatrix {
        let n = self.units;
        CMatrix::from_fn(n, n, |i, j| c(self.class_values[self.pair_classes[i * n + j]], 0.0))
    }
}

/// Eigenspaces of the covariance pattern that is invariant under the
/// block-respecting group, with one generic value per pair orbit.
pub fn randomization_strata(design: &DesignSpec) -> Result<StrataReport, ReductionError> {
    let n = design.len();
    if n > MAX_DESIGN_UNITS {
        return Err(ReductionError::TooLarge { what: "design", size: n, limit: MAX_DESIGN_UNITS });
    }
    let gens = block_respecting_generators(design);

    let mut pairs = UnionFind((0..n * n).collect());
    let mut units = UnionFind((0..n).collect());
    for g in &gens {
        for i in 0..n {
            units.union(i, g.apply(i));
            for j in 0..n {
                pairs.union(i * n + j, g.apply(i) * n + g.apply(j));
            }
        }
    }
    let mut label_of_root = vec![usize::MAX; n * n];
    let mut pair_classes = vec![0; n * n];
    let mut classes = 0;
    for (idx, slot) in pair_classes.iter_mut().enumerate() {
        let root = pairs.find(idx);
        if label_of_root[root] == usize::MAX {
            label_of_root[root] = classes;
            classes += 1;
        }
        *slot = label_of_root[root];
    }
    let mut orbit_blocks: Vec<Vec<usize>> = vec![Vec::new(); n];
    for i in 0..n {
        let r = units.find(i);
        orbit_blocks[r].push(i);
    }
    orbit_blocks.retain(|b| !b.is_empty());

    let class_values: Vec<f64> = primes(classes).into_iter().map(|p| p as f64).collect();
    let pattern_invariant = gens
        .iter()
        .all(|g| (0..n).all(|i| (0..n).all(|j| pair_classes[g.apply(i) * n + g.apply(j)] == pair_classes[i * n + j])));

    let mut report = StrataReport {
        units: n,
        pair_classes,
        class_values,
        strata: Vec::new(),
        unit_orbits: Partition::from_blocks(orbit_blocks),
        pattern_invariant,
        covariance_invariance_residual: 0.0,
        projector_sum_residual: 0.0,
        stratum_invariance_residual: 0.0,
    };
    let cov = report.covariance();
    let perm_matrix =
        |g: &Permutation| CMatrix::from_fn(n, n, |r, col| if g.apply(r) == col { c(1.0, 0.0) } else { c(0.0, 0.0) });
    let eig = HermitianEigen::new(&cov, 1e-9);
    let mut strata: Vec<Stratum> = eig
        .blocks
        .iter()
        .map(|b| {
            let v = eig.vectors.columns(b.start, b.len());
            Stratum { dimension: b.len(), eigenvalue: eig.values[b.start], projector: v * v.adjoint() }
        })
        .collect();
    strata.sort_by(|x, y| x.dimension.cmp(&y.dimension).then(x.eigenvalue.total_cmp(&y.eigenvalue)));

    let total = strata.iter().fold(CMatrix::zeros(n, n), |acc, s| acc + &s.projector);
    report.projector_sum_residual = linalg::distance(&total, &linalg::identity(n));
    for g in &gens {
        let pg = perm_matrix(g);
        let conj = |m: &CMatrix| &pg * m * pg.transpose();
        report.covariance_invariance_residual =
            report.covariance_invariance_residual.max(linalg::distance(&conj(&cov), &cov));
        for s in &strata {
            report.stratum_invariance_residual =
                report.stratum_invariance_residual.max(linalg::distance(&conj(&s.projector), &s.projector));
        }
    }
    report.strata = strata;
    Ok(report)
}
