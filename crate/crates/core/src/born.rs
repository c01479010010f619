//! Transition probabilities between coherent states, their density-matrix
//! form, and conditional expectations.

use thiserror::Error;

use crate::hilbert::AbstractRep;
use crate::linalg::{self, CMatrix};
use crate::states::{DensityMatrix, PureState, StateTable};

/// Computed probabilities within this distance of `[0, 1]` are clamped;
/// anything further out is an error.
pub const CLAMP_SLACK: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BornError {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("probability {0} lies outside [0, 1]")]
    OutOfRange(f64),
    #[error("experiment '{0}' has no parameter operator")]
    MissingOperator(String),
}

pub fn clamp_probability(p: f64) -> Result<f64, BornError> {
    if !(-CLAMP_SLACK..=1.0 + CLAMP_SLACK).contains(&p) {
        return Err(BornError::OutOfRange(p));
    }
    Ok(p.clamp(0.0, 1.0))
}

/// `|⟨v, w⟩|²`.
pub fn transition_probability(v: &PureState, w: &PureState) -> Result<f64, BornError> {
    if v.dimension() != w.dimension() {
        return Err(BornError::DimensionMismatch { left: v.dimension(), right: w.dimension() });
    }
    clamp_probability(linalg::inner(v.vector(), w.vector()).norm_sqr())
}

/// Entry `(k, i)` is the probability of value `i` of `target` given value
/// `k` of `source`.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionMatrix {
    pub source: usize,
    pub target: usize,
    pub entries: Vec<Vec<f64>>,
}

impl TransitionMatrix {
    pub fn size(&self) -> usize {
        self.entries.len()
    }

    pub fn row_sums(&self) -> Vec<f64> {
        self.entries.iter().map(|r| r.iter().sum()).collect()
    }

    pub fn column_sums(&self) -> Vec<f64> {
        (0..self.size()).map(|i| self.entries.iter().map(|r| r[i]).sum()).collect()
    }

    /// Largest deviation of a row or column sum from one.
    pub fn stochasticity_residual(&self) -> f64 {
        self.row_sums().into_iter().chain(self.column_sums()).map(|s| (s - 1.0).abs()).fold(0.0, f64::max)
    }

    pub fn transpose(&self) -> TransitionMatrix {
        let n = self.size();
        TransitionMatrix {
            source: self.target,
            target: self.source,
            entries: (0..n).map(|i| (0..n).map(|k| self.entries[k][i]).collect()).collect(),
        }
    }

    pub fn max_difference(&self, other: &TransitionMatrix) -> f64 {
        self.entries
            .iter()
            .flatten()
            .zip(other.entries.iter().flatten())
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max)
    }
}

pub fn transition_matrix(table: &StateTable, a: usize, b: usize) -> Result<TransitionMatrix, BornError> {
    let entries = table
        .states(a)
        .iter()
        .map(|v| table.states(b).iter().map(|w| transition_probability(v, w)).collect())
        .collect::<Result<Vec<Vec<f64>>, _>>()?;
    Ok(TransitionMatrix { source: a, target: b, entries })
}

/// `P(value i of b | ρ) = v_iᴴ ρ v_i`.
pub fn born_with_density(rho: &DensityMatrix, table: &StateTable, b: usize) -> Result<Vec<f64>, BornError> {
    if rho.dimension() != table.dimension() {
        return Err(BornError::DimensionMismatch { left: rho.dimension(), right: table.dimension() });
    }
    table
        .states(b)
        .iter()
        .map(|v| clamp_probability(linalg::inner(v.vector(), &(rho.matrix() * v.vector())).re))
        .collect()
}

/// `vᴴ T v`.
pub fn conditional_expectation(v: &PureState, t: &CMatrix) -> Result<f64, BornError> {
    if v.dimension() != t.nrows() {
        return Err(BornError::DimensionMismatch { left: v.dimension(), right: t.nrows() });
    }
    Ok(linalg::inner(v.vector(), &(t * v.vector())).re)
}

/// `tr(ρ T)`.
pub fn expectation_in_density(rho: &DensityMatrix, t: &CMatrix) -> Result<f64, BornError> {
    if rho.dimension() != t.nrows() {
        return Err(BornError::DimensionMismatch { left: rho.dimension(), right: t.nrows() });
    }
    Ok(linalg::trace(&(rho.matrix() * t)).re)
}

/// `E(λ^b | λ^a = λ_k^a)` computed from the operator `T^b`.
pub fn expectation_given_value(table: &StateTable, a: usize, k: usize, b: usize) -> Result<f64, BornError> {
    let t = table.operator(b).ok_or_else(|| BornError::MissingOperator(table.names()[b].clone()))?;
    conditional_expectation(&table.states(a)[k], t)
}

#[derive(Debug, Clone)]
pub struct SymmetryReport {
    pub max_deviation: f64,
    /// Element and state pair attaining the largest deviation.
    pub worst: Option<(usize, usize, usize)>,
    pub tolerance: f64,
}

impl SymmetryReport {
    pub fn holds(&self) -> bool {
        self.max_deviation < self.tolerance
    }
}

/// Checks `|⟨W(g)u, W(g)w⟩|² = |⟨u, w⟩|²` for every group element and
/// every pair of the given states.
pub fn check_transition_symmetry(w: &AbstractRep, states: &[PureState], tolerance: f64) -> SymmetryReport {
    let mut max_deviation = 0.0_f64;
    let mut worst = None;
    for (g, m) in w.matrices().iter().enumerate() {
        let images: Vec<_> = states.iter().map(|s| m * s.vector()).collect();
        for i in 0..states.len() {
            for j in 0..states.len() {
                let before = linalg::inner(states[i].vector(), states[j].vector()).norm_sqr();
                let after = linalg::inner(&images[i], &images[j]).norm_sqr();
                let d = (after - before).abs();
                if d > max_deviation {
                    max_deviation = d;
                    worst = Some((g, i, j));
                }
            }
        }
    }
    SymmetryReport { max_deviation, worst, tolerance }
}
