//! Dense complex linear algebra used throughout the crate.
//!
//! Matrices are small (the abstract Hilbert space rarely exceeds a few dozen
//! dimensions), so everything is dense and backed by `nalgebra`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

/// Magnitude below which a coordinate counts as zero when fixing phases.
pub const PHASE_ZERO_THRESHOLD: f64 = 1e-12;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

pub fn frobenius(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// `‖a − b‖_F`.
pub fn distance(a: &CMatrix, b: &CMatrix) -> f64 {
    frobenius(&(a - b))
}

/// Smallest `‖a − e^{iα} b‖_F` over all real `α`.
pub fn phase_distance(a: &CMatrix, b: &CMatrix) -> f64 {
    // Align the phase explicitly; the closed form through `|⟨b, a⟩|` loses
    // half the digits to cancellation.
    let overlap: Complex64 = a.iter().zip(b.iter()).map(|(x, y)| y.conj() * x).sum();
    let phase = if overlap.norm() > PHASE_ZERO_THRESHOLD { overlap / overlap.norm() } else { Complex64::new(1.0, 0.0) };
    a.iter().zip(b.iter()).map(|(x, y)| (x - phase * y).norm_sqr()).sum::<f64>().sqrt()
}

/// `‖mᴴm − I‖_F`.
pub fn unitarity_residual(m: &CMatrix) -> f64 {
    distance(&(m.adjoint() * m), &identity(m.nrows()))
}

/// `‖m − mᴴ‖_F`.
pub fn hermiticity_residual(m: &CMatrix) -> f64 {
    distance(m, &m.adjoint())
}

pub fn inner(u: &CVector, v: &CVector) -> Complex64 {
    u.dotc(v)
}

/// Rotates `v` so that its first coordinate with modulus above
/// [`PHASE_ZERO_THRESHOLD`] is real and positive.
pub fn canonical_phase(v: &CVector) -> CVector {
    match v.iter().find(|z| z.norm() > PHASE_ZERO_THRESHOLD) {
        Some(lead) => {
            let rot = lead.conj() / lead.norm();
            v.map(|z| z * rot)
        }
        None => v.clone(),
    }
}

/// `|1 − |⟨u, v⟩||` for unit vectors; zero iff they agree up to phase.
pub fn phase_mismatch(u: &CVector, v: &CVector) -> f64 {
    (1.0 - inner(u, v).norm()).abs()
}

/// Outer product `u vᴴ`.
pub fn outer(u: &CVector, v: &CVector) -> CMatrix {
    u * v.adjoint()
}

pub fn basis_vector(n: usize, k: usize) -> CVector {
    let mut v = CVector::zeros(n);
    v[k] = c(1.0, 0.0);
    v
}

pub fn diagonal(values: &[f64]) -> CMatrix {
    let n = values.len();
    CMatrix::from_fn(n, n, |i, j| if i == j { c(values[i], 0.0) } else { c(0.0, 0.0) })
}

pub fn trace(m: &CMatrix) -> Complex64 {
    m.diagonal().iter().sum()
}

/// Eigendecomposition of a Hermitian matrix.
///
/// Eigenvalues come back in ascending order.  Eigenvalues within `tol` of
/// each other form one degenerate block; the eigenvectors of a block are
/// canonicalized by Gram–Schmidt against the standard basis order, and every
/// column is phase-canonicalized, so the output is reproducible.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    /// Columns are orthonormal eigenvectors matching `values`.
    pub vectors: CMatrix,
    /// Index ranges into `values` of the degenerate blocks.
    pub blocks: Vec<std::ops::Range<usize>>,
}

impl HermitianEigen {
    pub fn new(m: &CMatrix, tol: f64) -> Self {
        let n = m.nrows();
        let sym = (m + m.adjoint()).scale(0.5);
        let eig = nalgebra::SymmetricEigen::new(sym);
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
        let values: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        let raw = CMatrix::from_fn(n, n, |r, col| eig.eigenvectors[(r, order[col])]);

        let scale = values.iter().fold(1.0_f64, |acc, v| acc.max(v.abs()));
        let mut blocks = Vec::new();
        let mut start = 0;
        for i in 1..=n {
            if i == n || values[i] - values[i - 1] > tol * scale {
                blocks.push(start..i);
                start = i;
            }
        }

        let mut vectors = CMatrix::zeros(n, n);
        for block in &blocks {
            let span: Vec<CVector> = block.clone().map(|k| raw.column(k).into_owned()).collect();
            let canon = canonical_block_basis(&span, n);
            for (offset, v) in canon.into_iter().enumerate() {
                vectors.set_column(block.start + offset, &v);
            }
        }
        let mut values = values;
        // Replace each block by its mean so degenerate values compare equal.
        for block in &blocks {
            let mean = values[block.clone()].iter().sum::<f64>() / block.len() as f64;
            for v in &mut values[block.clone()] {
                *v = mean;
            }
        }
        HermitianEigen { values, vectors, blocks }
    }

    pub fn multiplicities(&self) -> Vec<usize> {
        self.blocks.iter().map(|b| b.len()).collect()
    }

    pub fn vector(&self, k: usize) -> CVector {
        self.vectors.column(k).into_owned()
    }

    /// Largest `‖m v − μ v‖` over the returned pairs.
    pub fn max_residual(&self, m: &CMatrix) -> f64 {
        (0..self.values.len())
            .map(|k| {
                let v = self.vector(k);
                (m * &v - v.scale(self.values[k])).norm()
            })
            .fold(0.0, f64::max)
    }
}

/// Orthonormal basis of `span` obtained by projecting `e_0, e_1, …` onto it
/// and orthonormalizing in that order.
fn canonical_block_basis(span: &[CVector], n: usize) -> Vec<CVector> {
    if span.len() == 1 {
        return vec![canonical_phase(&span[0].normalize())];
    }
    let project = |x: &CVector| -> CVector { span.iter().fold(CVector::zeros(n), |acc, s| acc + s * inner(s, x)) };
    let mut out: Vec<CVector> = Vec::with_capacity(span.len());
    for k in 0..n {
        if out.len() == span.len() {
            break;
        }
        let mut w = project(&basis_vector(n, k));
        for u in &out {
            w -= u * inner(u, &w);
        }
        let norm = w.norm();
        if norm > 1e-6 {
            out.push(canonical_phase(&w.unscale(norm)));
        }
    }
    out
}

/// Singular values of `m` in descending order.
pub fn singular_values(m: &CMatrix) -> Vec<f64> {
    let svd = m.clone().svd(false, false);
    let mut s: Vec<f64> = svd.singular_values.iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Orthonormal basis of the null space of `m`, with the rank threshold
/// `tol · max(1, σ_max)`.
pub fn null_space(m: &CMatrix, tol: f64) -> Vec<CVector> {
    let cols = m.ncols();
    // Pad to square so the thin SVD exposes every right singular vector.
    let padded = if m.nrows() < cols {
        let mut p = CMatrix::zeros(cols, cols);
        p.view_mut((0, 0), (m.nrows(), cols)).copy_from(m);
        p
    } else {
        m.clone()
    };
    let svd = padded.svd(false, true);
    let v_t = svd.v_t.expect("requested right singular vectors");
    let sigma_max = svd.singular_values.iter().fold(0.0_f64, |a, &s| a.max(s));
    let threshold = tol * sigma_max.max(1.0);
    svd.singular_values
        .iter()
        .enumerate()
        .filter(|(_, &s)| s <= threshold)
        .map(|(i, _)| v_t.row(i).adjoint().into_owned())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn phase_distance_ignores_global_phase() {
        let a = CMatrix::from_fn(2, 2, |i, j| c(i as f64 + 1.0, j as f64));
        let rot = Complex64::from_polar(1.0, 0.7);
        let b = a.map(|z| z * rot);
        assert!(phase_distance(&a, &b) < 1e-12);
        assert!(distance(&a, &b) > 0.1);
    }

    #[test]
    fn canonical_phase_is_idempotent() {
        let v = CVector::from_vec(vec![c(0.0, 0.0), c(0.0, -0.6), c(0.8, 0.0)]);
        let once = canonical_phase(&v);
        assert!(once[1].im.abs() < 1e-15 && once[1].re > 0.0);
        assert_eq!(canonical_phase(&once), once);
    }

    #[test]
    fn degenerate_block_is_canonicalized_against_standard_basis() {
        let m = diagonal(&[2.0, 1.0, 2.0]);
        let eig = HermitianEigen::new(&m, 1e-9);
        assert_eq!(eig.multiplicities(), vec![1, 2]);
        assert!((eig.vector(1) - basis_vector(3, 0)).norm() < 1e-12);
        assert!((eig.vector(2) - basis_vector(3, 2)).norm() < 1e-12);
        assert!(eig.max_residual(&m) < 1e-12);
    }

    #[test]
    fn null_space_of_rank_one() {
        let m = CMatrix::from_fn(3, 3, |_, _| c(1.0, 0.0));
        assert_eq!(null_space(&m, 1e-10).len(), 2);
    }
}
