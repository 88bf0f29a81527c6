//! Numerical rank, image and kernel of dense complex matrices.

use faer::Mat;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

/// Rank, orthonormal image and kernel of a matrix from one SVD.
#[derive(Debug, Clone)]
pub struct Decomposition {
    pub rank: usize,
    /// Singular values in decreasing order.
    pub singular_values: Vec<f64>,
    /// Orthonormal basis of the column space.
    pub image: Vec<DVector<Complex64>>,
    /// Orthonormal basis of the null space.
    pub kernel: Vec<DVector<Complex64>>,
}

fn to_faer(m: &DMatrix<Complex64>) -> Mat<Complex64> {
    Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

fn column(m: faer::MatRef<'_, Complex64>, j: usize) -> DVector<Complex64> {
    DVector::from_fn(m.nrows(), |i, _| m[(i, j)])
}

fn unit(n: usize, j: usize) -> DVector<Complex64> {
    DVector::from_fn(n, |i, _| Complex64::new(f64::from(u8::from(i == j)), 0.0))
}

/// Singular values above `rel_tol·σ_max` and above `floor` count as nonzero.
pub fn decompose(m: &DMatrix<Complex64>, rel_tol: f64, floor: f64) -> Decomposition {
    let (r, c) = m.shape();
    if r == 0 || c == 0 {
        return Decomposition {
            rank: 0,
            singular_values: Vec::new(),
            image: Vec::new(),
            kernel: (0..c).map(|j| unit(c, j)).collect(),
        };
    }
    let a = to_faer(m);
    // The thin SVD already has a complete right basis when r ≥ c.
    let svd = if r >= c { a.thin_svd() } else { a.svd() }.expect("SVD converges");
    let s = svd.S().column_vector();
    let singular_values: Vec<f64> = (0..r.min(c)).map(|k| s[k].re).collect();
    let largest = singular_values[0];
    let rank = singular_values
        .iter()
        .take_while(|&&x| x > floor && x > rel_tol * largest)
        .count();
    Decomposition {
        rank,
        image: (0..rank).map(|j| column(svd.U(), j)).collect(),
        kernel: (rank..c).map(|j| column(svd.V(), j)).collect(),
        singular_values,
    }
}

/// Orthonormal basis of the orthogonal complement of independent `vectors` in `ℂⁿ`.
pub fn complement(vectors: &[DVector<Complex64>], n: usize) -> Vec<DVector<Complex64>> {
    if vectors.is_empty() {
        return (0..n).map(|j| unit(n, j)).collect();
    }
    let a = Mat::from_fn(n, vectors.len(), |i, j| vectors[j][i]);
    let q = a.qr().compute_Q();
    (vectors.len().min(n)..n).map(|j| column(q.as_ref(), j)).collect()
}

/// Largest singular value.
pub fn spectral_norm(m: &DMatrix<Complex64>) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    to_faer(m)
        .singular_values()
        .expect("SVD converges")
        .first()
        .copied()
        .unwrap_or(0.0)
}
