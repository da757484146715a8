//! Complex Hermitian to real symmetric PSD embedding.
//!
//! `H` Hermitian of dimension n maps to the 2n x 2n real symmetric matrix
//!
//! ```text
//!   [ Re H   -Im H ]
//!   [ Im H    Re H ]
//! ```
//!
//! which is PSD iff `H` is PSD, with every eigenvalue of `H` appearing twice.
//! The map is multiplicative on rectangular matrices, so congruences
//! `K^H V K` pass through the embedding as real congruences.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum EmbedError {
    #[error("matrix is not Hermitian: max asymmetry {0:.3e} exceeds tolerance {1:.3e}")]
    NotHermitian(f64, f64),
    #[error("matrix is not square: {0}x{1}")]
    NotSquare(usize, usize),
}

/// Largest deviation `|H[i,j] - conj(H[j,i])|` over all entries.
pub fn hermitian_defect(h: &DMatrix<Complex64>) -> f64 {
    let n = h.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            worst = worst.max((h[(i, j)] - h[(j, i)].conj()).norm());
        }
    }
    worst
}

/// Embed a complex Hermitian matrix as a real symmetric matrix of doubled
/// dimension. Fails if the input deviates from Hermitian by more than `tol`.
pub fn embed_hermitian(h: &DMatrix<Complex64>, tol: f64) -> Result<DMatrix<f64>, EmbedError> {
    let n = h.nrows();
    if h.ncols() != n {
        return Err(EmbedError::NotSquare(h.nrows(), h.ncols()));
    }
    let defect = hermitian_defect(h);
    if defect > tol {
        return Err(EmbedError::NotHermitian(defect, tol));
    }
    Ok(embed_map(h))
}

/// The embedding applied to an arbitrary rectangular complex matrix:
/// `[[Re, -Im], [Im, Re]]`. Multiplicative: `embed(AB) = embed(A)embed(B)`.
pub fn embed_map(a: &DMatrix<Complex64>) -> DMatrix<f64> {
    let (m, n) = (a.nrows(), a.ncols());
    let mut out = DMatrix::<f64>::zeros(2 * m, 2 * n);
    for i in 0..m {
        for j in 0..n {
            let z = a[(i, j)];
            out[(i, j)] = z.re;
            out[(i, j + n)] = -z.im;
            out[(i + m, j)] = z.im;
            out[(i + m, j + n)] = z.re;
        }
    }
    out
}

/// Recover the complex Hermitian matrix from its real embedding by averaging
/// the two redundant copies. Inverse of [`embed_hermitian`] on its range; on
/// general symmetric input it projects onto the embedded subspace.
pub fn extract_hermitian(e: &DMatrix<f64>) -> DMatrix<Complex64> {
    let n = e.nrows() / 2;
    let mut h = DMatrix::<Complex64>::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let re = 0.5 * (e[(i, j)] + e[(i + n, j + n)]);
            let im = 0.5 * (e[(i + n, j)] - e[(i, j + n)]);
            h[(i, j)] = Complex64::new(re, im);
        }
    }
    h
}

/// Embed a complex vector as the stacked real vector `[Re; Im]`.
pub fn embed_vector(v: &DVector<Complex64>) -> DVector<f64> {
    let n = v.len();
    let mut out = DVector::<f64>::zeros(2 * n);
    for i in 0..n {
        out[i] = v[i].re;
        out[i + n] = v[i].im;
    }
    out
}
