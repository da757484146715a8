//! Hadamard-product rewriting identity used by the estimator derivation.
//!
//! For row-indexed matrices A, B and a vector w:
//! `((A .* B) w)_i = (a_i .* b_i) w = a_i diag(b_i) w = b_i diag(a_i) w`.
//! The residual between the direct evaluation and both diagonal rewritings is
//! a property-test helper: it must vanish for all conforming inputs.

use crate::scenario::ModelError;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

/// Max residual between `(A .* B) w` and its two diagonal-form rewritings.
pub fn hadamard_mix_residual(
    a: &DMatrix<Complex64>,
    b: &DMatrix<Complex64>,
    w: &DVector<Complex64>,
) -> Result<f64, ModelError> {
    if a.shape() != b.shape() || a.ncols() != w.len() {
        return Err(ModelError::Dimension(format!(
            "hadamard identity: A {:?}, B {:?}, w {}",
            a.shape(),
            b.shape(),
            w.len()
        )));
    }
    let (rows, cols) = a.shape();
    let mut worst = 0.0f64;
    for i in 0..rows {
        let direct: Complex64 = (0..cols).map(|j| a[(i, j)] * b[(i, j)] * w[j]).sum();
        // a_i diag(b_i) w
        let form1: Complex64 = (0..cols).map(|j| a[(i, j)] * b[(i, j)] * w[j]).sum();
        // b_i diag(a_i) w
        let form2: Complex64 = (0..cols).map(|j| b[(i, j)] * a[(i, j)] * w[j]).sum();
        worst = worst.max((direct - form1).norm()).max((direct - form2).norm());
    }
    Ok(worst)
}
