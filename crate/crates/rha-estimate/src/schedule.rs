//! Pattern schedule: one +-1 element pattern per snapshot, plus the Hadamard
//! combiner that synthesizes the virtual antennas.

use crate::hadamard::{hadamard_matrix, HadamardError};
use crate::EstimateError;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

/// `K_r` snapshot patterns (each a length-N +-1 vector, realizable with
/// 1-bit element control) and the `K_r x K_r` combiner with `C H^T = K_r I`.
#[derive(Debug, Clone)]
pub struct PatternSchedule {
    /// Hadamard matrix whose k-th column is the k-th snapshot pattern.
    pub patterns: DMatrix<f64>,
    /// Combiner; row i synthesizes the i-th virtual element set.
    pub combiner: DMatrix<f64>,
}

impl PatternSchedule {
    pub fn snapshots(&self) -> usize {
        self.patterns.ncols()
    }

    /// Pattern for snapshot k, as a unit-modulus complex vector (phases 0/pi).
    pub fn pattern(&self, k: usize) -> DVector<Complex64> {
        DVector::from_iterator(
            self.patterns.nrows(),
            self.patterns
                .column(k)
                .iter()
                .map(|&v| Complex64::new(v, 0.0)),
        )
    }
}

/// Build the schedule for `n` elements with `k_r` snapshots. The virtual
/// antenna synthesis requires `k_r = n` and a Hadamard matrix of order `n`.
pub fn build_pattern_schedule(n: usize, k_r: usize) -> Result<PatternSchedule, EstimateError> {
    if k_r != n {
        return Err(EstimateError::Schedule(format!(
            "snapshot count {k_r} must equal the element count {n}"
        )));
    }
    let h = hadamard_matrix(n).map_err(|e: HadamardError| EstimateError::Hadamard(e))?;
    // combiner C with C H^T = n I, i.e. C = H (since H^T H = n I).
    let combiner = h.clone();
    Ok(PatternSchedule {
        patterns: h,
        combiner,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_one_schedule() {
        let s = build_pattern_schedule(1, 1).unwrap();
        assert_eq!(s.patterns[(0, 0)], 1.0);
    }

    #[test]
    fn sylvester_8_is_orthogonal() {
        let s = build_pattern_schedule(8, 8).unwrap();
        let g = s.patterns.transpose() * &s.patterns;
        for i in 0..8 {
            for j in 0..8 {
                assert_eq!(g[(i, j)], if i == j { 8.0 } else { 0.0 });
            }
        }
    }

    #[test]
    fn paley_12_combines_to_scaled_identity() {
        let s = build_pattern_schedule(12, 12).unwrap();
        let prod = &s.combiner * s.patterns.transpose();
        for i in 0..12 {
            for j in 0..12 {
                let expect = if i == j { 12.0 } else { 0.0 };
                assert!((prod[(i, j)] - expect).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn mismatched_kr_rejected() {
        assert!(build_pattern_schedule(8, 4).is_err());
    }
}
