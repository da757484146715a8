//! RHA configuration: per-element phase shifts and per-antenna weights.

use crate::scenario::{ModelError, ScenarioConfig};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use std::f64::consts::PI;

/// Phase shifts `omega` (M x N, unit modulus), antenna weights `w` (length M,
/// unit modulus) and the merged stacked vector `v` of length N*M with
/// `v[(m-1)N + n] = omega[m,n] * w[m]`.
#[derive(Debug, Clone)]
pub struct RhaConfiguration {
    pub phase_shifts: DMatrix<Complex64>,
    pub weights: DVector<Complex64>,
}

impl RhaConfiguration {
    pub fn new(
        phase_shifts: DMatrix<Complex64>,
        weights: DVector<Complex64>,
    ) -> Result<Self, ModelError> {
        if phase_shifts.nrows() != weights.len() {
            return Err(ModelError::Dimension(
                "phase shift rows must match weight count".into(),
            ));
        }
        let cfg = Self {
            phase_shifts,
            weights,
        };
        cfg.check_unit_modulus()?;
        Ok(cfg)
    }

    /// All-ones configuration (no phase shifts, unit weights).
    pub fn uniform(m: usize, n: usize) -> Self {
        Self {
            phase_shifts: DMatrix::from_element(m, n, Complex64::new(1.0, 0.0)),
            weights: DVector::from_element(m, Complex64::new(1.0, 0.0)),
        }
    }

    /// Build from discrete phase indices into the scenario's phase set, plus
    /// continuous weights.
    pub fn from_phase_indices(
        sc: &ScenarioConfig,
        indices: &[Vec<usize>],
        weights: DVector<Complex64>,
    ) -> Result<Self, ModelError> {
        let psi = sc.phase_set();
        let m = indices.len();
        let n = indices.first().map(|r| r.len()).unwrap_or(0);
        let mut omega = DMatrix::<Complex64>::zeros(m, n);
        for (mi, row) in indices.iter().enumerate() {
            if row.len() != n {
                return Err(ModelError::Dimension("ragged phase index rows".into()));
            }
            for (ni, &b) in row.iter().enumerate() {
                if b >= psi.len() {
                    return Err(ModelError::Dimension(format!(
                        "phase index {b} out of range for {} states",
                        psi.len()
                    )));
                }
                omega[(mi, ni)] = Complex64::from_polar(1.0, psi[b]);
            }
        }
        Self::new(omega, weights)
    }

    /// Interpret a stacked unit-modulus vector as a configuration with unit
    /// weights.
    pub fn from_stacked(v: &DVector<Complex64>, m: usize, n: usize) -> Result<Self, ModelError> {
        if v.len() != m * n {
            return Err(ModelError::Dimension("stacked vector length".into()));
        }
        let mut omega = DMatrix::<Complex64>::zeros(m, n);
        for mi in 0..m {
            for ni in 0..n {
                omega[(mi, ni)] = v[mi * n + ni];
            }
        }
        Self::new(omega, DVector::from_element(m, Complex64::new(1.0, 0.0)))
    }

    pub fn num_antennas(&self) -> usize {
        self.phase_shifts.nrows()
    }

    pub fn elements_per_antenna(&self) -> usize {
        self.phase_shifts.ncols()
    }

    /// Stacked vector v with the antenna weight merged into each element.
    pub fn stacked(&self) -> DVector<Complex64> {
        let (m, n) = self.phase_shifts.shape();
        DVector::from_iterator(
            m * n,
            (0..m).flat_map(|mi| {
                let w = self.weights[mi];
                (0..n).map(move |ni| (mi, ni, w))
            })
            .map(|(mi, ni, w)| self.phase_shifts[(mi, ni)] * w),
        )
    }

    /// The phase-shift row of antenna m.
    pub fn antenna_phases(&self, m: usize) -> DVector<Complex64> {
        self.phase_shifts.row(m).transpose()
    }

    fn check_unit_modulus(&self) -> Result<(), ModelError> {
        let tol = 1e-9;
        for v in self.phase_shifts.iter() {
            if (v.norm() - 1.0).abs() > tol {
                return Err(ModelError::InvalidScenario(format!(
                    "phase shift modulus {} != 1",
                    v.norm()
                )));
            }
        }
        for w in self.weights.iter() {
            if (w.norm() - 1.0).abs() > tol {
                return Err(ModelError::InvalidScenario(format!(
                    "weight modulus {} != 1",
                    w.norm()
                )));
            }
        }
        Ok(())
    }

    /// Check that every phase shift lies on the scenario's discrete set
    /// (within `tol` radians).
    pub fn is_discrete(&self, sc: &ScenarioConfig, tol: f64) -> bool {
        let states = (1usize << sc.control_bits) as f64;
        self.phase_shifts.iter().all(|v| {
            let phase = v.arg().rem_euclid(2.0 * PI);
            let steps = phase / (2.0 * PI / states);
            (steps - steps.round()).abs() * (2.0 * PI / states) < tol
                || (phase - 2.0 * PI).abs() < tol
        })
    }
}
