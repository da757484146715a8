//! Error-ball description and first-order linearization bounds.

use rha_estimate::EstimationResult;

/// Uncertainty radii for one side, plus the stacked-model scalings.
#[derive(Debug, Clone, Copy)]
pub struct SideBall {
    /// Angle radius: `||delta_theta|| <= rho_theta` (radians).
    pub rho_theta: f64,
    /// CSI radius: `||delta_g|| <= rho_g`.
    pub rho_g: f64,
    /// Expected path-gain magnitude.
    pub sigma: f64,
}

impl SideBall {
    /// Radius of the stacked CSI error `1_M (x) delta_g`.
    pub fn stacked_rho_g(&self, num_antennas: usize) -> f64 {
        (num_antennas as f64).sqrt() * self.rho_g
    }

    /// Radius of the stacked angle error `1_M (x) delta_theta`.
    pub fn stacked_rho_theta(&self, num_antennas: usize) -> f64 {
        (num_antennas as f64).sqrt() * self.rho_theta
    }

    /// Total-equivalent-error radius used by the per-antenna blocking
    /// constraint: `rho_theta sigma + rho_g`.
    pub fn total_error_radius(&self) -> f64 {
        self.rho_theta * self.sigma + self.rho_g
    }
}

/// Both sides' uncertainty.
#[derive(Debug, Clone, Copy)]
pub struct ErrorBall {
    pub alice: SideBall,
    pub jam: SideBall,
}

impl ErrorBall {
    pub fn from_estimate(est: &EstimationResult) -> Self {
        Self {
            alice: SideBall {
                rho_theta: est.rho_theta_alice,
                rho_g: est.rho_g_alice,
                sigma: est.sigma_alice,
            },
            jam: SideBall {
                rho_theta: est.rho_theta_jam,
                rho_g: est.rho_g_jam,
                sigma: est.sigma_jam,
            },
        }
    }

    pub fn zero() -> Self {
        let z = SideBall {
            rho_theta: 0.0,
            rho_g: 0.0,
            sigma: 1.0,
        };
        Self { alice: z, jam: z }
    }

    pub fn is_zero(&self) -> bool {
        self.alice.rho_theta == 0.0
            && self.alice.rho_g == 0.0
            && self.jam.rho_theta == 0.0
            && self.jam.rho_g == 0.0
    }

    /// Warn-level check for first-order validity of the angle linearization.
    pub fn linearization_warning(&self) -> Option<String> {
        let worst = self.alice.rho_theta.max(self.jam.rho_theta);
        if worst > 0.2 {
            Some(format!(
                "angle radius {worst:.3} rad exceeds the first-order validity guideline (0.2 rad)"
            ))
        } else {
            None
        }
    }
}

/// Upper bound on the relative error of the first-order phasor expansion
/// `exp(-j c dtheta) ~ 1 - j c dtheta` over `|dtheta| <= rho`, where
/// `c = k0 (r_n + d_m)` is the phase slope: the Taylor remainder
/// `(c rho)^2 / 2`.
pub fn linearization_bound(phase_slope: f64, rho_theta: f64) -> f64 {
    let x = phase_slope.abs() * rho_theta;
    0.5 * x * x
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;
    use std::f64::consts::PI;

    #[test]
    fn zero_angle_error_means_zero_pattern_error() {
        // delta_theta = 0: the first-order term vanishes exactly
        let slope = 2.0 * PI * 1.0;
        let exact = Complex64::new(0.0, -slope * 0.0).exp();
        let linear = Complex64::new(1.0, -slope * 0.0);
        assert_eq!((exact - linear).norm(), 0.0);
        assert_eq!(linearization_bound(slope, 0.0), 0.0);
    }

    #[test]
    fn taylor_remainder_bound_holds() {
        // dtheta = 0.01 rad, slope k0 (r + d) = 2 pi (one wavelength):
        // bound = (2 pi * 0.01)^2 / 2 ~ 2e-3 and the actual error is below it.
        let slope = 2.0 * PI;
        let dtheta = 0.01;
        let exact = Complex64::new(0.0, -slope * dtheta).exp();
        let linear = Complex64::new(1.0, -slope * dtheta);
        let err = (exact - linear).norm();
        let bound = linearization_bound(slope, dtheta);
        assert!(bound <= 2.1e-3, "bound {bound}");
        assert!(err <= bound, "error {err} vs bound {bound}");
    }

    #[test]
    fn uniform_slope_dominates_elementwise_slopes() {
        // r_1 < ... < r_N <= d: each per-element slope k0 (r_n + d_m) is at
        // most the uniform relaxed slope k0 d_(m+1).
        let d: f64 = 2.5;
        let d_e: f64 = 0.25;
        let n = 8usize;
        for mi in 0..4usize {
            let relaxed = 2.0 * PI * (mi as f64 + 1.0) * d;
            for ni in 0..n {
                let actual = 2.0 * PI * (ni as f64 * d_e + mi as f64 * d);
                assert!(actual <= relaxed + 1e-12);
            }
        }
    }

    #[test]
    fn stacked_radii_scale_with_sqrt_m() {
        let ball = SideBall {
            rho_theta: 0.1,
            rho_g: 0.2,
            sigma: 1.0,
        };
        assert!((ball.stacked_rho_g(4) - 0.4).abs() < 1e-15);
        assert!((ball.stacked_rho_theta(9) - 0.3).abs() < 1e-12);
        assert!((ball.total_error_radius() - 0.3).abs() < 1e-15);
    }
}
