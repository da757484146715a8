//! Worst-case verification by sampling the error ball.
//!
//! The certificate quantifies over linearized errors; this module evaluates
//! the exact (non-linearized) SINR of a configuration at sampled true
//! channels inside the uncertainty balls around the estimate — half drawn
//! uniformly in the ball interior, half on its boundary — and reports the
//! observed worst case. The gap between the certificate and this sampled
//! worst case is the logged first-order slack.

use crate::RobustError;
use nalgebra::DVector;
use num_complex::Complex64;
use rand::Rng;
use rha_estimate::EstimationResult;
use rha_model::{received_sinr, ChannelRealization, RhaConfiguration, ScenarioConfig};
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy)]
pub struct WorstCaseReport {
    pub worst_sinr: f64,
    pub mean_sinr: f64,
    pub samples: usize,
}

/// Evaluate the configuration's SINR over sampled perturbations of the
/// estimate: `n_interior` uniform ball samples plus `n_boundary` samples on
/// each ball's surface.
pub fn sample_worst_case<R: Rng>(
    sc: &ScenarioConfig,
    est: &EstimationResult,
    cfg: &RhaConfiguration,
    n_interior: usize,
    n_boundary: usize,
    rng: &mut R,
) -> Result<WorstCaseReport, RobustError> {
    let mut worst = f64::INFINITY;
    let mut acc = 0.0;
    let total = n_interior + n_boundary;
    for k in 0..total {
        let boundary = k >= n_interior;
        let d_theta_a = ball_sample(est.doa_alice.len(), est.rho_theta_alice, boundary, rng);
        let d_theta_j = ball_sample(est.doa_jam.len(), est.rho_theta_jam, boundary, rng);
        let d_g_a = complex_ball_sample(est.gains_alice.len(), est.rho_g_alice, boundary, rng);
        let d_g_j = complex_ball_sample(est.gains_jam.len(), est.rho_g_jam, boundary, rng);

        let lim = PI / 2.0 - 1e-9;
        let doa_alice: Vec<f64> = est
            .doa_alice
            .iter()
            .zip(&d_theta_a)
            .map(|(t, d)| (t + d).clamp(-lim, lim))
            .collect();
        let doa_jam: Vec<f64> = est
            .doa_jam
            .iter()
            .zip(&d_theta_j)
            .map(|(t, d)| (t + d).clamp(-lim, lim))
            .collect();
        let gains_alice = &est.gains_alice + &d_g_a;
        let gains_jam = &est.gains_jam + &d_g_j;

        let ch = ChannelRealization {
            doa_alice,
            doa_jam,
            gains_alice,
            gains_jam,
            pilot_alice: DVector::zeros(1),
            pilot_jam: DVector::zeros(1),
        };
        let sinr = received_sinr(sc, &ch, cfg)?;
        worst = worst.min(sinr);
        acc += sinr;
    }
    Ok(WorstCaseReport {
        worst_sinr: worst,
        mean_sinr: acc / total.max(1) as f64,
        samples: total,
    })
}

/// Uniform sample of a real vector with norm <= rho (or = rho on the boundary).
fn ball_sample<R: Rng>(dim: usize, rho: f64, boundary: bool, rng: &mut R) -> Vec<f64> {
    if dim == 0 || rho == 0.0 {
        return vec![0.0; dim];
    }
    let mut v: Vec<f64> = (0..dim).map(|_| gauss(rng)).collect();
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt().max(1e-300);
    let r = if boundary {
        rho
    } else {
        rho * rng.random::<f64>().powf(1.0 / dim as f64)
    };
    for x in &mut v {
        *x *= r / norm;
    }
    v
}

fn complex_ball_sample<R: Rng>(
    dim: usize,
    rho: f64,
    boundary: bool,
    rng: &mut R,
) -> DVector<Complex64> {
    if dim == 0 || rho == 0.0 {
        return DVector::zeros(dim);
    }
    let mut v = DVector::from_fn(dim, |_, _| Complex64::new(gauss(rng), gauss(rng)));
    let norm = v.norm().max(1e-300);
    let r = if boundary {
        rho
    } else {
        rho * rng.random::<f64>().powf(1.0 / (2.0 * dim as f64))
    };
    v *= Complex64::new(r / norm, 0.0);
    v
}

fn gauss<R: Rng>(rng: &mut R) -> f64 {
    let u1: f64 = rng.random::<f64>().max(1e-300);
    let u2: f64 = rng.random();
    (-2.0 * u1.ln()).sqrt() * (2.0 * PI * u2).cos()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_radius_sampling_reproduces_nominal() {
        let sc = ScenarioConfig::toy(2, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let ch = ChannelRealization::draw(&sc, &mut rng);
        let est = EstimationResult {
            doa_alice: ch.doa_alice.clone(),
            doa_jam: ch.doa_jam.clone(),
            gains_alice: ch.gains_alice.clone(),
            gains_jam: ch.gains_jam.clone(),
            rho_theta_alice: 0.0,
            rho_theta_jam: 0.0,
            rho_g_alice: 0.0,
            rho_g_jam: 0.0,
            sigma_alice: 1.0,
            sigma_jam: 1.0,
        };
        let cfg = RhaConfiguration::uniform(2, 2);
        let nominal = received_sinr(&sc, &ch, &cfg).unwrap();
        let rep = sample_worst_case(&sc, &est, &cfg, 10, 10, &mut rng).unwrap();
        assert!((rep.worst_sinr - nominal).abs() < 1e-12 * nominal.max(1.0));
        assert!((rep.mean_sinr - nominal).abs() < 1e-12 * nominal.max(1.0));
    }

    #[test]
    fn boundary_samples_sit_on_the_sphere() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for dim in [1usize, 3, 5] {
            let v = ball_sample(dim, 0.7, true, &mut rng);
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            assert!((norm - 0.7).abs() < 1e-12);
            let w = complex_ball_sample(dim, 0.3, false, &mut rng);
            assert!(w.norm() <= 0.3 + 1e-12);
        }
    }
}
