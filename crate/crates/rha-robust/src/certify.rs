//! Worst-case certification of a fixed beamforming vector.
//!
//! After rank-one extraction (and again after discretization) the relaxation
//! certificate no longer applies to the vector actually returned. Fixing
//! `V = v v^H` leaves tiny SDPs in `(b, multipliers)` only, so the largest
//! target that the signal and jamming LMIs still certify can be found by a
//! fast inner bisection. The value reported is therefore a valid worst-case
//! SINR lower bound for the returned vector itself; with zero radii it
//! collapses to the exact nominal SINR.

use crate::errors::ErrorBall;
use crate::lmi::{assemble_jam_lmi, assemble_signal_lmi, LmiVars, VSlot};
use crate::stacked::StackedModel;
use crate::RobustError;
use nalgebra::DVector;
use num_complex::Complex64;
use rha_conic::{CoeffRef, Rel, SdpProblem, Sign, SolveStatus, VarId};

fn sref(v: VarId) -> CoeffRef {
    match v {
        VarId::Scalar(i) => CoeffRef::Scalar(i),
        VarId::Herm(_) => panic!("scalar reference expected"),
    }
}

/// Largest certified worst-case SINR for the fixed vector `v`, within
/// relative tolerance `kappa_rel` of the nominal SINR.
pub fn certify_fixed_vector(
    model: &StackedModel,
    ball: &ErrorBall,
    v: &DVector<Complex64>,
    kappa_rel: f64,
) -> Result<f64, RobustError> {
    let nominal = model.nominal_sinr(v);
    if ball.is_zero() {
        return Ok(nominal);
    }
    let mut lo = 0.0f64;
    let mut hi = nominal * (1.0 + 1e-9);
    let kappa = (kappa_rel * nominal).max(nominal * 1e-9).max(1e-300);
    if !certified_at(model, ball, v, 0.0)? {
        // even gamma = 0 fails only when the jamming LMI cannot be certified;
        // report a zero lower bound
        return Ok(0.0);
    }
    while hi - lo > kappa {
        let mid = 0.5 * (lo + hi);
        if certified_at(model, ball, v, mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

fn certified_at(
    model: &StackedModel,
    ball: &ErrorBall,
    v: &DVector<Complex64>,
    gamma: f64,
) -> Result<bool, RobustError> {
    let mut p = SdpProblem::new();
    let b = p.scalar_var("b", Sign::NonNeg);
    let t = p.scalar_var("t", Sign::Free);
    p.objective_term(sref(t), 1.0);
    let cap = 1.0 + model.signal_power * model.f_vec(&model.alice).norm_squared();
    p.linear_constraint(vec![(sref(t), 1.0)], Rel::Le, cap);
    p.linear_constraint(
        vec![(sref(b), 1.0)],
        Rel::Le,
        crate::feasibility::b_upper_bound(model, ball),
    );

    let alpha1 = (ball.alice.rho_g > 0.0).then(|| p.scalar_var("alpha1", Sign::NonNeg));
    let beta1 = (ball.alice.rho_theta > 0.0).then(|| p.scalar_var("beta1", Sign::NonNeg));
    let alpha2 = (ball.jam.rho_g > 0.0).then(|| p.scalar_var("alpha2", Sign::NonNeg));
    let beta2 = (ball.jam.rho_theta > 0.0).then(|| p.scalar_var("beta2", Sign::NonNeg));
    let vars = LmiVars {
        v: VSlot::Fixed(v.clone()),
        b,
        t: Some(t),
        alpha1,
        beta1,
        alpha2,
        beta2,
    };
    p.psd_block(assemble_signal_lmi(model, ball, gamma, &vars));
    p.psd_block(assemble_jam_lmi(model, ball, &vars));

    let sol = p
        .solve_with_acceptable(1e-9, 5e-5)
        .map_err(|e| RobustError::Conic(format!("certify gamma={gamma}: {e}")))?;
    if sol.status != SolveStatus::Optimal {
        return Err(RobustError::Conic(format!(
            "certify gamma={gamma}: {:?}",
            sol.status
        )));
    }
    Ok(sol.scalar(t) > 1e-7 * cap)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stacked::build_stacked_model;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rha_estimate::EstimationResult;
    use rha_model::{ChannelRealization, ScenarioConfig};
    use std::f64::consts::PI;

    #[test]
    fn zero_radius_certificate_equals_nominal() {
        let sc = ScenarioConfig::toy(2, 4);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
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
        let model = build_stacked_model(&sc, &est).unwrap();
        let v = DVector::from_fn(model.dim(), |_, _| {
            Complex64::from_polar(1.0, rng.random::<f64>() * 2.0 * PI)
        });
        let cert = certify_fixed_vector(&model, &ErrorBall::zero(), &v, 1e-8).unwrap();
        let nominal = model.nominal_sinr(&v);
        assert!(
            (cert - nominal).abs() <= 1e-9 * nominal.max(1.0),
            "cert {cert} vs nominal {nominal}"
        );
    }

    #[test]
    fn certificate_is_below_nominal_with_uncertainty() {
        let sc = ScenarioConfig::toy(2, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let ch = ChannelRealization::draw(&sc, &mut rng);
        let est = EstimationResult {
            doa_alice: ch.doa_alice.clone(),
            doa_jam: ch.doa_jam.clone(),
            gains_alice: ch.gains_alice.clone(),
            gains_jam: ch.gains_jam.clone(),
            rho_theta_alice: 0.05,
            rho_theta_jam: 0.05,
            rho_g_alice: 0.1,
            rho_g_jam: 0.1,
            sigma_alice: 1.0,
            sigma_jam: 1.0,
        };
        let model = build_stacked_model(&sc, &est).unwrap();
        let ball = ErrorBall::from_estimate(&est);
        let v = DVector::from_fn(model.dim(), |_, _| {
            Complex64::from_polar(1.0, rng.random::<f64>() * 2.0 * PI)
        });
        let cert = certify_fixed_vector(&model, &ball, &v, 1e-4).unwrap();
        let nominal = model.nominal_sinr(&v);
        assert!(cert <= nominal * (1.0 + 1e-9), "cert {cert} > nominal {nominal}");
        assert!(cert >= 0.0);
    }
}
