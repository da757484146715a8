//! Bisection over the target SINR.

use crate::errors::ErrorBall;
use crate::feasibility::{feasibility_sdp, RobustWitness};
use crate::stacked::StackedModel;
use crate::RobustError;

#[derive(Debug, Clone)]
pub struct BisectionOutcome {
    /// Largest feasible target found (within `kappa`).
    pub gamma: f64,
    pub witness: RobustWitness,
    pub iterations: usize,
    /// The per-antenna blocking constraints were dropped to restore
    /// feasibility at gamma = 0.
    pub blocking_relaxed: bool,
}

/// Absolute SINR upper bound for the search interval:
/// `P_a M^2 N^2 L_a^2 / sigma_n^2`.
pub fn gamma_upper_bound(model: &StackedModel) -> f64 {
    let m = model.num_antennas as f64;
    let n = model.elements_per_antenna as f64;
    let l = model.alice.paths as f64;
    model.signal_power * m * m * n * n * l * l / model.noise_power
}

/// Find the largest feasible target within absolute tolerance `kappa`.
///
/// The search interval is `[0, gamma_max]`; the iteration count is
/// `ceil(log2(gamma_max / kappa))`. If even `gamma = 0` is infeasible (the
/// blocking constraints cannot be enforced under the error balls), the
/// search retries without them and flags the outcome; the trial evaluation
/// then reflects the blocking violations in the feasible-probability metric.
pub fn bisection_search(
    model: &StackedModel,
    ball: &ErrorBall,
    kappa: f64,
    with_blocking: bool,
) -> Result<BisectionOutcome, RobustError> {
    bisection_on_interval(model, ball, gamma_upper_bound(model), kappa, with_blocking)
}

/// Multi-scale search for targets that may sit far below the absolute upper
/// bound: bisect `[0, hi]` at relative resolution, and when everything above
/// the resolution is infeasible, shrink `hi` to the previous resolution and
/// repeat. This keeps the relative accuracy of the returned target at
/// `kappa_rel` regardless of its magnitude.
pub fn bisection_search_adaptive(
    model: &StackedModel,
    ball: &ErrorBall,
    kappa_rel: f64,
    with_blocking: bool,
) -> Result<BisectionOutcome, RobustError> {
    let gamma_max = gamma_upper_bound(model);
    let mut hi = gamma_max;
    let mut total_iterations = 0usize;
    let mut last = None;
    for _phase in 0..8 {
        let kappa = kappa_rel * hi;
        let mut out = bisection_on_interval(model, ball, hi, kappa, with_blocking)?;
        total_iterations += out.iterations;
        let found = out.gamma >= kappa;
        out.iterations = total_iterations;
        if found || kappa <= 1e-12 * gamma_max {
            return Ok(out);
        }
        hi = kappa;
        last = Some(out);
    }
    Ok(last.expect("at least one phase ran"))
}

fn bisection_on_interval(
    model: &StackedModel,
    ball: &ErrorBall,
    gamma_hi: f64,
    kappa: f64,
    with_blocking: bool,
) -> Result<BisectionOutcome, RobustError> {
    if kappa <= 0.0 {
        return Err(RobustError::Invalid("kappa must be positive".into()));
    }

    let mut blocking = with_blocking;
    let base = feasibility_sdp(0.0, model, ball, blocking)?;
    let mut best = if base.feasible {
        base
    } else if blocking {
        blocking = false;
        let relaxed = feasibility_sdp(0.0, model, ball, false)?;
        if !relaxed.feasible {
            return Err(RobustError::NoFeasibleTarget);
        }
        relaxed
    } else {
        return Err(RobustError::NoFeasibleTarget);
    };
    let mut best_gamma = 0.0f64;

    let mut lo = 0.0f64;
    let mut hi = gamma_hi;
    let mut iterations = 0usize;
    while hi - lo > kappa {
        let mid = 0.5 * (lo + hi);
        iterations += 1;
        let out = feasibility_sdp(mid, model, ball, blocking)?;
        if out.feasible {
            best = out;
            best_gamma = mid;
            lo = mid;
        } else {
            hi = mid;
        }
        if iterations > 128 {
            break;
        }
    }

    Ok(BisectionOutcome {
        gamma: best_gamma,
        witness: best.witness.expect("feasible outcome carries a witness"),
        iterations,
        blocking_relaxed: !blocking && with_blocking,
    })
}
