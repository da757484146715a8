//! Feasibility of the relaxed robust design at a fixed target SINR.
//!
//! Both paths solve a phase-I problem: maximize a margin `t` by which every
//! constraint holds, capped above; the target is feasible when the optimal
//! margin is positive. With nonzero radii the problem is the full LMI system
//! over `(V, b, multipliers, t)`. With all radii zero the LMIs collapse to
//! scalar constraints, and the same decision is computed far cheaper from a
//! primal-form cone program whose Schur system has only `NM + M + 2` rows
//! instead of one per entry of `V`.

use crate::errors::ErrorBall;
use crate::lmi::{assemble_blocking_lmi, assemble_jam_lmi, assemble_signal_lmi, LmiVars, VSlot};
use crate::stacked::StackedModel;
use crate::RobustError;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rha_conic::cone::{BlockKind, BlockMat, ConeProgram, ConstraintMatrix, SymCoeff};
use rha_conic::embed::{embed_map, extract_hermitian};
use rha_conic::ipm::{self, IpmOptions, IpmStatus};
use rha_conic::{CoeffRef, Rel, SdpProblem, Sign, SolveStatus, VarId};

/// Feasibility margin below which a target is declared infeasible.
const MARGIN_EPS: f64 = 1e-7;

#[derive(Debug, Clone)]
pub struct RobustWitness {
    pub v_mat: DMatrix<Complex64>,
    pub b: f64,
    pub alpha: [f64; 2],
    pub beta: [f64; 2],
    pub eta: Vec<(f64, f64)>,
}

#[derive(Debug, Clone)]
pub struct FeasibilityOutcome {
    pub feasible: bool,
    /// Optimal phase-I margin (positive means strictly feasible).
    pub margin: f64,
    pub witness: Option<RobustWitness>,
}

/// Decide feasibility of the target `gamma`, optionally with the per-antenna
/// blocking constraints included.
pub fn feasibility_sdp(
    gamma: f64,
    model: &StackedModel,
    ball: &ErrorBall,
    with_blocking: bool,
) -> Result<FeasibilityOutcome, RobustError> {
    if gamma < 0.0 {
        return Err(RobustError::Invalid("gamma must be nonnegative".into()));
    }
    if gamma == 0.0 {
        // The signal constraint is vacuous and the jamming constraint is
        // absorbed by the bounded auxiliary b, so only the blocking family
        // decides; dropping the vacuous blocks avoids a flat optimal face
        // that degrades the interior-point solve.
        if !with_blocking {
            return Ok(FeasibilityOutcome {
                feasible: true,
                margin: f64::INFINITY,
                witness: Some(trivial_witness(model, ball)),
            });
        }
        if ball.is_zero() {
            return reduced_feasibility(0.0, model, true);
        }
        return blocking_only_feasibility(model, ball);
    }
    if ball.is_zero() {
        reduced_feasibility(gamma, model, with_blocking)
    } else {
        lmi_feasibility(gamma, model, ball, with_blocking)
    }
}

/// Witness for the unconstrained gamma = 0 case.
fn trivial_witness(model: &StackedModel, ball: &ErrorBall) -> RobustWitness {
    RobustWitness {
        v_mat: DMatrix::identity(model.dim(), model.dim()),
        b: b_upper_bound(model, ball),
        alpha: [0.0; 2],
        beta: [0.0; 2],
        eta: Vec::new(),
    }
}

/// Phase-I over the blocking family alone (used at gamma = 0).
fn blocking_only_feasibility(
    model: &StackedModel,
    ball: &ErrorBall,
) -> Result<FeasibilityOutcome, RobustError> {
    let nm = model.dim();
    let m_ant = model.num_antennas;
    let cap = scale_reference(model, true);

    let mut p = SdpProblem::new();
    let v = p.herm_var("V", nm);
    p.psd_var(v);
    let VarId::Herm(v_idx) = v else { unreachable!() };
    for n in 0..nm {
        p.linear_constraint(vec![(CoeffRef::HermRe(v_idx, n, n), 1.0)], Rel::Eq, 1.0);
    }
    // b never enters the blocking family; a dummy keeps LmiVars total
    let b = p.scalar_var("b", Sign::NonNeg);
    let t = p.scalar_var("t", Sign::Free);
    p.objective_term(sref(t), 1.0);
    p.linear_constraint(vec![(sref(t), 1.0)], Rel::Le, cap);
    let vars = LmiVars {
        v: VSlot::Var(v),
        b,
        t: Some(t),
        alpha1: None,
        beta1: None,
        alpha2: None,
        beta2: None,
    };
    let r_a = ball.alice.total_error_radius();
    let r_j = ball.jam.total_error_radius();
    let mut etas: Vec<(Option<VarId>, Option<VarId>)> = Vec::new();
    for m in 0..m_ant {
        let e1 = (r_a > 0.0).then(|| p.scalar_var(&format!("eta1_{m}"), Sign::NonNeg));
        let e2 = (r_j > 0.0).then(|| p.scalar_var(&format!("eta2_{m}"), Sign::NonNeg));
        p.psd_block(assemble_blocking_lmi(model, ball, m, e1, e2, &vars));
        etas.push((e1, e2));
    }
    let sol = p
        .solve_with_acceptable(1e-8, 5e-5)
        .map_err(|e| RobustError::Conic(format!("gamma=0 blocking: {e}")))?;
    if sol.status != SolveStatus::Optimal {
        return Err(RobustError::Conic(format!(
            "gamma=0 blocking phase returned {:?}",
            sol.status
        )));
    }
    let margin = sol.scalar(t);
    let feasible = margin > MARGIN_EPS * cap;
    let witness = feasible.then(|| RobustWitness {
        v_mat: sol.herm(v),
        b: b_upper_bound(model, ball),
        alpha: [0.0; 2],
        beta: [0.0; 2],
        eta: etas
            .iter()
            .map(|(e1, e2)| {
                (
                    e1.map(|e| sol.scalar(e)).unwrap_or(0.0),
                    e2.map(|e| sol.scalar(e)).unwrap_or(0.0),
                )
            })
            .collect(),
    });
    Ok(FeasibilityOutcome {
        feasible,
        margin,
        witness,
    })
}

fn scale_reference(model: &StackedModel, with_blocking: bool) -> f64 {
    let f_a = model.f_vec(&model.alice);
    let f_j = model.f_vec(&model.jam);
    let mut s = 1.0 + f_a.norm_squared() + f_j.norm_squared() + model.noise_power;
    if with_blocking {
        s += model.blocking_ratio;
    }
    s
}

/// Generous upper bound on the jam-plus-noise auxiliary `b`: without it the
/// variable is unbounded along the optimal face whenever `gamma = 0` removes
/// it from the signal constraint, which degrades the interior-point solve.
pub(crate) fn b_upper_bound(model: &StackedModel, ball: &ErrorBall) -> f64 {
    let nm = model.dim() as f64;
    let m = model.num_antennas;
    let extent = ball.jam.stacked_rho_g(m)
        + ball.jam.stacked_rho_theta(m)
            * model
                .jam
                .r_diag_g
                .iter()
                .map(|v| v.norm())
                .fold(0.0, f64::max);
    let reach = model.jam.map.norm() * (model.jam.gains.norm() + extent);
    model.noise_power + model.jam_power * nm * reach * reach + 1.0
}

fn sref(v: VarId) -> CoeffRef {
    match v {
        VarId::Scalar(i) => CoeffRef::Scalar(i),
        VarId::Herm(_) => panic!("scalar reference expected"),
    }
}

fn lmi_feasibility(
    gamma: f64,
    model: &StackedModel,
    ball: &ErrorBall,
    with_blocking: bool,
) -> Result<FeasibilityOutcome, RobustError> {
    let nm = model.dim();
    let m_ant = model.num_antennas;
    let cap = scale_reference(model, with_blocking);

    let mut p = SdpProblem::new();
    let v = p.herm_var("V", nm);
    p.psd_var(v);
    let VarId::Herm(v_idx) = v else { unreachable!() };
    for n in 0..nm {
        p.linear_constraint(vec![(CoeffRef::HermRe(v_idx, n, n), 1.0)], Rel::Eq, 1.0);
    }
    let b = p.scalar_var("b", Sign::NonNeg);
    let t = p.scalar_var("t", Sign::Free);
    p.objective_term(sref(t), 1.0);
    p.linear_constraint(vec![(sref(t), 1.0)], Rel::Le, cap);
    p.linear_constraint(vec![(sref(b), 1.0)], Rel::Le, b_upper_bound(model, ball));

    let need_a1 = ball.alice.rho_g > 0.0;
    let need_b1 = ball.alice.rho_theta > 0.0;
    let need_a2 = ball.jam.rho_g > 0.0;
    let need_b2 = ball.jam.rho_theta > 0.0;
    let alpha1 = need_a1.then(|| p.scalar_var("alpha1", Sign::NonNeg));
    let beta1 = need_b1.then(|| p.scalar_var("beta1", Sign::NonNeg));
    let alpha2 = need_a2.then(|| p.scalar_var("alpha2", Sign::NonNeg));
    let beta2 = need_b2.then(|| p.scalar_var("beta2", Sign::NonNeg));
    let vars = LmiVars {
        v: VSlot::Var(v),
        b,
        t: Some(t),
        alpha1,
        beta1,
        alpha2,
        beta2,
    };

    p.psd_block(assemble_signal_lmi(model, ball, gamma, &vars));
    p.psd_block(assemble_jam_lmi(model, ball, &vars));

    let mut etas: Vec<(Option<VarId>, Option<VarId>)> = Vec::new();
    if with_blocking {
        let r_a = ball.alice.total_error_radius();
        let r_j = ball.jam.total_error_radius();
        for m in 0..m_ant {
            let e1 = (r_a > 0.0).then(|| p.scalar_var(&format!("eta1_{m}"), Sign::NonNeg));
            let e2 = (r_j > 0.0).then(|| p.scalar_var(&format!("eta2_{m}"), Sign::NonNeg));
            p.psd_block(assemble_blocking_lmi(model, ball, m, e1, e2, &vars));
            etas.push((e1, e2));
        }
    }

    let sol = p
        .solve_with_acceptable(1e-8, 5e-5)
        .map_err(|e| RobustError::Conic(format!("gamma={gamma}: {e}")))?;
    if sol.status != SolveStatus::Optimal {
        return Err(RobustError::Conic(format!(
            "gamma={gamma}: feasibility phase returned {:?}",
            sol.status
        )));
    }
    let margin = sol.scalar(t);
    let feasible = margin > MARGIN_EPS * cap;
    let witness = feasible.then(|| RobustWitness {
        v_mat: sol.herm(v),
        b: sol.scalar(b),
        alpha: [
            alpha1.map(|a| sol.scalar(a)).unwrap_or(0.0),
            alpha2.map(|a| sol.scalar(a)).unwrap_or(0.0),
        ],
        beta: [
            beta1.map(|a| sol.scalar(a)).unwrap_or(0.0),
            beta2.map(|a| sol.scalar(a)).unwrap_or(0.0),
        ],
        eta: etas
            .iter()
            .map(|(e1, e2)| {
                (
                    e1.map(|e| sol.scalar(e)).unwrap_or(0.0),
                    e2.map(|e| sol.scalar(e)).unwrap_or(0.0),
                )
            })
            .collect(),
    });
    Ok(FeasibilityOutcome {
        feasible,
        margin,
        witness,
    })
}

/// Zero-radius fast path in primal standard form.
///
/// Constraints on `V` (PSD, unit diagonal):
///   signal+jam combined:  P_a <H_a,V> - gamma P_j <H_j,V> - gamma sigma^2 >= t s_c
///   blocking (optional):  xi P_a <H_am,V> - P_j <H_jm,V> >= t s_m
/// with `t = cap - tau`, `tau >= 0`, maximizing `t` (minimizing `tau`).
fn reduced_feasibility(
    gamma: f64,
    model: &StackedModel,
    with_blocking: bool,
) -> Result<FeasibilityOutcome, RobustError> {
    let nm = model.dim();
    let m_ant = model.num_antennas;
    let cap = scale_reference(model, with_blocking);
    let f_a = model.f_vec(&model.alice);
    let f_j = model.f_vec(&model.jam);

    let h_a = &f_a * f_a.adjoint();
    let h_j = &f_j * f_j.adjoint();
    // combined signal coefficient  P_a H_a - gamma P_j H_j
    let c_sig = &h_a * Complex64::new(model.signal_power, 0.0)
        - &h_j * Complex64::new(gamma * model.jam_power, 0.0);
    let s_c = (model.signal_power * f_a.norm_squared())
        .max(gamma * (model.jam_power * f_j.norm_squared() + model.noise_power))
        .max(1e-9);

    let n_blocking = if with_blocking { m_ant } else { 0 };
    let nonneg_dim = 1 + n_blocking + 1; // w_s, w_m..., tau
    let tau_slot = nonneg_dim - 1;

    let mut prog = ConeProgram::new(vec![BlockKind::Psd(2 * nm), BlockKind::NonNeg(nonneg_dim)]);
    prog.objective =
        ConstraintMatrix::new().with(1, SymCoeff::Sparse(vec![(tau_slot, tau_slot, 1.0)]));

    // unit diagonal of V: both embedded copies sum to 2
    for n in 0..nm {
        prog.add_constraint(
            ConstraintMatrix::new().with(
                0,
                SymCoeff::Sparse(vec![(n, n, 1.0), (nm + n, nm + n, 1.0)]),
            ),
            2.0,
        );
    }
    // signal row: <c_sig, V> + s_c tau - w_s = gamma sigma^2 + s_c cap
    prog.add_constraint(
        ConstraintMatrix::new()
            .with(0, SymCoeff::Dense(embed_map(&c_sig) * 0.5))
            .with(
                1,
                SymCoeff::Sparse(vec![(tau_slot, tau_slot, s_c), (0, 0, -1.0)]),
            ),
        gamma * model.noise_power + s_c * cap,
    );
    // blocking rows
    for m in 0..n_blocking {
        let f_am = restricted_f(model, &model.alice, m);
        let f_jm = restricted_f(model, &model.jam, m);
        let h = &f_am * f_am.adjoint() * Complex64::new(model.blocking_ratio * model.signal_power, 0.0)
            - &f_jm * f_jm.adjoint() * Complex64::new(model.jam_power, 0.0);
        let s_m = (model.blocking_ratio * model.signal_power * f_am.norm_squared())
            .max(model.jam_power * f_jm.norm_squared())
            .max(1e-9);
        prog.add_constraint(
            ConstraintMatrix::new()
                .with(0, SymCoeff::Dense(embed_map(&h) * 0.5))
                .with(
                    1,
                    SymCoeff::Sparse(vec![(tau_slot, tau_slot, s_m), (1 + m, 1 + m, -1.0)]),
                ),
            s_m * cap,
        );
    }

    let res = ipm::solve(
        &prog,
        &IpmOptions {
            tol: 1e-9,
            ..Default::default()
        },
    );
    if res.status != IpmStatus::Optimal {
        return Err(RobustError::Conic(format!(
            "gamma={gamma}: reduced feasibility phase returned {:?}",
            res.status
        )));
    }
    let BlockMat::Diag(slacks) = &res.x[1] else {
        unreachable!()
    };
    let margin = cap - slacks[tau_slot];
    let feasible = margin > MARGIN_EPS * cap;
    let witness = if feasible {
        let BlockMat::Dense(xv) = &res.x[0] else {
            unreachable!()
        };
        let v_mat = extract_hermitian(xv);
        let jam_level = (f_j.adjoint() * &v_mat * &f_j)[(0, 0)].re;
        Some(RobustWitness {
            v_mat,
            b: model.jam_power * jam_level.max(0.0) + model.noise_power,
            alpha: [0.0; 2],
            beta: [0.0; 2],
            eta: vec![(0.0, 0.0); n_blocking],
        })
    } else {
        None
    };
    Ok(FeasibilityOutcome {
        feasible,
        margin,
        witness,
    })
}

fn restricted_f(
    model: &StackedModel,
    side: &crate::stacked::SideModel,
    m: usize,
) -> DVector<Complex64> {
    let map = model.map_for_antenna(side, m);
    &map * &side.gains
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stacked::build_stacked_model;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rha_estimate::EstimationResult;
    use rha_model::{ChannelRealization, ScenarioConfig};

    fn zero_ball_setup(seed: u64) -> (StackedModel, ScenarioConfig) {
        let mut sc = ScenarioConfig::toy(2, 2);
        sc.jam_power = 100.0;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
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
        (build_stacked_model(&sc, &est).unwrap(), sc)
    }

    #[test]
    fn gamma_zero_is_feasible() {
        let (model, _) = zero_ball_setup(1);
        let out = feasibility_sdp(0.0, &model, &ErrorBall::zero(), false).unwrap();
        assert!(out.feasible, "margin {}", out.margin);
        let w = out.witness.unwrap();
        for n in 0..model.dim() {
            assert!((w.v_mat[(n, n)].re - 1.0).abs() < 1e-6, "unit diagonal");
        }
        let min_eig = w
            .v_mat
            .clone()
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min);
        assert!(min_eig > -1e-7, "witness PSD");
    }

    #[test]
    fn beyond_gamma_max_is_infeasible() {
        let (model, sc) = zero_ball_setup(2);
        let bound = rha_model::gamma_max(&sc);
        let out = feasibility_sdp(bound * 4.0, &model, &ErrorBall::zero(), false).unwrap();
        assert!(!out.feasible, "margin {}", out.margin);
    }

    #[test]
    fn reduced_and_lmi_paths_agree_at_zero_radius() {
        // tiny positive radius forces the LMI path; compare its decisions
        // against the reduced path at radius zero across a gamma sweep
        let (model, sc) = zero_ball_setup(3);
        let tiny = ErrorBall {
            alice: crate::errors::SideBall {
                rho_theta: 0.0,
                rho_g: 1e-9,
                sigma: 1.0,
            },
            jam: crate::errors::SideBall {
                rho_theta: 0.0,
                rho_g: 1e-9,
                sigma: 1.0,
            },
        };
        let bound = rha_model::gamma_max(&sc);
        for frac in [0.001, 0.01, 0.1, 0.5, 0.9] {
            let gamma = bound * frac;
            let fast = feasibility_sdp(gamma, &model, &ErrorBall::zero(), true).unwrap();
            let full = feasibility_sdp(gamma, &model, &tiny, true).unwrap();
            assert_eq!(
                fast.feasible, full.feasible,
                "paths disagree at gamma={gamma}: fast margin {}, full margin {}",
                fast.margin, full.margin
            );
        }
    }
}
