//! Robust LMI assembly.
//!
//! Each robust constraint quantifies a quadratic form over norm balls of the
//! stacked CSI error `dG` and the stacked linearized angle error `x`; the
//! homogeneous S-procedure turns it into one affine-Hermitian PSD block in
//! `(V, b, multipliers)` at fixed target `gamma`. Block rows are ordered
//! `[dG-range | center | x-range]`, and ranges whose radius is zero are
//! dropped, so the blocks shrink down to the nominal scalar constraint as
//! the uncertainty vanishes.
//!
//! Signal (worst case over both balls must stay above the target):
//!
//! ```text
//! [ Q + a1 I      Q G                    Q R dG          ]
//! [ G^H Q         G^H Q G - g b / P_a
//!                   - a1 rg^2 - b1 rt^2  G^H Q R dG      ]
//! [ dG^H R^H Q    dG^H R^H Q G           dG^H R^H Q R dG
//!                                          + b1 I        ]  >= 0
//! ```
//!
//! with `Q = M^H V M`. The jamming block is the same pattern with `Q`
//! negated and center `(b - sigma^2)/P_j - ...`; the per-antenna blocking
//! block couples the two sides through the total-equivalent-error balls.

use crate::errors::ErrorBall;
use crate::stacked::{SideModel, StackedModel};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rha_conic::{AffineBlock, VarId};

/// The relaxation variable of the design problem, or a fixed vector whose
/// worst case is being certified (then `V = v v^H` is constant data).
#[derive(Debug, Clone)]
pub enum VSlot {
    Var(VarId),
    Fixed(DVector<Complex64>),
}

/// Variable handles shared by the LMI builders.
#[derive(Debug, Clone)]
pub struct LmiVars {
    pub v: VSlot,
    pub b: VarId,
    /// Phase-I margin variable (blocks are shifted by `-t I`); None disables.
    pub t: Option<VarId>,
    pub alpha1: Option<VarId>,
    pub beta1: Option<VarId>,
    pub alpha2: Option<VarId>,
    pub beta2: Option<VarId>,
}

/// Add the `scale * K^H V K` part of a block (`K` is `NM x dim`): a
/// congruence term when `V` is a variable, or the constant rank-one matrix
/// `scale (K^H v)(K^H v)^H` when fixed.
fn add_v_part(blk: &mut AffineBlock, v: &VSlot, k: DMatrix<Complex64>, scale: f64) {
    match v {
        VSlot::Var(var) => blk.herm_congr(*var, k, scale),
        VSlot::Fixed(vec) => {
            let q = k.adjoint() * vec; // K^H v, dim x 1
            let qq = &q * q.adjoint() * Complex64::new(scale, 0.0);
            blk.add_constant(&qq);
        }
    }
}

fn one() -> Complex64 {
    Complex64::new(1.0, 0.0)
}

/// Composite congruence map `M U` where the columns of `U` are
/// `[I (dG range) | G (center) | R dG (x range)]`, restricted to the ranges
/// present.
fn congruence_map(
    side: &SideModel,
    nm: usize,
    has_g: bool,
    has_theta: bool,
    antenna_restriction: Option<(usize, usize)>,
) -> (DMatrix<Complex64>, usize, usize) {
    let l = side.gains.len();
    let dim = if has_g { l } else { 0 } + 1 + if has_theta { l } else { 0 };
    let center = if has_g { l } else { 0 };
    let x_off = center + 1;

    // map rows, optionally restricted to one antenna's element rows
    let map = match antenna_restriction {
        None => side.map.clone(),
        Some((m, n)) => {
            let mut restricted = DMatrix::<Complex64>::zeros(nm, side.map.ncols());
            for r in m * n..(m + 1) * n {
                for c in 0..side.map.ncols() {
                    restricted[(r, c)] = side.map[(r, c)];
                }
            }
            restricted
        }
    };

    let mut k = DMatrix::<Complex64>::zeros(nm, dim);
    // center column: M G
    let f = &map * &side.gains;
    for r in 0..nm {
        k[(r, center)] = f[r];
    }
    if has_g {
        for c in 0..l {
            for r in 0..nm {
                k[(r, c)] = map[(r, c)];
            }
        }
    }
    if has_theta {
        // columns of M R dG: the error carrier is diagonal
        for c in 0..l {
            for r in 0..nm {
                k[(r, x_off + c)] = map[(r, c)] * side.r_diag_g[c];
            }
        }
    }
    (k, center, dim)
}

fn identity_range(blk: &mut AffineBlock, var: VarId, start: usize, len: usize) {
    let entries: Vec<(usize, usize, Complex64)> =
        (0..len).map(|i| (start + i, start + i, one())).collect();
    blk.scalar_coeff(var, entries);
}

fn margin_term(blk: &mut AffineBlock, vars: &LmiVars, dim: usize) {
    if let Some(t) = vars.t {
        let entries: Vec<(usize, usize, Complex64)> =
            (0..dim).map(|i| (i, i, -one())).collect();
        blk.scalar_coeff(t, entries);
    }
}

/// Signal constraint block at target `gamma`:
/// worst-case `P_a |v^H M (G + dG + R dG x)|^2 >= gamma b`.
pub fn assemble_signal_lmi(
    model: &StackedModel,
    ball: &ErrorBall,
    gamma: f64,
    vars: &LmiVars,
) -> AffineBlock {
    let m = model.num_antennas;
    let rho_g = ball.alice.stacked_rho_g(m);
    let rho_t = ball.alice.stacked_rho_theta(m);
    let (has_g, has_t) = (rho_g > 0.0, rho_t > 0.0);
    let (k, center, dim) = congruence_map(&model.alice, model.dim(), has_g, has_t, None);

    let mut blk = AffineBlock::new(dim);
    add_v_part(&mut blk, &vars.v, k, 1.0);
    // center: - gamma b / P_a
    blk.scalar_coeff(
        vars.b,
        vec![(center, center, Complex64::new(-gamma / model.signal_power, 0.0))],
    );
    if has_g {
        let a1 = vars.alpha1.expect("alpha1 required when rho_g > 0");
        identity_range(&mut blk, a1, 0, model.alice.gains.len());
        blk.scalar_coeff(a1, vec![(center, center, Complex64::new(-rho_g * rho_g, 0.0))]);
    }
    if has_t {
        let b1 = vars.beta1.expect("beta1 required when rho_theta > 0");
        identity_range(&mut blk, b1, center + 1, model.alice.gains.len());
        blk.scalar_coeff(b1, vec![(center, center, Complex64::new(-rho_t * rho_t, 0.0))]);
    }
    margin_term(&mut blk, vars, dim);
    blk
}

/// Jamming constraint block:
/// worst-case `P_j |v^H M (G + dG + R dG x)|^2 <= b - sigma_n^2`.
pub fn assemble_jam_lmi(model: &StackedModel, ball: &ErrorBall, vars: &LmiVars) -> AffineBlock {
    let m = model.num_antennas;
    let rho_g = ball.jam.stacked_rho_g(m);
    let rho_t = ball.jam.stacked_rho_theta(m);
    let (has_g, has_t) = (rho_g > 0.0, rho_t > 0.0);
    let (k, center, dim) = congruence_map(&model.jam, model.dim(), has_g, has_t, None);

    let mut blk = AffineBlock::new(dim);
    add_v_part(&mut blk, &vars.v, k, -1.0);
    // center: (b - sigma^2) / P_j
    blk.scalar_coeff(
        vars.b,
        vec![(center, center, Complex64::new(1.0 / model.jam_power, 0.0))],
    );
    blk.set_constant_entry(
        center,
        center,
        Complex64::new(-model.noise_power / model.jam_power, 0.0),
    );
    if has_g {
        let a2 = vars.alpha2.expect("alpha2 required when rho_g > 0");
        identity_range(&mut blk, a2, 0, model.jam.gains.len());
        blk.scalar_coeff(a2, vec![(center, center, Complex64::new(-rho_g * rho_g, 0.0))]);
    }
    if has_t {
        let b2 = vars.beta2.expect("beta2 required when rho_theta > 0");
        identity_range(&mut blk, b2, center + 1, model.jam.gains.len());
        blk.scalar_coeff(b2, vec![(center, center, Complex64::new(-rho_t * rho_t, 0.0))]);
    }
    margin_term(&mut blk, vars, dim);
    blk
}

/// Per-antenna blocking block for antenna `m_idx` with multipliers
/// `(eta1, eta2)`:
/// worst-case `xi P_a |v^H P_m M_a (G_a + d_a)|^2 >= P_j |v^H P_m M_j (G_j + d_j)|^2`
/// over the total-equivalent-error balls `||d_z|| <= rho_theta sigma + rho_g`.
pub fn assemble_blocking_lmi(
    model: &StackedModel,
    ball: &ErrorBall,
    m_idx: usize,
    eta1: Option<VarId>,
    eta2: Option<VarId>,
    vars: &LmiVars,
) -> AffineBlock {
    let n = model.elements_per_antenna;
    let r_a = ball.alice.total_error_radius();
    let r_j = ball.jam.total_error_radius();
    let (has_a, has_j) = (r_a > 0.0, r_j > 0.0);
    let l_a = model.alice.gains.len();
    let l_j = model.jam.gains.len();

    let dim = if has_a { l_a } else { 0 } + 1 + if has_j { l_j } else { 0 };
    let center = if has_a { l_a } else { 0 };

    // Alice congruence: rows [d_a | center], no x range
    let (k_a, _, dim_a) =
        congruence_map(&model.alice, model.dim(), has_a, false, Some((m_idx, n)));
    debug_assert_eq!(dim_a, center + 1);
    // zero-pad to the full block width
    let mut k_a_full = DMatrix::<Complex64>::zeros(model.dim(), dim);
    for c in 0..dim_a {
        for r in 0..model.dim() {
            k_a_full[(r, c)] = k_a[(r, c)];
        }
    }

    // Jam congruence occupies [center | d_j]
    let (k_j, _, dim_j) =
        congruence_map(&model.jam, model.dim(), false, false, Some((m_idx, n)));
    debug_assert_eq!(dim_j, 1);
    let mut k_j_full = DMatrix::<Complex64>::zeros(model.dim(), dim);
    for r in 0..model.dim() {
        k_j_full[(r, center)] = k_j[(r, 0)];
    }
    if has_j {
        // identity columns for the jam error directions
        let map_j = model.map_for_antenna(&model.jam, m_idx);
        for c in 0..l_j {
            for r in 0..model.dim() {
                k_j_full[(r, center + 1 + c)] = map_j[(r, c)];
            }
        }
    }

    // normalize by the dominant power so the block entries stay O(1);
    // PSD-ness is invariant and the eta multipliers absorb the factor
    let xi_pa = model.blocking_ratio * model.signal_power;
    let scale = xi_pa.max(model.jam_power).max(1e-12);
    let mut blk = AffineBlock::new(dim);
    add_v_part(&mut blk, &vars.v, k_a_full, xi_pa / scale);
    add_v_part(&mut blk, &vars.v, k_j_full, -model.jam_power / scale);

    if has_a {
        let e1 = eta1.expect("eta1 required when the alice total radius > 0");
        identity_range(&mut blk, e1, 0, l_a);
        blk.scalar_coeff(e1, vec![(center, center, Complex64::new(-r_a * r_a, 0.0))]);
    }
    if has_j {
        let e2 = eta2.expect("eta2 required when the jam total radius > 0");
        identity_range(&mut blk, e2, center + 1, l_j);
        blk.scalar_coeff(e2, vec![(center, center, Complex64::new(-r_j * r_j, 0.0))]);
    }
    margin_term(&mut blk, vars, dim);
    blk
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stacked::build_stacked_model;
    use nalgebra::DVector;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rha_estimate::EstimationResult;
    use rha_model::{ChannelRealization, ScenarioConfig};
    use std::f64::consts::PI;

    fn toy_model(seed: u64) -> (StackedModel, ScenarioConfig, ChannelRealization) {
        let sc = ScenarioConfig::toy(2, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
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
        (model, sc, ch)
    }

    /// S-procedure direction: the certified worst-case target of a fixed
    /// vector is honored by the linearized quadratic on thousands of sampled
    /// ball points (no counterexample).
    #[test]
    fn signal_block_certifies_sampled_quadratic() {
        let (model, _, _) = toy_model(3);
        let ball = ErrorBall {
            alice: crate::errors::SideBall {
                rho_theta: 0.05,
                rho_g: 0.1,
                sigma: 1.0,
            },
            jam: crate::errors::SideBall {
                rho_theta: 0.05,
                rho_g: 0.1,
                sigma: 1.0,
            },
        };
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        // a vector aligned with the nominal signal channel keeps a positive
        // worst-case margin (a random vector may legitimately certify zero:
        // the CSI ball can null an unmatched beam)
        let f_a = model.f_vec(&model.alice);
        let v_vec = crate::rank1::unit_project(&f_a);
        let gamma_cert =
            crate::certify::certify_fixed_vector(&model, &ball, &v_vec, 1e-4).unwrap();
        assert!(gamma_cert > 0.0, "aligned vector must certify a positive target");

        // sampled linearized SINR must never fall below the certificate
        let m_ant = model.num_antennas;
        let rho_ga = ball.alice.stacked_rho_g(m_ant);
        let rho_ta = ball.alice.stacked_rho_theta(m_ant);
        let rho_gj = ball.jam.stacked_rho_g(m_ant);
        let rho_tj = ball.jam.stacked_rho_theta(m_ant);
        for _ in 0..10_000 {
            let perturbed = |side: &SideModel, rho_g: f64, rho_t: f64, rng: &mut ChaCha8Rng| {
                let l = side.gains.len();
                let dg = random_ball(rng, l, rho_g);
                let x = random_ball(rng, l, rho_t);
                let mut pert = side.gains.clone();
                for i in 0..l {
                    pert[i] += dg[i] + side.r_diag_g[i] * x[i];
                }
                v_vec.dotc(&(&side.map * &pert)).norm_sqr()
            };
            let sig = perturbed(&model.alice, rho_ga, rho_ta, &mut rng);
            let jam = perturbed(&model.jam, rho_gj, rho_tj, &mut rng);
            let sinr =
                model.signal_power * sig / (model.jam_power * jam + model.noise_power);
            assert!(
                sinr >= gamma_cert * (1.0 - 1e-6),
                "linearized SINR {sinr} below certificate {gamma_cert}"
            );
        }
    }

    fn random_ball(
        rng: &mut ChaCha8Rng,
        dim: usize,
        radius: f64,
    ) -> DVector<Complex64> {
        let mut v = DVector::from_fn(dim, |_, _| {
            Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
        });
        let norm = v.norm();
        if norm > 0.0 {
            let r = radius * rng.random::<f64>().powf(1.0 / (2.0 * dim as f64));
            v *= Complex64::new(r / norm, 0.0);
        }
        v
    }
}
