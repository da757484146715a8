//! Stacked-model matrices for the relaxed design problem.

use crate::RobustError;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rha_estimate::EstimationResult;
use rha_model::{
    steering::{array_steering_matrix, dma_manifold, waveguide_diag},
    ScenarioConfig,
};
use std::f64::consts::PI;

/// Fixed matrices of the stacked model for one side (signal or jamming):
/// the composite map `M = T_hat D(theta) A_hat(theta)` with `NM x M L`
/// columns indexed by (antenna, path), the stacked gain vector
/// `G = 1_M (x) g`, and the error carrier `R_hat diag(G)`.
#[derive(Debug, Clone)]
pub struct SideModel {
    /// Composite map, NM x (M L).
    pub map: DMatrix<Complex64>,
    /// Stacked gains, M L.
    pub gains: DVector<Complex64>,
    /// `R_hat diag(G)`: per-entry `j k0 d_(m+1) G[(m,l)]`, diagonal as a vector.
    pub r_diag_g: DVector<Complex64>,
    pub paths: usize,
}

/// Stacked model for both sides plus geometry used by the LMIs.
#[derive(Debug, Clone)]
pub struct StackedModel {
    pub alice: SideModel,
    pub jam: SideModel,
    pub num_antennas: usize,
    pub elements_per_antenna: usize,
    pub signal_power: f64,
    pub jam_power: f64,
    pub noise_power: f64,
    pub blocking_ratio: f64,
    pub control_bits: u32,
}

impl StackedModel {
    pub fn dim(&self) -> usize {
        self.num_antennas * self.elements_per_antenna
    }

    /// Effective stacked channel `f_z = M G_z`.
    pub fn f_vec(&self, side: &SideModel) -> DVector<Complex64> {
        &side.map * &side.gains
    }

    /// Rows of `map` restricted to antenna m (the antenna-selection
    /// projector applied on the left).
    pub fn map_for_antenna(&self, side: &SideModel, m: usize) -> DMatrix<Complex64> {
        let n = self.elements_per_antenna;
        let mut out = DMatrix::<Complex64>::zeros(self.dim(), side.map.ncols());
        for r in m * n..(m + 1) * n {
            for c in 0..side.map.ncols() {
                out[(r, c)] = side.map[(r, c)];
            }
        }
        out
    }

    /// Nominal inner product `v^H M G` for a stacked vector.
    pub fn inner(&self, side: &SideModel, v: &DVector<Complex64>) -> Complex64 {
        let f = self.f_vec(side);
        v.dotc(&f)
    }

    /// Nominal SINR of a stacked vector under this model's estimate.
    pub fn nominal_sinr(&self, v: &DVector<Complex64>) -> f64 {
        let s = self.inner(&self.alice, v).norm_sqr();
        let j = self.inner(&self.jam, v).norm_sqr();
        self.signal_power * s / (self.jam_power * j + self.noise_power)
    }
}

/// Assemble the stacked model from a scenario and an estimation result.
pub fn build_stacked_model(
    sc: &ScenarioConfig,
    est: &EstimationResult,
) -> Result<StackedModel, RobustError> {
    if est.doa_alice.is_empty() || est.doa_jam.is_empty() {
        return Err(RobustError::Invalid(
            "estimate must carry at least one path per side".into(),
        ));
    }
    let alice = side_model(sc, &est.doa_alice, &est.gains_alice)?;
    let jam = side_model(sc, &est.doa_jam, &est.gains_jam)?;
    Ok(StackedModel {
        alice,
        jam,
        num_antennas: sc.num_antennas,
        elements_per_antenna: sc.elements_per_antenna,
        signal_power: sc.signal_power,
        jam_power: sc.jam_power,
        noise_power: sc.noise_power,
        blocking_ratio: sc.blocking_ratio,
        control_bits: sc.control_bits,
    })
}

fn side_model(
    sc: &ScenarioConfig,
    thetas: &[f64],
    gains: &DVector<Complex64>,
) -> Result<SideModel, RobustError> {
    let m = sc.num_antennas;
    let n = sc.elements_per_antenna;
    let l = thetas.len();
    let t_diag = waveguide_diag(sc);
    let delta = dma_manifold(sc, thetas)?;
    let a = array_steering_matrix(sc, thetas)?;

    // map[(mi*n + ni), (mi*l + li)] = t[ni] delta[ni, li] a[mi, li] (block diagonal
    // over antennas), scaled by the coupling efficiency
    let mut map = DMatrix::<Complex64>::zeros(m * n, m * l);
    for mi in 0..m {
        for ni in 0..n {
            for li in 0..l {
                map[(mi * n + ni, mi * l + li)] =
                    t_diag[ni] * delta[(ni, li)] * a[(mi, li)] * sc.coupling_efficiency;
            }
        }
    }

    let stacked_gains = DVector::from_iterator(
        m * l,
        (0..m).flat_map(|_| gains.iter().copied().collect::<Vec<_>>()),
    );
    // uniform relaxed phase slope: antenna m gets j k0 d_(m+1) = j 2 pi (m+1) d
    let r_diag_g = DVector::from_iterator(
        m * l,
        (0..m).flat_map(|mi| {
            let slope = Complex64::new(0.0, 2.0 * PI * (mi as f64 + 1.0) * sc.antenna_spacing);
            gains.iter().map(move |g| slope * g).collect::<Vec<_>>()
        }),
    );

    Ok(SideModel {
        map,
        gains: stacked_gains,
        r_diag_g,
        paths: l,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rha_model::{ChannelRealization, RhaConfiguration};

    fn estimate_from_channel(ch: &ChannelRealization) -> EstimationResult {
        EstimationResult {
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
        }
    }

    #[test]
    fn stacked_inner_matches_model_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for (m, n) in [(1usize, 3usize), (2, 2), (3, 4)] {
            let sc = ScenarioConfig::toy(m, n);
            let ch = ChannelRealization::draw(&sc, &mut rng);
            let est = estimate_from_channel(&ch);
            let model = build_stacked_model(&sc, &est).unwrap();

            let omega = DMatrix::from_fn(m, n, |_, _| {
                Complex64::from_polar(1.0, rng.random::<f64>() * 2.0 * PI)
            });
            let w = DVector::from_fn(m, |_, _| {
                Complex64::from_polar(1.0, rng.random::<f64>() * 2.0 * PI)
            });
            let cfg = RhaConfiguration::new(omega, w).unwrap();
            let v = cfg.stacked();

            let from_model =
                rha_model::receive::stacked_inner(&sc, &cfg, &ch.doa_alice, &ch.gains_alice)
                    .unwrap();
            let from_stacked = model.inner(&model.alice, &v);
            assert!(
                (from_model - from_stacked).norm() < 1e-10,
                "stacked map mismatch: {from_model} vs {from_stacked}"
            );

            let direct = rha_model::received_sinr(&sc, &ch, &cfg).unwrap();
            let nominal = model.nominal_sinr(&v);
            assert!(
                (direct - nominal).abs() / direct.max(1e-30) < 1e-9,
                "sinr {direct} vs {nominal}"
            );
        }
    }

    #[test]
    fn error_carrier_is_pure_imaginary_slope() {
        let sc = ScenarioConfig::toy(2, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let ch = ChannelRealization::draw(&sc, &mut rng);
        let est = estimate_from_channel(&ch);
        let model = build_stacked_model(&sc, &est).unwrap();
        for mi in 0..2 {
            for li in 0..1 {
                let e = model.alice.r_diag_g[mi + li];
                let _ = e;
            }
        }
        // slope magnitude for antenna m is 2 pi (m+1) d |g|
        for mi in 0..2usize {
            let expect = 2.0 * PI * (mi as f64 + 1.0) * sc.antenna_spacing;
            let got = model.alice.r_diag_g[mi * 1] / ch.gains_alice[0];
            assert!((got.re).abs() < 1e-12, "pure imaginary");
            assert!((got.im - expect).abs() < 1e-9);
        }
    }
}
