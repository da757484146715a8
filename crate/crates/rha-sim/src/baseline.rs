//! Homogeneous-array baselines: classical max-SINR weights on a ULA.

use crate::SimError;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rha_model::{steering_vector, ChannelRealization, ScenarioConfig};

/// Geometry and element gain of a ULA baseline.
#[derive(Debug, Clone)]
pub struct UlaDesign {
    /// Element positions in wavelengths.
    pub positions: Vec<f64>,
    /// Per-element amplitude gain (sqrt of the aperture-equivalence factor).
    pub element_gain: f64,
}

impl UlaDesign {
    /// Same total element count as the RHA (`N * M` omni antennas) on the
    /// same physical aperture.
    pub fn equal_elements(sc: &ScenarioConfig) -> Self {
        let count = (sc.num_antennas * sc.elements_per_antenna).max(1);
        let aperture = sc.antenna_spacing * (sc.num_antennas.saturating_sub(1)) as f64
            + sc.element_spacing * (sc.elements_per_antenna.saturating_sub(1)) as f64;
        let spacing = if count > 1 {
            aperture / (count - 1) as f64
        } else {
            0.0
        };
        Self {
            positions: (0..count).map(|i| i as f64 * spacing).collect(),
            element_gain: 1.0,
        }
    }

    /// Same RF-chain count as the RHA (`M` antennas at the RHA spacing), with
    /// an amplitude gain of `sqrt(N)` standing in for the aperture of each
    /// heterogeneous antenna.
    pub fn equal_aperture(sc: &ScenarioConfig) -> Self {
        Self {
            positions: (0..sc.num_antennas)
                .map(|i| i as f64 * sc.antenna_spacing)
                .collect(),
            element_gain: (sc.elements_per_antenna as f64).sqrt(),
        }
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    /// Per-element channel toward a path set: `h_i = gain sum_l a_i(theta_l) g_l`.
    pub fn channel(
        &self,
        thetas: &[f64],
        gains: &DVector<Complex64>,
    ) -> Result<DVector<Complex64>, SimError> {
        let mut h = DVector::<Complex64>::zeros(self.len());
        for (l, &theta) in thetas.iter().enumerate() {
            let a = steering_vector(theta, &self.positions).map_err(SimError::Model)?;
            for i in 0..self.len() {
                h[i] += a[i] * gains[l] * self.element_gain;
            }
        }
        Ok(h)
    }
}

/// Outcome of the ULA baseline on one trial.
#[derive(Debug, Clone)]
pub struct UlaOutcome {
    pub weights: DVector<Complex64>,
    pub sinr: f64,
    pub blocking_margins: Vec<f64>,
}

/// Classical max-SINR beamforming: `w ~ R^-1 h_a` with
/// `R = P_j h_j h_j^H + sigma^2 I` built from the design-side channel
/// knowledge, evaluated on the true channel. The weight norm is fixed to
/// `sqrt(count)` to match the RHA's unit-modulus weight budget under the
/// model's combined-noise convention.
pub fn ula_scheme(
    sc: &ScenarioConfig,
    design: &UlaDesign,
    true_ch: &ChannelRealization,
    known_doa_alice: &[f64],
    known_gains_alice: &DVector<Complex64>,
    known_doa_jam: &[f64],
    known_gains_jam: &DVector<Complex64>,
) -> Result<UlaOutcome, SimError> {
    let count = design.len();
    let h_a_known = design.channel(known_doa_alice, known_gains_alice)?;
    let h_j_known = design.channel(known_doa_jam, known_gains_jam)?;

    // R = P_j h_j h_j^H + sigma^2 I from the known (possibly estimated) side
    let mut r = DMatrix::<Complex64>::identity(count, count)
        * Complex64::new(sc.noise_power, 0.0);
    for i in 0..count {
        for j in 0..count {
            r[(i, j)] += h_j_known[i] * h_j_known[j].conj() * sc.jam_power;
        }
    }
    let chol = r
        .cholesky()
        .ok_or_else(|| SimError::Config("ULA covariance not positive definite".into()))?;
    let mut w = chol.solve(&h_a_known);
    let norm = w.norm();
    if norm > 0.0 {
        w *= Complex64::new((count as f64).sqrt() / norm, 0.0);
    }

    // evaluate on the true channel
    let h_a = design.channel(&true_ch.doa_alice, &true_ch.gains_alice)?;
    let h_j = design.channel(&true_ch.doa_jam, &true_ch.gains_jam)?;
    let sig: Complex64 = (0..count).map(|i| w[i].conj() * h_a[i]).sum();
    let jam: Complex64 = (0..count).map(|i| w[i].conj() * h_j[i]).sum();
    let sinr =
        sc.signal_power * sig.norm_sqr() / (sc.jam_power * jam.norm_sqr() + sc.noise_power);

    let blocking_margins = (0..count)
        .map(|i| {
            sc.blocking_ratio * sc.signal_power * h_a[i].norm_sqr()
                - sc.jam_power * h_j[i].norm_sqr()
        })
        .collect();

    Ok(UlaOutcome {
        weights: w,
        sinr,
        blocking_margins,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn mvdr_matches_closed_form_on_single_jammer() {
        // single signal path, single jammer, known covariance: the optimal
        // SINR is P_a h_a^H R^-1 h_a (textbook max-SINR value), up to the
        // fixed-norm convention which cancels in the ratio.
        let mut sc = ScenarioConfig::toy(2, 4);
        sc.jam_power = 100.0;
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let ch = ChannelRealization::draw(&sc, &mut rng);
        let design = UlaDesign::equal_elements(&sc);
        let out = ula_scheme(
            &sc,
            &design,
            &ch,
            &ch.doa_alice,
            &ch.gains_alice,
            &ch.doa_jam,
            &ch.gains_jam,
        )
        .unwrap();

        // oracle: SINR of w = R^-1 h_a with the same normalization, computed
        // through an independent explicit inverse
        let count = design.len();
        let h_a = design.channel(&ch.doa_alice, &ch.gains_alice).unwrap();
        let h_j = design.channel(&ch.doa_jam, &ch.gains_jam).unwrap();
        let mut r = DMatrix::<Complex64>::identity(count, count)
            * Complex64::new(sc.noise_power, 0.0);
        for i in 0..count {
            for j in 0..count {
                r[(i, j)] += h_j[i] * h_j[j].conj() * sc.jam_power;
            }
        }
        let r_inv = r.try_inverse().unwrap();
        let mut w = &r_inv * &h_a;
        let norm = w.norm();
        w *= Complex64::new((count as f64).sqrt() / norm, 0.0);
        let sig: Complex64 = (0..count).map(|i| w[i].conj() * h_a[i]).sum();
        let jam: Complex64 = (0..count).map(|i| w[i].conj() * h_j[i]).sum();
        let oracle =
            sc.signal_power * sig.norm_sqr() / (sc.jam_power * jam.norm_sqr() + sc.noise_power);
        assert!(
            (out.sinr - oracle).abs() / oracle < 1e-9,
            "{} vs {}",
            out.sinr,
            oracle
        );

        // the max-SINR weight must beat a uniform weight
        let w1 = DVector::from_element(count, Complex64::new(1.0, 0.0));
        let sig1: Complex64 = (0..count).map(|i| w1[i].conj() * h_a[i]).sum();
        let jam1: Complex64 = (0..count).map(|i| w1[i].conj() * h_j[i]).sum();
        let uniform = sc.signal_power * sig1.norm_sqr()
            / (sc.jam_power * jam1.norm_sqr() + sc.noise_power);
        assert!(out.sinr >= uniform * 0.999);
    }

    #[test]
    fn equal_elements_preserves_aperture() {
        let sc = ScenarioConfig::nominal();
        let d = UlaDesign::equal_elements(&sc);
        assert_eq!(d.len(), 32);
        let aperture = 2.5 * 3.0 + 0.25 * 7.0;
        assert!((d.positions.last().unwrap() - aperture).abs() < 1e-12);
    }
}
