//! Received-signal synthesis, ADC quantization/blocking and SINR evaluation.

use crate::channel::ChannelRealization;
use crate::config::RhaConfiguration;
use crate::scenario::{ModelError, ScenarioConfig};
use crate::steering::{array_steering_matrix, dma_manifold, pattern_matrix, waveguide_diag};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use std::f64::consts::PI;

/// Uniform mid-rise quantizer model of a K-bit ADC with full-scale range V_f.
#[derive(Debug, Clone, Copy)]
pub struct AdcModel {
    pub bits: u32,
    pub fullscale: f64,
    pub lsb: f64,
}

impl AdcModel {
    pub fn new(bits: u32, fullscale: f64) -> Self {
        Self {
            bits,
            fullscale,
            lsb: fullscale / (1u64 << bits) as f64,
        }
    }

    /// Quantize one rail. Mid-rise: reconstruction levels at odd multiples of
    /// lsb/2, clipped to +-(V_f/2 - lsb/2). Returns the level and a
    /// saturation flag.
    pub fn quantize(&self, x: f64) -> (f64, bool) {
        let half = self.fullscale / 2.0;
        let saturated = x.abs() > half;
        let clipped = x.clamp(-half, half);
        let level = self.lsb * ((clipped / self.lsb).floor() + 0.5);
        let max_level = half - self.lsb / 2.0;
        (level.clamp(-max_level, max_level), saturated)
    }

    pub fn quantize_complex(&self, z: Complex64) -> (Complex64, bool) {
        let (re, s1) = self.quantize(z.re);
        let (im, s2) = self.quantize(z.im);
        (Complex64::new(re, im), s1 || s2)
    }
}

/// Per-rail blocking flags for one antenna.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BlockingStatus {
    pub i_blocked: bool,
    pub q_blocked: bool,
}

impl BlockingStatus {
    pub fn any(&self) -> bool {
        self.i_blocked || self.q_blocked
    }
}

/// ADC blocking predicate: a rail is blocked when the desired component's
/// fraction of the mixed rail magnitude falls strictly below one LSB of the
/// normalized full scale, i.e. `|sig| / |sig + jam| < lsb / V_f`.
///
/// The mixed rail is normalized to the full scale before the comparison, so
/// the threshold is `2^-K` regardless of V_f. A rail with no signal and no
/// jamming has nothing to lose and reports unblocked.
pub fn blocking_predicate(signal: Complex64, jam: Complex64, adc: &AdcModel) -> BlockingStatus {
    let threshold = adc.lsb / adc.fullscale;
    let rail = |s: f64, j: f64| -> bool {
        let mixed = (s + j).abs();
        if mixed == 0.0 {
            return s == 0.0 && j != 0.0;
        }
        s.abs() / mixed < threshold
    };
    BlockingStatus {
        i_blocked: rail(signal.re, jam.re),
        q_blocked: rail(signal.im, jam.im),
    }
}

/// Pre- and post-ADC per-antenna samples for a run of symbols.
#[derive(Debug, Clone)]
pub struct ReceivedSamples {
    /// M x T pre-quantization samples.
    pub pre_adc: DMatrix<Complex64>,
    /// M x T quantized samples.
    pub post_adc: DMatrix<Complex64>,
    /// Saturation flags per antenna/time.
    pub saturated: Vec<(usize, usize)>,
}

/// Synthesize per-antenna received samples:
/// `y[m,t] = sqrt(P_a) sum_l phi_m(a_l) a_m(a_l) g_al s_a[t] + (jam term) + n`,
/// followed by I/Q quantization.
pub fn received_samples<R: Rng>(
    sc: &ScenarioConfig,
    ch: &ChannelRealization,
    cfg: &RhaConfiguration,
    symbols_alice: &DVector<Complex64>,
    symbols_jam: &DVector<Complex64>,
    rng: &mut R,
) -> Result<ReceivedSamples, ModelError> {
    if symbols_alice.len() != symbols_jam.len() {
        return Err(ModelError::Dimension("symbol streams differ in length".into()));
    }
    let m = sc.num_antennas;
    let t_len = symbols_alice.len();

    let h_a = effective_channel(sc, cfg, &ch.doa_alice, &ch.gains_alice)?;
    let h_j = effective_channel(sc, cfg, &ch.doa_jam, &ch.gains_jam)?;
    let amp_a = sc.signal_power.sqrt();
    let amp_j = sc.jam_power.sqrt();
    let noise_std = (sc.noise_power / 2.0).sqrt();
    let adc = sc.adc();

    let mut pre = DMatrix::<Complex64>::zeros(m, t_len);
    let mut post = DMatrix::<Complex64>::zeros(m, t_len);
    let mut saturated = Vec::new();
    for t in 0..t_len {
        for mi in 0..m {
            let noise = Complex64::new(
                noise_std * gauss(rng),
                noise_std * gauss(rng),
            );
            let y = amp_a * h_a[mi] * symbols_alice[t]
                + amp_j * h_j[mi] * symbols_jam[t]
                + noise;
            pre[(mi, t)] = y;
            let (q, sat) = adc.quantize_complex(y);
            post[(mi, t)] = q;
            if sat {
                saturated.push((mi, t));
            }
        }
    }
    Ok(ReceivedSamples {
        pre_adc: pre,
        post_adc: post,
        saturated,
    })
}

/// Per-antenna effective channel `h[m] = sum_l phi_m(theta_l) a_m(theta_l) g_l`.
pub fn effective_channel(
    sc: &ScenarioConfig,
    cfg: &RhaConfiguration,
    thetas: &[f64],
    gains: &DVector<Complex64>,
) -> Result<DVector<Complex64>, ModelError> {
    if thetas.len() != gains.len() {
        return Err(ModelError::Dimension("angles vs gains".into()));
    }
    let phi = pattern_matrix(sc, &cfg.phase_shifts, thetas)?;
    let a = array_steering_matrix(sc, thetas)?;
    let m = sc.num_antennas;
    Ok(DVector::from_iterator(
        m,
        (0..m).map(|mi| {
            (0..thetas.len())
                .map(|l| phi[(mi, l)] * a[(mi, l)] * gains[l])
                .sum()
        }),
    ))
}

/// Received SINR of the configured RHA (linear). The beamformed output is
/// `w^H y`; the noise term follows the model convention of a unit-referred
/// combined noise power `sigma_n^2`.
pub fn received_sinr(
    sc: &ScenarioConfig,
    ch: &ChannelRealization,
    cfg: &RhaConfiguration,
) -> Result<f64, ModelError> {
    let h_a = effective_channel(sc, cfg, &ch.doa_alice, &ch.gains_alice)?;
    let h_j = effective_channel(sc, cfg, &ch.doa_jam, &ch.gains_jam)?;
    let w = &cfg.weights;
    let sig: Complex64 = (0..w.len()).map(|m| w[m].conj() * h_a[m]).sum();
    let jam: Complex64 = (0..w.len()).map(|m| w[m].conj() * h_j[m]).sum();
    Ok(sc.signal_power * sig.norm_sqr() / (sc.jam_power * jam.norm_sqr() + sc.noise_power))
}

/// SINR through the stacked form: `v = stack_m(omega_m w_m)` and
/// `P_a |v^H T_hat D(theta_a) A_hat(theta_a) G_a|^2 / (...)`.
/// Equals [`received_sinr`] up to numerical roundoff.
pub fn received_sinr_stacked(
    sc: &ScenarioConfig,
    ch: &ChannelRealization,
    cfg: &RhaConfiguration,
) -> Result<f64, ModelError> {
    let sig = stacked_inner(sc, cfg, &ch.doa_alice, &ch.gains_alice)?;
    let jam = stacked_inner(sc, cfg, &ch.doa_jam, &ch.gains_jam)?;
    Ok(sc.signal_power * sig.norm_sqr() / (sc.jam_power * jam.norm_sqr() + sc.noise_power))
}

/// `v^H T_hat D(theta) A_hat(theta) G` for the stacked model, with
/// `v[(m)N+n] = omega[m,n] w[m]`, `T_hat = blockdiag(T,...)`,
/// `D = blockdiag(delta(theta),...)`, `A_hat = blockdiag(diag(a_m(theta)))`
/// and `G = 1_M (x) g`.
pub fn stacked_inner(
    sc: &ScenarioConfig,
    cfg: &RhaConfiguration,
    thetas: &[f64],
    gains: &DVector<Complex64>,
) -> Result<Complex64, ModelError> {
    let v = cfg.stacked();
    let n = sc.elements_per_antenna;
    let m = sc.num_antennas;
    let l = thetas.len();
    let t_diag = waveguide_diag(sc);
    let delta = dma_manifold(sc, thetas)?;
    let a = array_steering_matrix(sc, thetas)?;

    let mut acc = Complex64::new(0.0, 0.0);
    for mi in 0..m {
        for li in 0..l {
            let mut elem = Complex64::new(0.0, 0.0);
            for ni in 0..n {
                elem += v[mi * n + ni].conj() * t_diag[ni] * delta[(ni, li)];
            }
            acc += elem * a[(mi, li)] * gains[li] * sc.coupling_efficiency;
        }
    }
    Ok(acc)
}

/// Per-antenna blocking evaluation for a configured RHA on a true channel:
/// each antenna's signal and jamming amplitudes are the pattern-weighted
/// path sums scaled by the physical power levels.
pub fn antenna_blocking(
    sc: &ScenarioConfig,
    ch: &ChannelRealization,
    cfg: &RhaConfiguration,
) -> Result<Vec<BlockingStatus>, ModelError> {
    let h_a = effective_channel(sc, cfg, &ch.doa_alice, &ch.gains_alice)?;
    let h_j = effective_channel(sc, cfg, &ch.doa_jam, &ch.gains_jam)?;
    let adc = sc.adc();
    let amp_a = sc.signal_power.sqrt();
    let amp_j = sc.jam_power.sqrt();
    Ok((0..sc.num_antennas)
        .map(|m| blocking_predicate(amp_a * h_a[m], amp_j * h_j[m], &adc))
        .collect())
}

/// Per-antenna margins of the squared-form ratio constraint
/// `xi P_a |s_m|^2 - P_j |j_m|^2 >= 0`, evaluated on the true channel.
pub fn blocking_margins(
    sc: &ScenarioConfig,
    ch: &ChannelRealization,
    cfg: &RhaConfiguration,
) -> Result<Vec<f64>, ModelError> {
    let h_a = effective_channel(sc, cfg, &ch.doa_alice, &ch.gains_alice)?;
    let h_j = effective_channel(sc, cfg, &ch.doa_jam, &ch.gains_jam)?;
    Ok((0..sc.num_antennas)
        .map(|m| {
            sc.blocking_ratio * sc.signal_power * h_a[m].norm_sqr()
                - sc.jam_power * h_j[m].norm_sqr()
        })
        .collect())
}

fn gauss<R: Rng>(rng: &mut R) -> f64 {
    // Box-Muller
    let u1: f64 = rng.random::<f64>().max(1e-300);
    let u2: f64 = rng.random();
    (-2.0 * u1.ln()).sqrt() * (2.0 * PI * u2).cos()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn unit(x: f64) -> Complex64 {
        Complex64::from_polar(1.0, x)
    }

    #[test]
    fn lsb_is_fullscale_over_2k() {
        let adc = AdcModel::new(3, 1.0);
        assert_eq!(adc.lsb, 0.125);
        let adc = AdcModel::new(12, 2.0);
        assert!((adc.lsb - 2.0 / 4096.0).abs() < 1e-18);
    }

    #[test]
    fn quantizer_bins_below_lsb() {
        // K = 3, V_f = 1: LSB = 0.125; anything in [0, 0.125) maps to the
        // first positive bin center 0.0625.
        let adc = AdcModel::new(3, 1.0);
        for x in [0.0, 0.05, 0.1249] {
            let (q, sat) = adc.quantize(x);
            assert!(!sat);
            assert!((q - 0.0625).abs() < 1e-12, "x={x} -> {q}");
        }
        let (q, sat) = adc.quantize(0.9);
        assert!(sat, "above full scale saturates");
        assert!((q - (0.5 - 0.0625)).abs() < 1e-12, "clipped to top level");
    }

    #[test]
    fn blocking_never_without_jam() {
        let adc = AdcModel::new(4, 1.0);
        let st = blocking_predicate(Complex64::new(0.3, -0.2), Complex64::new(0.0, 0.0), &adc);
        assert!(!st.any());
    }

    #[test]
    fn blocking_boundary_is_strict() {
        // fraction exactly at lsb/V_f must NOT block
        let adc = AdcModel::new(3, 1.0); // threshold 0.125
        // sig.re / (sig + jam).re = 0.125 exactly: sig = 1, mixed = 8
        let st = blocking_predicate(Complex64::new(1.0, 1.0), Complex64::new(7.0, 7.0), &adc);
        assert!(!st.any(), "boundary fraction must not block");
        let st2 = blocking_predicate(Complex64::new(1.0, 1.0), Complex64::new(7.2, 7.2), &adc);
        assert!(st2.any(), "just past the boundary must block");
    }

    #[test]
    fn blocking_flips_exactly_at_threshold() {
        let adc = AdcModel::new(3, 1.0);
        // sweep the fraction around 0.125 by varying the jam rail
        for frac in [0.120, 0.1245, 0.1255, 0.130] {
            let sig = 1.0;
            let mixed = sig / frac;
            let jam = mixed - sig;
            let st = blocking_predicate(
                Complex64::new(sig, sig),
                Complex64::new(jam, jam),
                &adc,
            );
            assert_eq!(st.i_blocked, frac < 0.125, "frac {frac}");
        }
    }

    #[test]
    fn adc_monotone_in_bits() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        use rand::Rng;
        for _ in 0..500 {
            let sig = Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5);
            let jam = Complex64::new(
                (rng.random::<f64>() - 0.5) * 100.0,
                (rng.random::<f64>() - 0.5) * 100.0,
            );
            let mut prev_any_blocked = true;
            for k in 1..=14u32 {
                let adc = AdcModel::new(k, 1.0);
                let st = blocking_predicate(sig, jam, &adc);
                if !prev_any_blocked {
                    assert!(
                        !st.any(),
                        "increasing K must not introduce blocking (k={k})"
                    );
                }
                prev_any_blocked = st.any();
            }
        }
    }

    #[test]
    fn noise_free_single_path_broadside_sample() {
        // noise off, P_j = 0, single path at theta = 0, all-ones config:
        // sample = sqrt(P_a) g s sum_n t_n at every antenna.
        let mut sc = ScenarioConfig::toy(3, 4);
        sc.noise_power = 1e-300;
        sc.jam_power = 0.0;
        let g = unit(0.7);
        let ch = ChannelRealization::new(
            vec![0.0],
            vec![0.0],
            DVector::from_element(1, g),
            DVector::from_element(1, Complex64::new(0.0, 0.0)),
            DVector::from_element(4, Complex64::new(1.0, 0.0)),
            DVector::from_element(4, Complex64::new(1.0, 0.0)),
        )
        .unwrap();
        let cfg = RhaConfiguration::uniform(3, 4);
        let s = DVector::from_element(1, unit(0.2));
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let out = received_samples(&sc, &ch, &cfg, &s, &s, &mut rng).unwrap();
        let t_sum: Complex64 = waveguide_diag(&sc).iter().sum();
        let expect = sc.signal_power.sqrt() * g * s[0] * t_sum;
        for m in 0..3 {
            assert!(
                (out.pre_adc[(m, 0)] - expect).norm() < 1e-9,
                "antenna {m}: {} vs {}",
                out.pre_adc[(m, 0)],
                expect
            );
        }
    }

    #[test]
    fn pre_adc_matches_bruteforce_expansion() {
        let mut sc = ScenarioConfig::toy(2, 2);
        sc.noise_power = 1e-300;
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let ch = ChannelRealization::draw(&sc, &mut rng);
        use rand::Rng;
        let omega = DMatrix::from_fn(2, 2, |_, _| unit(rng.random::<f64>() * 2.0 * PI));
        let w = DVector::from_fn(2, |_, _| unit(rng.random::<f64>() * 2.0 * PI));
        let cfg = RhaConfiguration::new(omega, w).unwrap();
        let s_a = DVector::from_fn(3, |_, _| unit(rng.random::<f64>() * 2.0 * PI));
        let s_j = DVector::from_fn(3, |_, _| unit(rng.random::<f64>() * 2.0 * PI));
        let out = received_samples(&sc, &ch, &cfg, &s_a, &s_j, &mut rng).unwrap();

        // brute force: explicit triple loop over paths, elements
        let t_diag = waveguide_diag(&sc);
        for mi in 0..2 {
            for t in 0..3 {
                let mut acc = Complex64::new(0.0, 0.0);
                for (z, (thetas, gains, sym, pow)) in [
                    (&ch.doa_alice, &ch.gains_alice, &s_a, sc.signal_power),
                    (&ch.doa_jam, &ch.gains_jam, &s_j, sc.jam_power),
                ]
                .iter()
                .enumerate()
                {
                    let _ = z;
                    for (l, &theta) in thetas.iter().enumerate() {
                        let mut phi = Complex64::new(0.0, 0.0);
                        for ni in 0..2 {
                            let r = ni as f64 * sc.element_spacing;
                            let d = Complex64::from_polar(
                                1.0,
                                -2.0 * PI * r * theta.sin(),
                            );
                            phi += cfg.phase_shifts[(mi, ni)].conj() * t_diag[ni] * d;
                        }
                        let a = Complex64::from_polar(
                            1.0,
                            -2.0 * PI * mi as f64 * sc.antenna_spacing * theta.sin(),
                        );
                        acc += pow.sqrt() * phi * a * gains[l] * sym[t];
                    }
                }
                assert!(
                    (out.pre_adc[(mi, t)] - acc).norm() < 1e-10,
                    "m={mi} t={t}"
                );
            }
        }
    }

    #[test]
    fn sinr_single_antenna_no_jam() {
        let mut sc = ScenarioConfig::toy(1, 1);
        sc.jam_power = 0.0;
        let ch = ChannelRealization::new(
            vec![0.0],
            vec![0.0],
            DVector::from_element(1, unit(1.1)),
            DVector::from_element(1, unit(0.0)),
            DVector::zeros(4),
            DVector::zeros(4),
        )
        .unwrap();
        let cfg = RhaConfiguration::uniform(1, 1);
        let sinr = received_sinr(&sc, &ch, &cfg).unwrap();
        assert!(
            (sinr - sc.signal_power / sc.noise_power).abs() < 1e-9,
            "P_a/sigma^2 expected, got {sinr}"
        );
    }

    #[test]
    fn sinr_zero_when_weight_orthogonal() {
        // two antennas; choose w orthogonal to the effective signal channel
        let sc = ScenarioConfig::toy(2, 1);
        let ch = ChannelRealization::new(
            vec![0.0],
            vec![0.3],
            DVector::from_element(1, Complex64::new(1.0, 0.0)),
            DVector::from_element(1, Complex64::new(1.0, 0.0)),
            DVector::zeros(4),
            DVector::zeros(4),
        )
        .unwrap();
        let cfg = RhaConfiguration::uniform(2, 1);
        let h = effective_channel(&sc, &cfg, &ch.doa_alice, &ch.gains_alice).unwrap();
        // unit-modulus weights orthogonal to h: w = (1, -h1/h2 * |h2/h1|)
        let ratio = h[0] / h[1];
        let w = DVector::from_vec(vec![
            Complex64::new(1.0, 0.0),
            -(ratio / ratio.norm()),
        ]);
        let cfg2 = RhaConfiguration::new(cfg.phase_shifts.clone(), w).unwrap();
        let sinr = received_sinr(&sc, &ch, &cfg2).unwrap();
        assert!(sinr < 1e-18, "orthogonal weight must null the signal: {sinr}");
    }

    #[test]
    fn stacked_form_matches_direct_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        use rand::Rng;
        for _ in 0..20 {
            let sc = ScenarioConfig::toy(2, 2);
            let ch = ChannelRealization::draw(&sc, &mut rng);
            let omega = DMatrix::from_fn(2, 2, |_, _| unit(rng.random::<f64>() * 2.0 * PI));
            let w = DVector::from_fn(2, |_, _| unit(rng.random::<f64>() * 2.0 * PI));
            let cfg = RhaConfiguration::new(omega, w).unwrap();
            let direct = received_sinr(&sc, &ch, &cfg).unwrap();
            let stacked = received_sinr_stacked(&sc, &ch, &cfg).unwrap();
            let rel = (direct - stacked).abs() / direct.max(1e-30);
            assert!(rel < 1e-10, "forms disagree: {direct} vs {stacked}");
        }
    }

    #[test]
    fn gamma_max_bounds_sinr() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        use rand::Rng;
        let sc = ScenarioConfig::nominal();
        let bound = crate::gamma_max(&sc);
        for _ in 0..50 {
            let ch = ChannelRealization::draw(&sc, &mut rng);
            let omega = DMatrix::from_fn(4, 8, |_, _| unit(rng.random::<f64>() * 2.0 * PI));
            let w = DVector::from_fn(4, |_, _| unit(rng.random::<f64>() * 2.0 * PI));
            let cfg = RhaConfiguration::new(omega, w).unwrap();
            let sinr = received_sinr(&sc, &ch, &cfg).unwrap();
            assert!(sinr <= bound * (1.0 + 1e-12));
        }
    }
}
