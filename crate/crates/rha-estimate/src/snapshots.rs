//! Snapshot collection under the pattern schedule and virtual-antenna
//! synthesis.
//!
//! All `K_r` snapshots of one pilot symbol are taken while the symbol is
//! constant (fast pattern switching), each with independent receiver noise.
//! Recombining with the Hadamard rows gives, for virtual set `i`,
//!
//! ```text
//! Y'_i[m,t] = sum_z K_r t_i delta_i(theta_z) a_m(theta_z) g_z x_z[t] + eps
//! ```
//!
//! so the composite index `(i, m)` behaves like an antenna at position
//! `r_i + d_m`. Dividing by the known `K_r t_i` whitens the rows onto a
//! uniform grid of pitch `d_e` (requires `d / d_e` integer), with holes where
//! the composite positions skip grid points. The combined noise variance is
//! `K_r sigma_n^2` per raw virtual sample.

use crate::schedule::PatternSchedule;
use crate::EstimateError;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rha_model::{
    steering::waveguide_diag, ChannelRealization, RhaConfiguration, ScenarioConfig,
};

/// Raw snapshot tensor: one M x T_p matrix per pattern.
#[derive(Debug, Clone)]
pub struct SnapshotSet {
    pub per_pattern: Vec<DMatrix<Complex64>>,
}

/// Virtual-antenna data after Hadamard recombination.
#[derive(Debug, Clone)]
pub struct VirtualArrayData {
    /// Raw combined samples, row `(i * M + m)`, one column per pilot instant.
    pub combined: DMatrix<Complex64>,
    /// Composite positions `r_i + d_m` in wavelengths, same row order.
    pub positions: Vec<f64>,
    /// Whitened measurements on the uniform grid (grid_len x T_p); rows not
    /// in `observed` are zero.
    pub whitened: DMatrix<Complex64>,
    /// Grid rows that carry measurements.
    pub observed: Vec<usize>,
    /// Number of grid points spanned by the composite array.
    pub grid_len: usize,
    /// Grid pitch in wavelengths (the element spacing).
    pub grid_pitch: f64,
    /// Variance of the combined (pre-whitening) noise per sample.
    pub combined_noise_var: f64,
}

/// Collect `K_r` pattern snapshots of the pilot block. Every antenna uses the
/// same snapshot pattern with unit weights; noise is drawn independently per
/// snapshot.
pub fn collect_snapshots<R: Rng>(
    sc: &ScenarioConfig,
    ch: &ChannelRealization,
    schedule: &PatternSchedule,
    rng: &mut R,
) -> Result<SnapshotSet, EstimateError> {
    let n = sc.elements_per_antenna;
    if schedule.patterns.nrows() != n {
        return Err(EstimateError::Schedule(format!(
            "pattern length {} vs {} elements",
            schedule.patterns.nrows(),
            n
        )));
    }
    let mut per_pattern = Vec::with_capacity(schedule.snapshots());
    for k in 0..schedule.snapshots() {
        let pattern = schedule.pattern(k);
        let mut omega = DMatrix::<Complex64>::zeros(sc.num_antennas, n);
        for m in 0..sc.num_antennas {
            for ni in 0..n {
                omega[(m, ni)] = pattern[ni];
            }
        }
        let cfg = RhaConfiguration::new(
            omega,
            DVector::from_element(sc.num_antennas, Complex64::new(1.0, 0.0)),
        )?;
        let out = rha_model::received_samples(sc, ch, &cfg, &ch.pilot_alice, &ch.pilot_jam, rng)?;
        per_pattern.push(out.pre_adc);
    }
    Ok(SnapshotSet { per_pattern })
}

/// Recombine snapshots into virtual antennas and whiten onto the uniform
/// composite grid.
pub fn combine_virtual_antennas(
    sc: &ScenarioConfig,
    snapshots: &SnapshotSet,
    schedule: &PatternSchedule,
) -> Result<VirtualArrayData, EstimateError> {
    let k_r = schedule.snapshots();
    if snapshots.per_pattern.len() != k_r {
        return Err(EstimateError::Schedule(format!(
            "{} snapshots vs {} patterns",
            snapshots.per_pattern.len(),
            k_r
        )));
    }
    let m = sc.num_antennas;
    let t_p = snapshots.per_pattern[0].ncols();
    let ratio = sc.antenna_spacing / sc.element_spacing;
    if (ratio - ratio.round()).abs() > 1e-9 {
        return Err(EstimateError::Geometry(format!(
            "antenna spacing must be an integer multiple of element spacing (d/d_e = {ratio})"
        )));
    }
    let ratio = ratio.round() as usize;
    let grid_len = ratio * (m - 1) + k_r;
    let t_diag = waveguide_diag(sc);

    let mut combined = DMatrix::<Complex64>::zeros(k_r * m, t_p);
    let mut positions = vec![0.0f64; k_r * m];
    let mut whitened = DMatrix::<Complex64>::zeros(grid_len, t_p);
    let mut observed = Vec::with_capacity(k_r * m);

    for i in 0..k_r {
        for mi in 0..m {
            let row = i * m + mi;
            positions[row] =
                i as f64 * sc.element_spacing + mi as f64 * sc.antenna_spacing;
            for t in 0..t_p {
                let mut acc = Complex64::new(0.0, 0.0);
                for k in 0..k_r {
                    acc += schedule.combiner[(i, k)] * snapshots.per_pattern[k][(mi, t)];
                }
                combined[(row, t)] = acc;
            }
            let gate = Complex64::new(k_r as f64, 0.0) * t_diag[i] * sc.coupling_efficiency;
            let grid_row = i + ratio * mi;
            if !observed.contains(&grid_row) {
                observed.push(grid_row);
                for t in 0..t_p {
                    whitened[(grid_row, t)] = combined[(row, t)] / gate;
                }
            }
        }
    }
    observed.sort_unstable();

    Ok(VirtualArrayData {
        combined,
        positions,
        whitened,
        observed,
        grid_len,
        grid_pitch: sc.element_spacing,
        combined_noise_var: k_r as f64 * sc.noise_power,
    })
}

/// Closed-form virtual sample per the recombination identity, for oracle
/// checks: `sum_z sqrt(P_z) K_r t_i delta_i(theta) a_m(theta) g x`.
pub fn virtual_sample_closed_form(
    sc: &ScenarioConfig,
    ch: &ChannelRealization,
    i: usize,
    mi: usize,
    t: usize,
) -> Complex64 {
    let k_r = sc.elements_per_antenna as f64;
    let t_diag = waveguide_diag(sc);
    let mut acc = Complex64::new(0.0, 0.0);
    for (thetas, gains, pilots, power) in [
        (
            &ch.doa_alice,
            &ch.gains_alice,
            &ch.pilot_alice,
            sc.signal_power,
        ),
        (&ch.doa_jam, &ch.gains_jam, &ch.pilot_jam, sc.jam_power),
    ] {
        for (l, &theta) in thetas.iter().enumerate() {
            let s = theta.sin();
            let delta_i = Complex64::from_polar(
                1.0,
                -2.0 * std::f64::consts::PI * (i as f64) * sc.element_spacing * s,
            );
            let a_m = Complex64::from_polar(
                1.0,
                -2.0 * std::f64::consts::PI * (mi as f64) * sc.antenna_spacing * s,
            );
            acc += power.sqrt()
                * k_r
                * t_diag[i]
                * sc.coupling_efficiency
                * delta_i
                * a_m
                * gains[l]
                * pilots[t];
        }
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schedule::build_pattern_schedule;
    use nalgebra::DVector;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn noise_free(mut sc: ScenarioConfig) -> ScenarioConfig {
        sc.noise_power = 1e-300;
        sc
    }

    #[test]
    fn kr_one_passes_through() {
        let sc = noise_free(ScenarioConfig::toy(2, 1));
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let ch = ChannelRealization::draw(&sc, &mut rng);
        let schedule = build_pattern_schedule(1, 1).unwrap();
        let snaps = collect_snapshots(&sc, &ch, &schedule, &mut rng).unwrap();
        let virt = combine_virtual_antennas(&sc, &snaps, &schedule).unwrap();
        for t in 0..sc.pilot_len {
            for m in 0..2 {
                assert!((virt.combined[(m, t)] - snaps.per_pattern[0][(m, t)]).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn noise_free_single_path_matches_closed_form() {
        let mut sc = noise_free(ScenarioConfig::toy(2, 4));
        sc.num_paths_alice = 1;
        sc.num_paths_jam = 1;
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let ch = ChannelRealization::draw(&sc, &mut rng);
        let schedule = build_pattern_schedule(4, 4).unwrap();
        let snaps = collect_snapshots(&sc, &ch, &schedule, &mut rng).unwrap();
        let virt = combine_virtual_antennas(&sc, &snaps, &schedule).unwrap();
        for i in 0..4 {
            for m in 0..2 {
                for t in 0..sc.pilot_len {
                    let expect = virtual_sample_closed_form(&sc, &ch, i, m, t);
                    let got = virt.combined[(i * 2 + m, t)];
                    assert!(
                        (got - expect).norm() < 1e-9 * expect.norm().max(1.0),
                        "virtual ({i},{m},{t}): {got} vs {expect}"
                    );
                }
            }
        }
    }

    #[test]
    fn hadamard_gate_identity_per_virtual_set() {
        // sum_k C[i,k] (pattern_k^H T delta) = K_r t_i delta_i(theta)
        let sc = ScenarioConfig::toy(2, 8);
        let schedule = build_pattern_schedule(8, 8).unwrap();
        let t_diag = waveguide_diag(&sc);
        let theta: f64 = 0.43;
        let manifold = rha_model::dma_manifold(&sc, &[theta]).unwrap();
        for i in 0..8 {
            let mut acc = Complex64::new(0.0, 0.0);
            for k in 0..8 {
                let pattern = schedule.pattern(k);
                let mut gain = Complex64::new(0.0, 0.0);
                for n in 0..8 {
                    gain += pattern[n].conj() * t_diag[n] * manifold[(n, 0)];
                }
                acc += schedule.combiner[(i, k)] * gain;
            }
            let expect = Complex64::new(8.0, 0.0) * t_diag[i] * manifold[(i, 0)];
            assert!(
                (acc - expect).norm() < 1e-9,
                "virtual set {i}: {acc} vs {expect}"
            );
        }
    }

    #[test]
    fn noise_only_snapshots_have_configured_variance() {
        let mut sc = ScenarioConfig::toy(1, 2);
        sc.signal_power = 1e-300;
        sc.jam_power = 0.0;
        sc.noise_power = 2.0;
        sc.pilot_len = 2500;
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let mut ch = ChannelRealization::draw(&sc, &mut rng);
        ch.gains_alice = DVector::from_element(1, Complex64::new(0.0, 0.0));
        ch.gains_jam = DVector::from_element(1, Complex64::new(0.0, 0.0));
        let schedule = build_pattern_schedule(2, 2).unwrap();
        let snaps = collect_snapshots(&sc, &ch, &schedule, &mut rng).unwrap();
        let mut acc = 0.0;
        let mut count = 0usize;
        for s in &snaps.per_pattern {
            for v in s.iter() {
                acc += v.norm_sqr();
                count += 1;
            }
        }
        let var = acc / count as f64;
        assert!(
            (var - sc.noise_power).abs() < 0.05 * sc.noise_power,
            "sample variance {var} vs sigma^2 {}",
            sc.noise_power
        );
    }

    #[test]
    fn non_commensurate_geometry_rejected() {
        let mut sc = ScenarioConfig::toy(2, 2);
        sc.antenna_spacing = 0.61; // not a multiple of 0.25
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let ch = ChannelRealization::draw(&sc, &mut rng);
        let schedule = build_pattern_schedule(2, 2).unwrap();
        let snaps = collect_snapshots(&sc, &ch, &schedule, &mut rng).unwrap();
        assert!(combine_virtual_antennas(&sc, &snaps, &schedule).is_err());
    }
}
