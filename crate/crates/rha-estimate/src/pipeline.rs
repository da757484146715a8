//! End-to-end estimation: schedule -> snapshots -> virtual antennas ->
//! atomic-norm SDP -> angle extraction -> classification -> least squares.

use crate::{
    anm::solve_anm,
    classify::{classify_paths, PathClass},
    csi::estimate_csi,
    doa::extract_doa,
    result::EstimationResult,
    schedule::build_pattern_schedule,
    snapshots::{collect_snapshots, combine_virtual_antennas},
    EstimateError,
};
use rand::Rng;
use rha_model::{ChannelRealization, ScenarioConfig};

#[derive(Debug, Clone, Default)]
pub struct EstimationDiagnostics {
    pub detected_order: usize,
    pub truncated: bool,
    pub ambiguous_paths: usize,
    pub csi_regularized: bool,
    pub csi_residual: f64,
    pub anm_objective: f64,
    pub anm_iterations: usize,
}

/// Run the full estimator on one channel realization.
///
/// The returned radii are the configured defaults (`default_rho`); run
/// [`crate::calibrate_error_radii`] to measure them for a scenario instead.
pub fn run_estimation<R: Rng>(
    sc: &ScenarioConfig,
    ch: &ChannelRealization,
    default_rho: f64,
    rng: &mut R,
) -> Result<(EstimationResult, EstimationDiagnostics), EstimateError> {
    let n = sc.elements_per_antenna;
    let schedule = build_pattern_schedule(n, n)?;
    let snaps = collect_snapshots(sc, ch, &schedule, rng)?;
    let virt = combine_virtual_antennas(sc, &snaps, &schedule)?;

    let anm = solve_anm(&virt.whitened, &virt.observed, 1e-7)?;
    let max_paths = sc.num_paths_alice + sc.num_paths_jam;
    let doa = extract_doa(&anm.t_mat, max_paths, virt.grid_pitch);

    let cls = classify_paths(
        &doa.angles,
        &virt.whitened,
        &virt.observed,
        virt.grid_pitch,
        &ch.pilot_alice,
        &ch.pilot_jam,
        0.05,
    );

    let mut doa_alice = Vec::new();
    let mut doa_jam = Vec::new();
    for (angle, class) in doa.angles.iter().zip(&cls.classes) {
        match class {
            PathClass::Alice => doa_alice.push(*angle),
            PathClass::Jam => doa_jam.push(*angle),
            PathClass::Ambiguous => {}
        }
    }
    doa_alice.sort_by(|a, b| a.partial_cmp(b).unwrap());
    doa_jam.sort_by(|a, b| a.partial_cmp(b).unwrap());

    let csi = estimate_csi(
        &doa_alice,
        &doa_jam,
        &virt.whitened,
        &virt.observed,
        virt.grid_pitch,
        &ch.pilot_alice,
        &ch.pilot_jam,
        sc.signal_power,
        sc.jam_power,
    );

    let mean_mag = |g: &nalgebra::DVector<num_complex::Complex64>| -> f64 {
        if g.is_empty() {
            1.0
        } else {
            g.iter().map(|v| v.norm()).sum::<f64>() / g.len() as f64
        }
    };

    let result = EstimationResult {
        doa_alice,
        doa_jam,
        sigma_alice: mean_mag(&csi.gains_alice),
        sigma_jam: mean_mag(&csi.gains_jam),
        gains_alice: csi.gains_alice,
        gains_jam: csi.gains_jam,
        rho_theta_alice: default_rho,
        rho_theta_jam: default_rho,
        rho_g_alice: default_rho,
        rho_g_jam: default_rho,
    };
    let diag = EstimationDiagnostics {
        detected_order: doa.order,
        truncated: doa.truncated,
        ambiguous_paths: cls.ambiguous_count,
        csi_regularized: csi.regularized,
        csi_residual: csi.residual,
        anm_objective: anm.objective,
        anm_iterations: anm.iterations,
    };
    Ok((result, diag))
}
