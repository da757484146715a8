use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rha_estimate::EstimationResult;
use rha_model::{ChannelRealization, ScenarioConfig};
use rha_robust::{solve_robust, SolveParams};

#[test]
#[ignore]
fn debug_certificate_toy() {
    let mut sc = ScenarioConfig::toy(2, 4);
    sc.antenna_spacing = 0.5;
    sc.element_spacing = 0.125;
    sc = sc.with_jam_db(30.0);
    let mut rng = ChaCha12Rng::seed_from_u64(9);
    for trial in 0..6 {
        let ch = ChannelRealization::draw(&sc, &mut rng);
        let est = EstimationResult {
            doa_alice: ch.doa_alice.clone(),
            doa_jam: ch.doa_jam.clone(),
            gains_alice: ch.gains_alice.clone(),
            gains_jam: ch.gains_jam.clone(),
            rho_theta_alice: 0.1,
            rho_theta_jam: 0.1,
            rho_g_alice: 0.1,
            rho_g_jam: 0.1,
            sigma_alice: 1.0,
            sigma_jam: 1.0,
        };
        let params = SolveParams {
            seed: 1,
            n_worst_samples: 1000,
            ..Default::default()
        };
        let t0 = std::time::Instant::now();
        match solve_robust(&sc, &est, &params) {
            Ok(sol) => eprintln!(
                "trial {trial}: cert_disc={:+.2}dB cert_cont={:+.2}dB sdr={:+.2}dB worst_disc={:+.2}dB worst_cont={:+.2}dB ok={} [{:.2}s]",
                rha_model::to_db(sol.gamma_certified),
                rha_model::to_db(sol.gamma_certified_continuous),
                rha_model::to_db(sol.gamma_sdr),
                rha_model::to_db(sol.worst_case.worst_sinr),
                rha_model::to_db(sol.worst_case_continuous.worst_sinr),
                sol.worst_case_continuous.worst_sinr >= sol.gamma_certified_continuous * 0.891,
                t0.elapsed().as_secs_f64(),
            ),
            Err(e) => eprintln!("trial {trial}: ERR {e}"),
        }
    }
}
