//! Quick invariant suite behind `rha-sim validate`: one pass/fail line per
//! check, exercising the load-bearing identities end to end.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rha_model::{ChannelRealization, RhaConfiguration, ScenarioConfig};
use rha_sim::SimError;
use std::f64::consts::PI;

struct Suite {
    failures: usize,
}

impl Suite {
    fn check(&mut self, name: &str, ok: bool, detail: String) {
        if ok {
            println!("PASS  {name}");
        } else {
            println!("FAIL  {name}: {detail}");
            self.failures += 1;
        }
    }
}

pub fn run() -> Result<(), SimError> {
    let mut suite = Suite { failures: 0 };
    let mut rng = ChaCha12Rng::seed_from_u64(0xA11CE);

    // SINR form equivalence on random instances
    {
        let mut worst = 0.0f64;
        for _ in 0..200 {
            let sc = ScenarioConfig::toy(2, 2);
            let ch = ChannelRealization::draw(&sc, &mut rng);
            let cfg = random_config(2, 2, &mut rng);
            let a = rha_model::received_sinr(&sc, &ch, &cfg)?;
            let b = rha_model::received_sinr_stacked(&sc, &ch, &cfg)?;
            worst = worst.max((a - b).abs() / a.max(1e-30));
        }
        suite.check(
            "sinr_form_equivalence",
            worst <= 1e-9,
            format!("worst relative error {worst:.2e}"),
        );
    }

    // Hadamard-product rewriting identity
    {
        let mut worst = 0.0f64;
        for _ in 0..100 {
            let a = random_cmat(4, 3, &mut rng);
            let b = random_cmat(4, 3, &mut rng);
            let w = random_cvec(3, &mut rng);
            worst = worst.max(rha_model::hadamard_mix_residual(&a, &b, &w)?);
        }
        suite.check(
            "hadamard_rewriting_identity",
            worst < 1e-12,
            format!("worst residual {worst:.2e}"),
        );
    }

    // virtual-antenna identity, noise-free
    {
        let mut sc = ScenarioConfig::toy(2, 4);
        sc.noise_power = 1e-300;
        let mut worst = 0.0f64;
        for _ in 0..20 {
            let ch = ChannelRealization::draw(&sc, &mut rng);
            let schedule = rha_estimate::build_pattern_schedule(4, 4)?;
            let snaps = rha_estimate::collect_snapshots(&sc, &ch, &schedule, &mut rng)?;
            let virt = rha_estimate::combine_virtual_antennas(&sc, &snaps, &schedule)?;
            for i in 0..4 {
                for m in 0..2 {
                    for t in 0..sc.pilot_len {
                        let expect =
                            rha_estimate::snapshots::virtual_sample_closed_form(&sc, &ch, i, m, t);
                        let got = virt.combined[(i * 2 + m, t)];
                        worst = worst.max((got - expect).norm() / expect.norm().max(1.0));
                    }
                }
            }
        }
        suite.check(
            "virtual_antenna_identity",
            worst <= 1e-9,
            format!("worst residual {worst:.2e}"),
        );
    }

    // quantizer blocking boundary and monotonicity
    {
        let adc = rha_model::AdcModel::new(3, 1.0);
        let boundary = rha_model::blocking_predicate(
            Complex64::new(1.0, 1.0),
            Complex64::new(7.0, 7.0),
            &adc,
        );
        let beyond = rha_model::blocking_predicate(
            Complex64::new(1.0, 1.0),
            Complex64::new(7.5, 7.5),
            &adc,
        );
        suite.check(
            "adc_blocking_boundary",
            !boundary.any() && beyond.any(),
            format!("boundary {:?}, beyond {:?}", boundary.any(), beyond.any()),
        );
    }

    // discretization alignment trace never decreases
    {
        let mut ok = true;
        for _ in 0..200 {
            let v = random_unit_cvec(6, &mut rng);
            let w0 = random_unit_cvec(2, &mut rng);
            let out = rha_robust::discretize(&v, 2, 3, 2, &w0, 1e-8, 30);
            if out.e_trace.windows(2).any(|w| w[1] < w[0] - 1e-12) {
                ok = false;
            }
        }
        suite.check(
            "discretization_monotone",
            ok,
            "alignment decreased".to_string(),
        );
    }

    // bisection certificate vs evaluated SINR at zero radius
    {
        let sc = ScenarioConfig::toy(2, 2);
        let ch = ChannelRealization::draw(&sc, &mut rng);
        let est = rha_estimate::EstimationResult {
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
        let params = rha_robust::SolveParams {
            n_worst_samples: 10,
            n_randomization: 200,
            seed: 1,
            ..Default::default()
        };
        let sol = rha_robust::solve_robust(&sc, &est, &params)?;
        let rel = (sol.gamma_certified - sol.nominal_sinr_discrete).abs()
            / sol.nominal_sinr_discrete.max(1e-30);
        suite.check(
            "zero_radius_certificate_exact",
            rel <= 1e-9,
            format!("relative gap {rel:.2e}"),
        );
    }

    if suite.failures > 0 {
        Err(SimError::Config(format!(
            "{} validation check(s) failed",
            suite.failures
        )))
    } else {
        println!("all checks passed");
        Ok(())
    }
}

fn random_cmat(r: usize, c: usize, rng: &mut ChaCha12Rng) -> DMatrix<Complex64> {
    DMatrix::from_fn(r, c, |_, _| {
        Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
    })
}

fn random_cvec(n: usize, rng: &mut ChaCha12Rng) -> DVector<Complex64> {
    DVector::from_fn(n, |_, _| {
        Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
    })
}

fn random_unit_cvec(n: usize, rng: &mut ChaCha12Rng) -> DVector<Complex64> {
    DVector::from_fn(n, |_, _| Complex64::from_polar(1.0, rng.random::<f64>() * 2.0 * PI))
}

fn random_config(m: usize, n: usize, rng: &mut ChaCha12Rng) -> RhaConfiguration {
    let omega = DMatrix::from_fn(m, n, |_, _| {
        Complex64::from_polar(1.0, rng.random::<f64>() * 2.0 * PI)
    });
    let w = DVector::from_fn(m, |_, _| {
        Complex64::from_polar(1.0, rng.random::<f64>() * 2.0 * PI)
    });
    RhaConfiguration::new(omega, w).expect("unit modulus")
}
