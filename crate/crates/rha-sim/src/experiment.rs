//! Experiment configuration, sweep axes and the Monte Carlo driver.

use crate::metrics::Metrics;
use crate::trial::{run_trial, TrialRecord};
use crate::{derive_seed, SimError};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    RhaRobustDiscrete,
    RhaRobustContinuous,
    RhaNonrobust,
    RhaCsiOnlyRobust,
    UlaEqualElements,
    UlaEqualAperture,
}

impl Scheme {
    pub fn name(&self) -> &'static str {
        match self {
            Scheme::RhaRobustDiscrete => "rha_robust_discrete",
            Scheme::RhaRobustContinuous => "rha_robust_continuous",
            Scheme::RhaNonrobust => "rha_nonrobust",
            Scheme::RhaCsiOnlyRobust => "rha_csi_only_robust",
            Scheme::UlaEqualElements => "ula_equal_elements",
            Scheme::UlaEqualAperture => "ula_equal_aperture",
        }
    }

    pub fn all() -> &'static [Scheme] {
        &[
            Scheme::RhaRobustDiscrete,
            Scheme::RhaRobustContinuous,
            Scheme::RhaNonrobust,
            Scheme::RhaCsiOnlyRobust,
            Scheme::UlaEqualElements,
            Scheme::UlaEqualAperture,
        ]
    }
}

impl FromStr for Scheme {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Scheme::all()
            .iter()
            .find(|sch| sch.name() == s)
            .copied()
            .ok_or_else(|| format!("unknown scheme '{s}'"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    JamPowerDb,
    ElementsPerAntenna,
    NumAntennas,
    NumPaths,
    RhoG,
    RhoTheta,
    JamPowerWithEstimation,
}

impl SweepAxis {
    pub fn name(&self) -> &'static str {
        match self {
            SweepAxis::JamPowerDb => "jam_power_db",
            SweepAxis::ElementsPerAntenna => "n",
            SweepAxis::NumAntennas => "m",
            SweepAxis::NumPaths => "num_paths",
            SweepAxis::RhoG => "rho_g",
            SweepAxis::RhoTheta => "rho_theta",
            SweepAxis::JamPowerWithEstimation => "jam_power_with_estimation",
        }
    }
}

impl FromStr for SweepAxis {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        for ax in [
            SweepAxis::JamPowerDb,
            SweepAxis::ElementsPerAntenna,
            SweepAxis::NumAntennas,
            SweepAxis::NumPaths,
            SweepAxis::RhoG,
            SweepAxis::RhoTheta,
            SweepAxis::JamPowerWithEstimation,
        ] {
            if ax.name() == s {
                return Ok(ax);
            }
        }
        Err(format!("unknown sweep axis '{s}'"))
    }
}

/// How the design-side estimate is produced in each trial.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorMode {
    /// The design sees the true channel (no errors, radii zero).
    Perfect,
    /// The design sees the truth perturbed by random errors drawn inside
    /// balls of the configured radii.
    FixedRadius,
    /// The design runs the full estimator on pilot snapshots.
    Estimated,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub scenario: rha_model::ScenarioConfig,
    pub sweep: SweepAxis,
    pub values: Vec<f64>,
    pub schemes: Vec<Scheme>,
    pub trials: usize,
    pub seed: u64,
    pub error_mode: ErrorMode,
    /// Radii used by `FixedRadius` mode and passed to the robust solver.
    pub rho_theta: f64,
    pub rho_g: f64,
    /// Zero out the wall-clock column for byte-reproducible outputs.
    pub deterministic_timing: bool,
    pub threads: usize,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<(), SimError> {
        if self.values.is_empty() || self.schemes.is_empty() {
            return Err(SimError::Config(
                "sweep values and schemes must be nonempty".into(),
            ));
        }
        if self.trials == 0 {
            return Err(SimError::Config("trials must be >= 1".into()));
        }
        self.scenario.validate()?;
        Ok(())
    }

    /// Scenario with one sweep value applied.
    pub fn scenario_at(&self, value: f64) -> rha_model::ScenarioConfig {
        let mut sc = self.scenario.clone();
        match self.sweep {
            SweepAxis::JamPowerDb | SweepAxis::JamPowerWithEstimation => {
                sc = sc.with_jam_db(value);
            }
            SweepAxis::ElementsPerAntenna => {
                sc.elements_per_antenna = value as usize;
                // widen the antenna spacing if the subarray no longer fits
                sc.antenna_spacing = sc.antenna_spacing.max(sc.element_spacing * value);
            }
            SweepAxis::NumAntennas => sc.num_antennas = value as usize,
            SweepAxis::NumPaths => {
                sc.num_paths_alice = value as usize;
                sc.num_paths_jam = value as usize;
            }
            SweepAxis::RhoG | SweepAxis::RhoTheta => {}
        }
        sc
    }

    pub fn radii_at(&self, value: f64) -> (f64, f64) {
        match self.sweep {
            SweepAxis::RhoG => (self.rho_theta, value),
            SweepAxis::RhoTheta => (value, self.rho_g),
            _ => (self.rho_theta, self.rho_g),
        }
    }

    pub fn error_mode_at(&self) -> ErrorMode {
        match self.sweep {
            SweepAxis::JamPowerWithEstimation => ErrorMode::Estimated,
            // a radius sweep is meaningless without injected errors
            SweepAxis::RhoG | SweepAxis::RhoTheta => {
                if self.error_mode == ErrorMode::Perfect {
                    ErrorMode::FixedRadius
                } else {
                    self.error_mode
                }
            }
            _ => self.error_mode,
        }
    }
}

/// One aggregated table cell plus its trial records.
#[derive(Debug, Clone)]
pub struct SweepCell {
    pub scheme: Scheme,
    pub sweep_value: f64,
    pub metrics: Metrics,
    pub records: Vec<TrialRecord>,
}

/// Run the full experiment: every sweep value x scheme x trial.
///
/// Trial `i` draws its channel from `derive_seed(seed, i)`, shared across
/// schemes at the same sweep point so comparisons are paired. Aggregation
/// happens in trial order regardless of thread scheduling, keeping outputs
/// byte-identical for a fixed (config, seed).
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<SweepCell>, SimError> {
    cfg.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads.max(1))
        .build()
        .map_err(|e| SimError::Config(e.to_string()))?;

    let mut cells = Vec::new();
    for &value in &cfg.values {
        let sc = cfg.scenario_at(value);
        let (rho_theta, rho_g) = cfg.radii_at(value);
        let mode = cfg.error_mode_at();
        for &scheme in &cfg.schemes {
            let records: Vec<TrialRecord> = pool.install(|| {
                (0..cfg.trials)
                    .into_par_iter()
                    .map(|i| {
                        run_trial(
                            &sc,
                            scheme,
                            mode,
                            rho_theta,
                            rho_g,
                            derive_seed(cfg.seed, i as u64),
                            cfg.deterministic_timing,
                        )
                    })
                    .collect()
            });
            let metrics = Metrics::aggregate(&records);
            cells.push(SweepCell {
                scheme,
                sweep_value: value,
                metrics,
                records,
            });
        }
    }
    Ok(cells)
}
