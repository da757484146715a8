//! Flat key-value configuration files.
//!
//! Lines are `key = value`; `#` starts a comment. CLI flags override file
//! values. Unknown keys are rejected so typos surface early.

use crate::experiment::{ErrorMode, ExperimentConfig, Scheme, SweepAxis};
use crate::SimError;
use rha_model::ScenarioConfig;
use std::collections::HashMap;
use std::path::Path;
use std::str::FromStr;

pub const SCENARIO_KEYS: &[&str] = &[
    "m",
    "n",
    "antenna_spacing",
    "element_spacing",
    "wavelength",
    "alpha_t",
    "guide_index",
    "control_bits",
    "adc_bits",
    "adc_fullscale",
    "signal_db",
    "jam_db",
    "noise_power",
    "paths_alice",
    "paths_jam",
    "blocking_ratio",
    "pilot_len",
    "coupling_efficiency",
    "rayleigh",
];

pub const EXPERIMENT_KEYS: &[&str] = &[
    "trials",
    "seed",
    "sweep",
    "values",
    "schemes",
    "error_mode",
    "rho_theta",
    "rho_g",
    "deterministic_timing",
    "threads",
];

pub fn parse_file(path: &Path) -> Result<HashMap<String, String>, SimError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| SimError::Io(format!("{}: {e}", path.display())))?;
    parse_str(&text)
}

pub fn parse_str(text: &str) -> Result<HashMap<String, String>, SimError> {
    let mut map = HashMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(SimError::Config(format!(
                "line {}: expected 'key = value', got '{raw}'",
                lineno + 1
            )));
        };
        let key = k.trim().to_string();
        if !SCENARIO_KEYS.contains(&key.as_str()) && !EXPERIMENT_KEYS.contains(&key.as_str()) {
            return Err(SimError::Config(format!("unknown key '{key}'")));
        }
        map.insert(key, v.trim().to_string());
    }
    Ok(map)
}

fn get<T: FromStr>(map: &HashMap<String, String>, key: &str, default: T) -> Result<T, SimError>
where
    T::Err: std::fmt::Display,
{
    match map.get(key) {
        None => Ok(default),
        Some(v) => v
            .parse::<T>()
            .map_err(|e| SimError::Config(format!("key '{key}': {e}"))),
    }
}

/// Build the scenario from parsed keys over the nominal defaults.
pub fn scenario_from_map(map: &HashMap<String, String>) -> Result<ScenarioConfig, SimError> {
    let mut sc = ScenarioConfig::nominal();
    sc.num_antennas = get(map, "m", sc.num_antennas)?;
    sc.elements_per_antenna = get(map, "n", sc.elements_per_antenna)?;
    sc.antenna_spacing = get(map, "antenna_spacing", sc.antenna_spacing)?;
    sc.element_spacing = get(map, "element_spacing", sc.element_spacing)?;
    sc.wavelength = get(map, "wavelength", sc.wavelength)?;
    sc.waveguide_attenuation = get(map, "alpha_t", sc.waveguide_attenuation)?;
    let n_g = get(map, "guide_index", 2.5)?;
    sc = sc.with_guide_index(n_g);
    sc.control_bits = get(map, "control_bits", sc.control_bits)?;
    sc.adc_bits = get(map, "adc_bits", sc.adc_bits)?;
    sc.adc_fullscale = get(map, "adc_fullscale", sc.adc_fullscale)?;
    sc.noise_power = get(map, "noise_power", sc.noise_power)?;
    let signal_db = get(map, "signal_db", 20.0)?;
    let jam_db = get(map, "jam_db", 40.0)?;
    sc = sc.with_signal_db(signal_db).with_jam_db(jam_db);
    sc.num_paths_alice = get(map, "paths_alice", sc.num_paths_alice)?;
    sc.num_paths_jam = get(map, "paths_jam", sc.num_paths_jam)?;
    sc.pilot_len = get(map, "pilot_len", sc.pilot_len)?;
    sc.coupling_efficiency = get(map, "coupling_efficiency", sc.coupling_efficiency)?;
    sc.rayleigh_gains = get(map, "rayleigh", sc.rayleigh_gains)?;
    match map.get("blocking_ratio").map(|s| s.as_str()) {
        None | Some("auto") => {
            sc.blocking_ratio = ScenarioConfig::default_blocking_ratio(sc.adc_bits);
        }
        Some(v) => {
            sc.blocking_ratio = v
                .parse()
                .map_err(|e| SimError::Config(format!("blocking_ratio: {e}")))?;
        }
    }
    sc.validate()?;
    Ok(sc)
}

/// Build the experiment configuration from parsed keys, with the environment
/// seed as the fallback default.
pub fn experiment_from_map(map: &HashMap<String, String>) -> Result<ExperimentConfig, SimError> {
    let scenario = scenario_from_map(map)?;
    let env_seed = std::env::var("RHA_SIM_SEED")
        .ok()
        .and_then(|s| s.parse::<u64>().ok())
        .unwrap_or(0);
    let sweep = SweepAxis::from_str(
        map.get("sweep").map(|s| s.as_str()).unwrap_or("jam_power_db"),
    )
    .map_err(SimError::Config)?;
    let values: Vec<f64> = match map.get("values") {
        None => vec![40.0],
        Some(v) => v
            .split(',')
            .map(|x| x.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|e| SimError::Config(format!("values: {e}")))?,
    };
    let schemes: Vec<Scheme> = match map.get("schemes") {
        None => vec![Scheme::RhaRobustDiscrete, Scheme::UlaEqualElements],
        Some(v) => v
            .split(',')
            .map(|x| Scheme::from_str(x.trim()))
            .collect::<Result<_, _>>()
            .map_err(SimError::Config)?,
    };
    let error_mode = match map.get("error_mode").map(|s| s.as_str()) {
        None | Some("perfect") => ErrorMode::Perfect,
        Some("fixed_radius") => ErrorMode::FixedRadius,
        Some("estimated") => ErrorMode::Estimated,
        Some(other) => {
            return Err(SimError::Config(format!("unknown error_mode '{other}'")));
        }
    };
    Ok(ExperimentConfig {
        scenario,
        sweep,
        values,
        schemes,
        trials: get(map, "trials", 100)?,
        seed: get(map, "seed", env_seed)?,
        error_mode,
        rho_theta: get(map, "rho_theta", 0.0)?,
        rho_g: get(map, "rho_g", 0.0)?,
        deterministic_timing: get(map, "deterministic_timing", false)?,
        threads: get(map, "threads", 1)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_flat_file_with_comments() {
        let text = "# scenario\nm = 2\nn = 4\njam_db = 50 # strong\ntrials = 7\nschemes = rha_nonrobust\n";
        let map = parse_str(text).unwrap();
        let cfg = experiment_from_map(&map).unwrap();
        assert_eq!(cfg.scenario.num_antennas, 2);
        assert_eq!(cfg.scenario.elements_per_antenna, 4);
        assert_eq!(cfg.trials, 7);
        assert_eq!(cfg.schemes, vec![Scheme::RhaNonrobust]);
        assert!((cfg.scenario.jam_power - 1e5).abs() < 1e-6);
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(parse_str("bogus = 1\n").is_err());
    }

    #[test]
    fn auto_blocking_ratio_follows_adc_bits() {
        let map = parse_str("adc_bits = 5\n").unwrap();
        let sc = scenario_from_map(&map).unwrap();
        assert_eq!(sc.blocking_ratio, 256.0); // (2^(5-1))^2
    }
}
