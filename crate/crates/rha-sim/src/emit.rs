//! Result persistence: CSV and JSON with a fixed column contract.

use crate::experiment::{ExperimentConfig, SweepCell};
use crate::SimError;
use serde::{Deserialize, Serialize};
use std::io::Write;
use std::path::Path;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

impl std::str::FromStr for OutputFormat {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(format!("unknown format '{other}'")),
        }
    }
}

pub const CSV_HEADER: &str = "scheme,sweep_name,sweep_value,trials,mean_sinr_db,min_sinr_db,feasible_prob,blocked_count,failures,secs_per_trial";

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ResultRow {
    pub scheme: String,
    pub sweep_name: String,
    pub sweep_value: f64,
    pub trials: usize,
    pub mean_sinr_db: f64,
    pub min_sinr_db: f64,
    pub feasible_prob: f64,
    pub blocked_count: usize,
    pub failures: usize,
    pub secs_per_trial: f64,
}

impl ResultRow {
    fn csv_line(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{}",
            self.scheme,
            self.sweep_name,
            self.sweep_value,
            self.trials,
            self.mean_sinr_db,
            self.min_sinr_db,
            self.feasible_prob,
            self.blocked_count,
            self.failures,
            self.secs_per_trial
        )
    }
}

/// JSON document: rows plus the configuration echo and seed.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ResultsDocument {
    pub seed: u64,
    pub config: serde_json::Value,
    pub rows: Vec<ResultRow>,
}

pub fn rows_from_cells(cfg: &ExperimentConfig, cells: &[SweepCell]) -> Vec<ResultRow> {
    cells
        .iter()
        .map(|c| ResultRow {
            scheme: c.scheme.name().to_string(),
            sweep_name: cfg.sweep.name().to_string(),
            sweep_value: c.sweep_value,
            trials: c.metrics.trials,
            mean_sinr_db: c.metrics.mean_sinr_db,
            min_sinr_db: c.metrics.min_sinr_db,
            feasible_prob: c.metrics.feasible_prob,
            blocked_count: c.metrics.blocked_count,
            failures: c.metrics.failures,
            secs_per_trial: c.metrics.secs_per_trial,
        })
        .collect()
}

pub fn render_csv(rows: &[ResultRow]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&r.csv_line());
        out.push('\n');
    }
    out
}

pub fn render_json(cfg: &ExperimentConfig, rows: &[ResultRow]) -> Result<String, SimError> {
    let doc = ResultsDocument {
        seed: cfg.seed,
        config: serde_json::to_value(cfg).map_err(|e| SimError::Io(e.to_string()))?,
        rows: rows.to_vec(),
    };
    serde_json::to_string_pretty(&doc).map_err(|e| SimError::Io(e.to_string()))
}

/// Write the table in the requested format; errors carry the path.
pub fn emit_results(
    cfg: &ExperimentConfig,
    rows: &[ResultRow],
    path: &Path,
    format: OutputFormat,
) -> Result<(), SimError> {
    let body = match format {
        OutputFormat::Csv => render_csv(rows),
        OutputFormat::Json => render_json(cfg, rows)?,
    };
    let mut f = std::fs::File::create(path)
        .map_err(|e| SimError::Io(format!("{}: {e}", path.display())))?;
    f.write_all(body.as_bytes())
        .map_err(|e| SimError::Io(format!("{}: {e}", path.display())))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_rows() -> Vec<ResultRow> {
        (0..6)
            .map(|i| ResultRow {
                scheme: if i % 2 == 0 {
                    "rha_robust_discrete".into()
                } else {
                    "ula_equal_elements".into()
                },
                sweep_name: "jam_power_db".into(),
                sweep_value: 10.0 * (i / 2) as f64,
                trials: 100,
                mean_sinr_db: 12.5 - i as f64,
                min_sinr_db: 2.5 - i as f64,
                feasible_prob: 0.9,
                blocked_count: 10,
                failures: 0,
                secs_per_trial: 0.0,
            })
            .collect()
    }

    #[test]
    fn header_only_for_empty_table() {
        let csv = render_csv(&[]);
        assert_eq!(csv, format!("{CSV_HEADER}\n"));
    }

    #[test]
    fn two_schemes_three_values_give_six_rows() {
        let csv = render_csv(&sample_rows());
        assert_eq!(csv.lines().count(), 7);
    }

    #[test]
    fn json_roundtrip_is_byte_identical() {
        let cfg = ExperimentConfig {
            scenario: rha_model::ScenarioConfig::toy(2, 2),
            sweep: crate::experiment::SweepAxis::JamPowerDb,
            values: vec![10.0, 20.0],
            schemes: vec![crate::experiment::Scheme::RhaNonrobust],
            trials: 1,
            seed: 5,
            error_mode: crate::experiment::ErrorMode::Perfect,
            rho_theta: 0.0,
            rho_g: 0.0,
            deterministic_timing: true,
            threads: 1,
        };
        let rows = sample_rows();
        let first = render_json(&cfg, &rows).unwrap();
        let parsed: ResultsDocument = serde_json::from_str(&first).unwrap();
        let second = serde_json::to_string_pretty(&parsed).unwrap();
        assert_eq!(first, second, "emit -> parse -> re-emit must be identical");
    }
}
