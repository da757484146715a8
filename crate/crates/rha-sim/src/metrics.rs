//! Aggregated metrics and the feasible-probability definition.

use crate::trial::TrialRecord;
use rha_model::to_db;

/// Aggregates over one (scheme, sweep value) cell.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct Metrics {
    /// dB of the mean linear SINR over successful trials.
    pub mean_sinr_db: f64,
    /// dB of the minimum SINR over successful trials.
    pub min_sinr_db: f64,
    /// Fraction of successful trials in which every antenna satisfies the
    /// ratio constraint.
    pub feasible_prob: f64,
    /// Trials with at least one violating antenna.
    pub blocked_count: usize,
    /// Solver failures (excluded from the SINR statistics).
    pub failures: usize,
    pub secs_per_trial: f64,
    pub trials: usize,
}

impl Metrics {
    pub fn aggregate(records: &[TrialRecord]) -> Self {
        let ok: Vec<&TrialRecord> = records.iter().filter(|r| !r.solver_failed).collect();
        let failures = records.len() - ok.len();
        let mean_linear = if ok.is_empty() {
            0.0
        } else {
            ok.iter().map(|r| r.sinr).sum::<f64>() / ok.len() as f64
        };
        let min_linear = ok
            .iter()
            .map(|r| r.sinr)
            .fold(f64::INFINITY, f64::min)
            .min(mean_linear);
        let feasible = feasible_probability(&ok);
        let blocked = ok.iter().filter(|r| !r.all_antennas_ok).count();
        let secs = if records.is_empty() {
            0.0
        } else {
            records.iter().map(|r| r.secs).sum::<f64>() / records.len() as f64
        };
        Self {
            mean_sinr_db: to_db(mean_linear),
            min_sinr_db: to_db(if ok.is_empty() { 0.0 } else { min_linear }),
            feasible_prob: feasible,
            blocked_count: blocked,
            failures,
            secs_per_trial: secs,
            trials: records.len(),
        }
    }
}

/// Fraction of trials in which all antennas satisfy the ratio constraint
/// (margins nonnegative). Trials without margin data count as violating.
pub fn feasible_probability(records: &[&TrialRecord]) -> f64 {
    if records.is_empty() {
        return 0.0;
    }
    let good = records
        .iter()
        .filter(|r| !r.blocking_margins.is_empty() && r.all_antennas_ok)
        .count();
    good as f64 / records.len() as f64
}

/// Percentile bootstrap confidence interval of the mean of `values`.
pub fn bootstrap_mean_ci(values: &[f64], resamples: usize, alpha: f64, seed: u64) -> (f64, f64) {
    use rand::{Rng, SeedableRng};
    if values.is_empty() {
        return (0.0, 0.0);
    }
    let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(seed);
    let n = values.len();
    let mut means: Vec<f64> = (0..resamples)
        .map(|_| {
            let mut acc = 0.0;
            for _ in 0..n {
                acc += values[rng.random_range(0..n)];
            }
            acc / n as f64
        })
        .collect();
    means.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let lo_idx = ((alpha / 2.0) * resamples as f64) as usize;
    let hi_idx = (((1.0 - alpha / 2.0) * resamples as f64) as usize).min(resamples - 1);
    (means[lo_idx], means[hi_idx])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(sinr: f64, margins: Vec<f64>, failed: bool) -> TrialRecord {
        let ok = !margins.is_empty() && margins.iter().all(|&m| m >= 0.0);
        TrialRecord {
            sinr,
            blocking_margins: margins,
            all_antennas_ok: ok,
            solver_failed: failed,
            secs: 0.0,
        }
    }

    #[test]
    fn all_positive_margins_give_probability_one() {
        let recs: Vec<TrialRecord> = (0..10)
            .map(|_| record(1.0, vec![0.5, 0.1], false))
            .collect();
        let refs: Vec<&TrialRecord> = recs.iter().collect();
        assert_eq!(feasible_probability(&refs), 1.0);
    }

    #[test]
    fn counting_oracle_30_of_100() {
        let mut recs = Vec::new();
        for i in 0..100 {
            let margin = if i < 30 { -1.0 } else { 1.0 };
            recs.push(record(1.0, vec![margin], false));
        }
        let refs: Vec<&TrialRecord> = recs.iter().collect();
        assert!((feasible_probability(&refs) - 0.7).abs() < 1e-12);
    }

    #[test]
    fn min_below_mean_and_failures_counted() {
        let recs = vec![
            record(1.0, vec![1.0], false),
            record(4.0, vec![1.0], false),
            record(0.0, vec![], true),
        ];
        let m = Metrics::aggregate(&recs);
        assert_eq!(m.failures, 1);
        assert_eq!(m.trials, 3);
        assert!(m.min_sinr_db <= m.mean_sinr_db);
    }

    #[test]
    fn bootstrap_brackets_the_mean() {
        let values: Vec<f64> = (0..200).map(|i| (i % 7) as f64).collect();
        let mean = values.iter().sum::<f64>() / values.len() as f64;
        let (lo, hi) = bootstrap_mean_ci(&values, 500, 0.05, 1);
        assert!(lo <= mean && mean <= hi);
        assert!(hi - lo < 1.0);
    }
}
