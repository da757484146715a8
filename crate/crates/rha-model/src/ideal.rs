//! Ideal heterogeneous pattern oracle.
//!
//! An ideal (unconstrained) heterogeneous antenna can pick an arbitrary
//! complex gain per direction. Choosing the gain at each signal path as the
//! conjugate of the path's phase factor makes all signal multipaths add
//! in phase, while a zero gain toward every jamming path nulls the jammer.
//! This is unattainable for a real DMA and serves as an upper-bound test
//! oracle for the constrained patterns.

use crate::channel::ChannelRealization;
use crate::scenario::{ModelError, ScenarioConfig};
use crate::steering::array_phase;
use num_complex::Complex64;

/// Per-antenna ideal per-path gains: `phi[m][l]` such that
/// `phi * a_m(theta_l) * g_l = amp * |g_l|` (real, nonnegative) for signal
/// paths; jamming gains are zero.
pub struct IdealPattern {
    pub signal_gains: Vec<Vec<Complex64>>,
    pub amp: f64,
}

impl IdealPattern {
    pub fn build(sc: &ScenarioConfig, ch: &ChannelRealization, amp: f64) -> Self {
        let m = sc.num_antennas;
        let signal_gains = (0..m)
            .map(|mi| {
                ch.doa_alice
                    .iter()
                    .zip(ch.gains_alice.iter())
                    .map(|(&theta, g)| {
                        let a = array_phase(sc, mi, theta);
                        amp * (a * g / g.norm()).conj()
                    })
                    .collect()
            })
            .collect();
        Self { signal_gains, amp }
    }

    /// Combined signal term at antenna m: must equal `amp * sum_l |g_l|`.
    pub fn signal_term(&self, ch: &ChannelRealization, sc: &ScenarioConfig, m: usize) -> Complex64 {
        ch.doa_alice
            .iter()
            .zip(ch.gains_alice.iter())
            .enumerate()
            .map(|(l, (&theta, g))| {
                self.signal_gains[m][l] * array_phase(sc, m, theta) * g
            })
            .sum()
    }

    pub fn expected_signal_term(&self, ch: &ChannelRealization) -> f64 {
        self.amp * ch.gains_alice.iter().map(|g| g.norm()).sum::<f64>()
    }
}

impl IdealPattern {
    /// Jamming term is identically zero by construction (zero gain toward
    /// every jamming path).
    pub fn jam_term(&self) -> Complex64 {
        Complex64::new(0.0, 0.0)
    }
}

/// Check the ideal-pattern conditions on a random channel; returns the max
/// deviation of the per-antenna signal terms from `amp * sum |g|`.
pub fn ideal_pattern_residual(
    sc: &ScenarioConfig,
    ch: &ChannelRealization,
    amp: f64,
) -> Result<f64, ModelError> {
    let ideal = IdealPattern::build(sc, ch, amp);
    let expect = ideal.expected_signal_term(ch);
    let mut worst: f64 = 0.0;
    for m in 0..sc.num_antennas {
        let term = ideal.signal_term(ch, sc, m);
        worst = worst.max((term - Complex64::new(expect, 0.0)).norm());
        worst = worst.max(ideal.jam_term().norm());
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn ideal_pattern_aligns_signal_and_nulls_jam() {
        let sc = ScenarioConfig::nominal();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..10 {
            let ch = ChannelRealization::draw(&sc, &mut rng);
            let resid = ideal_pattern_residual(&sc, &ch, 2.0).unwrap();
            assert!(resid < 1e-9, "ideal pattern residual {resid}");
        }
    }
}
