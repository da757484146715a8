//! Multipath channel realizations and pilot sequences.

use crate::scenario::{ModelError, ScenarioConfig};
use nalgebra::DVector;
use num_complex::Complex64;
use rand::Rng;
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GainModel {
    /// Unit-magnitude path gains with uniform random phase; per-path power
    /// is carried entirely by the scenario power parameters.
    FixedMagnitude,
    /// Complex circular Gaussian gains (Rayleigh envelope), unit average power.
    Rayleigh,
}

/// True DoAs, complex path gains and pilot sequences for one trial.
#[derive(Debug, Clone)]
pub struct ChannelRealization {
    pub doa_alice: Vec<f64>,
    pub doa_jam: Vec<f64>,
    pub gains_alice: DVector<Complex64>,
    pub gains_jam: DVector<Complex64>,
    pub pilot_alice: DVector<Complex64>,
    pub pilot_jam: DVector<Complex64>,
}

impl ChannelRealization {
    pub fn new(
        doa_alice: Vec<f64>,
        doa_jam: Vec<f64>,
        gains_alice: DVector<Complex64>,
        gains_jam: DVector<Complex64>,
        pilot_alice: DVector<Complex64>,
        pilot_jam: DVector<Complex64>,
    ) -> Result<Self, ModelError> {
        if doa_alice.len() != gains_alice.len() || doa_jam.len() != gains_jam.len() {
            return Err(ModelError::Dimension(
                "path counts do not match gain vectors".into(),
            ));
        }
        for &t in doa_alice.iter().chain(doa_jam.iter()) {
            if !((-PI / 2.0)..=(PI / 2.0)).contains(&t) {
                return Err(ModelError::AngleOutOfDomain(t));
            }
        }
        Ok(Self {
            doa_alice,
            doa_jam,
            gains_alice,
            gains_jam,
            pilot_alice,
            pilot_jam,
        })
    }

    /// Draw a random realization for the scenario.
    pub fn draw<R: Rng>(sc: &ScenarioConfig, rng: &mut R) -> Self {
        let model = if sc.rayleigh_gains {
            GainModel::Rayleigh
        } else {
            GainModel::FixedMagnitude
        };
        let doa_alice = draw_angles(sc.num_paths_alice, rng);
        let doa_jam = draw_angles(sc.num_paths_jam, rng);
        let gains_alice = draw_gains(sc.num_paths_alice, model, rng);
        let gains_jam = draw_gains(sc.num_paths_jam, model, rng);
        let pilot_alice = draw_pilot(sc.pilot_len, rng);
        let pilot_jam = draw_pilot(sc.pilot_len, rng);
        Self {
            doa_alice,
            doa_jam,
            gains_alice,
            gains_jam,
            pilot_alice,
            pilot_jam,
        }
    }

    /// Draw with a minimum angular separation between all paths (signal and
    /// jamming pooled), for scenarios where the estimator must resolve them.
    pub fn draw_separated<R: Rng>(sc: &ScenarioConfig, min_sep: f64, rng: &mut R) -> Self {
        let mut ch = Self::draw(sc, rng);
        for _ in 0..200 {
            let mut all: Vec<f64> = ch
                .doa_alice
                .iter()
                .chain(ch.doa_jam.iter())
                .copied()
                .collect();
            all.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let ok = all.windows(2).all(|w| w[1] - w[0] >= min_sep);
            if ok {
                return ch;
            }
            ch.doa_alice = draw_angles(sc.num_paths_alice, rng);
            ch.doa_jam = draw_angles(sc.num_paths_jam, rng);
        }
        ch
    }
}

fn draw_angles<R: Rng>(count: usize, rng: &mut R) -> Vec<f64> {
    // strictly inside (-pi/2, pi/2)
    (0..count)
        .map(|_| (rng.random::<f64>() - 0.5) * PI * 0.998)
        .collect()
}

fn draw_gains<R: Rng>(count: usize, model: GainModel, rng: &mut R) -> DVector<Complex64> {
    DVector::from_iterator(
        count,
        (0..count).map(|_| match model {
            GainModel::FixedMagnitude => {
                Complex64::from_polar(1.0, rng.random::<f64>() * 2.0 * PI)
            }
            GainModel::Rayleigh => {
                // Box-Muller, unit average power per path
                let u1: f64 = rng.random::<f64>().max(1e-12);
                let u2: f64 = rng.random();
                let r = (-u1.ln()).sqrt();
                Complex64::from_polar(r, 2.0 * PI * u2)
            }
        }),
    )
}

fn draw_pilot<R: Rng>(len: usize, rng: &mut R) -> DVector<Complex64> {
    DVector::from_iterator(
        len,
        (0..len).map(|_| Complex64::from_polar(1.0, rng.random::<f64>() * 2.0 * PI)),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn draw_respects_counts_and_domain() {
        let sc = ScenarioConfig::nominal();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let ch = ChannelRealization::draw(&sc, &mut rng);
        assert_eq!(ch.doa_alice.len(), sc.num_paths_alice);
        assert_eq!(ch.gains_jam.len(), sc.num_paths_jam);
        assert_eq!(ch.pilot_alice.len(), sc.pilot_len);
        for &t in &ch.doa_alice {
            assert!(t.abs() < PI / 2.0);
        }
        for g in ch.gains_alice.iter() {
            assert!((g.norm() - 1.0).abs() < 1e-12, "fixed magnitude gains");
        }
    }

    #[test]
    fn separation_is_enforced() {
        let sc = ScenarioConfig::toy(2, 4);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let ch = ChannelRealization::draw_separated(&sc, 0.3, &mut rng);
        let mut all: Vec<f64> = ch
            .doa_alice
            .iter()
            .chain(ch.doa_jam.iter())
            .copied()
            .collect();
        all.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for w in all.windows(2) {
            assert!(w[1] - w[0] >= 0.3);
        }
    }

    #[test]
    fn mismatched_lengths_rejected() {
        let res = ChannelRealization::new(
            vec![0.1, 0.2],
            vec![0.3],
            DVector::from_element(1, Complex64::new(1.0, 0.0)),
            DVector::from_element(1, Complex64::new(1.0, 0.0)),
            DVector::zeros(4),
            DVector::zeros(4),
        );
        assert!(res.is_err());
    }
}
