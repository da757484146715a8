//! Path classification: assign every detected angle to the legitimate
//! transmitter or the jammer by pilot cross-correlation.

use crate::doa;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PathClass {
    Alice,
    Jam,
    /// Correlation margin below threshold; excluded from gain estimation.
    Ambiguous,
}

#[derive(Debug, Clone)]
pub struct Classification {
    pub classes: Vec<PathClass>,
    /// |corr with Alice pilot| - |corr with jam pilot| per path.
    pub margins: Vec<f64>,
    pub ambiguous_count: usize,
}

/// Classify `angles` against the two known pilot sequences.
///
/// Per-path symbol streams come from a least-squares projection of the
/// whitened observations onto the estimated atoms; each stream is assigned
/// to the pilot with the larger normalized correlation. Margins below
/// `margin_threshold` mark the path ambiguous; exact ties fall back to power
/// ordering (stronger stream goes to the jammer, which transmits above the
/// legitimate signal in this model).
pub fn classify_paths(
    angles: &[f64],
    whitened: &DMatrix<Complex64>,
    observed: &[usize],
    grid_pitch: f64,
    pilot_alice: &DVector<Complex64>,
    pilot_jam: &DVector<Complex64>,
    margin_threshold: f64,
) -> Classification {
    let l = angles.len();
    let t_p = whitened.ncols();
    if l == 0 {
        return Classification {
            classes: vec![],
            margins: vec![],
            ambiguous_count: 0,
        };
    }

    // atoms restricted to observed rows
    let mut a = DMatrix::<Complex64>::zeros(observed.len(), l);
    for (r, &p) in observed.iter().enumerate() {
        for (c, &theta) in angles.iter().enumerate() {
            a[(r, c)] = doa::atom(p + 1, grid_pitch, theta.sin())[p];
        }
    }
    let mut y = DMatrix::<Complex64>::zeros(observed.len(), t_p);
    for (r, &p) in observed.iter().enumerate() {
        for t in 0..t_p {
            y[(r, t)] = whitened[(p, t)];
        }
    }
    // per-path coefficient streams C = pinv(A) Y (L x T_p)
    let svd = a.svd(true, true);
    let streams = svd
        .solve(&y, 1e-10)
        .unwrap_or_else(|_| DMatrix::zeros(l, t_p));

    let mut classes = Vec::with_capacity(l);
    let mut margins = Vec::with_capacity(l);
    let mut ambiguous = 0usize;
    let powers: Vec<f64> = (0..l)
        .map(|li| (0..t_p).map(|t| streams[(li, t)].norm_sqr()).sum())
        .collect();
    let median_power = {
        let mut p = powers.clone();
        p.sort_by(|a, b| a.partial_cmp(b).unwrap());
        p[p.len() / 2]
    };

    for li in 0..l {
        let corr = |pilot: &DVector<Complex64>| -> f64 {
            let mut acc = Complex64::new(0.0, 0.0);
            let mut ns = 0.0;
            for t in 0..t_p {
                acc += streams[(li, t)] * pilot[t].conj();
                ns += streams[(li, t)].norm_sqr();
            }
            let denom = (ns * pilot.norm_squared()).sqrt();
            if denom > 0.0 {
                acc.norm() / denom
            } else {
                0.0
            }
        };
        let ca = corr(pilot_alice);
        let cj = corr(pilot_jam);
        let margin = ca - cj;
        margins.push(margin);
        if margin.abs() < 1e-12 {
            // tie: power ordering
            classes.push(if powers[li] > median_power {
                PathClass::Jam
            } else {
                PathClass::Alice
            });
        } else if margin.abs() < margin_threshold {
            classes.push(PathClass::Ambiguous);
            ambiguous += 1;
        } else if margin > 0.0 {
            classes.push(PathClass::Alice);
        } else {
            classes.push(PathClass::Jam);
        }
    }

    Classification {
        classes,
        margins,
        ambiguous_count: ambiguous,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn atom_col(p_grid: usize, pitch: f64, theta: f64) -> DVector<Complex64> {
        doa::atom(p_grid, pitch, theta.sin())
    }

    #[test]
    fn orthogonal_pilots_classify_perfectly() {
        let p_grid = 8;
        let pitch = 0.25;
        let t_p = 8;
        // orthogonal pilots: DFT rows
        let pilot_a = DVector::from_fn(t_p, |t, _| {
            Complex64::from_polar(1.0, 2.0 * PI * t as f64 / t_p as f64)
        });
        let pilot_j = DVector::from_fn(t_p, |t, _| {
            Complex64::from_polar(1.0, 2.0 * PI * 3.0 * t as f64 / t_p as f64)
        });
        let thetas = [-0.5f64, 0.4];
        let mut s = DMatrix::<Complex64>::zeros(p_grid, t_p);
        for t in 0..t_p {
            for p in 0..p_grid {
                s[(p, t)] += atom_col(p_grid, pitch, thetas[0])[p] * pilot_a[t];
                s[(p, t)] += atom_col(p_grid, pitch, thetas[1])[p]
                    * pilot_j[t]
                    * Complex64::new(10.0, 0.0);
            }
        }
        let observed: Vec<usize> = (0..p_grid).collect();
        let cls = classify_paths(&thetas, &s, &observed, pitch, &pilot_a, &pilot_j, 0.05);
        assert_eq!(cls.classes[0], PathClass::Alice);
        assert_eq!(cls.classes[1], PathClass::Jam);
        assert_eq!(cls.ambiguous_count, 0);
    }

    #[test]
    fn single_path_follows_higher_correlation() {
        let p_grid = 6;
        let pitch = 0.25;
        let t_p = 8;
        let pilot_a = DVector::from_fn(t_p, |t, _| {
            Complex64::from_polar(1.0, 0.7 * t as f64)
        });
        let pilot_j = DVector::from_fn(t_p, |t, _| {
            Complex64::from_polar(1.0, -1.3 * t as f64)
        });
        let theta = 0.2f64;
        let mut s = DMatrix::<Complex64>::zeros(p_grid, t_p);
        for t in 0..t_p {
            for p in 0..p_grid {
                s[(p, t)] = atom_col(p_grid, pitch, theta)[p] * pilot_j[t];
            }
        }
        let observed: Vec<usize> = (0..p_grid).collect();
        let cls = classify_paths(&[theta], &s, &observed, pitch, &pilot_a, &pilot_j, 0.05);
        assert_eq!(cls.classes[0], PathClass::Jam);
    }
}
