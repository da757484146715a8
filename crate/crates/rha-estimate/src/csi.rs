//! Least-squares CSI recovery at fixed angles.

use crate::doa;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

#[derive(Debug, Clone)]
pub struct CsiEstimate {
    pub gains_alice: DVector<Complex64>,
    pub gains_jam: DVector<Complex64>,
    /// Relative residual of the least-squares fit.
    pub residual: f64,
    /// A rank-deficient design matrix forced a truncated (regularized) solve.
    pub regularized: bool,
}

/// Estimate the complex path gains by least squares over the whitened
/// observations, with the angles fixed.
///
/// The model per observed grid row `p` and pilot instant `t` is
/// `y[p,t] = sum_l sqrt(P_z(l)) a_p(theta_l) x_z(l)[t] g_l + noise`,
/// so stacking `(p, t)` gives an ordinary complex least-squares problem in
/// the gains. Duplicate or nearly coherent angle columns trigger a truncated
/// SVD solve and set the `regularized` flag.
#[allow(clippy::too_many_arguments)]
pub fn estimate_csi(
    angles_alice: &[f64],
    angles_jam: &[f64],
    whitened: &DMatrix<Complex64>,
    observed: &[usize],
    grid_pitch: f64,
    pilot_alice: &DVector<Complex64>,
    pilot_jam: &DVector<Complex64>,
    signal_power: f64,
    jam_power: f64,
) -> CsiEstimate {
    let l_a = angles_alice.len();
    let l_j = angles_jam.len();
    let l = l_a + l_j;
    let t_p = whitened.ncols();
    let rows = observed.len() * t_p;
    if l == 0 || rows == 0 {
        return CsiEstimate {
            gains_alice: DVector::zeros(0),
            gains_jam: DVector::zeros(0),
            residual: 0.0,
            regularized: false,
        };
    }

    let mut design = DMatrix::<Complex64>::zeros(rows, l);
    let mut rhs = DVector::<Complex64>::zeros(rows);
    let amp_a = signal_power.sqrt();
    let amp_j = jam_power.sqrt();
    for (ri, &p) in observed.iter().enumerate() {
        for t in 0..t_p {
            let row = ri * t_p + t;
            rhs[row] = whitened[(p, t)];
            for (c, &theta) in angles_alice.iter().enumerate() {
                let a = doa::atom(p + 1, grid_pitch, theta.sin())[p];
                design[(row, c)] = a * pilot_alice[t] * amp_a;
            }
            for (c, &theta) in angles_jam.iter().enumerate() {
                let a = doa::atom(p + 1, grid_pitch, theta.sin())[p];
                design[(row, l_a + c)] = a * pilot_jam[t] * amp_j;
            }
        }
    }

    let svd = design.clone().svd(true, true);
    let smax = svd.singular_values.iter().copied().fold(0.0f64, f64::max);
    let rank_tol = 1e-8 * smax.max(1e-300);
    let regularized = svd.singular_values.iter().any(|&s| s < rank_tol);
    let g = svd
        .solve(&rhs, rank_tol)
        .unwrap_or_else(|_| DVector::zeros(l));

    let fit = &design * &g;
    let residual = (&rhs - fit).norm() / rhs.norm().max(1e-300);

    CsiEstimate {
        gains_alice: DVector::from_iterator(l_a, (0..l_a).map(|i| g[i])),
        gains_jam: DVector::from_iterator(l_j, (0..l_j).map(|i| g[l_a + i])),
        residual,
        regularized,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn noise_free_exact_recovery() {
        let p_grid = 8;
        let pitch = 0.25;
        let t_p = 8;
        let pilot_a = DVector::from_fn(t_p, |t, _| Complex64::from_polar(1.0, 0.9 * t as f64));
        let pilot_j = DVector::from_fn(t_p, |t, _| Complex64::from_polar(1.0, -0.4 * t as f64));
        let th_a = [0.3f64];
        let th_j = [-0.6f64];
        let g_a = Complex64::new(0.8, -0.3);
        let g_j = Complex64::new(-1.1, 0.2);
        let (pa, pj) = (4.0f64, 25.0f64);
        let mut s = DMatrix::<Complex64>::zeros(p_grid, t_p);
        for t in 0..t_p {
            for p in 0..p_grid {
                let aa = doa::atom(p_grid, pitch, th_a[0].sin())[p];
                let aj = doa::atom(p_grid, pitch, th_j[0].sin())[p];
                s[(p, t)] = pa.sqrt() * aa * pilot_a[t] * g_a + pj.sqrt() * aj * pilot_j[t] * g_j;
            }
        }
        let observed: Vec<usize> = (0..p_grid).collect();
        let est = estimate_csi(
            &th_a, &th_j, &s, &observed, pitch, &pilot_a, &pilot_j, pa, pj,
        );
        assert!(est.residual < 1e-9, "residual {}", est.residual);
        assert!((est.gains_alice[0] - g_a).norm() < 1e-9);
        assert!((est.gains_jam[0] - g_j).norm() < 1e-9);
        assert!(!est.regularized);
    }

    #[test]
    fn duplicate_angles_take_regularized_path() {
        let p_grid = 6;
        let pitch = 0.25;
        let t_p = 4;
        let pilot = DVector::from_fn(t_p, |t, _| Complex64::from_polar(1.0, t as f64));
        let theta = 0.1f64;
        let mut s = DMatrix::<Complex64>::zeros(p_grid, t_p);
        for t in 0..t_p {
            for p in 0..p_grid {
                s[(p, t)] = doa::atom(p_grid, pitch, theta.sin())[p] * pilot[t];
            }
        }
        let observed: Vec<usize> = (0..p_grid).collect();
        // the same angle twice against the same pilot: exactly collinear columns
        let est = estimate_csi(
            &[theta, theta],
            &[],
            &s,
            &observed,
            pitch,
            &pilot,
            &pilot,
            1.0,
            1.0,
        );
        assert!(est.regularized, "duplicate columns must flag regularization");
        let _ = PI;
    }
}
