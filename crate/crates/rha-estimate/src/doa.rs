//! Angle extraction from the recovered Toeplitz matrix.
//!
//! Model order comes from the eigenvalue gap of `T(u)` (threshold
//! `1e-3 * lambda_max`); angles are the minima of the noise-subspace
//! spectrum `f(u) = ||E_n^H a(u)||^2` over the spatial frequency
//! `u = sin(theta)`, located by a coarse scan and polished grid-free by
//! golden-section refinement of each bracket.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use std::f64::consts::PI;

#[derive(Debug, Clone)]
pub struct DoaEstimate {
    /// Estimated angles in radians, sorted ascending.
    pub angles: Vec<f64>,
    /// Detected model order (before any truncation).
    pub order: usize,
    /// Model order exceeded `max_paths` and the strongest were kept.
    pub truncated: bool,
    /// No usable spectral peaks (e.g. white `T(u)`); result is empty.
    pub empty_flagged: bool,
}

/// Extract up to `max_paths` angles from a Hermitian Toeplitz matrix over a
/// uniform grid of pitch `grid_pitch` wavelengths.
pub fn extract_doa(t_mat: &DMatrix<Complex64>, max_paths: usize, grid_pitch: f64) -> DoaEstimate {
    let p = t_mat.nrows();
    let eig = t_mat.clone().symmetric_eigen();
    let mut idx: Vec<usize> = (0..p).collect();
    idx.sort_by(|&a, &b| {
        eig.eigenvalues[b]
            .partial_cmp(&eig.eigenvalues[a])
            .unwrap()
    });
    let lam_max = eig.eigenvalues[idx[0]].max(0.0);
    if lam_max <= 0.0 {
        return DoaEstimate {
            angles: vec![],
            order: 0,
            truncated: false,
            empty_flagged: true,
        };
    }
    let order_raw = idx
        .iter()
        .filter(|&&i| eig.eigenvalues[i] > 1e-3 * lam_max)
        .count();
    let truncated = order_raw > max_paths;
    let order = order_raw.min(max_paths).min(p.saturating_sub(1));
    if order == 0 {
        return DoaEstimate {
            angles: vec![],
            order: order_raw,
            truncated,
            empty_flagged: true,
        };
    }

    // noise projector Pi = E_n E_n^H from the p - order smallest eigenvectors
    let mut pi = DMatrix::<Complex64>::zeros(p, p);
    for &i in idx.iter().skip(order) {
        let e = eig.eigenvectors.column(i);
        for r in 0..p {
            for c in 0..p {
                pi[(r, c)] += e[r] * e[c].conj();
            }
        }
    }

    let f = |u: f64| -> f64 {
        let a = atom(p, grid_pitch, u);
        let pa = &pi * &a;
        a.dotc(&pa).re.max(0.0)
    };

    // coarse scan over u = sin(theta)
    let steps = (16 * p).max(256);
    let du = 2.0 / steps as f64;
    let values: Vec<f64> = (0..=steps).map(|k| f(-1.0 + k as f64 * du)).collect();
    let mean_val = values.iter().sum::<f64>() / values.len() as f64;

    let mut minima: Vec<(f64, f64)> = Vec::new(); // (f value, refined u)
    for k in 1..steps {
        if values[k] <= values[k - 1] && values[k] <= values[k + 1] && values[k] < 0.9 * mean_val
        {
            let lo = -1.0 + (k - 1) as f64 * du;
            let hi = -1.0 + (k + 1) as f64 * du;
            let (u_star, f_star) = golden_min(&f, lo, hi);
            minima.push((f_star, u_star));
        }
    }
    if minima.is_empty() {
        return DoaEstimate {
            angles: vec![],
            order: order_raw,
            truncated,
            empty_flagged: true,
        };
    }
    minima.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    minima.truncate(order);

    let mut angles: Vec<f64> = minima
        .iter()
        .map(|&(_, u)| u.clamp(-1.0, 1.0).asin())
        .collect();
    angles.sort_by(|a, b| a.partial_cmp(b).unwrap());
    DoaEstimate {
        angles,
        order: order_raw,
        truncated,
        empty_flagged: false,
    }
}

pub(crate) fn atom(p: usize, pitch: f64, u: f64) -> DVector<Complex64> {
    DVector::from_iterator(
        p,
        (0..p).map(|k| Complex64::from_polar(1.0, -2.0 * PI * pitch * k as f64 * u)),
    )
}

fn golden_min(f: &dyn Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> (f64, f64) {
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = hi - phi * (hi - lo);
    let mut d = lo + phi * (hi - lo);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..90 {
        if fc < fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - phi * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + phi * (hi - lo);
            fd = f(d);
        }
        if hi - lo < 1e-13 {
            break;
        }
    }
    let u = 0.5 * (lo + hi);
    (u, f(u))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vandermonde_toeplitz(p: usize, pitch: f64, thetas: &[f64], powers: &[f64]) -> DMatrix<Complex64> {
        let mut t = DMatrix::<Complex64>::zeros(p, p);
        for (&theta, &pw) in thetas.iter().zip(powers) {
            let a = atom(p, pitch, theta.sin());
            for r in 0..p {
                for c in 0..p {
                    t[(r, c)] += a[r] * a[c].conj() * pw;
                }
            }
        }
        t
    }

    #[test]
    fn rank_one_exact_recovery() {
        let theta0 = 0.52f64;
        let t = vandermonde_toeplitz(8, 0.25, &[theta0], &[2.0]);
        let est = extract_doa(&t, 3, 0.25);
        assert_eq!(est.angles.len(), 1);
        assert!(
            (est.angles[0] - theta0).abs() < 1e-3,
            "recovered {} vs {theta0}",
            est.angles[0]
        );
    }

    #[test]
    fn white_matrix_returns_empty_flagged() {
        let t = DMatrix::<Complex64>::identity(6, 6);
        let est = extract_doa(&t, 3, 0.25);
        assert!(est.angles.is_empty());
        assert!(est.empty_flagged || est.truncated);
    }

    #[test]
    fn three_paths_recovered_grid_free() {
        let thetas = [-0.8f64, 0.1, 0.6];
        let t = vandermonde_toeplitz(12, 0.25, &thetas, &[1.0, 2.0, 1.5]);
        let est = extract_doa(&t, 5, 0.25);
        assert_eq!(est.angles.len(), 3, "angles: {:?}", est.angles);
        for (got, want) in est.angles.iter().zip(thetas.iter()) {
            assert!(
                (got - want).abs() < 1e-3,
                "recovered {got} vs {want} (all {:?})",
                est.angles
            );
        }
    }

    #[test]
    fn order_truncation_flagged() {
        let thetas = [-0.9f64, -0.3, 0.2, 0.7];
        let t = vandermonde_toeplitz(12, 0.25, &thetas, &[1.0; 4]);
        let est = extract_doa(&t, 2, 0.25);
        assert!(est.truncated);
        assert_eq!(est.angles.len(), 2);
    }
}
