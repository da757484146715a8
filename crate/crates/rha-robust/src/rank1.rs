//! Rank-one extraction from the relaxation: eigenvector when the relaxation
//! is numerically rank one, Gaussian randomization otherwise.

use crate::stacked::StackedModel;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use std::f64::consts::PI;

/// Eigenvalue-ratio threshold below which the relaxation counts as rank one.
const RANK1_RATIO: f64 = 1e-6;

/// Extract a unit-modulus vector from the PSD relaxation `V`.
///
/// If `lambda_2 / lambda_1 <= 1e-6` the scaled principal eigenvector is
/// projected entrywise onto the unit circle. Otherwise `n_rand` Gaussian
/// samples `v ~ CN(0, V)` are drawn, projected, and scored by nominal SINR;
/// samples violating the per-antenna blocking constraints are discarded
/// unless every sample violates them.
pub fn extract_rank1<R: Rng>(
    v_mat: &DMatrix<Complex64>,
    model: &StackedModel,
    check_blocking: bool,
    n_rand: usize,
    rng: &mut R,
) -> DVector<Complex64> {
    let n = v_mat.nrows();
    let eig = v_mat.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].partial_cmp(&eig.eigenvalues[a]).unwrap());
    let l1 = eig.eigenvalues[order[0]].max(0.0);
    let l2 = if n > 1 {
        eig.eigenvalues[order[1]].max(0.0)
    } else {
        0.0
    };

    if l1 <= 0.0 {
        return DVector::from_element(n, Complex64::new(1.0, 0.0));
    }
    if l2 / l1 <= RANK1_RATIO {
        let u1 = eig.eigenvectors.column(order[0]).into_owned();
        return unit_project(&(u1 * Complex64::new(l1.sqrt(), 0.0)));
    }

    // Gaussian randomization: factor V = L L^H via eigenvalue square root
    let mut factor = DMatrix::<Complex64>::zeros(n, n);
    for (c, &i) in order.iter().enumerate() {
        let s = eig.eigenvalues[i].max(0.0).sqrt();
        for r in 0..n {
            factor[(r, c)] = eig.eigenvectors[(r, i)] * s;
        }
    }

    let mut best: Option<(bool, f64, DVector<Complex64>)> = None;
    for _ in 0..n_rand.max(1) {
        let z = DVector::from_fn(n, |_, _| {
            let amp = (-(rng.random::<f64>().max(1e-300)).ln()).sqrt();
            Complex64::from_polar(amp, rng.random::<f64>() * 2.0 * PI)
        });
        let sample = unit_project(&(&factor * z));
        let score = model.nominal_sinr(&sample);
        let feasible = !check_blocking || blocking_ok(model, &sample);
        let better = match &best {
            None => true,
            Some((bf, bs, _)) => (feasible, score) > (*bf, *bs),
        };
        if better {
            best = Some((feasible, score, sample));
        }
    }
    best.map(|(_, _, v)| v)
        .unwrap_or_else(|| DVector::from_element(n, Complex64::new(1.0, 0.0)))
}

/// Entrywise unit-modulus projection; zero entries map to 1.
pub fn unit_project(v: &DVector<Complex64>) -> DVector<Complex64> {
    DVector::from_iterator(
        v.len(),
        v.iter().map(|z| {
            let r = z.norm();
            if r > 0.0 {
                z / r
            } else {
                Complex64::new(1.0, 0.0)
            }
        }),
    )
}

pub(crate) fn blocking_ok(model: &StackedModel, v: &DVector<Complex64>) -> bool {
    let n = model.elements_per_antenna;
    for m in 0..model.num_antennas {
        let fa = {
            let map = model.map_for_antenna(&model.alice, m);
            &map * &model.alice.gains
        };
        let fj = {
            let map = model.map_for_antenna(&model.jam, m);
            &map * &model.jam.gains
        };
        let s = v.dotc(&fa).norm_sqr() * model.signal_power * model.blocking_ratio;
        let j = v.dotc(&fj).norm_sqr() * model.jam_power;
        if s < j {
            return false;
        }
    }
    let _ = n;
    true
}
