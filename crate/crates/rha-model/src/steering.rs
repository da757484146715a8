//! Steering vectors, waveguide propagation and DMA radiation patterns.

use crate::scenario::{ModelError, ScenarioConfig};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use std::f64::consts::PI;

fn check_angle(theta: f64) -> Result<(), ModelError> {
    if !((-PI / 2.0)..=(PI / 2.0)).contains(&theta) || !theta.is_finite() {
        return Err(ModelError::AngleOutOfDomain(theta));
    }
    Ok(())
}

/// Steering vector for arbitrary element positions given in wavelengths:
/// entry `n` is `exp(-j 2 pi pos_n sin(theta))`.
pub fn steering_vector(
    theta: f64,
    positions_wavelengths: &[f64],
) -> Result<DVector<Complex64>, ModelError> {
    check_angle(theta)?;
    let s = theta.sin();
    Ok(DVector::from_iterator(
        positions_wavelengths.len(),
        positions_wavelengths
            .iter()
            .map(|&p| Complex64::from_polar(1.0, -2.0 * PI * p * s)),
    ))
}

/// DMA manifold matrix `delta(thetas)`: N x L with entry
/// `exp(-j k0 r_n sin(theta_l))`, `r_n = (n-1) d_e`.
pub fn dma_manifold(sc: &ScenarioConfig, thetas: &[f64]) -> Result<DMatrix<Complex64>, ModelError> {
    let n = sc.elements_per_antenna;
    let mut out = DMatrix::<Complex64>::zeros(n, thetas.len());
    for (l, &theta) in thetas.iter().enumerate() {
        check_angle(theta)?;
        let s = theta.sin();
        for ni in 0..n {
            let phase = -2.0 * PI * (ni as f64) * sc.element_spacing * s;
            out[(ni, l)] = Complex64::from_polar(1.0, phase);
        }
    }
    Ok(out)
}

/// Array phase of antenna m toward theta: `exp(-j k0 d_m sin(theta))` with
/// `d_m = (m-1) d`.
pub fn array_phase(sc: &ScenarioConfig, m: usize, theta: f64) -> Complex64 {
    let s = theta.sin();
    Complex64::from_polar(1.0, -2.0 * PI * (m as f64) * sc.antenna_spacing * s)
}

/// Array steering matrix A: M x L with `A[m,l] = exp(-j k0 d_m sin(theta_l))`.
pub fn array_steering_matrix(
    sc: &ScenarioConfig,
    thetas: &[f64],
) -> Result<DMatrix<Complex64>, ModelError> {
    for &t in thetas {
        check_angle(t)?;
    }
    let m = sc.num_antennas;
    Ok(DMatrix::from_fn(m, thetas.len(), |mi, l| {
        array_phase(sc, mi, thetas[l])
    }))
}

/// Diagonal waveguide propagation matrix `T` with
/// `t_n = exp(-r_n (alpha_t + j beta_t))`, `r_n = (n-1) d_e`.
///
/// `d_e` here is in the same length unit as `1/alpha_t` and `1/beta_t`
/// (meters for a scenario).
pub fn waveguide_matrix(n: usize, d_e: f64, alpha_t: f64, beta_t: f64) -> DVector<Complex64> {
    DVector::from_iterator(
        n,
        (0..n).map(|ni| {
            let r = ni as f64 * d_e;
            Complex64::from_polar((-r * alpha_t).exp(), -r * beta_t)
        }),
    )
}

/// Scenario waveguide diagonal in meters.
pub fn waveguide_diag(sc: &ScenarioConfig) -> DVector<Complex64> {
    waveguide_matrix(
        sc.elements_per_antenna,
        sc.element_spacing * sc.wavelength,
        sc.waveguide_attenuation,
        sc.waveguide_phase,
    )
}

/// Radiation pattern of one DMA: per-angle complex gain
/// `omega_m^H T delta(theta)` for each manifold column.
pub fn radiation_pattern(
    omega_m: &DVector<Complex64>,
    t_diag: &DVector<Complex64>,
    manifold: &DMatrix<Complex64>,
) -> Result<DVector<Complex64>, ModelError> {
    let n = omega_m.len();
    if t_diag.len() != n || manifold.nrows() != n {
        return Err(ModelError::Dimension(format!(
            "pattern: omega {} vs T {} vs manifold rows {}",
            n,
            t_diag.len(),
            manifold.nrows()
        )));
    }
    let l = manifold.ncols();
    Ok(DVector::from_iterator(
        l,
        (0..l).map(|li| {
            (0..n)
                .map(|ni| omega_m[ni].conj() * t_diag[ni] * manifold[(ni, li)])
                .sum()
        }),
    ))
}

/// Pattern matrix Phi: M x L with `Phi[m,l] = omega_m^H T delta(theta_l)`,
/// scaled by the synthetic coupling efficiency.
pub fn pattern_matrix(
    sc: &ScenarioConfig,
    omega: &DMatrix<Complex64>,
    thetas: &[f64],
) -> Result<DMatrix<Complex64>, ModelError> {
    let t_diag = waveguide_diag(sc);
    let manifold = dma_manifold(sc, thetas)?;
    let m = omega.nrows();
    let mut out = DMatrix::<Complex64>::zeros(m, thetas.len());
    for mi in 0..m {
        let row = radiation_pattern(&omega.row(mi).transpose(), &t_diag, &manifold)?;
        for l in 0..thetas.len() {
            out[(mi, l)] = row[l] * sc.coupling_efficiency;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn broadside_steering_is_all_ones() {
        let v = steering_vector(0.0, &[0.0, 0.25, 0.5, 1.75]).unwrap();
        for e in v.iter() {
            assert!((e - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn endfire_quarter_wavelength_gives_minus_j() {
        // theta = pi/2, position lambda/4: exp(-j pi/2) = -j
        let v = steering_vector(PI / 2.0, &[0.25]).unwrap();
        assert!((v[0] - Complex64::new(0.0, -1.0)).norm() < 1e-12);
    }

    #[test]
    fn steering_matches_scalar_loop() {
        // 8 elements at quarter-wavelength pitch, theta = 0.3 rad
        let positions: Vec<f64> = (0..8).map(|n| n as f64 * 0.25).collect();
        let theta: f64 = 0.3;
        let v = steering_vector(theta, &positions).unwrap();
        for (n, &p) in positions.iter().enumerate() {
            let expect = Complex64::new(0.0, -2.0 * PI * p * theta.sin()).exp();
            assert!((v[n] - expect).norm() < 1e-12);
            assert!((v[n].norm() - 1.0).abs() < 1e-12, "unit modulus");
        }
    }

    #[test]
    fn angle_domain_enforced() {
        assert!(steering_vector(2.0, &[0.0]).is_err());
    }

    #[test]
    fn waveguide_first_element_is_unity() {
        let t = waveguide_matrix(4, 0.025, 0.1, 157.0);
        assert!((t[0] - Complex64::new(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn lossless_waveguide_is_pure_phase() {
        let t = waveguide_matrix(6, 0.025, 0.0, 157.0);
        for e in t.iter() {
            assert!((e.norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn waveguide_matches_scalar_loop_and_is_nonincreasing() {
        // alpha_t = 0.1, beta_t from n_g = 2.5 at lambda = 0.1 m, N = 8, d_e = lambda/4
        let lambda = 0.1;
        let d_e = 0.25 * lambda;
        let beta = 2.5 * 2.0 * PI / lambda;
        let t = waveguide_matrix(8, d_e, 0.1, beta);
        let mut prev = f64::INFINITY;
        for (n, e) in t.iter().enumerate() {
            let r = n as f64 * d_e;
            let expect = Complex64::new(-r * 0.1, -r * beta).exp();
            assert!((e - expect).norm() < 1e-12, "element {n}");
            assert!(e.norm() <= prev + 1e-15, "attenuation nonincreasing");
            prev = e.norm();
        }
    }

    #[test]
    fn scalar_pattern_identity() {
        let omega = DVector::from_element(1, Complex64::new(1.0, 0.0));
        let t = DVector::from_element(1, Complex64::new(1.0, 0.0));
        let manifold = DMatrix::from_element(1, 5, Complex64::new(1.0, 0.0));
        let g = radiation_pattern(&omega, &t, &manifold).unwrap();
        for e in g.iter() {
            assert!((e - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn aligned_pattern_achieves_max_gain() {
        // omega matched to conj(T delta(theta0)) maximizes |gain| = sum |t_n|
        let sc = ScenarioConfig::nominal();
        let t = waveguide_diag(&sc);
        let theta0 = 0.4;
        let manifold = dma_manifold(&sc, &[theta0]).unwrap();
        let omega = DVector::from_iterator(
            sc.elements_per_antenna,
            (0..sc.elements_per_antenna).map(|n| {
                let td = t[n] * manifold[(n, 0)];
                td / td.norm()
            }),
        );
        let g = radiation_pattern(&omega, &t, &manifold).unwrap();
        let max_gain: f64 = t.iter().map(|e| e.norm()).sum();
        assert!((g[0].norm() - max_gain).abs() < 1e-10);
    }

    #[test]
    fn random_pattern_matches_inner_product_loop() {
        use rand::prelude::*;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
        let sc = ScenarioConfig::nominal();
        let t = waveguide_diag(&sc);
        let thetas: Vec<f64> = (0..8).map(|_| (rng.random::<f64>() - 0.5) * PI * 0.9).collect();
        let manifold = dma_manifold(&sc, &thetas).unwrap();
        let omega = DVector::from_iterator(
            sc.elements_per_antenna,
            (0..sc.elements_per_antenna)
                .map(|_| Complex64::from_polar(1.0, rng.random::<f64>() * 2.0 * PI)),
        );
        let g = radiation_pattern(&omega, &t, &manifold).unwrap();
        for (l, _) in thetas.iter().enumerate() {
            let mut acc = Complex64::new(0.0, 0.0);
            for n in 0..sc.elements_per_antenna {
                acc += omega[n].conj() * t[n] * manifold[(n, l)];
            }
            assert!((g[l] - acc).norm() < 1e-12);
        }
    }
}
