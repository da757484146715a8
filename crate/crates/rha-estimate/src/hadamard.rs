//! Hadamard matrix construction: Sylvester doubling and Paley type I.
//!
//! Supported orders: 1, 2, and any order reachable by doubling from a
//! supported order or by the Paley I construction (n = q + 1 with q prime,
//! q = 3 mod 4). Unsupported orders are rejected with the nearest supported
//! order as a hint.

use nalgebra::DMatrix;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum HadamardError {
    #[error("no Hadamard construction available for order {n}; nearest supported order is {nearest}")]
    Unsupported { n: usize, nearest: usize },
}

/// Construct a Hadamard matrix of order `n` (entries +-1, H' H = n I).
pub fn hadamard_matrix(n: usize) -> Result<DMatrix<f64>, HadamardError> {
    build(n).ok_or_else(|| HadamardError::Unsupported {
        n,
        nearest: nearest_supported(n),
    })
}

/// Whether an order is constructible by this module.
pub fn is_supported(n: usize) -> bool {
    match n {
        0 => false,
        1 | 2 => true,
        _ => {
            (n % 2 == 0 && is_supported(n / 2))
                || (n % 4 == 0 && is_prime(n - 1) && (n - 1) % 4 == 3)
        }
    }
}

fn nearest_supported(n: usize) -> usize {
    for d in 1..=n.max(4) {
        if n > d && is_supported(n - d) {
            if is_supported(n + d) {
                // prefer the larger order: it keeps the virtual aperture
                return n + d;
            }
            return n - d;
        }
        if is_supported(n + d) {
            return n + d;
        }
    }
    1
}

fn build(n: usize) -> Option<DMatrix<f64>> {
    match n {
        0 => None,
        1 => Some(DMatrix::from_element(1, 1, 1.0)),
        2 => Some(DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, -1.0])),
        _ => {
            if n % 2 == 0 {
                if let Some(h) = build(n / 2) {
                    return Some(sylvester_double(&h));
                }
            }
            if n % 4 == 0 && is_prime(n - 1) && (n - 1) % 4 == 3 {
                return Some(paley_one(n - 1));
            }
            None
        }
    }
}

fn sylvester_double(h: &DMatrix<f64>) -> DMatrix<f64> {
    let n = h.nrows();
    DMatrix::from_fn(2 * n, 2 * n, |i, j| {
        let v = h[(i % n, j % n)];
        if i >= n && j >= n {
            -v
        } else {
            v
        }
    })
}

/// Paley I: order q + 1 for prime q = 3 mod 4, from the Jacobsthal matrix of
/// quadratic residues.
fn paley_one(q: usize) -> DMatrix<f64> {
    let chi = |a: i64| -> f64 {
        let a = a.rem_euclid(q as i64) as u64;
        if a == 0 {
            return 0.0;
        }
        if mod_pow(a, (q as u64 - 1) / 2, q as u64) == 1 {
            1.0
        } else {
            -1.0
        }
    };
    let n = q + 1;
    DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            1.0
        } else if i == 0 {
            1.0
        } else if j == 0 {
            -1.0
        } else {
            chi(i as i64 - j as i64)
        }
    })
}

fn mod_pow(mut base: u64, mut exp: u64, modulus: u64) -> u64 {
    let mut acc = 1u64;
    base %= modulus;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * base % modulus;
        }
        base = base * base % modulus;
        exp >>= 1;
    }
    acc
}

fn is_prime(n: usize) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}
