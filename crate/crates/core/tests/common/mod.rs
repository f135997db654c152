//! Independent oracles shared by the integration tests. Nothing here calls
//! the FFT paths it is used to check.
#![allow(dead_code)]

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type C = Complex64;

pub fn c(v: f64) -> C {
    C::new(v, 0.0)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_vec(n: usize, rng: &mut ChaCha8Rng) -> Vec<C> {
    (0..n)
        .map(|_| C::new(rng.random::<f64>() * 2.0 - 1.0, rng.random::<f64>() * 2.0 - 1.0))
        .collect()
}

pub fn rel_err(a: &[C], b: &[C]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt();
    let den: f64 = b.iter().map(|y| y.norm_sqr()).sum::<f64>().sqrt();
    if den == 0.0 {
        num
    } else {
        num / den
    }
}

/// `y_j = sum_m exp(sign 2 pi i j m / N) x_m`, accumulated in order.
pub fn naive_dft(x: &[C], sign: f64) -> Vec<C> {
    let n = x.len();
    (0..n)
        .map(|j| {
            let mut acc = C::new(0.0, 0.0);
            for (m, v) in x.iter().enumerate() {
                let phase = sign * 2.0 * PI * ((j * m) % n) as f64 / n as f64;
                acc += v * C::new(phase.cos(), phase.sin());
            }
            acc
        })
        .collect()
}

pub fn naive_inverse_dft(y: &[C]) -> Vec<C> {
    let n = y.len() as f64;
    naive_dft(y, 1.0).into_iter().map(|v| v / n).collect()
}

pub fn dft_matrix(n: usize) -> DMatrix<C> {
    DMatrix::from_fn(n, n, |j, m| {
        let phase = -2.0 * PI * ((j * m) % n) as f64 / n as f64;
        C::new(phase.cos(), phase.sin())
    })
}

pub fn kron(a: &DMatrix<C>, b: &DMatrix<C>) -> DMatrix<C> {
    let (ar, ac) = a.shape();
    let (br, bc) = b.shape();
    DMatrix::from_fn(ar * br, ac * bc, |i, j| a[(i / br, j / bc)] * b[(i % br, j % bc)])
}

pub fn identity(n: usize) -> DMatrix<C> {
    DMatrix::identity(n, n)
}

/// `tridiag(-1, 2, -1)` of size `n`.
pub fn tridiag(n: usize) -> DMatrix<C> {
    DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            c(2.0)
        } else if i.abs_diff(j) == 1 {
            c(-1.0)
        } else {
            c(0.0)
        }
    })
}

/// Circulant second difference of period `n`.
pub fn circulant(n: usize) -> DMatrix<C> {
    DMatrix::from_fn(n, n, |i, j| {
        let d = (i + n - j) % n;
        if d == 0 {
            c(2.0)
        } else if d == 1 || d == n - 1 {
            c(-1.0)
        } else {
            c(0.0)
        }
    })
}

/// Symmetric 1D second difference on `len` nodes, with a `1` on the
/// diagonal at Neumann ends, and the matching diagonal node weights.
pub fn second_difference(len: usize, lo_neumann: bool, hi_neumann: bool) -> (DMatrix<C>, DMatrix<C>) {
    let mut t = tridiag(len);
    let mut w = identity(len);
    if lo_neumann {
        t[(0, 0)] = c(1.0);
        w[(0, 0)] = c(0.5);
    }
    if hi_neumann {
        t[(len - 1, len - 1)] = c(1.0);
        w[(len - 1, len - 1)] = c(0.5);
    }
    (t, w)
}

/// `sum_j (W..T_j..W) - k^2 h^2 W` on a cube with spacing `h` on every axis;
/// `ends[a] = (lo_neumann, hi_neumann)` and axis length follows from it.
pub fn kron_system(n: usize, ends: &[(bool, bool)], kh2: f64) -> DMatrix<C> {
    let parts: Vec<(DMatrix<C>, DMatrix<C>)> = ends
        .iter()
        .map(|&(lo, hi)| second_difference(n + lo as usize + hi as usize, lo, hi))
        .collect();
    let size: usize = parts.iter().map(|p| p.0.nrows()).product();
    let mut total = DMatrix::<C>::zeros(size, size);
    for j in 0..ends.len() {
        let mut term = DMatrix::<C>::identity(1, 1);
        for (a, (t, w)) in parts.iter().enumerate() {
            term = kron(&term, if a == j { t } else { w });
        }
        total += term;
    }
    let mut wall = DMatrix::<C>::identity(1, 1);
    for (_, w) in &parts {
        wall = kron(&wall, w);
    }
    total - wall * c(kh2)
}

pub fn lu_solve(a: &DMatrix<C>, b: &[C]) -> Vec<C> {
    let rhs = nalgebra::DVector::from_column_slice(b);
    a.clone()
        .lu()
        .solve(&rhs)
        .expect("nonsingular oracle matrix")
        .as_slice()
        .to_vec()
}

pub fn matvec(a: &DMatrix<C>, x: &[C]) -> Vec<C> {
    (a * nalgebra::DVector::from_column_slice(x)).as_slice().to_vec()
}

pub fn max_abs(m: &DMatrix<C>) -> f64 {
    m.iter().map(|v| v.norm()).fold(0.0, f64::max)
}
