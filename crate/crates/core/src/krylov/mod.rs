//! Krylov solvers: restarted GMRES and a restarted Arnoldi eigensolver, both
//! over complex vectors and matrix-free operators.

mod arnoldi;
mod gmres;

pub use arnoldi::{arnoldi_eigs, arnoldi_factorization, ArnoldiFactorization, EigOptions, EigenReport, Which};
pub use gmres::{gmres, gmres_right_preconditioned, GmresOptions, SolveReport};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub(crate) fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    // <a, b> = a^* b
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub(crate) fn norm(a: &[Complex64]) -> f64 {
    crate::grid::norm(a)
}

pub(crate) fn axpy(y: &mut [Complex64], alpha: Complex64, x: &[Complex64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

pub(crate) fn scale(y: &mut [Complex64], alpha: f64) {
    for v in y.iter_mut() {
        *v *= alpha;
    }
}

/// Modified Gram-Schmidt against `basis`, run twice. Returns the
/// accumulated projection coefficients.
pub(crate) fn orthogonalize(w: &mut [Complex64], basis: &[Vec<Complex64>]) -> Vec<Complex64> {
    let mut coeffs = vec![Complex64::new(0.0, 0.0); basis.len()];
    for _ in 0..2 {
        for (c, v) in coeffs.iter_mut().zip(basis) {
            let h = dot(v, w);
            axpy(w, -h, v);
            *c += h;
        }
    }
    coeffs
}

/// Complex Givens rotation `G = [c s; -conj(s) c]` with real `c` such that
/// `G [a; b] = [r; 0]`.
pub(crate) fn givens(a: Complex64, b: Complex64) -> (f64, Complex64, Complex64) {
    let na = a.norm();
    let nb = b.norm();
    if nb == 0.0 {
        return (1.0, Complex64::new(0.0, 0.0), a);
    }
    if na == 0.0 {
        let s = b.conj() / nb;
        return (0.0, s, Complex64::new(nb, 0.0));
    }
    let rho = na.hypot(nb);
    let phase = a / na;
    let c = na / rho;
    let s = phase * b.conj() / rho;
    (c, s, phase * rho)
}

pub(crate) fn random_vector(n: usize, rng: &mut ChaCha8Rng) -> Vec<Complex64> {
    (0..n)
        .map(|_| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
        .collect()
}

pub(crate) fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
