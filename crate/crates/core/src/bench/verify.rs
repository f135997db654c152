//! Dense-oracle verification suites. A green run is the precondition for
//! trusting the benchmark tables.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::config::RunConfig;
use super::stekloff::{dense_stekloff, stekloff_spectrum};
use crate::dense::{assemble_dense, dense_solve, kron, DenseVariant, WaveNumber};
use crate::dft::{dft_forward, dft_inverse};
use crate::error::{Error, Result};
use crate::grid::{relative_error, AxisBc, Boundary, Grid};
use crate::helmholtz::{periodic_symbol, HelmholtzSolver};
use crate::krylov::EigOptions;
use crate::operators::{BlockPartition, DtnOperator, LinearOperator, NtdOperator};

#[derive(Clone, Debug, Serialize)]
pub struct SuiteResult {
    pub name: String,
    pub passed: bool,
    pub cases: usize,
    pub worst: f64,
    pub tolerance: f64,
    pub note: String,
}

impl SuiteResult {
    fn from_errors(name: &str, tolerance: f64, errors: &[f64]) -> Self {
        let worst = errors.iter().cloned().fold(0.0, f64::max);
        Self {
            name: name.into(),
            passed: !errors.is_empty() && errors.iter().all(|e| *e <= tolerance),
            cases: errors.len(),
            worst,
            tolerance,
            note: String::new(),
        }
    }

    fn failed(name: &str, tolerance: f64, err: Error) -> Self {
        Self {
            name: name.into(),
            passed: false,
            cases: 0,
            worst: f64::INFINITY,
            tolerance,
            note: err.to_string(),
        }
    }

    pub fn line(&self) -> String {
        let status = if self.passed { "PASS" } else { "FAIL" };
        let mut s = format!(
            "{status} {:<12} cases={:<5} worst={:.2e} tol={:.0e}",
            self.name, self.cases, self.worst, self.tolerance
        );
        if !self.note.is_empty() {
            s.push_str("  ");
            s.push_str(&self.note);
        }
        s
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct VerifyReport {
    pub config_hash: String,
    pub suites: Vec<SuiteResult>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.suites.iter().all(|s| s.passed)
    }
}

fn suite(name: &str, tol: f64, body: impl FnOnce() -> Result<Vec<f64>>) -> SuiteResult {
    match body() {
        Ok(errs) => SuiteResult::from_errors(name, tol, &errs),
        Err(e) => SuiteResult::failed(name, tol, e),
    }
}

pub(crate) fn random_values(n: usize, rng: &mut ChaCha8Rng) -> Vec<Complex64> {
    (0..n)
        .map(|_| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
        .collect()
}

/// Every `(lo, hi)` pair per axis for a `dim`-dimensional box.
pub fn all_bc_combinations(dim: usize) -> Vec<Vec<AxisBc>> {
    let ends = [Boundary::Dirichlet, Boundary::Neumann];
    let axis: Vec<AxisBc> = ends
        .iter()
        .flat_map(|&lo| ends.iter().map(move |&hi| AxisBc::new(lo, hi)))
        .collect();
    let mut out = vec![Vec::new()];
    for _ in 0..dim {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                axis.iter().map(move |&bc| {
                    let mut p = prefix.clone();
                    p.push(bc);
                    p
                })
            })
            .collect();
    }
    out
}

/// FFT solve against dense LU for every dimension and boundary mix, `n` in
/// `3..=6`. Draws that land close to resonance are redrawn.
pub fn exactness_errors(draws: usize, seed: u64, restriction_shift: usize) -> Result<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut errors = Vec::new();
    for dim in 1..=3 {
        for bcs in all_bc_combinations(dim) {
            for draw in 0..draws {
                let n = 3 + draw % 4;
                let grid = Grid::new(&vec![n; dim], &bcs)?;
                let h = grid.h_ref();
                let (solver, k) = loop {
                    let k = rng.random::<f64>() * 1.5 / h;
                    match HelmholtzSolver::with_restriction_shift(&grid, k, restriction_shift) {
                        Ok(s) if s.condition_estimate() < 1e4 => break (s, k),
                        Ok(_) | Err(Error::Resonance { .. }) => continue,
                        Err(e) => return Err(e),
                    }
                };
                let rhs = random_values(grid.len(), &mut rng);
                let a = assemble_dense(&grid, WaveNumber::Constant(k), DenseVariant::Mixed)?;
                let want = dense_solve(&a, &rhs)?;
                let got = solver.solve_values(&rhs)?;
                errors.push(relative_error(&got, &want));
            }
        }
    }
    Ok(errors)
}

pub fn dft_matrix(n: usize) -> DMatrix<Complex64> {
    DMatrix::from_fn(n, n, |j, l| {
        Complex64::from_polar(1.0, -2.0 * PI * ((j * l) % n) as f64 / n as f64)
    })
}

/// `max |F A^P F^{-1} - diag(d)|` for one period `big` and wave number `k`.
pub fn symbol_error(big: usize, k: f64) -> Result<f64> {
    if big < 4 || !big.is_multiple_of(2) {
        return Err(Error::InvalidArgument(format!("period {big} must be even and >= 4")));
    }
    let grid = Grid::dirichlet(&[big / 2 - 1])?;
    let h = grid.h_ref();
    let ap = assemble_dense(&grid, WaveNumber::Constant(k), DenseVariant::Periodic)?;
    let f = dft_matrix(big);
    let finv = f.adjoint() / Complex64::new(big as f64, 0.0);
    let conj = &f * ap * finv;
    let sym = periodic_symbol(&[big], k, h)?;
    let mut worst: f64 = 0.0;
    for j in 0..big {
        for l in 0..big {
            let want = if j == l { sym.values()[j] } else { 0.0 };
            worst = worst.max((conj[(j, l)] - want).norm());
        }
    }
    Ok(worst)
}

/// Odd extension `E` (`(2n+2) x n`) and prefix restriction `R` (`n x (2n+2)`).
pub fn extension_matrices(n: usize) -> (DMatrix<Complex64>, DMatrix<Complex64>) {
    let big = 2 * n + 2;
    let one = Complex64::new(1.0, 0.0);
    let mut e = DMatrix::zeros(big, n);
    for j in 0..n {
        e[(j, j)] = one;
        e[(big - 2 - j, j)] = -one;
    }
    let mut r = DMatrix::zeros(n, big);
    for j in 0..n {
        r[(j, j)] = one;
    }
    (e, r)
}

/// `max |R_d A^P E_d - A^D|` for a cube Dirichlet grid, `d` in 1..=2.
pub fn tensor_identity_error(dim: usize, n: usize, k: f64) -> Result<f64> {
    let grid = Grid::dirichlet(&vec![n; dim])?;
    let ap = assemble_dense(&grid, WaveNumber::Constant(k), DenseVariant::Periodic)?;
    let ad = assemble_dense(&grid, WaveNumber::Constant(k), DenseVariant::Dirichlet)?;
    let (e1, r1) = extension_matrices(n);
    let (mut e, mut r) = (e1.clone(), r1.clone());
    for _ in 1..dim {
        e = kron(&e, &e1);
        r = kron(&r, &r1);
    }
    let lhs = r * ap * e;
    Ok((lhs - ad).iter().fold(0.0, |m, z| m.max(z.norm())))
}

/// `||S_h T_h mu - mu|| / ||mu||` over random `mu`.
pub fn inverse_pair_errors(n: usize, eta: f64, samples: usize, seed: u64) -> Result<Vec<f64>> {
    let grid = Grid::neumann(&[n, n])?;
    let part = BlockPartition::new(&grid)?;
    let ntd = NtdOperator::new(&part, eta)?;
    let dtn = DtnOperator::new(&part, eta)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..samples)
        .map(|_| {
            let mu = random_values(ntd.ncols(), &mut rng);
            let back = dtn.apply(&ntd.apply(&mu)?)?;
            Ok(relative_error(&back, &mu))
        })
        .collect()
}

pub fn naive_dft(x: &[Complex64], sign: f64) -> Vec<Complex64> {
    let n = x.len();
    (0..n)
        .map(|j| {
            x.iter()
                .enumerate()
                .map(|(l, v)| v * Complex64::from_polar(1.0, sign * 2.0 * PI * ((j * l) % n) as f64 / n as f64))
                .sum()
        })
        .collect()
}

fn dft_errors(seed: u64) -> Result<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut errs = Vec::new();
    for n in [2, 3, 5, 7, 8, 12, 17, 31, 64, 97, 100, 127, 128, 251, 256, 509, 512] {
        let x = random_values(n, &mut rng);
        errs.push(relative_error(&dft_forward(&x)?, &naive_dft(&x, -1.0)));
    }
    for n in [1000, 4096, 8191, 8192] {
        let x = random_values(n, &mut rng);
        errs.push(relative_error(&dft_inverse(&dft_forward(&x)?)?, &x));
    }
    Ok(errs)
}

/// A wave number exactly on the lowest Dirichlet mode must be refused and
/// a 1e-3 perturbation accepted.
pub fn resonance_probe() -> Result<String> {
    let n = 7;
    let grid = Grid::dirichlet(&[n])?;
    let big = 2 * n + 2;
    let k = 2.0 * (PI / big as f64).sin() / grid.h_ref();
    match HelmholtzSolver::new(&grid, k) {
        Err(Error::Resonance { .. }) => {}
        Ok(_) => return Err(Error::InvalidArgument("resonant wave number was accepted".into())),
        Err(e) => return Err(e),
    }
    let solver = HelmholtzSolver::new(&grid, k + 1e-3)?;
    let u = solver.solve_values(&vec![Complex64::new(1.0, 0.0); n])?;
    if u.iter().all(|v| v.re.is_finite() && v.im.is_finite()) {
        Ok(format!("k={k:.6} refused, k+1e-3 solved"))
    } else {
        Err(Error::InvalidArgument(
            "perturbed solve produced non-finite values".into(),
        ))
    }
}

fn eigen_oracle_errors(n: usize, etas: &[f64], seed: u64) -> Result<Vec<f64>> {
    let opts = EigOptions {
        seed,
        ..EigOptions::default()
    };
    let mut errs = Vec::new();
    for &eta in etas {
        let got = stekloff_spectrum(n, eta, 6, &opts)?;
        let want = dense_stekloff(n, eta)?;
        if !got.complete() {
            return Err(Error::InvalidArgument(format!(
                "eta={eta}: {} of 6 pairs converged",
                got.values.len()
            )));
        }
        // Scale back to eigenvalues of S_h for an absolute comparison.
        errs.extend(got.values.iter().zip(&want).map(|(a, b)| (a - b).abs() * got.h));
    }
    Ok(errs)
}

/// Run every suite. `restriction_shift` is a test hook that corrupts the
/// restriction step of the exactness suite.
pub fn run_verify_with(cfg: &RunConfig, restriction_shift: usize) -> VerifyReport {
    let v = &cfg.verify;
    let seed = cfg.run.seed;
    let mut suites = vec![
        suite("exactness", 1e-10, || {
            exactness_errors(v.draws, seed, restriction_shift)
        }),
        suite("symbol", 1e-10, || {
            let mut e = Vec::new();
            for big in [4, 6, 10, 14] {
                for k in [0.0, 0.5, 2.0] {
                    e.push(symbol_error(big, k)?);
                }
            }
            Ok(e)
        }),
        suite("tensor", 1e-14, || {
            let mut e = Vec::new();
            for dim in 1..=2 {
                for n in 1..=6 {
                    e.push(tensor_identity_error(dim, n, 1.3)?);
                }
            }
            Ok(e)
        }),
        suite("inverse-pair", 1e-9, || {
            let mut e = Vec::new();
            for &n in &v.grids {
                for &eta in &v.etas {
                    e.extend(inverse_pair_errors(n, eta, 10, seed)?);
                }
            }
            Ok(e)
        }),
        suite("dft", 1e-12, || dft_errors(seed)),
        suite("eigen-oracle", 1e-6, || {
            eigen_oracle_errors(v.oracle_grid, &v.etas, seed)
        }),
    ];
    let probe = match resonance_probe() {
        Ok(note) => SuiteResult {
            name: "resonance".into(),
            passed: true,
            cases: 2,
            worst: 0.0,
            tolerance: 0.0,
            note,
        },
        Err(e) => SuiteResult::failed("resonance", 0.0, e),
    };
    suites.push(probe);
    VerifyReport {
        config_hash: cfg.hash(),
        suites,
    }
}

pub fn run_verify(cfg: &RunConfig) -> VerifyReport {
    run_verify_with(cfg, 0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn combinations_cover_every_mix() {
        assert_eq!(all_bc_combinations(1).len(), 4);
        assert_eq!(all_bc_combinations(3).len(), 64);
    }

    #[test]
    fn extension_matrices_match_the_kernels() {
        let (e, r) = extension_matrices(3);
        let f = [1.0, 2.0, 3.0].map(|v| Complex64::new(v, 0.0));
        let g = &e * nalgebra::DVector::from_column_slice(&f);
        let want = crate::extension::extend_odd_1d(&f).unwrap();
        assert_eq!(g.as_slice(), want.as_slice());
        assert_eq!((&r * g).as_slice(), &f);
    }

    #[test]
    fn mutation_breaks_exactness() {
        let cfg = RunConfig::default();
        let report = run_verify_with(&cfg, 1);
        let exact = report.suites.iter().find(|s| s.name == "exactness").unwrap();
        assert!(!exact.passed);
        assert!(report.suites.iter().filter(|s| s.name != "exactness").all(|s| s.passed));
    }
}
