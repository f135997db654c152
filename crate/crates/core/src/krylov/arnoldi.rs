use web_time::Instant;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;

use super::{axpy, dot, givens, norm, orthogonalize, random_vector, scale, seeded_rng};
use crate::error::{Error, Result};
use crate::operators::LinearOperator;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Which end of the spectrum to compute.
#[derive(Clone, Copy)]
pub enum Which<'a> {
    LargestMagnitude,
    /// Smallest magnitude of the target operator, computed as the largest
    /// magnitude of `inverse` and reported as reciprocals.
    SmallestMagnitude {
        inverse: &'a dyn LinearOperator,
    },
}

#[derive(Clone, Debug)]
pub struct EigOptions {
    /// Ritz convergence tolerance relative to `|theta|`.
    pub tol: f64,
    pub max_subspace: usize,
    pub max_restarts: usize,
    /// Acceptance threshold on `||A x - lambda x|| / max(1, |lambda|)` for the
    /// final pairs, measured on the target operator.
    pub residual_tol: f64,
    pub seed: u64,
    /// Upper bound on deflation passes.
    pub max_passes: usize,
}

impl Default for EigOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_subspace: 60,
            max_restarts: 500,
            residual_tol: 1e-8,
            seed: 7,
            max_passes: 8,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct EigenReport {
    /// Ascending magnitude for the smallest-magnitude mode, descending for
    /// the largest.
    pub eigenvalues: Vec<Complex64>,
    pub residual_norms: Vec<f64>,
    /// Operator applications, all passes included.
    pub iterations: usize,
    pub restarts: usize,
    pub requested: usize,
    pub converged: usize,
    pub wall_time: f64,
    #[serde(skip)]
    pub eigenvectors: Vec<Vec<Complex64>>,
}

/// `A V_m = V_m H_m + f e_m^T`, with `f = h_{m+1,m} v_{m+1}`.
#[derive(Clone, Debug)]
pub struct ArnoldiFactorization {
    pub basis: Vec<Vec<Complex64>>,
    /// `(m+1) x m` Hessenberg matrix.
    pub hessenberg: DMatrix<Complex64>,
}

impl ArnoldiFactorization {
    pub fn steps(&self) -> usize {
        self.hessenberg.ncols()
    }

    /// `||A V_m - V_{m+1} H|| / ||H||`, Frobenius norms.
    pub fn relation_residual(&self, op: &dyn LinearOperator) -> Result<f64> {
        let m = self.steps();
        let mut total = 0.0;
        for j in 0..m {
            let mut r = op.apply(&self.basis[j])?;
            for i in 0..=m.min(self.basis.len() - 1) {
                axpy(&mut r, -self.hessenberg[(i, j)], &self.basis[i]);
            }
            total += norm(&r).powi(2);
        }
        Ok(total.sqrt() / self.hessenberg.norm().max(f64::MIN_POSITIVE))
    }

    /// Largest deviation of `V^* V` from the identity.
    pub fn orthogonality_loss(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (i, a) in self.basis.iter().enumerate() {
            for (j, b) in self.basis.iter().enumerate() {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((dot(a, b) - target).norm());
            }
        }
        worst
    }
}

/// Plain `m`-step Arnoldi from `start`.
pub fn arnoldi_factorization(op: &dyn LinearOperator, start: &[Complex64], m: usize) -> Result<ArnoldiFactorization> {
    if !op.is_square() {
        return Err(Error::InvalidArgument("Arnoldi needs a square operator".into()));
    }
    if start.len() != op.ncols() {
        return Err(Error::ShapeMismatch {
            expected: op.ncols(),
            got: start.len(),
        });
    }
    if m == 0 || m > op.ncols() {
        return Err(Error::InvalidArgument(format!("steps must be in 1..={}", op.ncols())));
    }
    let nrm = norm(start);
    if nrm == 0.0 {
        return Err(Error::InvalidArgument("zero start vector".into()));
    }
    let mut v0 = start.to_vec();
    scale(&mut v0, 1.0 / nrm);
    let mut state = Krylov::new(v0, m);
    let mut rng = seeded_rng(0x5eed);
    state.extend(&|x| op.apply(x), &[], 0, &mut rng)?;
    let steps = state.basis.len().min(m + 1);
    Ok(ArnoldiFactorization {
        basis: state.basis[..steps].to_vec(),
        hessenberg: state.h.clone(),
    })
}

struct Krylov {
    basis: Vec<Vec<Complex64>>,
    h: DMatrix<Complex64>,
    m: usize,
    applications: usize,
}

impl Krylov {
    fn new(v0: Vec<Complex64>, m: usize) -> Self {
        Self {
            basis: vec![v0],
            h: DMatrix::zeros(m + 1, m),
            m,
            applications: 0,
        }
    }

    /// Arnoldi steps `from..m`. On breakdown the next basis vector is a
    /// random direction orthogonal to everything so far, with a zero
    /// subdiagonal entry.
    fn extend(
        &mut self,
        apply: &dyn Fn(&[Complex64]) -> Result<Vec<Complex64>>,
        locked: &[Vec<Complex64>],
        from: usize,
        rng: &mut rand_chacha::ChaCha8Rng,
    ) -> Result<()> {
        let n = self.basis[0].len();
        self.basis.truncate(from + 1);
        for j in from..self.m {
            let mut w = apply(&self.basis[j])?;
            self.applications += 1;
            let scale_ref = norm(&w);
            orthogonalize(&mut w, locked);
            let coeffs = orthogonalize(&mut w, &self.basis);
            for (i, c) in coeffs.iter().enumerate() {
                self.h[(i, j)] = *c;
            }
            let beta = norm(&w);
            if j + 1 + locked.len() >= n {
                self.h[(j + 1, j)] = Complex64::new(beta, 0.0);
                break;
            }
            if beta <= 1e-12 * scale_ref.max(f64::MIN_POSITIVE) || beta == 0.0 {
                self.h[(j + 1, j)] = ZERO;
                let next = fresh_direction(n, rng, locked, &self.basis)?;
                self.basis.push(next);
            } else {
                self.h[(j + 1, j)] = Complex64::new(beta, 0.0);
                scale(&mut w, 1.0 / beta);
                self.basis.push(w);
            }
        }
        Ok(())
    }
}

fn fresh_direction(
    n: usize,
    rng: &mut rand_chacha::ChaCha8Rng,
    locked: &[Vec<Complex64>],
    basis: &[Vec<Complex64>],
) -> Result<Vec<Complex64>> {
    for _ in 0..8 {
        let mut v = random_vector(n, rng);
        orthogonalize(&mut v, locked);
        orthogonalize(&mut v, basis);
        let nv = norm(&v);
        if nv > 1e-8 {
            scale(&mut v, 1.0 / nv);
            return Ok(v);
        }
    }
    Err(Error::InvalidArgument(
        "Krylov space exhausted the operator dimension".into(),
    ))
}

/// Eigenpairs of a small dense matrix, unit eigenvectors.
fn small_eig(a: &DMatrix<Complex64>) -> Result<Vec<(Complex64, DVector<Complex64>)>> {
    let m = a.nrows();
    let schur = nalgebra::linalg::Schur::try_new(a.clone(), f64::EPSILON, 100_000)
        .ok_or_else(|| Error::InvalidArgument("Schur decomposition did not converge".into()))?;
    let (q, t) = schur.unpack();
    let tnorm = t.norm().max(f64::MIN_POSITIVE);
    let mut out = Vec::with_capacity(m);
    for i in 0..m {
        let lambda = t[(i, i)];
        let mut z = DVector::<Complex64>::zeros(m);
        z[i] = Complex64::new(1.0, 0.0);
        for j in (0..i).rev() {
            let mut acc = ZERO;
            for l in j + 1..=i {
                acc += t[(j, l)] * z[l];
            }
            let mut denom = t[(j, j)] - lambda;
            if denom.norm() < f64::EPSILON * tnorm {
                denom = Complex64::new(f64::EPSILON * tnorm, 0.0);
            }
            z[j] = -acc / denom;
        }
        let mut y = &q * z;
        let ny = y.norm();
        y /= Complex64::new(ny, 0.0);
        out.push((lambda, y));
    }
    Ok(out)
}

/// One shifted QR sweep on the leading `m x m` Hessenberg block, in place.
/// Rotations are accumulated into `qacc` from the right.
fn shifted_qr_step(h: &mut DMatrix<Complex64>, qacc: &mut DMatrix<Complex64>, mu: Complex64, m: usize) {
    for i in 0..m {
        h[(i, i)] -= mu;
    }
    let mut rots = Vec::with_capacity(m.saturating_sub(1));
    for j in 0..m.saturating_sub(1) {
        let (c, s, _) = givens(h[(j, j)], h[(j + 1, j)]);
        for col in j..m {
            let a = h[(j, col)];
            let b = h[(j + 1, col)];
            h[(j, col)] = c * a + s * b;
            h[(j + 1, col)] = -s.conj() * a + c * b;
        }
        h[(j + 1, j)] = ZERO;
        rots.push((c, s));
    }
    for (j, &(c, s)) in rots.iter().enumerate() {
        let last = (j + 2).min(m);
        for row in 0..last {
            let a = h[(row, j)];
            let b = h[(row, j + 1)];
            h[(row, j)] = a * c + b * s.conj();
            h[(row, j + 1)] = -a * s + b * c;
        }
        for row in 0..qacc.nrows() {
            let a = qacc[(row, j)];
            let b = qacc[(row, j + 1)];
            qacc[(row, j)] = a * c + b * s.conj();
            qacc[(row, j + 1)] = -a * s + b * c;
        }
    }
    for i in 0..m {
        h[(i, i)] += mu;
    }
}

struct IramOutcome {
    pairs: Vec<(Complex64, Vec<Complex64>)>,
    applications: usize,
    restarts: usize,
}

/// Implicitly restarted Arnoldi for the `want` largest-magnitude Ritz pairs
/// of `apply`, exact shifts.
fn iram(
    apply: &dyn Fn(&[Complex64]) -> Result<Vec<Complex64>>,
    n: usize,
    want: usize,
    locked: &[Vec<Complex64>],
    opts: &EigOptions,
    rng: &mut rand_chacha::ChaCha8Rng,
) -> Result<IramOutcome> {
    let room = n - locked.len();
    let m = opts.max_subspace.min(room).max(want + 1).min(room);
    let want = want.min(m);
    let keep = (want + (m - want) / 2).min(m.saturating_sub(1)).max(want.min(m - 1));

    let start = fresh_direction(n, rng, locked, &[])?;
    let mut k = Krylov::new(start, m);
    let mut from = 0;
    let mut restarts = 0;
    loop {
        k.extend(apply, locked, from, rng)?;
        let hm = k.h.view((0, 0), (m, m)).into_owned();
        let mut ritz = small_eig(&hm)?;
        ritz.sort_by(|a, b| b.0.norm().partial_cmp(&a.0.norm()).unwrap_or(std::cmp::Ordering::Equal));
        let beta = if m < n - locked.len() {
            k.h[(m, m - 1)].norm()
        } else {
            0.0
        };
        let hnorm = hm.norm();
        let converged = |(theta, y): &(Complex64, DVector<Complex64>)| {
            beta * y[m - 1].norm() <= opts.tol * theta.norm().max(f64::EPSILON.powf(2.0 / 3.0) * hnorm)
        };
        let done = ritz.iter().take(want).all(converged);
        if done || restarts >= opts.max_restarts || keep == 0 || m == room {
            let pairs = ritz
                .iter()
                .take(want)
                .filter(|p| converged(p) || m == room)
                .map(|(theta, y)| {
                    let mut x = vec![ZERO; n];
                    for (j, v) in k.basis.iter().take(m).enumerate() {
                        axpy(&mut x, y[j], v);
                    }
                    let nx = norm(&x);
                    scale(&mut x, 1.0 / nx);
                    (*theta, x)
                })
                .collect();
            return Ok(IramOutcome {
                pairs,
                applications: k.applications,
                restarts,
            });
        }

        let mut hw = hm.clone();
        let mut q = DMatrix::<Complex64>::identity(m, m);
        for (mu, _) in ritz.iter().skip(keep) {
            shifted_qr_step(&mut hw, &mut q, *mu, m);
        }
        let beta_k = hw[(keep, keep - 1)];
        let sigma = q[(m - 1, keep - 1)];
        let fm = k.h[(m, m - 1)];
        let mut new_basis = Vec::with_capacity(m + 1);
        for i in 0..=keep {
            let mut v = vec![ZERO; n];
            for j in 0..m {
                axpy(&mut v, q[(j, i)], &k.basis[j]);
            }
            new_basis.push(v);
        }
        let mut f = new_basis.pop().unwrap_or_else(|| vec![ZERO; n]);
        for v in f.iter_mut() {
            *v *= beta_k;
        }
        if let Some(vm) = k.basis.get(m) {
            axpy(&mut f, fm * sigma, vm);
        }
        orthogonalize(&mut f, locked);
        orthogonalize(&mut f, &new_basis);
        let fnorm = norm(&f);
        k.h.fill(ZERO);
        for i in 0..keep {
            for j in 0..keep {
                if i <= j + 1 {
                    k.h[(i, j)] = hw[(i, j)];
                }
            }
        }
        k.basis = new_basis;
        if fnorm <= 1e-12 * hnorm.max(f64::MIN_POSITIVE) {
            k.h[(keep, keep - 1)] = ZERO;
            let next = fresh_direction(n, rng, locked, &k.basis)?;
            k.basis.push(next);
        } else {
            k.h[(keep, keep - 1)] = Complex64::new(fnorm, 0.0);
            scale(&mut f, 1.0 / fnorm);
            k.basis.push(f);
        }
        from = keep;
        restarts += 1;
    }
}

/// `how_many` eigenpairs at one end of the spectrum.
///
/// Repeated eigenvalues are found by deflation: after each pass the
/// accepted vectors are locked and the search repeats on the projected
/// operator until no pass improves on the current selection. A final
/// Rayleigh-Ritz step on the locked space produces the reported pairs.
pub fn arnoldi_eigs(
    op: &dyn LinearOperator,
    how_many: usize,
    which: Which<'_>,
    opts: &EigOptions,
) -> Result<EigenReport> {
    let start = Instant::now();
    if !op.is_square() {
        return Err(Error::InvalidArgument("eigenproblem needs a square operator".into()));
    }
    let n = op.ncols();
    if how_many == 0 || how_many >= n {
        return Err(Error::InvalidArgument(format!(
            "requested {how_many} eigenvalues of a {n}x{n} operator"
        )));
    }
    if opts.max_subspace <= how_many {
        return Err(Error::InvalidArgument(
            "max_subspace must exceed the number of requested eigenvalues".into(),
        ));
    }
    let driver: &dyn LinearOperator = match which {
        Which::LargestMagnitude => op,
        Which::SmallestMagnitude { inverse } => {
            if inverse.nrows() != n || inverse.ncols() != n {
                return Err(Error::ShapeMismatch {
                    expected: n,
                    got: inverse.ncols(),
                });
            }
            inverse
        }
    };

    let mut rng = seeded_rng(opts.seed);
    let mut locked: Vec<Vec<Complex64>> = Vec::new();
    let mut locked_vals: Vec<Complex64> = Vec::new();
    let mut applications = 0;
    let mut restarts = 0;

    for _ in 0..opts.max_passes {
        if n - locked.len() <= 1 {
            break;
        }
        let q = locked.clone();
        let project = |x: &[Complex64]| -> Result<Vec<Complex64>> {
            let mut px = x.to_vec();
            orthogonalize(&mut px, &q);
            let mut y = driver.apply(&px)?;
            orthogonalize(&mut y, &q);
            Ok(y)
        };
        let want = how_many.min(n - locked.len() - 1);
        let outcome = iram(&project, n, want, &locked, opts, &mut rng)?;
        applications += outcome.applications;
        restarts += outcome.restarts;

        let threshold = if locked_vals.len() >= how_many {
            let mut mags: Vec<f64> = locked_vals.iter().map(|v| v.norm()).collect();
            mags.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
            mags[how_many - 1]
        } else {
            0.0
        };
        let mut accepted = 0;
        for (theta, mut x) in outcome.pairs {
            if locked_vals.len() >= how_many && theta.norm() <= threshold * (1.0 + 1e-9) {
                continue;
            }
            orthogonalize(&mut x, &locked);
            let nx = norm(&x);
            if nx < 1e-6 {
                continue;
            }
            scale(&mut x, 1.0 / nx);
            locked.push(x);
            locked_vals.push(theta);
            accepted += 1;
        }
        if accepted == 0 {
            break;
        }
    }

    // Rayleigh-Ritz on the locked space
    let p = locked.len();
    let mut images = Vec::with_capacity(p);
    for v in &locked {
        images.push(driver.apply(v)?);
        applications += 1;
    }
    let mut small = DMatrix::<Complex64>::zeros(p, p);
    for i in 0..p {
        for j in 0..p {
            small[(i, j)] = dot(&locked[i], &images[j]);
        }
    }
    let mut ritz = if p > 0 { small_eig(&small)? } else { Vec::new() };
    ritz.sort_by(|a, b| b.0.norm().partial_cmp(&a.0.norm()).unwrap_or(std::cmp::Ordering::Equal));

    let mut eigenvalues = Vec::new();
    let mut residual_norms = Vec::new();
    let mut eigenvectors = Vec::new();
    for (theta, z) in ritz.into_iter().take(how_many) {
        let mut x = vec![ZERO; n];
        for (j, v) in locked.iter().enumerate() {
            axpy(&mut x, z[j], v);
        }
        let nx = norm(&x);
        scale(&mut x, 1.0 / nx);
        let lambda = match which {
            Which::LargestMagnitude => theta,
            Which::SmallestMagnitude { .. } => {
                if theta.norm() == 0.0 {
                    continue;
                }
                Complex64::new(1.0, 0.0) / theta
            }
        };
        let mut r = op.apply(&x)?;
        applications += 1;
        axpy(&mut r, -lambda, &x);
        let res = norm(&r);
        if res > opts.residual_tol * lambda.norm().max(1.0) {
            continue;
        }
        eigenvalues.push(lambda);
        residual_norms.push(res);
        eigenvectors.push(x);
    }
    // Ascending magnitude for the small end.
    if matches!(which, Which::SmallestMagnitude { .. }) {
        let mut order: Vec<usize> = (0..eigenvalues.len()).collect();
        order.sort_by(|&a, &b| {
            eigenvalues[a]
                .norm()
                .partial_cmp(&eigenvalues[b].norm())
                .unwrap_or(std::cmp::Ordering::Equal)
        });
        eigenvalues = order.iter().map(|&i| eigenvalues[i]).collect();
        residual_norms = order.iter().map(|&i| residual_norms[i]).collect();
        eigenvectors = order.iter().map(|&i| eigenvectors[i].clone()).collect();
    }

    Ok(EigenReport {
        converged: eigenvalues.len(),
        eigenvalues,
        residual_norms,
        iterations: applications,
        restarts,
        requested: how_many,
        wall_time: start.elapsed().as_secs_f64(),
        eigenvectors,
    })
}
