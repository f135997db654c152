use web_time::Instant;

use num_complex::Complex64;
use serde::Serialize;

use super::{axpy, givens, norm, orthogonalize, scale};
use crate::error::{Error, Result};
use crate::operators::LinearOperator;

#[derive(Clone, Debug)]
pub struct GmresOptions {
    /// Relative residual target `||b - A x|| / ||b||`.
    pub tol: f64,
    pub restart: usize,
    /// Cap on operator applications inside Arnoldi steps.
    pub max_iter: usize,
}

impl Default for GmresOptions {
    fn default() -> Self {
        Self {
            tol: 1e-6,
            restart: 50,
            max_iter: 1000,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SolveReport {
    /// Arnoldi steps, i.e. operator applications that extend the basis.
    pub iterations: usize,
    /// True relative residual of the returned iterate.
    pub relative_residual: f64,
    pub wall_time: f64,
    pub converged: bool,
    pub restarts: usize,
    /// Estimated relative residual after each Arnoldi step.
    pub residual_history: Vec<f64>,
}

/// Restarted GMRES from a zero initial guess.
pub fn gmres(op: &dyn LinearOperator, rhs: &[Complex64], opts: &GmresOptions) -> Result<(Vec<Complex64>, SolveReport)> {
    let start = Instant::now();
    if !op.is_square() {
        return Err(Error::InvalidArgument(format!(
            "GMRES needs a square operator, got {}x{}",
            op.nrows(),
            op.ncols()
        )));
    }
    let n = op.ncols();
    if rhs.len() != n {
        return Err(Error::ShapeMismatch {
            expected: n,
            got: rhs.len(),
        });
    }
    if !(opts.tol > 0.0 && opts.tol < 1.0) || opts.restart == 0 {
        return Err(Error::InvalidArgument("tol must be in (0, 1) and restart >= 1".into()));
    }
    let bnorm = norm(rhs);
    if bnorm == 0.0 {
        return Err(Error::InvalidArgument("right-hand side is zero".into()));
    }

    let zero = Complex64::new(0.0, 0.0);
    let mut x = vec![zero; n];
    let mut r = rhs.to_vec();
    let mut rel = 1.0;
    let mut iterations = 0;
    let mut restarts = 0;
    let mut history = Vec::new();

    while iterations < opts.max_iter {
        let beta = norm(&r);
        rel = beta / bnorm;
        if rel <= opts.tol {
            break;
        }
        let m = opts.restart.min(opts.max_iter - iterations);
        let mut basis: Vec<Vec<Complex64>> = Vec::with_capacity(m + 1);
        let mut v0 = r.clone();
        scale(&mut v0, 1.0 / beta);
        basis.push(v0);
        // column-wise Hessenberg after rotations (upper triangular part)
        let mut h: Vec<Vec<Complex64>> = Vec::with_capacity(m);
        let mut rot: Vec<(f64, Complex64)> = Vec::with_capacity(m);
        let mut g = vec![zero; m + 1];
        g[0] = Complex64::new(beta, 0.0);

        let mut steps = 0;
        for j in 0..m {
            let mut w = op.apply(&basis[j])?;
            iterations += 1;
            steps = j + 1;
            let mut col = orthogonalize(&mut w, &basis);
            let hnext = norm(&w);
            col.push(Complex64::new(hnext, 0.0));
            for (i, &(c, s)) in rot.iter().enumerate() {
                let a = col[i];
                let b = col[i + 1];
                col[i] = c * a + s * b;
                col[i + 1] = -s.conj() * a + c * b;
            }
            let (c, s, rr) = givens(col[j], col[j + 1]);
            col[j] = rr;
            col[j + 1] = zero;
            rot.push((c, s));
            g[j + 1] = -s.conj() * g[j];
            g[j] = c * g[j];
            h.push(col);

            let est = g[j + 1].norm() / bnorm;
            history.push(est);
            if est <= opts.tol || hnext <= f64::EPSILON * bnorm || iterations >= opts.max_iter {
                break;
            }
            scale(&mut w, 1.0 / hnext);
            basis.push(w);
        }

        // back substitution on the triangular factor
        let mut y = vec![zero; steps];
        for i in (0..steps).rev() {
            let mut acc = g[i];
            for k in i + 1..steps {
                acc -= h[k][i] * y[k];
            }
            y[i] = acc / h[i][i];
        }
        for (yi, v) in y.iter().zip(&basis) {
            axpy(&mut x, *yi, v);
        }
        let ax = op.apply(&x)?;
        r = rhs.iter().zip(&ax).map(|(b, a)| b - a).collect();
        rel = norm(&r) / bnorm;
        if rel <= opts.tol {
            break;
        }
        restarts += 1;
    }

    Ok((
        x,
        SolveReport {
            iterations,
            relative_residual: rel,
            wall_time: start.elapsed().as_secs_f64(),
            converged: rel <= opts.tol,
            restarts,
            residual_history: history,
        },
    ))
}

/// Solve `A x = b` through `A M y = b`, `x = M y`. The reported residual is
/// the residual of the original system.
pub fn gmres_right_preconditioned(
    op: &dyn LinearOperator,
    precond: &dyn LinearOperator,
    rhs: &[Complex64],
    opts: &GmresOptions,
) -> Result<(Vec<Complex64>, SolveReport)> {
    if precond.nrows() != op.ncols() || precond.ncols() != op.ncols() {
        return Err(Error::ShapeMismatch {
            expected: op.ncols(),
            got: precond.nrows(),
        });
    }
    let composite = Composite { op, precond };
    let (y, report) = gmres(&composite, rhs, opts)?;
    Ok((precond.apply(&y)?, report))
}

struct Composite<'a> {
    op: &'a dyn LinearOperator,
    precond: &'a dyn LinearOperator,
}

impl LinearOperator for Composite<'_> {
    fn nrows(&self) -> usize {
        self.op.nrows()
    }
    fn ncols(&self) -> usize {
        self.precond.ncols()
    }
    fn tag(&self) -> &str {
        "right-preconditioned"
    }
    fn apply_unchecked(&self, x: &[Complex64]) -> Result<Vec<Complex64>> {
        self.op.apply(&self.precond.apply(x)?)
    }
}
