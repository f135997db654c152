//! WebAssembly bindings for the static page in `www/`.
//!
//! Each exported function has a plain Rust counterpart returning
//! [`stekloff::Result`], so the logic is testable off the browser.

use stekloff::bench::precond::solve_case;
use stekloff::bench::stekloff::stekloff_spectrum;
use stekloff::bench::VelocityField;
use stekloff::helmholtz::{HelmholtzProblem, HelmholtzSolver};
use stekloff::krylov::{EigOptions, GmresOptions};
use stekloff::{Complex64, Field, Grid};
use wasm_bindgen::prelude::*;

/// Largest grid the page may request; keeps a solve well under a second.
pub const MAX_GRID: usize = 400;

fn check_grid(n: usize) -> stekloff::Result<()> {
    if n == 0 || n > MAX_GRID {
        return Err(stekloff::Error::InvalidArgument(format!(
            "grid size {n} outside 1..={MAX_GRID}"
        )));
    }
    Ok(())
}

/// Row-major `n x n` image plus a few scalars for the caption.
#[wasm_bindgen]
#[derive(Clone, Debug)]
pub struct Snapshot {
    n: usize,
    wave_number: Vec<f64>,
    wave_real: Vec<f64>,
    iterations: usize,
    residual: f64,
    k_ref: f64,
    converged: bool,
}

#[wasm_bindgen]
impl Snapshot {
    #[wasm_bindgen(getter)]
    pub fn n(&self) -> usize {
        self.n
    }
    #[wasm_bindgen(getter, js_name = waveNumber)]
    pub fn wave_number(&self) -> Vec<f64> {
        self.wave_number.clone()
    }
    /// Real part of the solution.
    #[wasm_bindgen(getter, js_name = waveReal)]
    pub fn wave_real(&self) -> Vec<f64> {
        self.wave_real.clone()
    }
    #[wasm_bindgen(getter)]
    pub fn iterations(&self) -> usize {
        self.iterations
    }
    #[wasm_bindgen(getter)]
    pub fn residual(&self) -> f64 {
        self.residual
    }
    #[wasm_bindgen(getter, js_name = kRef)]
    pub fn k_ref(&self) -> f64 {
        self.k_ref
    }
    #[wasm_bindgen(getter)]
    pub fn converged(&self) -> bool {
        self.converged
    }
}

fn real_parts(f: &Field) -> Vec<f64> {
    f.values().iter().map(|v| v.re).collect()
}

/// Preconditioned GMRES solve with unit source for velocity field 1 or 2.
pub fn velocity_snapshot(field: u32, freq: f64, n: usize) -> stekloff::Result<Snapshot> {
    check_grid(n)?;
    let field = VelocityField::from_id(field)?;
    let case = solve_case(field, freq, n, &GmresOptions::default())?;
    Ok(Snapshot {
        n,
        wave_number: real_parts(&case.k_field),
        wave_real: real_parts(&case.solution),
        iterations: case.report.iterations,
        residual: case.report.relative_residual,
        k_ref: case.k_ref,
        converged: case.report.converged,
    })
}

/// Constant-k Dirichlet solve with a unit point load at `(x, y)`.
pub fn point_source(k: f64, n: usize, x: f64, y: f64) -> stekloff::Result<Vec<f64>> {
    check_grid(n)?;
    let grid = Grid::dirichlet(&[n, n])?;
    let h = grid.h_ref();
    let at = |t: f64| ((t / h).round() as usize).clamp(1, n) - 1;
    let mut load = Field::zeros(grid.clone());
    load.values_mut()[at(x) * n + at(y)] = Complex64::new(1.0, 0.0);
    let solver = HelmholtzSolver::new(&grid, k)?;
    let u = solver.solve(&HelmholtzProblem::new(grid, k, load)?.full_rhs()?)?;
    Ok(real_parts(&u))
}

/// Smallest-magnitude Stekloff eigenvalues of the unit square.
pub fn stekloff_values(n: usize, eta: f64, how_many: usize) -> stekloff::Result<Vec<f64>> {
    check_grid(n)?;
    Ok(stekloff_spectrum(n, eta, how_many, &EigOptions::default())?.values)
}

fn js_err(e: stekloff::Error) -> JsError {
    JsError::new(&e.to_string())
}

#[wasm_bindgen(js_name = solveVelocityField)]
pub fn solve_velocity_field(field: u32, freq: f64, n: usize) -> Result<Snapshot, JsError> {
    velocity_snapshot(field, freq, n).map_err(js_err)
}

#[wasm_bindgen(js_name = solvePointSource)]
pub fn solve_point_source(k: f64, n: usize, x: f64, y: f64) -> Result<Vec<f64>, JsError> {
    point_source(k, n, x, y).map_err(js_err)
}

#[wasm_bindgen(js_name = stekloffEigenvalues)]
pub fn stekloff_eigenvalues(n: usize, eta: f64, how_many: usize) -> Result<Vec<f64>, JsError> {
    stekloff_values(n, eta, how_many).map_err(js_err)
}
