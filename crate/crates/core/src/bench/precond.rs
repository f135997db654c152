//! Variable wave number Dirichlet problems solved by GMRES, right
//! preconditioned with the exact constant-k FFT solver.

use std::path::Path;

use num_complex::Complex64;
use serde::Serialize;

use super::config::RunConfig;
use super::export::{export_field_with_meta, ExportFormat};
use super::velocity::VelocityField;
use super::write_csv;
use crate::error::{Error, Result};
use crate::grid::{Field, Grid};
use crate::helmholtz::load_vector;
use crate::krylov::{gmres_right_preconditioned, GmresOptions, SolveReport};
use crate::operators::{DirichletInverse, VariableHelmholtz};

/// Relative step applied to a resonant reference wave number.
pub const NUDGE: f64 = 0.005;

#[derive(Clone, Debug, Serialize)]
pub struct PrecondRow {
    pub config_hash: String,
    pub field: String,
    pub freq: f64,
    pub n: usize,
    pub unknowns: usize,
    pub h: f64,
    pub k_ref: f64,
    pub k_ref_nudges: u32,
    pub iterations: usize,
    pub restarts: usize,
    pub relative_residual: f64,
    pub converged: bool,
    pub time_s: f64,
}

/// One solved case.
pub struct PrecondCase {
    pub k_field: Field,
    pub solution: Field,
    pub k_ref: f64,
    pub nudges: u32,
    pub report: SolveReport,
}

/// `k_ref`, moved by [`NUDGE`] steps until the Dirichlet solver accepts it.
pub fn resolve_reference(grid: &Grid, k_ref: f64) -> Result<(DirichletInverse, f64, u32)> {
    let mut k = k_ref;
    for nudges in 0..20 {
        match DirichletInverse::new(grid, k) {
            Ok(inv) => return Ok((inv, k, nudges)),
            Err(Error::Resonance { .. }) => k *= 1.0 + NUDGE,
            Err(e) => return Err(e),
        }
    }
    DirichletInverse::new(grid, k).map(|inv| (inv, k, 20))
}

/// Solve `-Lap u - k(x)^2 u = 1` with zero Dirichlet data on an `n x n`
/// interior grid.
pub fn solve_case(field: VelocityField, freq: f64, n: usize, opts: &GmresOptions) -> Result<PrecondCase> {
    let grid = Grid::dirichlet(&[n, n])?;
    let k_field = field.wave_number(&grid, freq)?;
    let (precond, k_ref, nudges) = resolve_reference(&grid, field.reference_wave_number(&grid, freq)?)?;
    let op = VariableHelmholtz::new(&k_field)?;
    let ones = Field::from_fn(grid.clone(), |_| Complex64::new(1.0, 0.0))?;
    let rhs = load_vector(&grid, &ones)?;
    let (x, report) = gmres_right_preconditioned(&op, &precond, rhs.values(), opts)?;
    Ok(PrecondCase {
        k_field,
        solution: Field::new(grid, x)?,
        k_ref,
        nudges,
        report,
    })
}

pub fn row_for(case: &PrecondCase, field: VelocityField, freq: f64, n: usize, hash: &str) -> PrecondRow {
    PrecondRow {
        config_hash: hash.to_string(),
        field: field.id(),
        freq,
        n,
        unknowns: n * n,
        h: case.solution.grid().h_ref(),
        k_ref: case.k_ref,
        k_ref_nudges: case.nudges,
        iterations: case.report.iterations,
        restarts: case.report.restarts,
        relative_residual: case.report.relative_residual,
        converged: case.report.converged,
        time_s: case.report.wall_time,
    }
}

pub fn write_snapshots(case: &PrecondCase, field: VelocityField, freq: f64, dir: &Path, stem: &str) -> Result<()> {
    let meta = |what: &str| {
        let k = case.k_field.values();
        let kmin = k.iter().map(|v| v.re).fold(f64::INFINITY, f64::min);
        let kmax = k.iter().map(|v| v.re).fold(f64::NEG_INFINITY, f64::max);
        serde_json::json!({
            "quantity": what,
            "velocity_field": field.id(),
            "velocity_formula": field.formula(),
            "freq": freq,
            "k_min": kmin,
            "k_max": kmax,
            "k_ref": case.k_ref,
            "k_ref_nudges": case.nudges,
        })
    };
    for (what, f) in [("k", &case.k_field), ("u", &case.solution)] {
        let base = dir.join(format!("{stem}_{what}"));
        export_field_with_meta(f, &base.with_extension("f64"), ExportFormat::Raw, meta(what))?;
        export_field_with_meta(
            f,
            &base.with_extension("pgm"),
            ExportFormat::Pgm,
            serde_json::Value::Null,
        )?;
    }
    Ok(())
}

/// Every (frequency, grid) pair for every configured field. Writes
/// `precond_bench.csv` and snapshots under the output directory.
pub fn run_precond_bench(cfg: &RunConfig) -> Result<Vec<PrecondRow>> {
    let p = &cfg.precond;
    let hash = cfg.hash();
    let opts = GmresOptions {
        tol: p.tol,
        restart: p.restart,
        max_iter: p.max_iter,
    };
    let out = &cfg.run.out;
    let mut rows = Vec::new();
    for &id in &p.fields {
        let field = VelocityField::from_id(id)?;
        for (&freq, &n) in p.freqs.iter().zip(&p.grids) {
            let case = solve_case(field, freq, n, &opts)?;
            if p.snapshots {
                write_snapshots(
                    &case,
                    field,
                    freq,
                    &out.join("snapshots"),
                    &format!("field{id}_f{freq}_n{n}"),
                )?;
            }
            rows.push(row_for(&case, field, freq, n, &hash));
        }
    }
    write_csv(&out.join("precond_bench.csv"), &rows)?;
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::helmholtz::HelmholtzSolver;

    #[test]
    fn constant_velocity_needs_one_iteration() {
        let opts = GmresOptions {
            tol: 1e-10,
            ..Default::default()
        };
        let case = solve_case(VelocityField::Constant(4.0 / 3.0), 0.8, 20, &opts).unwrap();
        assert_eq!(case.report.iterations, 1);
        assert!(case.report.converged);
    }

    #[test]
    fn resonant_reference_is_nudged() {
        // k^2 h^2 = 2 (2 - 2 cos(pi h)) hits the lowest 2D Dirichlet mode
        let n = 9;
        let grid = Grid::dirichlet(&[n, n]).unwrap();
        let h = grid.h_ref();
        let k = (2.0 * 4.0 * (std::f64::consts::PI * h / 2.0).sin().powi(2)).sqrt() / h;
        assert!(HelmholtzSolver::new(&grid, k).is_err());
        let (_, k2, nudges) = resolve_reference(&grid, k).unwrap();
        assert_eq!(nudges, 1);
        assert!((k2 / k - 1.0 - NUDGE).abs() < 1e-15);
    }
}
