//! Smallest-magnitude Stekloff eigenvalues of the unit square.
//!
//! Reported values are `eig(S_h) / h`: the discrete DtN map returns `h`
//! times the normal derivative, so the division gives eigenvalues with a
//! grid-independent limit.

use std::path::Path;

use nalgebra::{DMatrix, SymmetricEigen};
use serde::Serialize;

use super::config::RunConfig;
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::krylov::{arnoldi_eigs, EigOptions, EigenReport, Which};
use crate::operators::{dense_dtn, BlockPartition, DtnOperator, NtdOperator};

#[derive(Clone, Debug, Serialize)]
pub struct StekloffSpectrum {
    pub n: usize,
    pub eta: f64,
    pub h: f64,
    /// Ascending magnitude; may hold fewer than requested.
    pub values: Vec<f64>,
    pub requested: usize,
    pub max_residual: f64,
    pub applications: usize,
    pub time_s: f64,
}

impl StekloffSpectrum {
    pub fn complete(&self) -> bool {
        self.values.len() == self.requested
    }
}

pub fn neumann_square(n: usize) -> Result<Grid> {
    Grid::neumann(&[n, n])
}

/// Arnoldi on `T_h`, reciprocals checked against `S_h`.
pub fn stekloff_spectrum(n: usize, eta: f64, how_many: usize, opts: &EigOptions) -> Result<StekloffSpectrum> {
    let grid = neumann_square(n)?;
    let partition = BlockPartition::new(&grid)?;
    let dtn = DtnOperator::new(&partition, eta)?;
    let ntd = NtdOperator::new(&partition, eta)?;
    let report = arnoldi_eigs(&dtn, how_many, Which::SmallestMagnitude { inverse: &ntd }, opts)?;
    Ok(spectrum_from(n, eta, grid.h_ref(), how_many, &report))
}

fn spectrum_from(n: usize, eta: f64, h: f64, how_many: usize, r: &EigenReport) -> StekloffSpectrum {
    StekloffSpectrum {
        n,
        eta,
        h,
        values: r.eigenvalues.iter().map(|z| z.re / h).collect(),
        requested: how_many,
        max_residual: r.residual_norms.iter().cloned().fold(0.0, f64::max),
        applications: r.iterations,
        time_s: r.wall_time,
    }
}

/// Dense oracle: every eigenvalue of the assembled Schur complement,
/// divided by `h`, in ascending magnitude.
pub fn dense_stekloff(n: usize, eta: f64) -> Result<Vec<f64>> {
    let grid = neumann_square(n)?;
    let partition = BlockPartition::new(&grid)?;
    let s = dense_dtn(&partition, eta)?;
    let real: DMatrix<f64> = s.map(|z| z.re);
    let mut vals: Vec<f64> = SymmetricEigen::new(real)
        .eigenvalues
        .iter()
        .map(|v| v / grid.h_ref())
        .collect();
    vals.sort_by(|a, b| a.abs().partial_cmp(&b.abs()).unwrap_or(std::cmp::Ordering::Equal));
    Ok(vals)
}

pub fn eig_options(cfg: &RunConfig) -> EigOptions {
    EigOptions {
        tol: cfg.stekloff.tol,
        max_subspace: cfg.stekloff.max_subspace,
        residual_tol: cfg.stekloff.residual_tol,
        seed: cfg.run.seed,
        ..EigOptions::default()
    }
}

#[derive(Clone, Debug)]
pub struct StekloffRun {
    pub fine: Vec<StekloffSpectrum>,
    pub coarse: Vec<StekloffSpectrum>,
}

impl StekloffRun {
    /// `(eta, index, coarse, fine, |fine - coarse| / |fine|)`.
    pub fn convergence(&self) -> Vec<(f64, usize, f64, f64, f64)> {
        let mut out = Vec::new();
        for (f, c) in self.fine.iter().zip(&self.coarse) {
            for (i, (a, b)) in c.values.iter().zip(&f.values).enumerate() {
                out.push((f.eta, i + 1, *a, *b, (b - a).abs() / b.abs()));
            }
        }
        out
    }
}

/// Spectra at the configured grid and the cross-check grid for every eta,
/// cases in parallel. Writes `stekloff.csv` and `stekloff_convergence.csv`.
pub fn run_stekloff(cfg: &RunConfig) -> Result<StekloffRun> {
    let s = &cfg.stekloff;
    let opts = eig_options(cfg);
    let cases: Vec<(usize, f64)> = [s.grid, s.cross_check]
        .iter()
        .flat_map(|&n| s.etas.iter().map(move |&eta| (n, eta)))
        .collect();
    let results: Vec<Result<StekloffSpectrum>> = std::thread::scope(|scope| {
        let handles: Vec<_> = cases
            .iter()
            .map(|&(n, eta)| {
                let opts = opts.clone();
                scope.spawn(move || stekloff_spectrum(n, eta, s.how_many, &opts))
            })
            .collect();
        handles
            .into_iter()
            .map(|h| {
                h.join()
                    .unwrap_or_else(|_| Err(Error::InvalidArgument("eigen worker panicked".into())))
            })
            .collect()
    });
    let mut spectra = results.into_iter().collect::<Result<Vec<_>>>()?;
    let coarse = spectra.split_off(s.etas.len());
    let run = StekloffRun { fine: spectra, coarse };

    let hash = cfg.hash();
    let out = &cfg.run.out;
    write_spectra(
        &out.join("stekloff.csv"),
        &hash,
        s.how_many,
        run.fine.iter().chain(&run.coarse),
    )?;
    write_convergence(&out.join("stekloff_convergence.csv"), &hash, &run)?;
    Ok(run)
}

fn writer(path: &Path) -> Result<csv::Writer<std::fs::File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    csv::Writer::from_path(path).map_err(|e| Error::io(path, e))
}

fn write_spectra<'a>(
    path: &Path,
    hash: &str,
    how_many: usize,
    rows: impl Iterator<Item = &'a StekloffSpectrum>,
) -> Result<()> {
    let mut w = writer(path)?;
    let mut header: Vec<String> = ["config_hash", "n", "h", "boundary_nodes", "eta", "converged"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    header.extend((1..=how_many).map(|i| format!("lambda_{i}")));
    header.extend(["max_residual".to_string(), "applications".into(), "time_s".into()]);
    w.write_record(&header).map_err(|e| Error::io(path, e))?;
    for r in rows {
        let mut rec = vec![
            hash.to_string(),
            r.n.to_string(),
            r.h.to_string(),
            (4 * (r.n + 1)).to_string(),
            r.eta.to_string(),
            format!("{}/{}", r.values.len(), r.requested),
        ];
        rec.extend((0..how_many).map(|i| r.values.get(i).map(|v| format!("{v:.6}")).unwrap_or_default()));
        rec.extend([
            format!("{:.3e}", r.max_residual),
            r.applications.to_string(),
            format!("{:.3}", r.time_s),
        ]);
        w.write_record(&rec).map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn write_convergence(path: &Path, hash: &str, run: &StekloffRun) -> Result<()> {
    let mut w = writer(path)?;
    let (nc, nf) = (
        run.coarse.first().map_or(0, |s| s.n),
        run.fine.first().map_or(0, |s| s.n),
    );
    w.write_record([
        "config_hash",
        "eta",
        "index",
        &format!("lambda_n{nc}"),
        &format!("lambda_n{nf}"),
        "rel_change",
    ])
    .map_err(|e| Error::io(path, e))?;
    for (eta, i, a, b, rel) in run.convergence() {
        w.write_record([
            hash.to_string(),
            eta.to_string(),
            i.to_string(),
            format!("{a:.6}"),
            format!("{b:.6}"),
            format!("{rel:.3e}"),
        ])
        .map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}
