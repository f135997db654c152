use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use stekloff::bench::export::{export_field, import_raw, ExportFormat};
use stekloff::bench::precond::{row_for, solve_case, write_snapshots};
use stekloff::bench::stekloff::run_stekloff;
use stekloff::bench::verify::run_verify;
use stekloff::bench::{precond::run_precond_bench, write_csv, Experiment, Overrides, RunConfig, VelocityField};
use stekloff::krylov::GmresOptions;
use stekloff::Error;

#[derive(Parser)]
#[command(
    name = "stekloff",
    version,
    about = "FFT Helmholtz solvers, preconditioned GMRES and Stekloff eigenvalues"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one variable wave number problem and write snapshots.
    Solve(Common),
    /// GMRES iteration counts over (frequency, grid) pairs and velocity fields.
    PrecondBench(Common),
    /// Smallest-magnitude Stekloff eigenvalues with a grid cross-check.
    Stekloff(Common),
    /// Dense-oracle verification suites.
    Verify(Common),
    /// Convert a raw snapshot to csv, raw or pgm.
    Export(ExportArgs),
}

#[derive(Args, Clone, Default)]
struct Common {
    /// TOML config file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Grid size(s), comma separated.
    #[arg(long, value_delimiter = ',')]
    grid: Option<Vec<usize>>,
    /// Stekloff eta values, comma separated.
    #[arg(long, value_delimiter = ',')]
    eta: Option<Vec<f64>>,
    /// Frequencies omega / 2 pi, comma separated.
    #[arg(long, value_delimiter = ',')]
    omega: Option<Vec<f64>>,
    /// Velocity field id (1 or 2).
    #[arg(long)]
    field: Option<u32>,
    #[arg(long)]
    tol: Option<f64>,
}

#[derive(Args)]
struct ExportArgs {
    /// Raw snapshot (with its .json sidecar) to convert.
    #[arg(long)]
    input: PathBuf,
    /// csv, raw or pgm.
    #[arg(long, default_value = "csv")]
    format: String,
    /// Output file; defaults to the input with the format's extension.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn load(common: &Common, experiment: Experiment) -> Result<RunConfig, Error> {
    let base = match &common.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    let mut cfg = base.for_experiment(experiment);
    cfg.apply(&Overrides {
        out: common.out.clone(),
        seed: common.seed,
        grid: common.grid.clone(),
        eta: common.eta.clone(),
        freq: common.omega.clone(),
        field: common.field,
        tol: common.tol,
    })?;
    Ok(cfg)
}

fn solve(cfg: &RunConfig) -> Result<(), Error> {
    let s = &cfg.solve;
    let field = VelocityField::from_id(s.field)?;
    let opts = GmresOptions {
        tol: s.tol,
        restart: s.restart,
        max_iter: s.max_iter,
    };
    let case = solve_case(field, s.freq, s.grid, &opts)?;
    let out = &cfg.run.out;
    write_snapshots(&case, field, s.freq, out, "solve")?;
    export_field(&case.solution, &out.join("solve_u.csv"), ExportFormat::Csv)?;
    let row = row_for(&case, field, s.freq, s.grid, &cfg.hash());
    write_csv(&out.join("solve.csv"), std::slice::from_ref(&row))?;
    println!(
        "field {} freq {} n {}: {} iterations, residual {:.2e}, {:.3}s{}",
        row.field,
        row.freq,
        row.n,
        row.iterations,
        row.relative_residual,
        row.time_s,
        if row.converged { "" } else { " (not converged)" }
    );
    Ok(())
}

fn precond_bench(cfg: &RunConfig) -> Result<(), Error> {
    let rows = run_precond_bench(cfg)?;
    println!(
        "{:>6} {:>8} {:>6} {:>10} {:>9}",
        "field", "freq", "n", "iterations", "time_s"
    );
    for r in rows {
        println!(
            "{:>6} {:>8} {:>6} {:>10} {:>9.3}{}",
            r.field,
            r.freq,
            r.n,
            r.iterations,
            r.time_s,
            if r.converged { "" } else { "  not converged" }
        );
    }
    Ok(())
}

fn stekloff(cfg: &RunConfig) -> Result<(), Error> {
    let run = run_stekloff(cfg)?;
    for s in run.fine.iter().chain(&run.coarse) {
        let vals: Vec<String> = s.values.iter().map(|v| format!("{v:9.4}")).collect();
        let mark = if s.complete() { "" } else { "  incomplete" };
        println!("n={:<4} eta={:<5} {}{mark}", s.n, s.eta, vals.join(" "));
    }
    let worst = run.convergence().iter().map(|c| c.4).fold(0.0, f64::max);
    println!("largest relative change between grids: {worst:.2e}");
    Ok(())
}

fn verify(cfg: &RunConfig) -> Result<bool, Error> {
    let report = run_verify(cfg);
    for s in &report.suites {
        println!("{}", s.line());
    }
    let path = cfg.run.out.join("verify.json");
    std::fs::create_dir_all(&cfg.run.out).map_err(|e| Error::Io {
        path: cfg.run.out.display().to_string(),
        message: e.to_string(),
    })?;
    let json = serde_json::to_string_pretty(&report).expect("report serializes");
    std::fs::write(&path, json).map_err(|e| Error::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    Ok(report.passed())
}

fn export(args: &ExportArgs) -> Result<(), Error> {
    let format: ExportFormat = args.format.parse()?;
    let field = import_raw(&args.input)?;
    let out = args
        .out
        .clone()
        .unwrap_or_else(|| args.input.with_extension(format.extension()));
    for p in export_field(&field, &out, format)? {
        println!("{}", p.display());
    }
    Ok(())
}

fn exit_for(err: &Error) -> ExitCode {
    eprintln!("error: {err}");
    match err {
        Error::Config(_) => ExitCode::from(2),
        _ => ExitCode::from(1),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Solve(c) => load(c, Experiment::Solve).and_then(|cfg| solve(&cfg)),
        Command::PrecondBench(c) => load(c, Experiment::PrecondBench).and_then(|cfg| precond_bench(&cfg)),
        Command::Stekloff(c) => load(c, Experiment::StekloffEig).and_then(|cfg| stekloff(&cfg)),
        Command::Verify(c) => match load(c, Experiment::Verify).and_then(|cfg| verify(&cfg)) {
            Ok(true) => Ok(()),
            Ok(false) => return ExitCode::from(1),
            Err(e) => Err(e),
        },
        Command::Export(a) => export(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => exit_for(&e),
    }
}
