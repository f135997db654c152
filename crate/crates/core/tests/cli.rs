use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_stekloff"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn out_arg(dir: &Path) -> String {
    dir.display().to_string()
}

#[test]
fn verify_passes_and_writes_a_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["verify", "--out", &out_arg(dir.path())]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.lines().all(|l| l.starts_with("PASS")));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("verify.json")).unwrap()).unwrap();
    assert_eq!(report["config_hash"].as_str().unwrap().len(), 16);
}

#[test]
fn bad_config_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "[stekloff]\nwhat = 3\n").unwrap();
    let out = run(&["stekloff", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("error"));

    let out = run(&["solve", "--field", "9", "--out", &out_arg(dir.path())]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn solve_writes_snapshots_that_export_back() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "solve",
        "--grid",
        "24",
        "--omega",
        "1.6",
        "--field",
        "2",
        "--out",
        &out_arg(dir.path()),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for name in [
        "solve.csv",
        "solve_u.csv",
        "solve_u.f64",
        "solve_u.f64.json",
        "solve_u.pgm",
        "solve_k.f64",
    ] {
        assert!(dir.path().join(name).exists(), "{name}");
    }
    let side: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("solve_k.f64.json")).unwrap()).unwrap();
    assert_eq!(side["dims"], serde_json::json!([24, 24]));
    assert_eq!(side["meta"]["velocity_field"], "2");

    let csv_out = dir.path().join("k.csv");
    let input = dir.path().join("solve_k.f64");
    let out = run(&[
        "export",
        "--input",
        input.to_str().unwrap(),
        "--out",
        csv_out.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&csv_out).unwrap();
    assert_eq!(text.lines().count(), 24);
    assert!(text.lines().all(|l| l.split(',').count() == 24));

    let out = run(&["export", "--input", input.to_str().unwrap(), "--format", "tiff"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn stekloff_writes_hashed_tables() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("s.toml");
    std::fs::write(&cfg, "[stekloff]\ngrid = 16\ncross_check = 8\nhow_many = 4\n").unwrap();
    let out = run(&[
        "stekloff",
        "--config",
        cfg.to_str().unwrap(),
        "--eta",
        "0.5,2",
        "--out",
        &out_arg(dir.path()),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let mut rdr = csv::Reader::from_path(dir.path().join("stekloff.csv")).unwrap();
    let headers = rdr.headers().unwrap().clone();
    assert_eq!(&headers[0], "config_hash");
    assert!(headers.iter().any(|h| h == "lambda_4"));
    let rows: Vec<csv::StringRecord> = rdr.records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), 4);
    assert!(rows.iter().all(|r| r[0].len() == 16 && &r[5] == "4/4"));
    assert!(dir.path().join("stekloff_convergence.csv").exists());
}

#[test]
fn small_precond_bench() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("p.toml");
    std::fs::write(
        &cfg,
        "[precond-bench]\nfreqs = [0.8, 1.6]\ngrids = [16, 32]\nfields = [1]\nsnapshots = false\n",
    )
    .unwrap();
    let out = run(&[
        "precond-bench",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        &out_arg(dir.path()),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let mut rdr = csv::Reader::from_path(dir.path().join("precond_bench.csv")).unwrap();
    let rows: Vec<csv::StringRecord> = rdr.records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), 2);
    let it = rdr.headers().unwrap().iter().position(|h| h == "iterations").unwrap();
    assert!(rows.iter().all(|r| r[it].parse::<usize>().unwrap() < 20));
}
