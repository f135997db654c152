//! Run configuration: a TOML file with one section per experiment, plus
//! command-line overrides.
//!
//! ```toml
//! [run]
//! seed = 7
//! out = "out"
//!
//! [solve]
//! grid = 100
//! field = 1
//! freq = 1.6
//!
//! [precond-bench]
//! freqs = [0.8, 1.6, 3.2, 6.4]
//! grids = [50, 100, 200, 400]
//! fields = [1, 2]
//! tol = 1e-6
//!
//! [stekloff]
//! etas = [0.5, 1.0, 2.0, 4.0]
//! grid = 64
//! cross_check = 32
//!
//! [verify]
//! draws = 4
//! grids = [8, 16]
//! ```
//!
//! Every key is optional. Frequencies are `omega / 2 pi`.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    Solve,
    PrecondBench,
    StekloffEig,
    Verify,
}

impl Experiment {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Solve => "solve",
            Self::PrecondBench => "precond-bench",
            Self::StekloffEig => "stekloff-eig",
            Self::Verify => "verify",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunSection {
    pub seed: u64,
    pub out: PathBuf,
}

impl Default for RunSection {
    fn default() -> Self {
        Self {
            seed: 7,
            out: PathBuf::from("out"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolveSection {
    pub grid: usize,
    pub field: u32,
    pub freq: f64,
    pub tol: f64,
    pub restart: usize,
    pub max_iter: usize,
}

impl Default for SolveSection {
    fn default() -> Self {
        Self {
            grid: 100,
            field: 1,
            freq: 1.6,
            tol: 1e-6,
            restart: 50,
            max_iter: 500,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PrecondSection {
    /// Paired with `grids` entry by entry.
    pub freqs: Vec<f64>,
    pub grids: Vec<usize>,
    pub fields: Vec<u32>,
    pub tol: f64,
    pub restart: usize,
    pub max_iter: usize,
    /// Write k and u snapshots for every row.
    pub snapshots: bool,
}

impl Default for PrecondSection {
    fn default() -> Self {
        Self {
            freqs: vec![0.8, 1.6, 3.2, 6.4],
            grids: vec![50, 100, 200, 400],
            fields: vec![1, 2],
            tol: 1e-6,
            restart: 50,
            max_iter: 500,
            snapshots: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StekloffSection {
    pub etas: Vec<f64>,
    pub grid: usize,
    pub cross_check: usize,
    pub how_many: usize,
    pub tol: f64,
    pub max_subspace: usize,
    pub residual_tol: f64,
}

impl Default for StekloffSection {
    fn default() -> Self {
        Self {
            etas: vec![0.5, 1.0, 2.0, 4.0],
            grid: 64,
            cross_check: 32,
            how_many: 6,
            tol: 1e-10,
            max_subspace: 60,
            residual_tol: 1e-8,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifySection {
    /// Random draws per (dimension, boundary combination).
    pub draws: usize,
    pub etas: Vec<f64>,
    /// Grid sizes for the inverse-pair suite.
    pub grids: Vec<usize>,
    /// Grid size of the dense eigen-oracle suite.
    pub oracle_grid: usize,
}

impl Default for VerifySection {
    fn default() -> Self {
        Self {
            draws: 4,
            etas: vec![0.5, 1.0, 2.0, 4.0],
            grids: vec![8, 16],
            oracle_grid: 8,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    #[serde(skip_deserializing)]
    pub experiment: Option<Experiment>,
    pub run: RunSection,
    pub solve: SolveSection,
    #[serde(rename = "precond-bench")]
    pub precond: PrecondSection,
    pub stekloff: StekloffSection,
    pub verify: VerifySection,
}

/// Command-line values that replace config entries for the selected
/// experiment.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub grid: Option<Vec<usize>>,
    pub eta: Option<Vec<f64>>,
    pub freq: Option<Vec<f64>>,
    pub field: Option<u32>,
    pub tol: Option<f64>,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn for_experiment(mut self, experiment: Experiment) -> Self {
        self.experiment = Some(experiment);
        self
    }

    pub fn apply(&mut self, o: &Overrides) -> Result<()> {
        if let Some(out) = &o.out {
            self.run.out = out.clone();
        }
        if let Some(seed) = o.seed {
            self.run.seed = seed;
        }
        match self.experiment {
            Some(Experiment::Solve) => {
                if let Some(g) = &o.grid {
                    self.solve.grid = first(g, "--grid")?;
                }
                if let Some(f) = &o.freq {
                    self.solve.freq = first(f, "--omega")?;
                }
                if let Some(field) = o.field {
                    self.solve.field = field;
                }
                if let Some(tol) = o.tol {
                    self.solve.tol = tol;
                }
            }
            Some(Experiment::PrecondBench) => {
                if let Some(g) = &o.grid {
                    self.precond.grids = g.clone();
                }
                if let Some(f) = &o.freq {
                    self.precond.freqs = f.clone();
                }
                if let Some(field) = o.field {
                    self.precond.fields = vec![field];
                }
                if let Some(tol) = o.tol {
                    self.precond.tol = tol;
                }
            }
            Some(Experiment::StekloffEig) => {
                if let Some(g) = &o.grid {
                    self.stekloff.grid = first(g, "--grid")?;
                    if let Some(&c) = g.get(1) {
                        self.stekloff.cross_check = c;
                    }
                }
                if let Some(e) = &o.eta {
                    self.stekloff.etas = e.clone();
                }
                if let Some(tol) = o.tol {
                    self.stekloff.tol = tol;
                }
            }
            Some(Experiment::Verify) => {
                if let Some(g) = &o.grid {
                    self.verify.grids = g.clone();
                }
                if let Some(e) = &o.eta {
                    self.verify.etas = e.clone();
                }
            }
            None => {}
        }
        self.validate()
    }

    pub fn validate(&self) -> Result<()> {
        let sizes = |name: &str, v: &[usize]| -> Result<()> {
            if v.is_empty() {
                return Err(Error::Config(format!("{name}: empty list")));
            }
            match v.iter().find(|&&n| n < 2) {
                Some(n) => Err(Error::Config(format!("{name}: grid size {n} is below 2"))),
                None => Ok(()),
            }
        };
        let tol = |name: &str, t: f64| -> Result<()> {
            if t > 0.0 && t < 1.0 {
                Ok(())
            } else {
                Err(Error::Config(format!("{name}: tolerance {t} outside (0, 1)")))
            }
        };
        let positive = |name: &str, v: &[f64]| -> Result<()> {
            if v.is_empty() {
                return Err(Error::Config(format!("{name}: empty list")));
            }
            match v.iter().find(|x| !(x.is_finite() && **x > 0.0)) {
                Some(x) => Err(Error::Config(format!("{name}: {x} must be positive"))),
                None => Ok(()),
            }
        };

        sizes("solve.grid", &[self.solve.grid])?;
        tol("solve.tol", self.solve.tol)?;
        positive("solve.freq", &[self.solve.freq])?;
        crate::bench::VelocityField::from_id(self.solve.field)?;

        sizes("precond-bench.grids", &self.precond.grids)?;
        positive("precond-bench.freqs", &self.precond.freqs)?;
        if self.precond.freqs.len() != self.precond.grids.len() {
            return Err(Error::Config(format!(
                "precond-bench: {} frequencies but {} grids (they are paired)",
                self.precond.freqs.len(),
                self.precond.grids.len()
            )));
        }
        tol("precond-bench.tol", self.precond.tol)?;
        if self.precond.fields.is_empty() {
            return Err(Error::Config("precond-bench.fields: empty list".into()));
        }
        for &f in &self.precond.fields {
            crate::bench::VelocityField::from_id(f)?;
        }
        for (name, restart) in [
            ("solve.restart", self.solve.restart),
            ("precond-bench.restart", self.precond.restart),
        ] {
            if restart == 0 {
                return Err(Error::Config(format!("{name} must be at least 1")));
            }
        }

        sizes("stekloff.grid", &[self.stekloff.grid, self.stekloff.cross_check])?;
        positive("stekloff.etas", &self.stekloff.etas)?;
        tol("stekloff.tol", self.stekloff.tol)?;
        tol("stekloff.residual_tol", self.stekloff.residual_tol)?;
        if self.stekloff.how_many == 0 || self.stekloff.how_many >= self.stekloff.max_subspace {
            return Err(Error::Config("stekloff: need 0 < how_many < max_subspace".into()));
        }

        sizes("verify.grids", &self.verify.grids)?;
        sizes("verify.oracle_grid", &[self.verify.oracle_grid])?;
        positive("verify.etas", &self.verify.etas)?;
        if self.verify.draws == 0 {
            return Err(Error::Config("verify.draws must be at least 1".into()));
        }
        Ok(())
    }

    /// First 16 hex digits of the SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).unwrap_or_default();
        let digest = Sha256::digest(json.as_bytes());
        hex::encode(digest)[..16].to_string()
    }
}

fn first<T: Copy>(v: &[T], flag: &str) -> Result<T> {
    v.first()
        .copied()
        .ok_or_else(|| Error::Config(format!("{flag} needs a value")))
}
