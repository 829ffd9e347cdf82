//! Command-line options, the TOML config file, and their validated merge.

use std::path::{Path, PathBuf};

use clap::Args;
use serde::Deserialize;
use toruslab::dissipation::{geometric_grid, NoiseModel};
use toruslab::exact::IntMatrix;
use toruslab::spectral::{cat_unstable_projector, Shift};

use crate::error::CliError;

pub const DEFAULT_ALPHA: f64 = 1.0;
pub const DEFAULT_SIM_STEPS: usize = 20;

/// Options shared by every command. Each may also be set in the config file
/// under the same name as the long flag; flags win over the file.
#[derive(Args, Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct Opts {
    /// Integer matrix of the map F, rows separated by ';' (e.g. "2,1;1,1")
    #[arg(short = 'm', long)]
    pub matrix: Option<String>,

    /// Translation part of an affine map: rationals ("1/2,1/3") or reals ("0.1,sqrt2")
    #[arg(short = 'c', long, allow_hyphen_values = true)]
    pub shift: Option<String>,

    /// Noise exponent α in (0, 1] [default: 1]
    #[arg(short = 'a', long)]
    pub alpha: Option<f64>,

    /// Noise strength ε > 0
    #[arg(short = 'e', long)]
    pub eps: Option<f64>,

    /// Noise grid, geometric "start:stop:points" or a decreasing list "1e-2,1e-3"
    #[arg(long)]
    pub eps_grid: Option<String>,

    /// Dissipation threshold η in (0, 1) [default: e⁻¹]
    #[arg(long)]
    pub eta: Option<f64>,

    /// Also compute coarse-grained dissipation times
    #[arg(long)]
    #[serde(default)]
    pub coarse: bool,

    /// Degenerate noise matrix B, real rows separated by ';', or the preset
    /// "cat-unstable" (projector onto the unstable direction of the cat map)
    #[arg(long = "degenerate-B", alias = "degenerate-b")]
    #[serde(alias = "degenerate-B")]
    pub degenerate_b: Option<String>,

    /// Fourier cutoff K of the simulation box [default: 64 in 2D, 16 in 3D, 6 above]
    #[arg(short = 'K', long)]
    pub cutoff: Option<usize>,

    /// Number of steps [default: 60 for dynamo, 20 for simulate and mincurve]
    #[arg(short = 'n', long)]
    pub n_max: Option<usize>,

    /// Directory that receives the JSON report and CSV tables
    #[arg(short = 'o', long)]
    pub out: Option<PathBuf>,

    /// Node budget of each lattice enumeration [default: 100000000]
    #[arg(long)]
    pub budget: Option<u64>,

    /// Initial density for simulate: "cos1" (1 + cos 2πx₁), "uniform", or
    /// "cos:k1,k2,..." [default: cos1]
    #[arg(long)]
    pub f0: Option<String>,
}

impl Opts {
    /// Fills every unset option from `file`.
    pub fn merged(self, file: Opts) -> Opts {
        Opts {
            matrix: self.matrix.or(file.matrix),
            shift: self.shift.or(file.shift),
            alpha: self.alpha.or(file.alpha),
            eps: self.eps.or(file.eps),
            eps_grid: self.eps_grid.or(file.eps_grid),
            eta: self.eta.or(file.eta),
            coarse: self.coarse || file.coarse,
            degenerate_b: self.degenerate_b.or(file.degenerate_b),
            cutoff: self.cutoff.or(file.cutoff),
            n_max: self.n_max.or(file.n_max),
            out: self.out.or(file.out),
            budget: self.budget.or(file.budget),
            f0: self.f0.or(file.f0),
        }
    }

    pub fn matrix(&self) -> Result<IntMatrix, CliError> {
        let text = self
            .matrix
            .as_deref()
            .ok_or_else(|| CliError::Config("missing --matrix".into()))?;
        Ok(IntMatrix::parse(text)?)
    }

    pub fn shift(&self) -> Result<Option<Shift>, CliError> {
        self.shift
            .as_deref()
            .map(|s| Shift::parse(s).map_err(CliError::from))
            .transpose()
    }

    pub fn alpha(&self) -> Result<f64, CliError> {
        let a = self.alpha.unwrap_or(DEFAULT_ALPHA);
        if !(a > 0.0 && a <= 1.0) {
            return Err(CliError::Config(format!(
                "--alpha must lie in (0, 1], got {a}"
            )));
        }
        Ok(a)
    }

    pub fn eps(&self) -> Result<f64, CliError> {
        let e = self
            .eps
            .ok_or_else(|| CliError::Config("missing --eps".into()))?;
        check_eps(e)?;
        Ok(e)
    }

    pub fn eps_grid(&self) -> Result<Option<Vec<f64>>, CliError> {
        self.eps_grid.as_deref().map(parse_grid).transpose()
    }

    /// The grid, or the single `--eps` as a one-point grid.
    pub fn grid_or_eps(&self) -> Result<Vec<f64>, CliError> {
        match self.eps_grid()? {
            Some(g) => Ok(g),
            None if self.eps.is_some() => Ok(vec![self.eps()?]),
            None => Err(CliError::Config("missing --eps-grid".into())),
        }
    }

    pub fn budget(&self) -> Result<u64, CliError> {
        match self.budget {
            Some(0) => Err(CliError::Config("--budget must be positive".into())),
            Some(b) => Ok(b),
            None => Ok(toruslab::arithmin::DEFAULT_BUDGET),
        }
    }

    pub fn cutoff(&self, d: usize) -> Result<usize, CliError> {
        match self.cutoff {
            Some(0) => Err(CliError::Config("--cutoff must be at least 1".into())),
            Some(k) => Ok(k),
            None => Ok(toruslab::fourier_sim::default_cutoff(d)),
        }
    }

    pub fn n_max(&self, default: usize) -> Result<usize, CliError> {
        match self.n_max {
            Some(0) => Err(CliError::Config("--n-max must be at least 1".into())),
            Some(n) => Ok(n),
            None => Ok(default),
        }
    }

    /// Row-major `B` checked against the dimension `d`.
    pub fn degeneracy(&self, d: usize) -> Result<Option<Vec<f64>>, CliError> {
        let Some(text) = self.degenerate_b.as_deref() else {
            return Ok(None);
        };
        let b = if text == "cat-unstable" {
            if d != 2 {
                return Err(CliError::Config("the cat-unstable preset is 2×2".into()));
            }
            cat_unstable_projector()
        } else {
            parse_real_matrix(text)?
        };
        if b.len() != d * d {
            return Err(CliError::Config(format!(
                "--degenerate-B has {} entries, expected {}",
                b.len(),
                d * d
            )));
        }
        Ok(Some(b))
    }

    /// Noise model at strength `epsilon` carrying α, η, `B` and the budget.
    pub fn noise(&self, epsilon: f64, d: usize) -> Result<NoiseModel, CliError> {
        let mut noise = NoiseModel::new(epsilon, self.alpha()?)?.with_budget(self.budget()?);
        if let Some(eta) = self.eta {
            if !(eta > 0.0 && eta < 1.0) {
                return Err(CliError::Config(format!(
                    "--eta must lie in (0, 1), got {eta}"
                )));
            }
            noise = noise.with_eta(eta)?;
        }
        if let Some(b) = self.degeneracy(d)? {
            noise = noise.with_degeneracy(b);
        }
        Ok(noise)
    }
}

fn check_eps(e: f64) -> Result<(), CliError> {
    if !(e > 0.0 && e.is_finite()) {
        return Err(CliError::Config(format!(
            "noise strength must be positive, got {e}"
        )));
    }
    Ok(())
}

/// `"start:stop:points"` or a comma list; the result is strictly decreasing.
pub fn parse_grid(text: &str) -> Result<Vec<f64>, CliError> {
    let bad = |m: String| CliError::Config(format!("bad --eps-grid {text:?}: {m}"));
    let grid = if text.contains(':') {
        let parts: Vec<&str> = text.split(':').map(str::trim).collect();
        let [start, stop, points] = parts[..] else {
            return Err(bad("expected start:stop:points".into()));
        };
        let start: f64 = start.parse().map_err(|_| bad(format!("start {start:?}")))?;
        let stop: f64 = stop.parse().map_err(|_| bad(format!("stop {stop:?}")))?;
        let points: usize = points
            .parse()
            .map_err(|_| bad(format!("points {points:?}")))?;
        geometric_grid(start, stop, points).map_err(|e| bad(e.to_string()))?
    } else {
        text.split(',')
            .map(|s| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|_| bad(format!("entry {s:?}")))
            })
            .collect::<Result<Vec<_>, _>>()?
    };
    for &e in &grid {
        check_eps(e)?;
    }
    if grid.windows(2).any(|w| w[1] >= w[0]) {
        return Err(bad("values must be strictly decreasing".into()));
    }
    Ok(grid)
}

fn parse_real_matrix(text: &str) -> Result<Vec<f64>, CliError> {
    let rows: Vec<Vec<f64>> = text
        .split(';')
        .map(|row| {
            row.split(',')
                .map(|s| {
                    s.trim()
                        .parse::<f64>()
                        .map_err(|_| CliError::Config(format!("bad matrix entry {s:?}")))
                })
                .collect()
        })
        .collect::<Result<_, _>>()?;
    let d = rows.len();
    if rows.iter().any(|r| r.len() != d) {
        return Err(CliError::Config(format!(
            "noise matrix {text:?} is not square"
        )));
    }
    Ok(rows.concat())
}

pub fn read_config_file(path: &Path) -> Result<Opts, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

/// Worker count from `TORUSLAB_THREADS`, if set.
pub fn thread_limit(var: Option<String>) -> Result<Option<usize>, CliError> {
    match var {
        None => Ok(None),
        Some(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(CliError::Config(format!(
                "TORUSLAB_THREADS must be a positive integer, got {v:?}"
            ))),
        },
    }
}
