use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use toruslab::arithmin::{min_curve, MinOptions, Variant};
use toruslab::dissipation::dissipation_report;
use toruslab::dynamo::{dynamo_report, write_curve_csv, DynamoOptions, DEFAULT_N_MAX};
use toruslab::fourier_sim::{write_trajectory_csv, DensityState, ModeBox, TruncatedOperator};
use toruslab::spectral::{
    classify_affine, degeneracy_case, spectral_report, ToralMap, DEFAULT_HEIGHT_BOUND,
};
use toruslab::IntMatrix;

use crate::config::{Opts, DEFAULT_SIM_STEPS};
use crate::error::CliError;

/// What a command produced: text for stdout and the files for the output
/// directory.
pub struct Output {
    pub stdout: String,
    pub files: Vec<(&'static str, Vec<u8>)>,
}

impl Output {
    /// A JSON document, printed and saved as `report.json`.
    fn json<T: Serialize>(v: &T) -> Result<Self, CliError> {
        let text = serde_json::to_string_pretty(v)? + "\n";
        Ok(Self {
            files: vec![("report.json", text.clone().into_bytes())],
            stdout: text,
        })
    }

    fn with_file(mut self, name: &'static str, data: Vec<u8>) -> Self {
        self.files.push((name, data));
        self
    }

    /// Writes the files into `dir`, creating it if needed.
    pub fn write_to(&self, dir: &Path) -> Result<(), CliError> {
        std::fs::create_dir_all(dir)?;
        for (name, data) in &self.files {
            let mut f = BufWriter::new(File::create(dir.join(name))?);
            f.write_all(data)?;
            f.flush()?;
        }
        Ok(())
    }
}

/// The wave-vector action `A = Fᵀ` of the noisy Koopman operator.
fn wave_action(f: &IntMatrix) -> IntMatrix {
    f.transpose()
}

pub fn analyze(o: &Opts) -> Result<Output, CliError> {
    Output::json(&spectral_report(&o.matrix()?)?)
}

pub fn dissipation(o: &Opts) -> Result<Output, CliError> {
    let f = o.matrix()?;
    let grid = o.grid_or_eps()?;
    let noise = o.noise(grid[0], f.dim())?;
    let report = dissipation_report(&wave_action(&f), &noise, &grid, o.coarse)?;
    let mut csv = Vec::new();
    toruslab::dissipation::write_sweep_csv(&report.entries, &mut csv)?;
    Ok(Output::json(&report)?.with_file("sweep.csv", csv))
}

pub fn dynamo(o: &Opts) -> Result<Output, CliError> {
    let f = o.matrix()?;
    let noise = o.noise(o.eps()?, f.dim())?;
    let opts = DynamoOptions {
        n_max: o.n_max(DEFAULT_N_MAX)?,
        eps_grid: o.eps_grid()?.unwrap_or_default(),
        ..DynamoOptions::default()
    };
    let report = dynamo_report(&f, &noise, &opts)?;
    let mut csv = Vec::new();
    write_curve_csv(&report.entries, &mut csv)?;
    Ok(Output::json(&report)?.with_file("curve.csv", csv))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormRow {
    pub n: usize,
    pub estimate: f64,
    pub analytic: f64,
    pub valid: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimulationSummary {
    pub cutoff: usize,
    pub modes: usize,
    pub steps: usize,
    pub norms: Vec<NormRow>,
    /// Largest `|estimate − analytic|` over steps whose minimizer orbit fits.
    pub max_valid_deviation: Option<f64>,
    pub entropy_start: f64,
    pub entropy_end: f64,
    pub l2_fluct_end: f64,
    pub dropped_mass: f64,
}

fn initial_density(o: &Opts, mbox: &ModeBox) -> Result<DensityState, CliError> {
    let d = mbox.dim();
    let preset = o.f0.as_deref().unwrap_or("cos1");
    let mode: Vec<i64> = match preset {
        "uniform" => return Ok(DensityState::uniform(mbox)),
        "cos1" => (0..d).map(|i| i64::from(i == 0)).collect(),
        _ => {
            let Some(list) = preset.strip_prefix("cos:") else {
                return Err(CliError::Config(format!("unknown --f0 preset {preset:?}")));
            };
            let k = list
                .split(',')
                .map(|s| {
                    s.trim()
                        .parse::<i64>()
                        .map_err(|_| CliError::Config(format!("bad --f0 mode {s:?}")))
                })
                .collect::<Result<Vec<_>, _>>()?;
            if k.len() != d || k.iter().all(|&x| x == 0) {
                return Err(CliError::Config(format!(
                    "--f0 mode must be a nonzero vector of length {d}"
                )));
            }
            k
        }
    };
    Ok(DensityState::cosine(mbox, &mode, 1.0)?)
}

pub fn simulate(o: &Opts) -> Result<Output, CliError> {
    let f = o.matrix()?;
    let d = f.dim();
    let noise = o.noise(o.eps()?, d)?;
    let cutoff = o.cutoff(d)?;
    let steps = o.n_max(DEFAULT_SIM_STEPS)?;
    let t = TruncatedOperator::new(ToralMap::new(f, o.shift()?)?, noise, cutoff)?;
    let f0 = initial_density(o, t.mode_box())?;
    let rows = t.evolve_density(&f0, steps)?;
    let norms = (1..=steps)
        .map(|n| {
            let e = t.norm_estimate(n)?;
            Ok(NormRow {
                n,
                estimate: e.estimate,
                analytic: e.analytic,
                valid: e.valid,
            })
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let max_valid_deviation = norms
        .iter()
        .filter(|r| r.valid)
        .map(|r| (r.estimate - r.analytic).abs())
        .reduce(f64::max);
    let (first, last) = (rows[0], rows[rows.len() - 1]);
    let summary = SimulationSummary {
        cutoff,
        modes: t.mode_box().len(),
        steps,
        norms: norms.clone(),
        max_valid_deviation,
        entropy_start: first.bg_entropy,
        entropy_end: last.bg_entropy,
        l2_fluct_end: last.l2_fluct,
        dropped_mass: last.dropped_mass,
    };
    let mut traj = Vec::new();
    write_trajectory_csv(&rows, &mut traj)?;
    Ok(Output::json(&summary)?
        .with_file("trajectory.csv", traj)
        .with_file("norms.csv", norm_csv(&norms)?))
}

fn norm_csv(rows: &[NormRow]) -> Result<Vec<u8>, CliError> {
    let mut out = Vec::new();
    writeln!(out, "n,estimate,analytic,valid")?;
    for r in rows {
        writeln!(out, "{},{},{},{}", r.n, r.estimate, r.analytic, r.valid)?;
    }
    Ok(out)
}

/// `M(n)` for the dissipation objective, as CSV on stdout.
pub fn mincurve(o: &Opts) -> Result<Output, CliError> {
    let f = o.matrix()?;
    let n_max = o.n_max(DEFAULT_SIM_STEPS)?;
    let variant = match (o.coarse, o.degeneracy(f.dim())?) {
        (true, Some(_)) => {
            return Err(CliError::Config(
                "--coarse and --degenerate-B exclude each other".into(),
            ))
        }
        (true, None) => Variant::Coarse,
        (false, Some(b)) => Variant::Degenerate(b),
        (false, None) => Variant::FullSum,
    };
    let opts = MinOptions {
        budget: o.budget()?,
        ..MinOptions::default()
    };
    let curve = min_curve(&wave_action(&f), 1..=n_max, o.alpha()?, &variant, &opts)?;
    let mut csv = Vec::new();
    curve.write_csv(&mut csv)?;
    Ok(Output {
        stdout: String::from_utf8(csv.clone()).expect("csv is utf-8"),
        files: vec![("mincurve.csv", csv)],
    })
}

pub fn classify_affine_cmd(o: &Opts) -> Result<Output, CliError> {
    let map = ToralMap::new(o.matrix()?, o.shift()?)?;
    Output::json(&classify_affine(&map, DEFAULT_HEIGHT_BOUND)?)
}

pub fn degeneracy_check(o: &Opts) -> Result<Output, CliError> {
    let f = o.matrix()?;
    let b = o
        .degeneracy(f.dim())?
        .ok_or_else(|| CliError::Config("missing --degenerate-B".into()))?;
    Output::json(&degeneracy_case(&wave_action(&f), &b)?)
}
