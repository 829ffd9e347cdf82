//! Dissipation times from the exact norm identity `‖Tⁿ‖ = exp(−ε·M(n))`.

use std::io::{Read, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arithmin::{MinOptions, MinTable, Variant, DEFAULT_BUDGET};
use crate::error::{Error, Result};
use crate::exact::{integer_kernel, mat_pow, IntMatrix};
use crate::fit::fit_line;
use crate::spectral::{self, cyclotomics_up_to_degree, degeneracy_case, DegeneracyCase};

/// Number of smallest-ε grid points used by the rate fits.
pub const FIT_POINTS: usize = 5;
/// Largest `n` scanned for variants without the `M(n) ≥ n` bound.
pub const DEFAULT_SCAN_CAP: usize = 10_000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    pub epsilon: f64,
    pub alpha: f64,
    /// Noise matrix `B`, row-major, for degenerate noise.
    pub degeneracy: Option<Vec<f64>>,
    /// `ln(1/η)`; stored in log form so the default `η = e⁻¹` is exactly 1.
    pub log_inv_eta: f64,
    /// Enumeration node cap for every minimum computed under this model.
    #[serde(default = "default_budget")]
    pub budget: u64,
}

fn default_budget() -> u64 {
    DEFAULT_BUDGET
}

impl NoiseModel {
    pub fn new(epsilon: f64, alpha: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "epsilon must be positive, got {epsilon}"
            )));
        }
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "alpha must lie in (0, 1], got {alpha}"
            )));
        }
        Ok(Self {
            epsilon,
            alpha,
            degeneracy: None,
            log_inv_eta: 1.0,
            budget: DEFAULT_BUDGET,
        })
    }

    pub fn with_eta(mut self, eta: f64) -> Result<Self> {
        if !(eta > 0.0 && eta < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "eta must lie in (0, 1), got {eta}"
            )));
        }
        self.log_inv_eta = -eta.ln();
        Ok(self)
    }

    pub fn with_log_inv_eta(mut self, c: f64) -> Result<Self> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "ln(1/eta) must be positive, got {c}"
            )));
        }
        self.log_inv_eta = c;
        Ok(self)
    }

    pub fn with_degeneracy(mut self, b: Vec<f64>) -> Self {
        self.degeneracy = Some(b);
        self
    }

    pub fn with_budget(mut self, budget: u64) -> Self {
        self.budget = budget;
        self
    }

    pub fn min_options(&self) -> MinOptions {
        MinOptions {
            budget: self.budget,
            ..MinOptions::default()
        }
    }

    pub fn eta(&self) -> f64 {
        (-self.log_inv_eta).exp()
    }

    pub fn variant(&self) -> Variant {
        match &self.degeneracy {
            Some(b) => Variant::Degenerate(b.clone()),
            None => Variant::FullSum,
        }
    }
}

/// `‖Tⁿ‖` and its logarithm.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OperatorNorm {
    pub norm: f64,
    pub log_norm: f64,
}

fn check_degeneracy(a: &IntMatrix, noise: &NoiseModel) -> Result<()> {
    if let Some(b) = &noise.degeneracy {
        if degeneracy_case(a, b)?.case == DegeneracyCase::NoDissipation {
            return Err(Error::InfiniteDissipation(
                "the noise misses an invariant direction of the dynamics".into(),
            ));
        }
    }
    Ok(())
}

pub fn operator_norm(a: &IntMatrix, noise: &NoiseModel, n: usize) -> Result<OperatorNorm> {
    check_degeneracy(a, noise)?;
    let table = MinTable::new(a, noise.alpha, noise.variant(), noise.min_options());
    operator_norm_with(&table, noise.epsilon, n)
}

pub fn operator_norm_with(table: &MinTable, epsilon: f64, n: usize) -> Result<OperatorNorm> {
    let m = table.get(n)?;
    let log_norm = -epsilon * m.value;
    Ok(OperatorNorm {
        norm: log_norm.exp(),
        log_norm,
    })
}

/// Smallest `n ≥ 1` with `ε·M(n) > ln(1/η)`.
pub fn n_diss(a: &IntMatrix, noise: &NoiseModel) -> Result<usize> {
    check_degeneracy(a, noise)?;
    let table = MinTable::new(a, noise.alpha, noise.variant(), noise.min_options());
    n_diss_with(&table, noise.epsilon, noise.log_inv_eta)
}

/// [`n_diss`] against a shared memo table. For the full sum the search is
/// doubling then bisection, capped by `⌈c/ε⌉ + 1` since `M(n) ≥ n`.
pub fn n_diss_with(table: &MinTable, epsilon: f64, c: f64) -> Result<usize> {
    let dissipated = |n: usize| -> Result<bool> { Ok(epsilon * table.get(n)?.value > c) };
    let cap = match table.variant() {
        Variant::FullSum => (c / epsilon).ceil() as usize + 1,
        _ => DEFAULT_SCAN_CAP,
    };
    let mut lo = 0usize; // known not dissipated (n = 0 is the identity)
    let mut hi = 1usize;
    loop {
        let probe = hi.min(cap);
        if dissipated(probe)? {
            hi = probe;
            break;
        }
        if probe == cap {
            return Err(Error::InfiniteDissipation(format!(
                "threshold not crossed for n ≤ {cap}"
            )));
        }
        lo = probe;
        hi = probe * 2;
    }
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if dissipated(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DissipationClass {
    Simple,
    Logarithmic,
    None,
}

/// Logarithmic iff the map is ergodic.
pub fn classify(a: &IntMatrix) -> DissipationClass {
    if spectral::is_ergodic(a) {
        DissipationClass::Logarithmic
    } else {
        DissipationClass::Simple
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepEntry {
    pub epsilon: f64,
    pub n_diss: usize,
    pub log_norm_at_n_diss: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoarseEntry {
    pub epsilon: f64,
    pub n_diss_coarse: Option<usize>,
    /// The coarse minimum is bounded below the threshold: the coarse time is
    /// infinite while the ordinary one is finite.
    pub diverges: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DissipationReport {
    pub alpha: f64,
    pub variant: String,
    pub log_inv_eta: f64,
    pub entries: Vec<SweepEntry>,
    pub classification: DissipationClass,
    /// `NaN` (JSON `null`) when no fit was made.
    #[serde(rename = "R_diss_fit", with = "crate::fit::nullable")]
    pub r_diss_fit: f64,
    #[serde(rename = "R_diss_predicted", with = "crate::fit::nullable")]
    pub r_diss_predicted: f64,
    #[serde(with = "crate::fit::nullable")]
    pub fit_residual: f64,
    pub fit_points: usize,
    pub coarse: Option<Vec<CoarseEntry>>,
}

/// Dissipation times over a grid of noise levels, sharing one memo table.
pub fn sweep(table: &MinTable, eps_grid: &[f64], c: f64) -> Result<Vec<SweepEntry>> {
    let mut grid = eps_grid.to_vec();
    grid.sort_by(|a, b| b.total_cmp(a));
    grid.par_iter()
        .map(|&eps| {
            let n = n_diss_with(table, eps, c)?;
            Ok(SweepEntry {
                epsilon: eps,
                n_diss: n,
                log_norm_at_n_diss: -eps * table.get(n)?.value,
            })
        })
        .collect()
}

/// `lim M(n)/n` estimated at `N`, with Richardson extrapolation against
/// `N/2` to cancel the `O(1/N)` term.
pub fn limit_m_over_n(table: &MinTable, big_n: usize) -> Result<f64> {
    let at = |n: usize| -> Result<f64> { Ok(table.get(n)?.value / n as f64) };
    let r_n = at(big_n)?;
    if big_n >= 4 {
        let r_half = at(big_n / 2)?;
        Ok(2.0 * r_n - r_half)
    } else {
        Ok(r_n)
    }
}

/// Rate constant fit and prediction over `eps_grid` (at least 5 points).
pub fn r_diss_fit(
    a: &IntMatrix,
    noise: &NoiseModel,
    eps_grid: &[f64],
) -> Result<DissipationReport> {
    if eps_grid.len() < FIT_POINTS {
        return Err(Error::InsufficientData(format!(
            "{} grid points, need at least {FIT_POINTS}",
            eps_grid.len()
        )));
    }
    build_report(a, noise, eps_grid, true)
}

/// Sweep and classification on any nonempty grid; the rate constant is fitted
/// when the grid has at least 5 points, and coarse times are added on request.
pub fn dissipation_report(
    a: &IntMatrix,
    noise: &NoiseModel,
    eps_grid: &[f64],
    coarse: bool,
) -> Result<DissipationReport> {
    if eps_grid.is_empty() {
        return Err(Error::InsufficientData("empty noise grid".into()));
    }
    let mut r = build_report(a, noise, eps_grid, eps_grid.len() >= FIT_POINTS)?;
    if coarse && r.classification != DissipationClass::None {
        r.coarse = Some(coarse_sweep(a, noise, eps_grid)?);
    }
    Ok(r)
}

fn build_report(
    a: &IntMatrix,
    noise: &NoiseModel,
    eps_grid: &[f64],
    fit: bool,
) -> Result<DissipationReport> {
    crate::exact::require_automorphism(a)?;
    let variant = noise.variant();
    let c = noise.log_inv_eta;
    let mut report = DissipationReport {
        alpha: noise.alpha,
        variant: variant.name().into(),
        log_inv_eta: c,
        entries: vec![],
        classification: DissipationClass::None,
        r_diss_fit: f64::NAN,
        r_diss_predicted: f64::NAN,
        fit_residual: f64::NAN,
        fit_points: FIT_POINTS,
        coarse: None,
    };
    if let Some(b) = &noise.degeneracy {
        if degeneracy_case(a, b)?.case == DegeneracyCase::NoDissipation {
            return Ok(report);
        }
    }
    let table = MinTable::new(a, noise.alpha, variant, noise.min_options());
    report.entries = sweep(&table, eps_grid, c)?;
    report.classification = classify(a);
    if !fit {
        return Ok(report);
    }
    let tail = &report.entries[report.entries.len() - FIT_POINTS..];
    match report.classification {
        DissipationClass::Logarithmic => {
            let x: Vec<f64> = tail.iter().map(|e| (1.0 / e.epsilon).ln()).collect();
            let y: Vec<f64> = tail.iter().map(|e| e.n_diss as f64).collect();
            let f = fit_line(&x, &y)?;
            report.r_diss_fit = f.slope;
            report.fit_residual = rms(x.iter().zip(&y).map(|(x, y)| y - f.intercept - f.slope * x));
            report.r_diss_predicted = 1.0 / (2.0 * noise.alpha * spectral::h_hat(a)?);
        }
        _ => {
            let vals: Vec<f64> = tail.iter().map(|e| e.epsilon * e.n_diss as f64).collect();
            let mean = vals.iter().sum::<f64>() / vals.len() as f64;
            report.r_diss_fit = mean;
            report.fit_residual = rms(vals.iter().map(|v| v - mean));
            let big_n = report.entries.iter().map(|e| e.n_diss).max().unwrap();
            report.r_diss_predicted = c / limit_m_over_n(&table, big_n)?;
        }
    }
    Ok(report)
}

fn rms(it: impl Iterator<Item = f64>) -> f64 {
    let v: Vec<f64> = it.collect();
    (v.iter().map(|x| x * x).sum::<f64>() / v.len() as f64).sqrt()
}

/// Upper bound on the coarse minimum for maps with a periodic integer
/// vector `p` (period `m`): `max_r |p|^{2α} + |A^r p|^{2α}`.
pub fn coarse_saturation_bound(a: &IntMatrix, alpha: f64) -> Result<Option<f64>> {
    let p = crate::exact::char_poly(a);
    let Some((m, _)) = cyclotomics_up_to_degree(a.dim())
        .into_iter()
        .find(|(_, phi)| phi.divides(&p))
    else {
        return Ok(None);
    };
    let am = mat_pow(a, m as i64)?;
    let kernel = integer_kernel(&am.sub(&IntMatrix::identity(a.dim())));
    let v = kernel.first().expect("A^m − I is singular");
    let norm = |w: &[num_bigint::BigInt]| -> f64 {
        let s: num_bigint::BigInt = w.iter().map(|x| x * x).sum();
        crate::exact::scaled_to_f64(&s, 0).powf(alpha)
    };
    let mut w = v.clone();
    let mut best: f64 = 0.0;
    for _ in 0..m {
        best = best.max(norm(v) + norm(&w));
        w = a.mul_vec(&w);
    }
    Ok(Some(best))
}

/// Smallest `n ≥ 1` with `ε·M̂(n) > ln(1/η)` for the coarse minimum `M̂`.
pub fn n_diss_coarse(a: &IntMatrix, noise: &NoiseModel) -> Result<usize> {
    let table = MinTable::new(a, noise.alpha, Variant::Coarse, noise.min_options());
    n_diss_coarse_with(&table, noise.epsilon, noise.log_inv_eta, DEFAULT_SCAN_CAP)
}

pub fn n_diss_coarse_with(table: &MinTable, epsilon: f64, c: f64, cap: usize) -> Result<usize> {
    if let Some(bound) = coarse_saturation_bound(table.matrix(), table.alpha())? {
        if epsilon * bound <= c {
            return Err(Error::InfiniteDissipation(format!(
                "coarse minimum stays ≤ {bound} along a periodic orbit"
            )));
        }
    }
    // M̂ need not be monotone: linear scan
    for n in 1..=cap {
        if epsilon * table.get(n)?.value > c {
            return Ok(n);
        }
    }
    Err(Error::InfiniteDissipation(format!(
        "coarse threshold not crossed for n ≤ {cap}"
    )))
}

/// Coarse times on a grid, flagging saturation.
pub fn coarse_sweep(
    a: &IntMatrix,
    noise: &NoiseModel,
    eps_grid: &[f64],
) -> Result<Vec<CoarseEntry>> {
    let table = MinTable::new(a, noise.alpha, Variant::Coarse, noise.min_options());
    let mut grid = eps_grid.to_vec();
    grid.sort_by(|a, b| b.total_cmp(a));
    grid.par_iter()
        .map(
            |&eps| match n_diss_coarse_with(&table, eps, noise.log_inv_eta, DEFAULT_SCAN_CAP) {
                Ok(n) => Ok(CoarseEntry {
                    epsilon: eps,
                    n_diss_coarse: Some(n),
                    diverges: false,
                }),
                Err(Error::InfiniteDissipation(_)) => Ok(CoarseEntry {
                    epsilon: eps,
                    n_diss_coarse: None,
                    diverges: true,
                }),
                Err(e) => Err(e),
            },
        )
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RobustnessRow {
    pub epsilon: f64,
    pub eta_ref: f64,
    pub eta: f64,
    pub n_ref: usize,
    pub n: usize,
    pub ratio: f64,
    /// `k = ⌈ln η̃ / ln η⌉` with the larger log on top.
    pub bound_k: f64,
    pub within_bound: bool,
}

/// `n_diss(η′)/n_diss(η)` for every pair of thresholds and every `ε`.
pub fn threshold_robustness(
    a: &IntMatrix,
    alpha: f64,
    eps_grid: &[f64],
    etas: &[f64],
) -> Result<Vec<RobustnessRow>> {
    for &eta in etas {
        if !(eta > 0.0 && eta < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "eta must lie in (0, 1), got {eta}"
            )));
        }
    }
    let table = MinTable::new(a, alpha, Variant::FullSum, MinOptions::default());
    let mut rows = Vec::new();
    for &eps in eps_grid {
        let ns = etas
            .iter()
            .map(|&eta| n_diss_with(&table, eps, -eta.ln()))
            .collect::<Result<Vec<_>>>()?;
        for i in 0..etas.len() {
            for j in 0..etas.len() {
                if i == j && etas.len() > 1 {
                    continue;
                }
                let (li, lj) = (etas[i].ln(), etas[j].ln());
                let k = (li / lj).max(lj / li).ceil();
                let ratio = ns[j] as f64 / ns[i] as f64;
                rows.push(RobustnessRow {
                    epsilon: eps,
                    eta_ref: etas[i],
                    eta: etas[j],
                    n_ref: ns[i],
                    n: ns[j],
                    ratio,
                    bound_k: k,
                    within_bound: ratio >= 1.0 / k && ratio <= k,
                });
            }
        }
    }
    Ok(rows)
}

pub fn write_sweep_csv<W: Write>(entries: &[SweepEntry], w: W) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    let io = |e: csv::Error| Error::InvalidParameter(format!("csv: {e}"));
    wr.write_record(["epsilon", "n_diss", "log_norm_at_n_diss"])
        .map_err(io)?;
    for e in entries {
        wr.write_record([
            format!("{:e}", e.epsilon),
            e.n_diss.to_string(),
            format!("{}", e.log_norm_at_n_diss),
        ])
        .map_err(io)?;
    }
    wr.flush()
        .map_err(|e| Error::InvalidParameter(format!("csv: {e}")))
}

pub fn read_sweep_csv<R: Read>(r: R) -> Result<Vec<SweepEntry>> {
    let mut rd = csv::Reader::from_reader(r);
    let mut out = Vec::new();
    for rec in rd.records() {
        let rec = rec.map_err(|e| Error::Parse(format!("csv: {e}")))?;
        let get = |i: usize| -> Result<&str> {
            rec.get(i)
                .ok_or_else(|| Error::Parse(format!("missing column {i}")))
        };
        let bad = |s: &str| Error::Parse(format!("bad number {s:?}"));
        out.push(SweepEntry {
            epsilon: get(0)?.parse().map_err(|_| bad(&rec[0]))?,
            n_diss: get(1)?.parse().map_err(|_| bad(&rec[1]))?,
            log_norm_at_n_diss: get(2)?.parse().map_err(|_| bad(&rec[2]))?,
        });
    }
    Ok(out)
}

/// Geometric grid from `start` down to `stop` with `points` values.
pub fn geometric_grid(start: f64, stop: f64, points: usize) -> Result<Vec<f64>> {
    if !(start > 0.0 && stop > 0.0) || points < 2 || stop >= start {
        return Err(Error::InvalidParameter(format!(
            "grid needs 0 < stop < start and at least 2 points, got {start}:{stop}:{points}"
        )));
    }
    // base-10 exponents keep decade grids on the exact literals
    let (a, b) = (start.log10(), stop.log10());
    let step = (b - a) / (points - 1) as f64;
    Ok((0..points)
        .map(|i| match i {
            0 => start,
            _ if i + 1 == points => stop,
            _ => 10f64.powf(a + step * i as f64),
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cat() -> IntMatrix {
        IntMatrix::from_i64([[2, 1], [1, 1]])
    }

    fn shear() -> IntMatrix {
        IntMatrix::from_i64([[1, 1], [0, 1]])
    }

    #[test]
    fn operator_norm_examples() {
        let id = IntMatrix::identity(2);
        let r = operator_norm(&id, &NoiseModel::new(0.01, 1.0).unwrap(), 100).unwrap();
        assert!((r.log_norm + 1.0).abs() < 1e-15);
        let r = operator_norm(&cat(), &NoiseModel::new(1.0, 1.0).unwrap(), 1).unwrap();
        assert_eq!(r.log_norm, -1.0);
        let r = operator_norm(&cat(), &NoiseModel::new(1.0, 1.0).unwrap(), 3).unwrap();
        assert_eq!(r.log_norm, -8.0);
    }

    #[test]
    fn n_diss_examples() {
        let noise = NoiseModel::new(0.01, 1.0).unwrap();
        assert_eq!(n_diss(&IntMatrix::identity(2), &noise).unwrap(), 101);
        assert_eq!(n_diss(&shear(), &noise).unwrap(), 101);
        // exact table: M(15) = 710647, M(16) = 1860498 straddle 10⁶
        let table = MinTable::new(&cat(), 1.0, Variant::FullSum, MinOptions::default());
        assert!(table.get(15).unwrap().value <= 1e6);
        assert!(table.get(16).unwrap().value > 1e6);
        let noise = NoiseModel::new(1e-6, 1.0).unwrap();
        assert_eq!(n_diss(&cat(), &noise).unwrap(), 16);
    }

    #[test]
    fn classification_examples() {
        assert_eq!(classify(&cat()), DissipationClass::Logarithmic);
        assert_eq!(classify(&shear()), DissipationClass::Simple);
        assert_eq!(
            classify(&IntMatrix::from_i64([[0, -1], [1, 0]])),
            DissipationClass::Simple
        );
    }

    #[test]
    fn identity_is_simple_with_unit_rate() {
        let grid = geometric_grid(1e-2, 1e-4, 5).unwrap();
        let r = r_diss_fit(
            &IntMatrix::identity(2),
            &NoiseModel::new(1.0, 1.0).unwrap(),
            &grid,
        )
        .unwrap();
        assert_eq!(r.classification, DissipationClass::Simple);
        assert!((r.r_diss_fit - 1.0).abs() < 0.02);
        assert!((r.r_diss_predicted - 1.0).abs() < 1e-12);
    }

    #[test]
    fn coarse_examples() {
        let noise = NoiseModel::new(1e-3, 1.0).unwrap();
        assert!(matches!(
            n_diss_coarse(&IntMatrix::identity(2), &noise),
            Err(Error::InfiniteDissipation(_))
        ));
        assert_eq!(
            n_diss_coarse(&cat(), &NoiseModel::new(1.0, 1.0).unwrap()).unwrap(),
            1
        );
        let noise = NoiseModel::new(1e-6, 1.0).unwrap();
        let a = n_diss(&cat(), &noise).unwrap() as i64;
        let b = n_diss_coarse(&cat(), &noise).unwrap() as i64;
        assert!((a - b).abs() <= 2, "{a} vs {b}");
    }

    #[test]
    fn threshold_examples() {
        let rows = threshold_robustness(&cat(), 1.0, &[1e-6], &[0.5, (-1f64).exp(), 0.1]).unwrap();
        assert!(rows
            .iter()
            .all(|r| r.within_bound && r.ratio >= 0.25 && r.ratio <= 4.0));
        let id = IntMatrix::identity(2);
        let rows =
            threshold_robustness(&id, 1.0, &[0.01], &[(-1f64).exp(), (-2f64).exp()]).unwrap();
        let r = rows.iter().find(|r| r.eta_ref > r.eta).unwrap();
        assert_eq!((r.n_ref, r.n), (101, 201));
        let rows = threshold_robustness(&cat(), 1.0, &[1e-3], &[0.3]).unwrap();
        assert_eq!(rows[0].ratio, 1.0);
    }

    #[test]
    fn sweep_csv_round_trip() {
        let table = MinTable::new(&cat(), 1.0, Variant::FullSum, MinOptions::default());
        let e = sweep(&table, &geometric_grid(1e-2, 1e-5, 4).unwrap(), 1.0).unwrap();
        let mut buf = Vec::new();
        write_sweep_csv(&e, &mut buf).unwrap();
        assert!(String::from_utf8_lossy(&buf).starts_with("epsilon,n_diss,log_norm_at_n_diss\n"));
        assert_eq!(read_sweep_csv(&buf[..]).unwrap(), e);
    }

    #[test]
    fn grids() {
        let g = geometric_grid(1e-3, 1e-9, 7).unwrap();
        assert_eq!(g.len(), 7);
        assert!((g[1] - 1e-4).abs() < 1e-16);
        assert_eq!(g, vec![1e-3, 1e-4, 1e-5, 1e-6, 1e-7, 1e-8, 1e-9]);
        assert_eq!(g[6], 1e-9);
        assert!(geometric_grid(1e-9, 1e-3, 7).is_err());
    }

    #[test]
    fn reports_without_a_fit_survive_json() {
        let cat = IntMatrix::from_i64([[2, 1], [1, 1]]);
        let noise = NoiseModel::new(1.0, 1.0)
            .unwrap()
            .with_degeneracy(crate::spectral::cat_unstable_projector());
        let r = r_diss_fit(&cat, &noise, &geometric_grid(1e-2, 1e-4, 5).unwrap()).unwrap();
        assert_eq!(r.classification, DissipationClass::None);
        let js = serde_json::to_string(&r).unwrap();
        assert!(js.contains("\"R_diss_fit\":null"));
        let back: DissipationReport = serde_json::from_str(&js).unwrap();
        assert!(back.r_diss_fit.is_nan() && back.entries.is_empty());
    }

    #[test]
    fn short_grids_give_a_sweep_without_a_fit() {
        let id = IntMatrix::identity(2);
        let grid = geometric_grid(1e-2, 1e-4, 3).unwrap();
        let r = dissipation_report(&id, &NoiseModel::new(1.0, 1.0).unwrap(), &grid, true).unwrap();
        assert_eq!(r.classification, DissipationClass::Simple);
        assert!(r.r_diss_fit.is_nan());
        for e in &r.entries {
            assert!((e.epsilon * e.n_diss as f64 - 1.0).abs() < 0.02);
        }
        // identity: the coarse sum |k|² + |k|² never crosses the threshold
        assert!(r.coarse.unwrap().iter().all(|c| c.diverges));
    }
}
