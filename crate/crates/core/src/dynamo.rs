//! Kinematic dynamo time scales for toral automorphisms.
//!
//! The noisy push-forward of a vector field under `F` satisfies
//! `‖Pⁿ‖ = exp(−ε·M(n; A))·‖Fⁿ‖₂` with `A = (F⁻¹)ᵀ`, so every quantity here
//! comes from the exact minimum table and exact matrix powers.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::arithmin::PrefixScan;
use crate::dissipation::NoiseModel;
use crate::error::{Error, Result};
use crate::exact::{inverse, ln_operator_two_norm, require_automorphism, IntMatrix};
use crate::fit::fit_line;
use crate::spectral;

/// Consecutive decreases required before a peak is accepted.
pub const DEFAULT_WINDOW: usize = 5;
/// Default scan length for the growth-rate fit.
pub const DEFAULT_N_MAX: usize = 60;

/// `A = (F⁻¹)ᵀ`, the wave-vector map of the push-forward.
pub fn wave_map(f: &IntMatrix) -> Result<IntMatrix> {
    Ok(inverse(f)?.transpose())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PushStep {
    pub n: usize,
    pub log_push_norm: f64,
    /// `−ε·M(n) + n·ln ρ_F`
    pub envelope: f64,
}

/// Iterates `n ↦ ln ‖Pⁿ‖` from `n = 0`.
pub struct PushScanner {
    f: IntMatrix,
    power: IntMatrix,
    mins: PrefixScan,
    epsilon: f64,
    ln_rho: f64,
    n: usize,
}

impl PushScanner {
    pub fn new(f: &IntMatrix, noise: &NoiseModel) -> Result<Self> {
        require_automorphism(f)?;
        if noise.degeneracy.is_some() {
            return Err(Error::InvalidParameter(
                "dynamo scans take isotropic noise only".into(),
            ));
        }
        Ok(Self {
            f: f.clone(),
            power: IntMatrix::identity(f.dim()),
            mins: PrefixScan::new(&wave_map(f)?, noise.alpha, noise.min_options()),
            epsilon: noise.epsilon,
            ln_rho: spectral::spectral_radius(f)?.ln(),
            n: 0,
        })
    }

    /// The next step; the first call returns `n = 0`.
    pub fn step(&mut self) -> Result<PushStep> {
        if self.n == 0 {
            self.n = 1;
            return Ok(PushStep {
                n: 0,
                log_push_norm: 0.0,
                envelope: 0.0,
            });
        }
        let n = self.n;
        self.n += 1;
        self.power = &self.power * &self.f;
        let m = self.mins.next_min()?.value;
        Ok(PushStep {
            n,
            log_push_norm: -self.epsilon * m + ln_operator_two_norm(&self.power),
            envelope: -self.epsilon * m + n as f64 * self.ln_rho,
        })
    }
}

/// `ln ‖Pⁿ‖` for a single `n ≥ 1`.
pub fn push_norm(f: &IntMatrix, noise: &NoiseModel, n: usize) -> Result<f64> {
    if n == 0 {
        return Ok(0.0);
    }
    require_automorphism(f)?;
    let inst = crate::arithmin::MinInstance::full_sum(&wave_map(f)?, n, noise.alpha);
    let m = crate::arithmin::min_sum(&inst, &noise.min_options())?.value;
    let fn_ = crate::exact::mat_pow(f, n as i64)?;
    Ok(-noise.epsilon * m + ln_operator_two_norm(&fn_))
}

/// `ln ‖Pⁿ‖` for `n = 0..=n_max`.
pub fn push_curve(f: &IntMatrix, noise: &NoiseModel, n_max: usize) -> Result<Vec<PushStep>> {
    let mut sc = PushScanner::new(f, noise)?;
    (0..=n_max).map(|_| sc.step()).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DynamoClass {
    FastDynamo,
    SlowDynamo,
    AntiDynamo,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateEstimate {
    /// Slope of `ln ‖Pⁿ‖` over the second half of the scan.
    pub fitted: f64,
    /// `ln ρ_F − ε·lim M(n)/n` for nonergodic maps.
    pub predicted: Option<f64>,
    /// Ergodic maps: `ln ‖Pⁿ‖/n → −∞`.
    pub divergent_negative: bool,
}

/// Growth rate `lim ln ‖Pⁿ‖ / n` estimated on `1..=n_max`.
pub fn dynamo_rate(f: &IntMatrix, noise: &NoiseModel, n_max: usize) -> Result<RateEstimate> {
    let curve = push_curve(f, noise, n_max)?;
    rate_from_curve(f, noise, &curve)
}

fn rate_from_curve(f: &IntMatrix, noise: &NoiseModel, curve: &[PushStep]) -> Result<RateEstimate> {
    let n_max = curve.len().saturating_sub(1);
    if n_max < 10 {
        return Err(Error::InvalidParameter(format!(
            "n_max must be at least 10, got {n_max}"
        )));
    }
    let half = &curve[n_max / 2..];
    let x: Vec<f64> = half.iter().map(|s| s.n as f64).collect();
    let y: Vec<f64> = half.iter().map(|s| s.log_push_norm).collect();
    let fitted = fit_line(&x, &y)?.slope;
    if spectral::is_ergodic(f) {
        return Ok(RateEstimate {
            fitted,
            predicted: None,
            divergent_negative: true,
        });
    }
    // M(n) = (envelope − n ln ρ)/(−ε); recover it for the limit estimate
    let ln_rho = spectral::spectral_radius(f)?.ln();
    let m_over_n = |s: &PushStep| (s.n as f64 * ln_rho - s.envelope) / noise.epsilon / s.n as f64;
    let last = &curve[n_max];
    let lim = if n_max >= 4 {
        2.0 * m_over_n(last) - m_over_n(&curve[n_max / 2])
    } else {
        m_over_n(last)
    };
    Ok(RateEstimate {
        fitted,
        predicted: Some(ln_rho - noise.epsilon * lim),
        divergent_negative: false,
    })
}

fn classify_rate(rate: &RateEstimate) -> DynamoClass {
    if rate.divergent_negative {
        return DynamoClass::AntiDynamo;
    }
    let r = rate.predicted.unwrap_or(rate.fitted);
    if r > 1e-12 {
        DynamoClass::FastDynamo
    } else if r < -1e-12 {
        DynamoClass::AntiDynamo
    } else {
        DynamoClass::SlowDynamo
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PeakScan {
    pub entries: Vec<PushStep>,
    pub n_p: usize,
    pub log_peak: f64,
    /// Largest scanned `n` with `‖Pⁿ‖ > e`.
    pub n_th: Option<usize>,
    pub cap_reached: bool,
}

/// Scan cap for decaying regimes: ten times the longest simple dissipation
/// time plus a margin.
fn default_cap(epsilon: f64) -> usize {
    10 * (1.0 / epsilon).ceil().min(1e7) as usize + 100
}

/// Scans until the norm has decreased `window` times in a row while the
/// envelope decreases; with `through_threshold` the scan continues until the
/// norm is back below `e`.
pub fn scan_peak(
    f: &IntMatrix,
    noise: &NoiseModel,
    window: usize,
    through_threshold: bool,
    cap: Option<usize>,
) -> Result<PeakScan> {
    let cap = cap.unwrap_or_else(|| default_cap(noise.epsilon));
    let mut sc = PushScanner::new(f, noise)?;
    let mut entries: Vec<PushStep> = Vec::new();
    let mut decreasing = 0usize;
    let mut peaked = false;
    let mut cap_reached = true;
    while entries.len() <= cap {
        let s = sc.step()?;
        if let Some(prev) = entries.last() {
            let down = s.log_push_norm < prev.log_push_norm && s.envelope < prev.envelope;
            decreasing = if down { decreasing + 1 } else { 0 };
        }
        entries.push(s);
        if decreasing >= window.max(1) {
            peaked = true;
        }
        if peaked && (!through_threshold || s.log_push_norm <= 1.0) {
            cap_reached = false;
            break;
        }
    }
    let (n_p, log_peak) = argmax(&entries);
    Ok(PeakScan {
        n_th: threshold_of(&entries),
        entries,
        n_p,
        log_peak,
        cap_reached,
    })
}

fn argmax(entries: &[PushStep]) -> (usize, f64) {
    let mut best = (0, f64::NEG_INFINITY);
    for s in entries {
        if s.log_push_norm > best.1 {
            best = (s.n, s.log_push_norm);
        }
    }
    best
}

fn threshold_of(entries: &[PushStep]) -> Option<usize> {
    entries
        .iter()
        .rev()
        .find(|s| s.log_push_norm > 1.0)
        .map(|s| s.n)
}

/// Peak time `n_p`: the first `n` attaining `max ‖Pⁿ‖`.
pub fn peak_time(f: &IntMatrix, noise: &NoiseModel) -> Result<PeakScan> {
    reject_fast(f, noise)?;
    let scan = scan_peak(f, noise, DEFAULT_WINDOW, false, None)?;
    if scan.cap_reached {
        return Err(Error::NoPeak(format!(
            "norm still growing at the scan cap n = {}",
            scan.entries.len() - 1
        )));
    }
    Ok(scan)
}

fn reject_fast(f: &IntMatrix, noise: &NoiseModel) -> Result<()> {
    if !spectral::is_ergodic(f) && spectral::entropy(f)? > 0.0 {
        let rate = dynamo_rate(f, noise, DEFAULT_N_MAX)?;
        if classify_rate(&rate) == DynamoClass::FastDynamo {
            return Err(Error::NoPeak(
                "fast dynamo: the norm grows without bound".into(),
            ));
        }
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThresholdTime {
    pub n_th: Option<usize>,
    pub scanned_to: usize,
    pub cap_reached: bool,
}

/// Largest scanned `n` with `‖Pⁿ‖ > e`. Growing fields are scanned to
/// `fast_cap` and flagged.
pub fn threshold_time(f: &IntMatrix, noise: &NoiseModel, fast_cap: usize) -> Result<ThresholdTime> {
    let fast = reject_fast(f, noise).is_err();
    let scan = if fast {
        scan_peak(f, noise, usize::MAX, true, Some(fast_cap))?
    } else {
        scan_peak(f, noise, DEFAULT_WINDOW, true, None)?
    };
    Ok(ThresholdTime {
        n_th: scan.n_th,
        scanned_to: scan.entries.len() - 1,
        cap_reached: scan.cap_reached,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PeakPoint {
    pub epsilon: f64,
    pub n_p: usize,
    pub log_peak: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GammaFit {
    pub gamma: f64,
    /// `ln ρ_F / (2αĥ)` for ergodic maps.
    pub predicted: Option<f64>,
    pub points: Vec<PeakPoint>,
}

/// Exponent `γ` in `‖P^{n_p}‖ ∼ (1/ε)^γ`.
pub fn peak_scaling_fit(f: &IntMatrix, alpha: f64, eps_grid: &[f64]) -> Result<GammaFit> {
    require_automorphism(f)?;
    let ergodic = spectral::is_ergodic(f);
    if !ergodic && (spectral::entropy(f)? > 0.0 || spectral::is_diagonalizable(f)) {
        return Err(Error::InvalidParameter(
            "peak scaling needs an ergodic map or a nondiagonalizable zero-entropy map".into(),
        ));
    }
    let points = eps_grid
        .iter()
        .map(|&eps| {
            let noise = NoiseModel::new(eps, alpha)?;
            let scan = peak_time(f, &noise)?;
            Ok(PeakPoint {
                epsilon: eps,
                n_p: scan.n_p,
                log_peak: scan.log_peak,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let x: Vec<f64> = points.iter().map(|p| (1.0 / p.epsilon).ln()).collect();
    let y: Vec<f64> = points.iter().map(|p| p.log_peak).collect();
    let gamma = fit_line(&x, &y)?.slope;
    let predicted = if ergodic {
        Some(spectral::spectral_radius(f)?.ln() / (2.0 * alpha * spectral::h_hat(f)?))
    } else {
        None
    };
    Ok(GammaFit {
        gamma,
        predicted,
        points,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DynamoReport {
    pub epsilon: f64,
    pub alpha: f64,
    /// `(n, ln ‖Pⁿ‖)`
    pub entries: Vec<(usize, f64)>,
    #[serde(rename = "R_dyn")]
    pub r_dyn: Option<f64>,
    #[serde(rename = "R_dyn_divergent_negative")]
    pub r_dyn_divergent_negative: bool,
    #[serde(rename = "R_dyn_predicted")]
    pub r_dyn_predicted: Option<f64>,
    /// Absent for fast dynamos.
    pub n_p: Option<usize>,
    pub n_th: Option<usize>,
    pub n_th_cap_reached: bool,
    pub gamma_fit: Option<f64>,
    pub gamma_predicted: Option<f64>,
    pub classification: DynamoClass,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DynamoOptions {
    pub n_max: usize,
    pub window: usize,
    /// Grid for the peak-scaling fit; skipped when empty.
    pub eps_grid: Vec<f64>,
}

impl Default for DynamoOptions {
    fn default() -> Self {
        Self {
            n_max: DEFAULT_N_MAX,
            window: DEFAULT_WINDOW,
            eps_grid: Vec::new(),
        }
    }
}

pub fn dynamo_report(
    f: &IntMatrix,
    noise: &NoiseModel,
    opts: &DynamoOptions,
) -> Result<DynamoReport> {
    let curve = push_curve(f, noise, opts.n_max)?;
    let rate = rate_from_curve(f, noise, &curve)?;
    let class = classify_rate(&rate);
    let (entries, n_p, n_th, cap) = if class == DynamoClass::FastDynamo {
        let cap_reached = curve.last().is_some_and(|s| s.log_push_norm > 1.0);
        let n_th = threshold_of(&curve);
        (curve, None, n_th, cap_reached)
    } else {
        let scan = scan_peak(f, noise, opts.window, true, None)?;
        let entries = if scan.entries.len() > curve.len() {
            scan.entries
        } else {
            curve
        };
        let (n_p, _) = argmax(&entries);
        (entries, Some(n_p), scan.n_th, scan.cap_reached)
    };
    let gamma = if opts.eps_grid.is_empty() {
        None
    } else {
        Some(peak_scaling_fit(f, noise.alpha, &opts.eps_grid)?)
    };
    Ok(DynamoReport {
        epsilon: noise.epsilon,
        alpha: noise.alpha,
        entries: entries.iter().map(|s| (s.n, s.log_push_norm)).collect(),
        r_dyn: (!rate.divergent_negative).then_some(rate.fitted),
        r_dyn_divergent_negative: rate.divergent_negative,
        r_dyn_predicted: rate.predicted,
        n_p,
        n_th,
        n_th_cap_reached: cap,
        gamma_fit: gamma.as_ref().map(|g| g.gamma),
        gamma_predicted: gamma.and_then(|g| g.predicted),
        classification: class,
    })
}

/// Per-`n` curve as CSV with columns `n,log_push_norm`.
pub fn write_curve_csv<W: Write>(entries: &[(usize, f64)], w: W) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    let err = |e: csv::Error| Error::InvalidParameter(format!("csv: {e}"));
    wr.write_record(["n", "log_push_norm"]).map_err(err)?;
    for (n, v) in entries {
        wr.write_record([n.to_string(), v.to_string()])
            .map_err(err)?;
    }
    wr.flush()
        .map_err(|e| Error::InvalidParameter(format!("csv: {e}")))
}

pub fn read_curve_csv<R: std::io::Read>(r: R) -> Result<Vec<(usize, f64)>> {
    let mut rd = csv::Reader::from_reader(r);
    rd.deserialize::<(usize, f64)>()
        .map(|rec| rec.map_err(|e| Error::Parse(format!("csv: {e}"))))
        .collect()
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

    fn noise(eps: f64) -> NoiseModel {
        NoiseModel::new(eps, 1.0).unwrap()
    }

    #[test]
    fn push_norm_examples() {
        let id = IntMatrix::identity(2);
        assert!((push_norm(&id, &noise(0.1), 5).unwrap() + 0.5).abs() < 1e-12);
        let golden2 = ((3.0 + 5f64.sqrt()) / 2.0).ln();
        assert!((push_norm(&cat(), &noise(1.0), 1).unwrap() - (golden2 - 1.0)).abs() < 1e-12);
        // ‖[[1,100],[0,1]]‖₂ from the eigenvalues of its Gram matrix
        let t: f64 = 2.0 + 100.0 * 100.0;
        let sigma = ((t + (t * t - 4.0).sqrt()) / 2.0).sqrt();
        let got = push_norm(&shear(), &noise(0.01), 100).unwrap();
        assert!((got - (sigma.ln() - 1.0)).abs() < 1e-12, "{got}");
    }

    #[test]
    fn scanner_agrees_with_single_evaluations() {
        let curve = push_curve(&cat(), &noise(0.01), 8).unwrap();
        assert_eq!(curve[0].log_push_norm, 0.0);
        for s in &curve[1..] {
            let direct = push_norm(&cat(), &noise(0.01), s.n).unwrap();
            assert!((s.log_push_norm - direct).abs() < 1e-9 * direct.abs().max(1.0));
        }
    }

    #[test]
    fn rates() {
        let r = dynamo_rate(&IntMatrix::identity(2), &noise(0.05), 20).unwrap();
        assert!((r.fitted + 0.05).abs() < 1e-12);
        assert!((r.predicted.unwrap() + 0.05).abs() < 1e-12);
        let f = IntMatrix::block_diag(&[&cat(), &IntMatrix::identity(1)]);
        let r = dynamo_rate(&f, &noise(0.01), 40).unwrap();
        let want = ((3.0 + 5f64.sqrt()) / 2.0).ln() - 0.01;
        assert!((r.fitted - want).abs() < 0.01, "{}", r.fitted);
        assert!(
            dynamo_rate(&cat(), &noise(1e-4), 30)
                .unwrap()
                .divergent_negative
        );
        assert!(dynamo_rate(&cat(), &noise(1e-4), 5).is_err());
    }

    #[test]
    fn peaks() {
        assert_eq!(
            peak_time(&IntMatrix::identity(2), &noise(0.1)).unwrap().n_p,
            0
        );
        // maximize −εn + ln σ(n) by brute force on the closed form
        let sigma = |n: f64| {
            let t = 2.0 + n * n;
            ((t + (t * t - 4.0).sqrt()) / 2.0).sqrt()
        };
        let want = (0..400)
            .max_by(|&a, &b| {
                let v = |n: i32| -0.01 * n as f64 + sigma(n as f64).ln();
                v(a).total_cmp(&v(b))
            })
            .unwrap();
        assert_eq!(
            peak_time(&shear(), &noise(0.01)).unwrap().n_p,
            want as usize
        );
        let f = IntMatrix::block_diag(&[&cat(), &IntMatrix::identity(1)]);
        assert!(matches!(peak_time(&f, &noise(0.01)), Err(Error::NoPeak(_))));
    }

    #[test]
    fn thresholds() {
        let t = threshold_time(&IntMatrix::identity(2), &noise(0.01), 50).unwrap();
        assert_eq!(t.n_th, None);
        let t = threshold_time(&shear(), &noise(0.001), 50).unwrap();
        let n = t.n_th.unwrap();
        assert!(!t.cap_reached);
        assert!(push_norm(&shear(), &noise(0.001), n).unwrap() > 1.0);
        assert!(push_norm(&shear(), &noise(0.001), n + 1).unwrap() <= 1.0);
        let f = IntMatrix::block_diag(&[&cat(), &IntMatrix::identity(1)]);
        let t = threshold_time(&f, &noise(0.01), 50).unwrap();
        assert_eq!(t.n_th, Some(50));
        assert!(t.cap_reached);
    }

    #[test]
    fn identity_refuses_peak_scaling() {
        assert!(peak_scaling_fit(&IntMatrix::identity(2), 1.0, &[1e-2, 1e-3]).is_err());
    }

    #[test]
    fn report_serializes() {
        let r = dynamo_report(&cat(), &noise(1e-3), &DynamoOptions::default()).unwrap();
        assert_eq!(r.classification, DynamoClass::AntiDynamo);
        assert!(r.r_dyn_divergent_negative && r.r_dyn.is_none());
        let (np, peak) = r
            .entries
            .iter()
            .fold((0, f64::MIN), |b, &(n, v)| if v > b.1 { (n, v) } else { b });
        assert_eq!(r.n_p, Some(np));
        assert!(peak > 0.0);
        let js = serde_json::to_string(&r).unwrap();
        assert!(js.contains("\"classification\":\"anti_dynamo\""));
        let mut buf = Vec::new();
        write_curve_csv(&r.entries[..2], &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap().lines().next(),
            Some("n,log_push_norm")
        );
    }
}
