//! Sequences `n ↦ M(n)`, a shared memo table, CSV I/O and growth fits.

use std::collections::HashMap;
use std::io::{Read, Write};
use std::sync::RwLock;

use num_bigint::BigInt;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{minimize, MinInstance, MinOptions, MinResult, Variant};
use crate::error::{Error, Result};
use crate::exact::{ln_abs, IntMatrix};
use crate::fit::fit_line;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MinCurve {
    pub alpha: f64,
    pub variant: Variant,
    pub entries: Vec<(usize, MinResult)>,
}

/// Computes `n ↦ min` for `n` in `ns`, in parallel.
pub fn min_curve(
    a: &IntMatrix,
    ns: impl IntoIterator<Item = usize>,
    alpha: f64,
    variant: &Variant,
    opts: &MinOptions,
) -> Result<MinCurve> {
    let ns: Vec<usize> = ns.into_iter().collect();
    let entries = ns
        .par_iter()
        .map(|&n| {
            let inst = MinInstance {
                a: a.clone(),
                n,
                alpha,
                variant: variant.clone(),
            };
            minimize(&inst, opts).map(|r| (n, r))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(MinCurve {
        alpha,
        variant: variant.clone(),
        entries,
    })
}

impl MinCurve {
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        let io = |e: csv::Error| Error::InvalidParameter(format!("csv: {e}"));
        wr.write_record(["n", "value", "argmin", "certified", "nodes"])
            .map_err(io)?;
        for (n, r) in &self.entries {
            let value = match &r.exact_value {
                Some(v) => v.to_string(),
                None => format!("{}", r.value),
            };
            let argmin: Vec<String> = r.argmin.iter().map(|c| c.to_string()).collect();
            wr.write_record([
                n.to_string(),
                value,
                argmin.join(" "),
                r.certified.to_string(),
                r.nodes_visited.to_string(),
            ])
            .map_err(io)?;
        }
        wr.flush()
            .map_err(|e| Error::InvalidParameter(format!("csv: {e}")))?;
        Ok(())
    }

    /// Reads a curve written by [`MinCurve::write_csv`]. The CSV carries no
    /// `alpha`/variant columns, so they are supplied by the caller.
    pub fn read_csv<R: Read>(r: R, alpha: f64, variant: Variant) -> Result<Self> {
        let mut rd = csv::Reader::from_reader(r);
        let perr = |m: String| Error::Parse(m);
        let mut entries = Vec::new();
        for rec in rd.records() {
            let rec = rec.map_err(|e| perr(format!("csv: {e}")))?;
            if rec.len() != 5 {
                return Err(perr(format!("expected 5 columns, got {}", rec.len())));
            }
            let n: usize = rec[0]
                .parse()
                .map_err(|_| perr(format!("bad n {:?}", &rec[0])))?;
            let exact_value: Option<BigInt> = rec[1].parse().ok();
            let value: f64 = rec[1]
                .parse()
                .map_err(|_| perr(format!("bad value {:?}", &rec[1])))?;
            let argmin = rec[2]
                .split_whitespace()
                .map(|s| {
                    s.parse::<BigInt>()
                        .map_err(|_| perr(format!("bad argmin {s:?}")))
                })
                .collect::<Result<Vec<_>>>()?;
            let certified: bool = rec[3]
                .parse()
                .map_err(|_| perr(format!("bad flag {:?}", &rec[3])))?;
            let nodes: u64 = rec[4]
                .parse()
                .map_err(|_| perr(format!("bad node count {:?}", &rec[4])))?;
            entries.push((
                n,
                MinResult {
                    value,
                    exact_value,
                    argmin,
                    certified,
                    search_radius: f64::NAN,
                    nodes_visited: nodes,
                    infimum_zero: false,
                },
            ));
        }
        Ok(Self {
            alpha,
            variant,
            entries,
        })
    }
}

/// Memoized `n ↦ MinResult` for a fixed matrix, exponent and variant.
/// Lookups take a shared lock; a missing entry is computed without holding
/// the lock and then inserted.
pub struct MinTable {
    a: IntMatrix,
    alpha: f64,
    variant: Variant,
    opts: MinOptions,
    memo: RwLock<HashMap<usize, MinResult>>,
}

impl MinTable {
    pub fn new(a: &IntMatrix, alpha: f64, variant: Variant, opts: MinOptions) -> Self {
        Self {
            a: a.clone(),
            alpha,
            variant,
            opts,
            memo: RwLock::new(HashMap::new()),
        }
    }

    pub fn matrix(&self) -> &IntMatrix {
        &self.a
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn variant(&self) -> &Variant {
        &self.variant
    }

    pub fn get(&self, n: usize) -> Result<MinResult> {
        if let Some(r) = self.memo.read().unwrap().get(&n) {
            return Ok(r.clone());
        }
        let inst = MinInstance {
            a: self.a.clone(),
            n,
            alpha: self.alpha,
            variant: self.variant.clone(),
        };
        let r = minimize(&inst, &self.opts)?;
        self.memo.write().unwrap().insert(n, r.clone());
        Ok(r)
    }

    /// `ln M(n)`, accurate even when `M(n)` exceeds the `f64` range.
    pub fn ln_value(&self, n: usize) -> Result<f64> {
        Ok(ln_value(&self.get(n)?))
    }

    pub fn len(&self) -> usize {
        self.memo.read().unwrap().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

pub(crate) fn ln_value(r: &MinResult) -> f64 {
    match &r.exact_value {
        Some(v) => ln_abs(v),
        None => r.value.ln(),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GrowthFit {
    /// `slope / (2α)` of `ln M(n)` against `n`.
    pub rate: f64,
    pub slope: f64,
    /// Slope of `ln M(n)` against `ln n`; below 1.5 the growth is treated as
    /// polynomial rather than exponential.
    pub loglog_slope: f64,
    pub linear_growth: bool,
}

/// Exponential growth rate from the last half of a certified curve.
pub fn growth_rate_fit(curve: &MinCurve) -> Result<GrowthFit> {
    let mut pts: Vec<(usize, f64)> = curve
        .entries
        .iter()
        .filter(|(_, r)| r.certified)
        .map(|(n, r)| (*n, ln_value(r)))
        .collect();
    if pts.len() < 6 {
        return Err(Error::InsufficientData(format!(
            "{} certified entries, need at least 6",
            pts.len()
        )));
    }
    pts.sort_by_key(|p| p.0);
    let tail = &pts[pts.len() / 2..];
    let x: Vec<f64> = tail.iter().map(|p| p.0 as f64).collect();
    let y: Vec<f64> = tail.iter().map(|p| p.1).collect();
    let slope = fit_line(&x, &y)?.slope;
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let loglog_slope = fit_line(&lx, &y)?.slope;
    Ok(GrowthFit {
        rate: slope / (2.0 * curve.alpha),
        slope,
        loglog_slope,
        linear_growth: loglog_slope < 1.5,
    })
}

/// Sequential full-sum minima `M(1), M(2), …`.
///
/// For `α = 1` the form `Q_n = Q_{n−1} + (Aⁿ)ᵀAⁿ` is updated in place and
/// each reduction starts from the previous reduced basis, so a scan to `N`
/// costs `O(N)` reductions of small forms. Other exponents fall back to
/// independent minimizations.
pub struct PrefixScan {
    a: IntMatrix,
    alpha: f64,
    opts: MinOptions,
    n: usize,
    power: IntMatrix,
    form: IntMatrix,
    basis: Option<IntMatrix>,
}

impl PrefixScan {
    pub fn new(a: &IntMatrix, alpha: f64, opts: MinOptions) -> Self {
        let d = a.dim();
        Self {
            a: a.clone(),
            alpha,
            opts,
            n: 0,
            power: IntMatrix::identity(d),
            form: IntMatrix::zeros(d),
            basis: None,
        }
    }

    /// Index of the last minimum returned.
    pub fn position(&self) -> usize {
        self.n
    }

    pub fn next_min(&mut self) -> Result<MinResult> {
        self.n += 1;
        if self.alpha != 1.0 {
            let inst = MinInstance::full_sum(&self.a, self.n, self.alpha);
            return minimize(&inst, &self.opts);
        }
        self.power = &self.power * &self.a;
        self.form = self.form.add(&self.power.gram());
        let sv =
            super::shortest_vector(
                &self.form,
                self.basis.as_ref(),
                self.opts.budget,
                |s| match s {
                    super::Score::Exact(t) => crate::exact::scaled_to_f64(t, 0),
                    super::Score::Approx(v) => *v,
                },
            )?;
        self.basis = Some(sv.reduced.basis.clone());
        let Some(super::Score::Exact(v)) = sv.best.score.clone() else {
            unreachable!("exact pass")
        };
        let res = MinResult {
            value: crate::exact::scaled_to_f64(&v, 0),
            exact_value: Some(v),
            argmin: sv.best.argmin,
            certified: sv.status == crate::lattice::EnumStatus::Complete,
            search_radius: 0.0,
            nodes_visited: sv.nodes,
            infimum_zero: false,
        };
        if res.certified {
            Ok(MinResult {
                search_radius: res.value,
                ..res
            })
        } else {
            Err(Error::EnumerationBudgetExceeded {
                budget: self.opts.budget,
                partial: Box::new(res),
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trip() {
        let cat = IntMatrix::from_i64([[2, 1], [1, 1]]);
        let c = min_curve(&cat, 1..=12, 1.0, &Variant::FullSum, &MinOptions::default()).unwrap();
        let mut buf = Vec::new();
        c.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("n,value,argmin,certified,nodes\n1,1,1 -2,true,"));
        let back = MinCurve::read_csv(&buf[..], 1.0, Variant::FullSum).unwrap();
        assert_eq!(back.entries.len(), 12);
        for ((n1, a), (n2, b)) in c.entries.iter().zip(&back.entries) {
            assert_eq!(n1, n2);
            assert_eq!(a.exact_value, b.exact_value);
            assert_eq!(a.argmin, b.argmin);
        }
    }

    #[test]
    fn memo_table_reuses_entries() {
        let cat = IntMatrix::from_i64([[2, 1], [1, 1]]);
        let t = MinTable::new(&cat, 1.0, Variant::FullSum, MinOptions::default());
        assert_eq!(t.get(3).unwrap().value, 8.0);
        assert_eq!(t.get(3).unwrap().value, 8.0);
        assert_eq!(t.len(), 1);
    }

    #[test]
    fn growth_fit_needs_six_points() {
        let cat = IntMatrix::from_i64([[2, 1], [1, 1]]);
        let c = min_curve(&cat, 1..=5, 1.0, &Variant::FullSum, &MinOptions::default()).unwrap();
        assert!(matches!(
            growth_rate_fit(&c),
            Err(Error::InsufficientData(_))
        ));
    }
    #[test]
    fn prefix_scan_matches_independent_minima() {
        for a in [
            IntMatrix::from_i64([[2, 1], [1, 1]]),
            IntMatrix::from_i64([[1, 0], [-1, 1]]),
            IntMatrix::from_i64([[0, 1, 0], [0, 0, 1], [1, 1, 0]]),
        ] {
            let mut scan = PrefixScan::new(&a, 1.0, MinOptions::default());
            for n in 1..=12 {
                let r = scan.next_min().unwrap();
                let direct =
                    minimize(&MinInstance::full_sum(&a, n, 1.0), &MinOptions::default()).unwrap();
                assert_eq!(r.exact_value, direct.exact_value, "n={n}");
                assert_eq!(scan.position(), n);
            }
        }
    }
}
