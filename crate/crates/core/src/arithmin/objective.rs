//! The objective `Σ_l (t_l(k)/D)^α` with integer terms `t_l(k) = |M_l k|²`.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use super::{MinInstance, Variant};
use crate::error::{Error, Result};
use crate::exact::{mat_pow, rat_to_f64, weighted_gram_form, IntMatrix, RatMatrix};

/// Relative tolerance under which two floating objective values tie.
pub const TIE_TOL: f64 = 1e-12;

/// Comparable objective value: exact for `α = 1`, floating otherwise.
#[derive(Clone, Debug, PartialEq)]
pub enum Score {
    /// `Σ t_l`; the objective is this divided by `D`.
    Exact(BigInt),
    Approx(f64),
}

impl Score {
    pub fn cmp_value(&self, other: &Score) -> Ordering {
        match (self, other) {
            (Score::Exact(a), Score::Exact(b)) => a.cmp(b),
            (Score::Approx(a), Score::Approx(b)) => {
                if (a - b).abs() <= TIE_TOL * a.abs().max(b.abs()) {
                    Ordering::Equal
                } else {
                    a.total_cmp(b)
                }
            }
            _ => unreachable!("scores of one objective share a kind"),
        }
    }
}

pub struct Objective {
    /// The `M_l`; not kept for `α = 1`, where the score is `kᵀEk`.
    mats: Vec<IntMatrix>,
    n_terms: usize,
    ellipsoid: IntMatrix,
    /// `i128` copies of `mats` (or of `E` when exact) for the fast path.
    small: Option<Vec<Vec<i128>>>,
    denom: BigInt,
    pub alpha: f64,
    d: usize,
    /// Every term is a positive integer for `k ≠ 0`.
    unit_terms: bool,
}

impl Objective {
    pub fn new(inst: &MinInstance) -> Result<Self> {
        let a = &inst.a;
        let d = a.dim();
        if !(inst.alpha > 0.0 && inst.alpha <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "alpha must lie in (0, 1], got {}",
                inst.alpha
            )));
        }
        let exact = inst.alpha == 1.0;
        let invertible = !a.determinant().is_zero();
        let (left, denom, n_terms) = match &inst.variant {
            Variant::FullSum | Variant::Degenerate(_) if inst.n == 0 => {
                return Err(Error::InvalidParameter("n must be at least 1".into()));
            }
            Variant::FullSum => (None, BigInt::one(), inst.n),
            Variant::Coarse => (None, BigInt::one(), 2),
            Variant::Degenerate(b) => {
                let (bi, den) = RatMatrix::from_f64(d, b)?.to_scaled_int();
                (Some(bi), &den * &den, inst.n)
            }
        };
        let unit_terms = denom.is_one()
            && invertible
            && left.as_ref().is_none_or(|b| !b.determinant().is_zero());
        let mut mats = Vec::new();
        let mut ellipsoid = IntMatrix::zeros(d);
        match inst.variant {
            Variant::Coarse => {
                for m in [IntMatrix::identity(d), mat_pow(a, inst.n as i64)?] {
                    ellipsoid = ellipsoid.add(&m.gram());
                    mats.push(m);
                }
            }
            _ if exact => {
                let g = match &left {
                    Some(b) => b.gram(),
                    None => IntMatrix::identity(d),
                };
                ellipsoid = weighted_gram_form(a, &g, inst.n);
            }
            _ => {
                let mut p = IntMatrix::identity(d);
                for _ in 0..inst.n {
                    p = &p * a;
                    let m = match &left {
                        Some(b) => b * &p,
                        None => p.clone(),
                    };
                    ellipsoid = ellipsoid.add(&m.gram());
                    mats.push(m);
                }
            }
        }
        if exact {
            mats.clear();
        }
        let small_of = |ms: &[&IntMatrix], limit: BigInt| {
            ms.iter().all(|m| m.max_abs_entry() < limit).then(|| {
                ms.iter()
                    .map(|m| m.entries().iter().map(|x| x.to_i128().unwrap()).collect())
                    .collect()
            })
        };
        let small = if exact {
            small_of(&[&ellipsoid], BigInt::one() << 100)
        } else {
            small_of(&mats.iter().collect::<Vec<_>>(), BigInt::one() << 40)
        };
        Ok(Self {
            mats,
            n_terms,
            ellipsoid,
            small,
            denom,
            alpha: inst.alpha,
            d,
            unit_terms,
        })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn denom(&self) -> &BigInt {
        &self.denom
    }

    pub fn is_exact(&self) -> bool {
        self.alpha == 1.0
    }

    /// `E = Σ M_lᵀ M_l`, so that `kᵀEk = Σ t_l(k)`.
    pub fn ellipsoid(&self) -> IntMatrix {
        self.ellipsoid.clone()
    }

    fn terms(&self, k: &[BigInt]) -> Vec<BigInt> {
        self.mats
            .iter()
            .map(|m| m.mul_vec(k).iter().map(|x| x * x).sum())
            .collect()
    }

    fn terms_small(&self, k: &[i64]) -> Option<Vec<i128>> {
        let small = self.small.as_ref()?;
        let d = self.d;
        let mut out = Vec::with_capacity(small.len());
        for m in small {
            let mut t: i128 = 0;
            for i in 0..d {
                let mut s: i128 = 0;
                for j in 0..d {
                    s = s.checked_add(m[i * d + j].checked_mul(k[j] as i128)?)?;
                }
                t = t.checked_add(s.checked_mul(s)?)?;
            }
            out.push(t);
        }
        Some(out)
    }

    fn form_small(&self, k: &[i64]) -> Option<i128> {
        let e = &self.small.as_ref()?[0];
        let d = self.d;
        let mut t: i128 = 0;
        for i in 0..d {
            let mut s: i128 = 0;
            for j in 0..d {
                s = s.checked_add(e[i * d + j].checked_mul(k[j] as i128)?)?;
            }
            t = t.checked_add(s.checked_mul(k[i] as i128)?)?;
        }
        Some(t)
    }

    fn score_from_terms<T: Clone + Into<BigInt>>(&self, terms: &[T]) -> Score {
        let den = self.denom.to_f64().unwrap();
        Score::Approx(
            terms
                .iter()
                .cloned()
                .map(|t| {
                    let t: BigInt = t.into();
                    (crate::exact::scaled_to_f64(&t, 0) / den).powf(self.alpha)
                })
                .sum(),
        )
    }

    pub fn score(&self, k: &[BigInt]) -> Score {
        if self.is_exact() {
            Score::Exact(self.ellipsoid.quadratic_form(k))
        } else {
            self.score_from_terms(&self.terms(k))
        }
    }

    pub fn score_small(&self, k: &[i64]) -> Score {
        let fast = if self.is_exact() {
            self.form_small(k).map(|t| Score::Exact(t.into()))
        } else {
            self.terms_small(k).map(|t| self.score_from_terms(&t))
        };
        fast.unwrap_or_else(|| {
            let kb: Vec<BigInt> = k.iter().map(|&x| x.into()).collect();
            self.score(&kb)
        })
    }

    /// Objective value of a score as a float.
    pub fn value_of(&self, s: &Score) -> f64 {
        match s {
            Score::Exact(t) => rat_to_f64(&BigRational::new(t.clone(), self.denom.clone())),
            Score::Approx(v) => *v,
        }
    }

    /// Exact integer objective, when `α = 1` and `D = 1`.
    pub fn exact_value_of(&self, s: &Score) -> Option<BigInt> {
        match s {
            Score::Exact(t) if self.denom.is_one() => Some(t.clone()),
            _ => None,
        }
    }

    /// Bound on `kᵀEk = Σ t_l` for any `k` whose objective does not exceed
    /// `value`. With integer terms `t_l ≥ 1` the maximum of `Σ t_l` under
    /// `Σ t_l^α ≤ U` sits at a vertex: all terms 1 but one. Otherwise
    /// `(Σ a_l)^α ≤ Σ a_l^α` is used.
    pub fn ellipsoid_radius(&self, s: &Score) -> f64 {
        match s {
            Score::Exact(t) => t.to_f64().unwrap_or(f64::INFINITY),
            Score::Approx(v) if self.unit_terms => {
                let rest = (self.n_terms - 1) as f64;
                rest + (v - rest).max(1.0).powf(1.0 / self.alpha)
            }
            Score::Approx(v) => self.denom.to_f64().unwrap() * v.powf(1.0 / self.alpha),
        }
    }
}

/// Flips the sign so that the first nonzero component is positive.
pub fn canonical(mut k: Vec<BigInt>) -> Vec<BigInt> {
    crate::lattice::canonical_sign(&mut k);
    k
}
