//! Affine toral maps `x ↦ F x + c` and their ergodic classification.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::cyclotomic::cyclotomics_up_to_degree;
use crate::error::{Error, Result};
use crate::exact::{char_poly, integer_kernel, IntMatrix, RatVector};
use crate::lattice::lll_gram;

/// The translation part of an affine map.
#[derive(Clone, Debug, PartialEq)]
pub enum Shift {
    /// Stored exactly.
    Rational(RatVector),
    /// Floating-point shift; any decision built on it is inexact.
    Real(Vec<f64>),
}

impl Shift {
    pub fn len(&self) -> usize {
        match self {
            Shift::Rational(v) => v.len(),
            Shift::Real(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn inexact(&self) -> bool {
        matches!(self, Shift::Real(_))
    }

    pub fn to_f64(&self) -> Vec<f64> {
        match self {
            Shift::Rational(v) => v.to_f64(),
            Shift::Real(v) => v.clone(),
        }
    }

    /// Exact rational value of each component (floats are dyadic).
    pub fn to_rational(&self) -> Vec<BigRational> {
        match self {
            Shift::Rational(v) => v.0.clone(),
            Shift::Real(v) => v
                .iter()
                .map(|&x| BigRational::from_float(x).unwrap_or_else(BigRational::zero))
                .collect(),
        }
    }

    /// Parses `"1/2,1/3"` as an exact shift; entries that are not rational
    /// literals (for example `sqrt2`) make the whole shift real.
    pub fn parse(text: &str) -> Result<Self> {
        if let Ok(v) = RatVector::parse(text) {
            return Ok(Shift::Rational(v));
        }
        text.split(',')
            .map(|s| parse_real(s.trim()))
            .collect::<Result<Vec<f64>>>()
            .map(Shift::Real)
    }
}

fn parse_real(s: &str) -> Result<f64> {
    if let Some(arg) = s.strip_prefix("sqrt") {
        let x: f64 = arg
            .trim_matches(|c| c == '(' || c == ')')
            .parse()
            .map_err(|_| Error::Parse(format!("bad shift entry {s:?}")))?;
        return Ok(x.sqrt());
    }
    match s {
        "pi" => Ok(std::f64::consts::PI),
        "e" => Ok(std::f64::consts::E),
        _ => s
            .parse()
            .map_err(|_| Error::Parse(format!("bad shift entry {s:?}"))),
    }
}

/// `x ↦ linear · x + shift (mod 1)`.
#[derive(Clone, Debug, PartialEq)]
pub struct ToralMap {
    pub linear: IntMatrix,
    pub shift: Option<Shift>,
}

impl ToralMap {
    pub fn new(linear: IntMatrix, shift: Option<Shift>) -> Result<Self> {
        crate::exact::require_automorphism(&linear)?;
        if let Some(s) = &shift {
            if s.len() != linear.dim() {
                return Err(Error::Dimension(format!(
                    "shift has {} components for a {}-dimensional map",
                    s.len(),
                    linear.dim()
                )));
            }
        }
        Ok(Self { linear, shift })
    }

    pub fn linear_only(linear: IntMatrix) -> Result<Self> {
        Self::new(linear, None)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AffineClass {
    Ergodic,
    Nonergodic,
    HeuristicErgodic,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AffineClassification {
    pub class: AffineClass,
    /// Integer `k ≠ 0` with `Fᵀk = k` and `c·k ∈ Z`, when one was found.
    #[serde(with = "opt_vec")]
    pub witness: Option<Vec<BigInt>>,
    /// Relation height searched for real shifts.
    pub height_bound: Option<u64>,
    pub reason: String,
}

mod opt_vec {
    use num_bigint::BigInt;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use crate::exact::serde_int::Repr;

    pub fn serialize<S: Serializer>(v: &Option<Vec<BigInt>>, s: S) -> Result<S::Ok, S::Error> {
        v.as_ref()
            .map(|v| v.iter().map(Repr::from).collect::<Vec<_>>())
            .serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Vec<BigInt>>, D::Error> {
        Option::<Vec<Repr>>::deserialize(d)?
            .map(|v| {
                v.into_iter()
                    .map(|r| BigInt::try_from(r).map_err(serde::de::Error::custom))
                    .collect()
            })
            .transpose()
    }
}

/// Default height bound for integer relations among real shift components.
pub const DEFAULT_HEIGHT_BOUND: u64 = 1_000_000;
/// Absolute residual below which a relation among real shifts is accepted.
pub const RELATION_TOL: f64 = 1e-14;

pub fn classify_affine(map: &ToralMap, height_bound: u64) -> Result<AffineClassification> {
    let f = &map.linear;
    let p = char_poly(f);
    let cyclo: Vec<u64> = cyclotomics_up_to_degree(f.dim())
        .into_iter()
        .filter(|(_, phi)| phi.divides(&p))
        .map(|(m, _)| m)
        .collect();
    if cyclo.is_empty() {
        return Ok(AffineClassification {
            class: AffineClass::Ergodic,
            witness: None,
            height_bound: None,
            reason: "linear part is ergodic".into(),
        });
    }
    if let Some(&m) = cyclo.iter().find(|&&m| m > 1) {
        return Ok(AffineClassification {
            class: AffineClass::Nonergodic,
            witness: None,
            height_bound: None,
            reason: format!("primitive {m}-th roots of unity are eigenvalues"),
        });
    }
    // only the root of unity 1: look at the invariant lattice of Fᵀ
    let id = IntMatrix::identity(f.dim());
    let kernel = integer_kernel(&f.transpose().sub(&id));
    debug_assert!(!kernel.is_empty());
    let zero_shift = Shift::Rational(RatVector(vec![BigRational::zero(); f.dim()]));
    let shift = map.shift.as_ref().unwrap_or(&zero_shift);
    let c = shift.to_rational();
    let dots: Vec<BigRational> = kernel
        .iter()
        .map(|b| b.iter().zip(&c).map(|(x, y)| y * x).sum())
        .collect();
    match shift {
        Shift::Rational(_) => {
            let b = &kernel[0];
            let den = dots[0].denom().clone();
            let witness: Vec<BigInt> = b.iter().map(|x| x * &den).collect();
            Ok(AffineClassification {
                class: AffineClass::Nonergodic,
                witness: Some(witness),
                height_bound: None,
                reason: "rational shift on a map with invariant integer vectors".into(),
            })
        }
        Shift::Real(_) => Ok(match integer_relation(&dots, height_bound) {
            Some(m) => {
                let d = f.dim();
                let witness: Vec<BigInt> = (0..d)
                    .map(|i| {
                        kernel
                            .iter()
                            .zip(&m)
                            .map(|(b, mi)| &b[i] * BigInt::from(*mi))
                            .sum()
                    })
                    .collect();
                AffineClassification {
                    class: AffineClass::Nonergodic,
                    witness: Some(witness),
                    height_bound: Some(height_bound),
                    reason: "integer relation found among the shift projections".into(),
                }
            }
            None => AffineClassification {
                class: AffineClass::HeuristicErgodic,
                witness: None,
                height_bound: Some(height_bound),
                reason: format!("no integer relation of height ≤ {height_bound}"),
            },
        }),
    }
}

/// Searches `m ∈ Z^r \ {0}`, `t ∈ Z` with `|Σ m_i x_i − t| ≤ RELATION_TOL`
/// and all `|m_i|, |t| ≤ height`, by LLL on the embedding
/// `(m, t) ↦ (m, t, Σ m_i X_i − t N)` with `X_i = round(N x_i)`.
fn integer_relation(x: &[BigRational], height: u64) -> Option<Vec<i64>> {
    let r = x.len();
    let n_scale: BigInt = BigInt::one() << 52;
    let mut w: Vec<BigInt> = x
        .iter()
        .map(|xi| {
            (xi * BigRational::from(n_scale.clone()))
                .round()
                .to_integer()
        })
        .collect();
    w.push(-n_scale);
    let dim = r + 1;
    let mut gram = IntMatrix::zeros(dim);
    for i in 0..dim {
        for j in 0..dim {
            gram[(i, j)] = &w[i] * &w[j]
                + if i == j {
                    BigInt::one()
                } else {
                    BigInt::zero()
                };
        }
    }
    let reduced = lll_gram(&gram, None).ok()?;
    let h = BigInt::from(height);
    for col in 0..dim {
        let v: Vec<BigInt> = (0..dim).map(|i| reduced.basis[(i, col)].clone()).collect();
        if v[..r].iter().all(Zero::is_zero) || v.iter().any(|c| c.abs() > h) {
            continue;
        }
        let resid: BigRational = x
            .iter()
            .zip(&v)
            .map(|(xi, mi)| xi * BigRational::from(mi.clone()))
            .sum::<BigRational>()
            - BigRational::from(v[r].clone());
        if resid.abs().to_f64().unwrap_or(f64::INFINITY) <= RELATION_TOL {
            return Some(v[..r].iter().map(|c| c.to_i64().unwrap()).collect());
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    fn shear() -> IntMatrix {
        IntMatrix::from_i64([[1, 1], [0, 1]])
    }

    #[test]
    fn examples() {
        let cat = IntMatrix::from_i64([[2, 1], [1, 1]]);
        let m = ToralMap::new(cat, Some(Shift::parse("1/2,1/3").unwrap())).unwrap();
        assert_eq!(
            classify_affine(&m, DEFAULT_HEIGHT_BOUND).unwrap().class,
            AffineClass::Ergodic
        );

        let m = ToralMap::new(shear(), Some(Shift::parse("0,1/2").unwrap())).unwrap();
        let c = classify_affine(&m, DEFAULT_HEIGHT_BOUND).unwrap();
        assert_eq!(c.class, AffineClass::Nonergodic);
        let k = c.witness.unwrap();
        assert_eq!(k[0], BigInt::zero());
        assert_eq!(k[1].abs(), BigInt::from(2));

        let m = ToralMap::new(
            IntMatrix::identity(2),
            Some(Shift::parse("sqrt2,sqrt3").unwrap()),
        )
        .unwrap();
        let c = classify_affine(&m, DEFAULT_HEIGHT_BOUND).unwrap();
        assert_eq!(c.class, AffineClass::HeuristicErgodic);
        assert_eq!(c.height_bound, Some(DEFAULT_HEIGHT_BOUND));
    }

    #[test]
    fn real_shift_with_exact_relation() {
        // 0.25 and 0.5 are dyadic, so 2·x₁ − x₂ = 0 is found exactly
        let m = ToralMap::new(IntMatrix::identity(2), Some(Shift::Real(vec![0.25, 0.5]))).unwrap();
        let c = classify_affine(&m, DEFAULT_HEIGHT_BOUND).unwrap();
        assert_eq!(c.class, AffineClass::Nonergodic);
        let k = c.witness.unwrap();
        let dot = 0.25 * k[0].to_f64().unwrap() + 0.5 * k[1].to_f64().unwrap();
        assert_eq!(dot.fract(), 0.0);
    }

    #[test]
    fn rotation_is_nonergodic_for_every_shift() {
        let rot = IntMatrix::from_i64([[0, -1], [1, 0]]);
        let m = ToralMap::new(rot, Some(Shift::Real(vec![0.1, 0.7]))).unwrap();
        assert_eq!(
            classify_affine(&m, 10).unwrap().class,
            AffineClass::Nonergodic
        );
    }

    #[test]
    fn shift_dimension_is_checked() {
        assert!(ToralMap::new(shear(), Some(Shift::parse("1/2").unwrap())).is_err());
    }
}
