//! Square matrices over arbitrary-precision integers and rationals.

use std::fmt;
use std::ops::Mul;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// A `dim × dim` integer matrix stored row-major.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct IntMatrix {
    dim: usize,
    entries: Vec<BigInt>,
}

impl IntMatrix {
    pub fn from_rows<T: Into<BigInt> + Clone>(rows: &[Vec<T>]) -> Result<Self> {
        let dim = rows.len();
        if dim == 0 {
            return Err(Error::Dimension("matrix must have at least one row".into()));
        }
        let mut entries = Vec::with_capacity(dim * dim);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != dim {
                return Err(Error::Dimension(format!(
                    "row {} has {} entries, expected {}",
                    i,
                    row.len(),
                    dim
                )));
            }
            entries.extend(row.iter().cloned().map(Into::into));
        }
        Ok(Self { dim, entries })
    }

    /// Convenience constructor for literals; panics on a ragged or empty array.
    pub fn from_i64<const D: usize>(rows: [[i64; D]; D]) -> Self {
        assert!(D > 0);
        Self {
            dim: D,
            entries: rows.iter().flatten().map(|&x| BigInt::from(x)).collect(),
        }
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            entries: vec![BigInt::zero(); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.entries[i * dim + i] = BigInt::one();
        }
        m
    }

    pub fn scalar(dim: usize, c: &BigInt) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.entries[i * dim + i] = c.clone();
        }
        m
    }

    /// Block-diagonal matrix with `blocks` along the diagonal.
    pub fn block_diag(blocks: &[&IntMatrix]) -> Self {
        let dim = blocks.iter().map(|b| b.dim).sum();
        let mut m = Self::zeros(dim);
        let mut off = 0;
        for b in blocks {
            for i in 0..b.dim {
                for j in 0..b.dim {
                    m.entries[(off + i) * dim + off + j] = b[(i, j)].clone();
                }
            }
            off += b.dim;
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[BigInt] {
        &self.entries
    }

    pub fn row(&self, i: usize) -> &[BigInt] {
        &self.entries[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> Vec<Vec<BigInt>> {
        (0..self.dim).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn transpose(&self) -> Self {
        let d = self.dim;
        let mut m = Self::zeros(d);
        for i in 0..d {
            for j in 0..d {
                m.entries[j * d + i] = self.entries[i * d + j].clone();
            }
        }
        m
    }

    pub fn trace(&self) -> BigInt {
        (0..self.dim).map(|i| &self.entries[i * self.dim + i]).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(Zero::is_zero)
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        Self {
            dim: self.dim,
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        Self {
            dim: self.dim,
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    pub fn scale(&self, c: &BigInt) -> Self {
        Self {
            dim: self.dim,
            entries: self.entries.iter().map(|a| a * c).collect(),
        }
    }

    pub fn mul_vec(&self, v: &[BigInt]) -> Vec<BigInt> {
        assert_eq!(v.len(), self.dim);
        (0..self.dim)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// `vᵀ M v`.
    pub fn quadratic_form(&self, v: &[BigInt]) -> BigInt {
        let mv = self.mul_vec(v);
        mv.iter().zip(v).map(|(a, b)| a * b).sum()
    }

    /// Fraction-free (Bareiss) determinant.
    pub fn determinant(&self) -> BigInt {
        let d = self.dim;
        let mut a = self.entries.clone();
        let mut sign = BigInt::one();
        let mut prev = BigInt::one();
        for k in 0..d {
            if a[k * d + k].is_zero() {
                let Some(p) = (k + 1..d).find(|&r| !a[r * d + k].is_zero()) else {
                    return BigInt::zero();
                };
                for j in 0..d {
                    a.swap(k * d + j, p * d + j);
                }
                sign = -sign;
            }
            for i in k + 1..d {
                for j in k + 1..d {
                    let v = &a[i * d + j] * &a[k * d + k] - &a[i * d + k] * &a[k * d + j];
                    a[i * d + j] = v / &prev;
                }
            }
            prev = a[k * d + k].clone();
        }
        sign * &a[d * d - 1]
    }

    pub fn is_unimodular(&self) -> bool {
        self.determinant().abs().is_one()
    }

    pub fn ensure_unimodular(&self) -> Result<()> {
        let det = self.determinant();
        if det.abs().is_one() {
            Ok(())
        } else {
            Err(Error::NonUnimodular { det })
        }
    }

    pub fn max_abs_entry(&self) -> BigInt {
        self.entries
            .iter()
            .map(|x| x.abs())
            .max()
            .unwrap_or_default()
    }

    /// Entries rounded to `f64` after dividing by `2^shift`.
    pub fn to_f64_scaled(&self, shift: u64) -> Vec<f64> {
        self.entries
            .iter()
            .map(|x| scaled_to_f64(x, shift))
            .collect()
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.to_f64_scaled(0)
    }

    pub fn to_rat(&self) -> RatMatrix {
        RatMatrix {
            dim: self.dim,
            entries: self
                .entries
                .iter()
                .map(|x| BigRational::from_integer(x.clone()))
                .collect(),
        }
    }

    /// Parses the `"a,b;c,d"` text format.
    pub fn parse(text: &str) -> Result<Self> {
        let rows = parse_rows(text, |s| {
            s.parse::<BigInt>()
                .map_err(|_| Error::Parse(format!("not an integer: {s:?}")))
        })?;
        Self::from_rows(&rows)
    }

    /// `MᵀM`.
    pub fn gram(&self) -> Self {
        &self.transpose() * self
    }
}

impl std::ops::Index<(usize, usize)> for IntMatrix {
    type Output = BigInt;
    fn index(&self, (i, j): (usize, usize)) -> &BigInt {
        &self.entries[i * self.dim + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for IntMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut BigInt {
        &mut self.entries[i * self.dim + j]
    }
}

impl Mul for &IntMatrix {
    type Output = IntMatrix;
    fn mul(self, rhs: &IntMatrix) -> IntMatrix {
        assert_eq!(self.dim, rhs.dim);
        let d = self.dim;
        let mut out = IntMatrix::zeros(d);
        for i in 0..d {
            for k in 0..d {
                let a = &self.entries[i * d + k];
                if a.is_zero() {
                    continue;
                }
                for j in 0..d {
                    out.entries[i * d + j] += a * &rhs.entries[k * d + j];
                }
            }
        }
        out
    }
}

impl Mul for IntMatrix {
    type Output = IntMatrix;
    fn mul(self, rhs: IntMatrix) -> IntMatrix {
        &self * &rhs
    }
}

impl fmt::Display for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.dim {
            if i > 0 {
                f.write_str(";")?;
            }
            for j in 0..self.dim {
                if j > 0 {
                    f.write_str(",")?;
                }
                write!(f, "{}", self[(i, j)])?;
            }
        }
        Ok(())
    }
}

/// Square matrix of reduced rationals.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RatMatrix {
    dim: usize,
    entries: Vec<BigRational>,
}

impl RatMatrix {
    pub fn from_rows(rows: Vec<Vec<BigRational>>) -> Result<Self> {
        let dim = rows.len();
        if dim == 0 || rows.iter().any(|r| r.len() != dim) {
            return Err(Error::Dimension("rational matrix must be square".into()));
        }
        Ok(Self {
            dim,
            entries: rows.into_iter().flatten().collect(),
        })
    }

    /// Exact conversion of a real matrix; every finite `f64` is a dyadic rational.
    pub fn from_f64(dim: usize, values: &[f64]) -> Result<Self> {
        if values.len() != dim * dim {
            return Err(Error::Dimension("expected dim² entries".into()));
        }
        let entries = values
            .iter()
            .map(|&x| {
                BigRational::from_float(x)
                    .ok_or_else(|| Error::InvalidParameter(format!("non-finite entry {x}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { dim, entries })
    }

    pub fn parse(text: &str) -> Result<Self> {
        let rows = parse_rows(text, parse_rational)?;
        Self::from_rows(rows)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[BigRational] {
        &self.entries
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.entries.iter().map(rat_to_f64).collect()
    }

    pub fn transpose(&self) -> Self {
        let d = self.dim;
        let mut entries = self.entries.clone();
        for i in 0..d {
            for j in 0..d {
                entries[j * d + i] = self.entries[i * d + j].clone();
            }
        }
        Self { dim: d, entries }
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        let d = self.dim;
        let mut entries = vec![BigRational::zero(); d * d];
        for i in 0..d {
            for k in 0..d {
                let a = &self.entries[i * d + k];
                if a.is_zero() {
                    continue;
                }
                for j in 0..d {
                    entries[i * d + j] += a * &rhs.entries[k * d + j];
                }
            }
        }
        Self { dim: d, entries }
    }

    pub fn mul_int(&self, rhs: &IntMatrix) -> Self {
        self.mul(&rhs.to_rat())
    }

    /// Least common multiple of all denominators.
    pub fn common_denominator(&self) -> BigInt {
        self.entries
            .iter()
            .fold(BigInt::one(), |acc, x| acc.lcm(x.denom()))
    }

    /// Returns `(N, D)` with `self = N / D`, `N` integral.
    pub fn to_scaled_int(&self) -> (IntMatrix, BigInt) {
        let den = self.common_denominator();
        let entries = self
            .entries
            .iter()
            .map(|x| x.numer() * (&den / x.denom()))
            .collect();
        (
            IntMatrix {
                dim: self.dim,
                entries,
            },
            den,
        )
    }
}

impl std::ops::Index<(usize, usize)> for RatMatrix {
    type Output = BigRational;
    fn index(&self, (i, j): (usize, usize)) -> &BigRational {
        &self.entries[i * self.dim + j]
    }
}

/// A vector of reduced rationals.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RatVector(pub Vec<BigRational>);

impl RatVector {
    pub fn parse(text: &str) -> Result<Self> {
        let v = text
            .split(',')
            .map(|s| parse_rational(s.trim()))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self(v))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn dot_int(&self, k: &[BigInt]) -> BigRational {
        self.0
            .iter()
            .zip(k)
            .map(|(c, x)| c * BigRational::from_integer(x.clone()))
            .sum()
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.0.iter().map(rat_to_f64).collect()
    }
}

pub fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let err = || Error::Parse(format!("not a rational: {s:?}"));
    if let Some((p, q)) = s.split_once('/') {
        let p: BigInt = p.trim().parse().map_err(|_| err())?;
        let q: BigInt = q.trim().parse().map_err(|_| err())?;
        if q.is_zero() {
            return Err(Error::Parse(format!("zero denominator in {s:?}")));
        }
        return Ok(BigRational::new(p, q));
    }
    if let Ok(p) = s.parse::<BigInt>() {
        return Ok(BigRational::from_integer(p));
    }
    parse_decimal(s).ok_or_else(err)
}

/// Exact value of a plain decimal literal such as `-0.125` or `1e-3`.
fn parse_decimal(s: &str) -> Option<BigRational> {
    let (mantissa, exp) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().ok()?),
        None => (s, 0),
    };
    let (neg, mantissa) = match mantissa.strip_prefix('-') {
        Some(m) => (true, m),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part
        .chars()
        .chain(frac_part.chars())
        .all(|c| c.is_ascii_digit())
    {
        return None;
    }
    let digits: BigInt = format!("{int_part}{frac_part}0").parse().ok()?;
    let digits = digits / 10;
    let scale = exp - frac_part.len() as i32;
    let ten = BigInt::from(10);
    let mut r = BigRational::from_integer(digits);
    if scale >= 0 {
        r *= BigRational::from_integer(num_traits::pow(ten, scale as usize));
    } else {
        r /= BigRational::from_integer(num_traits::pow(ten, (-scale) as usize));
    }
    Some(if neg { -r } else { r })
}

fn parse_rows<T>(text: &str, parse: impl Fn(&str) -> Result<T>) -> Result<Vec<Vec<T>>> {
    let text = text.trim();
    if text.is_empty() {
        return Err(Error::Parse("empty matrix".into()));
    }
    text.split(';')
        .map(|row| row.split(',').map(|e| parse(e.trim())).collect())
        .collect()
}

pub fn rat_to_f64(x: &BigRational) -> f64 {
    // ratio of two big integers brought into f64 range by a shared shift
    let nb = x.numer().bits() as i64;
    let db = x.denom().bits() as i64;
    let shift_n = (nb - 1000).max(0) as u64;
    let shift_d = (db - 1000).max(0) as u64;
    let n = scaled_to_f64(x.numer(), shift_n);
    let d = scaled_to_f64(x.denom(), shift_d);
    n / d * 2f64.powi((shift_n as i64 - shift_d as i64) as i32)
}

/// `x / 2^shift` rounded to `f64`.
pub fn scaled_to_f64(x: &BigInt, shift: u64) -> f64 {
    let bits = x.bits();
    if bits <= 64 && shift == 0 {
        return x.to_f64().unwrap_or(f64::NAN);
    }
    // keep 64 significant bits, then fold the rest into the exponent
    let drop = bits.saturating_sub(64);
    let top = (x >> drop).to_f64().unwrap_or(f64::NAN);
    top * 2f64.powi(drop as i32 - shift as i32)
}

/// `ln |x|` for big integers beyond the `f64` range.
pub fn ln_abs(x: &BigInt) -> f64 {
    let bits = x.bits();
    let drop = bits.saturating_sub(64);
    let top = (x.abs() >> drop).to_f64().unwrap_or(f64::NAN);
    top.ln() + drop as f64 * std::f64::consts::LN_2
}
