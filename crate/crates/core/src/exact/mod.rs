//! Exact integer and rational linear algebra.

mod kernel;
mod matrix;
mod poly;
pub mod serde_int;

pub use kernel::{integer_kernel, rational_kernel};
pub use matrix::{
    ln_abs, parse_rational, rat_to_f64, scaled_to_f64, IntMatrix, RatMatrix, RatVector,
};
pub use poly::{IntPolynomial, RatPoly};

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

/// Characteristic polynomial `det(xI − A)` by fraction-free Faddeev–LeVerrier.
pub fn char_poly(a: &IntMatrix) -> IntPolynomial {
    faddeev_leverrier(a).0
}

/// Returns the characteristic polynomial and the final auxiliary matrix
/// `M_d = A^{d−1} + c_{d−1}A^{d−2} + … + c_1 I`, which satisfies
/// `A·M_d = −c_0·I`.
fn faddeev_leverrier(a: &IntMatrix) -> (IntPolynomial, IntMatrix) {
    let d = a.dim();
    let mut coeffs = vec![BigInt::zero(); d + 1];
    coeffs[d] = BigInt::one();
    let mut m = IntMatrix::zeros(d);
    for k in 1..=d {
        m = (a * &m).add(&IntMatrix::scalar(d, &coeffs[d - k + 1]));
        let t = (a * &m).trace();
        // exact: the coefficients of an integer characteristic polynomial are integers
        coeffs[d - k] = -t / BigInt::from(k);
    }
    (IntPolynomial::new(coeffs), m)
}

/// Exact inverse of a unimodular matrix.
pub fn inverse(a: &IntMatrix) -> Result<IntMatrix> {
    a.ensure_unimodular()?;
    let (p, m) = faddeev_leverrier(a);
    let c0 = &p.coeffs()[0];
    // A⁻¹ = −M_d / c_0 and |c_0| = 1
    Ok(if c0.is_positive() {
        m.scale(&BigInt::from(-1))
    } else {
        m
    })
}

/// `A^l` for any integer `l`; negative powers require `|det A| = 1`.
pub fn mat_pow(a: &IntMatrix, l: i64) -> Result<IntMatrix> {
    let base = if l < 0 { inverse(a)? } else { a.clone() };
    let mut e = l.unsigned_abs();
    let mut result = IntMatrix::identity(a.dim());
    let mut sq = base;
    while e > 0 {
        if e & 1 == 1 {
            result = &result * &sq;
        }
        e >>= 1;
        if e > 0 {
            sq = &sq * &sq;
        }
    }
    Ok(result)
}

/// `Q_n = Σ_{l=1..n} (A^l)ᵀ A^l`, so that `kᵀ Q_n k = Σ |A^l k|²`.
pub fn gram_form(a: &IntMatrix, n: usize) -> IntMatrix {
    weighted_gram_form(a, &IntMatrix::identity(a.dim()), n)
}

/// `Σ_{l=1..n} (A^l)ᵀ G A^l` by doubling, `S(2m) = S(m) + (A^m)ᵀ S(m) A^m`,
/// in `O(log n)` matrix products.
pub fn weighted_gram_form(a: &IntMatrix, g: &IntMatrix, n: usize) -> IntMatrix {
    fn go(a: &IntMatrix, g: &IntMatrix, n: usize) -> (IntMatrix, IntMatrix) {
        if n == 0 {
            return (IntMatrix::zeros(a.dim()), IntMatrix::identity(a.dim()));
        }
        let (s, p) = go(a, g, n / 2);
        let mut s2 = s.add(&(&(&p.transpose() * &s) * &p));
        let mut p2 = &p * &p;
        if n % 2 == 1 {
            p2 = &p2 * a;
            s2 = s2.add(&(&(&p2.transpose() * g) * &p2));
        }
        (s2, p2)
    }
    go(a, g, n).0
}

/// Largest singular value `‖A‖₂`.
pub fn operator_two_norm(a: &IntMatrix) -> f64 {
    ln_operator_two_norm(a).exp()
}

/// `ln ‖A‖₂`, finite even when the entries exceed the `f64` range.
///
/// Power iteration on the exact Gram matrix `AᵀA` rescaled by a power of two,
/// stopped by a Rayleigh-quotient test at `1e-12`.
pub fn ln_operator_two_norm(a: &IntMatrix) -> f64 {
    let g = a.gram();
    let max = g.max_abs_entry();
    if max.is_zero() {
        return f64::NEG_INFINITY;
    }
    let shift = max.bits().saturating_sub(60);
    let d = g.dim();
    let gf = g.to_f64_scaled(shift);
    let mut v: Vec<f64> = (0..d).map(|i| 1.0 + 0.1 * i as f64).collect();
    normalize(&mut v);
    let mut lambda = 0.0;
    let mut converged = false;
    for _ in 0..20_000 {
        let w: Vec<f64> = (0..d)
            .map(|i| (0..d).map(|j| gf[i * d + j] * v[j]).sum())
            .collect();
        let rq: f64 = w.iter().zip(&v).map(|(x, y)| x * y).sum();
        let mut w = w;
        let nw = normalize(&mut w);
        v = w;
        if nw == 0.0 {
            break;
        }
        if (rq - lambda).abs() <= 1e-12 * rq.abs() {
            lambda = rq;
            converged = true;
            break;
        }
        lambda = rq;
    }
    if !converged {
        // nearly-degenerate top singular values: fall back to a symmetric eigensolver
        let m = nalgebra::DMatrix::from_row_slice(d, d, &gf);
        lambda = m.symmetric_eigen().eigenvalues.max();
    }
    0.5 * (lambda.ln() + shift as f64 * std::f64::consts::LN_2)
}

fn normalize(v: &mut [f64]) -> f64 {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if n > 0.0 {
        v.iter_mut().for_each(|x| *x /= n);
    }
    n
}

/// Requires a square, unimodular matrix.
pub fn require_automorphism(a: &IntMatrix) -> Result<()> {
    if a.dim() == 0 {
        return Err(Error::Dimension("empty matrix".into()));
    }
    a.ensure_unimodular()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cofactor_det_oracle(m: &[Vec<i64>]) -> i64 {
        let n = m.len();
        if n == 1 {
            return m[0][0];
        }
        (0..n)
            .map(|j| {
                let minor: Vec<Vec<i64>> = m[1..]
                    .iter()
                    .map(|r| {
                        r.iter()
                            .enumerate()
                            .filter(|&(c, _)| c != j)
                            .map(|(_, &x)| x)
                            .collect()
                    })
                    .collect();
                let s = if j % 2 == 0 { 1 } else { -1 };
                s * m[0][j] * cofactor_det_oracle(&minor)
            })
            .sum()
    }

    #[test]
    fn char_poly_examples() {
        let cat = IntMatrix::from_i64([[2, 1], [1, 1]]);
        assert_eq!(char_poly(&cat), IntPolynomial::from_i64(&[1, -3, 1]));
        assert_eq!(
            char_poly(&IntMatrix::identity(3)),
            IntPolynomial::from_i64(&[-1, 3, -3, 1])
        );
        let plastic = IntMatrix::from_i64([[0, 1, 0], [0, 0, 1], [1, 1, 0]]);
        assert_eq!(
            char_poly(&plastic),
            IntPolynomial::from_i64(&[-1, -1, 0, 1])
        );
    }

    #[test]
    fn char_poly_matches_cofactor_oracle_at_integer_points() {
        // det(xI − A) evaluated at several x by cofactor expansion
        let rows = vec![vec![0i64, 1, 0], vec![0, 0, 1], vec![1, 1, 0]];
        let a = IntMatrix::from_rows(&rows).unwrap();
        let p = char_poly(&a);
        for x in -3i64..=3 {
            let m: Vec<Vec<i64>> = (0..3)
                .map(|i| {
                    (0..3)
                        .map(|j| if i == j { x } else { 0 } - rows[i][j])
                        .collect()
                })
                .collect();
            assert_eq!(
                p.eval(&BigInt::from(x)),
                BigInt::from(cofactor_det_oracle(&m))
            );
        }
    }

    #[test]
    fn powers() {
        let cat = IntMatrix::from_i64([[2, 1], [1, 1]]);
        assert_eq!(
            mat_pow(&cat, 2).unwrap(),
            IntMatrix::from_i64([[5, 3], [3, 2]])
        );
        assert_eq!(mat_pow(&cat, 0).unwrap(), IntMatrix::identity(2));
        assert_eq!(
            mat_pow(&cat, -1).unwrap(),
            IntMatrix::from_i64([[1, -1], [-1, 2]])
        );
        let shear = IntMatrix::from_i64([[1, 1], [0, 1]]);
        for n in [-7i64, 3, 40] {
            assert_eq!(
                mat_pow(&shear, n).unwrap(),
                IntMatrix::from_i64([[1, n], [0, 1]])
            );
        }
        let bad = IntMatrix::from_i64([[2, 1], [1, 2]]);
        assert!(matches!(
            mat_pow(&bad, -1),
            Err(Error::NonUnimodular { .. })
        ));
        assert_eq!(
            mat_pow(&bad, 2).unwrap(),
            IntMatrix::from_i64([[5, 4], [4, 5]])
        );
    }

    #[test]
    fn gram_examples() {
        let cat = IntMatrix::from_i64([[2, 1], [1, 1]]);
        assert_eq!(gram_form(&cat, 1), IntMatrix::from_i64([[5, 3], [3, 2]]));
        assert_eq!(
            gram_form(&IntMatrix::identity(2), 7),
            IntMatrix::scalar(2, &7.into())
        );
        let q3 = gram_form(&cat, 3);
        assert_eq!(q3.quadratic_form(&[2.into(), (-3).into()]), 8.into());
        // brute force over |k|∞ ≤ 10 confirms 8 is the minimum
        let mut best = None::<BigInt>;
        for x in -10i64..=10 {
            for y in -10i64..=10 {
                if x == 0 && y == 0 {
                    continue;
                }
                let v = q3.quadratic_form(&[x.into(), y.into()]);
                best = Some(best.map_or(v.clone(), |b| b.min(v)));
            }
        }
        assert_eq!(best.unwrap(), 8.into());
    }

    #[test]
    fn doubling_matches_direct_sum() {
        let a = IntMatrix::from_i64([[0, 1, 0], [0, 0, 1], [1, 1, 0]]);
        let g = IntMatrix::from_i64([[2, 1, 0], [1, 3, 0], [0, 0, 1]]);
        for n in 0..=13 {
            let mut direct = IntMatrix::zeros(3);
            for l in 1..=n {
                let p = mat_pow(&a, l as i64).unwrap();
                direct = direct.add(&(&(&p.transpose() * &g) * &p));
            }
            assert_eq!(weighted_gram_form(&a, &g, n), direct, "n = {n}");
        }
    }

    #[test]
    fn two_norm_examples() {
        assert!((operator_two_norm(&IntMatrix::identity(3)) - 1.0).abs() < 1e-12);
        let cat = IntMatrix::from_i64([[2, 1], [1, 1]]);
        let golden2 = (3.0 + 5f64.sqrt()) / 2.0;
        assert!((operator_two_norm(&cat) - golden2).abs() < 1e-12 * golden2);
        // σ_max of [[1,4],[0,1]] from the eigenvalues of MᵀM = [[1,4],[4,17]]
        let mtm_top = (18.0 + (18.0f64 * 18.0 - 4.0).sqrt()) / 2.0;
        let shear4 = IntMatrix::from_i64([[1, 4], [0, 1]]);
        assert!((operator_two_norm(&shear4) - mtm_top.sqrt()).abs() < 1e-11);
        assert!((operator_two_norm(&shear4) - 4.2360680).abs() < 1e-7);
        // huge entries stay finite in log form
        let big = mat_pow(&cat, 1000).unwrap();
        let ln = ln_operator_two_norm(&big);
        assert!((ln - 1000.0 * golden2.ln()).abs() < 1e-9 * ln);
        // orthogonal matrices have equal singular values
        let rot = IntMatrix::from_i64([[0, -1], [1, 0]]);
        assert!((operator_two_norm(&rot) - 1.0).abs() < 1e-12);
    }
}
