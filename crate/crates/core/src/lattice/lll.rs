//! Integral LLL reduction driven by a Gram matrix.
//!
//! All quantities are the integer subdeterminants `d_i` and the scaled
//! Gram–Schmidt coefficients `λ_{ij} = d_j μ_{ij}`, so every division below
//! is exact and the reduction never loses precision.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::exact::IntMatrix;

/// Lovász parameter δ = 99/100.
const DELTA_NUM: i64 = 99;
const DELTA_DEN: i64 = 100;

/// Output of [`lll_gram`]: `gram = basisᵀ · G · basis`, basis vectors are the
/// columns of `basis`, and `basis` is unimodular.
#[derive(Clone, Debug)]
pub struct Reduced {
    pub basis: IntMatrix,
    pub gram: IntMatrix,
}

struct State {
    n: usize,
    // 1-indexed to follow the textbook recurrences; index 0 unused for b and λ
    g: Vec<Vec<BigInt>>,
    u: Vec<Vec<BigInt>>, // u[c] is basis column c
    d: Vec<BigInt>,
    lam: Vec<Vec<BigInt>>,
}

impl State {
    fn redi(&mut self, k: usize, l: usize) {
        let two_lam: BigInt = &self.lam[k][l] * 2;
        if two_lam.abs() <= self.d[l] {
            return;
        }
        let q = round_div(&self.lam[k][l], &self.d[l]);
        // b_k ← b_k − q b_l
        let gkl = self.g[k][l].clone();
        let gll = self.g[l][l].clone();
        self.g[k][k] = &self.g[k][k] - &gkl * &q * 2 + &gll * &q * &q;
        for j in 1..=self.n {
            if j == k {
                continue;
            }
            let t = &self.g[l][j] * &q;
            self.g[k][j] -= t;
            self.g[j][k] = self.g[k][j].clone();
        }
        let col_l = self.u[l].clone();
        for (x, y) in self.u[k].iter_mut().zip(col_l) {
            *x -= y * &q;
        }
        let t = &q * &self.d[l];
        self.lam[k][l] -= t;
        for i in 1..l {
            let t = &q * &self.lam[l][i];
            self.lam[k][i] -= t;
        }
    }

    fn swapi(&mut self, k: usize, kmax: usize) {
        self.g.swap(k, k - 1);
        for row in self.g.iter_mut() {
            row.swap(k, k - 1);
        }
        self.u.swap(k, k - 1);
        for j in 1..k.saturating_sub(1) {
            let t = self.lam[k][j].clone();
            self.lam[k][j] = self.lam[k - 1][j].clone();
            self.lam[k - 1][j] = t;
        }
        let lam = self.lam[k][k - 1].clone();
        let b = (&self.d[k - 2] * &self.d[k] + &lam * &lam) / &self.d[k - 1];
        for i in k + 1..=kmax {
            let t = self.lam[i][k].clone();
            self.lam[i][k] = (&self.d[k] * &self.lam[i][k - 1] - &lam * &t) / &self.d[k - 1];
            self.lam[i][k - 1] = (&b * &t + &lam * &self.lam[i][k]) / &self.d[k];
        }
        self.d[k - 1] = b;
    }

    fn gram_schmidt_row(&mut self, k: usize) -> Result<()> {
        for j in 1..=k {
            let mut u = self.g[k][j].clone();
            for i in 1..j {
                u = (&self.d[i] * &u - &self.lam[k][i] * &self.lam[j][i]) / &self.d[i - 1];
            }
            if j < k {
                self.lam[k][j] = u;
            } else {
                if !u.is_positive() {
                    return Err(Error::InvalidParameter(
                        "quadratic form is not positive definite".into(),
                    ));
                }
                self.d[k] = u;
            }
        }
        Ok(())
    }

    fn lovasz_fails(&self, k: usize) -> bool {
        let lhs = &self.d[k] * &self.d[k - 2] * DELTA_DEN;
        let lam = &self.lam[k][k - 1];
        let rhs = &self.d[k - 1] * &self.d[k - 1] * DELTA_NUM - lam * lam * DELTA_DEN;
        lhs < rhs
    }
}

/// Nearest integer to `a / b` for `b > 0`.
fn round_div(a: &BigInt, b: &BigInt) -> BigInt {
    let two_b: BigInt = b * 2;
    let num: BigInt = a * 2 + b;
    num.div_floor(&two_b)
}

/// LLL-reduces the lattice with positive-definite Gram matrix `gram`,
/// optionally starting from the unimodular `start` basis.
pub fn lll_gram(gram: &IntMatrix, start: Option<&IntMatrix>) -> Result<Reduced> {
    let n = gram.dim();
    let init = match start {
        Some(s) => s.clone(),
        None => IntMatrix::identity(n),
    };
    let g0 = &(&init.transpose() * gram) * &init;
    let mut st = State {
        n,
        g: pad(&g0.rows()),
        u: {
            let t = init.transpose();
            let mut cols = vec![vec![BigInt::zero(); n]];
            cols.extend(t.rows());
            cols
        },
        d: vec![BigInt::zero(); n + 1],
        lam: vec![vec![BigInt::zero(); n + 1]; n + 1],
    };
    st.d[0] = BigInt::one();
    st.gram_schmidt_row(1)?;
    let mut k = 2;
    let mut kmax = 1;
    while k <= n {
        if k > kmax {
            kmax = k;
            st.gram_schmidt_row(k)?;
        }
        st.redi(k, k - 1);
        if st.lovasz_fails(k) {
            st.swapi(k, kmax);
            k = (k - 1).max(2);
            continue;
        }
        for l in (1..k - 1).rev() {
            st.redi(k, l);
        }
        k += 1;
    }
    let basis_rows: Vec<Vec<BigInt>> = st.u[1..].to_vec();
    let basis = IntMatrix::from_rows(&basis_rows)?.transpose();
    let gram_rows: Vec<Vec<BigInt>> = st.g[1..].iter().map(|r| r[1..].to_vec()).collect();
    Ok(Reduced {
        basis,
        gram: IntMatrix::from_rows(&gram_rows)?,
    })
}

fn pad(rows: &[Vec<BigInt>]) -> Vec<Vec<BigInt>> {
    let n = rows.len();
    let mut out = vec![vec![BigInt::zero(); n + 1]; n + 1];
    for i in 0..n {
        for j in 0..n {
            out[i + 1][j + 1] = rows[i][j].clone();
        }
    }
    out
}
