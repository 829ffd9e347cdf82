//! Degenerate-noise classification: does the noise matrix `B` reach every
//! direction once the dynamics has mixed it around?

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::eigenbasis::null_space;
use crate::error::{Error, Result};
use crate::exact::IntMatrix;

/// Eigenvalues of `Bᵀ` with modulus at most this are treated as degenerate.
pub const DEGENERACY_TOL: f64 = 1e-10;
/// Singular values below this fraction of the largest count as zero.
const RANK_TOL: f64 = 1e-8;
/// Largest acceptable condition number of the eigenvector matrix of `Bᵀ`.
const MAX_CONDITION: f64 = 1e8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DegeneracyCase {
    NoDissipation,
    Effective,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DegeneracyReport {
    pub case: DegeneracyCase,
    /// Numerical rank of the Krylov span of the nondegenerate eigenvectors.
    pub span_rank: usize,
    pub nondegenerate_eigenvectors: usize,
    pub eigenvector_condition: f64,
}

/// Classifies the noise `B` (row-major `d×d`) against the automorphism `a`.
///
/// The damping seen by mode `k` after `l` steps is `|B A^l k|`, so the
/// relevant directions are the orbits `(Aᵀ)^h u_j` of the eigenvectors `u_j`
/// of `Bᵀ` with nonzero eigenvalue, `1 ≤ h ≤ d`. If these span less than
/// the whole space the infimum of the objective is zero.
pub fn degeneracy_case(a: &IntMatrix, b: &[f64]) -> Result<DegeneracyReport> {
    let d = a.dim();
    if b.len() != d * d {
        return Err(Error::Dimension(format!(
            "noise matrix has {} entries, expected {}",
            b.len(),
            d * d
        )));
    }
    let bt = DMatrix::from_fn(d, d, |i, j| Complex64::new(b[j * d + i], 0.0));
    let scale = bt.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1.0);
    let mut mus: Vec<Complex64> = DMatrix::from_fn(d, d, |i, j| b[j * d + i])
        .complex_eigenvalues()
        .iter()
        .copied()
        .collect();
    // distinct eigenvalues
    mus.sort_by(|x, y| x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im)));
    let mut distinct: Vec<Complex64> = Vec::new();
    for mu in mus {
        if distinct.iter().all(|m| (m - mu).norm() > 1e-8 * scale) {
            distinct.push(mu);
        }
    }
    let mut vectors: Vec<(Complex64, Vec<Complex64>)> = Vec::new();
    for mu in distinct {
        let shifted = &bt - DMatrix::from_diagonal_element(d, d, mu);
        for v in null_space(&shifted, 1e-8) {
            vectors.push((mu, v));
        }
    }
    let condition = if vectors.len() == d {
        let m = DMatrix::from_fn(d, d, |i, j| vectors[j].1[i]);
        let s = m.singular_values();
        s.max() / s.min()
    } else {
        f64::INFINITY
    };
    if !(condition <= MAX_CONDITION) {
        return Err(Error::NotDiagonalizable { condition });
    }
    let at = {
        let af = a.to_f64();
        DMatrix::from_fn(d, d, |i, j| Complex64::new(af[j * d + i], 0.0))
    };
    let live: Vec<&Vec<Complex64>> = vectors
        .iter()
        .filter(|(mu, _)| mu.norm() > DEGENERACY_TOL)
        .map(|(_, v)| v)
        .collect();
    let mut columns: Vec<nalgebra::DVector<Complex64>> = Vec::new();
    for u in &live {
        let mut x = nalgebra::DVector::from_column_slice(u);
        for _ in 0..d {
            x = &at * x;
            let n = x.norm();
            columns.push(if n > 0.0 {
                &x / Complex64::new(n, 0.0)
            } else {
                x.clone()
            });
        }
    }
    let span_rank = if columns.is_empty() {
        0
    } else {
        let k = DMatrix::from_columns(&columns);
        let s = k.singular_values();
        let smax = s.max();
        s.iter().filter(|&&x| x > RANK_TOL * smax).count()
    };
    Ok(DegeneracyReport {
        case: if span_rank < d {
            DegeneracyCase::NoDissipation
        } else {
            DegeneracyCase::Effective
        },
        span_rank,
        nondegenerate_eigenvectors: live.len(),
        eigenvector_condition: condition,
    })
}

/// `u uᵀ` for the unit unstable eigenvector `u` of the symmetric cat map
/// `[[2,1],[1,1]]`, the standard no-dissipation example.
pub fn cat_unstable_projector() -> Vec<f64> {
    let lam = (3.0 + 5f64.sqrt()) / 2.0;
    // (A − λ)u = 0 ⇒ u ∝ (1, λ − 2)
    let (x, y) = (1.0, lam - 2.0);
    let n = (x * x + y * y).sqrt();
    let (x, y) = (x / n, y / n);
    vec![x * x, x * y, x * y, y * y]
}
