//! Eigenvectors of the linear part and of its transpose.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::exact::IntMatrix;

/// Right eigenvectors `v_j` of `A` (unit norm) and dual vectors `u_j`,
/// eigenvectors of `Aᵀ` scaled so that `u_iᵀ v_j = δ_ij` (bilinear pairing).
#[derive(Clone, Debug)]
pub struct EigenBasisData {
    pub eigenvalues: Vec<Complex64>,
    pub v: Vec<Vec<Complex64>>,
    pub u: Vec<Vec<Complex64>>,
}

impl EigenBasisData {
    /// `u_iᵀ v_j`.
    pub fn pairing(&self, i: usize, j: usize) -> Complex64 {
        self.u[i].iter().zip(&self.v[j]).map(|(a, b)| a * b).sum()
    }
}

/// Orthonormal basis of the numerical null space of `m`.
pub(crate) fn null_space(m: &DMatrix<Complex64>, rel_tol: f64) -> Vec<Vec<Complex64>> {
    let d = m.ncols();
    let svd = m.clone().svd(false, true);
    let vt = svd.v_t.expect("requested");
    let smax = svd.singular_values.max().max(1.0);
    (0..d)
        .filter(|&i| svd.singular_values[i] <= rel_tol * smax)
        .map(|i| (0..d).map(|c| vt[(i, c)].conj()).collect())
        .collect()
}

pub fn eigen_basis(a: &IntMatrix) -> Result<EigenBasisData> {
    if !super::is_diagonalizable(a) {
        return Err(Error::NotDiagonalizable {
            condition: f64::INFINITY,
        });
    }
    let d = a.dim();
    let af = a.to_f64();
    let am = DMatrix::from_fn(d, d, |i, j| Complex64::new(af[i * d + j], 0.0));
    let at = am.transpose();
    let eig = super::eigenvalues(a)?;
    let mut eigenvalues = Vec::new();
    let mut v = Vec::new();
    let mut u = Vec::new();
    for e in &eig {
        let lam = e.value();
        let shift = DMatrix::from_diagonal_element(d, d, lam);
        let mut vs = null_space(&(&am - &shift), 1e-9);
        let mut us = null_space(&(&at - &shift), 1e-9);
        let m = e.multiplicity();
        if vs.len() != m || us.len() != m {
            return Err(Error::NotDiagonalizable {
                condition: f64::INFINITY,
            });
        }
        // biorthogonalise within the eigenspace: new u_j = Σ_i (G⁻¹)_{ji} u_i
        let g = DMatrix::from_fn(m, m, |i, j| {
            us[i]
                .iter()
                .zip(&vs[j])
                .map(|(x, y)| x * y)
                .sum::<Complex64>()
        });
        let ginv = g.try_inverse().ok_or(Error::NotDiagonalizable {
            condition: f64::INFINITY,
        })?;
        let new_u: Vec<Vec<Complex64>> = (0..m)
            .map(|j| {
                (0..d)
                    .map(|c| (0..m).map(|i| ginv[(j, i)] * us[i][c]).sum())
                    .collect()
            })
            .collect();
        us = new_u;
        for _ in 0..m {
            eigenvalues.push(lam);
        }
        v.append(&mut vs);
        u.append(&mut us);
    }
    Ok(EigenBasisData { eigenvalues, v, u })
}
