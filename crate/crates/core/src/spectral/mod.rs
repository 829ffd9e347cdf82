//! Spectral and arithmetic classification of toral maps.
//!
//! Every yes/no property (ergodicity, zero entropy, diagonalizability,
//! irreducibility) is decided exactly with integer polynomial arithmetic.
//! Eigenvalues and entropies are floating-point, refined in double-double.

mod affine;
mod cyclotomic;
mod dd;
mod degeneracy;
mod eigenbasis;
mod factor;
mod roots;

pub use affine::{
    classify_affine, AffineClass, AffineClassification, Shift, ToralMap, DEFAULT_HEIGHT_BOUND,
    RELATION_TOL,
};
pub use cyclotomic::{cyclotomic, cyclotomics_up_to_degree, is_cyclotomic_product, totient};
pub use degeneracy::{
    cat_unstable_projector, degeneracy_case, DegeneracyCase, DegeneracyReport, DEGENERACY_TOL,
};
pub use eigenbasis::{eigen_basis, EigenBasisData};
pub use factor::{factor_over_q, factor_squarefree_monic};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::exact::{char_poly, IntMatrix, IntPolynomial};

/// Eigenvalue moduli within this distance of 1 contribute no entropy.
pub const UNIT_CIRCLE_TOL: f64 = 1e-9;

/// `(re, im, multiplicity)`, serialized as a JSON triple.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Eigenvalue(pub f64, pub f64, pub usize);

impl Eigenvalue {
    pub fn value(&self) -> Complex64 {
        Complex64::new(self.0, self.1)
    }

    pub fn multiplicity(&self) -> usize {
        self.2
    }
}

/// An irreducible factor of the characteristic polynomial.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FactorBlock {
    pub poly: IntPolynomial,
    pub degree_dj: usize,
    pub entropy_hj: f64,
    pub h_hat_j: f64,
    pub multiplicity: usize,
    /// `m` when the factor is the cyclotomic polynomial `Φ_m`.
    pub cyclotomic_index: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralReport {
    pub dim: usize,
    pub char_poly: IntPolynomial,
    pub eigenvalues: Vec<Eigenvalue>,
    pub entropy_h: f64,
    pub spectral_radius_rho: f64,
    pub ergodic: bool,
    pub diagonalizable: bool,
    pub irreducible: bool,
    pub zero_entropy: bool,
    pub factors: Vec<FactorBlock>,
    pub h_hat: f64,
    pub lambda_hat_geo: f64,
}

struct Analysed {
    poly: IntPolynomial,
    blocks: Vec<(FactorBlock, Vec<Complex64>)>,
}

fn analyse(a: &IntMatrix) -> Result<Analysed> {
    let poly = char_poly(a);
    let mut blocks = Vec::new();
    for (g, mult) in factor_over_q(&poly) {
        let cyc = cyclotomic::cyclotomic_index(&g);
        let rs = roots::roots_squarefree(&g)?;
        let h: f64 = if cyc.is_some() {
            0.0
        } else {
            rs.iter()
                .filter(|r| r.value.norm() >= 1.0 + UNIT_CIRCLE_TOL)
                .map(roots::ln_abs)
                .sum()
        };
        let deg = g.degree();
        blocks.push((
            FactorBlock {
                poly: g,
                degree_dj: deg,
                entropy_hj: h,
                h_hat_j: h / deg as f64,
                multiplicity: mult,
                cyclotomic_index: cyc,
            },
            rs.into_iter().map(|r| r.value).collect(),
        ));
    }
    Ok(Analysed { poly, blocks })
}

/// All eigenvalues with algebraic multiplicity, sorted by decreasing modulus.
pub fn eigenvalues(a: &IntMatrix) -> Result<Vec<Eigenvalue>> {
    Ok(eigenvalues_of(&analyse(a)?))
}

fn eigenvalues_of(an: &Analysed) -> Vec<Eigenvalue> {
    let mut out: Vec<Eigenvalue> = an
        .blocks
        .iter()
        .flat_map(|(b, rs)| {
            rs.iter()
                .map(move |z| Eigenvalue(z.re, z.im, b.multiplicity))
        })
        .collect();
    out.sort_by(|x, y| {
        y.value()
            .norm()
            .total_cmp(&x.value().norm())
            .then(y.1.total_cmp(&x.1))
    });
    out
}

/// Kolmogorov–Sinai entropy `Σ_{|λ|>1} ln|λ|` with multiplicity.
pub fn entropy(a: &IntMatrix) -> Result<f64> {
    let an = analyse(a)?;
    Ok(an
        .blocks
        .iter()
        .map(|(b, _)| b.entropy_hj * b.multiplicity as f64)
        .sum())
}

/// Ergodic iff no cyclotomic polynomial divides the characteristic polynomial.
pub fn is_ergodic(a: &IntMatrix) -> bool {
    !cyclotomic::has_cyclotomic_factor(&char_poly(a))
}

/// All eigenvalues are roots of unity.
pub fn zero_entropy_class(a: &IntMatrix) -> bool {
    is_cyclotomic_product(&char_poly(a))
}

/// Minimal dimensionally averaged entropy `min_j h_j / d_j`.
pub fn h_hat(a: &IntMatrix) -> Result<f64> {
    let an = analyse(a)?;
    Ok(an
        .blocks
        .iter()
        .map(|(b, _)| b.h_hat_j)
        .fold(f64::INFINITY, f64::min))
}

/// Exact test: the squarefree part of the characteristic polynomial
/// annihilates `a`, i.e. the minimal polynomial has no repeated factor.
pub fn is_diagonalizable(a: &IntMatrix) -> bool {
    let p = char_poly(a);
    let radical = p
        .squarefree_decomposition()
        .into_iter()
        .fold(IntPolynomial::one(), |acc, (g, _)| acc.mul(&g));
    radical.eval_matrix(a).is_zero()
}

/// Characteristic polynomial irreducible over `Q`.
pub fn is_irreducible(a: &IntMatrix) -> bool {
    let fs = factor_over_q(&char_poly(a));
    fs.len() == 1 && fs[0].1 == 1
}

/// Largest eigenvalue modulus.
pub fn spectral_radius(a: &IntMatrix) -> Result<f64> {
    Ok(eigenvalues(a)?
        .iter()
        .map(|e| e.value().norm())
        .fold(0.0, f64::max))
}

pub fn spectral_report(a: &IntMatrix) -> Result<SpectralReport> {
    crate::exact::require_automorphism(a)?;
    let an = analyse(a)?;
    let eigenvalues = eigenvalues_of(&an);
    let entropy_h: f64 = an
        .blocks
        .iter()
        .map(|(b, _)| b.entropy_hj * b.multiplicity as f64)
        .sum();
    let rho = eigenvalues
        .iter()
        .map(|e| e.value().norm())
        .fold(0.0, f64::max);
    let h_hat = an
        .blocks
        .iter()
        .map(|(b, _)| b.h_hat_j)
        .fold(f64::INFINITY, f64::min);
    let ergodic = an.blocks.iter().all(|(b, _)| b.cyclotomic_index.is_none());
    let zero_entropy = an.blocks.iter().all(|(b, _)| b.cyclotomic_index.is_some());
    let irreducible = an.blocks.len() == 1 && an.blocks[0].0.multiplicity == 1;
    Ok(SpectralReport {
        dim: a.dim(),
        char_poly: an.poly.clone(),
        eigenvalues,
        entropy_h,
        spectral_radius_rho: rho,
        ergodic,
        diagonalizable: is_diagonalizable(a),
        irreducible,
        zero_entropy,
        factors: an.blocks.into_iter().map(|(b, _)| b).collect(),
        h_hat,
        lambda_hat_geo: h_hat.exp(),
    })
}
