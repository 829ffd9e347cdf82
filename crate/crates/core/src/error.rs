use num_bigint::BigInt;
use thiserror::Error;

use crate::arithmin::MinResult;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("matrix is not unimodular (determinant {det})")]
    NonUnimodular { det: BigInt },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("root refinement stalled (residual {residual:e})")]
    ConvergenceFailure { residual: f64 },
    #[error("noise matrix is not diagonalizable (eigenvector condition number {condition:e})")]
    NotDiagonalizable { condition: f64 },
    #[error("enumeration exceeded its budget of {budget} nodes")]
    EnumerationBudgetExceeded {
        budget: u64,
        partial: Box<MinResult>,
    },
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("dissipation never takes place: {0}")]
    InfiniteDissipation(String),
    #[error("no finite peak time: {0}")]
    NoPeak(String),
    #[error("power iteration stalled after {iterations} iterations")]
    PowerIterationStall { iterations: usize },
    #[error("resolvent solve diverged: {0}")]
    SolveDivergence(String),
    #[error("density is negative on the sampling grid (minimum {min:e})")]
    NegativeDensity { min: f64 },
}
