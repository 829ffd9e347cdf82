//! Noise-induced dissipation and kinematic-dynamo time scales of toral
//! automorphisms and affine toral maps under α-stable noise.
//!
//! The analytic path reduces every operator norm to a certified arithmetic
//! minimum over nonzero integer vectors; the [`fourier_sim`] module checks
//! the same quantities on a truncated Fourier basis.

pub mod arithmin;
pub mod dissipation;
pub mod dynamo;
pub mod error;
pub mod exact;
pub mod fit;
pub mod fourier_sim;
pub mod lattice;
pub mod spectral;

pub use error::{Error, Result};
pub use exact::{IntMatrix, IntPolynomial, RatMatrix, RatVector};
