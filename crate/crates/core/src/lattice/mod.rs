//! Lattice reduction and short-vector enumeration on exact Gram matrices.

mod enumerate;
mod lll;

pub use enumerate::{canonical_sign, to_original, EnumStatus, Enumerator};
pub use lll::{lll_gram, Reduced};
