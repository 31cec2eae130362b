//! p-adic arithmetic in a finite extension `L / Q_p`.

mod element;
mod field;
pub(crate) mod residue;

pub use element::{FieldElement, Valuation};
pub use field::{LocalFieldDesc, DEFAULT_PREC};

/// Exact rationals used for valuations and precisions.
pub type Rational = num_rational::Ratio<i64>;
