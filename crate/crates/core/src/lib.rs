//! Exact computations with filtered (phi, N)-modules over p-adic fields.

pub mod coeff;
pub mod cohomology;
pub mod colmez;
pub mod error;
pub mod filtration;
pub mod json;
pub mod linalg;
pub mod monodromy;
pub mod padic;
pub mod phin;

pub use error::{Error, ErrorKind, Result};
