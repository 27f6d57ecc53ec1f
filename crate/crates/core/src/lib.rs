//! Exact and certified computations around moments of quadratic character
//! sums over positive fundamental discriminants, and of the associated theta
//! functions.

pub mod analysis;
pub mod arith;
pub mod charsum;
pub mod constants;
pub mod error;
pub mod moments;
pub mod numeric;
pub mod polytope;
pub mod quadrature;
pub mod rational;
pub mod report;
pub mod squarecount;
pub mod theta;
pub mod verify;

pub use error::{Error, Result};
pub use rational::ExactRational;

/// Library version, recorded in report provenance.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
