//! Heat kernels, spherical analysis and `L^p` bounds on Damek–Ricci spaces.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision)]

pub mod algebra;
pub mod bounds;
pub mod error;
pub mod group;
pub mod lps;
pub mod ode;
pub mod quadrature;
pub mod special;
pub mod spherical;

pub use error::{Error, Result};

/// Library version embedded in reports.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
