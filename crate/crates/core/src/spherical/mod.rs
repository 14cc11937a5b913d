//! Spherical analysis: spherical functions, the Plancherel density and the
//! heat kernel obtained from them.

pub mod cfunction;
pub mod phi;
pub mod kernel;
pub mod pde;
