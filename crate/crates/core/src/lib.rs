//! Staircase multi-well sets, explicit branched microstructures, energy
//! evaluation, Fourier-space diagnostics and scaling-law checks.

pub mod compat;
pub mod constructions;
pub mod energy;
pub mod field;
pub mod quad;
pub mod scalar;
pub mod scaling;
pub mod spectral;
pub mod wells;

pub use scalar::{Exact, Scalar};
