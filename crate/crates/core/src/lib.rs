//! Anisotropy-corrected biphoton wave functions from type-I SPDC in uniaxial
//! crystals: momentum and coordinate distributions, width analysis and
//! entanglement quantifiers.

pub mod amplitude;
pub mod crystal;
pub mod distributions;
pub mod entanglement;
pub mod error;
pub mod quadrature;
pub mod runner;

pub use error::{Error, Result};
