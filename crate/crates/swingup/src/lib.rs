//! Selective preparation of collective states of two dipole-coupled emitters
//! driven by a two-color off-resonant pulse pair, with and without a lossy cavity.
//!
//! Units: Γ = 1 for rates and frequencies, 1/Γ for times.

pub mod collective;
pub mod disorder;
pub mod drive;
pub mod dynamics;
pub mod error;
pub mod integrator;
pub mod observables;
mod par;
pub mod presets;
pub mod qalgebra;
pub mod reproduce;
pub mod sweep;

pub use error::{Error, Result};
