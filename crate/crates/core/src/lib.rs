//! Asymptotic-preserving splitting solver for the slab three-temperature
//! radiative transfer model, with discrete-ordinates and equilibrium-diffusion
//! reference solvers.

pub mod angular;
pub mod banded;
pub mod context;
pub mod diagnostics;
pub mod diffusion;
pub mod error;
pub mod grid;
pub mod integrator;
pub mod macroscopic;
pub mod microscopic;
pub mod output;
pub mod physics;
pub mod quartic;
pub mod runner;
pub mod scenarios;
pub mod sn;
pub mod spatial;
pub mod studies;

#[cfg(test)]
pub(crate) mod testutil;

pub use error::{Error, Result};
