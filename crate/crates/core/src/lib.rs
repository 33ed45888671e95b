//! Measure-valued isotropic Boltzmann–Nordheim solver and verification lab.

pub mod collision;
pub mod config;
pub mod equilibrium;
pub mod error;
mod float_serde;
pub mod grid;
pub mod kernel;
pub mod measure;
pub mod output;
pub mod quadrature;
pub mod simulator;
pub mod suite;
pub mod verifier;

pub use error::{Error, Result};
pub use grid::{Grid, GridSpec};
pub use kernel::{KernelFamily, KernelModel, KernelTable, QuadConfig};
