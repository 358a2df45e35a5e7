//! Numerical experiments on top of `gkdv-core`: a Fourier pseudospectral
//! evolver, residuals of the approximate collision solutions, collision runs
//! with soliton fitting, and the `gkdv` command line.

pub mod cli;
pub mod config;
mod error;
pub mod evolver;
pub mod fit;
pub mod harness;
pub mod output;
pub mod residual;
pub mod spectral;

pub use error::{LabError, Result};

pub use cli::cli_dispatch;
