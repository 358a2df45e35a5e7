//! Soliton collisions for generalized KdV equations
//! `u_t + (u_xx + f(u))_x = 0`.
//!
//! The crate builds solitons for power, Gardner and perturbed nonlinearities,
//! inverts the linearized operator around the large soliton, solves the
//! cascade of linear systems that describes the interaction with a small
//! soliton, and extracts the collision defect `d(eps)`. Closed-form
//! reference values for the perturbative regime live in [`oracle`], and
//! [`approx`] assembles the approximate two-soliton solutions.
//!
//! Everything here is allocation-based but `no_std`; file formats, the
//! spectral evolver and the command line live in the `gkdv-lab` crate.
#![no_std]

extern crate alloc;

pub mod algebra;
pub mod approx;
pub mod banded;
pub mod cascade;
pub mod closed;
mod error;
pub mod linop;
pub mod nonlinearity;
pub mod numerics;
pub mod omega;
pub mod oracle;
pub mod soliton;

pub use error::{Error, Result};
pub use nonlinearity::{Family, Nonlinearity};
