//! Quantum typicality of collective observables on microcanonical subspaces
//! of a two-mode Bose gas.
//!
//! The crate is organised bottom-up:
//!
//! - [`fock`]: the `N`-boson two-mode Fock ladder, exact harmonic-oscillator
//!   moments and banded collective observables `X_p = Σ m_ij a_i† a_j`.
//! - [`ensemble`]: symmetric imbalance windows, the microcanonical average and
//!   Haar-uniform random states on a window.
//! - [`typicality`]: statistical, quantum and total variances, exactly via
//!   traces and by Monte Carlo with jackknife errors.
//! - [`scaling`]: expansion coefficients of the total variance, least-squares
//!   recovery of them, and sweeps of the relative fluctuation with `N`.
//! - [`cli`]: the command-line driver.

pub mod cli;
pub mod ensemble;
mod error;
pub mod fock;
pub mod scaling;
pub mod stats;
pub mod typicality;

pub use error::{Error, Result};
