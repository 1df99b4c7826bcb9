//! # doa-lab
//!
//! A direction-of-arrival (DOA) estimation laboratory for uniform linear
//! arrays under impulsive symmetric alpha-stable noise.
//!
//! The crate covers the full simulation pipeline:
//!
//! - [`noise`] — real and complex isotropic SαS sampling plus generalized-SNR
//!   calibration of the noise scale;
//! - [`array`] — ULA steering vectors and snapshot synthesis;
//! - [`estimators`] — sample covariance, FLOM, and spatial-sign scatter
//!   matrices;
//! - [`spectral`] — Hermitian eigen-analysis and the Capon, MUSIC, and
//!   MUSIC-like spatial spectra, including the directional relaxation
//!   parameter and its bounds;
//! - [`metrics`] — peak extraction, resolution scoring, and RMSE;
//! - [`harness`] — seeded experiment configs, Monte Carlo sweeps, and CSV /
//!   JSON emission.
//!
//! See the `examples/` directory for one runnable walkthrough per capability
//! and the `doa-lab` binary for the batch interface.

pub mod array;
pub mod error;
pub mod estimators;
pub mod harness;
pub mod metrics;
pub mod noise;
pub mod spectral;

pub use error::{Error, Result};
