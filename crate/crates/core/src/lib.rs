//! Simulation of the fractional Cox-Ingersoll-Ross process.
//!
//! The process is built from a square-root process `Y` driven by fractional
//! Brownian motion,
//!
//! ```text
//! dY_t = 1/2 (k / Y_t - a Y_t) dt + sigma/2 dB^H_t,   Y_0 > 0,
//! ```
//!
//! and is defined as `X_t = Y_t^2` until the first time `Y` reaches zero, after
//! which it is held at zero. The crate provides
//!
//! - [`fgn`]: exact fractional Brownian motion samplers (dense Cholesky and
//!   FFT circulant embedding) plus a Hölder-constant estimator,
//! - [`sde`]: the Euler scheme for `Y` with absorption at zero,
//! - [`stratonovich`]: midpoint Riemann-Stieltjes sums and the pathwise SDE
//!   residual for `dX = (k - aX) dt + sigma sqrt(X) o dB^H`,
//! - [`experiments`]: a deterministic, parallel Monte Carlo harness for
//!   zero-hitting probabilities, comparison in `k` and `k` sweeps.

pub mod error;
pub mod experiments;
pub mod fgn;
pub mod sde;
pub mod stats;
pub mod stratonovich;

pub use error::{Error, Result};
pub use fgn::{FbmBackend, FbmPath, FbmSampler, HurstParameter, TimeGrid};
pub use sde::{SimConfig, TrajectoryResult};
