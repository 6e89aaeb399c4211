//! Fractional Brownian motion on uniform grids.
//!
//! Paths are produced by drawing stationary fractional Gaussian noise (the
//! increments of `B^H` over one grid step) and summing it. Two samplers share
//! the same distributional contract:
//!
//! - [`CholeskySampler`]: dense factorization of the increment covariance.
//!   Quadratic memory, used as the correctness oracle for small grids.
//! - [`CirculantSampler`]: Davies-Harte circulant embedding, `O(n log n)` per
//!   path. This is the production backend.
//!
//! Randomness is keyed by an experiment seed and a path index, see
//! [`path_rng`].

mod cholesky;
mod circulant;
mod holder;

use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

pub use cholesky::{CholeskySampler, MAX_REFERENCE_STEPS};
pub use circulant::CirculantSampler;
pub use holder::{estimate_holder_constant, HolderEstimate, EXACT_SCAN_MAX_STEPS};

/// Hurst index of a fractional Brownian motion, strictly inside `(0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct HurstParameter(f64);

impl HurstParameter {
    pub fn new(value: f64) -> Result<Self> {
        if value > 0.0 && value < 1.0 {
            Ok(Self(value))
        } else {
            Err(Error::InvalidHurst(value))
        }
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }
}

impl fmt::Display for HurstParameter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Uniform partition `t_i = i * dt`, `i = 0..=n_steps`, of `[0, t_end]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    t_end: f64,
    n_steps: usize,
    dt: f64,
}

impl TimeGrid {
    pub fn new(t_end: f64, n_steps: usize) -> Result<Self> {
        if !(t_end.is_finite() && t_end > 0.0) {
            return Err(Error::param("t_end", format!("must be positive and finite, got {t_end}")));
        }
        if n_steps == 0 {
            return Err(Error::param("n_steps", "must be at least 1"));
        }
        Ok(Self { t_end, n_steps, dt: t_end / n_steps as f64 })
    }

    /// Grid with step `dt`; `t_end` must be an integer multiple of `dt`.
    pub fn from_step(t_end: f64, dt: f64) -> Result<Self> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::param("dt", format!("must be positive and finite, got {dt}")));
        }
        if !(t_end.is_finite() && t_end > 0.0) {
            return Err(Error::param("t_end", format!("must be positive and finite, got {t_end}")));
        }
        let ratio = t_end / dt;
        let n_steps = ratio.round();
        if n_steps < 1.0 || (ratio - n_steps).abs() > 1e-9 * n_steps {
            return Err(Error::param(
                "dt",
                format!("t_end = {t_end} is not an integer multiple of dt = {dt}"),
            ));
        }
        Self::new(t_end, n_steps as usize)
    }

    #[inline]
    pub fn t_end(&self) -> f64 {
        self.t_end
    }

    #[inline]
    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    #[inline]
    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Number of grid points, `n_steps + 1`.
    #[inline]
    pub fn len(&self) -> usize {
        self.n_steps + 1
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn time(&self, index: usize) -> f64 {
        index as f64 * self.dt
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len()).map(|i| self.time(i))
    }

    /// The grid keeping every `stride`-th point. `n_steps` must divide evenly.
    pub fn coarsen(&self, stride: usize) -> Result<Self> {
        if stride == 0 || !self.n_steps.is_multiple_of(stride) {
            return Err(Error::param("stride", format!("{stride} does not divide {} steps", self.n_steps)));
        }
        Self::new(self.t_end, self.n_steps / stride)
    }
}

/// A sampled fBm trajectory. `values[0] == 0` and `values.len() == grid.len()`.
#[derive(Debug, Clone, PartialEq)]
pub struct FbmPath {
    grid: TimeGrid,
    hurst: HurstParameter,
    values: Vec<f64>,
}

impl FbmPath {
    pub fn new(grid: TimeGrid, hurst: HurstParameter, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::LengthMismatch { expected: grid.len(), actual: values.len() });
        }
        if values[0] != 0.0 {
            return Err(Error::param("values", format!("path must start at 0, got {}", values[0])));
        }
        Ok(Self { grid, hurst, values })
    }

    /// The identically zero path; drives the noise-free version of an SDE.
    pub fn zeros(grid: TimeGrid, hurst: HurstParameter) -> Self {
        Self { grid, hurst, values: vec![0.0; grid.len()] }
    }

    pub(crate) fn from_increments(grid: TimeGrid, hurst: HurstParameter, increments: &[f64]) -> Self {
        debug_assert_eq!(increments.len(), grid.n_steps());
        let mut values = Vec::with_capacity(grid.len());
        values.push(0.0);
        let mut acc = 0.0;
        for dx in increments {
            acc += dx;
            values.push(acc);
        }
        Self { grid, hurst, values }
    }

    #[inline]
    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    #[inline]
    pub fn hurst(&self) -> HurstParameter {
        self.hurst
    }

    #[inline]
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn terminal(&self) -> f64 {
        self.values[self.values.len() - 1]
    }

    /// `B_{t_i} - B_{t_{i-1}}` for `i = 1..=n_steps`.
    pub fn increments(&self) -> impl Iterator<Item = f64> + '_ {
        self.values.windows(2).map(|w| w[1] - w[0])
    }

    /// Restriction to the coarser grid keeping every `stride`-th point. The
    /// result is again an exact fBm sample on that grid.
    pub fn subsample(&self, stride: usize) -> Result<Self> {
        let grid = self.grid.coarsen(stride)?;
        let values = self.values.iter().step_by(stride).copied().collect();
        Ok(Self { grid, hurst: self.hurst, values })
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self { grid: self.grid, hurst: self.hurst, values: self.values.iter().map(|v| v * factor).collect() }
    }
}

/// Covariance of fBm, `1/2 (s^{2H} + t^{2H} - |t - s|^{2H})`, for `s, t >= 0`.
pub fn fbm_covariance(s: f64, t: f64, hurst: HurstParameter) -> f64 {
    let two_h = 2.0 * hurst.value();
    0.5 * (s.powf(two_h) + t.powf(two_h) - (t - s).abs().powf(two_h))
}

/// Autocovariance of unit-step fractional Gaussian noise at integer `lag`.
pub(crate) fn fgn_autocovariance(lag: usize, hurst: HurstParameter) -> f64 {
    let two_h = 2.0 * hurst.value();
    let k = lag as f64;
    if lag == 0 {
        return 1.0;
    }
    0.5 * ((k + 1.0).powf(two_h) - 2.0 * k.powf(two_h) + (k - 1.0).powf(two_h))
}

/// Random stream for path `path_index` of the experiment keyed by `seed`.
///
/// The seed initializes a ChaCha8 generator through `seed_from_u64` and the
/// path index selects the ChaCha stream. Streams are disjoint, and any single
/// path can be regenerated without touching the others.
pub fn path_rng(seed: u64, path_index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(path_index);
    rng
}

/// A precomputed fBm generator for one `(grid, H)` pair.
pub trait FbmSampler: Send + Sync {
    fn grid(&self) -> &TimeGrid;

    fn hurst(&self) -> HurstParameter;

    /// Writes one draw of the `n_steps` fGn increments into `out`.
    fn fill_increments(&self, rng: &mut ChaCha8Rng, out: &mut [f64]);

    /// Path `path_index` of the experiment keyed by `seed`.
    fn sample(&self, seed: u64, path_index: u64) -> FbmPath {
        let mut rng = path_rng(seed, path_index);
        let mut increments = vec![0.0; self.grid().n_steps()];
        self.fill_increments(&mut rng, &mut increments);
        FbmPath::from_increments(*self.grid(), self.hurst(), &increments)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FbmBackend {
    #[default]
    Fft,
    Reference,
}

impl FbmBackend {
    pub fn build(self, grid: TimeGrid, hurst: HurstParameter) -> Result<Box<dyn FbmSampler>> {
        Ok(match self {
            FbmBackend::Fft => Box::new(CirculantSampler::new(grid, hurst)?),
            FbmBackend::Reference => Box::new(CholeskySampler::new(grid, hurst)?),
        })
    }
}

impl FromStr for FbmBackend {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fft" => Ok(FbmBackend::Fft),
            "reference" => Ok(FbmBackend::Reference),
            other => {
                Err(Error::param("fbm-backend", format!("expected `fft` or `reference`, got `{other}`")))
            }
        }
    }
}

impl fmt::Display for FbmBackend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FbmBackend::Fft => "fft",
            FbmBackend::Reference => "reference",
        })
    }
}

/// One path from the dense Cholesky oracle, path index 0 of `seed`.
pub fn sample_fbm_reference(grid: TimeGrid, hurst: HurstParameter, seed: u64) -> Result<FbmPath> {
    Ok(CholeskySampler::new(grid, hurst)?.sample(seed, 0))
}

/// One path from the circulant-embedding sampler, path index 0 of `seed`.
pub fn sample_fbm_fft(grid: TimeGrid, hurst: HurstParameter, seed: u64) -> Result<FbmPath> {
    Ok(CirculantSampler::new(grid, hurst)?.sample(seed, 0))
}
