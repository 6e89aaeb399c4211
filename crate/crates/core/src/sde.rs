//! Euler scheme for the square-root process `Y` and the derived fractional
//! CIR process `X = Y^2 1{t < τ}`.
//!
//! One step is
//!
//! ```text
//! Y_n = Y_{n-1} + 1/2 (k / Y_{n-1} - a Y_{n-1}) dt + sigma/2 (B_n - B_{n-1})
//! ```
//!
//! taken only while `Y_{n-1} > 0`. The first produced value `<= 0` is the
//! absorption index; it and every later value are stored as zero. The drift
//! is never clamped, so one step may overshoot below zero; such steps are
//! counted in [`TrajectoryResult::overshoot_steps`].

use std::io::Write;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fgn::{FbmPath, HurstParameter, TimeGrid};

/// Parameters of `dY = 1/2 (k/Y - aY) dt + sigma/2 dB^H` on a grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    a: f64,
    k: f64,
    sigma: f64,
    hurst: HurstParameter,
    y0: f64,
    grid: TimeGrid,
}

impl SimConfig {
    /// `a` and `k` may be any finite reals; `sigma` and `y0` must be positive.
    pub fn new(a: f64, k: f64, sigma: f64, hurst: HurstParameter, y0: f64, grid: TimeGrid) -> Result<Self> {
        if !a.is_finite() {
            return Err(Error::param("a", format!("must be finite, got {a}")));
        }
        if !k.is_finite() {
            return Err(Error::param("k", format!("must be finite, got {k}")));
        }
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(Error::param("sigma", format!("must be positive, got {sigma}")));
        }
        if !(y0.is_finite() && y0 > 0.0) {
            return Err(Error::param("y0", format!("must be positive, got {y0}")));
        }
        Ok(Self { a, k, sigma, hurst, y0, grid })
    }

    /// Same as [`SimConfig::new`] with the initial value given as `x0 = y0^2`.
    pub fn from_x0(
        a: f64,
        k: f64,
        sigma: f64,
        hurst: HurstParameter,
        x0: f64,
        grid: TimeGrid,
    ) -> Result<Self> {
        if !(x0.is_finite() && x0 > 0.0) {
            return Err(Error::param("x0", format!("must be positive, got {x0}")));
        }
        Self::new(a, k, sigma, hurst, x0.sqrt(), grid)
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn hurst(&self) -> HurstParameter {
        self.hurst
    }

    pub fn y0(&self) -> f64 {
        self.y0
    }

    pub fn x0(&self) -> f64 {
        self.y0 * self.y0
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn with_k(mut self, k: f64) -> Result<Self> {
        if !k.is_finite() {
            return Err(Error::param("k", format!("must be finite, got {k}")));
        }
        self.k = k;
        Ok(self)
    }

    pub fn with_grid(mut self, grid: TimeGrid) -> Self {
        self.grid = grid;
        self
    }

    pub(crate) fn check_noise(&self, noise: &FbmPath) -> Result<()> {
        let g = noise.grid();
        if g.n_steps() != self.grid.n_steps() || g.t_end() != self.grid.t_end() {
            return Err(Error::GridMismatch {
                t_end: self.grid.t_end(),
                n_steps: self.grid.n_steps(),
                noise_t_end: g.t_end(),
                noise_steps: g.n_steps(),
            });
        }
        Ok(())
    }
}

/// One simulated `(Y, X)` pair on the configuration grid.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryResult {
    pub grid: TimeGrid,
    pub y: Vec<f64>,
    pub x: Vec<f64>,
    /// First grid index where the scheme produced a value `<= 0`.
    pub tau_index: Option<usize>,
    /// Steps with `|drift * dt| > Y_{n-1}`.
    pub overshoot_steps: usize,
}

impl TrajectoryResult {
    pub fn tau(&self) -> Option<f64> {
        self.tau_index.map(|i| self.grid.time(i))
    }

    pub fn is_absorbed(&self) -> bool {
        self.tau_index.is_some()
    }

    /// Last grid index with `Y > 0`.
    pub fn last_alive_index(&self) -> usize {
        self.tau_index.map_or(self.y.len() - 1, |i| i - 1)
    }
}

/// Runs the Euler scheme into `y` (length `n_steps + 1`) given the noise
/// values `B_{t_i}`. Returns the absorption index and the overshoot count.
pub(crate) fn euler_into(config: &SimConfig, noise: &[f64], y: &mut [f64]) -> (Option<usize>, usize) {
    debug_assert_eq!(noise.len(), y.len());
    let dt = config.grid.dt();
    let half_sigma = 0.5 * config.sigma;
    let (a, k) = (config.a, config.k);

    y[0] = config.y0;
    let mut overshoot = 0;
    for i in 1..y.len() {
        let prev = y[i - 1];
        let drift = 0.5 * (k / prev - a * prev) * dt;
        if drift.abs() > prev {
            overshoot += 1;
        }
        let next = prev + drift + half_sigma * (noise[i] - noise[i - 1]);
        if next <= 0.0 {
            y[i..].fill(0.0);
            return (Some(i), overshoot);
        }
        y[i] = next;
    }
    (None, overshoot)
}

/// The Euler trajectory of `Y` with absorption, together with `X`.
pub fn simulate_y(config: &SimConfig, noise: &FbmPath) -> Result<TrajectoryResult> {
    config.check_noise(noise)?;
    let mut y = vec![0.0; config.grid.len()];
    let (tau_index, overshoot_steps) = euler_into(config, noise.values(), &mut y);
    let x = y.iter().map(|v| v * v).collect();
    Ok(TrajectoryResult { grid: config.grid, y, x, tau_index, overshoot_steps })
}

/// The fractional CIR path `X_t = Y_t^2 1{t < τ}`.
///
/// Identical to [`simulate_y`]; both fill `y` and `x`. Absorbed entries of
/// `y` are zero, so squaring them gives the indicator for free.
pub fn simulate_x(config: &SimConfig, noise: &FbmPath) -> Result<TrajectoryResult> {
    simulate_y(config, noise)
}

/// Grid time of absorption, if the path was absorbed.
pub fn first_zero_hitting(result: &TrajectoryResult) -> Option<f64> {
    result.tau()
}

#[derive(Serialize)]
struct TrajectoryRow {
    path_id: u64,
    t: f64,
    y: f64,
    x: f64,
}

/// Streaming `path_id,t,y,x` writer, one row per grid point with absorbed
/// rows included. Lets callers emit paths in batches without holding them all.
pub struct TrajectoryWriter<W: Write> {
    inner: csv::Writer<W>,
    wrote_any: bool,
}

impl<W: Write> TrajectoryWriter<W> {
    pub fn new(writer: W) -> Self {
        Self { inner: csv::Writer::from_writer(writer), wrote_any: false }
    }

    pub fn write(&mut self, path_id: u64, traj: &TrajectoryResult) -> csv::Result<()> {
        for (i, (&y, &x)) in traj.y.iter().zip(&traj.x).enumerate() {
            self.inner.serialize(TrajectoryRow { path_id, t: traj.grid.time(i), y, x })?;
            self.wrote_any = true;
        }
        Ok(())
    }

    /// Flushes, writing the bare header if no rows were written.
    pub fn finish(mut self) -> csv::Result<W> {
        if !self.wrote_any {
            self.inner.write_record(["path_id", "t", "y", "x"])?;
        }
        self.inner.flush()?;
        self.inner.into_inner().map_err(|e| e.into_error().into())
    }
}

/// Writes all `paths` through a [`TrajectoryWriter`].
pub fn write_trajectories_csv<'a, W, I>(writer: W, paths: I) -> csv::Result<()>
where
    W: Write,
    I: IntoIterator<Item = (u64, &'a TrajectoryResult)>,
{
    let mut w = TrajectoryWriter::new(writer);
    for (path_id, traj) in paths {
        w.write(path_id, traj)?;
    }
    w.finish()?;
    Ok(())
}
