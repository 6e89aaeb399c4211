//! Midpoint Riemann-Stieltjes sums and the pathwise check of
//!
//! ```text
//! X_t = X_0 + ∫_0^t (k - a X_s) ds + sigma ∫_0^t sqrt(X_s) o dB^H_s,   t <= τ.
//! ```
//!
//! Both checks run on the simulation grid. On an absorbed path the window
//! stops at the last grid point before absorption.

use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fgn::{FbmBackend, FbmPath, TimeGrid};
use crate::sde::{simulate_y, SimConfig};
use crate::stats;

/// Value of a midpoint sum together with its partition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StieltjesSum {
    pub value: f64,
    pub n_intervals: usize,
    pub mesh: f64,
}

fn midpoint_sum(integrand: &[f64], integrator: &[f64]) -> f64 {
    integrand.windows(2).zip(integrator.windows(2)).map(|(f, g)| 0.5 * (f[1] + f[0]) * (g[1] - g[0])).sum()
}

/// `Σ (f_i + f_{i-1}) / 2 * (g_i - g_{i-1})` over the grid.
pub fn stratonovich_sum(integrand: &[f64], integrator: &[f64], grid: &TimeGrid) -> Result<StieltjesSum> {
    for len in [integrand.len(), integrator.len()] {
        if len != grid.len() {
            return Err(Error::LengthMismatch { expected: grid.len(), actual: len });
        }
    }
    Ok(StieltjesSum {
        value: midpoint_sum(integrand, integrator),
        n_intervals: grid.n_steps(),
        mesh: grid.dt(),
    })
}

/// Absolute residual of the integral equation for `X` on `[0, τ ∧ T]`.
///
/// The `ds` integral uses the trapezoid rule and the `dB^H` integral the
/// midpoint sum with integrand `sqrt(X)`.
pub fn sde_residual(config: &SimConfig, noise: &FbmPath) -> Result<f64> {
    let traj = simulate_y(config, noise)?;
    let end = traj.last_alive_index();
    let x = &traj.x[..=end];
    let b = &noise.values()[..=end];
    let dt = config.grid().dt();
    let (a, k) = (config.a(), config.k());

    let drift: f64 = x.windows(2).map(|w| 0.5 * ((k - a * w[0]) + (k - a * w[1])) * dt).sum();
    let root_x: Vec<f64> = x.iter().map(|v| v.sqrt()).collect();
    let noise_term = config.sigma() * midpoint_sum(&root_x, b);
    Ok((x[end] - x[0] - drift - noise_term).abs())
}

/// Reconstruction error of `X_t - X_0` from the difference-of-squares
/// expansion of the scheme.
///
/// With `D_i = (k / Y_{i-1} - a Y_{i-1}) dt` and `I_i = D_1 + ... + D_i` the
/// Euler path satisfies `Y_i = Y_0 + I_i / 2 + sigma/2 B_i`, and
///
/// ```text
/// X_t - X_0 = Σ Y_0 D_i + 1/4 Σ (I_i + I_{i-1}) D_i + sigma/4 Σ (B_i + B_{i-1}) D_i
///           + sigma Y_0 Σ ΔB_i + sigma^2/4 Σ (B_i + B_{i-1}) ΔB_i
///           + sigma/4 Σ (I_i + I_{i-1}) ΔB_i
/// ```
///
/// holds exactly, so the returned error is pure roundoff.
pub fn decomposition_error(config: &SimConfig, noise: &FbmPath) -> Result<f64> {
    let traj = simulate_y(config, noise)?;
    let end = traj.last_alive_index();
    let y = &traj.y;
    let b = noise.values();
    let dt = config.grid().dt();
    let (a, k, sigma, y0) = (config.a(), config.k(), config.sigma(), config.y0());

    let mut terms = [0.0f64; 6];
    let mut cum_prev = 0.0;
    for i in 1..=end {
        let d = (k / y[i - 1] - a * y[i - 1]) * dt;
        let cum = cum_prev + d;
        let cum_sum = cum + cum_prev;
        let db = b[i] - b[i - 1];
        let b_sum = b[i] + b[i - 1];
        terms[0] += y0 * d;
        terms[1] += 0.25 * cum_sum * d;
        terms[2] += 0.25 * sigma * b_sum * d;
        terms[3] += sigma * y0 * db;
        terms[4] += 0.25 * sigma * sigma * b_sum * db;
        terms[5] += 0.25 * sigma * cum_sum * db;
        cum_prev = cum;
    }
    let lhs = traj.x[end] - config.x0();
    Ok((lhs - terms.iter().sum::<f64>()).abs())
}

/// One row of a refinement study.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ResidualLevel {
    pub dt: f64,
    pub median_residual: f64,
    pub q90_residual: f64,
    pub n_paths: u64,
}

/// Residual statistics at each step size in `dts`.
///
/// Noise is sampled once per path on the finest grid and restricted to the
/// coarser ones, so every level sees the same fBm trajectory. Each `dt` must
/// be an integer multiple of the smallest one and divide `T`.
pub fn residual_study(
    config: &SimConfig,
    dts: &[f64],
    n_paths: u64,
    seed: u64,
    backend: FbmBackend,
) -> Result<Vec<ResidualLevel>> {
    if dts.is_empty() {
        return Err(Error::param("dts", "at least one step size is required"));
    }
    if n_paths == 0 {
        return Err(Error::param("n_paths", "must be at least 1"));
    }
    let t_end = config.grid().t_end();
    let finest_dt = dts.iter().copied().fold(f64::INFINITY, f64::min);
    let finest = TimeGrid::from_step(t_end, finest_dt)?;
    let strides = dts
        .iter()
        .map(|&dt| {
            let grid = TimeGrid::from_step(t_end, dt)?;
            if finest.n_steps() % grid.n_steps() != 0 {
                return Err(Error::param("dts", format!("{dt} is not an integer multiple of {finest_dt}")));
            }
            Ok(finest.n_steps() / grid.n_steps())
        })
        .collect::<Result<Vec<_>>>()?;

    let sampler = backend.build(finest, config.hurst())?;
    let per_path: Vec<Vec<f64>> = (0..n_paths)
        .into_par_iter()
        .map(|i| {
            let fine = sampler.sample(seed, i);
            strides
                .iter()
                .map(|&stride| {
                    let noise = fine.subsample(stride)?;
                    sde_residual(&config.with_grid(*noise.grid()), &noise)
                })
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<_>>()?;

    Ok(dts
        .iter()
        .enumerate()
        .map(|(level, &dt)| {
            let r: Vec<f64> = per_path.iter().map(|p| p[level]).collect();
            ResidualLevel {
                dt,
                median_residual: stats::median(&r),
                q90_residual: stats::quantile(&r, 0.9),
                n_paths,
            }
        })
        .collect())
}

/// Writes `dt,median_residual,q90_residual,n_paths`.
pub fn write_residual_csv<W: Write>(writer: W, levels: &[ResidualLevel]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for level in levels {
        w.serialize(level)?;
    }
    if levels.is_empty() {
        w.write_record(["dt", "median_residual", "q90_residual", "n_paths"])?;
    }
    w.flush()?;
    Ok(())
}
