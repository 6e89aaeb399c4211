//! Monte Carlo harness for zero-hitting experiments.
//!
//! Path `i` of an experiment with seed `s` is always driven by
//! `sampler.sample(s, i)`, so every path is reproducible on its own and
//! experiments that vary `k` see identical noise per path index. Paths run in
//! parallel on the current rayon pool; results are merged with integer
//! counting and `max`, which makes them independent of the worker count.

mod appendix;

use std::cmp::Ordering;
use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fgn::{FbmBackend, FbmSampler, HurstParameter};
use crate::sde::{euler_into, SimConfig};
use crate::stats::{wilson_interval, Z_95};

pub use appendix::{
    appendix_cases, write_manifest_csv, AppendixCase, Expectation, APPENDIX_DT, APPENDIX_PATHS,
    APPENDIX_T_END,
};

/// Empirical `P(τ <= T)` with a 95% Wilson interval.
#[derive(Debug, Clone, PartialEq)]
pub struct HitProbSummary {
    pub config: SimConfig,
    pub n_paths: u64,
    pub n_hits: u64,
    pub fraction: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub seed: u64,
}

impl HitProbSummary {
    fn new(config: SimConfig, n_paths: u64, n_hits: u64, seed: u64) -> Self {
        let (ci_low, ci_high) = wilson_interval(n_hits, n_paths, Z_95);
        Self { config, n_paths, n_hits, fraction: n_hits as f64 / n_paths as f64, ci_low, ci_high, seed }
    }

    pub fn survival(&self) -> f64 {
        1.0 - self.fraction
    }
}

/// Ordering diagnostics for two drift levels `k1 < k2` under shared noise.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonReport {
    pub k1: f64,
    pub k2: f64,
    pub n_paths: u64,
    /// Grid points with `Y^(k1) > Y^(k2)` while both are unabsorbed.
    pub n_order_violations: u64,
    /// Paths with `τ^(k1) > τ^(k2)`, an unabsorbed path counting as `τ = ∞`.
    pub n_tau_violations: u64,
    /// Largest `Y^(k1) - Y^(k2)` seen at any grid point, or 0.
    pub max_violation: f64,
}

impl ComparisonReport {
    pub fn is_clean(&self) -> bool {
        self.n_order_violations == 0 && self.n_tau_violations == 0
    }
}

/// Hit summaries along increasing `k` with shared noise.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepReport {
    pub summaries: Vec<HitProbSummary>,
    /// Paths whose hit indicator or absorption time is not monotone in `k`.
    pub n_monotonicity_violations: u64,
}

impl SweepReport {
    pub fn fractions(&self) -> Vec<f64> {
        self.summaries.iter().map(|s| s.fraction).collect()
    }
}

fn validate_paths(n_paths: u64) -> Result<()> {
    if n_paths == 0 {
        return Err(Error::param("n_paths", "must be at least 1"));
    }
    Ok(())
}

/// Absorption time as a sortable key, unabsorbed paths last.
fn tau_key(tau: Option<usize>) -> usize {
    tau.unwrap_or(usize::MAX)
}

/// Monte Carlo driver parameterized by the fBm backend.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Harness {
    backend: FbmBackend,
}

impl Harness {
    pub fn new(backend: FbmBackend) -> Self {
        Self { backend }
    }

    pub fn backend(&self) -> FbmBackend {
        self.backend
    }

    fn sampler(&self, config: &SimConfig) -> Result<Box<dyn FbmSampler>> {
        self.backend.build(*config.grid(), config.hurst())
    }

    pub fn hitting_probability(&self, config: &SimConfig, n_paths: u64, seed: u64) -> Result<HitProbSummary> {
        validate_paths(n_paths)?;
        let sampler = self.sampler(config)?;
        let len = config.grid().len();
        let n_hits = (0..n_paths)
            .into_par_iter()
            .map_init(
                || vec![0.0; len],
                |y, i| {
                    let noise = sampler.sample(seed, i);
                    let (tau, _) = euler_into(config, noise.values(), y);
                    u64::from(tau.is_some())
                },
            )
            .sum();
        Ok(HitProbSummary::new(*config, n_paths, n_hits, seed))
    }

    /// Hitting probability for a configuration where strict positivity is
    /// expected (`k > 0`, `H > 1/2`); a correct run reports zero hits.
    pub fn positivity_check(&self, config: &SimConfig, n_paths: u64, seed: u64) -> Result<HitProbSummary> {
        if !(config.k() > 0.0 && config.hurst().value() > 0.5) {
            return Err(Error::param(
                "config",
                format!(
                    "positivity requires k > 0 and H > 1/2 (got k = {}, H = {}); use the hitting probability estimator instead",
                    config.k(),
                    config.hurst()
                ),
            ));
        }
        self.hitting_probability(config, n_paths, seed)
    }

    pub fn comparison(
        &self,
        base: &SimConfig,
        k1: f64,
        k2: f64,
        n_paths: u64,
        seed: u64,
    ) -> Result<ComparisonReport> {
        if k1.partial_cmp(&k2) != Some(Ordering::Less) {
            return Err(Error::param("k1", format!("k1 < k2 required, got k1 = {k1}, k2 = {k2}")));
        }
        validate_paths(n_paths)?;
        let low = base.with_k(k1)?;
        let high = base.with_k(k2)?;
        let sampler = self.sampler(base)?;
        let len = base.grid().len();

        let (n_order, n_tau, max_violation) = (0..n_paths)
            .into_par_iter()
            .map_init(
                || (vec![0.0; len], vec![0.0; len]),
                |(y1, y2), i| {
                    let noise = sampler.sample(seed, i);
                    let (tau1, _) = euler_into(&low, noise.values(), y1);
                    let (tau2, _) = euler_into(&high, noise.values(), y2);
                    let both_alive = tau_key(tau1).min(tau_key(tau2)).min(len);
                    let order = (0..both_alive).filter(|&j| y1[j] > y2[j]).count() as u64;
                    let tau_bad = u64::from(tau_key(tau1) > tau_key(tau2));
                    let gap = y1.iter().zip(y2.iter()).map(|(a, b)| a - b).fold(0.0, f64::max);
                    (order, tau_bad, gap)
                },
            )
            .reduce(|| (0, 0, 0.0), |a, b| (a.0 + b.0, a.1 + b.1, f64::max(a.2, b.2)));

        Ok(ComparisonReport {
            k1,
            k2,
            n_paths,
            n_order_violations: n_order,
            n_tau_violations: n_tau,
            max_violation,
        })
    }

    pub fn k_sweep(&self, base: &SimConfig, ks: &[f64], n_paths: u64, seed: u64) -> Result<SweepReport> {
        if ks.is_empty() {
            return Err(Error::param("ks", "at least one value is required"));
        }
        if ks.iter().any(|&k| !(k > 0.0 && k.is_finite())) {
            return Err(Error::param("ks", "all values must be positive"));
        }
        if ks.windows(2).any(|w| w[0].partial_cmp(&w[1]) != Some(Ordering::Less)) {
            return Err(Error::param("ks", "values must be strictly increasing"));
        }
        validate_paths(n_paths)?;
        let configs = ks.iter().map(|&k| base.with_k(k)).collect::<Result<Vec<_>>>()?;
        let sampler = self.sampler(base)?;
        let len = base.grid().len();

        let (hits, violations) = (0..n_paths)
            .into_par_iter()
            .map_init(
                || vec![0.0; len],
                |y, i| {
                    let noise = sampler.sample(seed, i);
                    let taus: Vec<Option<usize>> =
                        configs.iter().map(|c| euler_into(c, noise.values(), y).0).collect();
                    let hits: Vec<u64> = taus.iter().map(|t| u64::from(t.is_some())).collect();
                    let monotone = taus.windows(2).all(|w| tau_key(w[0]) <= tau_key(w[1]));
                    (hits, u64::from(!monotone))
                },
            )
            .reduce(
                || (vec![0; ks.len()], 0),
                |mut a, b| {
                    a.0.iter_mut().zip(&b.0).for_each(|(x, y)| *x += y);
                    (a.0, a.1 + b.1)
                },
            );

        Ok(SweepReport {
            summaries: configs
                .into_iter()
                .zip(hits)
                .map(|(c, h)| HitProbSummary::new(c, n_paths, h, seed))
                .collect(),
            n_monotonicity_violations: violations,
        })
    }

    /// Hitting probabilities over an `H x sigma` grid, row-major in `H`.
    /// Purely exploratory; nothing is asserted about the outcome.
    pub fn hurst_sigma_grid(
        &self,
        base: &SimConfig,
        hursts: &[HurstParameter],
        sigmas: &[f64],
        n_paths: u64,
        seed: u64,
    ) -> Result<Vec<HitProbSummary>> {
        let mut out = Vec::with_capacity(hursts.len() * sigmas.len());
        for &hurst in hursts {
            for &sigma in sigmas {
                let config = SimConfig::new(base.a(), base.k(), sigma, hurst, base.y0(), *base.grid())?;
                out.push(self.hitting_probability(&config, n_paths, seed)?);
            }
        }
        Ok(out)
    }
}

/// [`Harness::hitting_probability`] with the FFT backend.
pub fn estimate_hitting_probability(config: &SimConfig, n_paths: u64, seed: u64) -> Result<HitProbSummary> {
    Harness::default().hitting_probability(config, n_paths, seed)
}

/// [`Harness::positivity_check`] with the FFT backend.
pub fn positivity_check(config: &SimConfig, n_paths: u64, seed: u64) -> Result<HitProbSummary> {
    Harness::default().positivity_check(config, n_paths, seed)
}

/// [`Harness::comparison`] with the FFT backend.
pub fn comparison_experiment(
    base: &SimConfig,
    k1: f64,
    k2: f64,
    n_paths: u64,
    seed: u64,
) -> Result<ComparisonReport> {
    Harness::default().comparison(base, k1, k2, n_paths, seed)
}

/// [`Harness::k_sweep`] with the FFT backend.
pub fn k_sweep(base: &SimConfig, ks: &[f64], n_paths: u64, seed: u64) -> Result<SweepReport> {
    Harness::default().k_sweep(base, ks, n_paths, seed)
}

#[derive(Serialize)]
struct SummaryRow<'a> {
    label: &'a str,
    a: f64,
    k: f64,
    sigma: f64,
    #[serde(rename = "H")]
    hurst: f64,
    x0: f64,
    #[serde(rename = "T")]
    t_end: f64,
    dt: f64,
    n_paths: u64,
    n_hits: u64,
    fraction: f64,
    ci_low: f64,
    ci_high: f64,
    seed: u64,
}

impl<'a> SummaryRow<'a> {
    fn new(label: &'a str, s: &HitProbSummary) -> Self {
        let c = &s.config;
        Self {
            label,
            a: c.a(),
            k: c.k(),
            sigma: c.sigma(),
            hurst: c.hurst().value(),
            x0: c.x0(),
            t_end: c.grid().t_end(),
            dt: c.grid().dt(),
            n_paths: s.n_paths,
            n_hits: s.n_hits,
            fraction: s.fraction,
            ci_low: s.ci_low,
            ci_high: s.ci_high,
            seed: s.seed,
        }
    }
}

pub const SUMMARY_HEADER: [&str; 14] = [
    "label", "a", "k", "sigma", "H", "x0", "T", "dt", "n_paths", "n_hits", "fraction", "ci_low", "ci_high",
    "seed",
];

/// Writes one summary row per `(label, summary)` pair.
pub fn write_summary_csv<'a, W, I>(writer: W, rows: I) -> csv::Result<()>
where
    W: Write,
    I: IntoIterator<Item = (&'a str, &'a HitProbSummary)>,
{
    let mut w = csv::Writer::from_writer(writer);
    let mut any = false;
    for (label, summary) in rows {
        w.serialize(SummaryRow::new(label, summary))?;
        any = true;
    }
    if !any {
        w.write_record(SUMMARY_HEADER)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct ComparisonRow {
    k1: f64,
    k2: f64,
    n_paths: u64,
    n_order_violations: u64,
    n_tau_violations: u64,
    max_violation: f64,
}

/// Writes `k1,k2,n_paths,n_order_violations,n_tau_violations,max_violation`.
pub fn write_comparison_csv<W: Write>(writer: W, reports: &[ComparisonReport]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for r in reports {
        w.serialize(ComparisonRow {
            k1: r.k1,
            k2: r.k2,
            n_paths: r.n_paths,
            n_order_violations: r.n_order_violations,
            n_tau_violations: r.n_tau_violations,
            max_violation: r.max_violation,
        })?;
    }
    if reports.is_empty() {
        w.write_record(["k1", "k2", "n_paths", "n_order_violations", "n_tau_violations", "max_violation"])?;
    }
    w.flush()?;
    Ok(())
}
