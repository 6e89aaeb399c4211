use std::fmt;
use std::io::Write;

use serde::Serialize;

use super::HitProbSummary;
use crate::error::Result;
use crate::fgn::{HurstParameter, TimeGrid};
use crate::sde::SimConfig;

/// Published outcome for a reproduction case.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Expectation {
    /// Hit fraction within `tolerance` of `target`.
    Near { target: f64, tolerance: f64 },
    /// Hit fraction at most `bound`.
    AtMost(f64),
    /// No path hits zero.
    NoHits,
}

impl Expectation {
    pub fn is_met(&self, summary: &HitProbSummary) -> bool {
        match *self {
            Expectation::Near { target, tolerance } => (summary.fraction - target).abs() <= tolerance,
            Expectation::AtMost(bound) => summary.fraction <= bound,
            Expectation::NoHits => summary.n_hits == 0,
        }
    }
}

impl fmt::Display for Expectation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expectation::Near { target, tolerance } => write!(f, "{target}+-{tolerance}"),
            Expectation::AtMost(bound) => write!(f, "<={bound}"),
            Expectation::NoHits => f.write_str("0 hits"),
        }
    }
}

/// One parameter set of the published zero-hitting table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AppendixCase {
    pub label: &'static str,
    pub a: f64,
    pub k: f64,
    pub sigma: f64,
    pub hurst: f64,
    pub expected: Expectation,
}

impl AppendixCase {
    /// The case on `[0, T]` with step `dt` and `x0 = 1`.
    pub fn config(&self, t_end: f64, dt: f64) -> Result<SimConfig> {
        SimConfig::from_x0(
            self.a,
            self.k,
            self.sigma,
            HurstParameter::new(self.hurst)?,
            1.0,
            TimeGrid::from_step(t_end, dt)?,
        )
    }
}

pub const APPENDIX_T_END: f64 = 10.0;
pub const APPENDIX_DT: f64 = 0.001;
pub const APPENDIX_PATHS: u64 = 10_000;

const NEAR_TOLERANCE: f64 = 0.03;
const RARE_BOUND: f64 = 0.02;

/// The eight published configurations (`x0 = 1`, `T = 10`, `dt = 0.001`).
pub fn appendix_cases() -> [AppendixCase; 8] {
    let near = |target| Expectation::Near { target, tolerance: NEAR_TOLERANCE };
    let case = |label, k, sigma, hurst, expected| AppendixCase { label, a: 1.0, k, sigma, hurst, expected };
    [
        case("h0.6_k1_s1", 1.0, 1.0, 0.6, Expectation::NoHits),
        case("h0.8_k1_s1", 1.0, 1.0, 0.8, Expectation::NoHits),
        case("h0.4_k0.5_s1", 0.5, 1.0, 0.4, near(0.17)),
        case("h0.4_k1_s1", 1.0, 1.0, 0.4, Expectation::AtMost(RARE_BOUND)),
        case("h0.4_k1_s2", 1.0, 2.0, 0.4, near(0.86)),
        case("h0.4_k3_s2", 3.0, 2.0, 0.4, Expectation::AtMost(RARE_BOUND)),
        case("h0.2_k1_s1", 1.0, 1.0, 0.2, near(0.43)),
        case("h0.2_k3_s1", 3.0, 1.0, 0.2, Expectation::AtMost(RARE_BOUND)),
    ]
}

#[derive(Serialize)]
struct ManifestRow<'a> {
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
    expected: String,
    pass: bool,
}

/// Writes the summary columns plus `expected,pass` for each case.
pub fn write_manifest_csv<W: Write>(writer: W, rows: &[(AppendixCase, HitProbSummary)]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for (case, s) in rows {
        let c = &s.config;
        w.serialize(ManifestRow {
            label: case.label,
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
            expected: case.expected.to_string(),
            pass: case.expected.is_met(s),
        })?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cases_build_on_appendix_grid() {
        for case in appendix_cases() {
            let c = case.config(APPENDIX_T_END, APPENDIX_DT).unwrap();
            assert_eq!(c.grid().n_steps(), 10_000);
            assert_eq!(c.x0(), 1.0);
        }
    }

    #[test]
    fn expectation_display() {
        assert_eq!(Expectation::Near { target: 0.17, tolerance: 0.03 }.to_string(), "0.17+-0.03");
        assert_eq!(Expectation::AtMost(0.02).to_string(), "<=0.02");
    }

    #[test]
    fn manifest_layout() {
        let case = appendix_cases()[2];
        let config = case.config(1.0, 0.1).unwrap();
        let summary = super::super::estimate_hitting_probability(&config, 20, 1).unwrap();
        let mut buf = Vec::new();
        write_manifest_csv(&mut buf, &[(case, summary)]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            "label,a,k,sigma,H,x0,T,dt,n_paths,n_hits,fraction,ci_low,ci_high,seed,expected,pass"
        );
        let row = lines.next().unwrap();
        assert!(row.starts_with("h0.4_k0.5_s1,1.0,0.5,1.0,0.4,1.0,1.0,0.1,20,"), "{row}");
        assert!(row.contains(",0.17+-0.03,"));
    }
}
