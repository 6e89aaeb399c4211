use super::FbmPath;
use crate::error::{Error, Result};

/// Up to this many steps every pair of grid points is scanned; above it only
/// dyadic lags `1, 2, 4, ...` are used.
pub const EXACT_SCAN_MAX_STEPS: usize = 2048;

/// Empirical Hölder constant of a sampled path for exponent `H - delta`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HolderEstimate {
    pub delta: f64,
    pub constant: f64,
}

/// `max |B_t - B_s| / (t - s)^{H - delta}` over grid pairs `s < t`.
pub fn estimate_holder_constant(path: &FbmPath, delta: f64) -> Result<HolderEstimate> {
    let hurst = path.hurst().value();
    if !(delta > 0.0 && delta < hurst) {
        return Err(Error::param("delta", format!("must lie in (0, H) = (0, {hurst}), got {delta}")));
    }
    let values = path.values();
    let n = path.grid().n_steps();
    let dt = path.grid().dt();
    let exponent = hurst - delta;
    let weight = |lag: usize| (lag as f64 * dt).powf(-exponent);

    let mut constant = 0.0f64;
    if n <= EXACT_SCAN_MAX_STEPS {
        for lag in 1..=n {
            let w = weight(lag);
            let widest =
                values[..=n - lag].iter().zip(&values[lag..]).map(|(s, t)| (t - s).abs()).fold(0.0, f64::max);
            constant = constant.max(widest * w);
        }
    } else {
        let mut lag = 1;
        while lag <= n {
            let w = weight(lag);
            let widest =
                values[..=n - lag].iter().zip(&values[lag..]).map(|(s, t)| (t - s).abs()).fold(0.0, f64::max);
            constant = constant.max(widest * w);
            lag *= 2;
        }
    }
    Ok(HolderEstimate { delta, constant })
}
