use std::fmt;
use std::sync::Arc;

use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::{fgn_autocovariance, FbmSampler, HurstParameter, TimeGrid};
use crate::error::{Error, Result};

/// Eigenvalues below this fraction of the largest one (in magnitude) are
/// treated as roundoff and clipped to zero.
const CLIP_RELATIVE: f64 = 1e-12;

/// Davies-Harte sampler for fractional Gaussian noise.
///
/// The `n x n` Toeplitz covariance is embedded in a symmetric circulant of
/// size `m = 2n` with first row `γ(0), ..., γ(n), γ(n-1), ..., γ(1)`. Its
/// eigenvalues `λ` are the DFT of that row. With `Z` a vector of complex
/// standard normals, the real part of `DFT(sqrt(λ / m) Z)` has exactly the
/// circulant covariance, so its first `n` entries are a fGn sample.
#[derive(Clone)]
pub struct CirculantSampler {
    grid: TimeGrid,
    hurst: HurstParameter,
    // sqrt(λ_j / m) * dt^H
    scale: Vec<f64>,
    fft: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for CirculantSampler {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CirculantSampler")
            .field("grid", &self.grid)
            .field("hurst", &self.hurst)
            .field("embedding_size", &self.scale.len())
            .finish()
    }
}

impl CirculantSampler {
    pub fn new(grid: TimeGrid, hurst: HurstParameter) -> Result<Self> {
        let n = grid.n_steps();
        let m = 2 * n;
        let mut row = vec![Complex64::new(0.0, 0.0); m];
        for (lag, c) in row.iter_mut().take(n + 1).enumerate() {
            c.re = fgn_autocovariance(lag, hurst);
        }
        for lag in 1..n {
            row[m - lag].re = row[lag].re;
        }

        let fft = FftPlanner::new().plan_fft_forward(m);
        fft.process(&mut row);

        let eigen: Vec<f64> = row.iter().map(|c| c.re).collect();
        let largest = eigen.iter().copied().fold(0.0, f64::max);
        if let Some(&bad) = eigen.iter().find(|&&l| l < -CLIP_RELATIVE * largest || !l.is_finite()) {
            return Err(Error::NegativeEigenvalue { n_steps: n, value: bad, largest });
        }

        let dt_h = grid.dt().powf(hurst.value());
        let scale = eigen.iter().map(|&l| (l.max(0.0) / m as f64).sqrt() * dt_h).collect();

        Ok(Self { grid, hurst, scale, fft })
    }

    /// Size of the circulant embedding, `2 * n_steps`.
    pub fn embedding_size(&self) -> usize {
        self.scale.len()
    }
}

impl FbmSampler for CirculantSampler {
    fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    fn hurst(&self) -> HurstParameter {
        self.hurst
    }

    fn fill_increments(&self, rng: &mut ChaCha8Rng, out: &mut [f64]) {
        let mut buf: Vec<Complex64> = self
            .scale
            .iter()
            .map(|&s| {
                let re: f64 = StandardNormal.sample(rng);
                let im: f64 = StandardNormal.sample(rng);
                Complex64::new(s * re, s * im)
            })
            .collect();
        self.fft.process(&mut buf);
        for (slot, c) in out.iter_mut().zip(&buf) {
            *slot = c.re;
        }
    }
}
