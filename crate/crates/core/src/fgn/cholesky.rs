use nalgebra::{Cholesky, DMatrix};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::{fgn_autocovariance, FbmSampler, HurstParameter, TimeGrid};
use crate::error::{Error, Result};

/// Largest grid the dense oracle accepts. The factor is `n^2` doubles.
pub const MAX_REFERENCE_STEPS: usize = 2048;

/// Exact fGn sampler through the Cholesky factor `L` of the Toeplitz
/// increment covariance: increments are `L z` with `z` standard normal.
#[derive(Debug, Clone)]
pub struct CholeskySampler {
    grid: TimeGrid,
    hurst: HurstParameter,
    // transpose of the lower factor (column i holds row i of L), scaled by dt^H
    factor_t: DMatrix<f64>,
}

impl CholeskySampler {
    pub fn new(grid: TimeGrid, hurst: HurstParameter) -> Result<Self> {
        let n = grid.n_steps();
        if n > MAX_REFERENCE_STEPS {
            return Err(Error::ReferenceTooLarge { n_steps: n, max: MAX_REFERENCE_STEPS });
        }
        let acov: Vec<f64> = (0..n).map(|lag| fgn_autocovariance(lag, hurst)).collect();
        let cov = DMatrix::from_fn(n, n, |i, j| acov[i.abs_diff(j)]);
        let chol = Cholesky::new(cov).ok_or(Error::NotPositiveDefinite { n_steps: n })?;
        let mut factor = chol.unpack();
        if factor.diagonal().iter().any(|d| !(d.is_finite() && *d > 0.0)) {
            return Err(Error::NotPositiveDefinite { n_steps: n });
        }
        factor *= grid.dt().powf(hurst.value());
        Ok(Self { grid, hurst, factor_t: factor.transpose() })
    }
}

impl FbmSampler for CholeskySampler {
    fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    fn hurst(&self) -> HurstParameter {
        self.hurst
    }

    fn fill_increments(&self, rng: &mut ChaCha8Rng, out: &mut [f64]) {
        let n = self.grid.n_steps();
        let z: Vec<f64> = (0..n).map(|_| StandardNormal.sample(rng)).collect();
        for (i, slot) in out.iter_mut().enumerate() {
            let col = self.factor_t.column(i);
            *slot = col.as_slice()[..=i].iter().zip(&z).map(|(l, z)| l * z).sum();
        }
    }
}
