//! Distributional checks of the fBm samplers against the analytic covariance.

use fcir::fgn::{
    estimate_holder_constant, fbm_covariance, CholeskySampler, CirculantSampler, FbmSampler, HurstParameter,
    TimeGrid,
};
use fcir::stats::{ks_critical_value, ks_statistic, mean, variance};

// two-sided 1% normal quantile
const Z_99: f64 = 2.575_829_303_548_901;

fn h(v: f64) -> HurstParameter {
    HurstParameter::new(v).unwrap()
}

/// i.i.d. N(0, dt) test on pooled increments: mean, variance and lag-1
/// autocorrelation, each at the 1% level.
fn assert_white_noise(sampler: &dyn FbmSampler, n_paths: u64, seed: u64) {
    let dt = sampler.grid().dt();
    let mut incs = Vec::new();
    let mut lag_products = Vec::new();
    for i in 0..n_paths {
        let p = sampler.sample(seed, i);
        assert_eq!(p.values()[0], 0.0);
        let d: Vec<f64> = p.increments().collect();
        lag_products.extend(d.windows(2).map(|w| w[0] * w[1] / dt));
        incs.extend(d);
    }
    let n = incs.len() as f64;
    let m = mean(&incs);
    assert!(m.abs() / (dt / n).sqrt() < Z_99, "mean {m}");
    let v = variance(&incs);
    let v_se = dt * (2.0 / (n - 1.0)).sqrt();
    assert!((v - dt).abs() / v_se < Z_99, "variance {v} vs {dt}");
    let r = mean(&lag_products);
    assert!(r.abs() * (lag_products.len() as f64).sqrt() < Z_99, "lag-1 correlation {r}");
}

#[test]
fn brownian_case_is_white_noise() {
    // ~10^5 increments each
    let grid = TimeGrid::new(1.0, 1024).unwrap();
    assert_white_noise(&CirculantSampler::new(grid, h(0.5)).unwrap(), 100, 1);
    let small = TimeGrid::new(1.0, 256).unwrap();
    assert_white_noise(&CholeskySampler::new(small, h(0.5)).unwrap(), 400, 5);
}

#[test]
fn reference_terminal_variance_h04() {
    let grid = TimeGrid::new(1.0, 512).unwrap();
    let s = CholeskySampler::new(grid, h(0.4)).unwrap();
    let terminal: Vec<f64> = (0..100_000).map(|i| s.sample(3, i).terminal()).collect();
    // E[B_1^2] = 1; SE of the mean of B_1^2 from the sample
    let squares: Vec<f64> = terminal.iter().map(|b| b * b).collect();
    let se = (variance(&squares) / squares.len() as f64).sqrt();
    let est = mean(&squares);
    assert!((est - 1.0).abs() < 3.0 * se, "Var(B_1) = {est}, se {se}");
}

#[test]
fn fft_covariance_matches_analytic_h08() {
    let hurst = h(0.8);
    let grid = TimeGrid::new(1.0, 256).unwrap();
    let s = CirculantSampler::new(grid, hurst).unwrap();
    let pairs = [(128usize, 256usize), (64, 192), (256, 256), (1, 2)];
    let mut products = vec![Vec::with_capacity(100_000); pairs.len()];
    for i in 0..100_000 {
        let p = s.sample(4, i);
        let v = p.values();
        for (slot, &(a, b)) in products.iter_mut().zip(&pairs) {
            slot.push(v[a] * v[b]);
        }
    }
    for (prods, &(a, b)) in products.iter().zip(&pairs) {
        let analytic = fbm_covariance(grid.time(a), grid.time(b), hurst);
        let est = mean(prods);
        let se = (variance(prods) / prods.len() as f64).sqrt();
        let tol = if (a, b) == (128, 256) { 3.0 } else { 4.0 };
        assert!((est - analytic).abs() < tol * se, "cov({a},{b}) = {est} vs {analytic}, se {se}");
    }
}

#[test]
fn fft_and_reference_agree_in_distribution() {
    let grid = TimeGrid::new(1.0, 64).unwrap();
    for (hv, seed) in [(0.4, 10u64), (0.25, 11), (0.75, 12)] {
        let fft = CirculantSampler::new(grid, h(hv)).unwrap();
        let reference = CholeskySampler::new(grid, h(hv)).unwrap();
        let a: Vec<f64> = (0..10_000).map(|i| fft.sample(seed, i).terminal()).collect();
        // disjoint streams for the oracle
        let b: Vec<f64> = (0..10_000).map(|i| reference.sample(seed + 1000, i).terminal()).collect();
        let d = ks_statistic(&a, &b);
        assert!(d < ks_critical_value(a.len(), b.len(), 0.01), "H={hv}: D = {d}");
    }
}

#[test]
fn sampling_is_deterministic() {
    let grid = TimeGrid::new(2.0, 300).unwrap();
    let fft = CirculantSampler::new(grid, h(0.3)).unwrap();
    assert_eq!(fft.sample(5, 17), fft.sample(5, 17));
    assert_ne!(fft.sample(5, 17), fft.sample(5, 18));
    let reference = CholeskySampler::new(grid, h(0.3)).unwrap();
    assert_eq!(reference.sample(5, 17), reference.sample(5, 17));
}

#[test]
fn holder_moment_is_stable_under_refinement() {
    let hurst = h(0.7);
    let fine = TimeGrid::new(1.0, 2048).unwrap();
    let s = CirculantSampler::new(fine, hurst).unwrap();
    let (mut m_coarse, mut m_fine) = (0.0, 0.0);
    let n_paths = 1000;
    for i in 0..n_paths {
        let p = s.sample(6, i);
        let c_fine = estimate_holder_constant(&p, 0.1).unwrap().constant;
        let c_coarse = estimate_holder_constant(&p.subsample(2).unwrap(), 0.1).unwrap().constant;
        assert!(c_fine.is_finite() && c_coarse.is_finite());
        m_fine += c_fine * c_fine;
        m_coarse += c_coarse * c_coarse;
    }
    let ratio = m_fine / m_coarse;
    assert!(ratio < 2.0, "second moment ratio {ratio}");
    assert!(ratio >= 1.0, "refining cannot lower the max over a superset of pairs: {ratio}");
}
