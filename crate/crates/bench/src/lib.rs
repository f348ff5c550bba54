//! Shared fixtures for the kernel benchmarks in `benches/`.

use lrorder_core::model::sample_prior_state;
use lrorder_core::numerics::SeededRng;
use lrorder_core::posterior::standardize;
use lrorder_core::{ModelState, PriorConfig};
use rand_distr::{Distribution, StandardNormal};

/// Standardized samples of size `n` from `N(-shift, 1)` and `N(shift, 1)`.
pub fn normal_pair(n: usize, shift: f64, seed: u64) -> (Vec<f64>, Vec<f64>) {
    let mut rng = SeededRng::new(seed, 50);
    let mut draw = |s: f64| -> Vec<f64> {
        (0..n)
            .map(|_| {
                let z: f64 = StandardNormal.sample(&mut rng);
                s + z
            })
            .collect()
    };
    let x = draw(-shift);
    let y = draw(shift);
    let (zx, zy, _) = standardize(&x, &y).expect("standardize");
    (zx, zy)
}

/// A prior draw with the slab active.
pub fn slab_state(prior: &PriorConfig, n_x: usize, seed: u64) -> ModelState {
    let mut rng = SeededRng::new(seed, 51);
    let slab = PriorConfig { p0: 0.0, ..prior.clone() };
    sample_prior_state(&slab, n_x, &mut rng).expect("prior state")
}

/// Binomial(n, p) masses on `0..=n`.
pub fn binomial(n: u64, p: f64) -> Vec<f64> {
    let mut c = 1.0;
    (0..=n)
        .map(|k| {
            if k > 0 {
                c = c * (n - k + 1) as f64 / k as f64;
            }
            c * p.powi(k as i32) * (1.0 - p).powi((n - k) as i32)
        })
        .collect()
}
