//! Bivariate Gaussian product-kernel density estimate on `(mu, ln sigma^2)`.

use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::rng::SeededRng;
use crate::numerics::special::LN_SQRT_2PI;

/// Smallest bandwidth used when a coordinate has no spread.
pub const BANDWIDTH_FLOOR: f64 = 1e-6;

/// Kernel density estimate over atom locations `(mu, ln sigma^2)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Kde2d {
    points: Vec<(f64, f64)>,
    bandwidths: (f64, f64),
}

fn silverman(values: impl Iterator<Item = f64> + Clone, n: usize) -> f64 {
    let nf = n as f64;
    let mean = values.clone().sum::<f64>() / nf;
    let var = values.map(|v| (v - mean).powi(2)).sum::<f64>() / (nf - 1.0);
    (1.06 * var.sqrt() * nf.powf(-0.2)).max(BANDWIDTH_FLOOR)
}

impl Kde2d {
    /// Fits the estimate to `(mu, ln sigma^2)` pairs with per-coordinate
    /// Silverman bandwidths `1.06 * sd * Q^(-1/5)`.
    pub fn fit(points: Vec<(f64, f64)>) -> Result<Kde2d> {
        if points.len() < 2 {
            return Err(Error::Domain(format!("kde needs at least 2 points, got {}", points.len())));
        }
        if points.iter().any(|(a, b)| !a.is_finite() || !b.is_finite()) {
            return Err(Error::Domain("kde points must be finite".into()));
        }
        let n = points.len();
        let h1 = silverman(points.iter().map(|p| p.0), n);
        let h2 = silverman(points.iter().map(|p| p.1), n);
        Ok(Kde2d { points, bandwidths: (h1, h2) })
    }

    /// Builds an estimate from explicit bandwidths.
    pub fn with_bandwidths(points: Vec<(f64, f64)>, bandwidths: (f64, f64)) -> Result<Kde2d> {
        if points.len() < 2 {
            return Err(Error::Domain(format!("kde needs at least 2 points, got {}", points.len())));
        }
        if !(bandwidths.0 > 0.0 && bandwidths.1 > 0.0) {
            return Err(Error::Domain("kde bandwidths must be positive".into()));
        }
        Ok(Kde2d { points, bandwidths })
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    pub fn bandwidths(&self) -> (f64, f64) {
        self.bandwidths
    }

    /// Draws one `(mu, sigma^2)` pair: a stored point chosen uniformly, jittered
    /// by the kernel, with the second coordinate exponentiated.
    pub fn sample(&self, rng: &mut SeededRng) -> (f64, f64) {
        let idx = ((rng.open01() * self.points.len() as f64) as usize).min(self.points.len() - 1);
        let (m, l) = self.points[idx];
        let z1: f64 = StandardNormal.sample(rng);
        let z2: f64 = StandardNormal.sample(rng);
        let var = (l + self.bandwidths.1 * z2).exp();
        (m + self.bandwidths.0 * z1, var.max(f64::MIN_POSITIVE))
    }

    /// Log density at `(mu, sigma^2)`, including the `1/sigma^2` Jacobian of
    /// the log transform.
    pub fn logpdf(&self, mu: f64, var: f64) -> Result<f64> {
        if !(var > 0.0) {
            return Err(Error::Domain(format!("kde evaluated at non-positive variance {var}")));
        }
        let l = var.ln();
        let (h1, h2) = self.bandwidths;
        let norm = -2.0 * LN_SQRT_2PI - h1.ln() - h2.ln() - (self.points.len() as f64).ln();
        let mut max = f64::NEG_INFINITY;
        let exps: Vec<f64> = self
            .points
            .iter()
            .map(|&(pm, pl)| {
                let a = (mu - pm) / h1;
                let b = (l - pl) / h2;
                let e = -0.5 * (a * a + b * b);
                max = max.max(e);
                e
            })
            .collect();
        let s: f64 = exps.iter().map(|e| (e - max).exp()).sum();
        Ok(norm + max + s.ln() - l)
    }
}
