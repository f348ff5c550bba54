use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Pooled location and scale used to put both samples on a common scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Standardization {
    pub pooled_mean: f64,
    pub pooled_sd: f64,
}

impl Standardization {
    pub fn new(pooled_mean: f64, pooled_sd: f64) -> Result<Self> {
        if !(pooled_sd > 0.0 && pooled_sd.is_finite() && pooled_mean.is_finite()) {
            return Err(Error::DegenerateData(format!("pooled sd must be positive, got {pooled_sd}")));
        }
        Ok(Standardization { pooled_mean, pooled_sd })
    }

    /// Identity transform.
    pub fn identity() -> Self {
        Standardization { pooled_mean: 0.0, pooled_sd: 1.0 }
    }

    pub fn to_std(&self, x: f64) -> f64 {
        (x - self.pooled_mean) / self.pooled_sd
    }

    pub fn from_std(&self, z: f64) -> f64 {
        self.pooled_mean + self.pooled_sd * z
    }
}

/// Standardizes both samples by the pooled mean and the pooled sample
/// standard deviation (divisor `n + m - 1`).
pub fn standardize(xs: &[f64], ys: &[f64]) -> Result<(Vec<f64>, Vec<f64>, Standardization)> {
    let n = xs.len() + ys.len();
    if n < 2 {
        return Err(Error::DegenerateData(format!("need at least 2 observations in total, got {n}")));
    }
    if xs.iter().chain(ys).any(|v| !v.is_finite()) {
        return Err(Error::DegenerateData("data must be finite".into()));
    }
    let mean = xs.iter().chain(ys).sum::<f64>() / n as f64;
    let ss: f64 = xs.iter().chain(ys).map(|v| (v - mean).powi(2)).sum();
    let sd = (ss / (n as f64 - 1.0)).sqrt();
    if !(sd > 0.0) {
        return Err(Error::DegenerateData("pooled standard deviation is zero".into()));
    }
    let s = Standardization { pooled_mean: mean, pooled_sd: sd };
    Ok((xs.iter().map(|&x| s.to_std(x)).collect(), ys.iter().map(|&y| s.to_std(y)).collect(), s))
}

/// Density on the original scale from a density on the standardized scale:
/// `f(x) = f_std((x - mean) / sd) / sd`.
pub fn back_transform_density<F: Fn(f64) -> f64>(dens_std: F, s: &Standardization, x: f64) -> f64 {
    dens_std(s.to_std(x)) / s.pooled_sd
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::quadrature::adaptive_quadrature;
    use crate::numerics::special::std_normal_pdf;

    #[test]
    fn pooled_pair() {
        let (x, y, s) = standardize(&[-1.0], &[1.0]).unwrap();
        assert_eq!(s.pooled_mean, 0.0);
        assert!((s.pooled_sd - 2f64.sqrt()).abs() < 1e-15);
        assert!((x[0] + 1.0 / 2f64.sqrt()).abs() < 1e-15);
        assert!((y[0] - 1.0 / 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn degenerate_inputs() {
        assert!(matches!(standardize(&[2.0], &[2.0]), Err(Error::DegenerateData(_))));
        assert!(standardize(&[1.0], &[]).is_err());
    }

    #[test]
    fn back_transform_normal() {
        let s = Standardization::new(5.0, 2.0).unwrap();
        let v = back_transform_density(std_normal_pdf, &s, 5.0);
        assert!((v - std_normal_pdf(0.0) / 2.0).abs() < 1e-15);
        assert!((v - 0.19947114020071635).abs() < 1e-15);
        let total = adaptive_quadrature(|x| back_transform_density(std_normal_pdf, &s, x), -40.0, 50.0, 1e-12).unwrap().value;
        assert!((total - 1.0).abs() < 1e-6);
    }
}
