use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::special::{log_std_normal_cdf, log_sum_exp, std_normal_cdf, std_normal_sf, LN_SQRT_2PI};

/// Truncated stick-breaking weights: `N - 1` free sticks, the last fixed at one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StickBreaking {
    v: Vec<f64>,
}

impl StickBreaking {
    /// `v` holds the `N - 1` free sticks, each in `[0, 1]`.
    pub fn new(v: Vec<f64>) -> Result<Self> {
        if let Some(i) = v.iter().position(|x| !(0.0..=1.0).contains(x)) {
            return Err(Error::Domain(format!("stick {i} is {}, outside [0, 1]", v[i])));
        }
        Ok(StickBreaking { v })
    }

    pub fn v(&self) -> &[f64] {
        &self.v
    }

    #[cfg(test)]
    pub(crate) fn v_mut(&mut self) -> &mut [f64] {
        &mut self.v
    }

    /// Truncation level `N`.
    pub fn n(&self) -> usize {
        self.v.len() + 1
    }

    pub fn weights(&self) -> Vec<f64> {
        weights_from_sticks(self)
    }
}

/// `c_j = v_j prod_{l<j} (1 - v_l)` with `v_N = 1`.
pub fn weights_from_sticks(s: &StickBreaking) -> Vec<f64> {
    let mut out = Vec::with_capacity(s.n());
    let mut remaining = 1.0;
    for &v in &s.v {
        out.push(v * remaining);
        remaining *= 1.0 - v;
    }
    out.push(remaining);
    out
}

/// Truncated Dirichlet-process mixture of Gaussians.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianDPMixture {
    pub sticks: StickBreaking,
    pub means: Vec<f64>,
    pub variances: Vec<f64>,
}

impl GaussianDPMixture {
    pub fn new(sticks: StickBreaking, means: Vec<f64>, variances: Vec<f64>) -> Result<Self> {
        let m = GaussianDPMixture { sticks, means, variances };
        m.validate()?;
        Ok(m)
    }

    /// One standard normal component.
    pub fn standard() -> Self {
        GaussianDPMixture { sticks: StickBreaking { v: vec![] }, means: vec![0.0], variances: vec![1.0] }
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.sticks.n();
        if self.means.len() != n || self.variances.len() != n {
            return Err(Error::State(format!(
                "mixture has {n} weights, {} means and {} variances",
                self.means.len(),
                self.variances.len()
            )));
        }
        if let Some(j) = self.variances.iter().position(|v| !(*v > 0.0 && v.is_finite())) {
            return Err(Error::State(format!("variance {j} is {}", self.variances[j])));
        }
        if let Some(j) = self.means.iter().position(|m| !m.is_finite()) {
            return Err(Error::State(format!("mean {j} is {}", self.means[j])));
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.means.len()
    }

    pub fn weights(&self) -> Vec<f64> {
        self.sticks.weights()
    }

    pub fn pdf(&self, x: f64) -> f64 {
        mixture_pdf(self, x)
    }

    pub fn cdf(&self, x: f64) -> f64 {
        mixture_cdf(self, x)
    }

    pub fn sf(&self, x: f64) -> f64 {
        self.weights()
            .iter()
            .zip(self.means.iter().zip(&self.variances))
            .map(|(w, (m, v))| w * std_normal_sf((x - m) / v.sqrt()))
            .sum()
    }

    pub fn log_pdf(&self, x: f64) -> f64 {
        let terms: Vec<f64> = self
            .weights()
            .iter()
            .zip(self.means.iter().zip(&self.variances))
            .map(|(w, (m, v))| w.ln() - LN_SQRT_2PI - 0.5 * v.ln() - 0.5 * (x - m).powi(2) / v)
            .collect();
        log_sum_exp(&terms)
    }

    pub fn log_cdf(&self, x: f64) -> f64 {
        let terms: Vec<f64> = self
            .weights()
            .iter()
            .zip(self.means.iter().zip(&self.variances))
            .map(|(w, (m, v))| w.ln() + log_std_normal_cdf((x - m) / v.sqrt()))
            .collect();
        log_sum_exp(&terms)
    }
}

pub fn mixture_pdf(m: &GaussianDPMixture, x: f64) -> f64 {
    m.weights()
        .iter()
        .zip(m.means.iter().zip(&m.variances))
        .map(|(w, (mu, v))| w * normal_pdf(x, *mu, *v))
        .sum()
}

pub fn mixture_cdf(m: &GaussianDPMixture, x: f64) -> f64 {
    let c: f64 = m
        .weights()
        .iter()
        .zip(m.means.iter().zip(&m.variances))
        .map(|(w, (mu, v))| w * std_normal_cdf((x - mu) / v.sqrt()))
        .sum();
    c.min(1.0)
}

#[inline]
pub(crate) fn normal_pdf(x: f64, mu: f64, var: f64) -> f64 {
    let z2 = (x - mu) * (x - mu) / var;
    (-0.5 * z2 - LN_SQRT_2PI - 0.5 * var.ln()).exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::quadrature::adaptive_quadrature;
    use crate::numerics::special::std_normal_pdf;

    #[test]
    fn weights_examples() {
        assert_eq!(weights_from_sticks(&StickBreaking::new(vec![]).unwrap()), vec![1.0]);
        assert_eq!(weights_from_sticks(&StickBreaking::new(vec![0.5, 0.5]).unwrap()), vec![0.5, 0.25, 0.25]);
    }

    #[test]
    fn single_component_is_standard_normal() {
        let m = GaussianDPMixture::standard();
        for &x in &[-2.0, 0.0, 1.3] {
            assert!((m.pdf(x) - std_normal_pdf(x)).abs() < 1e-15);
            assert!((m.cdf(x) - std_normal_cdf(x)).abs() < 1e-15);
        }
    }

    #[test]
    fn symmetric_pair_at_zero() {
        let m = GaussianDPMixture::new(StickBreaking::new(vec![0.5]).unwrap(), vec![-1.0, 1.0], vec![1.0, 1.0]).unwrap();
        assert!((m.pdf(0.0) - std_normal_pdf(1.0)).abs() < 1e-15);
        assert!((m.pdf(0.0) - 0.24197072451914337).abs() < 1e-15);
    }

    #[test]
    fn cdf_reaches_one() {
        let m = GaussianDPMixture::new(StickBreaking::new(vec![0.3, 0.6]).unwrap(), vec![-1.0, 2.0, 0.5], vec![0.5, 2.0, 1.0])
            .unwrap();
        assert!((m.cdf(2.0 + 40.0 * 2f64.sqrt()) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn log_forms_agree() {
        let m = GaussianDPMixture::new(StickBreaking::new(vec![0.3, 0.6]).unwrap(), vec![-1.0, 2.0, 0.5], vec![0.5, 2.0, 1.0])
            .unwrap();
        for &x in &[-3.0, 0.0, 4.0] {
            assert!((m.log_pdf(x) - m.pdf(x).ln()).abs() < 1e-12);
            assert!((m.log_cdf(x) - m.cdf(x).ln()).abs() < 1e-12);
            assert!((m.sf(x) - (1.0 - m.cdf(x))).abs() < 1e-14);
        }
        // deep left tail where the cdf underflows
        assert!(m.log_cdf(-80.0).is_finite());
    }

    #[test]
    fn cdf_matches_quadrature_of_pdf() {
        let m = GaussianDPMixture::new(StickBreaking::new(vec![0.3, 0.6]).unwrap(), vec![-1.0, 2.0, 0.5], vec![0.5, 2.0, 1.0])
            .unwrap();
        for &x in &[-2.5, -0.3, 0.7, 3.1] {
            let q = adaptive_quadrature(|s| m.pdf(s), f64::NEG_INFINITY, x, 1e-12).unwrap();
            assert!((q.value - m.cdf(x)).abs() < 1e-8);
        }
    }
}
