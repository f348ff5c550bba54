//! Representations for absolutely continuous pairs, tabulated on a grid.
//!
//! Local absolute continuity of `F` with respect to `G` (and of the ratio)
//! is assumed; only monotonicity of the ratio is checked numerically.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::lr::discrete::{check_monotone, DEFAULT_LR_TOL, DEGENERATE_TOL};
use crate::lr::types::{LrCheckReport, MixtureDecomposition, Mixing, TabulatedDistribution};
use crate::numerics::quadrature::{adaptive_quadrature, tail_ratio_integral};

pub type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Densities `f`, `g` on `(a, b)`, with optional distribution functions.
#[derive(Clone)]
pub struct ContinuousDensityPair {
    pub f: RealFn,
    pub g: RealFn,
    pub cdf_f: Option<RealFn>,
    pub cdf_g: Option<RealFn>,
    pub interval: (f64, f64),
}

impl std::fmt::Debug for ContinuousDensityPair {
    fn fmt(&self, fmt: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        fmt.debug_struct("ContinuousDensityPair")
            .field("interval", &self.interval)
            .field("has_cdf_f", &self.cdf_f.is_some())
            .field("has_cdf_g", &self.cdf_g.is_some())
            .finish()
    }
}

impl ContinuousDensityPair {
    pub fn new<F, G>(f: F, g: G, interval: (f64, f64)) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
        G: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        ContinuousDensityPair { f: Arc::new(f), g: Arc::new(g), cdf_f: None, cdf_g: None, interval }
    }

    pub fn with_cdfs<F, G>(mut self, cdf_f: F, cdf_g: G) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
        G: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        self.cdf_f = Some(Arc::new(cdf_f));
        self.cdf_g = Some(Arc::new(cdf_g));
        self
    }
}

fn validate_grid(grid: &[f64], (a, b): (f64, f64)) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::Domain("grid must be nonempty".into()));
    }
    if let Some(&point) = grid.iter().find(|&&x| !(x > a && x < b)) {
        return Err(Error::GridRange { point });
    }
    if let Some(i) = grid.windows(2).position(|w| !(w[0] < w[1])) {
        return Err(Error::Domain(format!("grid not strictly increasing at index {}", i + 1)));
    }
    Ok(())
}

/// Distribution function on the grid: the supplied evaluator, or cumulative
/// quadrature of the density from `a`.
fn tabulate_cdf(density: &RealFn, cdf: &Option<RealFn>, grid: &[f64], a: f64) -> Result<Vec<f64>> {
    if let Some(c) = cdf {
        return Ok(grid.iter().map(|&x| c(x).clamp(0.0, 1.0)).collect());
    }
    let mut out = Vec::with_capacity(grid.len());
    let mut acc = 0.0;
    let mut prev = a;
    for &x in grid {
        let piece = adaptive_quadrature(|s| density(s), prev, x, 1e-13)?;
        acc += piece.value.max(0.0);
        out.push(acc.min(1.0));
        prev = x;
    }
    Ok(out)
}

fn evaluate_positive(h: &RealFn, grid: &[f64]) -> Result<Vec<f64>> {
    let v: Vec<f64> = grid.iter().map(|&x| h(x)).collect();
    match v.iter().position(|&y| !(y > 0.0 && y.is_finite())) {
        Some(index) => Err(Error::Positivity { index }),
        None => Ok(v),
    }
}

/// Checks that `f/g` is non-increasing on `grid`.
pub fn check_lr_continuous(pair: &ContinuousDensityPair, grid: &[f64], tol: f64) -> Result<LrCheckReport> {
    validate_grid(grid, pair.interval)?;
    let gv = evaluate_positive(&pair.g, grid)?;
    let r: Vec<f64> = grid.iter().zip(&gv).map(|(&x, gx)| (pair.f)(x) / gx).collect();
    Ok(check_monotone(&r, tol, false))
}

fn monotone_clamped(mut values: Vec<f64>) -> Vec<f64> {
    let mut run = 0.0f64;
    for v in values.iter_mut() {
        run = run.max(v.clamp(0.0, 1.0));
        *v = run;
    }
    values
}

/// f-representation tabulated on `grid`: `theta` is `r` at the last grid
/// point and `U(x) = (F(x) - G(x) r(x)) / (1 - theta)`.
pub fn decompose_f_continuous(pair: &ContinuousDensityPair, grid: &[f64]) -> Result<MixtureDecomposition> {
    validate_grid(grid, pair.interval)?;
    let gv = evaluate_positive(&pair.g, grid)?;
    let r: Vec<f64> = grid.iter().zip(&gv).map(|(&x, gx)| (pair.f)(x) / gx).collect();
    let report = check_monotone(&r, DEFAULT_LR_TOL, false);
    if !report.is_lr_ordered {
        return Err(Error::OrderViolation { index: report.first_violation.unwrap_or(0), magnitude: report.max_violation });
    }
    let theta = r[r.len() - 1].clamp(0.0, 1.0);
    if 1.0 - theta <= DEGENERATE_TOL {
        return Ok(MixtureDecomposition::degenerate());
    }
    let big_f = tabulate_cdf(&pair.f, &pair.cdf_f, grid, pair.interval.0)?;
    let big_g = tabulate_cdf(&pair.g, &pair.cdf_g, grid, pair.interval.0)?;
    let values: Vec<f64> = (0..grid.len()).map(|i| (big_f[i] - big_g[i] * r[i]) / (1.0 - theta)).collect();
    Ok(MixtureDecomposition {
        weight: theta,
        mixing: Some(Mixing::Tabulated(TabulatedDistribution { grid: grid.to_vec(), values: monotone_clamped(values) })),
        degenerate: false,
        weight_uncertainty: 0.0,
        mass_deficit: 0.0,
    })
}

/// g-representation tabulated on `grid`: `omega` is `g/f` at the first grid
/// point and `1 - V(x) = ((1 - G(x)) - (1 - F(x)) g(x)/f(x)) / (1 - omega)`.
pub fn decompose_g_continuous(pair: &ContinuousDensityPair, grid: &[f64]) -> Result<MixtureDecomposition> {
    validate_grid(grid, pair.interval)?;
    let fv = evaluate_positive(&pair.f, grid)?;
    let rho: Vec<f64> = grid.iter().zip(&fv).map(|(&x, fx)| (pair.g)(x) / fx).collect();
    let report = check_monotone(&rho, DEFAULT_LR_TOL, true);
    if !report.is_lr_ordered {
        return Err(Error::OrderViolation { index: report.first_violation.unwrap_or(0), magnitude: report.max_violation });
    }
    let omega = rho[0].clamp(0.0, 1.0);
    if 1.0 - omega <= DEGENERATE_TOL {
        return Ok(MixtureDecomposition::degenerate());
    }
    let big_f = tabulate_cdf(&pair.f, &pair.cdf_f, grid, pair.interval.0)?;
    let big_g = tabulate_cdf(&pair.g, &pair.cdf_g, grid, pair.interval.0)?;
    let values: Vec<f64> = (0..grid.len())
        .map(|i| 1.0 - ((1.0 - big_g[i]) - (1.0 - big_f[i]) * rho[i]) / (1.0 - omega))
        .collect();
    Ok(MixtureDecomposition {
        weight: omega,
        mixing: Some(Mixing::Tabulated(TabulatedDistribution { grid: grid.to_vec(), values: monotone_clamped(values) })),
        degenerate: false,
        weight_uncertainty: 0.0,
        mass_deficit: 0.0,
    })
}

/// `f(x) = g(x) [theta + (1 - theta) int_x^inf u(s)/G(s) ds]`, tolerance 1e-10.
pub fn compose_f_continuous<G, C, U>(g: G, cdf_g: C, u: U, theta: f64, x: f64) -> Result<f64>
where
    G: Fn(f64) -> f64,
    C: Fn(f64) -> f64,
    U: Fn(f64) -> f64,
{
    compose_f_continuous_with(g, cdf_g, u, theta, x, f64::INFINITY, 1e-10)
}

/// [`compose_f_continuous`] with an explicit upper limit `b` and tolerance.
pub fn compose_f_continuous_with<G, C, U>(g: G, cdf_g: C, u: U, theta: f64, x: f64, b: f64, tol: f64) -> Result<f64>
where
    G: Fn(f64) -> f64,
    C: Fn(f64) -> f64,
    U: Fn(f64) -> f64,
{
    if !(0.0..=1.0).contains(&theta) {
        return Err(Error::Domain(format!("theta {theta} outside [0, 1]")));
    }
    let gx = g(x);
    if theta == 1.0 {
        return Ok(gx);
    }
    if !(cdf_g(x) > 0.0) {
        return Err(Error::Positivity { index: 0 });
    }
    let tail = tail_ratio_integral(u, cdf_g, x, b, tol)?;
    Ok(gx * (theta + (1.0 - theta) * tail.quadrature.value))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::special::{std_normal_cdf, std_normal_pdf};

    fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
        (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
    }

    fn beta22_cdf(x: f64) -> f64 {
        3.0 * x * x - 2.0 * x * x * x
    }

    fn beta13_uniform() -> ContinuousDensityPair {
        ContinuousDensityPair::new(|x: f64| 3.0 * (1.0 - x).powi(2), |_| 1.0, (0.0, 1.0))
    }

    #[test]
    fn normal_shift_theta() {
        let pair = ContinuousDensityPair::new(|x| std_normal_pdf(x + 1.0), |x| std_normal_pdf(x - 1.0), (f64::NEG_INFINITY, f64::INFINITY))
            .with_cdfs(|x| std_normal_cdf(x + 1.0), |x| std_normal_cdf(x - 1.0));
        let dec = decompose_f_continuous(&pair, &linspace(-5.0, 10.0, 301)).unwrap();
        let expected = (-20f64).exp();
        assert!(((dec.weight - expected) / expected).abs() < 1e-12);
    }

    #[test]
    fn beta_uniform_gives_beta22() {
        let grid = linspace(1e-7, 1.0 - 1e-7, 1001);
        let dec = decompose_f_continuous(&beta13_uniform(), &grid).unwrap();
        assert!(dec.weight <= 1e-10);
        let u = dec.tabulated_mixing().unwrap();
        for (x, v) in u.grid.iter().zip(&u.values) {
            assert!((v - beta22_cdf(*x)).abs() < 1e-8, "{x}");
        }
        let mid = u.grid.iter().position(|&x| (x - 0.5).abs() < 1e-6).unwrap();
        assert!((u.values[mid] - 0.5).abs() < 1e-8);
    }

    #[test]
    fn equal_pair_degenerate() {
        let pair = ContinuousDensityPair::new(std_normal_pdf, std_normal_pdf, (f64::NEG_INFINITY, f64::INFINITY));
        let dec = decompose_f_continuous(&pair, &linspace(-3.0, 3.0, 31)).unwrap();
        assert!(dec.degenerate);
        let dec = decompose_g_continuous(&pair, &linspace(-3.0, 3.0, 31)).unwrap();
        assert!(dec.degenerate);
    }

    #[test]
    fn g_side_normal_shift() {
        let pair = ContinuousDensityPair::new(|x| std_normal_pdf(x + 1.0), |x| std_normal_pdf(x - 1.0), (f64::NEG_INFINITY, f64::INFINITY));
        let dec = decompose_g_continuous(&pair, &linspace(-10.0, 5.0, 151)).unwrap();
        assert!(((dec.weight - (-20f64).exp()) / (-20f64).exp()).abs() < 1e-12);
    }

    #[test]
    fn uniform_beta31_gives_beta22() {
        let pair = ContinuousDensityPair::new(|_| 1.0, |x: f64| 3.0 * x * x, (0.0, 1.0))
            .with_cdfs(|x| x, |x: f64| x * x * x);
        let grid = linspace(1e-7, 1.0 - 1e-7, 501);
        let dec = decompose_g_continuous(&pair, &grid).unwrap();
        assert!(dec.weight < 1e-12);
        let v = dec.tabulated_mixing().unwrap();
        for (x, val) in v.grid.iter().zip(&v.values) {
            assert!((val - beta22_cdf(*x)).abs() < 1e-8, "{x}");
        }
    }

    #[test]
    fn unordered_pair_rejected() {
        let pair = ContinuousDensityPair::new(|x| std_normal_pdf(x - 1.0), |x| std_normal_pdf(x + 1.0), (f64::NEG_INFINITY, f64::INFINITY));
        let r = decompose_f_continuous(&pair, &linspace(-3.0, 3.0, 31));
        assert!(matches!(r, Err(Error::OrderViolation { index: 1, .. })));
    }

    #[test]
    fn grid_outside_interval() {
        let r = decompose_f_continuous(&beta13_uniform(), &[0.0, 0.5]);
        assert!(matches!(r, Err(Error::GridRange { .. })));
    }

    #[test]
    fn compose_theta_one_is_g() {
        let v = compose_f_continuous(std_normal_pdf, std_normal_cdf, |_| f64::NAN, 1.0, 0.3).unwrap();
        assert_eq!(v, std_normal_pdf(0.3));
    }

    #[test]
    fn compose_beta22_over_uniform() {
        let u = |s: f64| if (0.0..=1.0).contains(&s) { 6.0 * s * (1.0 - s) } else { 0.0 };
        let cdf = |s: f64| s.clamp(0.0, 1.0);
        for &x in &[0.1, 0.5, 0.9] {
            let f = compose_f_continuous_with(|_| 1.0, cdf, u, 0.0, x, 1.0, 1e-12).unwrap();
            assert!((f - 3.0 * (1.0 - x).powi(2)).abs() < 1e-10);
        }
    }

    #[test]
    fn compose_normal_against_trapezoid() {
        let f = compose_f_continuous(std_normal_pdf, std_normal_cdf, std_normal_pdf, 0.5, 0.0).unwrap();
        let n = 400_000;
        let h = 40.0 / n as f64;
        let q = |s: f64| std_normal_pdf(s) / std_normal_cdf(s);
        let mut tr = 0.5 * (q(0.0) + q(40.0));
        for i in 1..n {
            tr += q(i as f64 * h);
        }
        let oracle = std_normal_pdf(0.0) * (0.5 + 0.5 * tr * h);
        assert!((f - oracle).abs() < 1e-8, "{f} vs {oracle}");
    }
}
