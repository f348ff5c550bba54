//! Adaptive Simpson quadrature with rational maps for infinite limits, and the
//! tail integral `int_x^b u(s) / G(s) ds` that turns a mixing density into a
//! density ratio.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Outcome of a quadrature call.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureResult {
    pub value: f64,
    /// Sum of the local Richardson error estimates over accepted panels.
    pub achieved_tol: f64,
    pub evaluations: usize,
}

/// Tuning for [`adaptive_quadrature_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureOptions {
    pub tol: f64,
    pub max_depth: u32,
    /// Number of equal panels the range is split into before adapting, so
    /// that narrow features are not missed by the first five samples.
    pub initial_panels: usize,
}

impl Default for QuadratureOptions {
    fn default() -> Self {
        QuadratureOptions {
            tol: 1e-8,
            max_depth: 30,
            initial_panels: 8,
        }
    }
}

/// Relative accuracy accepted when the absolute tolerance is below rounding
/// level for the integral's magnitude.
const REL_FLOOR: f64 = 1e-12;

struct Simpson<'a, F: FnMut(f64) -> f64 + ?Sized> {
    f: &'a mut F,
    evaluations: usize,
    achieved: f64,
    exhausted: bool,
    max_depth: u32,
}

impl<F: FnMut(f64) -> f64 + ?Sized> Simpson<'_, F> {
    fn eval(&mut self, x: f64) -> f64 {
        self.evaluations += 1;
        (self.f)(x)
    }

    #[allow(clippy::too_many_arguments)]
    fn recurse(&mut self, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = self.eval(lm);
        let frm = self.eval(rm);
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        let floor = 4.0 * f64::EPSILON * (left + right).abs();
        if delta.abs() <= 15.0 * tol.max(floor) || !delta.is_finite() {
            self.achieved += delta.abs() / 15.0;
            return left + right + delta / 15.0;
        }
        if depth >= self.max_depth || m <= a || m >= b {
            self.exhausted = true;
            self.achieved += delta.abs() / 15.0;
            return left + right + delta / 15.0;
        }
        self.recurse(a, m, fa, flm, fm, left, 0.5 * tol, depth + 1)
            + self.recurse(m, b, fm, frm, fb, right, 0.5 * tol, depth + 1)
    }
}

fn simpson_finite<F: FnMut(f64) -> f64 + ?Sized>(f: &mut F, lo: f64, hi: f64, opts: &QuadratureOptions) -> Result<QuadratureResult> {
    if lo == hi {
        return Ok(QuadratureResult { value: 0.0, achieved_tol: 0.0, evaluations: 1 });
    }
    let panels = opts.initial_panels.max(1);
    let mut s = Simpson { f, evaluations: 0, achieved: 0.0, exhausted: false, max_depth: opts.max_depth };
    let width = (hi - lo) / panels as f64;
    let mut panel_data = Vec::with_capacity(panels);
    let mut fa = s.eval(lo);
    for p in 0..panels {
        let a = lo + width * p as f64;
        let b = if p + 1 == panels { hi } else { lo + width * (p + 1) as f64 };
        let fm = s.eval(0.5 * (a + b));
        let fb = s.eval(b);
        panel_data.push((a, b, fa, fm, fb, (b - a) / 6.0 * (fa + 4.0 * fm + fb)));
        fa = fb;
    }
    let crude: f64 = panel_data.iter().map(|p| p.5.abs()).sum();
    let tol = opts.tol.max(REL_FLOOR * crude);
    let mut value = 0.0;
    for (a, b, fa, fm, fb, whole) in panel_data {
        value += s.recurse(a, b, fa, fm, fb, whole, tol / panels as f64, 0);
    }
    let result = QuadratureResult { value, achieved_tol: s.achieved, evaluations: s.evaluations };
    if !value.is_finite() || (s.exhausted && s.achieved > tol.max(REL_FLOOR * value.abs())) {
        return Err(Error::NonConvergence { best: value, achieved_tol: s.achieved });
    }
    Ok(result)
}

/// Integrates `f` over `[lo, hi]` to absolute tolerance `tol` (default depth
/// 30, eight initial panels). Either limit may be infinite.
pub fn adaptive_quadrature<F: FnMut(f64) -> f64>(f: F, lo: f64, hi: f64, tol: f64) -> Result<QuadratureResult> {
    adaptive_quadrature_with(f, lo, hi, &QuadratureOptions { tol, ..Default::default() })
}

/// [`adaptive_quadrature`] with explicit options.
///
/// Infinite limits use `s = lo + t / (1 - t)` (and its mirror images), with
/// the integrand taken as zero at the mapped endpoint.
pub fn adaptive_quadrature_with<F: FnMut(f64) -> f64>(
    mut f: F,
    lo: f64,
    hi: f64,
    opts: &QuadratureOptions,
) -> Result<QuadratureResult> {
    integrate_dyn(&mut f, lo, hi, opts)
}

fn integrate_dyn(f: &mut dyn FnMut(f64) -> f64, lo: f64, hi: f64, opts: &QuadratureOptions) -> Result<QuadratureResult> {
    if lo.is_nan() || hi.is_nan() {
        return Err(Error::Domain("quadrature limits must not be NaN".into()));
    }
    if lo > hi {
        let r = integrate_dyn(f, hi, lo, opts)?;
        return Ok(QuadratureResult { value: -r.value, ..r });
    }
    match (lo.is_finite(), hi.is_finite()) {
        (true, true) => simpson_finite(f, lo, hi, opts),
        (true, false) => {
            let mut g = |t: f64| {
                if t >= 1.0 {
                    return 0.0;
                }
                let om = 1.0 - t;
                let v = f(lo + t / om) / (om * om);
                if v.is_nan() { 0.0 } else { v }
            };
            simpson_finite(&mut g, 0.0, 1.0, opts)
        }
        (false, true) => {
            let mut g = |t: f64| {
                if t >= 1.0 {
                    return 0.0;
                }
                let om = 1.0 - t;
                let v = f(hi - t / om) / (om * om);
                if v.is_nan() { 0.0 } else { v }
            };
            simpson_finite(&mut g, 0.0, 1.0, opts)
        }
        (false, false) => {
            let half = QuadratureOptions { tol: 0.5 * opts.tol, ..*opts };
            let left = integrate_dyn(f, f64::NEG_INFINITY, 0.0, &half)?;
            let right = integrate_dyn(f, 0.0, f64::INFINITY, &half)?;
            Ok(QuadratureResult {
                value: left.value + right.value,
                achieved_tol: left.achieved_tol + right.achieved_tol,
                evaluations: left.evaluations + right.evaluations,
            })
        }
    }
}

/// Distribution functions below this value are treated as underflowed by the
/// tail integral.
pub const CDF_FLOOR: f64 = 1e-300;

/// Result of [`tail_ratio_integral`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailIntegral {
    pub quadrature: QuadratureResult,
    /// Set when the integrand had to be evaluated with `G(s) < 1e-300`.
    pub capped: bool,
}

/// `int_x^b u(s) / G(s) ds` for a density `u` and a distribution function
/// `G`, with `b` possibly `+inf`.
///
/// Where `G(s)` underflows below [`CDF_FLOOR`] the denominator is replaced by
/// the floor, which bounds that part of the integrand from below, and the
/// result is flagged as capped. Callers able to evaluate both functions on the
/// log scale should use [`tail_ratio_integral_log`] instead.
pub fn tail_ratio_integral<U, G>(mut u: U, mut cdf: G, x: f64, b: f64, tol: f64) -> Result<TailIntegral>
where
    U: FnMut(f64) -> f64,
    G: FnMut(f64) -> f64,
{
    if x >= b {
        return Ok(TailIntegral {
            quadrature: QuadratureResult { value: 0.0, achieved_tol: 0.0, evaluations: 1 },
            capped: false,
        });
    }
    let mut capped = false;
    let integrand = |s: f64| {
        let us = u(s);
        if us == 0.0 {
            return 0.0;
        }
        let gs = cdf(s);
        if gs < CDF_FLOOR {
            capped = true;
            us / CDF_FLOOR
        } else {
            us / gs
        }
    };
    let quadrature = adaptive_quadrature(integrand, x, b, tol)?;
    Ok(TailIntegral { quadrature, capped })
}

/// Log-scale variant of [`tail_ratio_integral`]: the integrand is
/// `exp(log_u(s) - log_cdf(s))`, which stays finite where `G` underflows.
pub fn tail_ratio_integral_log<U, G>(mut log_u: U, mut log_cdf: G, x: f64, b: f64, tol: f64) -> Result<TailIntegral>
where
    U: FnMut(f64) -> f64,
    G: FnMut(f64) -> f64,
{
    if x >= b {
        return Ok(TailIntegral {
            quadrature: QuadratureResult { value: 0.0, achieved_tol: 0.0, evaluations: 1 },
            capped: false,
        });
    }
    let mut capped = false;
    let integrand = |s: f64| {
        let lu = log_u(s);
        if lu == f64::NEG_INFINITY {
            return 0.0;
        }
        let lg = log_cdf(s);
        if lg < CDF_FLOOR.ln() {
            capped = true;
        }
        (lu - lg).exp()
    };
    let quadrature = adaptive_quadrature(integrand, x, b, tol)?;
    Ok(TailIntegral { quadrature, capped })
}
