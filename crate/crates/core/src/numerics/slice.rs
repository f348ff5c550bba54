//! Univariate slice sampling with the doubling procedure and shrinkage
//! (Neal, 2003), on the log scale.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::rng::SeededRng;

/// Width and doubling cap for [`slice_update`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SliceTuning {
    pub width: f64,
    pub max_doublings: u32,
}

impl Default for SliceTuning {
    fn default() -> Self {
        SliceTuning { width: 1.0, max_doublings: 10 }
    }
}

/// Result of one slice transition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SliceStep {
    pub value: f64,
    pub evaluations: usize,
}

/// One slice-sampling transition for the unnormalised log density
/// `log_density`, starting at `current`.
///
/// The level is `log f(x0) - Exp(1)`; the initial interval of size `width` is
/// randomly positioned around `x0` and doubled at most `max_doublings` times;
/// candidates are drawn by shrinkage and accepted only if they pass the
/// doubling acceptance test, which keeps the transition reversible.
pub fn slice_update<F>(mut log_density: F, current: f64, width: f64, max_doublings: u32, rng: &mut SeededRng) -> Result<SliceStep>
where
    F: FnMut(f64) -> f64,
{
    if !current.is_finite() {
        return Err(Error::State(format!("slice sampler started at non-finite point {current}")));
    }
    if !(width > 0.0 && width.is_finite()) {
        return Err(Error::Config(format!("slice width must be positive, got {width}")));
    }
    let mut evaluations = 0usize;
    let mut eval = |x: f64| {
        evaluations += 1;
        let v = log_density(x);
        if v.is_nan() { f64::NEG_INFINITY } else { v }
    };
    let f0 = eval(current);
    if !f0.is_finite() {
        return Err(Error::State(format!("log density at current point {current} is {f0}")));
    }
    let level = f0 + rng.open01().ln();

    // doubling
    let mut left = current - width * rng.open01();
    let mut right = left + width;
    let mut f_left = eval(left);
    let mut f_right = eval(right);
    let mut k = max_doublings;
    while k > 0 && (level < f_left || level < f_right) {
        k -= 1;
        let span = right - left;
        if rng.open01() < 0.5 {
            left -= span;
            f_left = eval(left);
        } else {
            right += span;
            f_right = eval(right);
        }
    }
    let doubled = k < max_doublings;

    // shrinkage with acceptance test
    let (mut lo, mut hi) = (left, right);
    for _ in 0..10_000 {
        let cand = lo + rng.open01() * (hi - lo);
        let f_cand = eval(cand);
        if level < f_cand && (!doubled || accept_after_doubling(&mut eval, current, cand, level, left, right, width)) {
            return Ok(SliceStep { value: cand, evaluations });
        }
        if cand < current {
            lo = cand;
        } else {
            hi = cand;
        }
        if hi - lo <= f64::EPSILON * current.abs().max(1.0) {
            // interval collapsed onto the current point
            return Ok(SliceStep { value: current, evaluations });
        }
    }
    Err(Error::State("slice shrinkage failed to find an acceptable point".into()))
}

fn accept_after_doubling<F: FnMut(f64) -> f64>(
    eval: &mut F,
    x0: f64,
    x1: f64,
    level: f64,
    left: f64,
    right: f64,
    width: f64,
) -> bool {
    let (mut lo, mut hi) = (left, right);
    let mut differ = false;
    let mut f_lo = f64::NAN;
    let mut f_hi = f64::NAN;
    while hi - lo > 1.1 * width {
        let mid = 0.5 * (lo + hi);
        if (x0 < mid) != (x1 < mid) {
            differ = true;
        }
        if x1 < mid {
            hi = mid;
            f_hi = f64::NAN;
        } else {
            lo = mid;
            f_lo = f64::NAN;
        }
        if differ {
            if f_lo.is_nan() {
                f_lo = eval(lo);
            }
            if f_hi.is_nan() {
                f_hi = eval(hi);
            }
            if level >= f_lo && level >= f_hi {
                return false;
            }
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run<F: FnMut(f64) -> f64 + Clone>(f: F, start: f64, n: usize, width: f64, seed: u64) -> Vec<f64> {
        let mut rng = SeededRng::new(seed, 0);
        let mut x = start;
        let mut out = Vec::with_capacity(n);
        for _ in 0..n {
            x = slice_update(f.clone(), x, width, 10, &mut rng).unwrap().value;
            out.push(x);
        }
        out
    }

    fn moments(xs: &[f64]) -> (f64, f64) {
        let n = xs.len() as f64;
        let m = xs.iter().sum::<f64>() / n;
        (m, xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / n)
    }

    #[test]
    fn standard_normal_moments() {
        let xs = run(|x: f64| -0.5 * x * x, 0.0, 50_000, 1.0, 11);
        let (m, v) = moments(&xs);
        assert!(m.abs() < 0.05, "mean {m}");
        assert!((v - 1.0).abs() < 0.1, "var {v}");
    }

    #[test]
    fn gamma_moments() {
        // Gamma(3, 1): mean 3, variance 3
        let xs = run(|x: f64| if x > 0.0 { 2.0 * x.ln() - x } else { f64::NEG_INFINITY }, 1.0, 10_000, 1.0, 5);
        let (m, v) = moments(&xs);
        assert!((m - 3.0).abs() < 0.2, "mean {m}");
        assert!((v - 3.0).abs() < 0.6, "var {v}");
    }

    #[test]
    fn normal_preserved_over_1e4_steps_with_narrow_width() {
        let xs = run(|x: f64| -0.5 * (x - 2.0).powi(2) / 4.0, 2.0, 10_000, 0.1, 9);
        let (m, v) = moments(&xs);
        assert!((m - 2.0).abs() < 0.3, "mean {m}");
        assert!((v - 4.0).abs() < 0.8, "var {v}");
    }

    #[test]
    fn uniform_histogram_chi_square() {
        let f = |x: f64| if (0.0..1.0).contains(&x) { 0.0 } else { f64::NEG_INFINITY };
        let xs = run(f, 0.5, 20_000, 1.0, 3);
        let mut counts = [0usize; 20];
        for x in &xs {
            counts[((x * 20.0) as usize).min(19)] += 1;
        }
        let expected = xs.len() as f64 / 20.0;
        let chi2: f64 = counts.iter().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
        // 99th percentile of chi-square with 19 degrees of freedom
        assert!(chi2 < 36.19, "chi2 = {chi2}");
    }

    #[test]
    fn deterministic_given_seed() {
        let a = run(|x: f64| -0.5 * x * x, 0.3, 200, 1.0, 42);
        let b = run(|x: f64| -0.5 * x * x, 0.3, 200, 1.0, 42);
        assert_eq!(a.iter().map(|x| x.to_bits()).collect::<Vec<_>>(), b.iter().map(|x| x.to_bits()).collect::<Vec<_>>());
    }

    #[test]
    fn non_finite_start_is_error() {
        let mut rng = SeededRng::new(1, 0);
        let r = slice_update(|x: f64| if x > 0.0 { 0.0 } else { f64::NEG_INFINITY }, -1.0, 1.0, 10, &mut rng);
        assert!(matches!(r, Err(Error::State(_))));
    }
}
