//! Special functions used throughout the crate.
//!
//! The complementary error function comes from the platform C library on
//! Unix targets and from `libm` (a port of the FreeBSD/musl implementation)
//! elsewhere; both are accurate to about one ulp, so `std_normal_cdf` has an
//! absolute error well below `1e-15` on the whole real line. Digamma and
//! trigamma use upward recurrence into the asymptotic regime followed by the
//! Bernoulli-number series; both are accurate to roughly `1e-14` relative for
//! positive arguments.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

/// `ln(sqrt(2 pi))`.
pub const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

/// 1 / sqrt(2 pi).
pub const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

#[cfg(unix)]
mod sys {
    extern "C" {
        fn erfc(x: f64) -> f64;
    }

    #[inline]
    pub fn erfc_c(x: f64) -> f64 {
        // SAFETY: C99 erfc is a pure function of its argument.
        unsafe { erfc(x) }
    }
}

/// Complementary error function.
#[inline]
pub fn erfc(x: f64) -> f64 {
    #[cfg(unix)]
    {
        sys::erfc_c(x)
    }
    #[cfg(not(unix))]
    {
        libm::erfc(x)
    }
}

/// Standard normal distribution function.
#[inline]
pub fn std_normal_cdf(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    0.5 * erfc(-x * FRAC_1_SQRT_2)
}

/// Standard normal survival function `1 - Phi(x)` without cancellation.
#[inline]
pub fn std_normal_sf(x: f64) -> f64 {
    0.5 * erfc(x * FRAC_1_SQRT_2)
}

/// Standard normal density.
#[inline]
pub fn std_normal_pdf(x: f64) -> f64 {
    INV_SQRT_2PI * (-0.5 * x * x).exp()
}

/// `ln Phi(x)`, finite for every finite `x`.
///
/// Below `-35` the distribution function is subnormal, so the Laplace
/// continued-fraction asymptotic series is used instead.
pub fn log_std_normal_cdf(x: f64) -> f64 {
    if x > -35.0 {
        let p = std_normal_cdf(x);
        if x > 5.0 {
            // ln(1 - q) keeps precision when Phi is close to one
            return (-std_normal_sf(x)).ln_1p();
        }
        return p.ln();
    }
    let z2 = 1.0 / (x * x);
    let series = 1.0 - z2 * (1.0 - 3.0 * z2 * (1.0 - 5.0 * z2 * (1.0 - 7.0 * z2)));
    -0.5 * x * x - LN_SQRT_2PI - (-x).ln() + series.ln()
}

/// Natural log of the gamma function for positive arguments.
#[inline]
pub fn ln_gamma(x: f64) -> f64 {
    libm::lgamma(x)
}

/// Digamma function `psi(x)` for `x > 0`.
pub fn digamma(mut x: f64) -> f64 {
    if !(x > 0.0) {
        return f64::NAN;
    }
    let mut acc = 0.0;
    while x < 10.0 {
        acc -= 1.0 / x;
        x += 1.0;
    }
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    // Bernoulli series: 1/12, 1/120, 1/252, 1/240, 1/132, 691/32760
    let tail = inv2
        * (1.0 / 12.0
            - inv2
                * (1.0 / 120.0
                    - inv2 * (1.0 / 252.0 - inv2 * (1.0 / 240.0 - inv2 * (1.0 / 132.0 - inv2 * 691.0 / 32760.0)))));
    acc + x.ln() - 0.5 * inv - tail
}

/// Trigamma function `psi'(x)` for `x > 0`.
pub fn trigamma(mut x: f64) -> f64 {
    if !(x > 0.0) {
        return f64::NAN;
    }
    let mut acc = 0.0;
    while x < 10.0 {
        acc += 1.0 / (x * x);
        x += 1.0;
    }
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    let tail = inv
        + 0.5 * inv2
        + inv
            * inv2
            * (1.0 / 6.0 - inv2 * (1.0 / 30.0 - inv2 * (1.0 / 42.0 - inv2 * (1.0 / 30.0 - inv2 * 5.0 / 66.0))));
    acc + tail
}

/// Log density of `Beta(a, b)` at `v` in `(0, 1)`.
pub fn beta_logpdf(v: f64, a: f64, b: f64) -> f64 {
    if !(v > 0.0 && v < 1.0) {
        return f64::NEG_INFINITY;
    }
    ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b) + (a - 1.0) * v.ln() + (b - 1.0) * (-v).ln_1p()
}

/// Log density of `Normal(mean, var)`.
#[inline]
pub fn normal_logpdf(x: f64, mean: f64, var: f64) -> f64 {
    let d = x - mean;
    -0.5 * (2.0 * PI * var).ln() - 0.5 * d * d / var
}

/// `ln(sum(exp(values)))` computed with max subtraction.
pub fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    if max == f64::INFINITY {
        return f64::INFINITY;
    }
    max + values.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
}
