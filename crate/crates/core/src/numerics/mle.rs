//! Maximum-likelihood fits used to build pseudo-priors.

use crate::error::{Error, Result};
use crate::numerics::special::{digamma, ln_gamma, trigamma};

const CLIP: f64 = 1e-12;
const MAX_SHAPE: f64 = 1e7;
/// Precision used when the sample carries no spread information.
const DEGENERATE_PRECISION: f64 = 1e6;

/// Fitted Beta shape parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BetaFit {
    pub a: f64,
    pub b: f64,
    pub iterations: usize,
    /// Euclidean norm of the mean log-likelihood gradient in `(a, b)`.
    pub grad_norm: f64,
    /// True when the variance guard replaced the Newton solve.
    pub degenerate: bool,
}

struct BetaSuffStats {
    mean_log: f64,
    mean_log1m: f64,
}

impl BetaSuffStats {
    fn loglik(&self, a: f64, b: f64) -> f64 {
        ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b) + (a - 1.0) * self.mean_log + (b - 1.0) * self.mean_log1m
    }

    fn grad(&self, a: f64, b: f64) -> [f64; 2] {
        let common = digamma(a + b);
        [common - digamma(a) + self.mean_log, common - digamma(b) + self.mean_log1m]
    }
}

/// Mean Beta log-likelihood of `samples` at `(a, b)`; exposed for gradient
/// checks.
pub fn beta_mean_loglik(samples: &[f64], a: f64, b: f64) -> f64 {
    let stats = suff_stats(samples);
    stats.loglik(a, b)
}

fn suff_stats(samples: &[f64]) -> BetaSuffStats {
    let n = samples.len() as f64;
    let (mut l, mut l1m) = (0.0, 0.0);
    for &x in samples {
        let x = x.clamp(CLIP, 1.0 - CLIP);
        l += x.ln();
        l1m += (-x).ln_1p();
    }
    BetaSuffStats { mean_log: l / n, mean_log1m: l1m / n }
}

/// Maximum-likelihood `Beta(a, b)` fit.
///
/// Newton iterations run on `(ln a, ln b)` with a backtracking line search;
/// when the log-scale Hessian is not negative definite the step falls back to
/// the (always negative definite) natural-scale Hessian mapped through the
/// chain rule. Samples are clipped to `[1e-12, 1 - 1e-12]` first.
pub fn beta_mle(samples: &[f64]) -> Result<BetaFit> {
    if samples.len() < 10 {
        return Err(Error::Domain(format!("beta_mle needs at least 10 samples, got {}", samples.len())));
    }
    if samples.iter().any(|x| !x.is_finite()) {
        return Err(Error::Domain("beta_mle samples must be finite".into()));
    }
    let n = samples.len() as f64;
    let clipped: Vec<f64> = samples.iter().map(|x| x.clamp(CLIP, 1.0 - CLIP)).collect();
    let mean = clipped.iter().sum::<f64>() / n;
    let var = clipped.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    let stats = suff_stats(&clipped);

    let guard = |mean: f64| {
        let total = DEGENERATE_PRECISION;
        let a = (mean * total).max(CLIP);
        let b = ((1.0 - mean) * total).max(CLIP);
        let g = stats.grad(a, b);
        BetaFit { a, b, iterations: 0, grad_norm: g[0].hypot(g[1]), degenerate: true }
    };
    if var <= 1e-14 * mean * (1.0 - mean) || var <= 1e-300 {
        return Ok(guard(mean));
    }

    // method-of-moments start
    let common = (mean * (1.0 - mean) / var - 1.0).max(1e-3);
    let mut eta = [(mean * common).ln(), ((1.0 - mean) * common).ln()];
    let mut value = stats.loglik(eta[0].exp(), eta[1].exp());
    let max_iter = 200;
    for iter in 0..max_iter {
        let (a, b) = (eta[0].exp(), eta[1].exp());
        let g = stats.grad(a, b);
        let grad_norm = g[0].hypot(g[1]);
        if grad_norm <= 1e-10 || a >= MAX_SHAPE || b >= MAX_SHAPE {
            return Ok(BetaFit { a, b, iterations: iter, grad_norm, degenerate: false });
        }
        let tab = trigamma(a + b);
        let h_aa = tab - trigamma(a);
        let h_bb = tab - trigamma(b);
        let h_ab = tab;
        // gradient and Hessian in eta = (ln a, ln b)
        let ge = [a * g[0], b * g[1]];
        let mut he = [a * a * h_aa + a * g[0], a * b * h_ab, b * b * h_bb + b * g[1]];
        let det = he[0] * he[2] - he[1] * he[1];
        if !(he[0] < 0.0 && det > 0.0) {
            he = [a * a * h_aa, a * b * h_ab, b * b * h_bb];
        }
        let det = he[0] * he[2] - he[1] * he[1];
        let step = [-(he[2] * ge[0] - he[1] * ge[1]) / det, -(-he[1] * ge[0] + he[0] * ge[1]) / det];
        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..60 {
            let cand = [eta[0] + t * step[0], eta[1] + t * step[1]];
            let cand = [cand[0].min(MAX_SHAPE.ln()), cand[1].min(MAX_SHAPE.ln())];
            let v = stats.loglik(cand[0].exp(), cand[1].exp());
            if v.is_finite() && v >= value - 1e-14 * (1.0 + value.abs()) {
                eta = cand;
                value = v;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if !accepted {
            let grad_norm = g[0].hypot(g[1]);
            if grad_norm <= 1e-8 {
                return Ok(BetaFit { a, b, iterations: iter, grad_norm, degenerate: false });
            }
            return Err(Error::NonConvergence { best: a, achieved_tol: grad_norm });
        }
    }
    let (a, b) = (eta[0].exp(), eta[1].exp());
    let g = stats.grad(a, b);
    let grad_norm = g[0].hypot(g[1]);
    if grad_norm <= 1e-8 {
        Ok(BetaFit { a, b, iterations: max_iter, grad_norm, degenerate: false })
    } else {
        Err(Error::NonConvergence { best: a, achieved_tol: grad_norm })
    }
}

/// Closed-form maximiser of `prod_j Beta(v_j | 1, a)` over `a`, averaged over
/// draws: each draw contributes `-(len) / sum_j ln(1 - v_j)`.
///
/// Values are clipped to `[1e-300, 1 - 1e-12]` before taking logs, so every
/// draw yields a finite estimate.
pub fn stick_alpha_mle<V: AsRef<[f64]>>(draws: &[V]) -> Result<f64> {
    if draws.is_empty() {
        return Err(Error::Domain("stick_alpha_mle needs at least one draw".into()));
    }
    let mut total = 0.0;
    for draw in draws {
        let v = draw.as_ref();
        if v.is_empty() {
            return Err(Error::Domain("stick draws must contain at least one value".into()));
        }
        let s: f64 = v.iter().map(|&x| (-x.clamp(1e-300, 1.0 - CLIP)).ln_1p()).sum();
        total += -(v.len() as f64) / s;
    }
    Ok(total / draws.len() as f64)
}
