//! Direct evaluation of the model density by adaptive quadrature. The sampler
//! uses the tabulated evaluator in [`crate::model::lattice`]; this path is the
//! reference it is checked against.

use crate::error::Result;
use crate::model::mixture::GaussianDPMixture;
use crate::model::state::ModelState;
use crate::numerics::quadrature::{tail_ratio_integral, tail_ratio_integral_log, CDF_FLOOR};

/// `int_x^inf u(s) / G(s) ds` for mixtures `u` and `g`.
pub fn tail_integral(mix_u: &GaussianDPMixture, mix_g: &GaussianDPMixture, x: f64, tol: f64) -> Result<f64> {
    let r = if mix_g.cdf(x) < CDF_FLOOR {
        tail_ratio_integral_log(|s| mix_u.log_pdf(s), |s| mix_g.log_cdf(s), x, f64::INFINITY, tol)?
    } else {
        tail_ratio_integral(|s| mix_u.pdf(s), |s| mix_g.cdf(s), x, f64::INFINITY, tol)?
    };
    Ok(r.quadrature.value)
}

/// Log of `f(x) = g(x) [theta + (1 - theta) int_x^inf u(s)/G(s) ds]`.
pub fn log_model_f(state: &ModelState, x: f64, tol: f64) -> Result<f64> {
    let lg = state.mix_g.log_pdf(x);
    if state.gamma {
        return Ok(lg);
    }
    let theta = state.theta_tilde;
    if state.mix_g.cdf(x) < CDF_FLOOR {
        // g(x) u(s) / G(s) stays bounded where the unscaled ratio overflows
        let (u, g) = (&state.mix_u, &state.mix_g);
        let r = tail_ratio_integral_log(|s| u.log_pdf(s) + lg, |s| g.log_cdf(s), x, f64::INFINITY, tol)?;
        return Ok((theta * lg.exp() + (1.0 - theta) * r.quadrature.value).ln());
    }
    let t = tail_integral(&state.mix_u, &state.mix_g, x, tol)?;
    Ok(lg + (theta + (1.0 - theta) * t).ln())
}

/// Model density of `X` at `x`; with `gamma = 1` this is `g(x)` and no
/// quadrature is performed.
pub fn eval_model_f(state: &ModelState, x: f64, tol: f64) -> Result<f64> {
    if state.gamma {
        return Ok(state.mix_g.pdf(x));
    }
    Ok(log_model_f(state, x, tol)?.exp())
}

/// `sum_i ln f(X_i)`; `-inf` when a density underflows.
pub fn loglik_x(state: &ModelState, xs: &[f64]) -> Result<f64> {
    let mut total = 0.0;
    for &x in xs {
        total += log_model_f(state, x, 1e-10)?;
    }
    Ok(if total.is_nan() { f64::NEG_INFINITY } else { total })
}

/// `sum_i ln g(Y_i)`.
pub fn loglik_y(state: &ModelState, ys: &[f64]) -> f64 {
    ys.iter().map(|&y| state.mix_g.log_pdf(y)).sum()
}
