use rand::Rng;
use rand_distr::{Beta, Distribution, Gamma, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::mixture::{GaussianDPMixture, StickBreaking};
use crate::model::state::{clip_theta, ModelState};
use crate::numerics::kde::Kde2d;
use crate::numerics::rng::SeededRng;
use crate::numerics::special::{beta_logpdf, ln_gamma, LN_SQRT_2PI};

/// Normal-inverse-gamma base measure: `sigma^2 ~ IG(a1, a2)`, `mu | sigma^2 ~ N(m, sigma^2 / c)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NigHyper {
    pub m: f64,
    pub c: f64,
    pub a1: f64,
    pub a2: f64,
}

impl Default for NigHyper {
    fn default() -> Self {
        NigHyper { m: 0.0, c: 1.0, a1: 1.0, a2: 1.0 }
    }
}

impl NigHyper {
    pub fn new(m: f64, c: f64, a1: f64, a2: f64) -> Result<Self> {
        if !(m.is_finite() && c > 0.0 && a1 > 0.0 && a2 > 0.0) {
            return Err(Error::Config(format!("invalid NIG hyperparameters ({m}, {c}, {a1}, {a2})")));
        }
        Ok(NigHyper { m, c, a1, a2 })
    }

    pub fn sample(&self, rng: &mut SeededRng) -> (f64, f64) {
        let gamma = Gamma::new(self.a1, 1.0 / self.a2).expect("validated shape and scale");
        let precision: f64 = gamma.sample(rng);
        let var = (1.0 / precision).clamp(f64::MIN_POSITIVE, f64::MAX);
        let z: f64 = StandardNormal.sample(rng);
        (self.m + z * (var / self.c).sqrt(), var)
    }
}

/// Log density of the normal-inverse-gamma distribution at `(mu, sigma^2)`.
pub fn nig_logpdf(h: &NigHyper, mu: f64, var: f64) -> Result<f64> {
    if !(var > 0.0) {
        return Err(Error::Domain(format!("NIG density evaluated at variance {var}")));
    }
    Ok(nig_logpdf_unchecked(h, mu, var))
}

#[inline]
pub(crate) fn nig_logpdf_unchecked(h: &NigHyper, mu: f64, var: f64) -> f64 {
    let lv = var.ln();
    0.5 * h.c.ln() - LN_SQRT_2PI - 0.5 * lv + h.a1 * h.a2.ln() - ln_gamma(h.a1) - (h.a1 + 1.0) * lv
        - (2.0 * h.a2 + h.c * (mu - h.m).powi(2)) / (2.0 * var)
}

/// Pseudo-priors used for the inactive parameters while `gamma = 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PseudoPriorSpec {
    pub theta_beta: (f64, f64),
    pub alpha_breve: f64,
    pub atom_kde: Kde2d,
}

impl PseudoPriorSpec {
    pub fn validate(&self) -> Result<()> {
        let (a, b) = self.theta_beta;
        if !(a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite() && self.alpha_breve > 0.0 && self.alpha_breve.is_finite()) {
            return Err(Error::Config(format!(
                "pseudo-prior parameters must be positive: theta ({a}, {b}), alpha {}",
                self.alpha_breve
            )));
        }
        Ok(())
    }
}

/// Hyperparameters of the hierarchical prior.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriorConfig {
    pub n_components: usize,
    pub alpha: f64,
    pub nig: NigHyper,
    pub slab: (f64, f64),
    pub p0: f64,
    pub pseudo: Option<PseudoPriorSpec>,
}

impl Default for PriorConfig {
    fn default() -> Self {
        PriorConfig { n_components: 25, alpha: 1.0, nig: NigHyper::default(), slab: (1.0, 1.0), p0: 0.5, pseudo: None }
    }
}

impl PriorConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_components < 2 {
            return Err(Error::Config(format!("truncation level must be at least 2, got {}", self.n_components)));
        }
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(Error::Config(format!("alpha must be positive, got {}", self.alpha)));
        }
        NigHyper::new(self.nig.m, self.nig.c, self.nig.a1, self.nig.a2)?;
        if !(self.slab.0 > 0.0 && self.slab.1 > 0.0) {
            return Err(Error::Config(format!("slab parameters must be positive, got {:?}", self.slab)));
        }
        if !(0.0..=1.0).contains(&self.p0) {
            return Err(Error::Config(format!("p0 must lie in [0, 1], got {}", self.p0)));
        }
        if let Some(p) = &self.pseudo {
            p.validate()?;
        }
        Ok(())
    }

    pub fn pseudo_or_err(&self) -> Result<&PseudoPriorSpec> {
        self.pseudo.as_ref().ok_or_else(|| Error::Config("pseudo-priors requested but not fitted".into()))
    }
}

pub(crate) fn beta_draw(rng: &mut SeededRng, a: f64, b: f64) -> f64 {
    // rand_distr rejects non-finite or non-positive shapes, already validated upstream
    Beta::new(a, b).map(|d| d.sample(rng)).unwrap_or(0.5)
}

pub(crate) fn draw_sticks(n: usize, alpha: f64, rng: &mut SeededRng) -> StickBreaking {
    let v = (0..n - 1).map(|_| beta_draw(rng, 1.0, alpha)).collect();
    StickBreaking::new(v).expect("beta draws lie in [0, 1]")
}

pub(crate) fn draw_nig_mixture(n: usize, alpha: f64, nig: &NigHyper, rng: &mut SeededRng) -> GaussianDPMixture {
    let sticks = draw_sticks(n, alpha, rng);
    let (means, variances) = (0..n).map(|_| nig.sample(rng)).unzip();
    GaussianDPMixture { sticks, means, variances }
}

pub(crate) fn draw_pseudo_mixture(n: usize, pseudo: &PseudoPriorSpec, rng: &mut SeededRng) -> GaussianDPMixture {
    let sticks = draw_sticks(n, pseudo.alpha_breve, rng);
    let (means, variances) = (0..n).map(|_| pseudo.atom_kde.sample(rng)).unzip();
    GaussianDPMixture { sticks, means, variances }
}

/// Log prior density of the sticks under independent `Beta(1, alpha)`.
pub fn stick_log_prior(s: &StickBreaking, alpha: f64) -> f64 {
    s.v().iter().map(|&v| beta_logpdf(v, 1.0, alpha)).sum()
}

/// Draws a full state from the hierarchical prior (pseudo-priors for the
/// inactive block when `gamma = 1`).
pub fn sample_prior_state(cfg: &PriorConfig, n: usize, rng: &mut SeededRng) -> Result<ModelState> {
    cfg.validate()?;
    let gamma = rng.random::<f64>() < cfg.p0;
    let nc = cfg.n_components;
    let mix_g = draw_nig_mixture(nc, cfg.alpha, &cfg.nig, rng);
    let (theta_tilde, mix_u) = if gamma {
        let pseudo = cfg.pseudo_or_err()?;
        let t = beta_draw(rng, pseudo.theta_beta.0, pseudo.theta_beta.1);
        (t, draw_pseudo_mixture(nc, pseudo, rng))
    } else {
        let t = beta_draw(rng, cfg.slab.0, cfg.slab.1);
        (t, draw_nig_mixture(nc, cfg.alpha, &cfg.nig, rng))
    };
    let theta_tilde = clip_theta(theta_tilde);
    let r = if gamma { vec![true; n] } else { (0..n).map(|_| rng.random::<f64>() < theta_tilde).collect() };
    let state = ModelState { gamma, theta_tilde, mix_g, mix_u, r };
    state.validate()?;
    Ok(state)
}
