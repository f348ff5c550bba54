//! The four full-conditional updates of one sweep.

use log::{debug, warn};
use rand::Rng;

use crate::error::{Error, Result};
use crate::model::lattice::{Block, Lattice, ModelEvaluator};
use crate::model::mixture::{GaussianDPMixture, StickBreaking};
use crate::model::prior::{beta_draw, draw_pseudo_mixture, nig_logpdf_unchecked, stick_log_prior, NigHyper, PriorConfig};
use crate::model::state::{clip_theta, ModelState};
use crate::numerics::rng::SeededRng;
use crate::numerics::slice::{slice_update, SliceTuning};
use crate::numerics::special::{beta_logpdf, log_sum_exp};
use crate::sampler::config::{ChainConfig, ChainDiagnostics, GammaRule, UStickPrior};

fn softplus(y: f64) -> f64 {
    if y > 0.0 {
        y + (-y).exp().ln_1p()
    } else {
        y.exp().ln_1p()
    }
}

fn logistic(y: f64) -> f64 {
    if y >= 0.0 {
        1.0 / (1.0 + (-y).exp())
    } else {
        let e = y.exp();
        e / (1.0 + e)
    }
}

fn logit(v: f64) -> f64 {
    let v = v.clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON / 2.0);
    v.ln() - (-v).ln_1p()
}

/// Which likelihood terms enter a slice target.
#[derive(Clone, Copy)]
enum Lik {
    /// `sum ln f(X) + sum ln g(Y)`
    FAndY,
    /// `sum ln g(X) + sum ln g(Y)`
    GOnly,
    /// `sum ln f(X)`
    F,
}

fn lik(eval: &mut ModelEvaluator, which: Lik, theta: f64) -> f64 {
    match which {
        Lik::FAndY => eval.loglik_f(theta) + eval.loglik_g_extra(),
        Lik::GOnly => eval.loglik_g_marked() + eval.loglik_g_extra(),
        Lik::F => eval.loglik_f(theta),
    }
}

/// Gibbs kernel bound to one data set; owns the cached evaluator.
#[derive(Debug, Clone)]
pub struct Sampler {
    n_x: usize,
    prior: PriorConfig,
    cfg: ChainConfig,
    eval: Option<ModelEvaluator>,
    pub diagnostics: ChainDiagnostics,
}

impl Sampler {
    /// `xs` are the sample from `F`, `ys` from `G`; both may be empty.
    pub fn new(xs: &[f64], ys: &[f64], prior: &PriorConfig, cfg: &ChainConfig, state: &ModelState) -> Result<Self> {
        prior.validate()?;
        state.validate()?;
        if state.r.len() != xs.len() {
            return Err(Error::State(format!("state has {} labels for {} observations", state.r.len(), xs.len())));
        }
        let eval = if xs.is_empty() && ys.is_empty() {
            None
        } else {
            Some(ModelEvaluator::new(Lattice::new(xs, ys, &cfg.lattice)?, state)?)
        };
        Ok(Sampler { n_x: xs.len(), prior: prior.clone(), cfg: cfg.clone(), eval, diagnostics: ChainDiagnostics::default() })
    }

    pub fn prior(&self) -> &PriorConfig {
        &self.prior
    }

    pub fn set_prior(&mut self, prior: PriorConfig) -> Result<()> {
        prior.validate()?;
        self.prior = prior;
        Ok(())
    }

    pub fn evaluator(&self) -> Option<&ModelEvaluator> {
        self.eval.as_ref()
    }

    /// Refreshes the cached evaluator after an external change to `state`.
    pub fn reload(&mut self, state: &ModelState) {
        if let Some(ev) = self.eval.as_mut() {
            ev.load(state);
        }
    }

    /// Tail tabulations so far; each one is an evaluation of `f` at the data.
    pub fn f_evaluations(&self) -> u64 {
        self.eval.as_ref().map_or(0, |e| e.tail_evaluations())
    }

    /// `sum ln f(X_i)` at `state` with `gamma` treated as 0.
    pub fn loglik_f(&mut self, state: &ModelState) -> f64 {
        match self.eval.as_mut() {
            Some(ev) => ev.loglik_f(state.theta_tilde),
            None => 0.0,
        }
    }

    /// `sum ln g(X_i)`.
    pub fn loglik_g_x(&self) -> f64 {
        self.eval.as_ref().map_or(0.0, |e| e.loglik_g_marked())
    }

    /// Log joint density of the data at `state`.
    pub fn log_likelihood(&mut self, state: &ModelState) -> f64 {
        let ly = self.eval.as_ref().map_or(0.0, |e| e.loglik_g_extra());
        let lx = if state.gamma { self.loglik_g_x() } else { self.loglik_f(state) };
        lx + ly
    }

    /// One complete sweep: steps 1, 2, 3 (R then theta_tilde) and 4.
    pub fn sweep(&mut self, state: &mut ModelState, rng: &mut SeededRng) -> Result<()> {
        self.update_dp1(state, rng)?;
        self.update_dp2(state, rng)?;
        self.update_latent_r(state, rng);
        self.update_theta_tilde(state, rng);
        self.update_gamma(state, rng)?;
        self.diagnostics.sweeps += 1;
        self.diagnostics.f_evaluations = self.f_evaluations();
        debug_assert!(state.validate().is_ok(), "{:?}", state.validate());
        Ok(())
    }

    /// Steps 1 to 3 with `gamma` held at 0, as in the pseudo-prior stage.
    pub fn sweep_conditioned(&mut self, state: &mut ModelState, rng: &mut SeededRng) -> Result<()> {
        if state.gamma {
            return Err(Error::State("conditioned sweep requires gamma = 0".into()));
        }
        self.update_dp1(state, rng)?;
        self.update_dp2(state, rng)?;
        self.update_latent_r(state, rng);
        self.update_theta_tilde(state, rng);
        self.diagnostics.sweeps += 1;
        self.diagnostics.f_evaluations = self.f_evaluations();
        Ok(())
    }

    /// Step 1: slice updates of every `g` coordinate on `(mu, ln sigma^2, logit v)`.
    pub fn update_dp1(&mut self, state: &mut ModelState, rng: &mut SeededRng) -> Result<()> {
        let which = if state.gamma { Lik::GOnly } else { Lik::FAndY };
        let theta = state.theta_tilde;
        let alpha = self.prior.alpha;
        let nig = self.prior.nig;
        let tuning = self.cfg.slice;
        let evals = update_mixture(
            &mut self.eval,
            Block::G,
            &mut state.mix_g,
            which,
            theta,
            &nig,
            alpha,
            &tuning,
            rng,
        )
        .map_err(|e| Error::State(format!("step 1: {e}")))?;
        self.diagnostics.slice_evaluations += evals;
        Ok(())
    }

    /// Step 2: slice updates of `u` when `gamma = 0`, pseudo-prior draw when
    /// `gamma = 1`.
    pub fn update_dp2(&mut self, state: &mut ModelState, rng: &mut SeededRng) -> Result<()> {
        if state.gamma {
            let pseudo = self.prior.pseudo_or_err()?;
            state.mix_u = draw_pseudo_mixture(self.prior.n_components, pseudo, rng);
            if let Some(ev) = self.eval.as_mut() {
                ev.load_block(Block::U, &state.mix_u);
            }
            return Ok(());
        }
        let alpha = match (self.cfg.u_stick_prior, &self.prior.pseudo) {
            (UStickPrior::AlphaBreve, Some(p)) => p.alpha_breve,
            _ => self.prior.alpha,
        };
        let theta = state.theta_tilde;
        let nig = self.prior.nig;
        let tuning = self.cfg.slice;
        let evals = update_mixture(&mut self.eval, Block::U, &mut state.mix_u, Lik::F, theta, &nig, alpha, &tuning, rng)
            .map_err(|e| Error::State(format!("step 2: {e}")))?;
        self.diagnostics.slice_evaluations += evals;
        Ok(())
    }

    /// Step 3a: latent labels.
    pub fn update_latent_r(&mut self, state: &mut ModelState, rng: &mut SeededRng) {
        if state.gamma {
            state.r.iter_mut().for_each(|r| *r = true);
            return;
        }
        let t = state.theta_tilde;
        let Some(ev) = self.eval.as_mut() else { return };
        ev.compute_tail();
        for i in 0..self.n_x {
            let p = r_probability(t, ev.tail_at_marked(i));
            let p = if p.is_finite() {
                p
            } else {
                self.diagnostics.r_fallbacks += 1;
                debug!("label {i}: indeterminate probability, drawing from the prior weight");
                t
            };
            state.r[i] = rng.random::<f64>() < p;
        }
    }

    /// Step 3b: `theta_tilde`.
    pub fn update_theta_tilde(&mut self, state: &mut ModelState, rng: &mut SeededRng) {
        let (a, b) = if state.gamma {
            match &self.prior.pseudo {
                Some(p) => p.theta_beta,
                None => self.prior.slab,
            }
        } else {
            let s = state.r.iter().filter(|&&r| r).count() as f64;
            (self.prior.slab.0 + s, self.prior.slab.1 + self.n_x as f64 - s)
        };
        state.theta_tilde = clip_theta(beta_draw(rng, a, b));
    }

    /// `pr(gamma = 1 | -)` at the current state.
    pub fn gamma_probability(&mut self, state: &ModelState) -> Result<f64> {
        let p0 = self.prior.p0;
        if p0 == 0.0 {
            return Ok(0.0);
        }
        if p0 == 1.0 {
            return Ok(1.0);
        }
        let (l0, l1) = self.gamma_log_weights(state)?;
        if l0 == f64::NEG_INFINITY && l1 == f64::NEG_INFINITY {
            return Ok(f64::NAN);
        }
        let z = log_sum_exp(&[l0, l1]);
        Ok((l1 - z).exp())
    }

    fn gamma_log_weights(&mut self, state: &ModelState) -> Result<(f64, f64)> {
        let p0 = self.prior.p0;
        let mut l1 = p0.ln() + self.loglik_g_x();
        let mut l0 = (1.0 - p0).ln() + self.loglik_f(state);
        if self.cfg.gamma_rule == GammaRule::CarlinChib {
            let pseudo = self.prior.pseudo_or_err()?;
            l0 += beta_logpdf(state.theta_tilde, self.prior.slab.0, self.prior.slab.1)
                + stick_log_prior(&state.mix_u.sticks, self.prior.alpha)
                + state
                    .mix_u
                    .means
                    .iter()
                    .zip(&state.mix_u.variances)
                    .map(|(&m, &v)| nig_logpdf_unchecked(&self.prior.nig, m, v))
                    .sum::<f64>();
            l1 += beta_logpdf(state.theta_tilde, pseudo.theta_beta.0, pseudo.theta_beta.1)
                + stick_log_prior(&state.mix_u.sticks, pseudo.alpha_breve);
            for (&m, &v) in state.mix_u.means.iter().zip(&state.mix_u.variances) {
                l1 += pseudo.atom_kde.logpdf(m, v)?;
            }
        }
        Ok((if l0.is_nan() { f64::NEG_INFINITY } else { l0 }, if l1.is_nan() { f64::NEG_INFINITY } else { l1 }))
    }

    /// Step 4: the model indicator.
    pub fn update_gamma(&mut self, state: &mut ModelState, rng: &mut SeededRng) -> Result<()> {
        let pr = self.gamma_probability(state)?;
        if pr.is_nan() {
            self.diagnostics.gamma_underflows += 1;
            warn!("both likelihood products underflow; keeping gamma = {}", state.gamma as u8);
            return Ok(());
        }
        let new = rng.random::<f64>() < pr;
        if new != state.gamma {
            self.diagnostics.gamma_flips += 1;
        }
        state.gamma = new;
        if new {
            state.r.iter_mut().for_each(|r| *r = true);
        }
        Ok(())
    }
}

/// `theta / (theta + (1 - theta) T)` with `T` the tail integral at `X_i`.
pub fn r_probability(theta_tilde: f64, tail: f64) -> f64 {
    theta_tilde / (theta_tilde + (1.0 - theta_tilde) * tail)
}

#[allow(clippy::too_many_arguments)]
fn update_mixture(
    eval: &mut Option<ModelEvaluator>,
    block: Block,
    mix: &mut GaussianDPMixture,
    which: Lik,
    theta: f64,
    nig: &NigHyper,
    alpha: f64,
    tuning: &SliceTuning,
    rng: &mut SeededRng,
) -> Result<u64> {
    let mut evals = 0u64;
    let n = mix.n();
    let data_lik = |ev: &mut Option<ModelEvaluator>| match ev.as_mut() {
        Some(e) => lik(e, which, theta),
        None => 0.0,
    };

    for k in 0..n {
        if let Some(e) = eval.as_mut() {
            e.begin_atom(block, k);
        }
        let var = mix.variances[k];
        let mu0 = mix.means[k];
        let step = slice_update(
            |mu| {
                if let Some(e) = eval.as_mut() {
                    e.set_atom(block, k, mu, var);
                }
                data_lik(eval) + nig_logpdf_unchecked(nig, mu, var)
            },
            mu0,
            tuning.width,
            tuning.max_doublings,
            rng,
        )
        .map_err(|e| Error::State(format!("mean of atom {k}: {e}")))?;
        evals += step.evaluations as u64;
        let mu = step.value;
        mix.means[k] = mu;

        let step = slice_update(
            |t: f64| {
                let v = t.exp();
                if !(v > 0.0 && v.is_finite()) {
                    return f64::NEG_INFINITY;
                }
                if let Some(e) = eval.as_mut() {
                    e.set_atom(block, k, mu, v);
                }
                data_lik(eval) + nig_logpdf_unchecked(nig, mu, v) + t
            },
            var.ln(),
            tuning.width,
            tuning.max_doublings,
            rng,
        )
        .map_err(|e| Error::State(format!("variance of atom {k}: {e}")))?;
        evals += step.evaluations as u64;
        mix.variances[k] = step.value.exp();
        if let Some(e) = eval.as_mut() {
            e.set_atom(block, k, mu, mix.variances[k]);
        }
    }

    let ln_alpha = alpha.ln();
    let mut sticks: Vec<f64> = mix.sticks.v().to_vec();
    for j in 0..sticks.len() {
        if let Some(e) = eval.as_mut() {
            e.begin_stick(block, j);
        }
        let y0 = logit(sticks[j]);
        let step = slice_update(
            |y| {
                let v = logistic(y);
                if !(v > 0.0 && v < 1.0) {
                    return f64::NEG_INFINITY;
                }
                if let Some(e) = eval.as_mut() {
                    e.set_stick(block, j, v);
                }
                // Beta(1, alpha) prior plus the logistic Jacobian, from y directly
                let ln_1m = -softplus(y);
                let ln_v = -softplus(-y);
                data_lik(eval) + ln_alpha + (alpha - 1.0) * ln_1m + ln_v + ln_1m
            },
            y0,
            tuning.width,
            tuning.max_doublings,
            rng,
        )
        .map_err(|e| Error::State(format!("stick {j}: {e}")))?;
        evals += step.evaluations as u64;
        sticks[j] = logistic(step.value);
        if let Some(e) = eval.as_mut() {
            e.set_stick(block, j, sticks[j]);
        }
    }
    mix.sticks = StickBreaking::new(sticks).expect("v in (0, 1)");
    Ok(evals)
}
