//! First stage of the two-stage procedure: a `gamma = 0` run whose output
//! is condensed into pseudo-priors.

use log::info;

use crate::error::{Error, Result};
use crate::model::mixture::GaussianDPMixture;
use crate::model::prior::{sample_prior_state, PriorConfig, PseudoPriorSpec};
use crate::model::state::ModelState;
use crate::numerics::kde::Kde2d;
use crate::numerics::mle::{beta_mle, stick_alpha_mle};
use crate::numerics::rng::SeededRng;
use crate::sampler::config::{ChainConfig, ChainDiagnostics};
use crate::sampler::gibbs::Sampler;

const INIT_ATTEMPTS: usize = 200;

/// Draws a `gamma = 0` starting state with finite likelihood.
pub fn initial_state(xs: &[f64], ys: &[f64], prior: &PriorConfig, cfg: &ChainConfig, rng: &mut SeededRng) -> Result<ModelState> {
    let slab_only = PriorConfig { p0: 0.0, pseudo: None, ..prior.clone() };
    for _ in 0..INIT_ATTEMPTS {
        let s = sample_prior_state(&slab_only, xs.len(), rng)?;
        let mut smp = Sampler::new(xs, ys, &slab_only, cfg, &s)?;
        if smp.log_likelihood(&s).is_finite() {
            return Ok(s);
        }
    }
    Err(Error::State(format!("no prior draw with finite likelihood in {INIT_ATTEMPTS} attempts")))
}

/// One atom drawn from a mixture's weights.
fn resample_atom(mix: &GaussianDPMixture, rng: &mut SeededRng) -> (f64, f64) {
    let w = mix.weights();
    let total: f64 = w.iter().sum();
    let target = rng.open01() * total;
    let mut acc = 0.0;
    for (j, wj) in w.iter().enumerate() {
        acc += wj;
        if target < acc {
            return (mix.means[j], mix.variances[j]);
        }
    }
    let j = w.iter().rposition(|&x| x > 0.0).unwrap_or(w.len() - 1);
    (mix.means[j], mix.variances[j])
}

/// Result of the pseudo-prior stage.
#[derive(Debug, Clone)]
pub struct PseudoFit {
    pub spec: PseudoPriorSpec,
    /// Last state of the stage, a natural start for the main chain.
    pub final_state: ModelState,
    pub diagnostics: ChainDiagnostics,
}

/// Runs `Q / 5` warm-up and `Q` retained sweeps of steps 1 to 3 with
/// `gamma = 0`, then fits the three pseudo-priors.
pub fn fit_pseudo_priors(xs: &[f64], ys: &[f64], prior: &PriorConfig, cfg: &ChainConfig, rng: &mut SeededRng) -> Result<PseudoFit> {
    let q = cfg.pseudo_iters;
    let warm = q / 5;
    let stage_prior = PriorConfig { pseudo: None, ..prior.clone() };
    let mut state = initial_state(xs, ys, &stage_prior, cfg, rng)?;
    let mut smp = Sampler::new(xs, ys, &stage_prior, cfg, &state)?;
    let mut thetas = Vec::with_capacity(q);
    let mut sticks: Vec<Vec<f64>> = Vec::with_capacity(q);
    let mut atoms = Vec::with_capacity(q);
    for it in 0..warm + q {
        smp.sweep_conditioned(&mut state, rng).map_err(|e| Error::Chain { iteration: it + 1, message: format!("pseudo-prior stage: {e}") })?;
        if it >= warm {
            thetas.push(state.theta_tilde);
            sticks.push(state.mix_u.sticks.v().to_vec());
            let (m, v) = resample_atom(&state.mix_u, rng);
            atoms.push((m, v.ln()));
        }
    }
    let fit = beta_mle(&thetas)?;
    let alpha_breve = stick_alpha_mle(&sticks)?;
    let spec = PseudoPriorSpec { theta_beta: (fit.a, fit.b), alpha_breve, atom_kde: Kde2d::fit(atoms)? };
    spec.validate()?;
    info!(
        "pseudo-priors: theta ~ Beta({:.4}, {:.4}), alpha = {:.4}, kde bandwidths {:?}",
        fit.a,
        fit.b,
        alpha_breve,
        spec.atom_kde.bandwidths()
    );
    Ok(PseudoFit { spec, final_state: state, diagnostics: smp.diagnostics.clone() })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn resample_picks_weighted_atom() {
        use crate::model::mixture::StickBreaking;
        let mix = GaussianDPMixture::new(StickBreaking::new(vec![1.0, 0.5]).unwrap(), vec![1.0, 2.0, 3.0], vec![1.0, 1.0, 1.0])
            .unwrap();
        let mut rng = SeededRng::new(0, 0);
        for _ in 0..100 {
            assert_eq!(resample_atom(&mix, &mut rng), (1.0, 1.0));
        }
    }

    #[test]
    fn no_data_stage_recovers_unit_alpha() {
        let prior = PriorConfig { n_components: 10, ..Default::default() };
        let cfg = ChainConfig { pseudo_iters: 400, ..Default::default() };
        let mut rng = SeededRng::new(8, 1);
        let fit = fit_pseudo_priors(&[], &[], &prior, &cfg, &mut rng).unwrap();
        assert!((fit.spec.alpha_breve - 1.0).abs() < 0.35, "{}", fit.spec.alpha_breve);
        assert!(!fit.final_state.gamma);
        let (m, v) = fit.spec.atom_kde.sample(&mut rng);
        assert!(m.is_finite() && v > 0.0);
    }
}
