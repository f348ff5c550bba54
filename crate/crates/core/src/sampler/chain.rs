use log::info;

use crate::error::{Error, Result};
use crate::model::prior::PriorConfig;
use crate::numerics::rng::SeededRng;
use crate::sampler::config::{ChainConfig, ChainOutput};
use crate::sampler::gibbs::Sampler;
use crate::sampler::pseudo::{fit_pseudo_priors, initial_state};

/// Runs one chain: the pseudo-prior stage when `p0 > 0` and no pseudo-priors
/// are supplied, then `iterations` sweeps keeping every `thin`-th state after
/// burn-in.
pub fn run_chain(xs: &[f64], ys: &[f64], prior: &PriorConfig, cfg: &ChainConfig) -> Result<ChainOutput> {
    prior.validate()?;
    cfg.validate()?;
    if ys.is_empty() && prior.p0 > 0.0 {
        return Err(Error::DegenerateData("the sample from G is empty".into()));
    }
    if xs.iter().chain(ys).any(|v| !v.is_finite()) {
        return Err(Error::DegenerateData("data must be finite".into()));
    }
    let mut rng = SeededRng::new(cfg.seed, 2 * cfg.chain_id);
    let mut prior = prior.clone();
    let mut pseudo_diag = None;
    let mut state = if prior.p0 > 0.0 && prior.pseudo.is_none() {
        let mut stage_rng = SeededRng::new(cfg.seed, 2 * cfg.chain_id + 1);
        let fit = fit_pseudo_priors(xs, ys, &prior, cfg, &mut stage_rng)?;
        prior.pseudo = Some(fit.spec);
        pseudo_diag = Some(fit.diagnostics);
        fit.final_state
    } else {
        initial_state(xs, ys, &prior, cfg, &mut rng)?
    };
    if let Some(d) = &pseudo_diag {
        info!("chain {}: pseudo-prior stage done after {} sweeps", cfg.chain_id, d.sweeps);
    }

    let mut smp = Sampler::new(xs, ys, &prior, cfg, &state)?;
    let mut out = ChainOutput {
        draws: Vec::with_capacity(cfg.retained()),
        gamma_trace: Vec::with_capacity(cfg.retained()),
        diagnostics: Default::default(),
        pseudo: prior.pseudo.iter().cloned().collect(),
    };
    for t in 1..=cfg.iterations {
        smp.sweep(&mut state, &mut rng).map_err(|e| Error::Chain { iteration: t, message: e.to_string() })?;
        if t > cfg.burn_in && (t - cfg.burn_in) % cfg.thin == 0 {
            out.gamma_trace.push(state.gamma as u8);
            out.draws.push(state.clone());
        }
        if t % 1000 == 0 {
            info!("chain {}: {t}/{} sweeps", cfg.chain_id, cfg.iterations);
        }
    }
    out.diagnostics = smp.diagnostics.clone();
    Ok(out)
}

/// Runs `chains` independent chains in parallel (streams `2c`, `2c + 1`) and
/// concatenates their retained draws in chain order.
pub fn run_chains(xs: &[f64], ys: &[f64], prior: &PriorConfig, cfg: &ChainConfig, chains: usize) -> Result<ChainOutput> {
    if chains == 0 {
        return Err(Error::Config("at least one chain is required".into()));
    }
    if chains == 1 {
        return run_chain(xs, ys, prior, cfg);
    }
    let results: Vec<Result<ChainOutput>> = std::thread::scope(|scope| {
        let handles: Vec<_> = (0..chains)
            .map(|c| {
                let cfg = ChainConfig { chain_id: cfg.chain_id + c as u64, ..cfg.clone() };
                scope.spawn(move || run_chain(xs, ys, prior, &cfg))
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("chain thread panicked")).collect()
    });
    let mut merged = ChainOutput { draws: vec![], gamma_trace: vec![], diagnostics: Default::default(), pseudo: vec![] };
    for r in results {
        let o = r?;
        merged.draws.extend(o.draws);
        merged.gamma_trace.extend(o.gamma_trace);
        merged.diagnostics.merge(&o.diagnostics);
        merged.pseudo.extend(o.pseudo);
    }
    Ok(merged)
}
