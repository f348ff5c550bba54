use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::lattice::LatticeSpec;
use crate::model::prior::PseudoPriorSpec;
use crate::model::state::ModelState;
use crate::numerics::slice::SliceTuning;

/// How the model indicator is resampled in step 4.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum GammaRule {
    /// Two-term normaliser over the likelihood products only.
    #[default]
    Literal,
    /// Adds the prior and pseudo-prior densities of the inactive block.
    CarlinChib,
}

/// Stick prior used when slice-updating `u` under `gamma = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum UStickPrior {
    /// `Beta(1, alpha)`, the model prior.
    #[default]
    Alpha,
    /// `Beta(1, alpha_breve)` once pseudo-priors exist, `Beta(1, alpha)` before.
    AlphaBreve,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainConfig {
    pub iterations: usize,
    pub burn_in: usize,
    pub thin: usize,
    pub seed: u64,
    /// Retained sweeps of the pseudo-prior stage (`Q`).
    pub pseudo_iters: usize,
    pub slice: SliceTuning,
    pub lattice: LatticeSpec,
    pub gamma_rule: GammaRule,
    pub u_stick_prior: UStickPrior,
    /// Index of this chain; selects the random streams `2c` and `2c + 1`.
    pub chain_id: u64,
}

impl Default for ChainConfig {
    fn default() -> Self {
        ChainConfig {
            iterations: 5000,
            burn_in: 1000,
            thin: 2,
            seed: 1,
            pseudo_iters: 1000,
            slice: SliceTuning::default(),
            lattice: LatticeSpec::default(),
            gamma_rule: GammaRule::default(),
            u_stick_prior: UStickPrior::default(),
            chain_id: 0,
        }
    }
}

pub const MIN_PSEUDO_ITERS: usize = 100;

impl ChainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.iterations <= self.burn_in {
            return Err(Error::Config(format!(
                "iterations ({}) must exceed burn-in ({})",
                self.iterations, self.burn_in
            )));
        }
        if self.thin == 0 {
            return Err(Error::Config("thin must be at least 1".into()));
        }
        if self.pseudo_iters < MIN_PSEUDO_ITERS {
            return Err(Error::Config(format!(
                "pseudo-prior stage needs at least {MIN_PSEUDO_ITERS} iterations, got {}",
                self.pseudo_iters
            )));
        }
        if !(self.slice.width > 0.0 && self.slice.width.is_finite()) {
            return Err(Error::Config(format!("slice width must be positive, got {}", self.slice.width)));
        }
        if self.lattice.cells < 2 || !(self.lattice.upper_pad > 0.0) {
            return Err(Error::Config("lattice needs at least 2 cells and a positive pad".into()));
        }
        Ok(())
    }

    /// Number of draws a chain retains.
    pub fn retained(&self) -> usize {
        (self.iterations - self.burn_in) / self.thin
    }
}

/// Counters collected while a chain runs.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainDiagnostics {
    pub sweeps: u64,
    pub slice_evaluations: u64,
    /// Tabulations of the tail integral, i.e. evaluations of `f` at the data.
    pub f_evaluations: u64,
    pub gamma_flips: u64,
    /// `R_i` draws that fell back to `Bernoulli(theta_tilde)`.
    pub r_fallbacks: u64,
    /// Step-4 updates skipped because both products underflowed.
    pub gamma_underflows: u64,
}

impl ChainDiagnostics {
    pub fn merge(&mut self, other: &ChainDiagnostics) {
        self.sweeps += other.sweeps;
        self.slice_evaluations += other.slice_evaluations;
        self.f_evaluations += other.f_evaluations;
        self.gamma_flips += other.gamma_flips;
        self.r_fallbacks += other.r_fallbacks;
        self.gamma_underflows += other.gamma_underflows;
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainOutput {
    pub draws: Vec<ModelState>,
    pub gamma_trace: Vec<u8>,
    pub diagnostics: ChainDiagnostics,
    /// Pseudo-priors in force during the chain (per chain when several ran).
    pub pseudo: Vec<PseudoPriorSpec>,
}

impl ChainOutput {
    /// Fraction of retained draws with `gamma = 1`.
    pub fn p_h0(&self) -> f64 {
        if self.gamma_trace.is_empty() {
            return f64::NAN;
        }
        self.gamma_trace.iter().map(|&g| g as f64).sum::<f64>() / self.gamma_trace.len() as f64
    }
}
