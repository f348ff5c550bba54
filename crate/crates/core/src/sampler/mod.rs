//! Slice-within-Gibbs sampler over truncated stick-breaking mixtures.

pub mod chain;
pub mod config;
pub mod gibbs;
pub mod pseudo;

pub use chain::{run_chain, run_chains};
pub use config::{ChainConfig, ChainDiagnostics, ChainOutput, GammaRule, UStickPrior};
pub use gibbs::{r_probability, Sampler};
pub use pseudo::{fit_pseudo_priors, initial_state, PseudoFit};
