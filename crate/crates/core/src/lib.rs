//! Mixture representations for likelihood-ratio-ordered distributions and
//! Bayesian density estimation / testing under the likelihood ratio order.
//!
//! * [`lr`] decomposes an ordered pair `(f, g)` into a weight and a mixing
//!   distribution over truncation points, and recomposes it.
//! * [`model`] holds the Dirichlet-process mixture prior built on that
//!   representation; [`sampler`] runs the slice-within-Gibbs chain and
//!   [`posterior`] summarises it.

pub mod error;
pub mod lr;
pub mod model;
pub mod numerics;
pub mod posterior;
pub mod sampler;

pub use error::{Error, Result};
pub use lr::{CountMassFunction, FiniteMassFunction, LrCheckReport, MixtureDecomposition, Mixing, TabulatedDistribution};
pub use model::{ModelState, NigHyper, PriorConfig, PseudoPriorSpec};
pub use posterior::{GridSpec, PosteriorSummary, RatioDirection, Standardization, SummaryOptions};
pub use sampler::{ChainConfig, ChainDiagnostics, ChainOutput, GammaRule, UStickPrior};
