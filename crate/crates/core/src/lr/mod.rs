//! Mixture representations of likelihood-ratio-ordered pairs.
//!
//! If `f/g` is non-increasing then `f = theta g + (1 - theta) int g^s dU(s)`,
//! where `g^s` is `g` truncated above `s`; symmetrically, if `g/f` is
//! non-decreasing then `g = omega f + (1 - omega) int f_s dV(s)` with `f_s`
//! truncated below `s`. This module computes `(theta, U)` and `(omega, V)` for
//! finite, count and continuous pairs and rebuilds the densities from them.

pub mod continuous;
pub mod count;
pub mod discrete;
pub mod types;

pub use continuous::{
    check_lr_continuous, compose_f_continuous, compose_f_continuous_with, decompose_f_continuous, decompose_g_continuous,
    ContinuousDensityPair,
};
pub use count::{decompose_f_count, decompose_g_count};
pub use discrete::{
    check_lr_discrete, check_lr_discrete_reverse, compose_f_discrete, compose_g_discrete, decompose_f_discrete,
    decompose_g_discrete, DEFAULT_LR_TOL,
};
pub use types::{CountMassFunction, FiniteMassFunction, LrCheckReport, MixtureDecomposition, Mixing, TabulatedDistribution};
