//! The prior: two truncated Dirichlet-process Gaussian mixtures `g` and `u`,
//! a spike-and-slab weight `theta`, and the induced density `f`.

pub mod density;
pub mod lattice;
pub mod mixture;
pub mod prior;
pub mod state;

pub use density::{eval_model_f, log_model_f, loglik_x, loglik_y, tail_integral};
pub use lattice::{Block, EvalMode, Lattice, LatticeSpec, ModelEvaluator};
pub use mixture::{mixture_cdf, mixture_pdf, weights_from_sticks, GaussianDPMixture, StickBreaking};
pub use prior::{nig_logpdf, sample_prior_state, stick_log_prior, NigHyper, PriorConfig, PseudoPriorSpec};
pub use state::{clip_theta, ModelState, THETA_CLIP};
