//! Numerical kernels: special functions, quadrature, the pseudo-prior MLEs,
//! the bivariate KDE, slice sampling and seeded random streams.

pub mod kde;
pub mod mle;
pub mod quadrature;
pub mod rng;
pub mod slice;
pub mod special;

pub use kde::Kde2d;
pub use mle::{beta_mle, stick_alpha_mle, BetaFit};
pub use quadrature::{
    adaptive_quadrature, adaptive_quadrature_with, tail_ratio_integral, tail_ratio_integral_log, QuadratureOptions,
    QuadratureResult, TailIntegral,
};
pub use rng::SeededRng;
pub use slice::{slice_update, SliceStep, SliceTuning};
pub use special::{std_normal_cdf, std_normal_pdf};
