//! Back-transformation and pointwise summaries of retained draws.

pub mod standardize;
pub mod summary;

pub use standardize::{back_transform_density, standardize, Standardization};
pub use summary::{
    quantile_sorted, ratio_direction, summarize, Band, DrawChecks, GridSpec, PosteriorSummary, RatioDirection, SummaryOptions,
    MASS_TOL, MONOTONE_TOL,
};
