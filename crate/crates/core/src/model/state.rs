use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::mixture::GaussianDPMixture;

/// Bounds keeping `theta_tilde` strictly inside `(0, 1)`.
pub const THETA_CLIP: f64 = 1e-12;

pub fn clip_theta(t: f64) -> f64 {
    t.clamp(THETA_CLIP, 1.0 - THETA_CLIP)
}

/// One full state of the chain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelState {
    /// `true` encodes the spike, `theta = 1`.
    pub gamma: bool,
    pub theta_tilde: f64,
    pub mix_g: GaussianDPMixture,
    pub mix_u: GaussianDPMixture,
    /// Latent component labels; `true` means `X_i` is attributed to `g`.
    pub r: Vec<bool>,
}

impl ModelState {
    pub fn theta(&self) -> f64 {
        if self.gamma {
            1.0
        } else {
            self.theta_tilde
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.theta_tilde >= THETA_CLIP && self.theta_tilde <= 1.0 - THETA_CLIP) {
            return Err(Error::State(format!("theta_tilde {} outside the clipped unit interval", self.theta_tilde)));
        }
        self.mix_g.validate()?;
        self.mix_u.validate()?;
        if self.gamma && self.r.iter().any(|&r| !r) {
            return Err(Error::State("gamma = 1 but some R_i = 0".into()));
        }
        Ok(())
    }
}
