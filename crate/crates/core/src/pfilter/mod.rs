//! Particle-filter localization with soft resampling.

mod dump;
mod estimate;
mod gradcheck;
mod likelihood;
mod local_map;
mod particles;
mod predict;
mod resample;

pub use dump::{parse_dump, write_dump};
pub use estimate::{estimate, estimate_pose, pose_loss, Estimate};
pub use gradcheck::{gradient_check, GradientInstance, GradientReport};
pub use likelihood::{update_weights, update_weights_with, LikelihoodField, LocalMapModel, ObservationModel};
pub use local_map::extract_local_map;
pub use particles::{Particle, ParticleSet, LOG_WEIGHT_FLOOR};
pub use predict::predict;
pub use resample::{resample_indices, soft_resample, soft_resample_with_indices, ResampleScheme};

use std::f64::consts::PI;

/// Filter constants. Defaults follow the active-training column of the
/// hyperparameter table (α = 0.5, β = 0.36, transition noise 0.01 m and π/36).
#[derive(Clone, Debug, PartialEq)]
pub struct FilterConfig {
    /// Soft-resampling mixture weight in `[0, 1]`.
    pub alpha: f64,
    /// Angular weight of the pose loss.
    pub beta: f64,
    /// Likelihood-field standard deviation in meters.
    pub sigma_lhood: f64,
    /// Per-beam additive floor inside the likelihood.
    pub eps_floor: f64,
    /// Transition noise std: (meters on each of x and y, radians).
    pub trans_noise: (f64, f64),
    /// Side of particle-centric local maps, in cells.
    pub local_map_size: usize,
    /// Resample after every update.
    pub resample: bool,
    pub scheme: ResampleScheme,
}

impl Default for FilterConfig {
    fn default() -> Self {
        Self {
            alpha: 0.5,
            beta: 0.36,
            sigma_lhood: 0.75,
            eps_floor: 1e-9,
            trans_noise: (0.01, PI / 36.0),
            local_map_size: 41,
            resample: true,
            scheme: ResampleScheme::Systematic,
        }
    }
}

impl FilterConfig {
    pub fn validate(&self) -> crate::Result<()> {
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(crate::Error::InvalidArgument(format!(
                "alpha must lie in [0, 1], got {}",
                self.alpha
            )));
        }
        if !(self.sigma_lhood > 0.0) {
            return Err(crate::Error::InvalidArgument(format!(
                "sigma_lhood must be positive, got {}",
                self.sigma_lhood
            )));
        }
        if self.trans_noise.0 < 0.0 || self.trans_noise.1 < 0.0 || self.eps_floor < 0.0 {
            return Err(crate::Error::InvalidArgument(
                "noise and floor parameters must be non-negative".into(),
            ));
        }
        Ok(())
    }
}
