use crate::{Error, Pose, Result};

/// Normalized log weights are clamped here so they stay finite; anything
/// below about -745 is already exactly zero in linear space.
pub const LOG_WEIGHT_FLOOR: f64 = -1e4;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Particle {
    pub pose: Pose,
    pub log_weight: f64,
}

/// Weighted pose hypotheses.
#[derive(Clone, Debug, PartialEq)]
pub struct ParticleSet {
    particles: Vec<Particle>,
    normalized: bool,
}

impl ParticleSet {
    /// Equal-weight set over `poses`. Panics when `poses` is empty.
    pub fn uniform(poses: Vec<Pose>) -> Self {
        assert!(!poses.is_empty(), "a particle set needs at least one particle");
        let lw = -(poses.len() as f64).ln();
        Self {
            particles: poses
                .into_iter()
                .map(|pose| Particle { pose, log_weight: lw })
                .collect(),
            normalized: true,
        }
    }

    /// Set from explicit particles; normalizes the weights.
    pub fn from_particles(particles: Vec<Particle>) -> Result<Self> {
        if particles.is_empty() {
            return Err(Error::InvalidArgument(
                "a particle set needs at least one particle".into(),
            ));
        }
        let mut ps = Self {
            particles,
            normalized: false,
        };
        ps.normalize()?;
        Ok(ps)
    }

    /// Set from explicit particles without touching the weights.
    pub fn from_particles_unnormalized(particles: Vec<Particle>) -> Result<Self> {
        if particles.is_empty() {
            return Err(Error::InvalidArgument(
                "a particle set needs at least one particle".into(),
            ));
        }
        Ok(Self {
            particles,
            normalized: false,
        })
    }

    pub fn len(&self) -> usize {
        self.particles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.particles.is_empty()
    }

    pub fn particles(&self) -> &[Particle] {
        &self.particles
    }

    /// Mutable access for pose-only edits; the normalized flag is kept.
    pub(crate) fn particles_mut(&mut self) -> &mut [Particle] {
        &mut self.particles
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    /// Linear weights.
    pub fn weights(&self) -> Vec<f64> {
        self.particles.iter().map(|p| p.log_weight.exp()).collect()
    }

    pub fn total_weight(&self) -> f64 {
        self.particles.iter().map(|p| p.log_weight.exp()).sum()
    }

    /// Shifts log weights so they sum to one in linear space.
    pub fn normalize(&mut self) -> Result<()> {
        let max = self
            .particles
            .iter()
            .map(|p| p.log_weight)
            .filter(|w| w.is_finite())
            .fold(f64::NEG_INFINITY, f64::max);
        if !max.is_finite() {
            return Err(Error::BeliefCollapsed);
        }
        let sum: f64 = self
            .particles
            .iter()
            .map(|p| {
                if p.log_weight.is_finite() {
                    (p.log_weight - max).exp()
                } else {
                    0.0
                }
            })
            .sum();
        let lse = max + sum.ln();
        for p in &mut self.particles {
            p.log_weight = if p.log_weight.is_finite() {
                (p.log_weight - lse).max(LOG_WEIGHT_FLOOR)
            } else {
                LOG_WEIGHT_FLOOR
            };
        }
        self.normalized = true;
        Ok(())
    }

    /// Effective sample size `1 / Σ w²` of the normalized weights.
    pub fn effective_sample_size(&self) -> f64 {
        let w2: f64 = self.particles.iter().map(|p| (2.0 * p.log_weight).exp()).sum();
        1.0 / w2
    }
}
