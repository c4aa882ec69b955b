use super::ParticleSet;
use crate::{angle, Error, Pose, Result};

/// Pose estimate with its single-step loss.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Estimate {
    pub pose: Pose,
    pub loss: f64,
}

/// Weighted mean position and circular-mean heading of the particle set.
pub fn estimate_pose(ps: &ParticleSet) -> Result<Pose> {
    let (mut x, mut y, mut s, mut c, mut total) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for p in ps.particles() {
        let w = p.log_weight.exp();
        x += w * p.pose.x;
        y += w * p.pose.y;
        s += w * p.pose.phi.sin();
        c += w * p.pose.phi.cos();
        total += w;
    }
    if s.abs() < 1e-12 && c.abs() < 1e-12 {
        return Err(Error::OrientationUndefined);
    }
    Ok(Pose::new(x / total, y / total, s.atan2(c)))
}

/// Squared pose error `Δx² + Δy² + β·wrap(Δφ)²` (meters², radians²).
pub fn pose_loss(est: &Pose, truth: &Pose, beta: f64) -> f64 {
    let dphi = angle::diff(est.phi, truth.phi);
    (est.x - truth.x).powi(2) + (est.y - truth.y).powi(2) + beta * dphi * dphi
}

pub fn estimate(ps: &ParticleSet, truth: &Pose, beta: f64) -> Result<Estimate> {
    let pose = estimate_pose(ps)?;
    Ok(Estimate {
        pose,
        loss: pose_loss(&pose, truth, beta),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pfilter::Particle;
    use rand::{Rng, SeedableRng};
    use std::f64::consts::PI;

    #[test]
    fn identical_particles() {
        let p = Pose::new(1.5, -2.0, 0.7);
        let est = estimate_pose(&ParticleSet::uniform(vec![p; 7])).unwrap();
        assert!((est.x - p.x).abs() < 1e-12 && (est.y - p.y).abs() < 1e-12);
        assert!((est.phi - p.phi).abs() < 1e-12);
    }

    #[test]
    fn headings_straddling_the_wrap() {
        let ps = ParticleSet::uniform(vec![Pose::new(0.0, 0.0, 3.0), Pose::new(0.0, 0.0, -3.0)]);
        let est = estimate_pose(&ps).unwrap();
        assert!((est.phi.abs() - PI).abs() < 1e-12, "{}", est.phi);
    }

    #[test]
    fn antipodal_belief_is_undefined() {
        let ps = ParticleSet::uniform(vec![Pose::new(0.0, 0.0, 0.0), Pose::new(0.0, 0.0, -PI)]);
        assert!(matches!(estimate_pose(&ps), Err(Error::OrientationUndefined)));
    }

    #[test]
    fn matches_direct_sums() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            let n = rng.random_range(1..50);
            let ps = ParticleSet::from_particles(
                (0..n)
                    .map(|_| Particle {
                        pose: Pose::new(
                            rng.random_range(-5.0..5.0),
                            rng.random_range(-5.0..5.0),
                            rng.random_range(-PI..PI),
                        ),
                        log_weight: rng.random_range(-4.0..0.0),
                    })
                    .collect(),
            )
            .unwrap();
            let est = estimate_pose(&ps).unwrap();
            let w = ps.weights();
            let p = ps.particles();
            let sx: f64 = (0..n).map(|i| w[i] * p[i].pose.x).sum();
            let sy: f64 = (0..n).map(|i| w[i] * p[i].pose.y).sum();
            let ss: f64 = (0..n).map(|i| w[i] * p[i].pose.phi.sin()).sum();
            let sc: f64 = (0..n).map(|i| w[i] * p[i].pose.phi.cos()).sum();
            let tw: f64 = w.iter().sum();
            assert_eq!(est.x, sx / tw);
            assert_eq!(est.y, sy / tw);
            assert_eq!(est.phi, angle::normalize(ss.atan2(sc)));
        }
    }

    #[test]
    fn loss_examples() {
        let t = Pose::new(1.0, 2.0, 0.3);
        assert_eq!(pose_loss(&t, &t, 0.36), 0.0);
        let e = Pose::new(1.1, 2.0, 0.8);
        assert!((pose_loss(&e, &t, 0.36) - 0.10).abs() < 1e-12);
        let a = Pose::new(0.0, 0.0, 3.1);
        let b = Pose::new(0.0, 0.0, -3.1);
        let wrapped = 2.0 * PI - 6.2;
        assert!((pose_loss(&a, &b, 1.0) - wrapped * wrapped).abs() < 1e-12);
        assert!((wrapped - 0.0832).abs() < 1e-4);
    }
}
