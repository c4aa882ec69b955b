use super::{FilterConfig, ParticleSet};
use crate::par;
use crate::simulator::OdomDelta;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

/// Moves every particle by `odom` in its own frame, perturbed by Gaussian
/// transition noise. Weights are untouched.
///
/// Noise is drawn sequentially from `rng` before the parallel map, so the
/// result does not depend on the thread count.
pub fn predict<R: Rng + ?Sized>(ps: &mut ParticleSet, odom: &OdomDelta, cfg: &FilterConfig, rng: &mut R) {
    let (sxy, sphi) = cfg.trans_noise;
    let k = ps.len();
    let noise: Vec<[f64; 3]> = if sxy == 0.0 && sphi == 0.0 {
        vec![[0.0; 3]; k]
    } else {
        (0..k)
            .map(|_| {
                let a: f64 = StandardNormal.sample(rng);
                let b: f64 = StandardNormal.sample(rng);
                let c: f64 = StandardNormal.sample(rng);
                [a * sxy, b * sxy, c * sphi]
            })
            .collect()
    };
    par::for_each_mut(ps.particles_mut(), |i, p| {
        let [nx, ny, nphi] = noise[i];
        p.pose = p.pose.compose(odom.dx + nx, odom.dy + ny, odom.dphi + nphi);
    });
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Pose;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn zero_odometry_zero_noise_is_identity() {
        let mut rng = crate::rng::seeded(1);
        let poses: Vec<Pose> = (0..10)
            .map(|i| Pose::new(i as f64, -(i as f64), 0.3 * i as f64))
            .collect();
        let mut ps = ParticleSet::uniform(poses);
        let before = ps.clone();
        let cfg = FilterConfig {
            trans_noise: (0.0, 0.0),
            ..Default::default()
        };
        predict(&mut ps, &OdomDelta::default(), &cfg, &mut rng);
        assert_eq!(ps, before);
    }

    #[test]
    fn odometry_is_applied_in_particle_frame() {
        let mut rng = crate::rng::seeded(1);
        let mut ps = ParticleSet::uniform(vec![Pose::new(0.0, 0.0, FRAC_PI_2)]);
        let cfg = FilterConfig {
            trans_noise: (0.0, 0.0),
            ..Default::default()
        };
        predict(
            &mut ps,
            &OdomDelta {
                dx: 1.0,
                dy: 0.0,
                dphi: 0.0,
            },
            &cfg,
            &mut rng,
        );
        let p = ps.particles()[0].pose;
        assert!(p.x.abs() < 1e-12 && (p.y - 1.0).abs() < 1e-12);
    }

    #[test]
    fn empirical_noise_std() {
        let mut rng = crate::rng::seeded(5);
        let mut ps = ParticleSet::uniform(vec![Pose::default(); 10_000]);
        let cfg = FilterConfig {
            trans_noise: (0.01, 0.05),
            ..Default::default()
        };
        predict(&mut ps, &OdomDelta::default(), &cfg, &mut rng);
        let std = |f: &dyn Fn(&Pose) -> f64| {
            let v: Vec<f64> = ps.particles().iter().map(|p| f(&p.pose)).collect();
            let m = v.iter().sum::<f64>() / v.len() as f64;
            (v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (v.len() - 1) as f64).sqrt()
        };
        assert!((std(&|p| p.x) / 0.01 - 1.0).abs() < 0.05);
        assert!((std(&|p| p.y) / 0.01 - 1.0).abs() < 0.05);
        assert!((std(&|p| p.phi) / 0.05 - 1.0).abs() < 0.05);
    }
}
