//! Derivative of the pose loss with respect to pre-resampling weights,
//! through the soft-resampling importance correction, with the ancestor
//! draws held fixed.

use super::pose_loss;
use crate::{angle, Pose};

/// Small fixed instance: weights (not re-normalized when perturbed),
/// particle poses, ancestor draws and ground truth.
#[derive(Clone, Debug)]
pub struct GradientInstance {
    pub weights: Vec<f64>,
    pub poses: Vec<Pose>,
    pub draws: Vec<usize>,
    pub truth: Pose,
    pub beta: f64,
}

#[derive(Clone, Debug)]
pub struct GradientReport {
    pub alpha: f64,
    pub analytic: Vec<f64>,
    pub finite_difference: Vec<f64>,
    /// `max_k |g_a − g_fd| / max(‖g_a‖∞, ‖g_fd‖∞)`; zero when both vanish.
    pub max_relative_error: f64,
    pub analytic_norm: f64,
    pub finite_difference_norm: f64,
}

struct Forward {
    loss: f64,
    corrected: Vec<f64>,
    normalized: Vec<f64>,
    sum: f64,
    mean: Pose,
    sin_sum: f64,
    cos_sum: f64,
}

fn forward(inst: &GradientInstance, weights: &[f64], alpha: f64) -> Forward {
    let k = weights.len() as f64;
    let corrected: Vec<f64> = inst
        .draws
        .iter()
        .map(|&i| weights[i] / (alpha * weights[i] + (1.0 - alpha) / k))
        .collect();
    let sum: f64 = corrected.iter().sum();
    let normalized: Vec<f64> = corrected.iter().map(|c| c / sum).collect();
    let (mut x, mut y, mut s, mut c) = (0.0, 0.0, 0.0, 0.0);
    for (j, &i) in inst.draws.iter().enumerate() {
        let p = inst.poses[i];
        x += normalized[j] * p.x;
        y += normalized[j] * p.y;
        s += normalized[j] * p.phi.sin();
        c += normalized[j] * p.phi.cos();
    }
    let mean = Pose::new(x, y, s.atan2(c));
    Forward {
        loss: pose_loss(&mean, &inst.truth, inst.beta),
        corrected,
        normalized,
        sum,
        mean,
        sin_sum: s,
        cos_sum: c,
    }
}

/// Loss of the chain weights → corrected weights → estimate → loss.
pub fn chain_loss(inst: &GradientInstance, weights: &[f64], alpha: f64) -> f64 {
    forward(inst, weights, alpha).loss
}

/// Hand-derived reverse-mode gradient of [`chain_loss`].
pub fn analytic_gradient(inst: &GradientInstance, alpha: f64) -> Vec<f64> {
    let f = forward(inst, &inst.weights, alpha);
    let k = inst.weights.len() as f64;
    let gx = 2.0 * (f.mean.x - inst.truth.x);
    let gy = 2.0 * (f.mean.y - inst.truth.y);
    let gphi = 2.0 * inst.beta * angle::diff(f.mean.phi, inst.truth.phi);
    let r2 = f.sin_sum * f.sin_sum + f.cos_sum * f.cos_sum;
    let (dphi_ds, dphi_dc) = (f.cos_sum / r2, -f.sin_sum / r2);

    // dL/d(normalized weight j)
    let a: Vec<f64> = inst
        .draws
        .iter()
        .map(|&i| {
            let p = inst.poses[i];
            gx * p.x + gy * p.y + gphi * (dphi_ds * p.phi.sin() + dphi_dc * p.phi.cos())
        })
        .collect();
    let mean_a: f64 = a.iter().zip(&f.normalized).map(|(a, w)| a * w).sum();

    let mut grad = vec![0.0; inst.weights.len()];
    for (j, &i) in inst.draws.iter().enumerate() {
        let dl_dc = (a[j] - mean_a) / f.sum;
        let q = alpha * inst.weights[i] + (1.0 - alpha) / k;
        // d(w/q)/dw = ((1 − α)/K) / q²
        grad[i] += dl_dc * ((1.0 - alpha) / k) / (q * q);
    }
    debug_assert_eq!(f.corrected.len(), inst.draws.len());
    grad
}

/// Central finite differences of [`chain_loss`] with step `h`.
pub fn finite_difference_gradient(inst: &GradientInstance, alpha: f64, h: f64) -> Vec<f64> {
    (0..inst.weights.len())
        .map(|i| {
            let mut plus = inst.weights.clone();
            let mut minus = inst.weights.clone();
            plus[i] += h;
            minus[i] -= h;
            (chain_loss(inst, &plus, alpha) - chain_loss(inst, &minus, alpha)) / (2.0 * h)
        })
        .collect()
}

/// Compares the analytic gradient with central differences (step 1e-6).
pub fn gradient_check(inst: &GradientInstance, alpha: f64) -> GradientReport {
    let analytic = analytic_gradient(inst, alpha);
    let fd = finite_difference_gradient(inst, alpha, 1e-6);
    let inf = |v: &[f64]| v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let scale = inf(&analytic).max(inf(&fd));
    let max_relative_error = if scale == 0.0 {
        0.0
    } else {
        analytic.iter().zip(&fd).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max) / scale
    };
    let l2 = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
    GradientReport {
        alpha,
        analytic_norm: l2(&analytic),
        finite_difference_norm: l2(&fd),
        analytic,
        finite_difference: fd,
        max_relative_error,
    }
}

impl GradientInstance {
    /// Deterministic random instance with `k` particles and fixed draws.
    pub fn random(k: usize, seed: u64) -> Self {
        use rand::Rng;
        let mut rng = crate::rng::seeded(seed);
        let raw: Vec<f64> = (0..k).map(|_| rng.random_range(0.1..1.0)).collect();
        let total: f64 = raw.iter().sum();
        let weights = raw.iter().map(|w| w / total).collect();
        let poses = (0..k)
            .map(|_| {
                Pose::new(
                    rng.random_range(-1.0..1.0),
                    rng.random_range(-1.0..1.0),
                    rng.random_range(-1.2..1.2),
                )
            })
            .collect();
        let draws = (0..k).map(|_| rng.random_range(0..k)).collect();
        Self {
            weights,
            poses,
            draws,
            truth: Pose::new(0.3, -0.2, 0.4),
            beta: 0.36,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn alpha_one_has_exactly_zero_gradient() {
        let inst = GradientInstance::random(5, 1);
        let r = gradient_check(&inst, 1.0);
        assert!(r.analytic.iter().all(|&g| g == 0.0));
        assert_eq!(r.analytic_norm, 0.0);
    }

    #[test]
    fn matches_finite_differences_at_half() {
        for seed in 0..20 {
            let inst = GradientInstance::random(5, seed);
            let r = gradient_check(&inst, 0.5);
            assert!(r.max_relative_error < 1e-4, "seed {seed}: {}", r.max_relative_error);
            assert!(r.analytic_norm > 0.0);
        }
    }

    #[test]
    fn gradient_grows_as_alpha_drops() {
        let inst = GradientInstance::random(5, 3);
        let norms: Vec<f64> = [1.0, 0.9, 0.8, 0.7, 0.6, 0.5]
            .iter()
            .map(|&a| gradient_check(&inst, a).analytic_norm)
            .collect();
        assert!(norms.windows(2).all(|w| w[1] > w[0]), "{norms:?}");
    }
}
