use super::{Particle, ParticleSet};
use crate::{Error, Result};
use rand::Rng;

/// How the `K` ancestor indices are drawn from the proposal.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum ResampleScheme {
    /// One uniform offset, `K` evenly spaced pointers.
    #[default]
    Systematic,
    /// `K` independent draws.
    Multinomial,
}

/// Mixture proposal `q(k) = α·w_k + (1 − α)/K` for normalized weights.
pub fn proposal(weights: &[f64], alpha: f64) -> Vec<f64> {
    let k = weights.len() as f64;
    weights.iter().map(|w| alpha * w + (1.0 - alpha) / k).collect()
}

/// Draws `n` indices from the (not necessarily normalized) distribution `q`.
pub fn resample_indices<R: Rng + ?Sized>(q: &[f64], n: usize, scheme: ResampleScheme, rng: &mut R) -> Vec<usize> {
    let mut cum = Vec::with_capacity(q.len());
    let mut acc = 0.0;
    for &x in q {
        acc += x;
        cum.push(acc);
    }
    let total = acc;
    let last = q.len() - 1;
    match scheme {
        ResampleScheme::Systematic => {
            let u0: f64 = rng.random::<f64>() / n as f64;
            let mut out = Vec::with_capacity(n);
            let mut k = 0;
            for j in 0..n {
                let u = (u0 + j as f64 / n as f64) * total;
                while k < last && cum[k] <= u {
                    k += 1;
                }
                out.push(k);
            }
            out
        }
        ResampleScheme::Multinomial => (0..n)
            .map(|_| {
                let u = rng.random::<f64>() * total;
                cum.partition_point(|&c| c <= u).min(last)
            })
            .collect(),
    }
}

/// Soft resampling.
///
/// Ancestors are drawn from `q(k) = α·w_k + (1 − α)/K`; each child keeps its
/// ancestor's pose with importance-corrected weight `w_k / q(k)`, and the
/// set is renormalized. `α = 1` is ordinary resampling with uniform output
/// weights; `α = 0` draws ancestors uniformly and carries the weights over.
pub fn soft_resample<R: Rng + ?Sized>(
    ps: &ParticleSet,
    alpha: f64,
    scheme: ResampleScheme,
    rng: &mut R,
) -> Result<ParticleSet> {
    check(ps, alpha)?;
    let q = proposal(&ps.weights(), alpha);
    let draws = resample_indices(&q, ps.len(), scheme, rng);
    soft_resample_with_indices(ps, alpha, &draws)
}

/// Soft resampling with fixed ancestor indices (common random numbers).
pub fn soft_resample_with_indices(ps: &ParticleSet, alpha: f64, draws: &[usize]) -> Result<ParticleSet> {
    check(ps, alpha)?;
    let k = ps.len() as f64;
    let src = ps.particles();
    let children = draws
        .iter()
        .map(|&i| {
            let p = src[i];
            let lw = p.log_weight;
            // ln q computed from ln w so underflowed weights stay finite
            let log_q = if alpha == 1.0 {
                lw
            } else {
                (alpha * lw.exp() + (1.0 - alpha) / k).ln()
            };
            Particle {
                pose: p.pose,
                log_weight: lw - log_q,
            }
        })
        .collect();
    ParticleSet::from_particles(children)
}

fn check(ps: &ParticleSet, alpha: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::InvalidArgument(format!("alpha must lie in [0, 1], got {alpha}")));
    }
    if !ps.is_normalized() {
        return Err(Error::InvalidArgument(
            "soft resampling needs normalized weights".into(),
        ));
    }
    Ok(())
}
