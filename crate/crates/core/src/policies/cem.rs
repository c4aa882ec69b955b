//! Cross-entropy method over a flat parameter vector.
//!
//! Each generation samples candidates from a diagonal Gaussian, scores them
//! in parallel and refits the Gaussian to the elite set. Elites from the
//! previous generation compete with the new samples using their cached
//! scores, so with a deterministic objective the elite mean never drops.

use crate::rng::{self, Stream};
use crate::{par, Error, Result};
use rand_distr::{Distribution, StandardNormal};
use std::io::Write;

#[derive(Clone, Debug, PartialEq)]
pub struct TrainerConfig {
    pub population: usize,
    pub elite_frac: f64,
    pub generations: usize,
    pub episodes_per_eval: usize,
    pub init_std: f64,
    /// Lower bound on the per-coordinate sampling std.
    pub min_std: f64,
    pub seed: u64,
}

impl Default for TrainerConfig {
    fn default() -> Self {
        Self {
            population: 24,
            elite_frac: 0.25,
            generations: 40,
            episodes_per_eval: 24,
            init_std: 0.3,
            min_std: 0.01,
            seed: 0,
        }
    }
}

impl TrainerConfig {
    pub fn n_elite(&self) -> usize {
        (self.population as f64 * self.elite_frac).floor() as usize
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.elite_frac > 0.0 && self.elite_frac < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "elite_frac must lie in (0, 1), got {}",
                self.elite_frac
            )));
        }
        if self.n_elite() < 2 {
            return Err(Error::InvalidArgument(format!(
                "population {} with elite_frac {} leaves fewer than 2 elites",
                self.population, self.elite_frac
            )));
        }
        if self.episodes_per_eval == 0 {
            return Err(Error::InvalidArgument("episodes_per_eval must be positive".into()));
        }
        if !(self.init_std > 0.0) || self.min_std < 0.0 {
            return Err(Error::InvalidArgument("sampling stds must be positive".into()));
        }
        Ok(())
    }
}

/// One line of the training curve.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CurveRow {
    pub generation: usize,
    /// Mean over this generation's finite-scoring samples.
    pub mean_return: f64,
    /// Mean over the elite set after selection.
    pub elite_return: f64,
    /// Best return seen so far.
    pub best_return: f64,
}

#[derive(Clone, Debug)]
pub struct CemResult {
    pub best_params: Vec<f64>,
    pub best_return: f64,
    pub curve: Vec<CurveRow>,
}

impl CemResult {
    pub fn write_curve<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "generation,mean_return,elite_return,best_return")?;
        for r in &self.curve {
            writeln!(
                out,
                "{},{},{},{}",
                r.generation, r.mean_return, r.elite_return, r.best_return
            )?;
        }
        Ok(())
    }
}

/// Maximizes `objective` starting from `init_mean`. Candidates with a
/// non-finite score are dropped with a warning.
pub fn cem_optimize<F>(init_mean: &[f64], cfg: &TrainerConfig, objective: F) -> Result<CemResult>
where
    F: Fn(&[f64]) -> f64 + Sync + Send,
{
    cfg.validate()?;
    let dim = init_mean.len();
    let n_elite = cfg.n_elite();
    let mut rng = rng::stream(cfg.seed, Stream::Trainer);
    let mut mean = init_mean.to_vec();
    let mut std = vec![cfg.init_std; dim];
    let mut elites: Vec<(Vec<f64>, f64)> = Vec::new();
    let mut best: Option<(Vec<f64>, f64)> = None;
    let mut curve = Vec::with_capacity(cfg.generations + 1);

    for generation in 0..=cfg.generations {
        let candidates: Vec<Vec<f64>> = (0..cfg.population)
            .map(|_| {
                (0..dim)
                    .map(|j| {
                        let z: f64 = StandardNormal.sample(&mut rng);
                        mean[j] + std[j] * z
                    })
                    .collect()
            })
            .collect();
        let scores = par::map(&candidates, |c| objective(c));

        let mut pool: Vec<(Vec<f64>, f64)> = Vec::with_capacity(cfg.population + n_elite);
        let mut fresh_sum = 0.0;
        let mut fresh_n = 0usize;
        for (i, (c, s)) in candidates.into_iter().zip(scores).enumerate() {
            if s.is_finite() {
                fresh_sum += s;
                fresh_n += 1;
                pool.push((c, s));
            } else {
                log::warn!("generation {generation}: candidate {i} returned {s}, discarded");
            }
        }
        pool.append(&mut elites);
        if pool.is_empty() {
            return Err(Error::InvalidArgument(format!(
                "generation {generation}: every candidate returned a non-finite score"
            )));
        }
        // Stable sort keeps earlier (fresh) candidates first among ties.
        pool.sort_by(|a, b| b.1.total_cmp(&a.1));
        pool.truncate(n_elite);
        elites = pool;

        if best.as_ref().is_none_or(|b| elites[0].1 > b.1) {
            best = Some(elites[0].clone());
        }
        let m = elites.len() as f64;
        for j in 0..dim {
            let mu = elites.iter().map(|(c, _)| c[j]).sum::<f64>() / m;
            let var = elites.iter().map(|(c, _)| (c[j] - mu).powi(2)).sum::<f64>() / m;
            mean[j] = mu;
            std[j] = var.sqrt().max(cfg.min_std);
        }
        let row = CurveRow {
            generation,
            mean_return: if fresh_n > 0 {
                fresh_sum / fresh_n as f64
            } else {
                f64::NAN
            },
            elite_return: elites.iter().map(|e| e.1).sum::<f64>() / m,
            best_return: best.as_ref().map_or(f64::NAN, |b| b.1),
        };
        log::info!(
            "generation {} mean {:.4} elite {:.4} best {:.4}",
            row.generation,
            row.mean_return,
            row.elite_return,
            row.best_return
        );
        curve.push(row);
    }

    let (best_params, best_return) = best.expect("at least one generation ran");
    Ok(CemResult {
        best_params,
        best_return,
        curve,
    })
}
