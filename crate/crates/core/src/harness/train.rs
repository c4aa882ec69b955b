use super::episode::{run_episode, EpisodeConfig, LearnedPolicy, Policy, PreparedMap};
use crate::policies::{cem_optimize, Architecture, CemResult, PolicyParams, TrainerConfig};
use crate::rng::derive_seed;
use crate::{Error, Result};
use std::sync::Arc;

/// Fixed evaluation episodes: `(map index, seed)` pairs, round-robin over
/// the training maps. Every candidate is scored on the same set.
pub fn training_episodes(cfg: &TrainerConfig, n_maps: usize) -> Vec<(usize, u64)> {
    (0..cfg.episodes_per_eval)
        .map(|j| (j % n_maps, derive_seed(cfg.seed ^ 0x7472_6169_6e00, j as u64)))
        .collect()
}

#[derive(Clone, Debug)]
pub struct TrainOutput {
    pub arch: Architecture,
    pub params: PolicyParams,
    pub cem: CemResult,
    /// Ids of the maps training episodes ran on.
    pub maps_used: Vec<String>,
}

impl TrainOutput {
    /// Human-readable training log: maps, then the curve.
    pub fn log(&self) -> String {
        let mut s = format!("maps = {}\n", self.maps_used.join(","));
        for r in &self.cem.curve {
            s.push_str(&format!(
                "generation {} mean {} elite {} best {}\n",
                r.generation, r.mean_return, r.elite_return, r.best_return
            ));
        }
        s
    }
}

/// Mean episodic return of `params` over the fixed training episodes.
/// Failed episodes make the score NaN so the trainer drops the candidate.
pub fn evaluate_params(
    arch: &Architecture,
    params: &[f64],
    episode_cfg: &EpisodeConfig,
    maps: &[PreparedMap],
    episodes: &[(usize, u64)],
) -> f64 {
    let policy = Policy::Learned(Arc::new(LearnedPolicy {
        arch: arch.clone(),
        params: PolicyParams(params.to_vec()),
    }));
    let mut total = 0.0;
    for &(m, seed) in episodes {
        match run_episode(&maps[m], episode_cfg, &policy, seed) {
            Ok(r) => total += r.total_return(),
            Err(e) => {
                log::warn!("training episode on {} seed {seed} failed: {e}", maps[m].id);
                return f64::NAN;
            }
        }
    }
    total / episodes.len() as f64
}

/// Cross-entropy-method training of the learned policy on `maps`.
pub fn train_policy(
    cfg: &TrainerConfig,
    episode_cfg: &EpisodeConfig,
    arch: &Architecture,
    maps: &[PreparedMap],
) -> Result<TrainOutput> {
    if maps.is_empty() {
        return Err(Error::InvalidArgument("training needs at least one map".into()));
    }
    let episodes = training_episodes(cfg, maps.len());
    let mut used: Vec<usize> = episodes.iter().map(|e| e.0).collect();
    used.sort_unstable();
    used.dedup();
    let init = vec![0.0; arch.param_dim()];
    let cem = cem_optimize(&init, cfg, |p| evaluate_params(arch, p, episode_cfg, maps, &episodes))?;
    Ok(TrainOutput {
        arch: arch.clone(),
        params: PolicyParams(cem.best_params.clone()),
        maps_used: used.into_iter().map(|i| maps[i].id.clone()).collect(),
        cem,
    })
}
