use super::config::ExperimentConfig;
use super::episode::{run_episode, EpisodeResult, LearnedPolicy, Policy, PolicyKind, PreparedMap};
use super::mapgen::{generate_corpus, load_corpus, Split};
use super::metrics::{aggregate, MetricsReport};
use super::task::TaskKind;
use crate::policies::load_policy;
use crate::rng::derive_seed;
use crate::{par, Error, Result};
use std::fmt::Write;
use std::sync::Arc;

/// Prepared maps grouped by split.
#[derive(Clone, Debug, Default)]
pub struct Corpus {
    pub train: Vec<PreparedMap>,
    pub test: Vec<PreparedMap>,
}

impl Corpus {
    pub fn split(&self, s: Split) -> &[PreparedMap] {
        match s {
            Split::Train => &self.train,
            Split::Test => &self.test,
        }
    }

    /// Loads `map_dir` if set, otherwise generates the corpus from `map_seed`.
    pub fn from_config(cfg: &ExperimentConfig) -> Result<Self> {
        let entries = match &cfg.map_dir {
            Some(dir) => load_corpus(dir)?,
            None => generate_corpus(cfg.map_seed, cfg.n_train_maps, cfg.n_test_maps, &cfg.mapgen)?,
        };
        let mut corpus = Corpus::default();
        for e in entries {
            let m = PreparedMap::new(e.id, e.grid, cfg.sim.robot_radius)?;
            match e.split {
                Split::Train => corpus.train.push(m),
                Split::Test => corpus.test.push(m),
            }
        }
        Ok(corpus)
    }
}

/// One finished episode with its place in the experiment matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct EpisodeRecord {
    pub split: Split,
    pub result: EpisodeResult,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SummaryRow {
    pub policy: String,
    pub task: TaskKind,
    pub split: Split,
    pub report: MetricsReport,
}

/// Episode seed shared by every policy, so policies are compared on the
/// same start poses, priors and noise draws.
pub fn episode_seed(base: u64, task: TaskKind, split: Split, index: usize) -> u64 {
    derive_seed(derive_seed(derive_seed(base, task as u64), split as u64), index as u64)
}

fn build_policy(kind: PolicyKind, learned: Option<&Arc<LearnedPolicy>>) -> Result<Policy> {
    Ok(match kind {
        PolicyKind::Idle => Policy::Idle,
        PolicyKind::Turn => Policy::Turn,
        PolicyKind::Avoid => Policy::Avoid,
        PolicyKind::Goalnav => Policy::Goalnav,
        PolicyKind::Learned => Policy::Learned(
            learned
                .cloned()
                .ok_or_else(|| Error::Config("policy `learned` needs policy_file".into()))?,
        ),
    })
}

/// Runs `cfg.episodes` episodes for every policy × task × split. Episodes
/// are assigned to the split's maps round-robin.
pub fn run_matrix(
    cfg: &ExperimentConfig,
    corpus: &Corpus,
    learned: Option<Arc<LearnedPolicy>>,
) -> Result<Vec<EpisodeRecord>> {
    let mut jobs = Vec::new();
    for &kind in &cfg.policies {
        let policy = build_policy(kind, learned.as_ref())?;
        for &task in &cfg.tasks {
            for &split in &cfg.splits {
                let maps = corpus.split(split);
                if maps.is_empty() {
                    return Err(Error::Config(format!("split `{split}` has no maps")));
                }
                for i in 0..cfg.episodes {
                    jobs.push((
                        policy.clone(),
                        task,
                        split,
                        &maps[i % maps.len()],
                        episode_seed(cfg.seed, task, split, i),
                    ));
                }
            }
        }
    }
    let episode_cfgs: Vec<_> = TaskKind::ALL.iter().map(|&k| cfg.episode_config(k)).collect();
    par::map(&jobs, |(policy, task, split, map, seed)| {
        let ecfg = &episode_cfgs[*task as usize];
        run_episode(map, ecfg, policy, *seed)
            .map(|result| EpisodeRecord { split: *split, result })
            .inspect_err(|e| {
                log::error!("{} / {task} / {} / seed {seed}: {e}", policy.name(), map.id);
            })
    })
    .into_iter()
    .collect()
}

pub const RESULTS_HEADER: &str = "policy,task,split,map_id,seed,rmse_pos_cm,rmse_orient_rad,mean_reward,collisions";

/// One CSV row per episode; the per-episode RMSE is its final error.
pub fn results_csv(records: &[EpisodeRecord]) -> String {
    let mut s = String::from(RESULTS_HEADER);
    s.push('\n');
    for r in records {
        let e = &r.result;
        writeln!(
            s,
            "{},{},{},{},{},{},{},{},{}",
            e.policy,
            e.task,
            r.split,
            e.map_id,
            e.seed,
            100.0 * e.final_position_error,
            e.final_orientation_error,
            e.mean_reward(),
            e.collisions()
        )
        .unwrap();
    }
    s
}

/// Aggregates per (policy, task, split), in first-appearance order.
pub fn summarize(records: &[EpisodeRecord]) -> Result<Vec<SummaryRow>> {
    let mut keys: Vec<(String, TaskKind, Split)> = Vec::new();
    for r in records {
        let k = (r.result.policy.clone(), r.result.task, r.split);
        if !keys.contains(&k) {
            keys.push(k);
        }
    }
    keys.into_iter()
        .map(|(policy, task, split)| {
            let group: Vec<EpisodeResult> = records
                .iter()
                .filter(|r| r.result.policy == policy && r.result.task == task && r.split == split)
                .map(|r| r.result.clone())
                .collect();
            Ok(SummaryRow {
                report: aggregate(&group)?,
                policy,
                task,
                split,
            })
        })
        .collect()
}

pub fn summary_table(rows: &[SummaryRow]) -> String {
    let mut s = format!(
        "{:<10} {:<11} {:<6} {:>4} {:>10} {:>11} {:>11} {:>10}\n",
        "policy", "task", "split", "n", "rmse_cm", "rmse_rad", "mean_rew", "collisions"
    );
    for r in rows {
        let m = &r.report;
        writeln!(
            s,
            "{:<10} {:<11} {:<6} {:>4} {:>10.2} {:>11.4} {:>11.4} {:>10}",
            r.policy,
            r.task,
            r.split,
            m.n_episodes,
            m.rmse_position_cm,
            m.rmse_orientation_rad,
            m.mean_reward,
            m.collisions
        )
        .unwrap();
    }
    s
}

#[derive(Clone, Debug)]
pub struct ExperimentOutput {
    pub records: Vec<EpisodeRecord>,
    pub summary: Vec<SummaryRow>,
    pub csv: String,
    pub table: String,
}

/// Loads maps and policy, runs the matrix and writes `results.csv`,
/// `summary.txt` and the resolved `config.txt` into `cfg.output_dir`.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    cfg.validate()?;
    let corpus = Corpus::from_config(cfg)?;
    let learned = if cfg.policies.contains(&PolicyKind::Learned) {
        let path = cfg
            .policy_file
            .as_ref()
            .ok_or_else(|| Error::Config("policy `learned` needs policy_file".into()))?;
        let (arch, params) = load_policy(path)?;
        Some(Arc::new(LearnedPolicy { arch, params }))
    } else {
        None
    };
    let records = run_matrix(cfg, &corpus, learned)?;
    let summary = summarize(&records)?;
    let out = ExperimentOutput {
        csv: results_csv(&records),
        table: summary_table(&summary),
        records,
        summary,
    };
    std::fs::create_dir_all(&cfg.output_dir)?;
    std::fs::write(cfg.output_dir.join("results.csv"), &out.csv)?;
    std::fs::write(cfg.output_dir.join("summary.txt"), &out.table)?;
    std::fs::write(cfg.output_dir.join("config.txt"), cfg.to_text())?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_config(dir: &std::path::Path) -> ExperimentConfig {
        ExperimentConfig::parse(&format!(
            "output_dir = {}\nn_train_maps = 2\nn_test_maps = 1\npolicies = turn\ntasks = tracking\nsplits = test\nepisodes = 2\nhorizon = 4\n",
            dir.display()
        ))
        .unwrap()
    }

    #[test]
    fn one_policy_two_seeds() {
        let dir = tempfile::tempdir().unwrap();
        let out = run_experiment(&small_config(dir.path())).unwrap();
        assert_eq!(out.summary.len(), 1);
        assert_eq!(out.summary[0].report.n_episodes, 2);
        let csv = std::fs::read_to_string(dir.path().join("results.csv")).unwrap();
        assert_eq!(csv.lines().next(), Some(RESULTS_HEADER));
        assert_eq!(csv.lines().count(), 3);
        assert!(csv
            .lines()
            .skip(1)
            .all(|l| l.starts_with("turn,tracking,test,test_00,")));
    }

    #[test]
    fn reruns_are_byte_identical() {
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        run_experiment(&small_config(a.path())).unwrap();
        run_experiment(&small_config(b.path())).unwrap();
        for f in ["results.csv", "summary.txt"] {
            assert_eq!(
                std::fs::read(a.path().join(f)).unwrap(),
                std::fs::read(b.path().join(f)).unwrap()
            );
        }
    }

    #[test]
    fn learned_without_policy_file_is_a_config_error() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = small_config(dir.path());
        cfg.policies = vec![PolicyKind::Learned];
        assert!(matches!(run_experiment(&cfg), Err(Error::Config(_))));
    }
}
