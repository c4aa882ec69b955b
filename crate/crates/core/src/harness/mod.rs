//! Tasks, episodes, metrics, experiment configuration, map generation,
//! policy training and trajectory rendering.

mod config;
mod episode;
mod experiment;
pub mod mapgen;
mod metrics;
mod render;
mod task;
mod train;

pub use config::ExperimentConfig;
pub use episode::{
    run_episode, run_episode_dumping, EpisodeConfig, EpisodeResult, LearnedPolicy, Policy, PolicyKind, PreparedMap,
    StepRecord,
};
pub use experiment::{
    episode_seed, results_csv, run_experiment, run_matrix, summarize, summary_table, Corpus, EpisodeRecord,
    ExperimentOutput, SummaryRow, RESULTS_HEADER,
};
pub use mapgen::{generate_corpus, generate_map, load_corpus, write_corpus, CorpusEntry, MapGenConfig, Split};
pub use metrics::{aggregate, rms, MetricsReport};
pub use render::render_svg;
pub use task::{init_belief, TaskKind, TaskSpec, ACTIVE_HORIZON, PASSIVE_HORIZON};
pub use train::{evaluate_params, train_policy, training_episodes, TrainOutput};
