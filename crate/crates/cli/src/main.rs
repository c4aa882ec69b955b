use activeloc::harness::{
    generate_corpus, render_svg, run_episode, run_episode_dumping, run_experiment, train_policy, write_corpus, Corpus,
    ExperimentConfig, LearnedPolicy, MapGenConfig, Policy, PolicyKind, Split, TaskKind,
};
use activeloc::policies::{load_policy, save_policy};
use activeloc::selftest::run_selftest;
use activeloc::Error;
use clap::{Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

/// Active localization laboratory.
#[derive(Parser, Debug)]
#[command(name = "activeloc", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run the experiment matrix described by a config file.
    Run {
        #[arg(long)]
        config: PathBuf,
    },
    /// Train the learned policy on the training split.
    Train {
        #[arg(long)]
        config: Option<PathBuf>,
        /// Where to write the trained policy.
        #[arg(long)]
        out: PathBuf,
        /// Training curve CSV.
        #[arg(long)]
        curve: Option<PathBuf>,
        /// Training log (maps used and per-generation returns).
        #[arg(long)]
        log: Option<PathBuf>,
    },
    /// Evaluate a single policy.
    Eval {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        policy: PolicyKind,
        #[arg(long)]
        policy_file: Option<PathBuf>,
        #[arg(long)]
        task: Option<TaskKind>,
        #[arg(long)]
        split: Option<Split>,
        #[arg(long)]
        episodes: Option<usize>,
    },
    /// Run one episode and draw its trajectory as SVG.
    Render {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        policy: PolicyKind,
        #[arg(long)]
        policy_file: Option<PathBuf>,
        #[arg(long, default_value = "tracking")]
        task: TaskKind,
        /// Map id, e.g. `test_00`.
        #[arg(long)]
        map: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        /// Also dump particles and belief images per step into this directory.
        #[arg(long)]
        dump: Option<PathBuf>,
        /// Also write the per-step episode log.
        #[arg(long)]
        log: Option<PathBuf>,
    },
    /// Map corpus tools.
    Maps {
        #[command(subcommand)]
        command: MapsCommand,
    },
    /// Run the invariant and oracle suite.
    Selftest,
}

#[derive(Subcommand, Debug)]
enum MapsCommand {
    /// Generate a train/test corpus of floorplans.
    Generate {
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 10)]
        train: usize,
        #[arg(long, default_value_t = 7)]
        test: usize,
    },
}

fn load_config(path: Option<&PathBuf>) -> activeloc::Result<ExperimentConfig> {
    match path {
        Some(p) => ExperimentConfig::load(p),
        None => Ok(ExperimentConfig::default()),
    }
}

fn learned(cfg: &ExperimentConfig, kind: PolicyKind) -> activeloc::Result<Policy> {
    Ok(match kind {
        PolicyKind::Idle => Policy::Idle,
        PolicyKind::Turn => Policy::Turn,
        PolicyKind::Avoid => Policy::Avoid,
        PolicyKind::Goalnav => Policy::Goalnav,
        PolicyKind::Learned => {
            let path = cfg
                .policy_file
                .as_ref()
                .ok_or_else(|| Error::Config("policy `learned` needs --policy-file".into()))?;
            let (arch, params) = load_policy(path)?;
            Policy::Learned(Arc::new(LearnedPolicy { arch, params }))
        }
    })
}

fn execute(command: Command) -> activeloc::Result<bool> {
    match command {
        Command::Run { config } => {
            let cfg = ExperimentConfig::load(&config)?;
            let out = run_experiment(&cfg)?;
            print!("{}", out.table);
            println!("results written to {}", cfg.output_dir.display());
        }
        Command::Train {
            config,
            out,
            curve,
            log,
        } => {
            let cfg = load_config(config.as_ref())?;
            let corpus = Corpus::from_config(&cfg)?;
            let ecfg = cfg.episode_config(cfg.train_task);
            let res = train_policy(&cfg.trainer, &ecfg, &cfg.arch, &corpus.train)?;
            save_policy(&out, &res.arch, &res.params)?;
            if let Some(path) = curve {
                res.cem
                    .write_curve(std::io::BufWriter::new(std::fs::File::create(path)?))?;
            }
            if let Some(path) = log {
                std::fs::write(path, res.log())?;
            }
            println!(
                "best return {:.4}; policy written to {}",
                res.cem.best_return,
                out.display()
            );
        }
        Command::Eval {
            config,
            policy,
            policy_file,
            task,
            split,
            episodes,
        } => {
            let mut cfg = load_config(config.as_ref())?;
            cfg.policies = vec![policy];
            if let Some(p) = policy_file {
                cfg.policy_file = Some(p);
            }
            if let Some(t) = task {
                cfg.tasks = vec![t];
            }
            if let Some(s) = split {
                cfg.splits = vec![s];
            }
            if let Some(n) = episodes {
                cfg.episodes = n;
            }
            let out = run_experiment(&cfg)?;
            print!("{}", out.table);
        }
        Command::Render {
            config,
            policy,
            policy_file,
            task,
            map,
            seed,
            out,
            dump,
            log,
        } => {
            let mut cfg = load_config(config.as_ref())?;
            if let Some(p) = policy_file {
                cfg.policy_file = Some(p);
            }
            let policy = learned(&cfg, policy)?;
            let corpus = Corpus::from_config(&cfg)?;
            let prepared = corpus
                .train
                .iter()
                .chain(&corpus.test)
                .find(|m| m.id == map)
                .ok_or_else(|| Error::Config(format!("no map with id `{map}`")))?;
            let ecfg = cfg.episode_config(task);
            let result = match dump {
                Some(dir) => run_episode_dumping(prepared, &ecfg, &policy, seed, &dir)?,
                None => run_episode(prepared, &ecfg, &policy, seed)?,
            };
            std::fs::write(&out, render_svg(&result, &prepared.grid))?;
            if let Some(path) = log {
                std::fs::write(path, result.to_log())?;
            }
            println!(
                "final error {:.1} cm / {:.3} rad; drawing written to {}",
                100.0 * result.final_position_error,
                result.final_orientation_error,
                out.display()
            );
        }
        Command::Maps {
            command: MapsCommand::Generate { seed, out, train, test },
        } => {
            let corpus = generate_corpus(seed, train, test, &MapGenConfig::default())?;
            write_corpus(&out, &corpus)?;
            println!("{} maps written to {}", corpus.len(), out.display());
        }
        Command::Selftest => {
            let checks = run_selftest();
            let mut ok = true;
            for c in &checks {
                println!(
                    "{} {:<42} {:>7.2}s  {}",
                    if c.passed { "PASS" } else { "FAIL" },
                    c.name,
                    c.seconds,
                    c.detail
                );
                ok &= c.passed;
            }
            return Ok(ok);
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match execute(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e @ Error::Config(_)) => {
            eprintln!("config error: {e}");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
