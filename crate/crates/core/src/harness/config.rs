//! Strict `key = value` experiment configuration. Unknown keys, repeated
//! keys and malformed values are errors.

use super::episode::{EpisodeConfig, PolicyKind};
use super::mapgen::{MapGenConfig, Split};
use super::task::{TaskKind, TaskSpec};
use crate::belief::ModeBins;
use crate::pfilter::{FilterConfig, ResampleScheme};
use crate::policies::{Architecture, GoalNavConfig, TrainerConfig};
use crate::simulator::SimConfig;
use crate::{Error, Result};
use std::collections::HashSet;
use std::fmt::Write;
use std::path::{Path, PathBuf};

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub output_dir: PathBuf,
    /// Existing corpus; when unset the corpus is generated from `map_seed`.
    pub map_dir: Option<PathBuf>,
    pub map_seed: u64,
    pub n_train_maps: usize,
    pub n_test_maps: usize,
    pub mapgen: MapGenConfig,

    pub policies: Vec<PolicyKind>,
    pub tasks: Vec<TaskKind>,
    pub splits: Vec<Split>,
    pub episodes: usize,
    pub horizon: usize,
    pub policy_file: Option<PathBuf>,

    pub particles: [usize; 3],
    pub init_pos_std: f64,
    pub init_phi_std: f64,
    pub semiglobal_box: f64,

    pub filter: FilterConfig,
    pub sim: SimConfig,
    pub goalnav: GoalNavConfig,
    pub avoid_threshold: f64,
    pub lambda_collision: f64,
    pub mode_bins: ModeBins,
    pub arch: Architecture,

    pub train_task: TaskKind,
    pub trainer: TrainerConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let task = TaskSpec::new(TaskKind::Tracking);
        let ep = EpisodeConfig::new(task.clone());
        Self {
            seed: 1,
            output_dir: PathBuf::from("results"),
            map_dir: None,
            map_seed: 7,
            n_train_maps: 10,
            n_test_maps: 7,
            mapgen: MapGenConfig::default(),
            policies: vec![PolicyKind::Turn, PolicyKind::Avoid, PolicyKind::Goalnav],
            tasks: vec![TaskKind::Tracking],
            splits: vec![Split::Train, Split::Test],
            episodes: 50,
            horizon: task.horizon,
            policy_file: None,
            particles: TaskKind::ALL.map(|k| k.default_particles()),
            init_pos_std: task.init_pos_std,
            init_phi_std: task.init_phi_std,
            semiglobal_box: task.box_side,
            filter: ep.filter,
            sim: ep.sim,
            goalnav: ep.goalnav,
            avoid_threshold: ep.avoid_threshold,
            lambda_collision: ep.lambda_collision,
            mode_bins: ep.mode_bins,
            arch: Architecture::default(),
            train_task: TaskKind::SemiGlobal,
            trainer: TrainerConfig::default(),
        }
    }
}

fn list<T: std::str::FromStr<Err = Error>>(v: &str) -> Result<Vec<T>> {
    let items: Vec<T> = v
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(str::parse)
        .collect::<Result<_>>()?;
    if items.is_empty() {
        return Err(Error::Config("empty list".into()));
    }
    Ok(items)
}

fn num<T: std::str::FromStr>(v: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    v.parse::<T>().map_err(|e| Error::Config(format!("`{v}`: {e}")))
}

fn boolean(v: &str) -> Result<bool> {
    match v {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(Error::Config(format!("`{v}` is not a boolean"))),
    }
}

/// Shortest rounded degree value that parses back to exactly `rad`.
fn degrees_text(rad: f64) -> String {
    let deg = rad.to_degrees();
    (0..=12)
        .map(|digits| format!("{deg:.digits$}"))
        .find(|s| s.parse::<f64>().is_ok_and(|d| d.to_radians() == rad))
        .map(|s| {
            if s.contains('.') {
                s.trim_end_matches('0').trim_end_matches('.').to_owned()
            } else {
                s
            }
        })
        .unwrap_or_else(|| deg.to_string())
}

fn join<T: std::fmt::Display>(items: &[T]) -> String {
    items.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(",")
}

impl ExperimentConfig {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text =
            std::fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        let mut seen = HashSet::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let at = |e: Error| match e {
                Error::Config(m) => Error::Config(format!("line {}: {m}", i + 1)),
                other => Error::Config(format!("line {}: {other}", i + 1)),
            };
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected `key = value`", i + 1)))?;
            let (k, v) = (k.trim(), v.trim());
            if !seen.insert(k.to_string()) {
                return Err(Error::Config(format!("line {}: duplicate key `{k}`", i + 1)));
            }
            cfg.set(k, v).map_err(at)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn set(&mut self, k: &str, v: &str) -> Result<()> {
        let deg = |v: &str| num::<f64>(v).map(f64::to_radians);
        match k {
            "seed" => self.seed = num(v)?,
            "output_dir" => self.output_dir = PathBuf::from(v),
            "map_dir" => self.map_dir = Some(PathBuf::from(v)),
            "map_seed" => self.map_seed = num(v)?,
            "n_train_maps" => self.n_train_maps = num(v)?,
            "n_test_maps" => self.n_test_maps = num(v)?,
            "map_min_side" => self.mapgen.min_side = num(v)?,
            "map_max_side" => self.mapgen.max_side = num(v)?,
            "map_resolution" => self.mapgen.resolution = num(v)?,
            "map_min_room" => self.mapgen.min_room = num(v)?,
            "map_door_width" => self.mapgen.door_width = num(v)?,
            "map_max_furniture" => self.mapgen.max_furniture_per_room = num(v)?,
            "policies" => self.policies = list(v)?,
            "tasks" => self.tasks = list(v)?,
            "splits" => self.splits = list(v)?,
            "episodes" => self.episodes = num(v)?,
            "horizon" => self.horizon = num(v)?,
            "policy_file" => self.policy_file = Some(PathBuf::from(v)),
            "particles_tracking" => self.particles[0] = num(v)?,
            "particles_semiglobal" => self.particles[1] = num(v)?,
            "particles_global" => self.particles[2] = num(v)?,
            "init_pos_std" => self.init_pos_std = num(v)?,
            "init_phi_std_deg" => self.init_phi_std = deg(v)?,
            "semiglobal_box" => self.semiglobal_box = num(v)?,
            "alpha" => self.filter.alpha = num(v)?,
            "beta" => self.filter.beta = num(v)?,
            "sigma_lhood" => self.filter.sigma_lhood = num(v)?,
            "lhood_floor" => self.filter.eps_floor = num(v)?,
            "trans_noise_xy" => self.filter.trans_noise.0 = num(v)?,
            "trans_noise_phi_deg" => self.filter.trans_noise.1 = deg(v)?,
            "local_map_size" => self.filter.local_map_size = num(v)?,
            "resample" => self.filter.resample = boolean(v)?,
            "resample_scheme" => {
                self.filter.scheme = match v {
                    "systematic" => ResampleScheme::Systematic,
                    "multinomial" => ResampleScheme::Multinomial,
                    _ => return Err(Error::Config(format!("unknown resample scheme `{v}`"))),
                }
            }
            "v_max" => {
                self.sim.v_max = num(v)?;
                self.arch.v_max = self.sim.v_max;
            }
            "w_max_deg" => {
                self.sim.w_max = deg(v)?;
                self.arch.w_max = self.sim.w_max;
            }
            "control_hz" => self.sim.dt = 1.0 / num::<f64>(v)?,
            "robot_radius" => {
                self.sim.robot_radius = num(v)?;
                self.mapgen.robot_radius = self.sim.robot_radius;
            }
            "n_beams" => self.sim.n_beams = num(v)?,
            "fov_deg" => self.sim.fov = deg(v)?,
            "max_range" => self.sim.max_range = num(v)?,
            "odom_noise_xy" => self.sim.odom_noise_xy = num(v)?,
            "odom_noise_phi_deg" => self.sim.odom_noise_phi = deg(v)?,
            "lambda_collision" => self.lambda_collision = num(v)?,
            "avoid_threshold" => self.avoid_threshold = num(v)?,
            "goalnav_kp" => self.goalnav.k_p = num(v)?,
            "waypoint_tolerance" => self.goalnav.waypoint_tolerance = num(v)?,
            "local_size" => self.arch.local_size = num(v)?,
            "pool" => self.arch.pool = num(v)?,
            "sectors" => self.arch.sectors = num(v)?,
            "hidden" => self.arch.hidden = v.split(',').map(|s| num(s.trim())).collect::<Result<_>>()?,
            "mode_bin_xy" => self.mode_bins.xy = num(v)?,
            "mode_bin_phi_deg" => self.mode_bins.phi = deg(v)?,
            "train_task" => self.train_task = v.parse()?,
            "population" => self.trainer.population = num(v)?,
            "elite_frac" => self.trainer.elite_frac = num(v)?,
            "generations" => self.trainer.generations = num(v)?,
            "episodes_per_eval" => self.trainer.episodes_per_eval = num(v)?,
            "init_std" => self.trainer.init_std = num(v)?,
            "min_std" => self.trainer.min_std = num(v)?,
            "train_seed" => self.trainer.seed = num(v)?,
            _ => return Err(Error::Config(format!("unknown key `{k}`"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let cfg_err = |e: Error| Error::Config(e.to_string());
        self.filter.validate().map_err(cfg_err)?;
        self.trainer.validate().map_err(cfg_err)?;
        if self.episodes == 0 || self.horizon == 0 {
            return Err(Error::Config("episodes and horizon must be positive".into()));
        }
        if self.particles.contains(&0) {
            return Err(Error::Config("particle counts must be positive".into()));
        }
        if self.sim.n_beams < 2 || !(self.sim.dt > 0.0) || !(self.sim.max_range > 0.0) {
            return Err(Error::Config(
                "need n_beams ≥ 2, control_hz > 0 and max_range > 0".into(),
            ));
        }
        if self.arch.pool == 0 || self.arch.sectors == 0 || self.arch.local_size < self.arch.pool {
            return Err(Error::Config(
                "pool and sectors must be positive and pool ≤ local_size".into(),
            ));
        }
        if self.map_dir.is_none() && self.n_train_maps + self.n_test_maps == 0 {
            return Err(Error::Config("no maps: set map_dir or a positive map count".into()));
        }
        Ok(())
    }

    pub fn task_spec(&self, kind: TaskKind) -> TaskSpec {
        let idx = TaskKind::ALL.iter().position(|&k| k == kind).expect("known task");
        TaskSpec {
            kind,
            n_particles: self.particles[idx],
            horizon: self.horizon,
            init_pos_std: self.init_pos_std,
            init_phi_std: self.init_phi_std,
            box_side: self.semiglobal_box,
        }
    }

    pub fn episode_config(&self, kind: TaskKind) -> EpisodeConfig {
        EpisodeConfig {
            sim: self.sim.clone(),
            filter: self.filter.clone(),
            task: self.task_spec(kind),
            goalnav: self.goalnav.clone(),
            avoid_threshold: self.avoid_threshold,
            lambda_collision: self.lambda_collision,
            mode_bins: self.mode_bins,
        }
    }

    /// Canonical text form; parsing it yields an equal config.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let mut kv = |k: &str, v: String| writeln!(s, "{k} = {v}").unwrap();
        kv("seed", self.seed.to_string());
        kv("output_dir", self.output_dir.display().to_string());
        if let Some(d) = &self.map_dir {
            kv("map_dir", d.display().to_string());
        }
        kv("map_seed", self.map_seed.to_string());
        kv("n_train_maps", self.n_train_maps.to_string());
        kv("n_test_maps", self.n_test_maps.to_string());
        kv("map_min_side", self.mapgen.min_side.to_string());
        kv("map_max_side", self.mapgen.max_side.to_string());
        kv("map_resolution", self.mapgen.resolution.to_string());
        kv("map_min_room", self.mapgen.min_room.to_string());
        kv("map_door_width", self.mapgen.door_width.to_string());
        kv("map_max_furniture", self.mapgen.max_furniture_per_room.to_string());
        kv("policies", join(&self.policies));
        kv("tasks", join(&self.tasks));
        kv("splits", join(&self.splits));
        kv("episodes", self.episodes.to_string());
        kv("horizon", self.horizon.to_string());
        if let Some(p) = &self.policy_file {
            kv("policy_file", p.display().to_string());
        }
        kv("particles_tracking", self.particles[0].to_string());
        kv("particles_semiglobal", self.particles[1].to_string());
        kv("particles_global", self.particles[2].to_string());
        kv("init_pos_std", self.init_pos_std.to_string());
        kv("init_phi_std_deg", degrees_text(self.init_phi_std));
        kv("semiglobal_box", self.semiglobal_box.to_string());
        kv("alpha", self.filter.alpha.to_string());
        kv("beta", self.filter.beta.to_string());
        kv("sigma_lhood", self.filter.sigma_lhood.to_string());
        kv("lhood_floor", self.filter.eps_floor.to_string());
        kv("trans_noise_xy", self.filter.trans_noise.0.to_string());
        kv("trans_noise_phi_deg", degrees_text(self.filter.trans_noise.1));
        kv("local_map_size", self.filter.local_map_size.to_string());
        kv("resample", self.filter.resample.to_string());
        kv(
            "resample_scheme",
            match self.filter.scheme {
                ResampleScheme::Systematic => "systematic",
                ResampleScheme::Multinomial => "multinomial",
            }
            .into(),
        );
        kv("v_max", self.sim.v_max.to_string());
        kv("w_max_deg", degrees_text(self.sim.w_max));
        kv("control_hz", (1.0 / self.sim.dt).to_string());
        kv("robot_radius", self.sim.robot_radius.to_string());
        kv("n_beams", self.sim.n_beams.to_string());
        kv("fov_deg", degrees_text(self.sim.fov));
        kv("max_range", self.sim.max_range.to_string());
        kv("odom_noise_xy", self.sim.odom_noise_xy.to_string());
        kv("odom_noise_phi_deg", degrees_text(self.sim.odom_noise_phi));
        kv("lambda_collision", self.lambda_collision.to_string());
        kv("avoid_threshold", self.avoid_threshold.to_string());
        kv("goalnav_kp", self.goalnav.k_p.to_string());
        kv("waypoint_tolerance", self.goalnav.waypoint_tolerance.to_string());
        kv("local_size", self.arch.local_size.to_string());
        kv("pool", self.arch.pool.to_string());
        kv("sectors", self.arch.sectors.to_string());
        kv("hidden", join(&self.arch.hidden));
        kv("mode_bin_xy", self.mode_bins.xy.to_string());
        kv("mode_bin_phi_deg", degrees_text(self.mode_bins.phi));
        kv("train_task", self.train_task.to_string());
        kv("population", self.trainer.population.to_string());
        kv("elite_frac", self.trainer.elite_frac.to_string());
        kv("generations", self.trainer.generations.to_string());
        kv("episodes_per_eval", self.trainer.episodes_per_eval.to_string());
        kv("init_std", self.trainer.init_std.to_string());
        kv("min_std", self.trainer.min_std.to_string());
        kv("train_seed", self.trainer.seed.to_string());
        s
    }
}
