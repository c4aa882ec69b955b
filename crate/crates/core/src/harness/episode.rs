use super::task::{init_belief, TaskKind, TaskSpec};
use crate::belief::{extract_local_belief, extract_modes, project_particles, ModeBins};
use crate::pfilter::{
    estimate, predict, soft_resample, update_weights_with, write_dump, FilterConfig, LikelihoodField,
};
use crate::policies::{
    act_avoid, act_learned, act_turn, compute_reward, Architecture, GoalNav, GoalNavConfig, PolicyInput, PolicyParams,
    RobotState, AVOID_THRESHOLD, LAMBDA_COLLISION,
};
use crate::rng::{stream, Stream};
use crate::simulator::{sense, step, Action, LidarScan, SimConfig, SimState};
use crate::worldmap::{distance_transform, DistanceField, OccupancyGrid, Pose, Traversability};
use crate::{angle, Error, Result};
use std::fmt::{self, Write as _};
use std::path::Path;
use std::str::FromStr;
use std::sync::Arc;

/// A map with its derived lookup structures, built once and shared by all
/// episodes on it.
#[derive(Clone, Debug)]
pub struct PreparedMap {
    pub id: String,
    pub grid: OccupancyGrid,
    pub dfield: DistanceField,
    pub trav: Traversability,
}

impl PreparedMap {
    pub fn new(id: impl Into<String>, grid: OccupancyGrid, robot_radius: f64) -> Result<Self> {
        let dfield = distance_transform(&grid)?;
        let trav = Traversability::new(&grid, robot_radius);
        if trav.cells().is_empty() {
            return Err(Error::NoTraversableCell);
        }
        Ok(Self {
            id: id.into(),
            grid,
            dfield,
            trav,
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LearnedPolicy {
    pub arch: Architecture,
    pub params: PolicyParams,
}

/// Motion policy driving an episode.
#[derive(Clone, Debug, PartialEq)]
pub enum Policy {
    /// Stands still.
    Idle,
    Turn,
    Avoid,
    Goalnav,
    Learned(Arc<LearnedPolicy>),
}

impl Policy {
    pub fn name(&self) -> &'static str {
        match self {
            Policy::Idle => "idle",
            Policy::Turn => "turn",
            Policy::Avoid => "avoid",
            Policy::Goalnav => "goalnav",
            Policy::Learned(_) => "learned",
        }
    }
}

/// Policy names without their parameters, as they appear in configs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PolicyKind {
    Idle,
    Turn,
    Avoid,
    Goalnav,
    Learned,
}

impl PolicyKind {
    pub fn name(self) -> &'static str {
        match self {
            PolicyKind::Idle => "idle",
            PolicyKind::Turn => "turn",
            PolicyKind::Avoid => "avoid",
            PolicyKind::Goalnav => "goalnav",
            PolicyKind::Learned => "learned",
        }
    }
}

impl fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.name())
    }
}

impl FromStr for PolicyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "idle" => Ok(PolicyKind::Idle),
            "turn" => Ok(PolicyKind::Turn),
            "avoid" => Ok(PolicyKind::Avoid),
            "goalnav" => Ok(PolicyKind::Goalnav),
            "learned" => Ok(PolicyKind::Learned),
            _ => Err(Error::Config(format!("unknown policy `{s}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EpisodeConfig {
    pub sim: SimConfig,
    pub filter: FilterConfig,
    pub task: TaskSpec,
    pub goalnav: GoalNavConfig,
    pub avoid_threshold: f64,
    pub lambda_collision: f64,
    pub mode_bins: ModeBins,
}

impl EpisodeConfig {
    pub fn new(task: TaskSpec) -> Self {
        Self {
            sim: SimConfig::default(),
            filter: FilterConfig::default(),
            task,
            goalnav: GoalNavConfig::default(),
            avoid_threshold: AVOID_THRESHOLD,
            lambda_collision: LAMBDA_COLLISION,
            mode_bins: ModeBins::default(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepRecord {
    pub true_pose: Pose,
    pub est_pose: Pose,
    pub action: Action,
    pub loss: f64,
    pub reward: f64,
    pub collided: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EpisodeResult {
    pub policy: String,
    pub task: TaskKind,
    pub map_id: String,
    pub seed: u64,
    pub start: Pose,
    pub steps: Vec<StepRecord>,
    /// Meters.
    pub final_position_error: f64,
    /// Absolute wrapped heading error, radians.
    pub final_orientation_error: f64,
}

const LOG_HEADER: &str = "t,true_x,true_y,true_phi,est_x,est_y,est_phi,v,w,loss,reward,collided";

impl EpisodeResult {
    pub fn total_return(&self) -> f64 {
        self.steps.iter().map(|s| s.reward).sum()
    }

    pub fn mean_reward(&self) -> f64 {
        if self.steps.is_empty() {
            0.0
        } else {
            self.total_return() / self.steps.len() as f64
        }
    }

    pub fn collisions(&self) -> usize {
        self.steps.iter().filter(|s| s.collided).count()
    }

    /// Per-step log with shortest round-trip float formatting.
    pub fn to_log(&self) -> String {
        let mut out = String::new();
        let s = self.start;
        writeln!(
            out,
            "# policy={} task={} map={} seed={} start={},{},{}",
            self.policy, self.task, self.map_id, self.seed, s.x, s.y, s.phi
        )
        .unwrap();
        out.push_str(LOG_HEADER);
        out.push('\n');
        for (t, r) in self.steps.iter().enumerate() {
            writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{},{}",
                t + 1,
                r.true_pose.x,
                r.true_pose.y,
                r.true_pose.phi,
                r.est_pose.x,
                r.est_pose.y,
                r.est_pose.phi,
                r.action.v,
                r.action.w,
                r.loss,
                r.reward,
                u8::from(r.collided)
            )
            .unwrap();
        }
        out
    }

    /// Rebuilds a result from [`to_log`](Self::to_log) output; final errors
    /// are recomputed from the last step.
    pub fn from_log(src: &str) -> Result<Self> {
        let bad = |m: String| Error::InvalidArgument(format!("episode log: {m}"));
        let mut lines = src.lines();
        let head = lines
            .next()
            .and_then(|l| l.strip_prefix("# "))
            .ok_or_else(|| bad("missing header".into()))?;
        let (mut policy, mut task, mut map_id, mut seed, mut start) = (None, None, None, None, None);
        for kv in head.split_whitespace() {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| bad(format!("bad header entry `{kv}`")))?;
            match k {
                "policy" => policy = Some(v.to_string()),
                "task" => task = Some(v.parse::<TaskKind>()?),
                "map" => map_id = Some(v.to_string()),
                "seed" => seed = Some(v.parse::<u64>().map_err(|e| bad(e.to_string()))?),
                "start" => {
                    let f = parse_floats(v, 3).map_err(bad)?;
                    start = Some(Pose::new(f[0], f[1], f[2]));
                }
                _ => return Err(bad(format!("unknown header key `{k}`"))),
            }
        }
        if lines.next() != Some(LOG_HEADER) {
            return Err(bad("missing column header".into()));
        }
        let mut steps = Vec::new();
        for line in lines {
            let f = parse_floats(line, 12).map_err(bad)?;
            steps.push(StepRecord {
                true_pose: Pose {
                    x: f[1],
                    y: f[2],
                    phi: f[3],
                },
                est_pose: Pose {
                    x: f[4],
                    y: f[5],
                    phi: f[6],
                },
                action: Action { v: f[7], w: f[8] },
                loss: f[9],
                reward: f[10],
                collided: f[11] != 0.0,
            });
        }
        let (pe, oe) = steps.last().map(final_errors).unwrap_or((0.0, 0.0));
        Ok(Self {
            policy: policy.ok_or_else(|| bad("missing policy".into()))?,
            task: task.ok_or_else(|| bad("missing task".into()))?,
            map_id: map_id.ok_or_else(|| bad("missing map".into()))?,
            seed: seed.ok_or_else(|| bad("missing seed".into()))?,
            start: start.ok_or_else(|| bad("missing start".into()))?,
            steps,
            final_position_error: pe,
            final_orientation_error: oe,
        })
    }
}

fn parse_floats(s: &str, n: usize) -> std::result::Result<Vec<f64>, String> {
    let f = s
        .split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|e| format!("`{t}`: {e}")))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    if f.len() != n {
        return Err(format!("expected {n} fields, got {}", f.len()));
    }
    Ok(f)
}

fn final_errors(r: &StepRecord) -> (f64, f64) {
    (
        r.est_pose.distance(&r.true_pose),
        angle::diff(r.est_pose.phi, r.true_pose.phi).abs(),
    )
}

fn at_step(step: usize) -> impl Fn(Error) -> Error {
    move |e| Error::Episode {
        step,
        source: Box::new(e),
    }
}

/// Runs one episode: the policy acts, the simulator steps, the filter
/// predicts, weighs and soft-resamples, and the estimate is scored. Fully
/// determined by `(map, cfg, policy, seed)`.
pub fn run_episode(map: &PreparedMap, cfg: &EpisodeConfig, policy: &Policy, seed: u64) -> Result<EpisodeResult> {
    run_episode_inner(map, cfg, policy, seed, None)
}

/// [`run_episode`] that also writes, per step, the particle set
/// (`step_%04d.particles`) and the global belief map
/// (`step_%04d_ch%d.pgm`) into `dump_dir`.
pub fn run_episode_dumping(
    map: &PreparedMap,
    cfg: &EpisodeConfig,
    policy: &Policy,
    seed: u64,
    dump_dir: &Path,
) -> Result<EpisodeResult> {
    std::fs::create_dir_all(dump_dir)?;
    run_episode_inner(map, cfg, policy, seed, Some(dump_dir))
}

fn run_episode_inner(
    map: &PreparedMap,
    cfg: &EpisodeConfig,
    policy: &Policy,
    seed: u64,
    dump_dir: Option<&Path>,
) -> Result<EpisodeResult> {
    cfg.filter.validate()?;
    let grid = &map.grid;
    let sc = &cfg.sim;
    let start = map.trav.sample_pose(grid, &mut stream(seed, Stream::StartPose))?;
    let mut sim = SimState::new(start, stream(seed, Stream::Sensor));
    let mut ps = init_belief(
        &cfg.task,
        grid,
        &map.trav,
        &start,
        &mut stream(seed, Stream::InitBelief),
    )?;
    let mut filter_rng = stream(seed, Stream::Filter);
    let mut nav = GoalNav::new(cfg.goalnav.clone(), stream(seed, Stream::Policy));
    let model = LikelihoodField::from_config(grid, &map.dfield, &cfg.filter)?;

    let mut scan: LidarScan = sense(&start, grid, sc.n_beams, sc.fov, sc.max_range)?;
    let mut prev_action = Action::default();
    let mut collided = false;
    let horizon = cfg.task.horizon;
    let mut steps = Vec::with_capacity(horizon);

    if let Some(dir) = dump_dir {
        dump(dir, 0, &ps, grid, cfg.filter.alpha)?;
    }

    for t in 0..horizon {
        let action = match policy {
            Policy::Idle => Action::default(),
            Policy::Turn => act_turn(sc.w_max),
            Policy::Avoid => act_avoid(&scan, cfg.avoid_threshold, sc.v_max, sc.w_max),
            Policy::Goalnav => nav.act(grid, &map.trav, &sim.true_pose, sc.v_max, sc.w_max),
            Policy::Learned(lp) => {
                let attend = extract_modes(&ps, 1, cfg.mode_bins).map_err(at_step(t))?[0];
                let bm = project_particles(&ps, grid);
                let local = extract_local_belief(&bm, &attend, lp.arch.local_size);
                let input = PolicyInput {
                    local_belief: &local,
                    scan: &scan,
                    robot_state: RobotState {
                        v_prev: prev_action.v,
                        w_prev: prev_action.w,
                        collided,
                        steps_remaining: (horizon - t) as f64 / horizon as f64,
                    },
                };
                act_learned(&lp.arch, &lp.params, &input).map_err(at_step(t))?
            }
        }
        .clamped(sc.v_max, sc.w_max);

        let obs = step(&mut sim, grid, action, sc).map_err(at_step(t))?;
        predict(&mut ps, &obs.odom, &cfg.filter, &mut filter_rng);
        update_weights_with(&mut ps, &obs.scan, &model).map_err(at_step(t))?;
        if cfg.filter.resample {
            ps = soft_resample(&ps, cfg.filter.alpha, cfg.filter.scheme, &mut filter_rng).map_err(at_step(t))?;
        }
        let est = estimate(&ps, &sim.true_pose, cfg.filter.beta).map_err(at_step(t))?;
        steps.push(StepRecord {
            true_pose: sim.true_pose,
            est_pose: est.pose,
            action,
            loss: est.loss,
            reward: compute_reward(est.loss, obs.collided, cfg.lambda_collision),
            collided: obs.collided,
        });
        if let Some(dir) = dump_dir {
            dump(dir, t + 1, &ps, grid, cfg.filter.alpha)?;
        }
        scan = obs.scan;
        prev_action = action;
        collided = obs.collided;
    }

    let (pe, oe) = steps.last().map(final_errors).unwrap_or((0.0, 0.0));
    Ok(EpisodeResult {
        policy: policy.name().to_string(),
        task: cfg.task.kind,
        map_id: map.id.clone(),
        seed,
        start,
        steps,
        final_position_error: pe,
        final_orientation_error: oe,
    })
}

fn dump(dir: &Path, step: usize, ps: &crate::pfilter::ParticleSet, grid: &OccupancyGrid, alpha: f64) -> Result<()> {
    std::fs::write(
        dir.join(format!("step_{step:04}.particles")),
        write_dump(ps, step, alpha),
    )?;
    project_particles(ps, grid).write_pgm(dir, step)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::worldmap::CellCode;

    fn room_map() -> PreparedMap {
        let mut g = OccupancyGrid::filled(50, 40, 0.1, CellCode::Free);
        for i in 0..50 {
            g.set(i, 0, CellCode::Occupied);
            g.set(i, 39, CellCode::Occupied);
        }
        for i in 0..40 {
            g.set(0, i, CellCode::Occupied);
            g.set(49, i, CellCode::Occupied);
        }
        for r in 10..20 {
            for c in 30..36 {
                g.set(c, r, CellCode::Occupied);
            }
        }
        PreparedMap::new("room", g, 0.18).unwrap()
    }

    #[test]
    fn turn_policy_stays_in_place() {
        let map = room_map();
        let cfg = EpisodeConfig::new(TaskSpec::new(TaskKind::Tracking).with_horizon(10));
        let res = run_episode(&map, &cfg, &Policy::Turn, 7).unwrap();
        assert_eq!(res.steps.len(), 10);
        let last = res.steps.last().unwrap().true_pose;
        assert!(last.distance(&res.start) < 1e-6);
    }

    #[test]
    fn same_seed_same_result() {
        let map = room_map();
        let cfg = EpisodeConfig::new(TaskSpec::new(TaskKind::SemiGlobal).with_horizon(8));
        let a = run_episode(&map, &cfg, &Policy::Goalnav, 11).unwrap();
        let b = run_episode(&map, &cfg, &Policy::Goalnav, 11).unwrap();
        assert_eq!(a.to_log(), b.to_log());
        let c = run_episode(&map, &cfg, &Policy::Goalnav, 12).unwrap();
        assert_ne!(a.to_log(), c.to_log());
    }

    #[test]
    fn log_round_trip() {
        let map = room_map();
        let cfg = EpisodeConfig::new(TaskSpec::new(TaskKind::Tracking).with_horizon(5));
        let a = run_episode(&map, &cfg, &Policy::Avoid, 3).unwrap();
        let b = EpisodeResult::from_log(&a.to_log()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn learned_policy_runs() {
        let map = room_map();
        let arch = Architecture::default();
        let lp = LearnedPolicy {
            params: PolicyParams::zeros(&arch),
            arch,
        };
        let cfg = EpisodeConfig::new(TaskSpec::new(TaskKind::Tracking).with_horizon(3));
        let res = run_episode(&map, &cfg, &Policy::Learned(Arc::new(lp)), 1).unwrap();
        assert!(res.steps.iter().all(|s| s.action == Action::new(0.0, 0.0)));
    }

    #[test]
    fn dumps_particles_and_belief_images() {
        let map = room_map();
        let dir = tempfile::tempdir().unwrap();
        let cfg = EpisodeConfig::new(TaskSpec::new(TaskKind::Tracking).with_horizon(2));
        run_episode_dumping(&map, &cfg, &Policy::Turn, 1, dir.path()).unwrap();
        for step in 0..=2 {
            let dump = std::fs::read_to_string(dir.path().join(format!("step_{step:04}.particles"))).unwrap();
            let (s, _, ps) = crate::pfilter::parse_dump(&dump).unwrap();
            assert_eq!((s, ps.len()), (step, 300));
            for ch in 0..4 {
                assert!(dir.path().join(format!("step_{step:04}_ch{ch}.pgm")).exists());
            }
        }
    }
}
