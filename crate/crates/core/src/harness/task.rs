use crate::pfilter::ParticleSet;
use crate::worldmap::{OccupancyGrid, Pose, Traversability};
use crate::{Error, Result};
use rand::Rng;
use rand_distr::{Distribution, Normal};
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

/// Localization task, distinguished by the initial belief.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TaskKind {
    /// Tight Gaussian around the true pose.
    Tracking,
    /// Uniform in a box around a noisy guess.
    SemiGlobal,
    /// Uniform over all traversable space.
    Global,
}

impl TaskKind {
    pub const ALL: [TaskKind; 3] = [TaskKind::Tracking, TaskKind::SemiGlobal, TaskKind::Global];

    pub fn name(self) -> &'static str {
        match self {
            TaskKind::Tracking => "tracking",
            TaskKind::SemiGlobal => "semiglobal",
            TaskKind::Global => "global",
        }
    }

    pub fn default_particles(self) -> usize {
        match self {
            TaskKind::Tracking => 300,
            TaskKind::SemiGlobal => 500,
            TaskKind::Global => 3000,
        }
    }
}

impl fmt::Display for TaskKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.name())
    }
}

impl FromStr for TaskKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tracking" => Ok(TaskKind::Tracking),
            "semiglobal" | "semi-global" => Ok(TaskKind::SemiGlobal),
            "global" => Ok(TaskKind::Global),
            _ => Err(Error::Config(format!("unknown task `{s}`"))),
        }
    }
}

/// Horizon used for active (policy) episodes.
pub const ACTIVE_HORIZON: usize = 50;
/// Horizon used for passive filter evaluation.
pub const PASSIVE_HORIZON: usize = 25;

#[derive(Clone, Debug, PartialEq)]
pub struct TaskSpec {
    pub kind: TaskKind,
    pub n_particles: usize,
    pub horizon: usize,
    /// Position std of the tracking prior and of the semi-global guess.
    pub init_pos_std: f64,
    pub init_phi_std: f64,
    /// Side of the semi-global sampling box, meters.
    pub box_side: f64,
}

impl TaskSpec {
    pub fn new(kind: TaskKind) -> Self {
        Self {
            kind,
            n_particles: kind.default_particles(),
            horizon: ACTIVE_HORIZON,
            init_pos_std: 0.3,
            init_phi_std: PI / 6.0,
            box_side: 3.3,
        }
    }

    pub fn with_horizon(mut self, horizon: usize) -> Self {
        self.horizon = horizon;
        self
    }
}

fn gaussian_pose<R: Rng + ?Sized>(center: &Pose, pos_std: f64, phi_std: f64, rng: &mut R) -> Pose {
    let z = Normal::new(0.0, 1.0).expect("unit normal");
    let dx = pos_std * z.sample(rng);
    let dy = pos_std * z.sample(rng);
    let dphi = phi_std * z.sample(rng);
    Pose::new(center.x + dx, center.y + dy, center.phi + dphi)
}

/// Initial particle set for `task`, uniformly weighted.
pub fn init_belief<R: Rng + ?Sized>(
    task: &TaskSpec,
    grid: &OccupancyGrid,
    trav: &Traversability,
    true_pose: &Pose,
    rng: &mut R,
) -> Result<ParticleSet> {
    if task.n_particles == 0 {
        return Err(Error::InvalidArgument("task needs at least one particle".into()));
    }
    let k = task.n_particles;
    let poses: Vec<Pose> = match task.kind {
        TaskKind::Tracking => {
            let center = gaussian_pose(true_pose, task.init_pos_std, task.init_phi_std, rng);
            (0..k)
                .map(|_| gaussian_pose(&center, task.init_pos_std, task.init_phi_std, rng))
                .collect()
        }
        TaskKind::SemiGlobal => {
            let guess = gaussian_pose(true_pose, task.init_pos_std, task.init_phi_std, rng);
            let half = task.box_side / 2.0;
            let any_traversable = trav.cells().iter().any(|&(c, r)| {
                let (x, y) = grid.cell_center(c, r);
                (x - guess.x).abs() <= half && (y - guess.y).abs() <= half
            });
            if !any_traversable {
                return Err(Error::InvalidArgument(format!(
                    "semi-global box around ({:.2}, {:.2}) holds no traversable cell",
                    guess.x, guess.y
                )));
            }
            (0..k)
                .map(|_| {
                    let x = guess.x + rng.random_range(-half..half);
                    let y = guess.y + rng.random_range(-half..half);
                    Pose::new(x, y, rng.random_range(-PI..PI))
                })
                .collect()
        }
        TaskKind::Global => (0..k).map(|_| trav.sample_pose(grid, rng)).collect::<Result<_>>()?,
    };
    Ok(ParticleSet::uniform(poses))
}
