//! Motion policies: the Turn, Avoid and Goalnav baselines, the learned
//! active policy, its reward, and the cross-entropy-method trainer.

mod baselines;
mod cem;
mod goalnav;
mod learned;
mod planner;

pub use baselines::{act_avoid, act_turn, quarter_minima, AVOID_THRESHOLD};
pub use cem::{cem_optimize, CemResult, CurveRow, TrainerConfig};
pub use goalnav::{GoalNav, GoalNavConfig};
pub use learned::{
    act_learned, features, load_policy, read_policy, save_policy, write_policy, Architecture, PolicyInput,
    PolicyParams, RobotState,
};
pub use planner::{path_cost, plan_path};

/// Step reward: negative localization loss minus a collision penalty.
pub fn compute_reward(loss: f64, collided: bool, lambda_collision: f64) -> f64 {
    -loss - if collided { lambda_collision } else { 0.0 }
}

/// Collision penalty weight.
pub const LAMBDA_COLLISION: f64 = 0.1;
