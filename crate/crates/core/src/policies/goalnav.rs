use super::plan_path;
use crate::rng::SimRng;
use crate::simulator::Action;
use crate::worldmap::{OccupancyGrid, Pose, Traversability};
use crate::{angle, Error, Result};
use rand::Rng;

#[derive(Clone, Debug, PartialEq)]
pub struct GoalNavConfig {
    /// Proportional heading gain.
    pub k_p: f64,
    /// Waypoint acceptance radius, meters.
    pub waypoint_tolerance: f64,
    /// Goal sampling attempts before giving up for this step.
    pub max_replans: usize,
}

impl Default for GoalNavConfig {
    fn default() -> Self {
        Self {
            k_p: 2.0,
            waypoint_tolerance: 0.2,
            max_replans: 20,
        }
    }
}

/// Pure-pursuit follower of A* paths to random goals, using the true pose.
/// A new goal is drawn whenever the current one is reached.
#[derive(Clone, Debug)]
pub struct GoalNav {
    cfg: GoalNavConfig,
    rng: SimRng,
    path: Vec<(f64, f64)>,
    next: usize,
    goals_reached: usize,
}

impl GoalNav {
    pub fn new(cfg: GoalNavConfig, rng: SimRng) -> Self {
        Self {
            cfg,
            rng,
            path: Vec::new(),
            next: 0,
            goals_reached: 0,
        }
    }

    pub fn goal(&self) -> Option<(f64, f64)> {
        self.path.last().copied()
    }

    pub fn goals_reached(&self) -> usize {
        self.goals_reached
    }

    /// Replaces the plan with a path to `goal_cell`.
    pub fn set_goal(
        &mut self,
        grid: &OccupancyGrid,
        trav: &Traversability,
        pose: &Pose,
        goal_cell: (usize, usize),
    ) -> Result<()> {
        let start = nearest_traversable(grid, trav, pose).ok_or(Error::NoTraversableCell)?;
        let cells = plan_path(trav, grid.width(), grid.height(), start, goal_cell)?;
        self.path = cells.iter().map(|&(c, r)| grid.cell_center(c, r)).collect();
        self.next = 0;
        Ok(())
    }

    fn replan(&mut self, grid: &OccupancyGrid, trav: &Traversability, pose: &Pose) {
        self.path.clear();
        self.next = 0;
        let cells = trav.cells();
        if cells.is_empty() {
            return;
        }
        for _ in 0..self.cfg.max_replans {
            let goal = cells[self.rng.random_range(0..cells.len())];
            if self.set_goal(grid, trav, pose, goal).is_ok() && self.path.len() > 1 {
                return;
            }
        }
        self.path.clear();
    }

    pub fn act(&mut self, grid: &OccupancyGrid, trav: &Traversability, pose: &Pose, v_max: f64, w_max: f64) -> Action {
        if self.next >= self.path.len() {
            if !self.path.is_empty() {
                self.goals_reached += 1;
            }
            self.replan(grid, trav, pose);
            if self.path.is_empty() {
                return Action::default();
            }
        }
        let dist = |p: (f64, f64)| (p.0 - pose.x).hypot(p.1 - pose.y);
        // jump to the closest upcoming waypoint, then skip those already close
        let horizon = (self.next + 10).min(self.path.len());
        if let Some(best) = (self.next..horizon).min_by(|&a, &b| dist(self.path[a]).total_cmp(&dist(self.path[b]))) {
            self.next = best;
        }
        while self.next < self.path.len() && dist(self.path[self.next]) < self.cfg.waypoint_tolerance {
            self.next += 1;
        }
        let target = match self.path.get(self.next) {
            Some(&p) => p,
            None => {
                // goal reached: pick a fresh one next step
                self.goals_reached += 1;
                self.replan(grid, trav, pose);
                match self.path.get(1) {
                    Some(&p) => p,
                    None => return Action::default(),
                }
            }
        };
        steer(pose, target, self.cfg.k_p, v_max, w_max)
    }
}

/// Proportional steering toward `target` with a cosine speed gate.
pub fn steer(pose: &Pose, target: (f64, f64), k_p: f64, v_max: f64, w_max: f64) -> Action {
    let bearing = (target.1 - pose.y).atan2(target.0 - pose.x);
    let err = angle::diff(bearing, pose.phi);
    Action::new(v_max * err.cos().max(0.0), (k_p * err).clamp(-w_max, w_max))
}

fn nearest_traversable(grid: &OccupancyGrid, trav: &Traversability, pose: &Pose) -> Option<(usize, usize)> {
    let (c, r) = grid.world_to_cell(pose.x, pose.y);
    if trav.is_traversable_signed(c, r) {
        return Some((c as usize, r as usize));
    }
    trav.cells().iter().copied().min_by(|a, b| {
        let da = (a.0 as i64 - c).pow(2) + (a.1 as i64 - r).pow(2);
        let db = (b.0 as i64 - c).pow(2) + (b.1 as i64 - r).pow(2);
        da.cmp(&db).then(a.cmp(b))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simulator::{step, SimConfig, SimState};
    use crate::worldmap::CellCode;
    use std::f64::consts::{FRAC_PI_2, PI};

    #[test]
    fn waypoint_dead_ahead() {
        let a = steer(&Pose::new(0.0, 0.0, 0.0), (1.0, 0.0), 2.0, 0.5, FRAC_PI_2);
        assert_eq!(a.v, 0.5);
        assert!(a.w.abs() < 1e-12);
    }

    #[test]
    fn waypoint_behind_turns_in_place() {
        let a = steer(&Pose::new(0.0, 0.0, 0.0), (-1.0, 1e-9), 2.0, 0.5, FRAC_PI_2);
        assert!(a.v < 1e-9);
        assert_eq!(a.w.abs(), FRAC_PI_2);
    }

    #[test]
    fn approaches_goal_once_aligned() {
        let mut g = OccupancyGrid::filled(80, 80, 0.1, CellCode::Free);
        for i in 0..80 {
            g.set(i, 0, CellCode::Occupied);
            g.set(i, 79, CellCode::Occupied);
            g.set(0, i, CellCode::Occupied);
            g.set(79, i, CellCode::Occupied);
        }
        let cfg = SimConfig::default().noise_free();
        let trav = Traversability::new(&g, cfg.robot_radius);
        let mut nav = GoalNav::new(GoalNavConfig::default(), crate::rng::seeded(3));
        let mut sim = SimState::new(Pose::new(1.0, 1.0, PI), crate::rng::seeded(4));
        nav.set_goal(&g, &trav, &sim.true_pose, (65, 60)).unwrap();
        let goal = nav.goal().unwrap();
        let mut aligned = false;
        let mut prev = f64::INFINITY;
        for _ in 0..60 {
            let pose = sim.true_pose;
            let d = (goal.0 - pose.x).hypot(goal.1 - pose.y);
            let bearing = (goal.1 - pose.y).atan2(goal.0 - pose.x);
            aligned |= angle::diff(bearing, pose.phi).abs() < PI / 4.0;
            if aligned {
                assert!(d <= prev + 1e-9, "distance rose from {prev} to {d}");
                prev = d;
            }
            if d < 0.3 {
                break;
            }
            let a = nav.act(&g, &trav, &pose, cfg.v_max, cfg.w_max);
            step(&mut sim, &g, a, &cfg).unwrap();
        }
        assert!(aligned);
        assert!(prev < 0.5, "did not reach the goal: {prev}");
    }
}
