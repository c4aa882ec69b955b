//! Differential-drive robot, ray-cast LiDAR and noisy odometry.

use crate::worldmap::raycast::raycast_unchecked;
use crate::worldmap::{CellCode, OccupancyGrid, Pose};
use crate::{rng::SimRng, Error, Result};
use rand_distr::{Distribution, Normal};
use std::f64::consts::FRAC_PI_2;

/// Simulator constants. Defaults are LoCoBot-scale.
#[derive(Clone, Debug, PartialEq)]
pub struct SimConfig {
    pub v_max: f64,
    pub w_max: f64,
    pub dt: f64,
    pub robot_radius: f64,
    pub n_beams: usize,
    pub fov: f64,
    pub max_range: f64,
    /// Odometry noise std (meters) on each of dx, dy.
    pub odom_noise_xy: f64,
    /// Odometry noise std (radians) on dphi.
    pub odom_noise_phi: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            v_max: 0.5,
            w_max: FRAC_PI_2,
            dt: 1.0 / 1.7,
            robot_radius: crate::worldmap::DEFAULT_ROBOT_RADIUS,
            n_beams: 60,
            fov: 240f64.to_radians(),
            max_range: 10.0,
            odom_noise_xy: 0.01,
            odom_noise_phi: 5f64.to_radians(),
        }
    }
}

impl SimConfig {
    pub fn noise_free(mut self) -> Self {
        self.odom_noise_xy = 0.0;
        self.odom_noise_phi = 0.0;
        self
    }
}

/// Velocity command.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct Action {
    pub v: f64,
    pub w: f64,
}

impl Action {
    pub fn new(v: f64, w: f64) -> Self {
        Self { v, w }
    }

    pub fn clamped(self, v_max: f64, w_max: f64) -> Self {
        let c = |x: f64, m: f64| if x.is_finite() { x.clamp(-m, m) } else { 0.0 };
        Self {
            v: c(self.v, v_max),
            w: c(self.w, w_max),
        }
    }
}

/// One LiDAR sweep; beams evenly spaced over `fov`, centered on the heading.
#[derive(Clone, Debug, PartialEq)]
pub struct LidarScan {
    pub fov: f64,
    pub max_range: f64,
    pub ranges: Vec<f64>,
}

impl LidarScan {
    pub fn n_beams(&self) -> usize {
        self.ranges.len()
    }

    /// Beam direction relative to the robot heading. A single beam points
    /// straight ahead.
    #[inline]
    pub fn beam_angle(&self, i: usize) -> f64 {
        beam_angle(self.fov, self.ranges.len(), i)
    }
}

#[inline]
pub fn beam_angle(fov: f64, n_beams: usize, i: usize) -> f64 {
    if n_beams < 2 {
        0.0
    } else {
        fov * (i as f64 / (n_beams - 1) as f64 - 0.5)
    }
}

/// Motion since the previous step, in the previous robot frame.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct OdomDelta {
    pub dx: f64,
    pub dy: f64,
    pub dphi: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Observation {
    pub scan: LidarScan,
    pub odom: OdomDelta,
    pub collided: bool,
}

/// Ground-truth simulator state. The rng drives odometry noise only.
#[derive(Clone, Debug)]
pub struct SimState {
    pub true_pose: Pose,
    pub step_index: usize,
    pub rng: SimRng,
}

impl SimState {
    pub fn new(true_pose: Pose, rng: SimRng) -> Self {
        Self {
            true_pose,
            step_index: 0,
            rng,
        }
    }
}

/// Pose reached after following `(v, w)` for `t` seconds (exact arc).
pub fn integrate_unicycle(p: &Pose, v: f64, w: f64, t: f64) -> Pose {
    if w.abs() > 1e-9 {
        let phi1 = p.phi + w * t;
        Pose::new(
            p.x + v / w * (phi1.sin() - p.phi.sin()),
            p.y - v / w * (phi1.cos() - p.phi.cos()),
            phi1,
        )
    } else {
        Pose::new(p.x + v * t * p.phi.cos(), p.y + v * t * p.phi.sin(), p.phi + w * t)
    }
}

/// Largest fraction of `[0, dt]` the disc can travel before touching an
/// occupied cell, found by sub-stepping then bisecting.
fn free_fraction(grid: &OccupancyGrid, start: &Pose, a: Action, dt: f64, radius: f64) -> f64 {
    let arc = a.v.abs() * dt;
    if arc == 0.0 {
        return 1.0;
    }
    let n = ((arc / (0.25 * grid.resolution())).ceil() as usize).max(1);
    let clear = |s: f64| {
        let p = integrate_unicycle(start, a.v, a.w, s * dt);
        grid.disc_is_clear(p.x, p.y, radius)
    };
    let mut lo = 0.0;
    for k in 1..=n {
        let s = k as f64 / n as f64;
        if clear(s) {
            lo = s;
            continue;
        }
        let mut hi = s;
        for _ in 0..50 {
            let mid = 0.5 * (lo + hi);
            if clear(mid) {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo < 1e-9 {
                break;
            }
        }
        return lo;
    }
    1.0
}

/// Advances the simulation by one control period.
///
/// The action is clamped to the velocity limits. Motion follows the exact
/// unicycle arc; if the robot disc would touch an occupied cell, the motion
/// stops at contact and `collided` is set. Odometry reports the executed
/// (truncated) motion plus Gaussian noise.
pub fn step(state: &mut SimState, grid: &OccupancyGrid, action: Action, cfg: &SimConfig) -> Result<Observation> {
    step_with_dt(state, grid, action, cfg.dt, cfg)
}

pub fn step_with_dt(
    state: &mut SimState,
    grid: &OccupancyGrid,
    action: Action,
    dt: f64,
    cfg: &SimConfig,
) -> Result<Observation> {
    if !(dt > 0.0) {
        return Err(Error::InvalidArgument(format!("dt must be positive, got {dt}")));
    }
    let a = action.clamped(cfg.v_max, cfg.w_max);
    let start = state.true_pose;
    let frac = free_fraction(grid, &start, a, dt, cfg.robot_radius);
    let collided = frac < 1.0;
    let end = if collided {
        integrate_unicycle(&start, a.v, a.w, frac * dt)
    } else {
        integrate_unicycle(&start, a.v, a.w, dt)
    };
    let (dx, dy, dphi) = start.relative(&end);
    let mut odom = OdomDelta { dx, dy, dphi };
    if cfg.odom_noise_xy > 0.0 {
        let n = Normal::new(0.0, cfg.odom_noise_xy).expect("finite std");
        odom.dx += n.sample(&mut state.rng);
        odom.dy += n.sample(&mut state.rng);
    }
    if cfg.odom_noise_phi > 0.0 {
        let n = Normal::new(0.0, cfg.odom_noise_phi).expect("finite std");
        odom.dphi += n.sample(&mut state.rng);
    }
    state.true_pose = end;
    state.step_index += 1;
    let scan = sense(&state.true_pose, grid, cfg.n_beams, cfg.fov, cfg.max_range)?;
    Ok(Observation { scan, odom, collided })
}

/// LiDAR sweep from `pose`. Beam `i` points at
/// `φ + fov·(i/(n_beams−1) − 1/2)`.
pub fn sense(pose: &Pose, grid: &OccupancyGrid, n_beams: usize, fov: f64, max_range: f64) -> Result<LidarScan> {
    if n_beams < 2 {
        return Err(Error::InvalidArgument(format!(
            "a scan needs at least 2 beams, got {n_beams}"
        )));
    }
    if !grid.contains_point(pose.x, pose.y) {
        return Err(Error::OutsideGrid { x: pose.x, y: pose.y });
    }
    let ranges = (0..n_beams)
        .map(|i| raycast_unchecked(grid, pose.x, pose.y, pose.phi + beam_angle(fov, n_beams, i), max_range))
        .collect();
    Ok(LidarScan { fov, max_range, ranges })
}

/// Egocentric occupancy image of a scan: `size`×`size` cells, robot at the
/// center cell, heading along +x (column index), row 0 at minimum y.
///
/// Cells a beam crosses before its endpoint are `Free`; the endpoint cell is
/// `Occupied` when the range is below `max_range`; everything else is
/// `Unexplored`. Endpoints win over free-space marks from other beams.
pub fn scan_to_local_occupancy(scan: &LidarScan, size: usize, resolution: f64) -> Result<OccupancyGrid> {
    if size % 2 == 0 || size == 0 {
        return Err(Error::InvalidArgument(format!(
            "local map size must be odd, got {size}"
        )));
    }
    let mut img = OccupancyGrid::filled(size, size, resolution, CellCode::Unexplored);
    let half = (size / 2) as f64;
    let mut endpoints = Vec::new();
    for (i, &r) in scan.ranges.iter().enumerate() {
        let a = scan.beam_angle(i);
        let (s, c) = a.sin_cos();
        // cell units, origin at the center of the center cell
        let (sx, sy) = (half + 0.5, half + 0.5);
        let len = r / resolution;
        let (ex, ey) = (sx + c * len, sy + s * len);
        let end_cell = (ex.floor() as i64, ey.floor() as i64);
        for (col, row) in traverse(sx, sy, c, s, len) {
            if (col, row) == end_cell {
                break;
            }
            match img.get_signed(col, row) {
                Some(CellCode::Unexplored) => img.set(col as usize, row as usize, CellCode::Free),
                Some(_) => {}
                None => break,
            }
        }
        if r < scan.max_range {
            endpoints.push(end_cell);
        }
    }
    for (col, row) in endpoints {
        if img.get_signed(col, row).is_some() {
            img.set(col as usize, row as usize, CellCode::Occupied);
        }
    }
    Ok(img)
}

/// Cells visited by a segment of length `len` (cell units) from `(sx, sy)`
/// along unit direction `(dx, dy)`, starting with the start cell.
fn traverse(sx: f64, sy: f64, dx: f64, dy: f64, len: f64) -> Vec<(i64, i64)> {
    let mut col = sx.floor() as i64;
    let mut row = sy.floor() as i64;
    let mut out = vec![(col, row)];
    let setup = |pos: f64, dir: f64| -> (i64, f64, f64) {
        if dir > 0.0 {
            (1, (pos.floor() + 1.0 - pos) / dir, 1.0 / dir)
        } else if dir < 0.0 {
            (-1, (pos - pos.floor()) / -dir, -1.0 / dir)
        } else {
            (0, f64::INFINITY, f64::INFINITY)
        }
    };
    let (sc, mut tc, dc) = setup(sx, dx);
    let (sr, mut tr, dr) = setup(sy, dy);
    loop {
        let t = tc.min(tr);
        if t > len {
            break;
        }
        if tc < tr {
            col += sc;
            tc += dc;
        } else {
            row += sr;
            tr += dr;
        }
        out.push((col, row));
    }
    out
}
