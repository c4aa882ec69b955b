use super::{OccupancyGrid, Pose};
use crate::{Error, Result};

/// Distance from `from` along `angle` (world frame) to the boundary of the
/// first occupied cell, clamped to `max_range`. Rays that leave the grid
/// without hitting anything return `max_range`.
///
/// Cells are visited with an exact grid traversal, so the result does not
/// depend on a step size.
pub fn raycast(grid: &OccupancyGrid, from: &Pose, angle: f64, max_range: f64) -> Result<f64> {
    if !grid.contains_point(from.x, from.y) {
        return Err(Error::OutsideGrid { x: from.x, y: from.y });
    }
    Ok(raycast_unchecked(grid, from.x, from.y, angle, max_range))
}

/// [`raycast`] without the bounds check; callers guarantee the origin lies
/// inside the grid.
pub(crate) fn raycast_unchecked(grid: &OccupancyGrid, x: f64, y: f64, angle: f64, max_range: f64) -> f64 {
    let (gx, gy) = grid.world_to_grid(x, y);
    let local = angle - grid.heading_offset();
    let (dy, dx) = local.sin_cos();
    let res = grid.resolution();
    let t_limit = max_range / res;

    let mut col = gx.floor() as i64;
    let mut row = gy.floor() as i64;
    if grid.is_occupied(col, row) {
        return 0.0;
    }
    let (w, h) = (grid.width() as i64, grid.height() as i64);

    let (step_c, mut t_max_c, t_delta_c) = axis_setup(gx, dx);
    let (step_r, mut t_max_r, t_delta_r) = axis_setup(gy, dy);

    loop {
        let t = if t_max_c < t_max_r {
            col += step_c;
            let t = t_max_c;
            t_max_c += t_delta_c;
            t
        } else {
            row += step_r;
            let t = t_max_r;
            t_max_r += t_delta_r;
            t
        };
        if t >= t_limit {
            return max_range;
        }
        if col < 0 || row < 0 || col >= w || row >= h {
            return max_range;
        }
        if grid.is_occupied(col, row) {
            return (t * res).min(max_range);
        }
    }
}

#[inline]
fn axis_setup(pos: f64, dir: f64) -> (i64, f64, f64) {
    if dir > 0.0 {
        let next = pos.floor() + 1.0;
        (1, (next - pos) / dir, 1.0 / dir)
    } else if dir < 0.0 {
        let next = pos.floor();
        (-1, (pos - next) / -dir, -1.0 / dir)
    } else {
        (0, f64::INFINITY, f64::INFINITY)
    }
}
