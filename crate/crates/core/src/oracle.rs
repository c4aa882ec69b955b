//! Independent reference implementations.
//!
//! Slow, obviously-correct versions of the geometry and filtering routines,
//! used by the unit tests, the acceptance suite and the `selftest` command.
//! Nothing here calls into the implementations it checks.

use crate::worldmap::{CellCode, OccupancyGrid, Pose};
use rand::Rng;
use std::collections::BinaryHeap;
use std::ops::Range;

/// Square random grid with a random side in `side` and each cell occupied
/// with probability `density`; the rest are free, with a sprinkling of
/// unexplored cells.
pub fn random_grid<R: Rng + ?Sized>(rng: &mut R, side: Range<usize>, density: f64) -> OccupancyGrid {
    let n = rng.random_range(side);
    let mut g = OccupancyGrid::filled(n, n, 0.1, CellCode::Free);
    for row in 0..n {
        for col in 0..n {
            let u: f64 = rng.random();
            if u < density {
                g.set(col, row, CellCode::Occupied);
            } else if u < density + 0.05 {
                g.set(col, row, CellCode::Unexplored);
            }
        }
    }
    g
}

/// Uniform point inside a non-occupied cell of `grid` with random heading.
/// Panics if the grid is fully occupied.
pub fn random_free_point<R: Rng + ?Sized>(rng: &mut R, grid: &OccupancyGrid) -> Pose {
    let free: Vec<(usize, usize)> = (0..grid.height())
        .flat_map(|r| (0..grid.width()).map(move |c| (c, r)))
        .filter(|&(c, r)| grid.get(c, r) != CellCode::Occupied)
        .collect();
    let (c, r) = free[rng.random_range(0..free.len())];
    let (x, y) = grid.grid_to_world(c as f64 + rng.random::<f64>(), r as f64 + rng.random::<f64>());
    Pose::new(x, y, rng.random_range(-std::f64::consts::PI..std::f64::consts::PI))
}

/// Marches the ray in steps of `resolution / 10` and returns the first
/// sampled distance that lands in an occupied cell. A ray that clips an
/// occupied corner for less than one step can be missed.
pub fn raycast_fine_step(grid: &OccupancyGrid, x: f64, y: f64, angle: f64, max_range: f64) -> f64 {
    raycast_subdivided(grid, x, y, angle, max_range, 10)
}

/// [`raycast_fine_step`] with a step of `resolution / subdivisions`.
pub fn raycast_subdivided(grid: &OccupancyGrid, x: f64, y: f64, angle: f64, max_range: f64, subdivisions: u32) -> f64 {
    let step = grid.resolution() / subdivisions as f64;
    let (s, c) = angle.sin_cos();
    let mut i = 0u64;
    loop {
        let t = i as f64 * step;
        if t >= max_range {
            return max_range;
        }
        let (px, py) = (x + c * t, y + s * t);
        let (gx, gy) = (
            ((px - grid.origin().x) / grid.resolution()).floor() as i64,
            ((py - grid.origin().y) / grid.resolution()).floor() as i64,
        );
        match grid.get_signed(gx, gy) {
            None => return max_range,
            Some(CellCode::Occupied) => return t,
            Some(_) => {}
        }
        i += 1;
    }
}

/// All-pairs minimum distance from every cell center to every occupied cell
/// center, in meters.
pub fn distance_field_brute_force(grid: &OccupancyGrid) -> Vec<f64> {
    let occ: Vec<(i64, i64)> = (0..grid.height())
        .flat_map(|r| (0..grid.width()).map(move |c| (c, r)))
        .filter(|&(c, r)| grid.get(c, r) == CellCode::Occupied)
        .map(|(c, r)| (c as i64, r as i64))
        .collect();
    let mut out = Vec::with_capacity(grid.cells().len());
    for r in 0..grid.height() as i64 {
        for c in 0..grid.width() as i64 {
            let best = occ
                .iter()
                .map(|&(oc, or)| ((oc - c).pow(2) + (or - r).pow(2)) as u64)
                .min()
                .expect("at least one occupied cell");
            out.push((best as f64).sqrt() * grid.resolution());
        }
    }
    out
}

#[derive(PartialEq)]
struct Entry(f64, usize);
impl Eq for Entry {}
impl PartialOrd for Entry {
    fn partial_cmp(&self, o: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Entry {
    fn cmp(&self, o: &Self) -> std::cmp::Ordering {
        o.0.total_cmp(&self.0).then(o.1.cmp(&self.1))
    }
}

/// Uniform-cost search over an 8-connected cell mask (diagonal cost √2).
/// Returns the optimal cost in cell units, or `None` when unreachable.
pub fn dijkstra_cost(
    width: usize,
    height: usize,
    passable: &dyn Fn(usize, usize) -> bool,
    from: (usize, usize),
    to: (usize, usize),
) -> Option<f64> {
    let idx = |c: usize, r: usize| r * width + c;
    let mut dist = vec![f64::INFINITY; width * height];
    let mut heap = BinaryHeap::new();
    dist[idx(from.0, from.1)] = 0.0;
    heap.push(Entry(0.0, idx(from.0, from.1)));
    while let Some(Entry(d, i)) = heap.pop() {
        if d > dist[i] {
            continue;
        }
        let (c, r) = (i % width, i / width);
        if (c, r) == to {
            return Some(d);
        }
        for dr in -1i64..=1 {
            for dc in -1i64..=1 {
                if dr == 0 && dc == 0 {
                    continue;
                }
                let (nc, nr) = (c as i64 + dc, r as i64 + dr);
                if nc < 0 || nr < 0 || nc >= width as i64 || nr >= height as i64 {
                    continue;
                }
                let (nc, nr) = (nc as usize, nr as usize);
                if !passable(nc, nr) {
                    continue;
                }
                let step = if dr != 0 && dc != 0 {
                    std::f64::consts::SQRT_2
                } else {
                    1.0
                };
                let nd = d + step;
                let j = idx(nc, nr);
                if nd < dist[j] {
                    dist[j] = nd;
                    heap.push(Entry(nd, j));
                }
            }
        }
    }
    None
}

/// Inverse-maps one output cell of a `size`×`size` crop centered and oriented
/// at `pose` to the signed source cell that contains its center.
pub fn crop_source_cell(grid: &OccupancyGrid, pose: &Pose, size: usize, col: usize, row: usize) -> (i64, i64) {
    let half = (size / 2) as f64;
    let u = (col as f64 - half) * grid.resolution();
    let v = (row as f64 - half) * grid.resolution();
    let (x, y) = (
        pose.x + pose.phi.cos() * u - pose.phi.sin() * v,
        pose.y + pose.phi.sin() * u + pose.phi.cos() * v,
    );
    (
        ((x - grid.origin().x) / grid.resolution()).floor() as i64,
        ((y - grid.origin().y) / grid.resolution()).floor() as i64,
    )
}
