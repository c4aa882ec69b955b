use super::{CellCode, OccupancyGrid, Pose};
use crate::{Error, Result};
use rand::Rng;
use std::f64::consts::PI;

/// Robot disc radius in meters.
pub const DEFAULT_ROBOT_RADIUS: f64 = 0.18;

/// Cells where the robot disc fits anywhere inside the cell.
///
/// A cell is traversable when it is `Free` and a disc of radius
/// `robot_radius + half cell diagonal` around its center overlaps no
/// occupied cell and stays inside the grid, so every point of the cell is a
/// collision-free robot position.
#[derive(Clone, Debug)]
pub struct Traversability {
    width: usize,
    mask: Vec<bool>,
    cells: Vec<(usize, usize)>,
    robot_radius: f64,
}

impl Traversability {
    pub fn new(grid: &OccupancyGrid, robot_radius: f64) -> Self {
        let margin = robot_radius + grid.resolution() * std::f64::consts::FRAC_1_SQRT_2;
        let mut mask = vec![false; grid.cells().len()];
        let mut cells = Vec::new();
        for row in 0..grid.height() {
            for col in 0..grid.width() {
                if grid.get(col, row) != CellCode::Free {
                    continue;
                }
                let (x, y) = grid.cell_center(col, row);
                if grid.disc_is_clear(x, y, margin) {
                    mask[grid.index(col, row)] = true;
                    cells.push((col, row));
                }
            }
        }
        Self {
            width: grid.width(),
            mask,
            cells,
            robot_radius,
        }
    }

    pub fn robot_radius(&self) -> f64 {
        self.robot_radius
    }

    pub fn cells(&self) -> &[(usize, usize)] {
        &self.cells
    }

    pub fn is_traversable(&self, col: usize, row: usize) -> bool {
        col < self.width && self.mask.get(row * self.width + col).copied().unwrap_or(false)
    }

    pub fn is_traversable_signed(&self, col: i64, row: i64) -> bool {
        col >= 0 && row >= 0 && self.is_traversable(col as usize, row as usize)
    }

    /// Uniform over traversable cells, uniform within the cell, heading
    /// uniform over `[-π, π)`.
    pub fn sample_pose<R: Rng + ?Sized>(&self, grid: &OccupancyGrid, rng: &mut R) -> Result<Pose> {
        if self.cells.is_empty() {
            return Err(Error::NoTraversableCell);
        }
        let (col, row) = self.cells[rng.random_range(0..self.cells.len())];
        let gx = col as f64 + rng.random::<f64>();
        let gy = row as f64 + rng.random::<f64>();
        let (x, y) = grid.grid_to_world(gx, gy);
        let phi = rng.random_range(-PI..PI);
        Ok(Pose::new(x, y, phi))
    }
}

/// Convenience wrapper building the traversability mask on the fly.
pub fn sample_traversable_pose<R: Rng + ?Sized>(grid: &OccupancyGrid, robot_radius: f64, rng: &mut R) -> Result<Pose> {
    Traversability::new(grid, robot_radius).sample_pose(grid, rng)
}
