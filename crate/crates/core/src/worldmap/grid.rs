use super::Pose;
use crate::{Error, Result};

/// Occupancy code of one cell. The discriminants are the on-disk codes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
#[repr(u8)]
pub enum CellCode {
    Free = 0,
    Unexplored = 1,
    Occupied = 2,
}

impl CellCode {
    pub fn from_code(code: u8) -> Option<Self> {
        match code {
            0 => Some(CellCode::Free),
            1 => Some(CellCode::Unexplored),
            2 => Some(CellCode::Occupied),
            _ => None,
        }
    }

    pub fn code(self) -> u8 {
        self as u8
    }

    /// Belief-map encoding: {Free, Unexplored, Occupied} -> {0, 0.5, 1}.
    pub fn unit_value(self) -> f64 {
        f64::from(self.code()) * 0.5
    }
}

/// Row-major occupancy grid. Cell `(col, row)` spans
/// `[col·res, (col+1)·res] × [row·res, (row+1)·res]` in the grid frame,
/// whose corner and orientation in the world are given by `origin`.
/// Row 0 is the minimum-y row.
#[derive(Clone, Debug, PartialEq)]
pub struct OccupancyGrid {
    width: usize,
    height: usize,
    resolution: f64,
    origin: Pose,
    cells: Vec<CellCode>,
}

impl OccupancyGrid {
    pub fn new(width: usize, height: usize, resolution: f64, origin: Pose, cells: Vec<CellCode>) -> Result<Self> {
        if !(resolution > 0.0 && resolution.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "resolution must be positive, got {resolution}"
            )));
        }
        if width == 0 || height == 0 || width * height != cells.len() {
            return Err(Error::InvalidArgument(format!(
                "{width}x{height} grid cannot hold {} cells",
                cells.len()
            )));
        }
        Ok(Self {
            width,
            height,
            resolution,
            origin,
            cells,
        })
    }

    /// Grid filled with one code, origin at the world origin.
    pub fn filled(width: usize, height: usize, resolution: f64, code: CellCode) -> Self {
        Self::new(width, height, resolution, Pose::default(), vec![code; width * height]).expect("valid dimensions")
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn resolution(&self) -> f64 {
        self.resolution
    }

    pub fn origin(&self) -> Pose {
        self.origin
    }

    pub fn cells(&self) -> &[CellCode] {
        &self.cells
    }

    #[inline]
    pub fn index(&self, col: usize, row: usize) -> usize {
        row * self.width + col
    }

    #[inline]
    pub fn get(&self, col: usize, row: usize) -> CellCode {
        self.cells[self.index(col, row)]
    }

    /// Cell at signed coordinates, `None` outside the grid.
    #[inline]
    pub fn get_signed(&self, col: i64, row: i64) -> Option<CellCode> {
        if col < 0 || row < 0 || col >= self.width as i64 || row >= self.height as i64 {
            None
        } else {
            Some(self.get(col as usize, row as usize))
        }
    }

    pub fn set(&mut self, col: usize, row: usize, code: CellCode) {
        let i = self.index(col, row);
        self.cells[i] = code;
    }

    #[inline]
    pub fn is_occupied(&self, col: i64, row: i64) -> bool {
        self.get_signed(col, row) == Some(CellCode::Occupied)
    }

    /// World point to continuous grid-frame coordinates in cell units.
    #[inline]
    pub fn world_to_grid(&self, x: f64, y: f64) -> (f64, f64) {
        let (ex, ey) = (x - self.origin.x, y - self.origin.y);
        if self.origin.phi == 0.0 {
            return (ex / self.resolution, ey / self.resolution);
        }
        let (s, c) = self.origin.phi.sin_cos();
        (
            (c * ex + s * ey) / self.resolution,
            (-s * ex + c * ey) / self.resolution,
        )
    }

    /// Continuous grid-frame coordinates (cell units) to a world point.
    #[inline]
    pub fn grid_to_world(&self, gx: f64, gy: f64) -> (f64, f64) {
        let (u, v) = (gx * self.resolution, gy * self.resolution);
        if self.origin.phi == 0.0 {
            return (self.origin.x + u, self.origin.y + v);
        }
        self.origin.transform_point(u, v)
    }

    /// Signed cell containing a world point (may lie outside the grid).
    #[inline]
    pub fn world_to_cell(&self, x: f64, y: f64) -> (i64, i64) {
        let (gx, gy) = self.world_to_grid(x, y);
        (gx.floor() as i64, gy.floor() as i64)
    }

    pub fn cell_center(&self, col: usize, row: usize) -> (f64, f64) {
        self.grid_to_world(col as f64 + 0.5, row as f64 + 0.5)
    }

    pub fn contains_point(&self, x: f64, y: f64) -> bool {
        let (gx, gy) = self.world_to_grid(x, y);
        gx >= 0.0 && gy >= 0.0 && gx < self.width as f64 && gy < self.height as f64
    }

    /// Heading of the grid's +x axis in the world.
    pub fn heading_offset(&self) -> f64 {
        self.origin.phi
    }

    pub fn count(&self, code: CellCode) -> usize {
        self.cells.iter().filter(|&&c| c == code).count()
    }

    /// Euclidean distance from a world point to the nearest point of any
    /// occupied cell square within `radius`, or `None` when none is that
    /// close. Cells outside the grid count as occupied.
    pub fn clearance_within(&self, x: f64, y: f64, radius: f64) -> Option<f64> {
        let (gx, gy) = self.world_to_grid(x, y);
        let r = radius / self.resolution;
        let (c0, c1) = ((gx - r).floor() as i64, (gx + r).floor() as i64);
        let (r0, r1) = ((gy - r).floor() as i64, (gy + r).floor() as i64);
        let mut best: Option<f64> = None;
        for row in r0..=r1 {
            for col in c0..=c1 {
                let blocked = match self.get_signed(col, row) {
                    Some(CellCode::Occupied) | None => true,
                    Some(_) => false,
                };
                if !blocked {
                    continue;
                }
                let dx = (col as f64 - gx).max(gx - (col + 1) as f64).max(0.0);
                let dy = (row as f64 - gy).max(gy - (row + 1) as f64).max(0.0);
                let d = dx.hypot(dy) * self.resolution;
                if d < radius && best.is_none_or(|b| d < b) {
                    best = Some(d);
                }
            }
        }
        best
    }

    /// True when a disc of `radius` at `(x, y)` overlaps no occupied cell and
    /// stays inside the grid.
    pub fn disc_is_clear(&self, x: f64, y: f64, radius: f64) -> bool {
        self.clearance_within(x, y, radius).is_none()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_dimensions() {
        assert!(OccupancyGrid::new(2, 2, 0.1, Pose::default(), vec![CellCode::Free; 3]).is_err());
        assert!(OccupancyGrid::new(2, 2, 0.0, Pose::default(), vec![CellCode::Free; 4]).is_err());
    }

    #[test]
    fn rotated_origin_round_trips() {
        let g = OccupancyGrid::new(4, 4, 0.5, Pose::new(1.0, 2.0, 0.7), vec![CellCode::Free; 16]).unwrap();
        let (x, y) = g.grid_to_world(1.25, 3.5);
        let (gx, gy) = g.world_to_grid(x, y);
        assert!((gx - 1.25).abs() < 1e-12 && (gy - 3.5).abs() < 1e-12);
    }

    #[test]
    fn disc_clearance_counts_border_as_blocked() {
        let g = OccupancyGrid::filled(10, 10, 0.1, CellCode::Free);
        assert!(g.disc_is_clear(0.5, 0.5, 0.18));
        assert!(!g.disc_is_clear(0.1, 0.5, 0.18));
    }
}
