use crate::worldmap::{CellCode, OccupancyGrid, Pose};
use crate::{Error, Result};

/// Particle-centric window of the global map.
///
/// Output cell `(col, row)` sits at offset `((col − size/2)·res, (row −
/// size/2)·res)` in the frame of `pose`, so `pose` is the center cell and its
/// heading is the +x image axis. Each output cell takes the code of the
/// global cell containing its inverse-mapped center; cells outside the map
/// are `Unexplored`.
pub fn extract_local_map(grid: &OccupancyGrid, pose: &Pose, size: usize) -> Result<OccupancyGrid> {
    if size % 2 == 0 {
        return Err(Error::InvalidArgument(format!(
            "local map size must be odd, got {size}"
        )));
    }
    let res = grid.resolution();
    let half = (size / 2) as f64;
    let mut cells = Vec::with_capacity(size * size);
    for row in 0..size {
        let v = (row as f64 - half) * res;
        for col in 0..size {
            let u = (col as f64 - half) * res;
            let (x, y) = pose.transform_point(u, v);
            let (c, r) = grid.world_to_cell(x, y);
            cells.push(grid.get_signed(c, r).unwrap_or(CellCode::Unexplored));
        }
    }
    OccupancyGrid::new(size, size, res, Pose::default(), cells)
}
