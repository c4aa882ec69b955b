//! Global map representation and geometry queries.

mod distance;
mod grid;
mod io;
mod pose;
pub(crate) mod raycast;
mod traversable;

pub use distance::{distance_transform, DistanceField};
pub use grid::{CellCode, OccupancyGrid};
pub use io::{load_map, parse_map, save_map, write_map};
pub use pose::Pose;
pub use raycast::raycast;
pub use traversable::{sample_traversable_pose, Traversability, DEFAULT_ROBOT_RADIUS};

/// Default map resolution in meters per cell.
pub const DEFAULT_RESOLUTION: f64 = 0.1;
