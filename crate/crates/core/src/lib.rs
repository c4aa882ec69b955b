//! Active localization laboratory.
//!
//! A deterministic 2D occupancy-grid world with a ray-cast LiDAR, a particle
//! filter with soft resampling, a spatial belief map with mode-centered local
//! crops, baseline and learned motion policies, and an experiment harness
//! that measures how motion choices affect localization error.
//!
//! Data-parallel inner loops (per-particle updates, batches of independent
//! episodes) run on rayon when the `parallel` feature is enabled (default)
//! and fall back to plain iterators otherwise. Results are bitwise identical
//! either way: only element-wise maps are parallelized, every reduction is
//! sequential.

pub mod angle;
pub mod belief;
pub mod error;
pub mod harness;
pub mod oracle;
pub mod par;
pub mod pfilter;
pub mod policies;
pub mod rng;
pub mod selftest;
pub mod simulator;
pub mod worldmap;

pub use error::{Error, Result};
pub use worldmap::{CellCode, DistanceField, OccupancyGrid, Pose};
