//! Spatial belief map and mode-centered local crops.
//!
//! The particle set is projected onto the global grid as four channels:
//! occupancy, aggregated weight, weighted `sin φ` and weighted `cos φ`. The
//! policy sees a fixed-size crop of this map, centered and rotated at an
//! attention pose (a mode of the belief).

use crate::pfilter::{estimate_pose, ParticleSet};
use crate::worldmap::{OccupancyGrid, Pose};
use crate::{angle, Result};
use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

pub const CHANNELS: usize = 4;

/// `H×W×4` belief map aligned with the global grid, stored cell-major
/// (`[row][col][channel]`).
#[derive(Clone, Debug, PartialEq)]
pub struct BeliefMap {
    width: usize,
    height: usize,
    resolution: f64,
    origin: Pose,
    data: Vec<f64>,
}

impl BeliefMap {
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn resolution(&self) -> f64 {
        self.resolution
    }

    #[inline]
    pub fn get(&self, col: usize, row: usize, ch: usize) -> f64 {
        self.data[(row * self.width + col) * CHANNELS + ch]
    }

    #[inline]
    pub fn cell(&self, col: usize, row: usize) -> [f64; CHANNELS] {
        let i = (row * self.width + col) * CHANNELS;
        [self.data[i], self.data[i + 1], self.data[i + 2], self.data[i + 3]]
    }

    pub fn channel_sum(&self, ch: usize) -> f64 {
        self.data.iter().skip(ch).step_by(CHANNELS).sum()
    }

    fn world_to_grid(&self, x: f64, y: f64) -> (f64, f64) {
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

    /// Writes one 8-bit portable graymap per channel, named
    /// `step_%04d_ch%d.pgm`, each scaled by its own maximum magnitude.
    pub fn write_pgm(&self, dir: impl AsRef<Path>, step: usize) -> Result<()> {
        write_channels_pgm(&self.data, self.width, self.height, dir.as_ref(), step)
    }
}

/// `size×size×4` crop of a belief map in an attention frame.
#[derive(Clone, Debug, PartialEq)]
pub struct LocalBelief {
    size: usize,
    data: Vec<f64>,
}

impl LocalBelief {
    pub fn size(&self) -> usize {
        self.size
    }

    #[inline]
    pub fn get(&self, col: usize, row: usize, ch: usize) -> f64 {
        self.data[(row * self.size + col) * CHANNELS + ch]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    /// Averages non-overlapping `size/out`-wide blocks into an `out×out×4`
    /// feature vector (channel-minor). Trailing rows/columns that do not
    /// fill a block are dropped.
    pub fn average_pool(&self, out: usize) -> Vec<f64> {
        let block = (self.size / out).max(1);
        let mut feats = vec![0.0; out * out * CHANNELS];
        let norm = 1.0 / (block * block) as f64;
        for br in 0..out {
            for bc in 0..out {
                for r in br * block..((br + 1) * block).min(self.size) {
                    for c in bc * block..((bc + 1) * block).min(self.size) {
                        for ch in 0..CHANNELS {
                            feats[(br * out + bc) * CHANNELS + ch] += self.get(c, r, ch) * norm;
                        }
                    }
                }
            }
        }
        feats
    }

    pub fn write_pgm(&self, dir: impl AsRef<Path>, step: usize) -> Result<()> {
        write_channels_pgm(&self.data, self.size, self.size, dir.as_ref(), step)
    }
}

/// Projects particles into the belief map. Each particle adds
/// `(w, w·sin φ, w·cos φ)` to channels 1–3 of its cell; particles outside the
/// grid land on the nearest border cell. Channel 0 is the occupancy code
/// rescaled to `{0, 0.5, 1}`.
pub fn project_particles(ps: &ParticleSet, grid: &OccupancyGrid) -> BeliefMap {
    let (w, h) = (grid.width(), grid.height());
    let mut data = vec![0.0; w * h * CHANNELS];
    for (i, c) in grid.cells().iter().enumerate() {
        data[i * CHANNELS] = c.unit_value();
    }
    for p in ps.particles() {
        let (col, row) = grid.world_to_cell(p.pose.x, p.pose.y);
        let col = col.clamp(0, w as i64 - 1) as usize;
        let row = row.clamp(0, h as i64 - 1) as usize;
        let wt = p.log_weight.exp();
        let (s, c) = p.pose.phi.sin_cos();
        let i = (row * w + col) * CHANNELS;
        data[i + 1] += wt;
        data[i + 2] += wt * s;
        data[i + 3] += wt * c;
    }
    BeliefMap {
        width: w,
        height: h,
        resolution: grid.resolution(),
        origin: grid.origin(),
        data,
    }
}

/// Bin sizes for mode extraction.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModeBins {
    pub xy: f64,
    pub phi: f64,
}

impl Default for ModeBins {
    fn default() -> Self {
        Self {
            xy: 1.0,
            phi: 60f64.to_radians(),
        }
    }
}

/// Attention poses for the `k` strongest belief modes.
///
/// `k = 1` is the particle-set estimate itself. For `k > 1` particles are
/// binned on `bins`; the heaviest bins win (ties broken by bin index,
/// lexicographically) and each mode is the weighted mean pose of its bin.
/// Fewer than `k` poses come back when fewer bins are occupied.
pub fn extract_modes(ps: &ParticleSet, k: usize, bins: ModeBins) -> Result<Vec<Pose>> {
    if k == 0 {
        return Ok(Vec::new());
    }
    if k == 1 {
        return Ok(vec![estimate_pose(ps)?]);
    }
    let mut groups: BTreeMap<(i64, i64, i64), Vec<(Pose, f64)>> = BTreeMap::new();
    for p in ps.particles() {
        let key = (
            (p.pose.x / bins.xy).floor() as i64,
            (p.pose.y / bins.xy).floor() as i64,
            ((p.pose.phi + std::f64::consts::PI) / bins.phi).floor() as i64,
        );
        groups.entry(key).or_default().push((p.pose, p.log_weight.exp()));
    }
    let mut modes: Vec<((i64, i64, i64), f64, Pose)> = groups
        .into_iter()
        .filter_map(|(key, mut members)| {
            // canonical order makes the sums independent of particle order
            members.sort_by(|a, b| {
                a.0.x
                    .total_cmp(&b.0.x)
                    .then(a.0.y.total_cmp(&b.0.y))
                    .then(a.0.phi.total_cmp(&b.0.phi))
                    .then(a.1.total_cmp(&b.1))
            });
            let total: f64 = members.iter().map(|m| m.1).sum();
            if total <= 0.0 {
                return None;
            }
            let x = members.iter().map(|m| m.1 * m.0.x).sum::<f64>() / total;
            let y = members.iter().map(|m| m.1 * m.0.y).sum::<f64>() / total;
            let phi = angle::circular_mean(members.iter().map(|m| (m.1, m.0.phi))).unwrap_or(members[0].0.phi);
            Some((key, total, Pose::new(x, y, phi)))
        })
        .collect();
    modes.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    Ok(modes.into_iter().take(k).map(|m| m.2).collect())
}

/// Crops all four channels around `attend` with the same inverse mapping as
/// the particle-centric local map (nearest cell). Out-of-map cells are zero.
/// The orientation channels are re-expressed relative to the attention
/// heading: `φ` becomes `φ − φ_attend` before taking sine and cosine.
pub fn extract_local_belief(bm: &BeliefMap, attend: &Pose, size: usize) -> LocalBelief {
    let half = (size / 2) as f64;
    let res = bm.resolution;
    let (sa, ca) = attend.phi.sin_cos();
    let mut data = vec![0.0; size * size * CHANNELS];
    for row in 0..size {
        let v = (row as f64 - half) * res;
        for col in 0..size {
            let u = (col as f64 - half) * res;
            let (x, y) = attend.transform_point(u, v);
            let (gx, gy) = bm.world_to_grid(x, y);
            let (c, r) = (gx.floor() as i64, gy.floor() as i64);
            if c < 0 || r < 0 || c >= bm.width as i64 || r >= bm.height as i64 {
                continue;
            }
            let [occ, w, s, co] = bm.cell(c as usize, r as usize);
            let o = (row * size + col) * CHANNELS;
            data[o] = occ;
            data[o + 1] = w;
            data[o + 2] = s * ca - co * sa;
            data[o + 3] = co * ca + s * sa;
        }
    }
    LocalBelief { size, data }
}

fn write_channels_pgm(data: &[f64], width: usize, height: usize, dir: &Path, step: usize) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    for ch in 0..CHANNELS {
        let vals: Vec<f64> = data.iter().skip(ch).step_by(CHANNELS).copied().collect();
        let max = vals.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let mut f = std::io::BufWriter::new(std::fs::File::create(dir.join(format!("step_{step:04}_ch{ch}.pgm")))?);
        write!(f, "P5\n{width} {height}\n255\n")?;
        // image rows run top to bottom: emit maximum y first
        for row in (0..height).rev() {
            let line: Vec<u8> = (0..width)
                .map(|col| {
                    let v = vals[row * width + col];
                    let scaled = if ch >= 2 {
                        // signed channels: mid-gray is zero
                        if max > 0.0 {
                            127.5 + 127.5 * v / max
                        } else {
                            127.5
                        }
                    } else if max > 0.0 {
                        255.0 * v / max
                    } else {
                        0.0
                    };
                    scaled.round().clamp(0.0, 255.0) as u8
                })
                .collect();
            f.write_all(&line)?;
        }
        f.flush()?;
    }
    Ok(())
}
