use super::{CellCode, OccupancyGrid};
use crate::{par, Error, Result};

/// Per-cell Euclidean distance (meters) from each cell center to the nearest
/// occupied cell center. Same shape and placement as its source grid.
#[derive(Clone, Debug, PartialEq)]
pub struct DistanceField {
    width: usize,
    height: usize,
    resolution: f64,
    origin: crate::Pose,
    values: Vec<f64>,
}

impl DistanceField {
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn resolution(&self) -> f64 {
        self.resolution
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn get(&self, col: usize, row: usize) -> f64 {
        self.values[row * self.width + col]
    }

    pub fn matches(&self, grid: &OccupancyGrid) -> bool {
        self.width == grid.width()
            && self.height == grid.height()
            && self.resolution == grid.resolution()
            && self.origin == grid.origin()
    }

    /// Approximate distance from a continuous grid-frame point (cell units)
    /// to the nearest occupied cell *surface*, in meters.
    ///
    /// Bilinear interpolation of the center-to-center field, less half a cell
    /// and floored at zero, so a point on the face of an occupied cell scores
    /// zero. Points outside the grid take the value at the nearest border
    /// point plus their distance to the grid.
    #[inline]
    pub fn surface_distance(&self, gx: f64, gy: f64) -> f64 {
        let (w, h) = (self.width as f64, self.height as f64);
        let cx = gx.clamp(0.0, w);
        let cy = gy.clamp(0.0, h);
        let outside = if cx == gx && cy == gy {
            0.0
        } else {
            (gx - cx).hypot(gy - cy) * self.resolution
        };

        // cell-center lattice coordinates
        let fx = (cx - 0.5).clamp(0.0, w - 1.0);
        let fy = (cy - 0.5).clamp(0.0, h - 1.0);
        // fx, fy >= 0, so truncation is floor
        let (x0, y0) = (fx as usize, fy as usize);
        let (x1, y1) = ((x0 + 1).min(self.width - 1), (y0 + 1).min(self.height - 1));
        let (tx, ty) = (fx - x0 as f64, fy - y0 as f64);
        let top = self.get(x0, y0) * (1.0 - tx) + self.get(x1, y0) * tx;
        let bottom = self.get(x0, y1) * (1.0 - tx) + self.get(x1, y1) * tx;
        let center = top * (1.0 - ty) + bottom * ty;
        (center - 0.5 * self.resolution).max(0.0) + outside
    }
}

const FAR: f64 = 1e20;

/// One-dimensional squared distance transform of a sampled function
/// (lower envelope of parabolas). Exact for integer sample positions.
fn edt_1d(f: &[f64], out: &mut [f64], v: &mut [usize], z: &mut [f64]) {
    let n = f.len();
    if n == 0 {
        return;
    }
    let mut k = 0usize;
    v[0] = 0;
    z[0] = f64::NEG_INFINITY;
    z[1] = f64::INFINITY;
    for q in 1..n {
        let parabola = |p: usize| f[p] + (p * p) as f64;
        let mut s = (parabola(q) - parabola(v[k])) / (2.0 * (q - v[k]) as f64);
        while s <= z[k] {
            k -= 1;
            s = (parabola(q) - parabola(v[k])) / (2.0 * (q - v[k]) as f64);
        }
        k += 1;
        v[k] = q;
        z[k] = s;
        z[k + 1] = f64::INFINITY;
    }
    k = 0;
    for (q, o) in out.iter_mut().enumerate() {
        while z[k + 1] < q as f64 {
            k += 1;
        }
        let d = q as f64 - v[k] as f64;
        *o = d * d + f[v[k]];
    }
}

/// Exact Euclidean distance transform to the nearest occupied cell center.
pub fn distance_transform(grid: &OccupancyGrid) -> Result<DistanceField> {
    let (w, h) = (grid.width(), grid.height());
    if grid.count(CellCode::Occupied) == 0 {
        return Err(Error::NoOccupiedCell);
    }
    let init: Vec<f64> = grid
        .cells()
        .iter()
        .map(|&c| if c == CellCode::Occupied { 0.0 } else { FAR })
        .collect();

    // columns
    let cols: Vec<Vec<f64>> = par::map_range(w, |col| {
        let f: Vec<f64> = (0..h).map(|row| init[row * w + col]).collect();
        let mut out = vec![0.0; h];
        let (mut v, mut z) = (vec![0usize; h], vec![0.0; h + 1]);
        edt_1d(&f, &mut out, &mut v, &mut z);
        out
    });
    // rows
    let rows: Vec<Vec<f64>> = par::map_range(h, |row| {
        let f: Vec<f64> = (0..w).map(|col| cols[col][row]).collect();
        let mut out = vec![0.0; w];
        let (mut v, mut z) = (vec![0usize; w], vec![0.0; w + 1]);
        edt_1d(&f, &mut out, &mut v, &mut z);
        out
    });
    let res = grid.resolution();
    let values = rows.into_iter().flatten().map(|d2| d2.sqrt() * res).collect();
    Ok(DistanceField {
        width: w,
        height: h,
        resolution: res,
        origin: grid.origin(),
        values,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle;
    use rand::SeedableRng;

    #[test]
    fn single_occupied_cell() {
        let mut g = OccupancyGrid::filled(9, 9, 0.1, CellCode::Free);
        g.set(4, 4, CellCode::Occupied);
        let d = distance_transform(&g).unwrap();
        assert_eq!(d.get(4, 4), 0.0);
        for (c, r) in [(3, 4), (5, 4), (4, 3), (4, 5)] {
            assert!((d.get(c, r) - 0.1).abs() < 1e-15);
        }
        assert!((d.get(0, 0) - 0.1 * 32f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn no_occupied_cell_is_an_error() {
        let g = OccupancyGrid::filled(4, 4, 0.1, CellCode::Free);
        assert!(matches!(distance_transform(&g), Err(Error::NoOccupiedCell)));
    }

    #[test]
    fn matches_all_pairs_oracle_exactly() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for density in [0.01, 0.05, 0.2, 0.6] {
            for _ in 0..10 {
                let g = oracle::random_grid(&mut rng, 30..31, density);
                if g.count(CellCode::Occupied) == 0 {
                    continue;
                }
                let fast = distance_transform(&g).unwrap();
                let slow = oracle::distance_field_brute_force(&g);
                assert_eq!(fast.values(), &slow[..]);
            }
        }
    }

    #[test]
    fn lipschitz_between_neighbors() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(6);
        let g = oracle::random_grid(&mut rng, 40..41, 0.05);
        let d = distance_transform(&g).unwrap();
        let bound = g.resolution() * 2f64.sqrt() + 1e-12;
        for r in 0..g.height() - 1 {
            for c in 0..g.width() - 1 {
                for (c2, r2) in [(c + 1, r), (c, r + 1), (c + 1, r + 1)] {
                    assert!((d.get(c, r) - d.get(c2, r2)).abs() <= bound);
                }
            }
        }
    }

    #[test]
    fn surface_distance_is_zero_on_wall_faces() {
        let mut g = OccupancyGrid::filled(20, 20, 0.1, CellCode::Free);
        for row in 0..20 {
            g.set(10, row, CellCode::Occupied);
        }
        let d = distance_transform(&g).unwrap();
        assert!(d.surface_distance(10.0, 7.3) < 1e-12);
        assert!(d.surface_distance(11.0, 7.3) < 1e-12);
        assert!((d.surface_distance(8.0, 7.3) - 0.2).abs() < 1e-12);
    }
}
