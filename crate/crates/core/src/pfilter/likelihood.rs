use super::{extract_local_map, FilterConfig, ParticleSet};
use crate::simulator::LidarScan;
use crate::worldmap::{CellCode, DistanceField, OccupancyGrid, Pose};
use crate::{par, Error, Result};

/// Scores a pose hypothesis against a scan. Implementations must be pure so
/// particles can be scored in parallel.
pub trait ObservationModel: Sync {
    fn log_likelihood(&self, pose: &Pose, scan: &LidarScan) -> f64;

    /// Scores many poses against one scan. Order-preserving.
    fn log_likelihoods(&self, poses: &[Pose], scan: &LidarScan) -> Vec<f64> {
        par::map(poses, |p| self.log_likelihood(p, scan))
    }
}

/// Endpoint model: each beam endpoint is scored by its distance `d` to the
/// nearest occupied surface, `ln(exp(−d²/2σ²) + ε)`. Max-range beams are
/// skipped.
pub struct LikelihoodField<'a> {
    grid: &'a OccupancyGrid,
    dfield: &'a DistanceField,
    sigma: f64,
    eps_floor: f64,
    table: BeamTable,
}

/// `f(a) = ln(exp(−a) + ε)` for `a = d²/2σ²`: exactly `−a` while `ε·eᵃ` is
/// below 1e-12, the constant `ln ε` once `e⁻ᵃ/ε` is below 1e-13, and linear
/// interpolation on a 0.005-spaced table in between (error < 1e-6).
struct BeamTable {
    a_exact: f64,
    a_max: f64,
    inv_step: f64,
    values: Vec<f64>,
    floor: f64,
}

impl BeamTable {
    const STEP: f64 = 0.005;

    fn new(eps: f64) -> Self {
        if eps <= 0.0 {
            return Self {
                a_exact: f64::INFINITY,
                a_max: f64::INFINITY,
                inv_step: 0.0,
                values: Vec::new(),
                floor: f64::NEG_INFINITY,
            };
        }
        let a_exact = (1e-12 / eps).ln().max(0.0);
        let a_max = a_exact.max((1.0 / eps).ln() + 30.0);
        let n = ((a_max - a_exact) / Self::STEP).ceil() as usize + 2;
        let values = (0..n)
            .map(|i| {
                let a = a_exact + i as f64 * Self::STEP;
                ((-a).exp() + eps).ln()
            })
            .collect();
        Self {
            a_exact,
            a_max,
            inv_step: 1.0 / Self::STEP,
            values,
            floor: eps.ln(),
        }
    }

    #[inline]
    fn eval(&self, a: f64) -> f64 {
        if a < self.a_exact {
            -a
        } else if a >= self.a_max {
            self.floor
        } else {
            let t = (a - self.a_exact) * self.inv_step;
            let i = t as usize;
            let f = t - i as f64;
            self.values[i] * (1.0 - f) + self.values[i + 1] * f
        }
    }
}

impl<'a> LikelihoodField<'a> {
    pub fn new(grid: &'a OccupancyGrid, dfield: &'a DistanceField, sigma: f64, eps_floor: f64) -> Result<Self> {
        if !dfield.matches(grid) {
            return Err(Error::InvalidArgument("distance field does not match the grid".into()));
        }
        if !(sigma > 0.0) {
            return Err(Error::InvalidArgument(format!("sigma must be positive, got {sigma}")));
        }
        Ok(Self {
            grid,
            dfield,
            sigma,
            eps_floor,
            table: BeamTable::new(eps_floor),
        })
    }

    pub fn from_config(grid: &'a OccupancyGrid, dfield: &'a DistanceField, cfg: &FilterConfig) -> Result<Self> {
        Self::new(grid, dfield, cfg.sigma_lhood, cfg.eps_floor)
    }

    /// Per-beam term for an endpoint at surface distance `d`.
    #[inline]
    pub fn beam_term(&self, d: f64) -> f64 {
        ((-d * d / (2.0 * self.sigma * self.sigma)).exp() + self.eps_floor).ln()
    }

    /// Endpoints in the robot frame for every beam that returned a hit.
    fn endpoints(scan: &LidarScan) -> Vec<(f64, f64)> {
        scan.ranges
            .iter()
            .enumerate()
            .filter(|(_, &r)| r < scan.max_range)
            .map(|(i, &r)| {
                let (s, c) = scan.beam_angle(i).sin_cos();
                (r * c, r * s)
            })
            .collect()
    }

    fn score(&self, pose: &Pose, ends: &[(f64, f64)]) -> f64 {
        let (s, c) = pose.phi.sin_cos();
        let k = 1.0 / (2.0 * self.sigma * self.sigma);
        ends.iter()
            .map(|&(u, v)| {
                let (x, y) = (pose.x + c * u - s * v, pose.y + s * u + c * v);
                let (gx, gy) = self.grid.world_to_grid(x, y);
                let d = self.dfield.surface_distance(gx, gy);
                self.table.eval(d * d * k)
            })
            .sum()
    }
}

impl ObservationModel for LikelihoodField<'_> {
    fn log_likelihood(&self, pose: &Pose, scan: &LidarScan) -> f64 {
        self.score(pose, &Self::endpoints(scan))
    }

    fn log_likelihoods(&self, poses: &[Pose], scan: &LidarScan) -> Vec<f64> {
        let ends = Self::endpoints(scan);
        par::map(poses, |p| self.score(p, &ends))
    }
}

/// Scores a scan against the particle-centric local map: every endpoint that
/// lands on an occupied local cell earns `ln p_hit`, a free cell `ln p_free`,
/// an unexplored cell `ln p_unknown`. Endpoints outside the window are
/// ignored.
pub struct LocalMapModel<'a> {
    grid: &'a OccupancyGrid,
    size: usize,
    pub p_hit: f64,
    pub p_free: f64,
    pub p_unknown: f64,
}

impl<'a> LocalMapModel<'a> {
    pub fn new(grid: &'a OccupancyGrid, size: usize) -> Result<Self> {
        if size % 2 == 0 {
            return Err(Error::InvalidArgument(format!(
                "local map size must be odd, got {size}"
            )));
        }
        Ok(Self {
            grid,
            size,
            p_hit: 0.9,
            p_free: 0.05,
            p_unknown: 0.3,
        })
    }
}

impl ObservationModel for LocalMapModel<'_> {
    fn log_likelihood(&self, pose: &Pose, scan: &LidarScan) -> f64 {
        let local = extract_local_map(self.grid, pose, self.size).expect("odd size checked");
        let res = self.grid.resolution();
        let half = (self.size / 2) as f64;
        scan.ranges
            .iter()
            .enumerate()
            .filter(|(_, &r)| r < scan.max_range)
            .map(|(i, &r)| {
                let (s, c) = scan.beam_angle(i).sin_cos();
                let col = (r * c / res + half + 0.5).floor() as i64;
                let row = (r * s / res + half + 0.5).floor() as i64;
                match local.get_signed(col, row) {
                    Some(CellCode::Occupied) => self.p_hit.ln(),
                    Some(CellCode::Free) => self.p_free.ln(),
                    Some(CellCode::Unexplored) => self.p_unknown.ln(),
                    None => 0.0,
                }
            })
            .sum()
    }
}

/// Likelihood-field update: adds each particle's log-likelihood to its log
/// weight, then renormalizes.
pub fn update_weights(
    ps: &mut ParticleSet,
    scan: &LidarScan,
    dfield: &DistanceField,
    grid: &OccupancyGrid,
    cfg: &FilterConfig,
) -> Result<()> {
    let model = LikelihoodField::from_config(grid, dfield, cfg)?;
    update_weights_with(ps, scan, &model)
}

/// Weight update with any observation model.
pub fn update_weights_with<M: ObservationModel + ?Sized>(
    ps: &mut ParticleSet,
    scan: &LidarScan,
    model: &M,
) -> Result<()> {
    let poses: Vec<Pose> = ps.particles().iter().map(|p| p.pose).collect();
    let ll = model.log_likelihoods(&poses, scan);
    for (p, l) in ps.particles_mut().iter_mut().zip(ll) {
        p.log_weight += l;
    }
    ps.normalize()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pfilter::Particle;
    use crate::simulator::sense;
    use crate::worldmap::distance_transform;
    use rand::{Rng, SeedableRng};
    use std::f64::consts::PI;

    fn walled_room() -> OccupancyGrid {
        let mut g = OccupancyGrid::filled(60, 50, 0.1, CellCode::Free);
        for i in 0..60 {
            g.set(i, 0, CellCode::Occupied);
            g.set(i, 49, CellCode::Occupied);
        }
        for j in 0..50 {
            g.set(0, j, CellCode::Occupied);
            g.set(59, j, CellCode::Occupied);
        }
        for j in 10..25 {
            g.set(20, j, CellCode::Occupied);
            g.set(21, j, CellCode::Occupied);
        }
        for i in 35..50 {
            g.set(i, 35, CellCode::Occupied);
        }
        g
    }

    #[test]
    fn beam_table_tracks_the_exact_term() {
        let g = OccupancyGrid::filled(4, 4, 0.1, CellCode::Occupied);
        let df = distance_transform(&g).unwrap();
        for eps in [1e-9, 1e-3, 0.2] {
            let lf = LikelihoodField::new(&g, &df, 0.25, eps).unwrap();
            for i in 0..20_000 {
                let d = i as f64 * 1e-4;
                let a = d * d / (2.0 * 0.25 * 0.25);
                assert!((lf.table.eval(a) - lf.beam_term(d)).abs() < 1e-6, "eps {eps} d {d}");
            }
        }
        let lf = LikelihoodField::new(&g, &df, 0.25, 0.0).unwrap();
        assert_eq!(lf.table.eval(3.0), -3.0);
    }

    #[test]
    fn true_pose_scores_highest() {
        let g = walled_room();
        let d = distance_transform(&g).unwrap();
        let truth = Pose::new(3.3, 2.7, 0.4);
        let scan = sense(&truth, &g, 60, 240f64.to_radians(), 10.0).unwrap();
        let cfg = FilterConfig::default();
        let model = LikelihoodField::from_config(&g, &d, &cfg).unwrap();
        let best = model.log_likelihood(&truth, &scan);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..500 {
            let off = Pose::new(
                truth.x + rng.random_range(-1.0..1.0),
                truth.y + rng.random_range(-1.0..1.0),
                truth.phi + rng.random_range(-PI..PI),
            );
            if off.distance(&truth) < 0.1 && (off.phi - truth.phi).abs() < 0.1 {
                continue;
            }
            assert!(model.log_likelihood(&off, &scan) < best);
        }
    }

    #[test]
    fn max_range_scan_leaves_weights_unchanged() {
        let g = walled_room();
        let d = distance_transform(&g).unwrap();
        let ps0 = ParticleSet::from_particles(vec![
            Particle {
                pose: Pose::new(1.0, 1.0, 0.0),
                log_weight: -0.1,
            },
            Particle {
                pose: Pose::new(2.0, 3.0, 1.0),
                log_weight: -2.0,
            },
            Particle {
                pose: Pose::new(4.0, 1.5, -2.0),
                log_weight: -1.0,
            },
        ])
        .unwrap();
        let mut ps = ps0.clone();
        let scan = LidarScan {
            fov: 4.0,
            max_range: 5.0,
            ranges: vec![5.0; 30],
        };
        update_weights(&mut ps, &scan, &d, &g, &FilterConfig::default()).unwrap();
        for (a, b) in ps.particles().iter().zip(ps0.particles()) {
            assert!((a.log_weight - b.log_weight).abs() < 1e-12);
        }
    }

    #[test]
    fn hand_set_endpoint_distances() {
        // wall face at x = 3.0; beam along +x of length 1.0
        let mut g = OccupancyGrid::filled(60, 60, 0.1, CellCode::Free);
        for j in 0..60 {
            g.set(30, j, CellCode::Occupied);
        }
        let d = distance_transform(&g).unwrap();
        let sigma = 0.2;
        let model = LikelihoodField::new(&g, &d, sigma, 0.0).unwrap();
        let scan = LidarScan {
            fov: 0.0,
            max_range: 10.0,
            ranges: vec![1.0],
        };
        let ll: Vec<f64> = [2.0, 2.0 - sigma, 2.0 - 2.0 * sigma]
            .iter()
            .map(|&x| model.log_likelihood(&Pose::new(x, 3.05, 0.0), &scan))
            .collect();
        let r: Vec<f64> = ll.iter().map(|l| (l - ll[0]).exp()).collect();
        assert!((r[0] - 1.0).abs() < 1e-9);
        assert!((r[1] - (-0.5f64).exp()).abs() < 1e-9, "{r:?}");
        assert!((r[2] - (-2.0f64).exp()).abs() < 1e-9, "{r:?}");
    }

    #[test]
    fn uniform_weight_scaling_cancels() {
        let g = walled_room();
        let d = distance_transform(&g).unwrap();
        let truth = Pose::new(3.3, 2.7, 0.4);
        let scan = sense(&truth, &g, 60, 240f64.to_radians(), 10.0).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
        let parts: Vec<Particle> = (0..50)
            .map(|_| Particle {
                pose: Pose::new(
                    rng.random_range(1.0..5.0),
                    rng.random_range(1.0..4.0),
                    rng.random_range(-PI..PI),
                ),
                log_weight: rng.random_range(-3.0..0.0),
            })
            .collect();
        let shifted: Vec<Particle> = parts
            .iter()
            .map(|p| Particle {
                log_weight: p.log_weight + 7.5,
                ..*p
            })
            .collect();
        let mut a = ParticleSet::from_particles_unnormalized(parts).unwrap();
        let mut b = ParticleSet::from_particles_unnormalized(shifted).unwrap();
        let cfg = FilterConfig::default();
        update_weights(&mut a, &scan, &d, &g, &cfg).unwrap();
        update_weights(&mut b, &scan, &d, &g, &cfg).unwrap();
        for (x, y) in a.particles().iter().zip(b.particles()) {
            assert!((x.log_weight - y.log_weight).abs() < 1e-9);
        }
        assert!((a.total_weight() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn local_map_model_prefers_truth() {
        let g = walled_room();
        let truth = Pose::new(3.3, 2.7, 0.4);
        let scan = sense(&truth, &g, 60, 240f64.to_radians(), 10.0).unwrap();
        let model = LocalMapModel::new(&g, 81).unwrap();
        let best = model.log_likelihood(&truth, &scan);
        let off = Pose::new(2.0, 3.5, -1.0);
        assert!(model.log_likelihood(&off, &scan) < best);
    }
}
