//! Invariant and oracle suite behind the `selftest` command.

use crate::harness::{generate_map, MapGenConfig};
use crate::harness::{run_episode, EpisodeConfig, Policy, PreparedMap, TaskKind, TaskSpec};
use crate::pfilter::{extract_local_map, gradient_check, GradientInstance};
use crate::policies::{compute_reward, path_cost, plan_path};
use crate::simulator::{sense, SimConfig};
use crate::worldmap::{distance_transform, parse_map, raycast, write_map, CellCode, Traversability};
use crate::{oracle, pfilter, Pose};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;
use std::time::Instant;

#[derive(Clone, Debug)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

type Outcome = std::result::Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> std::result::Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

pub fn raycast_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut grazes = 0;
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let g = oracle::random_grid(&mut rng, 20..60, 0.15);
        let from = oracle::random_free_point(&mut rng, &g);
        let angle = rng.random_range(-PI..PI);
        let max_range = rng.random_range(0.5..8.0);
        let fast = raycast(&g, &from, angle, max_range).map_err(|e| e.to_string())?;
        let mut slow = oracle::raycast_fine_step(&g, from.x, from.y, angle, max_range);
        if (fast - slow).abs() > g.resolution() {
            grazes += 1;
            slow = oracle::raycast_subdivided(&g, from.x, from.y, angle, max_range, 1000);
        }
        worst = worst.max((fast - slow).abs());
        ensure((fast - slow).abs() <= g.resolution(), || {
            format!("fast {fast} vs oracle {slow} at {from:?}")
        })?;
    }
    ensure(grazes <= 20, || format!("{grazes} rays needed the refined oracle"))?;
    Ok(format!(
        "200 rays, max |Δ| {worst:.4} m, {grazes} corner grazes refined"
    ))
}

pub fn distance_transform_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(102);
    for i in 0..20 {
        let mut g = oracle::random_grid(&mut rng, 30..31, 0.05);
        g.set(i, i, CellCode::Occupied);
        let fast = distance_transform(&g).map_err(|e| e.to_string())?;
        let slow = oracle::distance_field_brute_force(&g);
        ensure(fast.values() == slow.as_slice(), || {
            format!("grid {i} differs from all-pairs minimum")
        })?;
    }
    Ok("20 grids of 30×30, exact".into())
}

pub fn astar_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(103);
    let mut solved = 0;
    for _ in 0..100 {
        let g = oracle::random_grid(&mut rng, 15..35, 0.08);
        let trav = Traversability::new(&g, 0.05);
        let cells = trav.cells();
        if cells.len() < 2 {
            continue;
        }
        let a = cells[rng.random_range(0..cells.len())];
        let b = cells[rng.random_range(0..cells.len())];
        let want = oracle::dijkstra_cost(g.width(), g.height(), &|c, r| trav.is_traversable(c, r), a, b);
        match (plan_path(&trav, g.width(), g.height(), a, b), want) {
            (Ok(p), Some(w)) => {
                ensure((path_cost(&p) - w).abs() < 1e-9, || {
                    format!("A* {} vs Dijkstra {w}", path_cost(&p))
                })?;
                solved += 1;
            }
            (Err(_), None) => {}
            (got, want) => return Err(format!("reachability disagrees: {:?} vs {want:?}", got.is_ok())),
        }
    }
    Ok(format!("100 instances ({solved} reachable), costs within 1e-9"))
}

pub fn crop_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(104);
    for _ in 0..50 {
        let g = oracle::random_grid(&mut rng, 20..50, 0.3);
        let pose = Pose::new(
            rng.random_range(-1.0..6.0),
            rng.random_range(-1.0..6.0),
            rng.random_range(-PI..PI),
        );
        let size = 2 * rng.random_range(1..20) + 1;
        let m = extract_local_map(&g, &pose, size).map_err(|e| e.to_string())?;
        for row in 0..size {
            for col in 0..size {
                let (c, r) = oracle::crop_source_cell(&g, &pose, size, col, row);
                let want = g.get_signed(c, r).unwrap_or(CellCode::Unexplored);
                ensure(m.get(col, row) == want, || {
                    format!("cell ({col},{row}) of crop at {pose:?}")
                })?;
            }
        }
    }
    Ok("50 crops, every cell matches the inverse mapping".into())
}

pub fn map_round_trip() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(105);
    for _ in 0..50 {
        let g = oracle::random_grid(&mut rng, 1..30, 0.3);
        let text = write_map(&g);
        let back = parse_map(&text).map_err(|e| e.to_string())?;
        ensure(write_map(&back) == text && back == g, || {
            "map text round trip differs".into()
        })?;
    }
    Ok("50 grids, byte-identical".into())
}

pub fn sense_matches_raycast() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(106);
    for _ in 0..50 {
        let g = oracle::random_grid(&mut rng, 20..40, 0.1);
        let pose = oracle::random_free_point(&mut rng, &g);
        let cfg = SimConfig::default();
        let scan = sense(&pose, &g, 240, cfg.fov, cfg.max_range).map_err(|e| e.to_string())?;
        for (i, &r) in scan.ranges.iter().enumerate() {
            let want = raycast(&g, &pose, pose.phi + scan.beam_angle(i), cfg.max_range).map_err(|e| e.to_string())?;
            ensure(r == want, || format!("beam {i}: {r} vs {want}"))?;
        }
    }
    Ok("50 scans of 240 beams, exact".into())
}

pub fn gradient() -> Outcome {
    let mut worst: f64 = 0.0;
    for seed in 0..20 {
        let inst = GradientInstance::random(6, seed);
        let r = gradient_check(&inst, 0.5);
        worst = worst.max(r.max_relative_error);
        ensure(r.analytic_norm > 0.0, || {
            format!("seed {seed}: zero gradient at alpha 0.5")
        })?;
        let one = gradient_check(&inst, 1.0);
        ensure(one.analytic.iter().all(|&g| g == 0.0), || {
            format!("seed {seed}: nonzero gradient at alpha 1")
        })?;
    }
    ensure(worst < 1e-4, || format!("relative error {worst:e}"))?;
    Ok(format!("alpha 0.5 max rel. error {worst:.2e}; alpha 1 exactly zero"))
}

pub fn loss_and_reward() -> Outcome {
    let truth = Pose::new(0.0, 0.0, 0.0);
    let loss = pfilter::pose_loss(&Pose::new(0.3, 0.1, 0.0), &truth, 0.36);
    ensure((loss - 0.10).abs() < 1e-15, || format!("pose loss {loss}"))?;
    let turned = pfilter::pose_loss(&Pose::new(0.0, 0.0, 0.5), &truth, 0.36);
    ensure((turned - 0.36 * 0.25).abs() < 1e-15, || {
        format!("angular loss {turned}")
    })?;
    ensure(compute_reward(0.0, true, 0.1) == -0.1, || "collision penalty".into())?;
    ensure(compute_reward(0.1, false, 0.1) == -0.1, || "loss-only reward".into())?;
    Ok("constants reproduced".into())
}

pub fn episode_determinism() -> Outcome {
    let grid = generate_map(3, &MapGenConfig::default()).map_err(|e| e.to_string())?;
    let map = PreparedMap::new("selftest", grid, SimConfig::default().robot_radius).map_err(|e| e.to_string())?;
    for (kind, policy) in [
        (TaskKind::Tracking, Policy::Goalnav),
        (TaskKind::SemiGlobal, Policy::Avoid),
    ] {
        let cfg = EpisodeConfig::new(TaskSpec::new(kind).with_horizon(10));
        let a = run_episode(&map, &cfg, &policy, 42).map_err(|e| e.to_string())?;
        let b = run_episode(&map, &cfg, &policy, 42).map_err(|e| e.to_string())?;
        ensure(a.to_log() == b.to_log(), || format!("{kind} episode logs differ"))?;
    }
    Ok("repeated episodes byte-identical".into())
}

/// Runs every check, timing each.
pub fn run_selftest() -> Vec<Check> {
    let checks: [(&'static str, fn() -> Outcome); 9] = [
        ("raycast vs fine-step oracle", raycast_oracle),
        ("distance transform vs all-pairs oracle", distance_transform_oracle),
        ("A* vs Dijkstra oracle", astar_oracle),
        ("local crop vs inverse-mapping oracle", crop_oracle),
        ("map file round trip", map_round_trip),
        ("sense vs per-beam raycast", sense_matches_raycast),
        ("soft-resampling gradient check", gradient),
        ("loss and reward constants", loss_and_reward),
        ("episode determinism", episode_determinism),
    ];
    checks
        .iter()
        .map(|&(name, f)| {
            let t = Instant::now();
            let out = f();
            Check {
                name,
                passed: out.is_ok(),
                detail: out.unwrap_or_else(|e| e),
                seconds: t.elapsed().as_secs_f64(),
            }
        })
        .collect()
}
