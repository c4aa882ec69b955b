//! Filter and episode throughput on one thread vs the default rayon pool.
//!
//! Built with `--no-default-features` the library runs sequentially and
//! both pool sizes measure the same code path.

use activeloc::harness::{
    generate_map, run_episode, EpisodeConfig, MapGenConfig, Policy, PreparedMap, TaskKind, TaskSpec,
};
use activeloc::pfilter::{predict, soft_resample, update_weights, FilterConfig, ParticleSet};
use activeloc::simulator::{sense, OdomDelta, SimConfig};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::hint::black_box;

fn pools() -> Vec<(&'static str, rayon::ThreadPool)> {
    let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let all = rayon::ThreadPoolBuilder::new().build().unwrap();
    vec![("1 thread", one), ("default pool", all)]
}

fn filter_step(c: &mut Criterion) {
    let sim = SimConfig::default();
    let grid = generate_map(5, &MapGenConfig::default()).unwrap();
    let map = PreparedMap::new("bench", grid, sim.robot_radius).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let truth = map.trav.sample_pose(&map.grid, &mut rng).unwrap();
    let scan = sense(&truth, &map.grid, sim.n_beams, sim.fov, sim.max_range).unwrap();
    let cfg = FilterConfig::default();
    let odom = OdomDelta {
        dx: 0.2,
        dy: 0.0,
        dphi: 0.3,
    };

    let mut group = c.benchmark_group("filter step");
    group.sample_size(20);
    for k in [500usize, 3000] {
        let poses = (0..k)
            .map(|_| map.trav.sample_pose(&map.grid, &mut rng).unwrap())
            .collect();
        let start = ParticleSet::uniform(poses);
        for (name, pool) in pools() {
            group.bench_with_input(BenchmarkId::new(name, k), &start, |b, start| {
                let mut rng = ChaCha8Rng::seed_from_u64(2);
                pool.install(|| {
                    b.iter(|| {
                        let mut ps = start.clone();
                        predict(&mut ps, &odom, &cfg, &mut rng);
                        update_weights(&mut ps, &scan, &map.dfield, &map.grid, &cfg).unwrap();
                        black_box(soft_resample(&ps, cfg.alpha, cfg.scheme, &mut rng).unwrap())
                    })
                })
            });
        }
    }
    group.finish();
}

fn episodes(c: &mut Criterion) {
    let grid = generate_map(5, &MapGenConfig::default()).unwrap();
    let map = PreparedMap::new("bench", grid, SimConfig::default().robot_radius).unwrap();
    let cfg = EpisodeConfig::new(TaskSpec::new(TaskKind::SemiGlobal).with_horizon(20));
    let seeds: Vec<u64> = (0..8).collect();

    let mut group = c.benchmark_group("8 semi-global episodes");
    group.sample_size(10);
    for (name, pool) in pools() {
        group.bench_function(name, |b| {
            pool.install(|| {
                b.iter(|| {
                    let out = activeloc::par::map(&seeds, |&s| run_episode(&map, &cfg, &Policy::Turn, s).unwrap());
                    black_box(out)
                })
            })
        });
    }
    group.finish();
}

criterion_group!(benches, filter_step, episodes);
criterion_main!(benches);
