//! End-to-end checks through the on-disk formats.

use activeloc::harness::{
    generate_map, run_episode, run_episode_dumping, EpisodeConfig, EpisodeResult, LearnedPolicy, MapGenConfig, Policy,
    PreparedMap, TaskKind, TaskSpec,
};
use activeloc::pfilter::parse_dump;
use activeloc::policies::{load_policy, save_policy, Architecture, PolicyParams};
use activeloc::worldmap::{load_map, save_map, write_map, DEFAULT_ROBOT_RADIUS};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::sync::Arc;

fn prepared(seed: u64) -> PreparedMap {
    let grid = generate_map(seed, &MapGenConfig::default()).unwrap();
    PreparedMap::new("m", grid, DEFAULT_ROBOT_RADIUS).unwrap()
}

#[test]
fn generated_map_survives_a_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let grid = generate_map(11, &MapGenConfig::default()).unwrap();
    let path = dir.path().join("m.ogmap");
    save_map(&grid, &path).unwrap();
    let back = load_map(&path).unwrap();
    assert_eq!(back, grid);
    assert_eq!(write_map(&back), std::fs::read_to_string(&path).unwrap());
}

#[test]
fn dumped_episode_matches_the_plain_run() {
    let dir = tempfile::tempdir().unwrap();
    let map = prepared(4);
    let cfg = EpisodeConfig::new(TaskSpec::new(TaskKind::Tracking).with_horizon(6));
    let plain = run_episode(&map, &cfg, &Policy::Goalnav, 9).unwrap();
    let dumped = run_episode_dumping(&map, &cfg, &Policy::Goalnav, 9, dir.path()).unwrap();
    assert_eq!(plain, dumped);

    let (step, alpha, ps) =
        parse_dump(&std::fs::read_to_string(dir.path().join("step_0006.particles")).unwrap()).unwrap();
    assert_eq!((step, alpha), (6, cfg.filter.alpha));
    assert_eq!(ps.len(), cfg.task.n_particles);
    assert!(dir.path().join("step_0006_ch0.pgm").exists());

    let back = EpisodeResult::from_log(&plain.to_log()).unwrap();
    assert_eq!(back.steps.len(), plain.steps.len());
    assert!((back.final_position_error - plain.final_position_error).abs() < 1e-9);
}

#[test]
fn saved_policy_drives_identically() {
    let dir = tempfile::tempdir().unwrap();
    let arch = Architecture::default();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let params = PolicyParams((0..arch.param_dim()).map(|_| rng.random_range(-0.2..0.2)).collect());
    let path = dir.path().join("p.policy");
    save_policy(&path, &arch, &params).unwrap();
    let (arch2, params2) = load_policy(&path).unwrap();
    assert_eq!(params2, params);

    let map = prepared(2);
    let cfg = EpisodeConfig::new(TaskSpec::new(TaskKind::SemiGlobal).with_horizon(5));
    let a = run_episode(
        &map,
        &cfg,
        &Policy::Learned(Arc::new(LearnedPolicy { arch, params })),
        1,
    )
    .unwrap();
    let b = run_episode(
        &map,
        &cfg,
        &Policy::Learned(Arc::new(LearnedPolicy {
            arch: arch2,
            params: params2,
        })),
        1,
    )
    .unwrap();
    assert_eq!(a, b);
}
