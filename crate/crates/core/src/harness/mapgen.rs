//! Procedural floorplans: a rectangular or L-shaped building split into
//! rooms by walls with doorways, furnished with rectangular blocks.
//! Every generated map has a single connected traversable region.

use crate::rng::{derive_seed, stream, Stream};
use crate::worldmap::{load_map, save_map, CellCode, OccupancyGrid, Pose, Traversability};
use crate::{Error, Result};
use rand::Rng;
use std::collections::VecDeque;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

#[derive(Clone, Debug, PartialEq)]
pub struct MapGenConfig {
    pub min_side: usize,
    pub max_side: usize,
    pub resolution: f64,
    /// Rooms narrower than twice this are not split further.
    pub min_room: usize,
    pub door_width: usize,
    pub max_furniture_per_room: usize,
    pub robot_radius: f64,
}

impl Default for MapGenConfig {
    fn default() -> Self {
        Self {
            min_side: 60,
            max_side: 80,
            resolution: 0.1,
            min_room: 20,
            door_width: 9,
            max_furniture_per_room: 3,
            robot_radius: crate::worldmap::DEFAULT_ROBOT_RADIUS,
        }
    }
}

#[derive(Clone, Copy, Debug)]
struct Rect {
    c0: usize,
    r0: usize,
    c1: usize,
    r1: usize,
}

impl Rect {
    fn w(&self) -> usize {
        self.c1 - self.c0
    }
    fn h(&self) -> usize {
        self.r1 - self.r0
    }
}

/// One floorplan from `seed`. Candidate layouts that fail the connectivity
/// check are discarded and redrawn from the same stream.
pub fn generate_map(seed: u64, cfg: &MapGenConfig) -> Result<OccupancyGrid> {
    if cfg.min_side < 2 * cfg.min_room.max(cfg.door_width + 4) || cfg.max_side < cfg.min_side {
        return Err(Error::InvalidArgument(
            "map size too small for the room and door sizes".into(),
        ));
    }
    let mut rng = stream(seed, Stream::MapGen);
    for _ in 0..100 {
        let grid = draw_layout(&mut rng, cfg)?;
        if single_component(&grid, cfg.robot_radius) {
            return Ok(grid);
        }
    }
    Err(Error::InvalidArgument(format!(
        "no connected layout found for seed {seed}"
    )))
}

fn draw_layout<R: Rng + ?Sized>(rng: &mut R, cfg: &MapGenConfig) -> Result<OccupancyGrid> {
    let w = rng.random_range(cfg.min_side..=cfg.max_side);
    let h = rng.random_range(cfg.min_side..=cfg.max_side);
    // building footprint: outer ring of unexplored cells, optional corner cut
    let mut inside = vec![false; w * h];
    let cut = if rng.random_bool(0.5) {
        let cw = rng.random_range(w * 3 / 10..=w * 2 / 5);
        let ch = rng.random_range(h * 3 / 10..=h * 2 / 5);
        Some((rng.random_range(0..4), cw, ch))
    } else {
        None
    };
    for r in 1..h - 1 {
        for c in 1..w - 1 {
            let in_cut = cut.is_some_and(|(corner, cw, ch)| {
                let right = corner & 1 == 1;
                let top = corner & 2 == 2;
                let cx = if right { c >= w - 1 - cw } else { c < 1 + cw };
                let cy = if top { r >= h - 1 - ch } else { r < 1 + ch };
                cx && cy
            });
            inside[r * w + c] = !in_cut;
        }
    }
    let mut cells = vec![CellCode::Unexplored; w * h];
    for r in 0..h {
        for c in 0..w {
            if !inside[r * w + c] {
                continue;
            }
            let boundary = (-1i64..=1).any(|dr| {
                (-1i64..=1).any(|dc| {
                    let (rr, cc) = (r as i64 + dr, c as i64 + dc);
                    rr < 0 || cc < 0 || rr >= h as i64 || cc >= w as i64 || !inside[rr as usize * w + cc as usize]
                })
            });
            cells[r * w + c] = if boundary { CellCode::Occupied } else { CellCode::Free };
        }
    }
    let mut grid = OccupancyGrid::new(w, h, cfg.resolution, Pose::new(0.0, 0.0, 0.0), cells)?;

    let mut rooms = Vec::new();
    split(
        &mut grid,
        rng,
        cfg,
        Rect {
            c0: 2,
            r0: 2,
            c1: w - 2,
            r1: h - 2,
        },
        &mut rooms,
        0,
    );
    for room in rooms {
        let n = rng.random_range(0..=cfg.max_furniture_per_room);
        for _ in 0..n {
            furnish(&mut grid, rng, room);
        }
    }
    Ok(grid)
}

/// Recursively splits `rect` (free interior, exclusive upper bounds) with a
/// one-cell wall that has a doorway, collecting the leaf rooms.
fn split<R: Rng + ?Sized>(
    grid: &mut OccupancyGrid,
    rng: &mut R,
    cfg: &MapGenConfig,
    rect: Rect,
    rooms: &mut Vec<Rect>,
    depth: usize,
) {
    let can_v = rect.w() >= 2 * cfg.min_room + 1;
    let can_h = rect.h() >= 2 * cfg.min_room + 1;
    if depth >= 3 || (!can_v && !can_h) || (depth >= 1 && rng.random_bool(0.25)) {
        rooms.push(rect);
        return;
    }
    let vertical = if can_v && can_h { rect.w() >= rect.h() } else { can_v };
    let (lo, hi, along_lo, along_hi) = if vertical {
        (rect.c0, rect.c1, rect.r0, rect.r1)
    } else {
        (rect.r0, rect.r1, rect.c0, rect.c1)
    };
    let at = rng.random_range(lo + cfg.min_room..hi - cfg.min_room);
    let door_lo = rng.random_range(along_lo + 1..along_hi - cfg.door_width);
    let door = door_lo..door_lo + cfg.door_width;
    for t in along_lo..along_hi {
        let (c, r) = if vertical { (at, t) } else { (t, at) };
        if grid.get(c, r) == CellCode::Free && !door.contains(&t) {
            grid.set(c, r, CellCode::Occupied);
        }
    }
    let (a, b) = if vertical {
        (Rect { c1: at, ..rect }, Rect { c0: at + 1, ..rect })
    } else {
        (Rect { r1: at, ..rect }, Rect { r0: at + 1, ..rect })
    };
    split(grid, rng, cfg, a, rooms, depth + 1);
    split(grid, rng, cfg, b, rooms, depth + 1);
}

fn furnish<R: Rng + ?Sized>(grid: &mut OccupancyGrid, rng: &mut R, room: Rect) {
    let fw = rng.random_range(3..=8usize).min(room.w() / 3);
    let fh = rng.random_range(3..=8usize).min(room.h() / 3);
    if fw == 0 || fh == 0 {
        return;
    }
    let c0 = rng.random_range(room.c0..=room.c1 - fw);
    let r0 = rng.random_range(room.r0..=room.r1 - fh);
    for r in r0..r0 + fh {
        for c in c0..c0 + fw {
            if grid.get(c, r) == CellCode::Free {
                grid.set(c, r, CellCode::Occupied);
            }
        }
    }
}

/// True when the traversable cells form one 4-connected region that covers
/// at least a quarter of the free cells.
pub fn single_component(grid: &OccupancyGrid, robot_radius: f64) -> bool {
    let trav = Traversability::new(grid, robot_radius);
    let cells = trav.cells();
    let Some(&first) = cells.first() else {
        return false;
    };
    if cells.len() * 4 < grid.count(CellCode::Free) {
        return false;
    }
    let (w, h) = (grid.width(), grid.height());
    let mut seen = vec![false; w * h];
    let mut queue = VecDeque::from([first]);
    seen[first.1 * w + first.0] = true;
    let mut reached = 0;
    while let Some((c, r)) = queue.pop_front() {
        reached += 1;
        let nbrs = [(c.wrapping_sub(1), r), (c + 1, r), (c, r.wrapping_sub(1)), (c, r + 1)];
        for (nc, nr) in nbrs {
            if nc < w && nr < h && !seen[nr * w + nc] && trav.is_traversable(nc, nr) {
                seen[nr * w + nc] = true;
                queue.push_back((nc, nr));
            }
        }
    }
    reached == cells.len()
}

/// Seen (training) or unseen (held-out) maps.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Split {
    Train,
    Test,
}

impl Split {
    pub fn name(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Test => "test",
        }
    }
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.name())
    }
}

impl FromStr for Split {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "train" | "seen" => Ok(Split::Train),
            "test" | "unseen" => Ok(Split::Test),
            _ => Err(Error::Config(format!("unknown split `{s}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CorpusEntry {
    /// `train_00`, `test_02`, ...
    pub id: String,
    pub split: Split,
    pub grid: OccupancyGrid,
}

/// `n_train` training maps then `n_test` held-out maps, each from its own
/// derived seed.
pub fn generate_corpus(seed: u64, n_train: usize, n_test: usize, cfg: &MapGenConfig) -> Result<Vec<CorpusEntry>> {
    let specs: Vec<(Split, usize)> = (0..n_train)
        .map(|i| (Split::Train, i))
        .chain((0..n_test).map(|i| (Split::Test, i)))
        .collect();
    crate::par::map_range(specs.len(), |k| {
        let (split, i) = specs[k];
        let grid = generate_map(derive_seed(seed, k as u64), cfg)?;
        Ok(CorpusEntry {
            id: format!("{}_{i:02}", split.name()),
            split,
            grid,
        })
    })
    .into_iter()
    .collect()
}

pub fn write_corpus(dir: impl AsRef<Path>, corpus: &[CorpusEntry]) -> Result<()> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir)?;
    for e in corpus {
        save_map(&e.grid, dir.join(format!("{}.ogmap", e.id)))?;
    }
    Ok(())
}

/// Loads every `*.ogmap` in `dir`, sorted by name; the split is the part of
/// the file stem before the first underscore.
pub fn load_corpus(dir: impl AsRef<Path>) -> Result<Vec<CorpusEntry>> {
    let mut paths: Vec<_> = std::fs::read_dir(dir.as_ref())?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "ogmap"))
        .collect();
    paths.sort();
    paths
        .into_iter()
        .map(|p| {
            let id = p.file_stem().and_then(|s| s.to_str()).unwrap_or_default().to_string();
            let prefix = id.split('_').next().unwrap_or_default();
            let split = prefix
                .parse::<Split>()
                .map_err(|_| Error::Config(format!("map `{id}` has no train_/test_ prefix")))?;
            Ok(CorpusEntry {
                grid: load_map(&p)?,
                id,
                split,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn maps_are_connected_and_reproducible() {
        let cfg = MapGenConfig::default();
        for seed in 0..12 {
            let g = generate_map(seed, &cfg).unwrap();
            assert!(single_component(&g, cfg.robot_radius));
            assert!(g.count(CellCode::Occupied) > 0 && g.count(CellCode::Unexplored) > 0);
            assert!((cfg.min_side..=cfg.max_side).contains(&g.width()));
            assert_eq!(generate_map(seed, &cfg).unwrap(), g);
        }
        assert_ne!(generate_map(0, &cfg).unwrap(), generate_map(1, &cfg).unwrap());
    }

    #[test]
    fn corpus_round_trip_on_disk() {
        let cfg = MapGenConfig::default();
        let corpus = generate_corpus(5, 3, 2, &cfg).unwrap();
        let ids: Vec<_> = corpus.iter().map(|e| e.id.as_str()).collect();
        assert_eq!(ids, ["train_00", "train_01", "train_02", "test_00", "test_01"]);
        let dir = tempfile::tempdir().unwrap();
        write_corpus(dir.path(), &corpus).unwrap();
        let mut back = load_corpus(dir.path()).unwrap();
        back.sort_by_key(|e| (e.split, e.id.clone()));
        assert_eq!(back, corpus);
    }

    #[test]
    fn disconnected_grid_is_detected() {
        let mut g = OccupancyGrid::filled(40, 20, 0.1, CellCode::Free);
        for r in 0..20 {
            g.set(20, r, CellCode::Occupied);
        }
        assert!(!single_component(&g, 0.18));
    }
}
