use crate::worldmap::Traversability;
use crate::{Error, Result};
use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::SQRT_2;

#[derive(PartialEq)]
struct Node {
    f: f64,
    g: f64,
    idx: usize,
}

impl Eq for Node {}

impl Ord for Node {
    fn cmp(&self, o: &Self) -> Ordering {
        // min-heap on f, then prefer deeper nodes, then index for determinism
        o.f.total_cmp(&self.f)
            .then(self.g.total_cmp(&o.g))
            .then(o.idx.cmp(&self.idx))
    }
}

impl PartialOrd for Node {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

#[inline]
fn octile(a: (usize, usize), b: (usize, usize)) -> f64 {
    let dx = a.0.abs_diff(b.0) as f64;
    let dy = a.1.abs_diff(b.1) as f64;
    dx.max(dy) + (SQRT_2 - 1.0) * dx.min(dy)
}

/// Shortest 8-connected path over traversable cells (diagonal steps cost
/// √2), found with A* under the octile heuristic. Includes both endpoints.
pub fn plan_path(
    trav: &Traversability,
    width: usize,
    height: usize,
    from: (usize, usize),
    to: (usize, usize),
) -> Result<Vec<(usize, usize)>> {
    if !trav.is_traversable(from.0, from.1) || !trav.is_traversable(to.0, to.1) {
        return Err(Error::NoPath { from, to });
    }
    if from == to {
        return Ok(vec![from]);
    }
    let n = width * height;
    let idx = |c: (usize, usize)| c.1 * width + c.0;
    let mut g = vec![f64::INFINITY; n];
    let mut parent = vec![usize::MAX; n];
    let mut closed = vec![false; n];
    let mut open = BinaryHeap::new();
    g[idx(from)] = 0.0;
    open.push(Node {
        f: octile(from, to),
        g: 0.0,
        idx: idx(from),
    });
    while let Some(Node { g: gc, idx: i, .. }) = open.pop() {
        if closed[i] {
            continue;
        }
        closed[i] = true;
        let cur = (i % width, i / width);
        if cur == to {
            let mut path = vec![cur];
            let mut j = i;
            while parent[j] != usize::MAX {
                j = parent[j];
                path.push((j % width, j / width));
            }
            path.reverse();
            return Ok(path);
        }
        for dr in -1i64..=1 {
            for dc in -1i64..=1 {
                if dr == 0 && dc == 0 {
                    continue;
                }
                let (nc, nr) = (cur.0 as i64 + dc, cur.1 as i64 + dr);
                if nc < 0 || nr < 0 || nc >= width as i64 || nr >= height as i64 {
                    continue;
                }
                let next = (nc as usize, nr as usize);
                if !trav.is_traversable(next.0, next.1) {
                    continue;
                }
                let j = idx(next);
                if closed[j] {
                    continue;
                }
                let step = if dr != 0 && dc != 0 { SQRT_2 } else { 1.0 };
                let ng = gc + step;
                if ng < g[j] {
                    g[j] = ng;
                    parent[j] = i;
                    open.push(Node {
                        f: ng + octile(next, to),
                        g: ng,
                        idx: j,
                    });
                }
            }
        }
    }
    Err(Error::NoPath { from, to })
}

/// Length of a cell path in cell units.
pub fn path_cost(path: &[(usize, usize)]) -> f64 {
    let (mut straight, mut diag) = (0u32, 0u32);
    for w in path.windows(2) {
        if w[0].0 != w[1].0 && w[0].1 != w[1].1 {
            diag += 1;
        } else {
            straight += 1;
        }
    }
    f64::from(straight) + f64::from(diag) * SQRT_2
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle;
    use crate::worldmap::{CellCode, OccupancyGrid};
    use rand::{Rng, SeedableRng};

    fn open_trav(n: usize) -> (OccupancyGrid, Traversability) {
        let g = OccupancyGrid::filled(n, n, 0.1, CellCode::Free);
        // radius small enough that only the border ring is lost
        let t = Traversability::new(&g, 0.0);
        (g, t)
    }

    #[test]
    fn trivial_path() {
        let (_, t) = open_trav(10);
        assert_eq!(plan_path(&t, 10, 10, (3, 3), (3, 3)).unwrap(), vec![(3, 3)]);
    }

    #[test]
    fn straight_diagonal() {
        // 12x12 free grid: the ring of border cells is not traversable
        let (_, t) = open_trav(12);
        let p = plan_path(&t, 12, 12, (1, 1), (10, 10)).unwrap();
        assert!((path_cost(&p) - 9.0 * SQRT_2).abs() < 1e-12);
        assert_eq!(p.len(), 10);
    }

    #[test]
    fn unreachable_goal() {
        let mut g = OccupancyGrid::filled(20, 20, 0.1, CellCode::Free);
        for r in 0..20 {
            g.set(10, r, CellCode::Occupied);
        }
        let t = Traversability::new(&g, 0.0);
        assert!(matches!(
            plan_path(&t, 20, 20, (3, 3), (15, 3)),
            Err(Error::NoPath { .. })
        ));
    }

    #[test]
    fn cost_matches_dijkstra_oracle() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(40);
        let mut checked = 0;
        while checked < 100 {
            let g = oracle::random_grid(&mut rng, 15..40, 0.25);
            let t = Traversability::new(&g, 0.0);
            let cells = t.cells();
            if cells.len() < 2 {
                continue;
            }
            let a = cells[rng.random_range(0..cells.len())];
            let b = cells[rng.random_range(0..cells.len())];
            let (w, h) = (g.width(), g.height());
            let want = oracle::dijkstra_cost(w, h, &|c, r| t.is_traversable(c, r), a, b);
            match (plan_path(&t, w, h, a, b), want) {
                (Ok(p), Some(c)) => {
                    assert!((path_cost(&p) - c).abs() < 1e-9, "{} vs {c}", path_cost(&p));
                    assert_eq!(p.first(), Some(&a));
                    assert_eq!(p.last(), Some(&b));
                    assert!(p.iter().all(|&(c, r)| t.is_traversable(c, r)));
                }
                (Err(_), None) => {}
                (got, want) => panic!("planner {got:?} vs oracle {want:?}"),
            }
            checked += 1;
        }
    }
}
