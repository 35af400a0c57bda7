//! Rectangular sampling grids and marching-squares contour assembly.

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};

/// Axis-aligned rectangle `[xmin, xmax] × [ymin, ymax]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Window {
    pub xmin: f64,
    pub xmax: f64,
    pub ymin: f64,
    pub ymax: f64,
}

impl Window {
    pub fn new(xmin: f64, xmax: f64, ymin: f64, ymax: f64) -> Result<Self> {
        let ok = [xmin, xmax, ymin, ymax].iter().all(|v| v.is_finite()) && xmin < xmax && ymin < ymax;
        if !ok {
            return Err(Error::Precondition(format!("degenerate window [{xmin}, {xmax}] × [{ymin}, {ymax}]")));
        }
        Ok(Self { xmin, xmax, ymin, ymax })
    }

    /// `[-h, h]²`.
    pub fn square(h: f64) -> Self {
        Self { xmin: -h, xmax: h, ymin: -h, ymax: h }
    }

    pub fn diameter(&self) -> f64 {
        (self.xmax - self.xmin).hypot(self.ymax - self.ymin)
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        x >= self.xmin && x <= self.xmax && y >= self.ymin && y <= self.ymax
    }
}

pub const MIN_GRID: usize = 16;

/// `n × n` cells over a window; vertex `(i, j)` sits at column `i`, row `j`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid {
    pub window: Window,
    pub n: usize,
}

impl Grid {
    pub fn new(window: Window, n: usize) -> Result<Self> {
        if n < MIN_GRID {
            return Err(Error::Precondition(format!("grid {n} is below {MIN_GRID}")));
        }
        Ok(Self { window, n })
    }

    pub fn point(&self, i: usize, j: usize) -> [f64; 2] {
        let w = &self.window;
        let fx = i as f64 / self.n as f64;
        let fy = j as f64 / self.n as f64;
        [w.xmin + (w.xmax - w.xmin) * fx, w.ymin + (w.ymax - w.ymin) * fy]
    }

    pub fn cell_center(&self, i: usize, j: usize) -> [f64; 2] {
        let a = self.point(i, j);
        let b = self.point(i + 1, j + 1);
        [0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])]
    }

    pub fn cell_size(&self) -> f64 {
        let w = &self.window;
        ((w.xmax - w.xmin) / self.n as f64).max((w.ymax - w.ymin) / self.n as f64)
    }

    pub fn vertex_index(&self, i: usize, j: usize) -> usize {
        j * (self.n + 1) + i
    }

    pub fn vertex_count(&self) -> usize {
        (self.n + 1) * (self.n + 1)
    }

    /// Evaluates `f` at every vertex in parallel, row-major.
    pub fn sample<T: Send, F: Fn(f64, f64) -> T + Sync>(&self, f: F) -> Vec<T> {
        (0..self.vertex_count())
            .into_par_iter()
            .map(|k| {
                let [x, y] = self.point(k % (self.n + 1), k / (self.n + 1));
                f(x, y)
            })
            .collect()
    }

    pub fn on_boundary(&self, i: usize, j: usize) -> bool {
        i == 0 || j == 0 || i == self.n || j == self.n
    }
}

/// A grid edge: `H(i, j)` joins `(i, j)`–`(i+1, j)`, `V(i, j)` joins `(i, j)`–`(i, j+1)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EdgeKey {
    H(usize, usize),
    V(usize, usize),
}

impl EdgeKey {
    pub fn ends(&self) -> [(usize, usize); 2] {
        match *self {
            EdgeKey::H(i, j) => [(i, j), (i + 1, j)],
            EdgeKey::V(i, j) => [(i, j), (i, j + 1)],
        }
    }
}

/// What a cell contributes to a contour.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum CellState {
    /// Nothing to trace here.
    Skip,
    /// The curve may pass but the cell cannot be contoured.
    Gap,
    /// Signs at corners `(i,j), (i+1,j), (i+1,j+1), (i,j+1)`, `true` for nonnegative.
    Signs([bool; 4]),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Contour<P> {
    pub points: Vec<P>,
    pub edges: Vec<EdgeKey>,
    pub closed: bool,
}

pub struct ContourOutput<P> {
    pub contours: Vec<Contour<P>>,
    pub gap_cells: Vec<(usize, usize)>,
}

fn cell_edges(i: usize, j: usize) -> [EdgeKey; 4] {
    [EdgeKey::H(i, j), EdgeKey::V(i + 1, j), EdgeKey::H(i, j + 1), EdgeKey::V(i, j)]
}

/// Segment pairs inside one cell, as indices into [`cell_edges`].
fn cell_pairs(s: [bool; 4], center: impl FnOnce() -> Option<bool>) -> Option<Vec<(usize, usize)>> {
    let crossing = [s[0] != s[1], s[1] != s[2], s[3] != s[2], s[0] != s[3]];
    let hits: Vec<usize> = (0..4).filter(|&k| crossing[k]).collect();
    match hits.len() {
        0 => Some(Vec::new()),
        2 => Some(vec![(hits[0], hits[1])]),
        4 => {
            let c = center()?;
            if c == s[0] {
                // Corners 0 and 2 are joined through the center.
                Some(vec![(0, 1), (2, 3)])
            } else {
                Some(vec![(0, 3), (1, 2)])
            }
        }
        _ => None,
    }
}

/// Assembles polylines from per-cell signs and per-edge roots.
///
/// `state` classifies a cell, `center` resolves saddle cells and `root`
/// locates the crossing on an edge. Output is independent of evaluation order.
pub fn contour<P, S, C, R>(grid: &Grid, state: S, center: C, root: R) -> ContourOutput<P>
where
    P: Clone + Send,
    S: Fn(usize, usize) -> CellState + Sync,
    C: Fn(usize, usize) -> Option<bool> + Sync,
    R: Fn(EdgeKey) -> Option<P> + Sync,
{
    let n = grid.n;
    let cells: Vec<CellLinks> = (0..n * n)
        .into_par_iter()
        .filter_map(|k| {
            let (i, j) = (k % n, k / n);
            match state(i, j) {
                CellState::Skip => None,
                CellState::Gap => Some(((i, j), None)),
                CellState::Signs(s) => {
                    let edges = cell_edges(i, j);
                    let pairs = cell_pairs(s, || center(i, j))
                        .map(|ps| ps.into_iter().map(|(a, b)| (edges[a], edges[b])).collect());
                    Some(((i, j), pairs))
                }
            }
        })
        .collect();

    let mut gap_cells = Vec::new();
    let mut wanted = BTreeSet::new();
    for (cell, pairs) in &cells {
        match pairs {
            None => gap_cells.push(*cell),
            Some(ps) => {
                for &(a, b) in ps {
                    wanted.insert(a);
                    wanted.insert(b);
                }
            }
        }
    }
    let wanted: Vec<EdgeKey> = wanted.into_iter().collect();
    let roots: BTreeMap<EdgeKey, Option<P>> =
        wanted.par_iter().map(|&e| (e, root(e))).collect::<Vec<_>>().into_iter().collect();

    let mut adjacency: BTreeMap<EdgeKey, Vec<EdgeKey>> = BTreeMap::new();
    for (cell, pairs) in &cells {
        let Some(ps) = pairs else { continue };
        let mut failed = false;
        for &(a, b) in ps {
            if roots[&a].is_none() || roots[&b].is_none() {
                failed = true;
                continue;
            }
            adjacency.entry(a).or_default().push(b);
            adjacency.entry(b).or_default().push(a);
        }
        if failed {
            gap_cells.push(*cell);
        }
    }
    gap_cells.sort_unstable();
    gap_cells.dedup();

    let mut visited = BTreeSet::new();
    let mut contours = Vec::new();
    let walk = |start: EdgeKey, visited: &mut BTreeSet<EdgeKey>| {
        let mut edges = vec![start];
        visited.insert(start);
        let mut prev = None;
        let mut cur = start;
        let mut closed = false;
        loop {
            let next = adjacency[&cur].iter().copied().find(|&e| Some(e) != prev && !visited.contains(&e));
            match next {
                Some(e) => {
                    visited.insert(e);
                    edges.push(e);
                    prev = Some(cur);
                    cur = e;
                }
                None => {
                    if edges.len() > 2 && adjacency[&cur].contains(&start) {
                        closed = true;
                    }
                    break;
                }
            }
        }
        let points = edges.iter().map(|e| roots[e].clone().expect("root present")).collect();
        Contour { points, edges, closed }
    };
    let ends: Vec<EdgeKey> = adjacency.iter().filter(|(_, v)| v.len() == 1).map(|(k, _)| *k).collect();
    for e in ends {
        if !visited.contains(&e) {
            contours.push(walk(e, &mut visited));
        }
    }
    let rest: Vec<EdgeKey> = adjacency.keys().copied().collect();
    for e in rest {
        if !visited.contains(&e) {
            contours.push(walk(e, &mut visited));
        }
    }
    ContourOutput { contours, gap_cells }
}

/// Cell position and its edge pairings, `None` for a gap cell.
type CellLinks = ((usize, usize), Option<Vec<(EdgeKey, EdgeKey)>>);

/// Bisection for a sign change of `f` on `[0, 1]`, given `f(0) ≥ 0` differs in sign from `f(1)`.
pub fn bisect<F: FnMut(f64) -> Option<f64>>(mut f: F, f0: f64) -> Option<f64> {
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    let lo_sign = f0 >= 0.0;
    for _ in 0..64 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let v = f(mid)?;
        if (v >= 0.0) == lo_sign {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn circle(grid: &Grid, r: f64) -> ContourOutput<[f64; 2]> {
        let vals = grid.sample(|x, y| r * r - x * x - y * y);
        let v = |i, j| vals[grid.vertex_index(i, j)];
        contour(
            grid,
            |i, j| CellState::Signs([v(i, j) >= 0.0, v(i + 1, j) >= 0.0, v(i + 1, j + 1) >= 0.0, v(i, j + 1) >= 0.0]),
            |i, j| {
                let [x, y] = grid.cell_center(i, j);
                Some(r * r - x * x - y * y >= 0.0)
            },
            |e| {
                let [(i0, j0), (i1, j1)] = e.ends();
                let (a, b) = (grid.point(i0, j0), grid.point(i1, j1));
                let at = |s: f64| [a[0] + s * (b[0] - a[0]), a[1] + s * (b[1] - a[1])];
                let g = |s: f64| {
                    let [x, y] = at(s);
                    Some(r * r - x * x - y * y)
                };
                let s = bisect(g, v(i0, j0))?;
                Some(at(s))
            },
        )
    }

    #[test]
    fn circle_is_one_closed_contour() {
        let grid = Grid::new(Window::square(1.0), 32).unwrap();
        let out = circle(&grid, 0.6);
        assert_eq!(out.contours.len(), 1);
        assert!(out.contours[0].closed);
        for p in &out.contours[0].points {
            assert!((p[0].hypot(p[1]) - 0.6).abs() < 1e-12);
        }
        assert!(out.gap_cells.is_empty());
    }

    #[test]
    fn clipped_circle_is_open() {
        let grid = Grid::new(Window::new(0.0, 1.0, -1.0, 1.0).unwrap(), 32).unwrap();
        let out = circle(&grid, 0.6);
        assert_eq!(out.contours.len(), 1);
        assert!(!out.contours[0].closed);
    }

    #[test]
    fn rejects_small_grids_and_flat_windows() {
        assert!(Grid::new(Window::square(1.0), 8).is_err());
        assert!(Window::new(0.0, 0.0, 0.0, 1.0).is_err());
    }
}
