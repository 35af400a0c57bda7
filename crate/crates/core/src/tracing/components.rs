//! Hyperbolic and elliptic components of the window and their Euler characteristics.

use std::collections::BTreeSet;

use serde::Serialize;

use super::{EdgeKey, Grid, TracedCurve, Window};
use crate::geometry::PointKind;
use crate::jets::MongeJet;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DomainComponent {
    pub id: usize,
    /// Hyperbolic or elliptic.
    pub kind: PointKind,
    pub vertex_count: usize,
    /// Bounding box of the component's grid vertices.
    pub bbox: Window,
    pub touches_boundary: bool,
    /// Indices of adjacent parabolic polylines.
    pub boundary_curves: Vec<usize>,
    /// `2 − (number of boundary loops)`, only for components inside the window.
    pub euler_characteristic: Option<i32>,
    /// `V − E + F` of the component's grid complex.
    pub grid_euler: i32,
}

/// Components plus the vertex-to-component assignment they were built from.
#[derive(Clone, Debug, PartialEq)]
pub struct ComponentMap {
    pub grid: Grid,
    pub components: Vec<DomainComponent>,
    labels: Vec<usize>,
    hyperbolic: Vec<bool>,
}

impl ComponentMap {
    /// Component of a point, using the nearest cell corner of the requested kind.
    pub fn locate(&self, x: f64, y: f64, kind: PointKind) -> Option<usize> {
        let w = &self.grid.window;
        if !w.contains(x, y) {
            return None;
        }
        let n = self.grid.n;
        let fx = (x - w.xmin) / (w.xmax - w.xmin) * n as f64;
        let fy = (y - w.ymin) / (w.ymax - w.ymin) * n as f64;
        let i0 = (fx.floor() as usize).min(n - 1);
        let j0 = (fy.floor() as usize).min(n - 1);
        let want = kind == PointKind::Hyperbolic;
        let mut best: Option<(f64, usize)> = None;
        for (i, j) in [(i0, j0), (i0 + 1, j0), (i0, j0 + 1), (i0 + 1, j0 + 1)] {
            let k = self.grid.vertex_index(i, j);
            if self.hyperbolic[k] != want {
                continue;
            }
            let d = (i as f64 - fx).hypot(j as f64 - fy);
            if best.is_none_or(|(bd, _)| d < bd) {
                best = Some((d, self.labels[k]));
            }
        }
        best.map(|(_, c)| c)
    }
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn find(&mut self, mut a: usize) -> usize {
        while self.0[a] != a {
            self.0[a] = self.0[self.0[a]];
            a = self.0[a];
        }
        a
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.0[hi] = lo;
        }
    }
}

/// Partitions the window by the sign of the discriminant, matching the contour topology of `parabolic`.
pub fn component_map(jet: &MongeJet, parabolic: &TracedCurve) -> ComponentMap {
    let grid = parabolic.grid;
    let n = grid.n;
    let hyperbolic: Vec<bool> = grid.sample(|x, y| jet.partials(x, y).discriminant() >= 0.0);
    let idx = |i: usize, j: usize| grid.vertex_index(i, j);
    let mut uf = UnionFind((0..grid.vertex_count()).collect());
    let mut diagonals = Vec::new();
    for j in 0..=n {
        for i in 0..=n {
            let k = idx(i, j);
            if i < n && hyperbolic[k] == hyperbolic[idx(i + 1, j)] {
                uf.union(k, idx(i + 1, j));
            }
            if j < n && hyperbolic[k] == hyperbolic[idx(i, j + 1)] {
                uf.union(k, idx(i, j + 1));
            }
        }
    }
    // Saddle cells: the diagonal pair sharing the center's sign is connected.
    for j in 0..n {
        for i in 0..n {
            let c = [idx(i, j), idx(i + 1, j), idx(i + 1, j + 1), idx(i, j + 1)];
            let s = c.map(|k| hyperbolic[k]);
            if s[0] == s[2] && s[1] == s[3] && s[0] != s[1] {
                let [x, y] = grid.cell_center(i, j);
                let center = jet.partials(x, y).discriminant() >= 0.0;
                let pair = if center == s[0] { (c[0], c[2]) } else { (c[1], c[3]) };
                uf.union(pair.0, pair.1);
                diagonals.push(pair.0);
            }
        }
    }

    let mut root_to_id = std::collections::BTreeMap::new();
    let mut labels = vec![0; grid.vertex_count()];
    for (k, label) in labels.iter_mut().enumerate() {
        let r = uf.find(k);
        let next = root_to_id.len();
        *label = *root_to_id.entry(r).or_insert(next);
    }
    let count = root_to_id.len();

    let mut verts = vec![0i64; count];
    let mut edges = vec![0i64; count];
    let mut faces = vec![0i64; count];
    let mut touches = vec![false; count];
    let mut bbox = vec![[f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY]; count];
    for j in 0..=n {
        for i in 0..=n {
            let k = idx(i, j);
            let c = labels[k];
            verts[c] += 1;
            if grid.on_boundary(i, j) {
                touches[c] = true;
            }
            let [x, y] = grid.point(i, j);
            let b = &mut bbox[c];
            b[0] = b[0].min(x);
            b[1] = b[1].max(x);
            b[2] = b[2].min(y);
            b[3] = b[3].max(y);
            if i < n && labels[idx(i + 1, j)] == c {
                edges[c] += 1;
            }
            if j < n && labels[idx(i, j + 1)] == c {
                edges[c] += 1;
            }
            if i < n && j < n && [idx(i + 1, j), idx(i + 1, j + 1), idx(i, j + 1)].iter().all(|&q| labels[q] == c) {
                faces[c] += 1;
            }
        }
    }
    for k in diagonals {
        edges[labels[k]] += 1;
    }

    let mut adjacent: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); count];
    for (s, poly) in parabolic.segments.iter().enumerate() {
        for e in &poly.edges {
            let ends: [(usize, usize); 2] = EdgeKey::ends(e);
            for (i, j) in ends {
                adjacent[labels[idx(i, j)]].insert(s);
            }
        }
    }

    let mut components = Vec::with_capacity(count);
    let mut first_vertex = vec![usize::MAX; count];
    for (k, &c) in labels.iter().enumerate() {
        if first_vertex[c] == usize::MAX {
            first_vertex[c] = k;
        }
    }
    for c in 0..count {
        let kind = if hyperbolic[first_vertex[c]] { PointKind::Hyperbolic } else { PointKind::Elliptic };
        let boundary_curves: Vec<usize> = adjacent[c].iter().copied().collect();
        let loops = boundary_curves.iter().filter(|&&s| parabolic.segments[s].closed).count() as i32;
        let all_closed = boundary_curves.iter().all(|&s| parabolic.segments[s].closed);
        let euler_characteristic = (!touches[c] && all_closed).then_some(2 - loops);
        let b = bbox[c];
        components.push(DomainComponent {
            id: c,
            kind,
            vertex_count: verts[c] as usize,
            bbox: Window { xmin: b[0], xmax: b[1], ymin: b[2], ymax: b[3] },
            touches_boundary: touches[c],
            boundary_curves,
            euler_characteristic,
            grid_euler: (verts[c] - edges[c] + faces[c]) as i32,
        });
    }
    ComponentMap { grid, components, labels, hyperbolic }
}

pub fn components(jet: &MongeJet, parabolic: &TracedCurve) -> Vec<DomainComponent> {
    component_map(jet, parabolic).components
}
