//! Detection and refinement of hyperbonodes and ellipnodes.
//!
//! Hyperbonodes are seeded where the traced left and right flecnodal branches
//! meet or come within a cell of each other, then refined by Newton on
//! `I = 0` on both slope sheets at once. Ellipnodes are seeded from cells
//! around which the complex inflection function `I(x, y, p)` winds, `p`
//! being the complex asymptotic slope, and refined by Newton on its real and
//! imaginary parts.

use nalgebra::{Matrix2, Vector2};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::tolerance::scaled;
use crate::error::{Error, Result};
use crate::geometry::{parab_tolerance, Label};
use crate::invariants::{hyperbonode_invariants, rho_ellipnode, ExtendedReal, NodeFlag, RHO_DOUBLE_ELLIPTIC};
use crate::jets::{MongeJet, Partials};
use crate::tracing::{
    sheet::PARAB_BAND, sheet_from_partials, trace_flecnodal_with, Grid, TraceOptions, TracedCurve, Window,
};

/// Residual bound for refined nodes.
pub const TOL_NODE: f64 = 1e-10;
pub const MAX_NEWTON_ITERATIONS: usize = 50;
/// Jacobians worse conditioned than this abort refinement.
pub const MAX_CONDITION: f64 = 1e12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum NodeKind {
    Hyperbonode,
    Ellipnode,
}

#[derive(Clone, Debug, PartialEq)]
pub struct NodeRecord {
    pub kind: NodeKind,
    pub x: f64,
    pub y: f64,
    pub rho: ExtendedReal,
    /// Hyperbonodes only; absent at biflecnode overlaps.
    pub parity: Option<i8>,
    /// Absent when a degenerate flag is set.
    pub index: Option<i8>,
    pub residual: f64,
    pub flags: Vec<NodeFlag>,
    /// Newton steps taken from the seed.
    pub iterations: usize,
}

impl Serialize for NodeRecord {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("NodeRecord", 8)?;
        st.serialize_field("kind", &self.kind)?;
        st.serialize_field("x", &self.x)?;
        st.serialize_field("y", &self.y)?;
        st.serialize_field("rho", &self.rho)?;
        st.serialize_field("parity", &self.parity)?;
        st.serialize_field("index", &self.index)?;
        st.serialize_field("residual", &self.residual)?;
        st.serialize_field("flags", &self.flags)?;
        st.end()
    }
}

/// A seed that did not produce a node.
#[derive(Clone, Debug, PartialEq)]
pub struct RejectedSeed {
    pub seed: [f64; 2],
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq, Default)]
pub struct NodeSearch {
    pub nodes: Vec<NodeRecord>,
    pub rejected: Vec<RejectedSeed>,
}

/// `I` on both sheets and its Jacobian in `(x, y)`.
fn hyperbonode_system(p: &Partials) -> Option<(Vector2<f64>, Matrix2<f64>)> {
    let r = sheet_from_partials(p, Label::Right)?;
    let l = sheet_from_partials(p, Label::Left)?;
    Some((Vector2::new(r.value, l.value), Matrix2::new(r.grad[0], r.grad[1], l.grad[0], l.grad[1])))
}

/// Complex slope with positive imaginary part and `I` with its gradient along it.
fn ellipnode_system(p: &Partials) -> Option<(Vector2<f64>, Matrix2<f64>)> {
    let d = p.discriminant();
    if d.is_nan() || d >= -PARAB_BAND * parab_tolerance(p) {
        return None;
    }
    let g = |i, j| p.get(i, j);
    let s = Complex64::new(-g(1, 1) / g(0, 2), (-d).sqrt() / g(0, 2).abs());
    let s2 = s * s;
    let s3 = s2 * s;
    let value = g(3, 0) + 3.0 * g(2, 1) * s + 3.0 * g(1, 2) * s2 + g(0, 3) * s3;
    let i_x = g(4, 0) + 3.0 * g(3, 1) * s + 3.0 * g(2, 2) * s2 + g(1, 3) * s3;
    let i_y = g(3, 1) + 3.0 * g(2, 2) * s + 3.0 * g(1, 3) * s2 + g(0, 4) * s3;
    let i_p = 3.0 * g(2, 1) + 6.0 * g(1, 2) * s + 3.0 * g(0, 3) * s2;
    let a_x = g(3, 0) + 2.0 * g(2, 1) * s + g(1, 2) * s2;
    let a_y = g(2, 1) + 2.0 * g(1, 2) * s + g(0, 3) * s2;
    let a_p = 2.0 * g(1, 1) + 2.0 * g(0, 2) * s;
    let jx = i_x - i_p * a_x / a_p;
    let jy = i_y - i_p * a_y / a_p;
    Some((Vector2::new(value.re, value.im), Matrix2::new(jx.re, jy.re, jx.im, jy.im)))
}

fn condition(m: &Matrix2<f64>) -> f64 {
    let sv = m.singular_values();
    let (hi, lo) = (sv.max(), sv.min());
    if lo == 0.0 {
        f64::INFINITY
    } else {
        hi / lo
    }
}

/// Newton on a square 2×2 system, returning the root, its residual and the step count.
fn newton<F>(seed: [f64; 2], system: F) -> Result<([f64; 2], f64, usize)>
where
    F: Fn(f64, f64) -> Option<(Vector2<f64>, Matrix2<f64>)>,
{
    let fail = |what: &str| Error::Refinement(format!("{what} from seed ({}, {})", seed[0], seed[1]));
    let mut pt = Vector2::new(seed[0], seed[1]);
    let (mut val, mut jac) = system(pt[0], pt[1]).ok_or_else(|| fail("system undefined"))?;
    let mut iterations = 0;
    while val.amax() > 0.0 && iterations < MAX_NEWTON_ITERATIONS {
        if condition(&jac) > MAX_CONDITION {
            return Err(fail("ill-conditioned Jacobian"));
        }
        let step = jac.lu().solve(&val).ok_or_else(|| fail("singular Jacobian"))?;
        pt -= step;
        iterations += 1;
        let (v, j) = system(pt[0], pt[1]).ok_or_else(|| fail("left the domain of the system"))?;
        val = v;
        jac = j;
        if step.norm() <= 1e-15 * (1.0 + pt.norm()) {
            break;
        }
    }
    let residual = val.amax();
    if residual.is_nan() || residual > scaled(TOL_NODE) {
        return Err(fail(&format!("no convergence (residual {residual:e})")));
    }
    Ok(([pt[0], pt[1]], residual, iterations))
}

/// Refines a seed to a node of the given kind and computes its invariants.
pub fn refine_node(jet: &MongeJet, seed: [f64; 2], kind: NodeKind) -> Result<NodeRecord> {
    match kind {
        NodeKind::Hyperbonode => {
            let ([x, y], residual, iterations) = newton(seed, |x, y| hyperbonode_system(&jet.partials(x, y)))?;
            let inv = hyperbonode_invariants(jet, x, y).map_err(|e| Error::NotANode(e.to_string()))?;
            Ok(NodeRecord {
                kind,
                x,
                y,
                rho: inv.rho,
                parity: inv.parity,
                index: inv.index,
                residual,
                flags: inv.flags,
                iterations,
            })
        }
        NodeKind::Ellipnode => {
            let ([x, y], residual, iterations) = newton(seed, |x, y| ellipnode_system(&jet.partials(x, y)))?;
            let rho = rho_ellipnode(jet, x, y)?;
            let flags = if rho.abs() <= RHO_DOUBLE_ELLIPTIC { vec![NodeFlag::DoubleNode] } else { Vec::new() };
            let index = flags.is_empty().then_some(if rho > 0.0 { 1 } else { -1 });
            Ok(NodeRecord {
                kind,
                x,
                y,
                rho: ExtendedReal::Finite(rho),
                parity: None,
                index,
                residual,
                flags,
                iterations,
            })
        }
    }
}

fn closest_points(p0: [f64; 2], p1: [f64; 2], q0: [f64; 2], q1: [f64; 2]) -> (f64, [f64; 2]) {
    let sub = |a: [f64; 2], b: [f64; 2]| [a[0] - b[0], a[1] - b[1]];
    let dot = |a: [f64; 2], b: [f64; 2]| a[0] * b[0] + a[1] * b[1];
    let (d1, d2, r) = (sub(p1, p0), sub(q1, q0), sub(p0, q0));
    let (a, e, f) = (dot(d1, d1), dot(d2, d2), dot(d2, r));
    let (c, b) = (dot(d1, r), dot(d1, d2));
    let denom = a * e - b * b;
    let mut s = if denom > 0.0 { ((b * f - c * e) / denom).clamp(0.0, 1.0) } else { 0.0 };
    let mut t = if e > 0.0 { (b * s + f) / e } else { 0.0 };
    if t < 0.0 {
        t = 0.0;
        s = if a > 0.0 { (-c / a).clamp(0.0, 1.0) } else { 0.0 };
    } else if t > 1.0 {
        t = 1.0;
        s = if a > 0.0 { ((b - c) / a).clamp(0.0, 1.0) } else { 0.0 };
    }
    let cp = [p0[0] + d1[0] * s, p0[1] + d1[1] * s];
    let cq = [q0[0] + d2[0] * t, q0[1] + d2[1] * t];
    let dist = (cp[0] - cq[0]).hypot(cp[1] - cq[1]);
    (dist, [0.5 * (cp[0] + cq[0]), 0.5 * (cp[1] + cq[1])])
}

type SegmentBuckets = std::collections::BTreeMap<(i64, i64), Vec<([f64; 2], [f64; 2])>>;

/// Seeds where the two branches cross or pass within `radius` of each other.
fn branch_seeds(left: &TracedCurve, right: &TracedCurve, radius: f64) -> Vec<[f64; 2]> {
    let cell = |p: [f64; 2]| ((p[0] / radius).floor() as i64, (p[1] / radius).floor() as i64);
    let mut buckets = SegmentBuckets::new();
    for poly in &right.segments {
        for (a, b) in poly.segments() {
            let (ca, cb) = (cell(a), cell(b));
            for i in ca.0.min(cb.0)..=ca.0.max(cb.0) {
                for j in ca.1.min(cb.1)..=ca.1.max(cb.1) {
                    buckets.entry((i, j)).or_default().push((a, b));
                }
            }
        }
    }
    let mut seeds = Vec::new();
    for poly in &left.segments {
        for (a, b) in poly.segments() {
            let (ca, cb) = (cell(a), cell(b));
            for i in ca.0.min(cb.0) - 1..=ca.0.max(cb.0) + 1 {
                for j in ca.1.min(cb.1) - 1..=ca.1.max(cb.1) + 1 {
                    for &(c, d) in buckets.get(&(i, j)).into_iter().flatten() {
                        let (dist, mid) = closest_points(a, b, c, d);
                        if dist <= radius {
                            seeds.push(mid);
                        }
                    }
                }
            }
        }
    }
    thin(seeds, 0.25 * radius)
}

/// Sorts and drops points within `radius` of an earlier kept point.
fn thin(mut pts: Vec<[f64; 2]>, radius: f64) -> Vec<[f64; 2]> {
    pts.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    let mut kept: Vec<[f64; 2]> = Vec::new();
    for p in pts {
        if !kept.iter().rev().take_while(|k| p[0] - k[0] <= radius).any(|k| (k[0] - p[0]).hypot(k[1] - p[1]) <= radius) {
            kept.push(p);
        }
    }
    kept
}

fn refine_all(jet: &MongeJet, window: &Window, seeds: Vec<[f64; 2]>, kind: NodeKind) -> NodeSearch {
    let results: Vec<([f64; 2], Result<NodeRecord>)> =
        seeds.into_par_iter().map(|s| (s, refine_node(jet, s, kind))).collect();
    let r_dedup = 10.0 * scaled(TOL_NODE) * window.diameter();
    let mut out = NodeSearch::default();
    let mut found = Vec::new();
    for (seed, res) in results {
        match res {
            Ok(node) if window.contains(node.x, node.y) => found.push(node),
            Ok(node) => out.rejected.push(RejectedSeed {
                seed,
                reason: format!("converged outside the window at ({}, {})", node.x, node.y),
            }),
            Err(e) => out.rejected.push(RejectedSeed { seed, reason: e.to_string() }),
        }
    }
    found.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
    for node in found {
        let dup = out.nodes.iter().any(|n: &NodeRecord| (n.x - node.x).hypot(n.y - node.y) <= r_dedup);
        if !dup {
            out.nodes.push(node);
        }
    }
    out
}

/// Hyperbonodes from already traced branches.
pub fn hyperbonodes_from_branches(jet: &MongeJet, left: &TracedCurve, right: &TracedCurve) -> NodeSearch {
    let grid = right.grid;
    let seeds = branch_seeds(left, right, grid.cell_size());
    refine_all(jet, &grid.window, seeds, NodeKind::Hyperbonode)
}

pub fn find_hyperbonodes_report(jet: &MongeJet, window: &Window, grid: usize) -> Result<NodeSearch> {
    let (left, right) = trace_flecnodal_with(jet, window, grid, &TraceOptions::fast())?;
    Ok(hyperbonodes_from_branches(jet, &left, &right))
}

pub fn find_hyperbonodes(jet: &MongeJet, window: &Window, grid: usize) -> Result<Vec<NodeRecord>> {
    Ok(find_hyperbonodes_report(jet, window, grid)?.nodes)
}

fn ellipnode_seeds(jet: &MongeJet, grid: &Grid) -> Vec<[f64; 2]> {
    let values: Vec<Option<Complex64>> = grid.sample(|x, y| {
        ellipnode_system(&jet.partials(x, y)).map(|(v, _)| Complex64::new(v[0], v[1]))
    });
    let n = grid.n;
    let seeds: Vec<Vec<[f64; 2]>> = (0..n * n)
        .into_par_iter()
        .map(|k| {
            let (i, j) = (k % n, k / n);
            let corners = [(i, j), (i + 1, j), (i + 1, j + 1), (i, j + 1)];
            let mut vals = [Complex64::new(0.0, 0.0); 4];
            for (c, &(a, b)) in corners.iter().enumerate() {
                match values[grid.vertex_index(a, b)] {
                    Some(v) => vals[c] = v,
                    None => return Vec::new(),
                }
            }
            if let Some(c) = vals.iter().position(|v| v.norm() == 0.0) {
                let (a, b) = corners[c];
                return vec![grid.point(a, b)];
            }
            let winding: f64 = (0..4).map(|c| (vals[(c + 1) % 4] / vals[c]).arg()).sum();
            let re_change = vals.iter().any(|v| v.re > 0.0) && vals.iter().any(|v| v.re < 0.0);
            let im_change = vals.iter().any(|v| v.im > 0.0) && vals.iter().any(|v| v.im < 0.0);
            if winding.abs() > std::f64::consts::PI || (re_change && im_change) {
                vec![grid.cell_center(i, j)]
            } else {
                Vec::new()
            }
        })
        .collect();
    thin(seeds.into_iter().flatten().collect(), 0.25 * grid.cell_size())
}

pub fn find_ellipnodes_report(jet: &MongeJet, window: &Window, grid: usize) -> Result<NodeSearch> {
    let grid = Grid::new(*window, grid)?;
    let seeds = ellipnode_seeds(jet, &grid);
    Ok(refine_all(jet, window, seeds, NodeKind::Ellipnode))
}

pub fn find_ellipnodes(jet: &MongeJet, window: &Window, grid: usize) -> Result<Vec<NodeRecord>> {
    Ok(find_ellipnodes_report(jet, window, grid)?.nodes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::invariants::PrenormalForm;

    #[test]
    fn prenormal_has_one_node_at_origin() {
        for &(a, b, i, j) in &[(1.0, 1.0, 2.0, 2.0), (0.5, -1.3, 1.7, -0.6), (-1.0, 2.0, 1.0, 1.5)] {
            let f = PrenormalForm::new(a, b, i, j).jet();
            let nodes = find_hyperbonodes(&f, &Window::square(0.3), 128).unwrap();
            assert_eq!(nodes.len(), 1, "{a} {b} {i} {j}: {nodes:?}");
            assert!(nodes[0].x.hypot(nodes[0].y) <= 1e-10);
            let expected = PrenormalForm::new(a, b, i, j).rho().finite().unwrap();
            assert!((nodes[0].rho.finite().unwrap() - expected).abs() < 1e-9);
        }
    }

    #[test]
    fn quadric_has_no_nodes() {
        let xy = MongeJet::from_terms(5, &[(1, 1, 1.0)]).unwrap();
        assert!(find_hyperbonodes(&xy, &Window::square(1.0), 32).unwrap().is_empty());
    }

    #[test]
    fn refine_examples() {
        let f = PrenormalForm::new(1.0, 1.0, 2.0, 2.0).jet();
        let n = refine_node(&f, [1e-3, -2e-3], NodeKind::Hyperbonode).unwrap();
        assert!(n.iterations <= 8 && n.x.hypot(n.y) < 1e-12, "{n:?}");
        assert_eq!(n.index, Some(1));
        let n = refine_node(&f, [0.0, 0.0], NodeKind::Hyperbonode).unwrap();
        assert_eq!(n.iterations, 0);
        let bowl = MongeJet::from_terms(5, &[(2, 0, 0.5), (0, 2, 0.5)]).unwrap();
        assert!(matches!(refine_node(&bowl, [0.01, 0.0], NodeKind::Hyperbonode), Err(Error::Refinement(_))));
    }

    #[test]
    fn ellipnode_examples() {
        let quartic = MongeJet::from_terms(5, &[(2, 0, 0.5), (0, 2, 0.5), (4, 0, 1.0 / 24.0), (0, 4, 1.0 / 24.0)]).unwrap();
        let nodes = find_ellipnodes(&quartic, &Window::square(0.3), 64).unwrap();
        let at_origin: Vec<_> = nodes.iter().filter(|n| n.x.hypot(n.y) < 1e-9).collect();
        assert_eq!(at_origin.len(), 1, "{nodes:?}");
        assert!(at_origin[0].residual <= TOL_NODE);
        assert!((at_origin[0].rho.finite().unwrap() - 1.0).abs() < 1e-9);
        assert_eq!(at_origin[0].index, Some(1));

        let with_cubic = MongeJet::from_terms(
            5,
            &[(2, 0, 0.5), (0, 2, 0.5), (3, 1, 1.0 / 6.0), (4, 0, 1.0 / 24.0), (0, 4, 1.0 / 24.0)],
        )
        .unwrap();
        let nodes = find_ellipnodes(&with_cubic, &Window::square(0.3), 64).unwrap();
        assert!(nodes.iter().any(|n| n.x.hypot(n.y) < 1e-9), "{nodes:?}");

        let flec = MongeJet::from_terms(5, &[(2, 0, 0.5), (0, 2, 0.5), (3, 0, 1.0 / 6.0)]).unwrap();
        let nodes = find_ellipnodes(&flec, &Window::square(0.3), 64).unwrap();
        assert!(nodes.iter().all(|n| n.x.hypot(n.y) > 1e-3));
    }

    #[test]
    fn disc_index_sum_is_one() {
        let disc = MongeJet::from_terms(5, &[(1, 1, 1.0), (4, 0, 1.0), (2, 2, 2.0), (0, 4, 1.0)]).unwrap();
        let search = find_hyperbonodes_report(&disc, &Window::square(2.0), 256).unwrap();
        let sum: i32 = search.nodes.iter().map(|n| n.index.unwrap() as i32).sum();
        assert_eq!(sum, 1, "{:?}", search.nodes);
    }
}
