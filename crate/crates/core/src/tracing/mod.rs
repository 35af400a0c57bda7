//! Parabolic and left/right flecnodal curves over a rectangular window.
//!
//! Both curves are zero sets of smooth functions on a grid: the discriminant
//! for the parabolic curve, and the cubic form evaluated on the labeled
//! asymptotic direction for each flecnodal branch. Cells are contoured
//! marching-squares style, crossings are located on grid edges by bisection,
//! and segments are joined through shared edges.

mod components;
mod grid;
pub mod sheet;

pub use components::{components, component_map, ComponentMap, DomainComponent};
pub use grid::{bisect, CellState, Contour, EdgeKey, Grid, Window, MIN_GRID};
pub use sheet::{sheet_at, sheet_from_partials, well_hyperbolic, SheetPoint};

use rayon::prelude::*;
use serde::Serialize;

use crate::error::Result;
use crate::geometry::{Label, Labeler, LABEL_OFFSET_FRACTION};
use crate::jets::{MongeJet, Partials};
use grid::contour;
use sheet::oriented_cubic;

/// Defining-equation residual bound for traced vertices.
pub const TOL_CURVE: f64 = 1e-10;

/// Cells whose corner directions turn by more than this (as a cosine) are not contoured.
const MIN_TURN_COSINE: f64 = 0.5;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CurveKind {
    Parabolic,
    FlecnodalLeft,
    FlecnodalRight,
}

impl CurveKind {
    pub fn label(self) -> Option<Label> {
        match self {
            CurveKind::Parabolic => None,
            CurveKind::FlecnodalLeft => Some(Label::Left),
            CurveKind::FlecnodalRight => Some(Label::Right),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Polyline {
    pub points: Vec<[f64; 2]>,
    /// Unit asymptotic direction at each vertex; empty for the parabolic curve.
    pub directions: Vec<[f64; 2]>,
    pub closed: bool,
    pub(crate) edges: Vec<EdgeKey>,
}

impl Polyline {
    /// A polyline without asymptotic directions or grid provenance.
    pub fn from_points(points: Vec<[f64; 2]>, closed: bool) -> Self {
        Self { points, directions: Vec::new(), closed, edges: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Line segments, including the closing one for closed polylines.
    pub fn segments(&self) -> impl Iterator<Item = ([f64; 2], [f64; 2])> + '_ {
        let n = self.points.len();
        let m = if self.closed && n > 2 { n } else { n.saturating_sub(1) };
        (0..m).map(move |k| (self.points[k], self.points[(k + 1) % n]))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TracedCurve {
    pub kind: CurveKind,
    pub segments: Vec<Polyline>,
    /// Largest defining-equation residual over all vertices.
    pub residual: f64,
    pub grid: Grid,
    /// Centers of cells the curve may cross but that could not be contoured.
    pub gaps: Vec<[f64; 2]>,
    /// The defining function vanishes on every sampled point.
    pub degenerate: bool,
    /// Vertices whose offset-sampled label could not be determined.
    pub label_failures: usize,
    /// Vertices whose offset-sampled label contradicts the branch.
    pub label_mismatches: usize,
}

impl TracedCurve {
    pub fn vertex_count(&self) -> usize {
        self.segments.iter().map(Polyline::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }

    pub fn points(&self) -> impl Iterator<Item = [f64; 2]> + '_ {
        self.segments.iter().flat_map(|s| s.points.iter().copied())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TraceOptions {
    /// Re-label every flecnodal vertex with offset sampling.
    pub audit_labels: bool,
    /// Offset for label sampling as a fraction of the window diameter.
    pub label_offset: f64,
}

impl Default for TraceOptions {
    fn default() -> Self {
        Self { audit_labels: true, label_offset: LABEL_OFFSET_FRACTION }
    }
}

impl TraceOptions {
    pub fn fast() -> Self {
        Self { audit_labels: false, ..Self::default() }
    }
}

fn discriminant_gradient(p: &Partials) -> [f64; 2] {
    let f = |i, j| p.get(i, j);
    [
        2.0 * f(1, 1) * f(2, 1) - f(3, 0) * f(0, 2) - f(2, 0) * f(1, 2),
        2.0 * f(1, 1) * f(1, 2) - f(2, 1) * f(0, 2) - f(2, 0) * f(0, 3),
    ]
}

fn lerp(a: [f64; 2], b: [f64; 2], s: f64) -> [f64; 2] {
    [a[0] + s * (b[0] - a[0]), a[1] + s * (b[1] - a[1])]
}

/// Newton projection onto `g = 0` along `grad g`, kept only while the residual shrinks.
fn polish<F: Fn([f64; 2]) -> Option<(f64, [f64; 2])>>(start: [f64; 2], eval: F, max_step: f64) -> [f64; 2] {
    let mut pt = start;
    let Some((mut val, mut grad)) = eval(pt) else { return pt };
    for _ in 0..4 {
        let g2 = grad[0] * grad[0] + grad[1] * grad[1];
        if val == 0.0 || g2 == 0.0 {
            break;
        }
        let cand = [pt[0] - val * grad[0] / g2, pt[1] - val * grad[1] / g2];
        if (cand[0] - start[0]).hypot(cand[1] - start[1]) > max_step {
            break;
        }
        match eval(cand) {
            Some((v, g)) if v.abs() < val.abs() => {
                pt = cand;
                val = v;
                grad = g;
            }
            _ => break,
        }
    }
    pt
}

pub fn trace_parabolic(jet: &MongeJet, window: &Window, grid: usize) -> Result<TracedCurve> {
    let grid = Grid::new(*window, grid)?;
    let values = grid.sample(|x, y| jet.partials(x, y).discriminant());
    let v = |i: usize, j: usize| values[grid.vertex_index(i, j)];
    let eval = |pt: [f64; 2]| {
        let p = jet.partials(pt[0], pt[1]);
        Some((p.discriminant(), discriminant_gradient(&p)))
    };
    let out = contour(
        &grid,
        |i, j| CellState::Signs([v(i, j) >= 0.0, v(i + 1, j) >= 0.0, v(i + 1, j + 1) >= 0.0, v(i, j + 1) >= 0.0]),
        |i, j| {
            let [x, y] = grid.cell_center(i, j);
            Some(jet.partials(x, y).discriminant() >= 0.0)
        },
        |e| {
            let [(i0, j0), (i1, j1)] = e.ends();
            let (a, b) = (grid.point(i0, j0), grid.point(i1, j1));
            let s = bisect(
                |s| {
                    let [x, y] = lerp(a, b, s);
                    Some(jet.partials(x, y).discriminant())
                },
                v(i0, j0),
            )?;
            Some(polish(lerp(a, b, s), eval, 1e-3 * grid.cell_size()))
        },
    );
    let segments: Vec<Polyline> = out
        .contours
        .into_iter()
        .map(|c| Polyline { points: c.points, directions: Vec::new(), closed: c.closed, edges: c.edges })
        .collect();
    let residual = segments
        .par_iter()
        .flat_map_iter(|s| s.points.iter().map(|p| jet.partials(p[0], p[1]).discriminant().abs()))
        .reduce(|| 0.0, f64::max);
    Ok(TracedCurve {
        kind: CurveKind::Parabolic,
        segments,
        residual,
        grid,
        gaps: Vec::new(),
        degenerate: false,
        label_failures: 0,
        label_mismatches: 0,
    })
}

#[derive(Clone, Copy, Debug)]
struct FlecVertex {
    point: [f64; 2],
    dir: [f64; 2],
}

/// `C(d)` with exact zeros nudged positive in the canonical orientation of `d`.
fn signed_cubic(s: &SheetPoint) -> f64 {
    if s.cubic == 0.0 {
        f64::MIN_POSITIVE
    } else {
        s.cubic
    }
}

fn dot(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

/// Traces one labeled flecnodal branch.
fn trace_branch(jet: &MongeJet, grid: &Grid, sheets: &[Option<SheetPoint>], kind: CurveKind, opts: &TraceOptions) -> TracedCurve {
    let label = kind.label().expect("flecnodal kind");
    let at = |i: usize, j: usize| sheets[grid.vertex_index(i, j)].as_ref();
    let scale = sheets.iter().flatten().map(|s| s.cubic.abs()).fold(0.0, f64::max);
    let degenerate = sheets.iter().any(Option::is_some) && scale <= 1e-13;

    let state = |i: usize, j: usize| -> CellState {
        if degenerate {
            return CellState::Skip;
        }
        let corners = [at(i, j), at(i + 1, j), at(i + 1, j + 1), at(i, j + 1)];
        let valid: Vec<&SheetPoint> = corners.iter().flatten().copied().collect();
        if valid.is_empty() {
            return CellState::Skip;
        }
        let reference = valid[0].dir;
        let oriented = |s: &SheetPoint| {
            let g = signed_cubic(s);
            if dot(s.dir, reference) < 0.0 {
                -g
            } else {
                g
            }
        };
        if valid.len() < 4 {
            let pos = valid.iter().filter(|s| oriented(s) > 0.0).count();
            return if pos == 0 || pos == valid.len() { CellState::Skip } else { CellState::Gap };
        }
        let c: Vec<&SheetPoint> = corners.iter().map(|s| s.unwrap()).collect();
        for a in 0..4 {
            let b = (a + 1) % 4;
            let cos = dot(c[a].dir, c[b].dir).abs();
            if cos < MIN_TURN_COSINE {
                return CellState::Gap;
            }
        }
        CellState::Signs([oriented(c[0]) > 0.0, oriented(c[1]) > 0.0, oriented(c[2]) > 0.0, oriented(c[3]) > 0.0])
    };
    let center = |i: usize, j: usize| -> Option<bool> {
        let [x, y] = grid.cell_center(i, j);
        let s = sheet_at(jet, x, y, label)?;
        let reference = at(i, j)?.dir;
        let g = signed_cubic(&s);
        Some(if dot(s.dir, reference) < 0.0 { -g > 0.0 } else { g > 0.0 })
    };
    let root = |e: EdgeKey| -> Option<FlecVertex> {
        let [(i0, j0), (i1, j1)] = e.ends();
        let (a, b) = (grid.point(i0, j0), grid.point(i1, j1));
        let start = at(i0, j0)?;
        let reference = start.dir;
        let f0 = signed_cubic(start);
        // Bisection keeps the sign convention of the start vertex.
        let s = bisect(
            |s| {
                let [x, y] = lerp(a, b, s);
                let sp = sheet_at(jet, x, y, label)?;
                if dot(sp.dir, reference).abs() < MIN_TURN_COSINE {
                    return None;
                }
                let g = oriented_cubic(&sp, reference);
                Some(if g == 0.0 { f64::MIN_POSITIVE.copysign(f0) } else { g })
            },
            f0,
        )?;
        let eval = |pt: [f64; 2]| sheet_at(jet, pt[0], pt[1], label).map(|sp| (sp.value, sp.grad));
        let point = polish(lerp(a, b, s), eval, 1e-3 * grid.cell_size());
        let sp = sheet_at(jet, point[0], point[1], label)?;
        Some(FlecVertex { point, dir: sp.dir })
    };
    let out = contour(grid, state, center, root);

    let mut segments: Vec<Polyline> = out
        .contours
        .into_iter()
        .map(|c| Polyline {
            points: c.points.iter().map(|v| v.point).collect(),
            directions: c.points.iter().map(|v| v.dir).collect(),
            closed: c.closed,
            edges: c.edges,
        })
        .collect();
    segments.retain(|s| !s.is_empty());

    let residual = segments
        .par_iter()
        .flat_map_iter(|s| {
            s.points.iter().map(|p| match sheet_at(jet, p[0], p[1], label) {
                Some(sp) => sp.value.abs().max(sp.a_residual),
                None => f64::INFINITY,
            })
        })
        .reduce(|| 0.0, f64::max);

    let (label_failures, label_mismatches) = if opts.audit_labels && !segments.is_empty() {
        audit_labels(jet, grid, &segments, label, opts)
    } else {
        (0, 0)
    };

    TracedCurve {
        kind,
        segments,
        residual,
        grid: *grid,
        gaps: out.gap_cells.iter().map(|&(i, j)| grid.cell_center(i, j)).collect(),
        degenerate,
        label_failures,
        label_mismatches,
    }
}

/// Labels every vertex by offset sampling, shrinking the offset when the samples leave the domain.
fn audit_labels(jet: &MongeJet, grid: &Grid, segments: &[Polyline], label: Label, opts: &TraceOptions) -> (usize, usize) {
    let base = opts.label_offset * grid.window.diameter();
    let labelers: Vec<Labeler> = [1.0, 0.1, 0.01].iter().map(|f| Labeler::new(jet, base * f)).collect();
    let verdicts: Vec<Option<Label>> = segments
        .par_iter()
        .flat_map_iter(|s| s.points.iter().zip(&s.directions).map(|(p, d)| (*p, *d)).collect::<Vec<_>>())
        .map(|(p, d)| labelers.iter().find_map(|lb| lb.label(p[0], p[1], d[0], d[1]).ok()))
        .collect();
    let failures = verdicts.iter().filter(|v| v.is_none()).count();
    let mismatches = verdicts.iter().filter(|v| matches!(v, Some(l) if *l != label)).count();
    (failures, mismatches)
}

/// Traces the left and right flecnodal branches, in that order.
pub fn trace_flecnodal(jet: &MongeJet, window: &Window, grid: usize) -> Result<(TracedCurve, TracedCurve)> {
    trace_flecnodal_with(jet, window, grid, &TraceOptions::default())
}

pub fn trace_flecnodal_with(
    jet: &MongeJet,
    window: &Window,
    grid: usize,
    opts: &TraceOptions,
) -> Result<(TracedCurve, TracedCurve)> {
    let grid = Grid::new(*window, grid)?;
    let both: Vec<(Option<SheetPoint>, Option<SheetPoint>)> = grid.sample(|x, y| {
        let p = jet.partials(x, y);
        (sheet_from_partials(&p, Label::Left), sheet_from_partials(&p, Label::Right))
    });
    let (left, right): (Vec<_>, Vec<_>) = both.into_iter().unzip();
    let l = trace_branch(jet, &grid, &left, CurveKind::FlecnodalLeft, opts);
    let r = trace_branch(jet, &grid, &right, CurveKind::FlecnodalRight, opts);
    Ok((l, r))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::invariants::PrenormalForm;

    fn disc() -> MongeJet {
        MongeJet::from_terms(5, &[(1, 1, 1.0), (4, 0, 1.0), (2, 2, 2.0), (0, 4, 1.0)]).unwrap()
    }

    #[test]
    fn parabolic_examples() {
        let c = trace_parabolic(&disc(), &Window::square(2.0), 128).unwrap();
        assert_eq!(c.segments.len(), 1);
        assert!(c.segments[0].closed);
        assert!(c.residual <= TOL_CURVE, "{}", c.residual);

        let xy = MongeJet::from_terms(5, &[(1, 1, 1.0)]).unwrap();
        assert!(trace_parabolic(&xy, &Window::square(1.0), 32).unwrap().is_empty());

        let bowl = MongeJet::from_terms(5, &[(2, 0, 0.5), (0, 2, 0.5), (4, 0, 1.0)]).unwrap();
        assert!(trace_parabolic(&bowl, &Window::square(1.0), 32).unwrap().is_empty());
    }

    /// Tangent slope at the origin from a least-squares fit `v = s u + c u² + e u³` to nearby vertices.
    fn slope_at_origin(c: &TracedCurve) -> f64 {
        let near: Vec<[f64; 2]> = c.points().filter(|p| p[0].hypot(p[1]) < 0.05).collect();
        let spread = |k: usize| near.iter().map(|p| p[k] * p[k]).sum::<f64>();
        let (u, v) = if spread(0) >= spread(1) { (0, 1) } else { (1, 0) };
        let a = nalgebra::DMatrix::from_fn(near.len(), 3, |r, k| near[r][u].powi(k as i32 + 1));
        let b = nalgebra::DVector::from_fn(near.len(), |r, _| near[r][v]);
        let s = a.svd(true, true).solve(&b, 1e-14).unwrap()[0];
        if u == 0 {
            s
        } else {
            1.0 / s
        }
    }

    #[test]
    fn prenormal_branches_follow_tangent_lines() {
        let f = PrenormalForm::new(1.0, 1.0, 2.0, 2.0).jet();
        let (l, r) = trace_flecnodal(&f, &Window::square(0.5), 256).unwrap();
        assert!(!l.is_empty() && !r.is_empty());
        assert!(l.residual <= TOL_CURVE && r.residual <= TOL_CURVE);
        assert_eq!(l.label_mismatches + r.label_mismatches, 0);
        assert!((slope_at_origin(&r) + 2.0).abs() < 1e-4, "{}", slope_at_origin(&r));
        assert!((slope_at_origin(&l) + 0.5).abs() < 1e-4, "{}", slope_at_origin(&l));
    }

    #[test]
    fn quadric_is_degenerate() {
        let xy = MongeJet::from_terms(5, &[(1, 1, 1.0)]).unwrap();
        let (l, r) = trace_flecnodal(&xy, &Window::square(1.0), 32).unwrap();
        assert!(l.degenerate && r.degenerate);
        assert!(l.is_empty() && r.is_empty());
    }

    #[test]
    fn disc_has_both_branches() {
        let (l, r) = trace_flecnodal(&disc(), &Window::square(2.0), 256).unwrap();
        assert!(!l.is_empty() && !r.is_empty());
        assert!(l.residual <= TOL_CURVE && r.residual <= TOL_CURVE, "{} {}", l.residual, r.residual);
        assert_eq!(l.label_mismatches + r.label_mismatches, 0);
    }
}
