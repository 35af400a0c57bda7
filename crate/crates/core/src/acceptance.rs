//! Built-in acceptance suite.
//!
//! Each criterion runs a seeded batch of instances and reports one outcome.
//! The suite backs both the `acceptance` test target and `verify --suite builtin`.

use std::time::{Duration, Instant};

use nalgebra::{Matrix2, Matrix4, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::geometry::{asymptotic_directions, left_right_label_with, Label, Labeler, PointKind, LABEL_OFFSET_FRACTION};
use crate::invariants::{
    cross_ratio, flecnodal_tangent_lines, index_hyperbonode, index_hyperbonode_diagonal, parity_from_diagonal,
    diagonal_normal_form, rho_ellipnode, rho_ellipnode_oracle, rho_from_adapted, rho_from_elliptic_normal,
    rho_hyperbonode, rho_hyperbonode_diagonal, ExtendedReal, NodeFlag, PrenormalForm, RHO_CAP,
};
use crate::jets::{FamilyJet, MongeJet, ProjectiveMap};
use crate::nodes::{find_hyperbonodes, NodeKind};
use crate::sweep::{index_sum, sweep, Contract, SweepReport, TransitionKind};
use crate::tracing::{components, trace_parabolic, Window};

#[derive(Clone, Debug, PartialEq)]
pub struct CriterionOutcome {
    pub id: u8,
    pub title: &'static str,
    pub passed: bool,
    pub detail: String,
    pub elapsed: Duration,
    pub time_limit: Option<Duration>,
}

impl std::fmt::Display for CriterionOutcome {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let limit = self.time_limit.map(|l| format!(" (limit {} s)", l.as_secs())).unwrap_or_default();
        write!(
            f,
            "[{}] criterion {:>2}: {} in {:.2} s{}: {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.title,
            self.elapsed.as_secs_f64(),
            limit,
            self.detail
        )
    }
}

pub const CRITERIA: [(u8, &str, Option<u64>); 11] = [
    (1, "prenormal relation", Some(5)),
    (2, "closed form vs tangent-line cross-ratio", Some(5)),
    (3, "diagonal chart formula", Some(30)),
    (4, "index formulas", None),
    (5, "ellipnode formula vs complex cross-ratio", None),
    (6, "disc index sum", Some(10)),
    (7, "double-hyperbonode sweep", Some(60)),
    (8, "flec-hyperbonode sweep", None),
    (9, "ellipnode sweeps", None),
    (10, "projective invariance", None),
    (11, "left/right labels vs integration", None),
];

/// Runs one criterion; `None` for an unknown id.
pub fn run_criterion(id: u8) -> Option<CriterionOutcome> {
    let &(_, title, limit) = CRITERIA.iter().find(|c| c.0 == id)?;
    let start = Instant::now();
    let result = match id {
        1 => prenormal_relation(),
        2 => formula_vs_geometry(),
        3 => diagonal_formula(),
        4 => index_formulas(),
        5 => ellipnode_formula(),
        6 => disc_index_sum(),
        7 => double_hyperbonode_sweep(),
        8 => flec_hyperbonode_sweep(),
        9 => ellipnode_sweeps(),
        10 => projective_invariance(),
        _ => labeling(),
    };
    let elapsed = start.elapsed();
    let time_limit = limit.map(Duration::from_secs);
    let (mut passed, mut detail) = match result {
        Ok(d) => (true, d),
        Err(d) => (false, d),
    };
    if let Some(l) = time_limit {
        if elapsed > l {
            passed = false;
            detail = format!("{detail}; over the time limit");
        }
    }
    Some(CriterionOutcome { id, title, passed, detail, elapsed, time_limit })
}

pub fn run_all() -> Vec<CriterionOutcome> {
    CRITERIA.iter().filter_map(|c| run_criterion(c.0)).collect()
}

type Check = std::result::Result<String, String>;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn uniform(r: &mut ChaCha8Rng, h: f64) -> f64 {
    r.random_range(-h..h)
}

fn rel_diff(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1.0)
}

fn finite(r: crate::Result<ExtendedReal>, what: &str) -> std::result::Result<f64, String> {
    match r {
        Ok(ExtendedReal::Finite(v)) => Ok(v),
        Ok(ExtendedReal::Infinite) => Err(format!("{what}: unexpected infinite value")),
        Err(e) => Err(format!("{what}: {e}")),
    }
}

/// `xy + (x³y + xy³)/6` with `t x³y` in place of `x³y`, plus `(x⁴ + y⁴)/24`.
pub fn double_hyperbonode_family() -> FamilyJet {
    FamilyJet::from_terms(
        5,
        &[
            (1, 1, vec![1.0]),
            (3, 1, vec![0.0, 1.0 / 6.0]),
            (1, 3, vec![1.0 / 6.0]),
            (4, 0, vec![1.0 / 24.0]),
            (0, 4, vec![1.0 / 24.0]),
        ],
    )
    .expect("valid family")
}

/// `xy + (x³y + xy³)/6 + (t x⁴ + y⁴)/24`.
pub fn flec_hyperbonode_family() -> FamilyJet {
    FamilyJet::from_terms(
        5,
        &[
            (1, 1, vec![1.0]),
            (3, 1, vec![1.0 / 6.0]),
            (1, 3, vec![1.0 / 6.0]),
            (4, 0, vec![0.0, 1.0 / 24.0]),
            (0, 4, vec![1.0 / 24.0]),
        ],
    )
    .expect("valid family")
}

/// `(x² + y²)/2 + t x³y/6 + (x⁴ + y⁴)/24`, with an ellipnode of positive ρ at the origin for all `t`.
pub fn persistent_ellipnode_family() -> FamilyJet {
    FamilyJet::from_terms(
        5,
        &[
            (2, 0, vec![0.5]),
            (0, 2, vec![0.5]),
            (3, 1, vec![0.0, 1.0 / 6.0]),
            (4, 0, vec![1.0 / 24.0]),
            (0, 4, vec![1.0 / 24.0]),
        ],
    )
    .expect("valid family")
}

/// `(x² + y²)/2 + t x³/6 + y⁴/24 + x⁵/120 + x²y³/12`.
///
/// At `t = 0` the origin is an ellipnode with `f40 = 0`, so the numerator of
/// the ellipnode invariant vanishes there; the quintic terms make the
/// collision a generic fold and the `x³` term moves it off the origin.
pub fn double_ellipnode_family() -> FamilyJet {
    FamilyJet::from_terms(
        5,
        &[
            (2, 0, vec![0.5]),
            (0, 2, vec![0.5]),
            (3, 0, vec![0.0, 1.0 / 6.0]),
            (0, 4, vec![1.0 / 24.0]),
            (5, 0, vec![1.0 / 120.0]),
            (2, 3, vec![1.0 / 12.0]),
        ],
    )
    .expect("valid family")
}

/// `xy + (x² + y²)²`.
pub fn disc_surface() -> MongeJet {
    MongeJet::from_terms(5, &[(1, 1, 1.0), (4, 0, 1.0), (2, 2, 2.0), (0, 4, 1.0)]).expect("valid surface")
}

fn random_prenormal(r: &mut ChaCha8Rng) -> PrenormalForm {
    PrenormalForm::new(uniform(r, 2.0), uniform(r, 2.0), uniform(r, 2.0), uniform(r, 2.0))
}

/// Axes-adapted hyperbonode jet with random third- and fourth-order terms.
fn random_adapted(r: &mut ChaCha8Rng) -> MongeJet {
    let f11 = loop {
        let v = uniform(r, 2.0);
        if v.abs() > 0.1 {
            break v;
        }
    };
    let mut d = vec![(1, 1, f11), (2, 1, uniform(r, 2.0)), (1, 2, uniform(r, 2.0))];
    for (i, j) in [(4, 0), (3, 1), (2, 2), (1, 3), (0, 4)] {
        d.push((i, j, uniform(r, 2.0)));
    }
    MongeJet::from_derivatives(5, &d).expect("valid jet")
}

fn random_matrix(r: &mut ChaCha8Rng) -> Matrix2<f64> {
    loop {
        let m = Matrix2::new(uniform(r, 1.5), uniform(r, 1.5), uniform(r, 1.5), uniform(r, 1.5));
        if m.determinant().abs() > 0.3 {
            return m;
        }
    }
}

fn prenormal_relation() -> Check {
    let mut r = rng(1);
    let mut worst = 0.0f64;
    let mut n = 0;
    while n < 500 {
        let h = random_prenormal(&mut r);
        if (h.i * h.j).abs() <= 0.05 {
            continue;
        }
        n += 1;
        let rho = finite(rho_hyperbonode(&h.jet(), 0.0, 0.0), "rho")?;
        let expected = 1.0 - h.a * h.b / (h.i * h.j);
        worst = worst.max((rho - expected).abs());
    }
    if worst <= 1e-9 {
        Ok(format!("500 forms, max |rho - (1 - ab/IJ)| = {worst:.2e}"))
    } else {
        Err(format!("max deviation {worst:.3e} > 1e-9"))
    }
}

fn formula_vs_geometry() -> Check {
    let mut r = rng(2);
    let (mut worst, mut n) = (0.0f64, 0);
    while n < 200 {
        let jet = random_adapted(&mut r);
        if (jet.deriv0(4, 0) * jet.deriv0(0, 4)).abs() < 0.05 {
            continue;
        }
        n += 1;
        let closed = finite(rho_from_adapted(&jet), "closed form")?;
        let lines = flecnodal_tangent_lines(&jet).map_err(|e| e.to_string())?;
        let geometric = finite(cross_ratio(&lines), "cross-ratio")?;
        worst = worst.max(rel_diff(closed, geometric));
    }
    if worst <= 1e-9 {
        Ok(format!("200 adapted jets, max relative deviation {worst:.2e}"))
    } else {
        Err(format!("max relative deviation {worst:.3e} > 1e-9"))
    }
}

/// A random hyperbonode at the origin in a random affine chart.
fn random_node_jet(r: &mut ChaCha8Rng) -> MongeJet {
    loop {
        let jet = random_adapted(r);
        if (jet.deriv0(4, 0) * jet.deriv0(0, 4)).abs() < 0.05 {
            continue;
        }
        let z = if r.random_bool(0.5) { 1.0 } else { -1.0 } * r.random_range(0.5..2.0);
        if let Ok(moved) = jet.linear_change(&random_matrix(r), z) {
            return moved;
        }
    }
}

fn diagonal_formula() -> Check {
    let mut r = rng(3);
    let (mut worst, mut n, mut skipped) = (0.0f64, 0, 0);
    while n < 200 {
        let jet = random_node_jet(&mut r);
        let axes = finite(rho_hyperbonode(&jet, 0.0, 0.0), "axes chart")?;
        if !(1e-3..=1e3).contains(&axes.abs()) {
            skipped += 1;
            continue;
        }
        n += 1;
        let diag = finite(rho_hyperbonode_diagonal(&jet, 0.0, 0.0), "diagonal chart")?;
        worst = worst.max(rel_diff(axes, diag));
    }
    if worst <= 1e-7 {
        Ok(format!("200 nodes ({skipped} near-degenerate skipped), max relative deviation {worst:.2e}"))
    } else {
        Err(format!("max relative deviation {worst:.3e} > 1e-7"))
    }
}

fn index_formulas() -> Check {
    let mut r = rng(4);
    let mut n = 0;
    while n < 500 {
        let h = random_prenormal(&mut r);
        let gap = h.i * h.j - h.a * h.b;
        if gap.abs() <= 1e-6 || (h.i * h.j).abs() <= 1e-3 {
            continue;
        }
        n += 1;
        let expected = if gap > 0.0 { 1 } else { -1 };
        let jet = h.jet();
        let axes = index_hyperbonode(&jet, 0.0, 0.0).map_err(|e| format!("axes index: {e}"))?;
        let diag = index_hyperbonode_diagonal(&jet, 0.0, 0.0).map_err(|e| format!("diagonal index: {e}"))?;
        if axes != expected || diag != expected {
            return Err(format!("(a,b,I,J) = ({}, {}, {}, {}): sign(IJ-ab) = {expected}, axes {axes}, diagonal {diag}", h.a, h.b, h.i, h.j));
        }
    }
    let mut m = 0;
    while m < 200 {
        let jet = random_node_jet(&mut r);
        let Ok(axes) = index_hyperbonode(&jet, 0.0, 0.0) else { continue };
        let diag = index_hyperbonode_diagonal(&jet, 0.0, 0.0).map_err(|e| format!("diagonal index: {e}"))?;
        let parity = crate::invariants::parity(&jet, 0.0, 0.0).map_err(|e| e.to_string())?;
        let diag_parity = diagonal_normal_form(&jet, 0.0, 0.0)
            .and_then(|d| parity_from_diagonal(&d))
            .map_err(|e| format!("diagonal parity: {e}"))?;
        if axes != diag || parity != diag_parity {
            return Err(format!("random node: index {axes} vs {diag}, parity {parity} vs {diag_parity}"));
        }
        m += 1;
    }
    Ok("500 prenormal forms and 200 random nodes, exact sign agreement".into())
}

fn elliptic_normal(f40: f64, f31: f64, f22: f64, f13: f64, f04: f64) -> MongeJet {
    MongeJet::from_derivatives(5, &[(2, 0, 1.0), (0, 2, 1.0), (4, 0, f40), (3, 1, f31), (2, 2, f22), (1, 3, f13), (0, 4, f04)])
        .expect("valid jet")
}

fn ellipnode_formula() -> Check {
    let mut r = rng(5);
    let (mut worst, mut n) = (0.0f64, 0);
    while n < 200 {
        let c: Vec<f64> = (0..5).map(|_| uniform(&mut r, 2.0)).collect();
        let jet = elliptic_normal(c[0], c[1], c[2], c[3], c[4]);
        let den = (c[0] - 6.0 * c[2] + c[4]).powi(2) + 16.0 * (c[1] - c[3]).powi(2);
        if den < 0.05 {
            continue;
        }
        n += 1;
        let formula = rho_from_elliptic_normal(&jet).map_err(|e| format!("formula: {e}"))?;
        let oracle = rho_ellipnode_oracle(&jet).map_err(|e| format!("oracle: {e}"))?;
        worst = worst.max(rel_diff(formula, oracle));
    }
    if worst > 1e-9 {
        return Err(format!("max relative deviation {worst:.3e} > 1e-9"));
    }
    let quartic = MongeJet::from_terms(5, &[(2, 0, 0.5), (0, 2, 0.5), (4, 0, 1.0 / 24.0), (0, 4, 1.0 / 24.0)])
        .expect("valid jet");
    let with_x3y = MongeJet::from_terms(
        5,
        &[(2, 0, 0.5), (0, 2, 0.5), (3, 1, 1.0 / 6.0), (4, 0, 1.0 / 24.0), (0, 4, 1.0 / 24.0)],
    )
    .expect("valid jet");
    for (jet, expected) in [(quartic, 1.0), (with_x3y, 0.8)] {
        let rho = rho_ellipnode(&jet, 0.0, 0.0).map_err(|e| e.to_string())?;
        if (rho - expected).abs() > 1e-12 {
            return Err(format!("worked value {expected}: got {rho}"));
        }
    }
    Ok(format!("200 normalized jets, max relative deviation {worst:.2e}; worked values 1 and 4/5 exact to 1e-12"))
}

fn disc_index_sum() -> Check {
    let jet = disc_surface();
    let window = Window::square(2.0);
    let parabolic = trace_parabolic(&jet, &window, 512).map_err(|e| e.to_string())?;
    if parabolic.segments.len() != 1 || !parabolic.segments[0].closed {
        return Err(format!("parabolic curve has {} polylines", parabolic.segments.len()));
    }
    let comps = components(&jet, &parabolic);
    let hyp: Vec<_> = comps.iter().filter(|c| c.kind == PointKind::Hyperbolic).collect();
    if hyp.len() != 1 || hyp[0].touches_boundary || hyp[0].euler_characteristic != Some(1) || hyp[0].grid_euler != 1 {
        return Err(format!("hyperbolic components: {hyp:?}"));
    }
    let nodes = find_hyperbonodes(&jet, &window, 512).map_err(|e| e.to_string())?;
    let mut sum = 0;
    for n in &nodes {
        sum += n.index.ok_or_else(|| format!("node at ({}, {}) has no index", n.x, n.y))? as i32;
    }
    if sum != 1 {
        return Err(format!("index sum {sum} over {} nodes", nodes.len()));
    }
    Ok(format!("one closed parabolic polyline, interior hyperbolic disc (chi = 1), {} hyperbonodes with index sum 1", nodes.len()))
}

fn contract_violations(rep: &SweepReport) -> Vec<String> {
    rep.transitions
        .iter()
        .filter_map(|t| match &t.contract {
            Contract::Violated(why) => Some(format!("{:?} at t in {:?}: {why}", t.kind, t.t_interval)),
            _ => None,
        })
        .collect()
}

/// Component holding the node nearest the origin in the first sample.
fn origin_component(rep: &SweepReport, kind: NodeKind) -> std::result::Result<usize, String> {
    rep.samples[0]
        .nodes
        .iter()
        .filter(|n| n.node.kind == kind)
        .min_by(|a, b| a.node.x.hypot(a.node.y).total_cmp(&b.node.x.hypot(b.node.y)))
        .and_then(|n| n.component)
        .ok_or_else(|| "no node near the origin in the first sample".to_string())
}

fn double_hyperbonode_sweep() -> Check {
    let steps = 200;
    let rep = sweep(&double_hyperbonode_family(), &Window::square(1.0), 128, (0.5, 1.5), steps).map_err(|e| e.to_string())?;
    let bad = contract_violations(&rep);
    if !bad.is_empty() {
        return Err(bad.join("; "));
    }
    let events: Vec<_> = rep.transitions.iter().filter(|t| t.kind == TransitionKind::CreationAnnihilation).collect();
    if events.len() != 1 {
        return Err(format!("expected one collision event, got {:?}", rep.transitions));
    }
    let e = events[0];
    let [lo, hi] = e.t_interval;
    if (lo - 1.0).abs() > 1e-3 || (hi - 1.0).abs() > 1e-3 {
        return Err(format!("event bracket {:?} not within 1e-3 of t = 1", e.t_interval));
    }
    let side = if e.indices_after.len() > e.indices_before.len() { &e.indices_after } else { &e.indices_before };
    if !(side.contains(&Some(1)) && side.contains(&Some(-1))) {
        return Err(format!("colliding nodes carry indices {side:?}"));
    }
    let comp = origin_component(&rep, NodeKind::Hyperbonode)?;
    let series = index_sum(&rep, comp).map_err(|e| e.to_string())?;
    let dt = 1.0 / (steps - 1) as f64;
    let reference = series.sums[0];
    for (s, &sum) in rep.samples.iter().zip(&series.sums) {
        if (s.t - 1.0).abs() > 2.0 * dt && sum != reference {
            return Err(format!("index sum {sum} at t = {} differs from {reference}", s.t));
        }
    }
    Ok(format!(
        "index sum {reference} at all {steps} samples; collision at t in [{lo:.9}, {hi:.9}] with indices {side:?}"
    ))
}

fn flec_hyperbonode_sweep() -> Check {
    let rep = sweep(&flec_hyperbonode_family(), &Window::square(0.4), 128, (-0.5, 0.5), 50).map_err(|e| e.to_string())?;
    let bad = contract_violations(&rep);
    if !bad.is_empty() {
        return Err(bad.join("; "));
    }
    let mut track = None;
    let mut indices = Vec::new();
    for s in &rep.samples {
        let n = s
            .nodes
            .iter()
            .find(|n| n.node.kind == NodeKind::Hyperbonode && n.node.x.hypot(n.node.y) <= 1e-9)
            .ok_or_else(|| format!("no node at the origin at t = {}", s.t))?;
        if *track.get_or_insert(n.track) != n.track {
            return Err(format!("origin node lost its track at t = {}", s.t));
        }
        indices.push(n.node.index);
    }
    if indices.iter().any(|i| *i != indices[0] || i.is_none()) {
        return Err(format!("origin index changes: {indices:?}"));
    }
    let flec: Vec<_> = rep.transitions.iter().filter(|t| t.kind == TransitionKind::FlecHyperbonode).collect();
    let [e] = flec.as_slice() else {
        return Err(format!("expected one flec-hyperbonode event, got {:?}", rep.transitions));
    };
    if e.t_interval.iter().any(|t| t.abs() > 1e-3) {
        return Err(format!("event bracket {:?} not at t = 0", e.t_interval));
    }
    let at_infinity = e.flags.contains(&NodeFlag::FlecHyperbonode) || e.rho_extreme.is_some_and(|r| r >= RHO_CAP);
    if !at_infinity {
        return Err(format!("rho does not reach the infinite marker (largest |rho| {:?})", e.rho_extreme));
    }
    Ok(format!("origin node persists with index {:?}; rho through infinity at t in {:?}", indices[0].unwrap_or(0), e.t_interval))
}

fn ellipnode_sweeps() -> Check {
    let rep = sweep(&persistent_ellipnode_family(), &Window::square(0.3), 128, (0.0, 1.0), 100).map_err(|e| e.to_string())?;
    let comp = origin_component(&rep, NodeKind::Ellipnode)?;
    let series = index_sum(&rep, comp).map_err(|e| e.to_string())?;
    if series.sums.iter().any(|&s| s != 1) {
        return Err(format!("persistent family sign sums {:?}", series.sums));
    }
    if !rep.transitions.is_empty() {
        return Err(format!("persistent family reports transitions {:?}", rep.transitions));
    }

    let rep = sweep(&double_ellipnode_family(), &Window::square(0.25), 128, (-0.003, 0.003), 100).map_err(|e| e.to_string())?;
    let bad = contract_violations(&rep);
    if !bad.is_empty() {
        return Err(bad.join("; "));
    }
    let events: Vec<_> = rep.transitions.iter().filter(|t| t.kind == TransitionKind::DoubleEllipnode).collect();
    let [e] = events.as_slice() else {
        return Err(format!("expected one double-ellipnode event, got {:?}", rep.transitions));
    };
    let t_event = 0.5 * (e.t_interval[0] + e.t_interval[1]);
    let signs = |s: &crate::sweep::Sample| -> Vec<i8> {
        let mut v: Vec<i8> = s.nodes.iter().filter(|n| n.node.kind == NodeKind::Ellipnode).filter_map(|n| n.node.index).collect();
        v.sort();
        v
    };
    let before: Vec<_> = rep.samples.iter().filter(|s| s.t < t_event).map(signs).collect();
    let after: Vec<_> = rep.samples.iter().filter(|s| s.t > t_event).map(signs).collect();
    let pair = |v: &Vec<i8>| v == &vec![-1, 1];
    let one_side = (before.iter().all(pair) && after.iter().all(Vec::is_empty))
        || (after.iter().all(pair) && before.iter().all(Vec::is_empty));
    if !one_side {
        return Err(format!("ellipnode signs before {before:?} after {after:?}"));
    }
    Ok(format!(
        "persistent sign sum 1 over 100 samples; opposite-sign pair on one side of t = {t_event:.2e} only"
    ))
}

/// A small random collineation fixing the origin.
fn random_projective(r: &mut ChaCha8Rng) -> ProjectiveMap {
    loop {
        let mut m = Matrix4::identity();
        for i in 0..4 {
            for j in 0..3 {
                m[(i, j)] += uniform(r, 0.3);
            }
        }
        if let Ok(p) = ProjectiveMap::new(m) {
            return p;
        }
    }
}

fn projective_invariance() -> Check {
    let mut r = rng(10);
    let (mut worst, mut nodes) = (0.0f64, 0);
    while nodes < 50 {
        let jet = random_node_jet(&mut r);
        let Ok(ExtendedReal::Finite(rho)) = rho_hyperbonode(&jet, 0.0, 0.0) else { continue };
        if !(1e-2..=1e2).contains(&rho.abs()) {
            continue;
        }
        let index = index_hyperbonode(&jet, 0.0, 0.0).map_err(|e| e.to_string())?;
        nodes += 1;
        for _ in 0..20 {
            let image = jet.project_regraph(&random_projective(&mut r)).map_err(|e| e.to_string())?;
            let rho2 = finite(rho_hyperbonode(&image, 0.0, 0.0), "image rho")?;
            let index2 = index_hyperbonode(&image, 0.0, 0.0).map_err(|e| format!("image index: {e}"))?;
            if index2 != index {
                return Err(format!("index {index} became {index2}"));
            }
            worst = worst.max(rel_diff(rho, rho2));
        }
    }
    if worst <= 1e-6 {
        Ok(format!("50 nodes x 20 maps, max relative change of rho {worst:.2e}, indices unchanged"))
    } else {
        Err(format!("max relative change of rho {worst:.3e} > 1e-6"))
    }
}

/// Asymptotic direction nearest to `prev` from the eigenbasis of the Hessian.
fn oracle_direction(jet: &MongeJet, x: f64, y: f64, prev: [f64; 2]) -> Option<[f64; 2]> {
    let p = jet.partials(x, y);
    let h = nalgebra::Matrix2::new(p.get(2, 0), p.get(1, 1), p.get(1, 1), p.get(0, 2));
    let eig = SymmetricEigen::new(h);
    let (l0, l1) = (eig.eigenvalues[0], eig.eigenvalues[1]);
    if l0 * l1 >= 0.0 {
        return None;
    }
    let (e0, e1) = (eig.eigenvectors.column(0), eig.eigenvectors.column(1));
    let (a, b) = (l1.abs().sqrt(), l0.abs().sqrt());
    let cands = [[a * e0[0] + b * e1[0], a * e0[1] + b * e1[1]], [a * e0[0] - b * e1[0], a * e0[1] - b * e1[1]]];
    let best = cands
        .iter()
        .map(|c| {
            let n = c[0].hypot(c[1]);
            [c[0] / n, c[1] / n]
        })
        .max_by(|u, v| (u[0] * prev[0] + u[1] * prev[1]).abs().total_cmp(&(v[0] * prev[0] + v[1] * prev[1]).abs()))?;
    let s = if best[0] * prev[0] + best[1] * prev[1] < 0.0 { -1.0 } else { 1.0 };
    Some([s * best[0], s * best[1]])
}

/// Integrates the asymptotic line through `(x, y)` tangent to `d` over arc length `s` with RK4.
fn oracle_follow(jet: &MongeJet, x: f64, y: f64, d: [f64; 2], s: f64, substeps: usize) -> Option<([f64; 2], [f64; 2])> {
    let h = s / substeps as f64;
    let mut pt = [x, y];
    let mut dir = d;
    for _ in 0..substeps {
        let f = |q: [f64; 2], prev: [f64; 2]| oracle_direction(jet, q[0], q[1], prev);
        let k1 = f(pt, dir)?;
        let k2 = f([pt[0] + 0.5 * h * k1[0], pt[1] + 0.5 * h * k1[1]], k1)?;
        let k3 = f([pt[0] + 0.5 * h * k2[0], pt[1] + 0.5 * h * k2[1]], k2)?;
        let k4 = f([pt[0] + h * k3[0], pt[1] + h * k3[1]], k3)?;
        pt = [
            pt[0] + h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
            pt[1] + h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
        ];
        dir = f(pt, k4)?;
    }
    Some((pt, dir))
}

/// Sign of `det(γ', γ'', γ''')` of the space curve over the asymptotic line, by finite differences.
fn oracle_torsion_sign(jet: &MongeJet, x: f64, y: f64, d: [f64; 2], h: f64) -> Option<f64> {
    let mut g = Vec::with_capacity(5);
    for k in [-2.0, -1.0, 0.0, 1.0, 2.0] {
        let q = if k == 0.0 { [x, y] } else { oracle_follow(jet, x, y, d, k * h, 6)?.0 };
        g.push([q[0], q[1], jet.eval(q[0], q[1])]);
    }
    let mut d1 = [0.0; 3];
    let mut d2 = [0.0; 3];
    let mut d3 = [0.0; 3];
    for c in 0..3 {
        d1[c] = (g[3][c] - g[1][c]) / (2.0 * h);
        d2[c] = (g[3][c] - 2.0 * g[2][c] + g[1][c]) / (h * h);
        d3[c] = (g[4][c] - 2.0 * g[3][c] + 2.0 * g[1][c] - g[0][c]) / (2.0 * h * h * h);
    }
    let det = d1[0] * (d2[1] * d3[2] - d2[2] * d3[1]) - d1[1] * (d2[0] * d3[2] - d2[2] * d3[0])
        + d1[2] * (d2[0] * d3[1] - d2[1] * d3[0]);
    Some(det)
}

fn random_hyperbolic_jet(r: &mut ChaCha8Rng) -> MongeJet {
    let mut terms = Vec::new();
    for deg in 2..=4 {
        for i in 0..=deg {
            terms.push((i, deg - i, uniform(r, 1.0)));
        }
    }
    MongeJet::from_terms(5, &terms).expect("valid jet")
}

fn labeled_direction(
    jet: &MongeJet,
    labeler: &Labeler,
    x: f64,
    y: f64,
    label: Label,
) -> std::result::Result<[f64; 2], String> {
    let frame = asymptotic_directions(jet, x, y).map_err(|e| e.to_string())?;
    let frame = left_right_label_with(labeler, &frame).map_err(|e| e.to_string())?;
    let d = frame.labeled(label).ok_or("no labeled direction")?;
    let n = d.dx.hypot(d.dy);
    Ok([d.dx / n, d.dy / n])
}

fn labeling() -> Check {
    let mut r = rng(11);
    let (mut points, mut skipped) = (0, 0);
    while points < 100 {
        let jet = random_hyperbolic_jet(&mut r);
        let (x, y) = (uniform(&mut r, 0.3), uniform(&mut r, 0.3));
        if jet.partials(x, y).discriminant() < 0.05 {
            skipped += 1;
            continue;
        }
        let labeler = Labeler::new(&jet, LABEL_OFFSET_FRACTION);
        // Oracle signs at two step sizes must agree and be well separated from zero.
        let mut ok = true;
        let mut checks = Vec::new();
        for label in [Label::Right, Label::Left] {
            let d = labeled_direction(&jet, &labeler, x, y, label)?;
            let (Some(a), Some(b)) = (oracle_torsion_sign(&jet, x, y, d, 1e-2), oracle_torsion_sign(&jet, x, y, d, 5e-3)) else {
                ok = false;
                break;
            };
            if a * b <= 0.0 || (a - b).abs() > 0.1 * a.abs() {
                ok = false;
                break;
            }
            checks.push((label, d, a));
        }
        if !ok {
            skipped += 1;
            continue;
        }
        for (label, _, det) in &checks {
            let oracle = if *det > 0.0 { Label::Right } else { Label::Left };
            if oracle != *label {
                return Err(format!("at ({x}, {y}) the {label:?} direction integrates to a {oracle:?} curve"));
            }
        }
        // Follow the right foliation for 50 samples; the tangent must stay labeled right.
        let (_, mut dir, _) = checks[0];
        let mut leaf = Vec::with_capacity(50);
        let mut q = [x, y];
        while leaf.len() < 50 {
            let Some((next, next_dir)) = oracle_follow(&jet, q[0], q[1], dir, 2e-3, 2) else { break };
            if jet.partials(next[0], next[1]).discriminant() < 0.01 {
                break;
            }
            q = next;
            dir = next_dir;
            leaf.push((q, dir));
        }
        if leaf.len() < 50 {
            skipped += 1;
            continue;
        }
        for (q, dir) in leaf {
            let right = labeled_direction(&jet, &labeler, q[0], q[1], Label::Right)?;
            if (right[0] * dir[0] + right[1] * dir[1]).abs() < 0.99 {
                return Err(format!("label flips along the right foliation at ({}, {})", q[0], q[1]));
            }
        }
        points += 1;
    }
    Ok(format!("100 hyperbolic points agree with the integration oracle ({skipped} ill-conditioned draws skipped); labels constant along 50-point leaves"))
}
