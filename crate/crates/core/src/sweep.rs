//! One-parameter family sweeps: node tracking, transitions and index sums.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::PointKind;
use crate::invariants::{ExtendedReal, NodeFlag};
use crate::jets::FamilyJet;
use crate::nodes::{find_ellipnodes_report, hyperbonodes_from_branches, refine_node, NodeKind, NodeRecord};
use crate::tracing::{component_map, trace_flecnodal_with, trace_parabolic, ComponentMap, TraceOptions, Window};

/// Extra family evaluations allowed when localizing one transition.
pub const BISECTION_EVALS: usize = 20;
/// `r_match` is this multiple of the largest displacement seen in the previous step.
pub const MATCH_FACTOR: f64 = 5.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SweepOptions {
    pub hyperbonodes: bool,
    pub ellipnodes: bool,
    pub bisection_evals: usize,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self { hyperbonodes: true, ellipnodes: true, bisection_evals: BISECTION_EVALS }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SampleNode {
    pub node: NodeRecord,
    /// Component of the node's own kind, if it could be located.
    pub component: Option<usize>,
    /// Identity carried across matched samples.
    pub track: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ComponentTally {
    pub component_id: usize,
    pub kind: PointKind,
    pub interior: bool,
    pub n_hyperbonodes: usize,
    pub index_sum: i32,
    pub n_ellipnodes: usize,
    pub sign_sum: i32,
    pub flags: Vec<NodeFlag>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ComponentShape {
    pub kind: PointKind,
    pub touches_boundary: bool,
    pub euler_characteristic: Option<i32>,
    pub boundary_curves: usize,
    pub closed_boundary_curves: usize,
}

/// Computable proxy for the topological type of the domains in the window.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TopologySignature {
    pub components: Vec<ComponentShape>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Sample {
    pub t: f64,
    pub nodes: Vec<SampleNode>,
    pub tallies: Vec<ComponentTally>,
    pub topology: TopologySignature,
    pub rejected_seeds: usize,
}

/// Matched node indices between sample `k` and `k + 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct StepMatching {
    pub r_match: f64,
    pub pairs: Vec<(usize, usize)>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TransitionKind {
    CreationAnnihilation,
    FlecHyperbonode,
    DoubleEllipnode,
    TopologyChange,
    BoundaryCrossing,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "status", content = "detail", rename_all = "kebab-case")]
pub enum Contract {
    Satisfied,
    Violated(String),
    NotApplicable,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Transition {
    pub kind: TransitionKind,
    /// Sample index on the left of the bracket.
    pub step: usize,
    /// Bracket in `t` after localization.
    pub t_interval: [f64; 2],
    pub location: Option<[f64; 2]>,
    pub node_kind: Option<NodeKind>,
    /// Indices of the involved nodes at the left and right samples.
    pub indices_before: Vec<Option<i8>>,
    pub indices_after: Vec<Option<i8>>,
    /// Flags of the node found closest to the event during localization.
    pub flags: Vec<NodeFlag>,
    /// Smallest `|ρ|` (or largest, for flec-hyperbonodes) seen while localizing.
    pub rho_extreme: Option<f64>,
    pub contract: Contract,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepReport {
    pub family: FamilyJet,
    pub window: Window,
    pub grid: usize,
    pub options: SweepOptions,
    pub samples: Vec<Sample>,
    pub matchings: Vec<StepMatching>,
    pub transitions: Vec<Transition>,
}

/// Per-sample index sums of one component and the changes no transition explains.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IndexSumSeries {
    pub component_id: usize,
    pub kind: PointKind,
    pub sums: Vec<i32>,
    /// Steps `k` where the sum changes between samples `k` and `k + 1` without a topology change.
    pub uncovered_changes: Vec<usize>,
}

fn sample_times(t_range: (f64, f64), steps: usize) -> Vec<f64> {
    let (a, b) = t_range;
    (0..steps).map(|k| if k + 1 == steps { b } else { a + (b - a) * k as f64 / (steps - 1) as f64 }).collect()
}

fn node_component(map: &ComponentMap, node: &NodeRecord) -> Option<usize> {
    let kind = match node.kind {
        NodeKind::Hyperbonode => PointKind::Hyperbolic,
        NodeKind::Ellipnode => PointKind::Elliptic,
    };
    map.locate(node.x, node.y, kind)
}

fn evaluate_sample(family: &FamilyJet, t: f64, window: &Window, grid: usize, opts: &SweepOptions) -> Result<Sample> {
    let jet = family.eval(t);
    let parabolic = trace_parabolic(&jet, window, grid)?;
    let map = component_map(&jet, &parabolic);
    let mut records = Vec::new();
    let mut rejected_seeds = 0;
    if opts.hyperbonodes {
        let (left, right) = trace_flecnodal_with(&jet, window, grid, &TraceOptions::fast())?;
        let found = hyperbonodes_from_branches(&jet, &left, &right);
        rejected_seeds += found.rejected.len();
        records.extend(found.nodes);
    }
    if opts.ellipnodes {
        let found = find_ellipnodes_report(&jet, window, grid)?;
        rejected_seeds += found.rejected.len();
        records.extend(found.nodes);
    }
    let nodes: Vec<SampleNode> = records
        .into_iter()
        .map(|node| SampleNode { component: node_component(&map, &node), node, track: 0 })
        .collect();

    let tallies = map
        .components
        .iter()
        .map(|c| {
            let mine = nodes.iter().filter(|n| n.component == Some(c.id));
            let mut tally = ComponentTally {
                component_id: c.id,
                kind: c.kind,
                interior: !c.touches_boundary,
                n_hyperbonodes: 0,
                index_sum: 0,
                n_ellipnodes: 0,
                sign_sum: 0,
                flags: Vec::new(),
            };
            for n in mine {
                let index = n.node.index.unwrap_or(0) as i32;
                match n.node.kind {
                    NodeKind::Hyperbonode => {
                        tally.n_hyperbonodes += 1;
                        tally.index_sum += index;
                    }
                    NodeKind::Ellipnode => {
                        tally.n_ellipnodes += 1;
                        tally.sign_sum += index;
                    }
                }
                for f in &n.node.flags {
                    if !tally.flags.contains(f) {
                        tally.flags.push(*f);
                    }
                }
            }
            tally.flags.sort();
            tally
        })
        .collect();
    let topology = TopologySignature {
        components: map
            .components
            .iter()
            .map(|c| ComponentShape {
                kind: c.kind,
                touches_boundary: c.touches_boundary,
                euler_characteristic: c.euler_characteristic,
                boundary_curves: c.boundary_curves.len(),
                closed_boundary_curves: c.boundary_curves.iter().filter(|&&s| parabolic.segments[s].closed).count(),
            })
            .collect(),
    };
    Ok(Sample { t, nodes, tallies, topology, rejected_seeds })
}

fn dist(a: &NodeRecord, b: &NodeRecord) -> f64 {
    (a.x - b.x).hypot(a.y - b.y)
}

/// Greedy nearest-first matching of same-kind nodes within `r`.
///
/// Nodes left over are matched again within `MATCH_FACTOR * r` when their
/// indices agree, which catches nodes that speed up right after a creation.
fn match_nodes(a: &[SampleNode], b: &[SampleNode], r: f64) -> Vec<(usize, usize)> {
    let (mut used_a, mut used_b) = (vec![false; a.len()], vec![false; b.len()]);
    let mut pairs = Vec::new();
    for (radius, same_index) in [(r, false), (MATCH_FACTOR * r, true)] {
        let mut cand = Vec::new();
        for (i, p) in a.iter().enumerate() {
            for (j, q) in b.iter().enumerate() {
                let d = dist(&p.node, &q.node);
                let index_ok = !same_index || (p.node.index.is_some() && p.node.index == q.node.index);
                if !used_a[i] && !used_b[j] && p.node.kind == q.node.kind && d <= radius && index_ok {
                    cand.push((d, i, j));
                }
            }
        }
        cand.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)).then(x.2.cmp(&y.2)));
        for (_, i, j) in cand {
            if !used_a[i] && !used_b[j] {
                used_a[i] = true;
                used_b[j] = true;
                pairs.push((i, j));
            }
        }
    }
    pairs.sort();
    pairs
}

/// Evaluates the family at `t_range` samples, tracks nodes and detects transitions.
pub fn sweep(family: &FamilyJet, window: &Window, grid: usize, t_range: (f64, f64), steps: usize) -> Result<SweepReport> {
    sweep_with(family, window, grid, t_range, steps, &SweepOptions::default())
}

pub fn sweep_with(
    family: &FamilyJet,
    window: &Window,
    grid: usize,
    t_range: (f64, f64),
    steps: usize,
    opts: &SweepOptions,
) -> Result<SweepReport> {
    if steps < 2 {
        return Err(Error::Precondition(format!("a sweep needs at least 2 samples, got {steps}")));
    }
    if !(t_range.0.is_finite() && t_range.1.is_finite() && t_range.0 < t_range.1) {
        return Err(Error::Precondition(format!("invalid parameter range {t_range:?}")));
    }
    let times = sample_times(t_range, steps);
    let mut samples = times
        .par_iter()
        .map(|&t| evaluate_sample(family, t, window, grid, opts))
        .collect::<Result<Vec<_>>>()?;

    let bootstrap = window.diameter() / steps as f64;
    let mut matchings = Vec::with_capacity(steps - 1);
    let mut next_track = samples[0].nodes.len();
    for (k, n) in samples[0].nodes.iter_mut().enumerate() {
        n.track = k;
    }
    let mut r_match = bootstrap;
    for k in 0..steps - 1 {
        let pairs = match_nodes(&samples[k].nodes, &samples[k + 1].nodes, r_match);
        let mut moved = 0.0f64;
        let mut tracks = vec![None; samples[k + 1].nodes.len()];
        for &(i, j) in &pairs {
            moved = moved.max(dist(&samples[k].nodes[i].node, &samples[k + 1].nodes[j].node));
            tracks[j] = Some(samples[k].nodes[i].track);
        }
        for (j, n) in samples[k + 1].nodes.iter_mut().enumerate() {
            n.track = tracks[j].unwrap_or_else(|| {
                next_track += 1;
                next_track - 1
            });
        }
        matchings.push(StepMatching { r_match, pairs });
        r_match = (MATCH_FACTOR * moved).max(bootstrap);
    }

    let mut report = SweepReport {
        family: family.clone(),
        window: *window,
        grid,
        options: *opts,
        samples,
        matchings,
        transitions: Vec::new(),
    };
    report.transitions = detect_transitions(&report);
    Ok(report)
}

fn sign_of(rho: &ExtendedReal) -> Option<i8> {
    rho.sign()
}

/// `true` when a sign change of ρ between `a` and `b` passes through infinity rather than zero.
fn through_infinity(a: &ExtendedReal, b: &ExtendedReal) -> bool {
    match (a, b) {
        (ExtendedReal::Finite(x), ExtendedReal::Finite(y)) => x.abs() * y.abs() > 1.0,
        _ => true,
    }
}

fn lerp(a: [f64; 2], b: [f64; 2], s: f64) -> [f64; 2] {
    [a[0] + (b[0] - a[0]) * s, a[1] + (b[1] - a[1]) * s]
}

fn pos(n: &NodeRecord) -> [f64; 2] {
    [n.x, n.y]
}

struct Localized {
    interval: [f64; 2],
    node: Option<NodeRecord>,
    rho_extreme: Option<f64>,
}

/// Bisects on the sign of ρ at a node tracked from `a` (at `ta`) to `b` (at `tb`).
fn localize_sign_change(
    family: &FamilyJet,
    (ta, a): (f64, &NodeRecord),
    (tb, b): (f64, &NodeRecord),
    toward_infinity: bool,
    evals: usize,
) -> Localized {
    let (mut lo, mut hi) = (ta, tb);
    let (mut p_lo, mut p_hi) = (pos(a), pos(b));
    let s_lo = sign_of(&a.rho);
    let magnitude = |r: &ExtendedReal| match r {
        ExtendedReal::Finite(v) => v.abs(),
        ExtendedReal::Infinite => f64::INFINITY,
    };
    let better = |m: f64, best: f64| if toward_infinity { m > best } else { m < best };
    let mut best = Localized { interval: [lo, hi], node: None, rho_extreme: None };
    let mut best_mag = if toward_infinity { f64::NEG_INFINITY } else { f64::INFINITY };
    for _ in 0..evals {
        // Off-center retries step around parameters where the node is too degenerate to refine.
        let found = [0.5, 0.4, 0.6].into_iter().find_map(|s| {
            let t = lo + s * (hi - lo);
            refine_node(&family.eval(t), lerp(p_lo, p_hi, s), a.kind).ok().map(|n| (t, n))
        });
        let Some((t, node)) = found else { break };
        let m = magnitude(&node.rho);
        if better(m, best_mag) {
            best_mag = m;
            best.node = Some(node.clone());
        }
        let flagged = !node.flags.is_empty() || node.rho.is_infinite();
        match sign_of(&node.rho) {
            Some(s) if Some(s) == s_lo && !flagged => {
                lo = t;
                p_lo = pos(&node);
            }
            Some(_) if !flagged => {
                hi = t;
                p_hi = pos(&node);
            }
            _ => {
                lo = t;
                hi = t;
                break;
            }
        }
    }
    best.interval = [lo, hi];
    best.rho_extreme = best.node.as_ref().map(|_| best_mag);
    best
}

/// Bisects on the existence of a close pair of nodes that is present at `t_exists` only.
fn localize_pair(
    family: &FamilyJet,
    t_exists: f64,
    t_gone: f64,
    pair: (&NodeRecord, &NodeRecord),
    evals: usize,
    separation: f64,
) -> Localized {
    let (mut good, mut bad) = (t_exists, t_gone);
    let mut seeds = (pos(pair.0), pos(pair.1));
    let mut closest: Option<NodeRecord> = None;
    let mut rho_min = f64::INFINITY;
    for n in [pair.0, pair.1] {
        if let ExtendedReal::Finite(r) = n.rho {
            if r.abs() < rho_min {
                rho_min = r.abs();
                closest = Some(n.clone());
            }
        }
    }
    for _ in 0..evals {
        let t = 0.5 * (good + bad);
        let jet = family.eval(t);
        let found = (refine_node(&jet, seeds.0, pair.0.kind), refine_node(&jet, seeds.1, pair.1.kind));
        match found {
            (Ok(u), Ok(v)) if dist(&u, &v) > separation => {
                good = t;
                seeds = (pos(&u), pos(&v));
                for n in [u, v] {
                    if let ExtendedReal::Finite(r) = n.rho {
                        if r.abs() < rho_min {
                            rho_min = r.abs();
                            closest = Some(n);
                        }
                    }
                }
            }
            _ => bad = t,
        }
    }
    let interval = if good < bad { [good, bad] } else { [bad, good] };
    Localized { interval, node: closest, rho_extreme: rho_min.is_finite().then_some(rho_min) }
}

fn near_boundary(w: &Window, n: &NodeRecord, margin: f64) -> bool {
    n.x - w.xmin <= margin || w.xmax - n.x <= margin || n.y - w.ymin <= margin || w.ymax - n.y <= margin
}

fn opposite(a: Option<i8>, b: Option<i8>) -> Option<bool> {
    Some(a? == -b?)
}

fn pair_event_kind(kind: NodeKind) -> TransitionKind {
    match kind {
        NodeKind::Hyperbonode => TransitionKind::CreationAnnihilation,
        NodeKind::Ellipnode => TransitionKind::DoubleEllipnode,
    }
}

/// Classifies the changes between consecutive samples and checks the transition contracts.
///
/// Sign changes of ρ at a persisting node are flec-hyperbonode events when ρ
/// passes through infinity and collision events when it passes through zero.
/// Unmatched nodes join the nearest collision event of their step, cross the
/// window boundary, or pair up as a creation or annihilation.
pub fn detect_transitions(report: &SweepReport) -> Vec<Transition> {
    let mut out = Vec::new();
    let family = &report.family;
    let evals = report.options.bisection_evals;
    let cell = report.window.diameter() / report.grid as f64;
    let separation = 1e-7 * report.window.diameter();
    for (k, m) in report.matchings.iter().enumerate() {
        let (sa, sb) = (&report.samples[k], &report.samples[k + 1]);
        if sa.topology != sb.topology {
            out.push(Transition {
                kind: TransitionKind::TopologyChange,
                step: k,
                t_interval: [sa.t, sb.t],
                location: None,
                node_kind: None,
                indices_before: Vec::new(),
                indices_after: Vec::new(),
                flags: Vec::new(),
                rho_extreme: None,
                contract: Contract::NotApplicable,
            });
        }

        // Collision events at persisting nodes, with the nodes they absorb.
        let mut events: Vec<(Transition, usize, usize)> = Vec::new();
        for &(i, j) in &m.pairs {
            let (a, b) = (&sa.nodes[i].node, &sb.nodes[j].node);
            let (ga, gb) = (sign_of(&a.rho), sign_of(&b.rho));
            let changed = match (ga, gb) {
                (Some(x), Some(y)) => x != y,
                _ => a.rho.is_infinite() != b.rho.is_infinite(),
            };
            if !changed {
                continue;
            }
            let infinite = through_infinity(&a.rho, &b.rho);
            let loc = localize_sign_change(family, (sa.t, a), (sb.t, b), infinite, evals);
            let kind = match (a.kind, infinite) {
                (NodeKind::Hyperbonode, true) => TransitionKind::FlecHyperbonode,
                (NodeKind::Hyperbonode, false) => TransitionKind::CreationAnnihilation,
                (NodeKind::Ellipnode, _) => TransitionKind::DoubleEllipnode,
            };
            let contract = match kind {
                TransitionKind::FlecHyperbonode => match (a.index, b.index) {
                    (Some(x), Some(y)) if x == y => Contract::Satisfied,
                    (Some(x), Some(y)) => Contract::Violated(format!("index changed from {x} to {y}")),
                    _ => Contract::Violated("index undefined next to the event".into()),
                },
                _ if infinite => Contract::Violated("ellipnode invariant passed through infinity".into()),
                _ => Contract::NotApplicable,
            };
            let location = loc.node.as_ref().map(pos).or(Some(pos(b)));
            events.push((
                Transition {
                    kind,
                    step: k,
                    t_interval: loc.interval,
                    location,
                    node_kind: Some(a.kind),
                    indices_before: vec![a.index],
                    indices_after: vec![b.index],
                    flags: loc.node.map(|n| n.flags).unwrap_or_default(),
                    rho_extreme: loc.rho_extreme,
                    contract,
                },
                i,
                j,
            ));
        }

        let matched_a: Vec<bool> = (0..sa.nodes.len()).map(|i| m.pairs.iter().any(|p| p.0 == i)).collect();
        let matched_b: Vec<bool> = (0..sb.nodes.len()).map(|j| m.pairs.iter().any(|p| p.1 == j)).collect();
        let margin = m.r_match + 2.0 * cell;
        // (node, on the right sample)
        let mut loose: Vec<(&NodeRecord, bool)> = Vec::new();
        for (side, sample, matched) in [(false, sa, &matched_a), (true, sb, &matched_b)] {
            for (i, n) in sample.nodes.iter().enumerate() {
                if matched[i] {
                    continue;
                }
                let node = &n.node;
                let collision = events
                    .iter_mut()
                    .filter(|(e, ..)| e.kind != TransitionKind::FlecHyperbonode && e.node_kind == Some(node.kind))
                    .min_by(|x, y| {
                        let d = |e: &Transition| e.location.map_or(f64::INFINITY, |l| (l[0] - node.x).hypot(l[1] - node.y));
                        d(&x.0).total_cmp(&d(&y.0))
                    });
                if let Some((e, ia, jb)) = collision {
                    let partner = if side { &sb.nodes[*jb].node } else { &sa.nodes[*ia].node };
                    if side {
                        e.indices_after.push(node.index);
                    } else {
                        e.indices_before.push(node.index);
                    }
                    let verdict = match opposite(node.index, partner.index) {
                        Some(true) => Contract::Satisfied,
                        Some(false) => Contract::Violated(format!(
                            "colliding nodes at ({}, {}) and ({}, {}) share index {:?}",
                            node.x, node.y, partner.x, partner.y, node.index
                        )),
                        None => Contract::Violated("index undefined next to the event".into()),
                    };
                    if !matches!(e.contract, Contract::Violated(_)) {
                        e.contract = verdict;
                    }
                } else if near_boundary(&report.window, node, margin) {
                    out.push(Transition {
                        kind: TransitionKind::BoundaryCrossing,
                        step: k,
                        t_interval: [sa.t, sb.t],
                        location: Some(pos(node)),
                        node_kind: Some(node.kind),
                        indices_before: if side { Vec::new() } else { vec![node.index] },
                        indices_after: if side { vec![node.index] } else { Vec::new() },
                        flags: Vec::new(),
                        rho_extreme: None,
                        contract: Contract::NotApplicable,
                    });
                } else {
                    loose.push((node, side));
                }
            }
        }
        for (e, ..) in events {
            let e = if e.contract == Contract::NotApplicable && e.kind != TransitionKind::FlecHyperbonode {
                Transition { contract: Contract::Violated("sign change without a partner node".into()), ..e }
            } else {
                e
            };
            out.push(e);
        }

        // Remaining nodes pair up nearest-first on the same side.
        let mut cand = Vec::new();
        for x in 0..loose.len() {
            for y in x + 1..loose.len() {
                if loose[x].1 == loose[y].1 && loose[x].0.kind == loose[y].0.kind {
                    cand.push((dist(loose[x].0, loose[y].0), x, y));
                }
            }
        }
        cand.sort_by(|p, q| p.0.total_cmp(&q.0).then(p.1.cmp(&q.1)).then(p.2.cmp(&q.2)));
        let mut used = vec![false; loose.len()];
        for (_, x, y) in cand {
            if used[x] || used[y] {
                continue;
            }
            used[x] = true;
            used[y] = true;
            let ((u, side), (v, _)) = (loose[x], loose[y]);
            let (t_exists, t_gone) = if side { (sb.t, sa.t) } else { (sa.t, sb.t) };
            let loc = localize_pair(family, t_exists, t_gone, (u, v), evals, separation);
            let contract = match opposite(u.index, v.index) {
                Some(true) => Contract::Satisfied,
                Some(false) => Contract::Violated(format!("pair shares index {:?}", u.index)),
                None => Contract::Violated("index undefined next to the event".into()),
            };
            let indices = vec![u.index, v.index];
            out.push(Transition {
                kind: pair_event_kind(u.kind),
                step: k,
                t_interval: loc.interval,
                location: Some(lerp(pos(u), pos(v), 0.5)),
                node_kind: Some(u.kind),
                indices_before: if side { Vec::new() } else { indices.clone() },
                indices_after: if side { indices } else { Vec::new() },
                flags: loc.node.map(|n| n.flags).unwrap_or_default(),
                rho_extreme: loc.rho_extreme,
                contract,
            });
        }
        for (x, &(u, side)) in loose.iter().enumerate() {
            if used[x] {
                continue;
            }
            out.push(Transition {
                kind: pair_event_kind(u.kind),
                step: k,
                t_interval: [sa.t, sb.t],
                location: Some(pos(u)),
                node_kind: Some(u.kind),
                indices_before: if side { Vec::new() } else { vec![u.index] },
                indices_after: if side { vec![u.index] } else { Vec::new() },
                flags: Vec::new(),
                rho_extreme: None,
                contract: Contract::Violated("unpaired node appeared or vanished".into()),
            });
        }
    }
    out
}

/// Index sums of one component across all samples.
///
/// Hyperbolic components sum hyperbonode indices and elliptic components sum
/// ellipnode signs. Nodes crossing the window boundary inside the component
/// make the sums meaningless and are reported as a coverage error.
pub fn index_sum(report: &SweepReport, component_id: usize) -> Result<IndexSumSeries> {
    let mut kind = None;
    let mut sums = Vec::with_capacity(report.samples.len());
    for s in &report.samples {
        let tally = s.tallies.iter().find(|c| c.component_id == component_id).ok_or_else(|| {
            Error::Coverage(format!("component {component_id} is missing at t = {}", s.t))
        })?;
        if *kind.get_or_insert(tally.kind) != tally.kind {
            return Err(Error::Coverage(format!("component {component_id} changes type at t = {}", s.t)));
        }
        sums.push(if tally.kind == PointKind::Hyperbolic { tally.index_sum } else { tally.sign_sum });
    }
    let kind = kind.ok_or_else(|| Error::Coverage("empty sweep".into()))?;
    let node_kind = if kind == PointKind::Hyperbolic { NodeKind::Hyperbonode } else { NodeKind::Ellipnode };
    for tr in report.transitions.iter().filter(|t| t.kind == TransitionKind::BoundaryCrossing && t.node_kind == Some(node_kind)) {
        let s = &report.samples[tr.step];
        let s2 = &report.samples[tr.step + 1];
        let inside = [s, s2].iter().any(|smp| {
            smp.nodes.iter().any(|n| Some(pos(&n.node)) == tr.location && n.component == Some(component_id))
        });
        if inside {
            return Err(Error::Coverage(format!(
                "a {node_kind:?} leaves component {component_id} through the window boundary near t = {}",
                s.t
            )));
        }
    }
    let topo_steps: Vec<usize> =
        report.transitions.iter().filter(|t| t.kind == TransitionKind::TopologyChange).map(|t| t.step).collect();
    let uncovered_changes =
        (0..sums.len().saturating_sub(1)).filter(|&k| sums[k] != sums[k + 1] && !topo_steps.contains(&k)).collect();
    Ok(IndexSumSeries { component_id, kind, sums, uncovered_changes })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flec_family() -> FamilyJet {
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
        .unwrap()
    }

    #[test]
    fn sample_times_include_endpoints() {
        let ts = sample_times((-0.5, 0.5), 4);
        assert_eq!(ts, vec![-0.5, -0.5 + 1.0 / 3.0, -0.5 + 2.0 / 3.0, 0.5]);
    }

    #[test]
    fn flec_hyperbonode_keeps_index() {
        let opts = SweepOptions { ellipnodes: false, ..Default::default() };
        let rep = sweep_with(&flec_family(), &Window::square(0.4), 64, (-0.5, 0.5), 10, &opts).unwrap();
        let flec: Vec<_> = rep.transitions.iter().filter(|t| t.kind == TransitionKind::FlecHyperbonode).collect();
        assert_eq!(flec.len(), 1, "{:?}", rep.transitions);
        assert_eq!(flec[0].contract, Contract::Satisfied);
        assert!(flec[0].t_interval[0].abs() < 1e-3 && flec[0].t_interval[1].abs() < 1e-3);
        assert!(flec[0].flags.contains(&NodeFlag::FlecHyperbonode));
        assert_eq!(rep.transitions.len(), 1);
    }

    #[test]
    fn constant_family_has_no_transitions() {
        let disc = crate::jets::MongeJet::from_terms(5, &[(1, 1, 1.0), (4, 0, 1.0), (2, 2, 2.0), (0, 4, 1.0)]).unwrap();
        let rep = sweep(&FamilyJet::constant(&disc), &Window::square(2.0), 128, (0.0, 1.0), 3).unwrap();
        assert!(rep.transitions.is_empty(), "{:?}", rep.transitions);
        let hyp = rep.samples[0].tallies.iter().find(|c| c.kind == PointKind::Hyperbolic && c.interior).unwrap();
        let series = index_sum(&rep, hyp.component_id).unwrap();
        assert_eq!(series.sums, vec![1, 1, 1]);
        assert!(series.uncovered_changes.is_empty());
    }

    #[test]
    fn rejects_short_sweeps() {
        assert!(sweep(&flec_family(), &Window::square(0.4), 32, (0.0, 1.0), 1).is_err());
    }
}
