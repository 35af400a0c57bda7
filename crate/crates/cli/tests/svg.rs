//! Figure rendering on hand-built inputs.

use umbilic_cli::render_svg;
use umbilic_core::tracing::{Grid, Polyline};
use umbilic_core::{CurveKind, ExtendedReal, NodeKind, NodeRecord, TracedCurve, Window};

fn curve(kind: CurveKind, segments: Vec<Polyline>) -> TracedCurve {
    let window = Window::square(1.0);
    TracedCurve {
        kind,
        segments,
        residual: 0.0,
        grid: Grid::new(window, 16).unwrap(),
        gaps: Vec::new(),
        degenerate: false,
        label_failures: 0,
        label_mismatches: 0,
    }
}

#[test]
fn empty_inputs_give_a_frame() {
    let svg = render_svg(&[], &[], &Window::square(1.0));
    assert!(svg.starts_with("<?xml"));
    assert!(svg.contains(r#"viewBox="0 0 800 800""#));
    assert!(svg.trim_end().ends_with("</svg>"));
    assert!(!svg.contains("<path"));
}

#[test]
fn three_point_polyline_is_one_path() {
    let poly = Polyline::from_points(vec![[-1.0, -1.0], [0.0, 0.0], [1.0, 0.5]], false);
    let svg = render_svg(&[curve(CurveKind::Parabolic, vec![poly])], &[], &Window::square(1.0));
    assert_eq!(svg.matches("<path").count(), 1);
    let path = svg.lines().find(|l| l.starts_with("<path")).unwrap();
    assert!(path.contains(r#"d="M0.000 800.000 L400.000 400.000 L800.000 200.000""#), "{path}");
}

#[test]
fn left_branch_has_outline_and_nodes_are_marked() {
    let poly = Polyline::from_points(vec![[0.0, 0.0], [0.5, 0.5]], false);
    let node = |kind, index| NodeRecord {
        kind,
        x: 0.0,
        y: 0.0,
        rho: ExtendedReal::Finite(0.5),
        parity: None,
        index,
        residual: 0.0,
        flags: Vec::new(),
        iterations: 0,
    };
    let svg = render_svg(
        &[curve(CurveKind::FlecnodalLeft, vec![poly])],
        &[node(NodeKind::Hyperbonode, Some(-1)), node(NodeKind::Ellipnode, Some(1))],
        &Window::new(-1.0, 1.0, -0.5, 0.5).unwrap(),
    );
    assert!(svg.contains(r#"viewBox="0 0 800 400""#));
    assert_eq!(svg.matches(r#"class="left""#).count(), 2);
    assert!(svg.contains(r#"<circle class="hyperbonode""#));
    assert!(svg.contains(r#"<rect class="ellipnode""#));
    assert!(svg.contains(">-</text>") && svg.contains(">+</text>"));
}
