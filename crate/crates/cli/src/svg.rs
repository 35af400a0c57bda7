//! Static SVG figures of traced curves and nodes.

use std::fmt::Write;

use umbilic_core::{CurveKind, NodeKind, NodeRecord, TracedCurve, Window};

/// Width of the drawing in user units; the height follows the window aspect ratio.
pub const WIDTH: f64 = 800.0;

const NODE_SIZE: f64 = 5.0;

struct Frame {
    window: Window,
    height: f64,
}

impl Frame {
    fn new(window: &Window) -> Self {
        let aspect = (window.ymax - window.ymin) / (window.xmax - window.xmin);
        Self { window: *window, height: (WIDTH * aspect).round().max(1.0) }
    }

    fn map(&self, p: [f64; 2]) -> (f64, f64) {
        let w = &self.window;
        ((p[0] - w.xmin) / (w.xmax - w.xmin) * WIDTH, (w.ymax - p[1]) / (w.ymax - w.ymin) * self.height)
    }
}

fn style(kind: CurveKind) -> (&'static str, &'static [(&'static str, f64)]) {
    match kind {
        CurveKind::Parabolic => ("parabolic", &[("#7f7f7f", 1.5)]),
        CurveKind::FlecnodalRight => ("right", &[("black", 2.0)]),
        CurveKind::FlecnodalLeft => ("left", &[("#262626", 3.5), ("white", 2.0)]),
    }
}

fn sign_text(index: Option<i8>) -> &'static str {
    match index {
        Some(i) if i > 0 => "+",
        Some(_) => "-",
        None => "?",
    }
}

/// Renders curves and nodes over `window`.
///
/// Every polyline becomes one `path` in `defs`, drawn by one `use` per stroke
/// layer; left branches get a dark outline under a white stroke.
pub fn render_svg(curves: &[TracedCurve], nodes: &[NodeRecord], window: &Window) -> String {
    let frame = Frame::new(window);
    let mut out = String::new();
    let h = frame.height;
    writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#).unwrap();
    writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" xmlns:xlink="http://www.w3.org/1999/xlink" version="1.1" width="{WIDTH}" height="{h}" viewBox="0 0 {WIDTH} {h}">"#
    )
    .unwrap();
    writeln!(out, r##"<rect x="0" y="0" width="{WIDTH}" height="{h}" fill="white" stroke="#bfbfbf"/>"##).unwrap();

    let mut defs = String::new();
    let mut uses = String::new();
    for (c, curve) in curves.iter().enumerate() {
        let (class, layers) = style(curve.kind);
        for (s, poly) in curve.segments.iter().enumerate() {
            if poly.points.is_empty() {
                continue;
            }
            let id = format!("{class}-{c}-{s}");
            let mut d = String::new();
            for (k, p) in poly.points.iter().enumerate() {
                let (x, y) = frame.map(*p);
                write!(d, "{}{x:.3} {y:.3}", if k == 0 { "M" } else { " L" }).unwrap();
            }
            if poly.closed {
                d.push_str(" Z");
            }
            writeln!(defs, r#"<path id="{id}" d="{d}" fill="none"/>"#).unwrap();
            for (color, width) in layers.iter() {
                writeln!(
                    uses,
                    r##"<use xlink:href="#{id}" class="{class}" stroke="{color}" stroke-width="{width}" stroke-linejoin="round"/>"##
                )
                .unwrap();
            }
        }
    }
    if !defs.is_empty() {
        writeln!(out, "<defs>\n{defs}</defs>").unwrap();
        out.push_str(&uses);
    }

    for n in nodes {
        let (x, y) = frame.map([n.x, n.y]);
        match n.kind {
            NodeKind::Hyperbonode => writeln!(
                out,
                r##"<circle class="hyperbonode" cx="{x:.3}" cy="{y:.3}" r="{NODE_SIZE}" fill="#d62728" stroke="black"/>"##
            ),
            NodeKind::Ellipnode => writeln!(
                out,
                r##"<rect class="ellipnode" x="{:.3}" y="{:.3}" width="{}" height="{}" fill="#1f77b4" stroke="black"/>"##,
                x - NODE_SIZE,
                y - NODE_SIZE,
                2.0 * NODE_SIZE,
                2.0 * NODE_SIZE
            ),
        }
        .unwrap();
        writeln!(
            out,
            r#"<text x="{:.3}" y="{:.3}" font-family="sans-serif" font-size="12">{}</text>"#,
            x + 1.5 * NODE_SIZE,
            y - 1.5 * NODE_SIZE,
            sign_text(n.index)
        )
        .unwrap();
    }
    out.push_str("</svg>\n");
    out
}
