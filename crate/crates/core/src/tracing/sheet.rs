//! The inflection function restricted to one labeled slope sheet.
//!
//! On the sheet of the right (or left) asymptotic direction `d`, the
//! flecnodal condition is `C(d) = 0` where `C` is the cubic form. For Newton
//! steps the same condition is written in a slope chart, `I(x, y, p) = 0` with
//! `p = dy/dx`, or in the dual chart `q = dx/dy` when `d` is steep.

use crate::geometry::{parab_tolerance, right_left, Label};
use crate::jets::{MongeJet, Partials};

/// Hyperbolic points closer than this multiple of the parabolic tolerance are skipped.
pub const PARAB_BAND: f64 = 10.0;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SheetPoint {
    /// Unit asymptotic direction of the chosen label.
    pub dir: [f64; 2],
    /// `C(dir)`; odd in `dir`.
    pub cubic: f64,
    /// Whether the dual slope `q = dx/dy` is used.
    pub dual: bool,
    /// `p` or `q`.
    pub slope: f64,
    /// `I` in the chart.
    pub value: f64,
    /// `|a|` in the chart.
    pub a_residual: f64,
    /// Gradient of `(x, y) ↦ I(x, y, p(x, y))`.
    pub grad: [f64; 2],
}

/// `true` when the point is hyperbolic outside the parabolic exclusion band.
pub fn well_hyperbolic(p: &Partials) -> bool {
    p.discriminant() > PARAB_BAND * parab_tolerance(p)
}

/// Value and total gradient of `I` on the sheet through slope `p`, in the direct chart.
fn chart_eval(f: &Partials, p: f64) -> (f64, f64, [f64; 2]) {
    let g = |i, j| f.get(i, j);
    let p2 = p * p;
    let p3 = p2 * p;
    let a = g(2, 0) + 2.0 * g(1, 1) * p + g(0, 2) * p2;
    let value = g(3, 0) + 3.0 * g(2, 1) * p + 3.0 * g(1, 2) * p2 + g(0, 3) * p3;
    let i_x = g(4, 0) + 3.0 * g(3, 1) * p + 3.0 * g(2, 2) * p2 + g(1, 3) * p3;
    let i_y = g(3, 1) + 3.0 * g(2, 2) * p + 3.0 * g(1, 3) * p2 + g(0, 4) * p3;
    let i_p = 3.0 * g(2, 1) + 6.0 * g(1, 2) * p + 3.0 * g(0, 3) * p2;
    let a_x = g(3, 0) + 2.0 * g(2, 1) * p + g(1, 2) * p2;
    let a_y = g(2, 1) + 2.0 * g(1, 2) * p + g(0, 3) * p2;
    let a_p = 2.0 * g(1, 1) + 2.0 * g(0, 2) * p;
    let p_x = -a_x / a_p;
    let p_y = -a_y / a_p;
    (value, a.abs(), [i_x + i_p * p_x, i_y + i_p * p_y])
}

/// Evaluates the labeled sheet from precomputed partials.
pub fn sheet_from_partials(f: &Partials, label: Label) -> Option<SheetPoint> {
    if !well_hyperbolic(f) {
        return None;
    }
    let (r, l) = right_left(f)?;
    let d = if label == Label::Right { r } else { l };
    let dir = [d.dx, d.dy];
    let cubic = f.cubic_form(d.dx, d.dy);
    if d.dx.abs() >= d.dy.abs() {
        let slope = d.dy / d.dx;
        let (value, a_residual, grad) = chart_eval(f, slope);
        Some(SheetPoint { dir, cubic, dual: false, slope, value, a_residual, grad })
    } else {
        let slope = d.dx / d.dy;
        let (value, a_residual, g) = chart_eval(&f.transposed(), slope);
        Some(SheetPoint { dir, cubic, dual: true, slope, value, a_residual, grad: [g[1], g[0]] })
    }
}

pub fn sheet_at(jet: &MongeJet, x: f64, y: f64, label: Label) -> Option<SheetPoint> {
    sheet_from_partials(&jet.partials(x, y), label)
}

/// `C(dir)` with `dir` flipped to agree with `reference`.
pub fn oriented_cubic(s: &SheetPoint, reference: [f64; 2]) -> f64 {
    if s.dir[0] * reference[0] + s.dir[1] * reference[1] < 0.0 {
        -s.cubic
    } else {
        s.cubic
    }
}
