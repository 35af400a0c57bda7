//! Pointwise classification, asymptotic directions and their left/right labels.
//!
//! A regular space curve is *right* when `det(γ', γ'', γ''') > 0` and *left*
//! when it is negative. At a hyperbolic point one asymptotic curve is left and
//! the other is right. The determinant is computed by implicit
//! differentiation along the asymptotic slope field; on the flecnodal curve it
//! vanishes, and the label is read off samples taken a short arc-length away
//! along the integrated asymptotic curve.

use nalgebra::{Matrix2, Vector2};
use num_complex::Complex64;
use serde::Serialize;

use crate::tolerance::scaled;
use crate::error::{Error, Result};
use crate::jets::{AsymptoticCalculus, MongeJet, Partials};

/// Relative band around zero discriminant treated as parabolic.
pub const TOL_PARAB: f64 = 1e-9;
/// Residual bound for a real asymptotic slope.
pub const TOL_ROOT: f64 = 1e-10;
/// Frame determinants below this are treated as degenerate.
pub const TOL_FRAME: f64 = 1e-8;
/// Default offset for label sampling, as a fraction of the domain diameter.
pub const LABEL_OFFSET_FRACTION: f64 = 1e-2;

const LABEL_RK4_STEPS: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PointKind {
    Elliptic,
    Hyperbolic,
    ParabolicBorderline,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PointClass {
    pub kind: PointKind,
    /// `f11^2 - f20 f02`.
    pub discriminant: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Left,
    Right,
}

impl Label {
    pub fn flipped(self) -> Label {
        match self {
            Label::Left => Label::Right,
            Label::Right => Label::Left,
        }
    }

    fn from_sign(s: f64) -> Label {
        if s > 0.0 {
            Label::Right
        } else {
            Label::Left
        }
    }
}

/// `dy/dx`, or the vertical marker.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Slope {
    Finite(f64),
    Vertical,
}

/// A unit tangent direction, defined up to sign.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Direction {
    pub dx: f64,
    pub dy: f64,
    pub label: Option<Label>,
}

impl Direction {
    fn unit(dx: f64, dy: f64) -> Self {
        let n = dx.hypot(dy);
        let (mut dx, mut dy) = (dx / n, dy / n);
        if dx < 0.0 || (dx == 0.0 && dy < 0.0) {
            dx = -dx;
            dy = -dy;
        }
        Self { dx, dy, label: None }
    }

    pub fn slope(&self) -> Slope {
        if self.dx == 0.0 {
            Slope::Vertical
        } else {
            Slope::Finite(self.dy / self.dx)
        }
    }

    /// `dx/dy`, the slope in the swapped chart.
    pub fn dual_slope(&self) -> Option<f64> {
        (self.dy != 0.0).then(|| self.dx / self.dy)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AsymptoticFrame {
    pub x: f64,
    pub y: f64,
    /// Two real directions at hyperbolic points, none at elliptic points.
    pub directions: Vec<Direction>,
    /// Root of `a(p)` with positive imaginary part, elliptic points only.
    pub complex_slope: Option<Complex64>,
}

impl AsymptoticFrame {
    pub fn labeled(&self, label: Label) -> Option<&Direction> {
        self.directions.iter().find(|d| d.label == Some(label))
    }
}

pub(crate) fn parab_tolerance(p: &Partials) -> f64 {
    let s = p.hessian_scale();
    scaled(TOL_PARAB) * s * s
}

pub fn classify_partials(p: &Partials) -> PointClass {
    let discriminant = p.discriminant();
    let tol = parab_tolerance(p);
    let kind = if discriminant > tol {
        PointKind::Hyperbolic
    } else if discriminant < -tol {
        PointKind::Elliptic
    } else {
        PointKind::ParabolicBorderline
    };
    PointClass { kind, discriminant }
}

pub fn classify_point(jet: &MongeJet, x: f64, y: f64) -> PointClass {
    classify_partials(&jet.partials(x, y))
}

/// Real roots of `f20 u^2 + 2 f11 u v + f02 v^2`, as unit vectors. `None` unless the discriminant is positive.
pub(crate) fn null_directions(p: &Partials) -> Option<[Direction; 2]> {
    let (a, b, c) = (p.get(2, 0), p.get(1, 1), p.get(0, 2));
    let disc = b * b - a * c;
    if disc <= 0.0 {
        return None;
    }
    let sign = if b >= 0.0 { 1.0 } else { -1.0 };
    let q = -(b + sign * disc.sqrt());
    Some([Direction::unit(c, q), Direction::unit(q, a)])
}

/// `d x (H d)`; positive exactly on the right asymptotic direction.
pub(crate) fn hessian_twist(p: &Partials, dx: f64, dy: f64) -> f64 {
    let (a, b, c) = (p.get(2, 0), p.get(1, 1), p.get(0, 2));
    dx * (b * dx + c * dy) - dy * (a * dx + b * dy)
}

/// Right and left unit directions at a hyperbolic point, labeled in closed form.
pub(crate) fn right_left(p: &Partials) -> Option<(Direction, Direction)> {
    let [d1, d2] = null_directions(p)?;
    let t1 = hessian_twist(p, d1.dx, d1.dy);
    let t2 = hessian_twist(p, d2.dx, d2.dy);
    if t1 == 0.0 || t2 == 0.0 || t1.signum() == t2.signum() {
        return None;
    }
    let (mut r, mut l) = if t1 > 0.0 { (d1, d2) } else { (d2, d1) };
    r.label = Some(Label::Right);
    l.label = Some(Label::Left);
    Some((r, l))
}

/// Complex slope `p` with positive imaginary part solving `f02 p^2 + 2 f11 p + f20 = 0`.
pub(crate) fn complex_slope(p: &Partials) -> Option<Complex64> {
    let (a, b, c) = (p.get(2, 0), p.get(1, 1), p.get(0, 2));
    let disc = b * b - a * c;
    if disc >= 0.0 || c == 0.0 {
        return None;
    }
    let im = (-disc).sqrt() / c.abs();
    Some(Complex64::new(-b / c, im))
}

pub fn asymptotic_directions(jet: &MongeJet, x: f64, y: f64) -> Result<AsymptoticFrame> {
    let p = jet.partials(x, y);
    let class = classify_partials(&p);
    match class.kind {
        PointKind::ParabolicBorderline => Err(Error::DegeneratePoint {
            x,
            y,
            reason: format!("parabolic borderline (discriminant {:e})", class.discriminant),
        }),
        PointKind::Hyperbolic => {
            let dirs = null_directions(&p).ok_or_else(|| Error::DegeneratePoint {
                x,
                y,
                reason: "no real asymptotic directions".into(),
            })?;
            Ok(AsymptoticFrame { x, y, directions: dirs.to_vec(), complex_slope: None })
        }
        PointKind::Elliptic => Ok(AsymptoticFrame {
            x,
            y,
            directions: Vec::new(),
            complex_slope: complex_slope(&p),
        }),
    }
}

/// Caches the implicit-differentiation formulas of a jet for repeated labeling.
#[derive(Clone, Debug)]
pub struct Labeler {
    jet: MongeJet,
    swapped: MongeJet,
    direct: AsymptoticCalculus,
    dual: AsymptoticCalculus,
    /// Arc-length offset used when the frame degenerates at the point itself.
    pub offset: f64,
}

impl Labeler {
    pub fn new(jet: &MongeJet, offset: f64) -> Self {
        let swapped = jet.swapped();
        Self {
            direct: AsymptoticCalculus::new(jet),
            dual: AsymptoticCalculus::new(&swapped),
            jet: jet.clone(),
            swapped,
            offset,
        }
    }

    /// Signed `det(γ', γ'', γ''')` in the chart where the direction is not steep.
    ///
    /// Returned in the original orientation: positive means right.
    pub fn frame_det(&self, x: f64, y: f64, dx: f64, dy: f64) -> f64 {
        if dx.abs() >= dy.abs() {
            self.direct.frame_det(x, y, dy / dx)
        } else {
            // The x <-> y swap reverses orientation.
            -self.dual.frame_det(y, x, dx / dy)
        }
    }

    /// Left/right label of the asymptotic direction `(dx, dy)` at `(x, y)`.
    pub fn label(&self, x: f64, y: f64, dx: f64, dy: f64) -> Result<Label> {
        let det = self.frame_det(x, y, dx, dy);
        if det.abs() >= scaled(TOL_FRAME) {
            return Ok(Label::from_sign(det));
        }
        let fail = |reason: String| Error::LabelFailure { x, y, reason };
        let mut signs = [0.0; 2];
        for (k, s) in [1.0, -1.0].into_iter().enumerate() {
            let (ox, oy, odx, ody) = self
                .follow(x, y, dx, dy, s * self.offset)
                .ok_or_else(|| fail("asymptotic curve left the hyperbolic domain".into()))?;
            let d = self.frame_det(ox, oy, odx, ody);
            if d.abs() < scaled(TOL_FRAME) {
                return Err(fail(format!("frame degenerate at offset sample ({d:e})")));
            }
            signs[k] = d.signum();
        }
        if signs[0] != signs[1] {
            return Err(fail("offset samples disagree".into()));
        }
        Ok(Label::from_sign(signs[0]))
    }

    /// Integrates the asymptotic curve through `(x, y)` tangent to `(dx, dy)` for arc length `s`.
    ///
    /// Returns the end point and the tangent direction there.
    pub fn follow(&self, x: f64, y: f64, dx: f64, dy: f64, s: f64) -> Option<(f64, f64, f64, f64)> {
        if dx.abs() >= dy.abs() {
            let (ex, ey, p) = integrate_chart(&self.jet, &self.direct, x, y, dy / dx, s * dx.signum())?;
            let n = (1.0 + p * p).sqrt();
            Some((ex, ey, 1.0 / n, p / n))
        } else {
            let (ey, ex, q) = integrate_chart(&self.swapped, &self.dual, y, x, dx / dy, s * dy.signum())?;
            let n = (1.0 + q * q).sqrt();
            Some((ex, ey, q / n, 1.0 / n))
        }
    }
}

/// RK4 on `(x, y, p)` with `d/ds = (1, p, p') / sqrt(1 + p^2)`.
fn integrate_chart(
    jet: &MongeJet,
    calc: &AsymptoticCalculus,
    x: f64,
    y: f64,
    p: f64,
    s: f64,
) -> Option<(f64, f64, f64)> {
    let rhs = |x: f64, y: f64, p: f64| -> Option<[f64; 3]> {
        let pp = calc.y2.eval(x, y, p);
        let n = (1.0 + p * p).sqrt();
        pp.is_finite().then(|| [1.0 / n, p / n, pp / n])
    };
    let h = s / LABEL_RK4_STEPS as f64;
    let mut state = [x, y, p];
    for _ in 0..LABEL_RK4_STEPS {
        let k1 = rhs(state[0], state[1], state[2])?;
        let k2 = rhs(state[0] + 0.5 * h * k1[0], state[1] + 0.5 * h * k1[1], state[2] + 0.5 * h * k1[2])?;
        let k3 = rhs(state[0] + 0.5 * h * k2[0], state[1] + 0.5 * h * k2[1], state[2] + 0.5 * h * k2[2])?;
        let k4 = rhs(state[0] + h * k3[0], state[1] + h * k3[1], state[2] + h * k3[2])?;
        for i in 0..3 {
            state[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
    }
    // Stay on the slope sheet: snap p back onto a(x, y, p) = 0.
    let part = jet.partials(state[0], state[1]);
    let (a, b, c) = (part.get(2, 0), part.get(1, 1), part.get(0, 2));
    for _ in 0..3 {
        let p = state[2];
        let val = a + 2.0 * b * p + c * p * p;
        let der = 2.0 * b + 2.0 * c * p;
        if der == 0.0 {
            return None;
        }
        state[2] -= val / der;
    }
    (part.discriminant() > 0.0 && state.iter().all(|v| v.is_finite())).then_some((state[0], state[1], state[2]))
}

/// Labels both directions of a hyperbolic frame.
pub fn left_right_label(jet: &MongeJet, frame: &AsymptoticFrame) -> Result<AsymptoticFrame> {
    left_right_label_with(&Labeler::new(jet, LABEL_OFFSET_FRACTION), frame)
}

pub fn left_right_label_with(labeler: &Labeler, frame: &AsymptoticFrame) -> Result<AsymptoticFrame> {
    if frame.directions.len() != 2 {
        return Err(Error::Precondition("labeling needs a hyperbolic frame".into()));
    }
    let mut out = frame.clone();
    for d in out.directions.iter_mut() {
        d.label = Some(labeler.label(frame.x, frame.y, d.dx, d.dy)?);
    }
    if out.directions[0].label == out.directions[1].label {
        return Err(Error::LabelFailure {
            x: frame.x,
            y: frame.y,
            reason: "both directions received the same label".into(),
        });
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ChartMode {
    /// Asymptotic lines on the coordinate axes, right direction on the x-axis.
    Axes,
    /// Asymptotic lines on the diagonals `y = ±x`.
    Diagonals,
}

/// Re-graphs the jet at a hyperbolic point in a chart adapted to its asymptotic lines.
///
/// Returns the new jet and the matrix `m` with `old = point + m · new` in the tangent plane.
pub fn adapted_chart(jet: &MongeJet, x: f64, y: f64, mode: ChartMode) -> Result<(MongeJet, Matrix2<f64>)> {
    let p = jet.partials(x, y);
    if classify_partials(&p).kind != PointKind::Hyperbolic {
        return Err(Error::ChartFailure(format!("point ({x}, {y}) is not hyperbolic")));
    }
    let (r, l) = right_left(&p).ok_or_else(|| Error::ChartFailure("degenerate asymptotic pair".into()))?;
    let local = jet.translate_regraph(x, y);
    let mut m = Matrix2::from_columns(&[Vector2::new(r.dx, r.dy), Vector2::new(l.dx, l.dy)]);
    if m.determinant() < 0.0 {
        m.set_column(1, &(-m.column(1)));
    }
    if m.determinant().abs() < 1e-12 {
        return Err(Error::ChartFailure("asymptotic directions nearly coincide".into()));
    }
    let axes = local.linear_change(&m, 1.0)?;
    match mode {
        ChartMode::Axes => {
            if axes.coeff(1, 1) <= 0.0 {
                return Err(Error::ChartFailure("adapted chart lost the right-handed orientation".into()));
            }
            Ok((axes, m))
        }
        ChartMode::Diagonals => {
            let m = m * Matrix2::new(0.5, 0.5, 0.5, -0.5);
            Ok((local.linear_change(&m, 1.0)?, m))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn jet(terms: &[(usize, usize, f64)]) -> MongeJet {
        MongeJet::from_terms(5, terms).unwrap()
    }

    fn prenormal(a: f64, b: f64, i: f64, j: f64) -> MongeJet {
        jet(&[(1, 1, 1.0), (3, 1, a / 6.0), (1, 3, b / 6.0), (4, 0, i / 24.0), (0, 4, j / 24.0)])
    }

    #[test]
    fn classification_examples() {
        let c = classify_point(&jet(&[(1, 1, 1.0)]), 0.0, 0.0);
        assert_eq!(c.kind, PointKind::Hyperbolic);
        assert_eq!(c.discriminant, 1.0);
        let c = classify_point(&jet(&[(2, 0, 0.5), (0, 2, 0.5)]), 0.0, 0.0);
        assert_eq!(c.kind, PointKind::Elliptic);
        assert_eq!(c.discriminant, -1.0);
        let c = classify_point(&jet(&[(2, 0, 0.5)]), 0.0, 0.0);
        assert_eq!(c.kind, PointKind::ParabolicBorderline);
    }

    #[test]
    fn direction_examples() {
        let f = asymptotic_directions(&jet(&[(1, 1, 1.0)]), 0.0, 0.0).unwrap();
        let slopes: Vec<_> = f.directions.iter().map(|d| d.slope()).collect();
        assert!(slopes.contains(&Slope::Finite(0.0)));
        assert!(slopes.contains(&Slope::Vertical));

        let f = asymptotic_directions(&jet(&[(2, 0, 0.5), (0, 2, -0.5)]), 0.0, 0.0).unwrap();
        let mut s: Vec<f64> = f
            .directions
            .iter()
            .map(|d| match d.slope() {
                Slope::Finite(p) => p,
                Slope::Vertical => f64::INFINITY,
            })
            .collect();
        s.sort_by(f64::total_cmp);
        assert!((s[0] + 1.0).abs() < 1e-15 && (s[1] - 1.0).abs() < 1e-15);

        let f = asymptotic_directions(&jet(&[(2, 0, 0.5), (0, 2, 0.5)]), 0.0, 0.0).unwrap();
        assert!(f.directions.is_empty());
        assert_eq!(f.complex_slope, Some(Complex64::new(0.0, 1.0)));

        assert!(matches!(
            asymptotic_directions(&jet(&[(2, 0, 0.5)]), 0.0, 0.0),
            Err(Error::DegeneratePoint { .. })
        ));
    }

    #[test]
    fn directions_are_roots() {
        let f = jet(&[(2, 0, 2.0), (1, 1, 3.0), (0, 2, -1.0), (3, 0, 0.3), (1, 2, 0.7)]);
        let frame = asymptotic_directions(&f, 0.2, -0.1).unwrap();
        let p = f.partials(0.2, -0.1);
        for d in &frame.directions {
            let r = p.get(2, 0) * d.dx * d.dx + 2.0 * p.get(1, 1) * d.dx * d.dy + p.get(0, 2) * d.dy * d.dy;
            assert!(r.abs() <= TOL_ROOT);
        }
    }

    fn label_of(frame: &AsymptoticFrame, dx: f64, dy: f64) -> Label {
        frame
            .directions
            .iter()
            .find(|d| (d.dx * dy - d.dy * dx).abs() < 1e-9)
            .and_then(|d| d.label)
            .unwrap()
    }

    #[test]
    fn labels_on_cubic_saddles() {
        let f = jet(&[(1, 1, 1.0), (3, 0, 1.0 / 6.0), (0, 3, 1.0 / 6.0)]);
        let frame = left_right_label(&f, &asymptotic_directions(&f, 0.0, 0.0).unwrap()).unwrap();
        assert_eq!(label_of(&frame, 1.0, 0.0), Label::Right);
        assert_eq!(label_of(&frame, 0.0, 1.0), Label::Left);

        let g = jet(&[(1, 1, -1.0), (3, 0, 1.0 / 6.0), (0, 3, 1.0 / 6.0)]);
        let frame = left_right_label(&g, &asymptotic_directions(&g, 0.0, 0.0).unwrap()).unwrap();
        assert_eq!(label_of(&frame, 1.0, 0.0), Label::Left);
        assert_eq!(label_of(&frame, 0.0, 1.0), Label::Right);
    }

    #[test]
    fn labels_at_hyperbonode_use_offsets() {
        let f = prenormal(1.0, 1.0, 2.0, 2.0);
        let labeler = Labeler::new(&f, LABEL_OFFSET_FRACTION);
        assert!(labeler.frame_det(0.0, 0.0, 1.0, 0.0).abs() < TOL_FRAME);
        let frame = left_right_label(&f, &asymptotic_directions(&f, 0.0, 0.0).unwrap()).unwrap();
        assert_eq!(label_of(&frame, 1.0, 0.0), Label::Right);
        assert_eq!(label_of(&frame, 0.0, 1.0), Label::Left);
    }

    #[test]
    fn quadric_labels_fail() {
        let f = jet(&[(1, 1, 1.0)]);
        assert!(matches!(
            left_right_label(&f, &asymptotic_directions(&f, 0.0, 0.0).unwrap()),
            Err(Error::LabelFailure { .. })
        ));
    }

    #[test]
    fn orientation_reversal_swaps_labels() {
        let f = jet(&[(2, 0, 0.3), (1, 1, 1.0), (0, 2, -0.2), (3, 0, 0.5), (2, 1, -0.4), (0, 3, 0.9), (2, 2, 0.3)]);
        let (x, y) = (0.1, 0.15);
        let a = left_right_label(&f, &asymptotic_directions(&f, x, y).unwrap()).unwrap();
        let g = f.negated();
        let b = left_right_label(&g, &asymptotic_directions(&g, x, y).unwrap()).unwrap();
        for d in &a.directions {
            assert_eq!(label_of(&b, d.dx, d.dy), d.label.unwrap().flipped());
        }
    }

    #[test]
    fn closed_form_agrees_with_frame() {
        let f = jet(&[(2, 0, 0.3), (1, 1, 1.0), (0, 2, -0.2), (3, 0, 0.5), (2, 1, -0.4), (0, 3, 0.9), (2, 2, 0.3)]);
        for &(x, y) in &[(0.0, 0.0), (0.1, 0.15), (-0.2, 0.05)] {
            let (r, l) = right_left(&f.partials(x, y)).unwrap();
            let frame = left_right_label(&f, &asymptotic_directions(&f, x, y).unwrap()).unwrap();
            assert_eq!(label_of(&frame, r.dx, r.dy), Label::Right);
            assert_eq!(label_of(&frame, l.dx, l.dy), Label::Left);
        }
    }

    #[test]
    fn adapted_chart_examples() {
        let h = prenormal(1.0, 2.0, 3.0, -1.0);
        let (g, m) = adapted_chart(&h, 0.0, 0.0, ChartMode::Axes).unwrap();
        assert_eq!(g, h);
        assert!((m - Matrix2::identity()).amax() < 1e-15);

        let (g, _) = adapted_chart(&h, 0.0, 0.0, ChartMode::Diagonals).unwrap();
        assert!((g.coeff(2, 0) + g.coeff(0, 2)).abs() < 1e-14);
        assert!(g.coeff(1, 1).abs() < 1e-14 && g.coeff(2, 0).abs() > 0.1);

        let f = jet(&[(2, 0, 2.0), (1, 1, 3.0), (0, 2, -1.0), (3, 0, 0.4), (1, 3, 0.2)]);
        let (g, _) = adapted_chart(&f, 0.1, 0.2, ChartMode::Axes).unwrap();
        assert!(g.coeff(2, 0).abs() + g.coeff(0, 2).abs() <= 1e-10);
        assert!(g.coeff(1, 1) > 0.0);

        let e = jet(&[(2, 0, 0.5), (0, 2, 0.5)]);
        assert!(matches!(adapted_chart(&e, 0.0, 0.0, ChartMode::Axes), Err(Error::ChartFailure(_))));
    }
}
