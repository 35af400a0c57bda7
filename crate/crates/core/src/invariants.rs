//! The cr-invariant, parity and index of hyperbonodes and ellipnodes.
//!
//! Every closed-form value has a geometric counterpart: the cross-ratio of the
//! flecnodal tangent lines and asymptotic lines, read on a transversal. Charts
//! are normalized with [`adapted_chart`] and, where the formulas assume a jet
//! without cubic terms, with the projective cubic shift of [`kill_cubic`].

use nalgebra::{Matrix2, SymmetricEigen, Vector2};
use num_complex::Complex64;
use serde::Serialize;

use crate::tolerance::scaled;
use crate::error::{Error, Result};
use crate::geometry::{adapted_chart, ChartMode};
use crate::jets::{MongeJet, Partials, ProjectiveMap, DEFAULT_DEGREE};

/// `|ρ|` at or above this marks a flec-hyperbonode.
pub const RHO_CAP: f64 = 1e8;
/// `|ρ|` at or below this marks a double hyperbonode.
pub const RHO_DOUBLE: f64 = 1e-8;
/// `|ρ|` at or below this marks a double ellipnode.
pub const RHO_DOUBLE_ELLIPTIC: f64 = 1e-6;
/// Relative tolerance for the third-order node conditions in a normalized chart.
pub const TOL_NODE_CHART: f64 = 1e-7;

const CR_EPS: f64 = 1e-14;

/// A real number or the point at infinity of the projective line.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ExtendedReal {
    Finite(f64),
    Infinite,
}

impl ExtendedReal {
    pub fn finite(self) -> Option<f64> {
        match self {
            ExtendedReal::Finite(v) => Some(v),
            ExtendedReal::Infinite => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, ExtendedReal::Infinite)
    }

    /// Sign of a finite nonzero value.
    pub fn sign(self) -> Option<i8> {
        match self {
            ExtendedReal::Finite(v) if v > 0.0 => Some(1),
            ExtendedReal::Finite(v) if v < 0.0 => Some(-1),
            _ => None,
        }
    }
}

/// Finite values serialize as numbers and the point at infinity as `"infinity"`.
impl Serialize for ExtendedReal {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            ExtendedReal::Finite(v) => s.serialize_f64(*v),
            ExtendedReal::Infinite => s.serialize_str("infinity"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum NodeFlag {
    DoubleNode,
    FlecHyperbonode,
}

/// Detection bands for degenerate hyperbonodes.
pub fn hyperbonode_flags(rho: ExtendedReal) -> Vec<NodeFlag> {
    match rho {
        ExtendedReal::Infinite => vec![NodeFlag::FlecHyperbonode],
        ExtendedReal::Finite(v) if v.abs() >= RHO_CAP => vec![NodeFlag::FlecHyperbonode],
        ExtendedReal::Finite(v) if v.abs() <= RHO_DOUBLE => vec![NodeFlag::DoubleNode],
        ExtendedReal::Finite(_) => Vec::new(),
    }
}

/// Line `A x + B y = 0` through the origin, stored as `[A, B]`.
pub type Line = [f64; 2];

/// The four lines through a hyperbonode, in an axes-adapted chart.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TangentLineSet {
    pub flec_left: Line,
    pub right: Line,
    pub flec_right: Line,
    pub left: Line,
}

impl TangentLineSet {
    /// The lines in cross-ratio order `(L_Fℓ, L_r, L_Fr, L_ℓ)`.
    pub fn ordered(&self) -> [Line; 4] {
        [self.flec_left, self.right, self.flec_right, self.left]
    }
}

/// Homogeneous `[x : w]` of the intersection of a line with the transversal `y = 1`.
fn transversal_point(l: Line) -> Result<[f64; 2]> {
    let n = l[0].hypot(l[1]);
    if n == 0.0 || !n.is_finite() {
        return Err(Error::Indeterminate("degenerate line".into()));
    }
    Ok([-l[1] / n, l[0] / n])
}

fn bracket(p: [f64; 2], q: [f64; 2]) -> f64 {
    p[0] * q[1] - p[1] * q[0]
}

/// `(a, b, c, d) = [a,c][b,d] / ([a,d][b,c])` for homogeneous points of the projective line.
pub fn cross_ratio_points(p: [[f64; 2]; 4]) -> Result<ExtendedReal> {
    let [a, b, c, d] = p.map(|v| {
        let n = v[0].hypot(v[1]);
        [v[0] / n, v[1] / n]
    });
    let num = bracket(a, c) * bracket(b, d);
    let den = bracket(a, d) * bracket(b, c);
    if !num.is_finite() || !den.is_finite() {
        return Err(Error::Indeterminate("degenerate point".into()));
    }
    if den.abs() <= CR_EPS {
        if num.abs() <= CR_EPS {
            return Err(Error::Indeterminate("0/0 cross-ratio".into()));
        }
        return Ok(ExtendedReal::Infinite);
    }
    Ok(ExtendedReal::Finite(num / den))
}

/// Cross-ratio of four concurrent lines, read on the transversal `y = 1`.
pub fn cross_ratio_of_lines(lines: [Line; 4]) -> Result<ExtendedReal> {
    let mut pts = [[0.0; 2]; 4];
    for (k, l) in lines.iter().enumerate() {
        pts[k] = transversal_point(*l)?;
    }
    cross_ratio_points(pts)
}

pub fn cross_ratio(lines: &TangentLineSet) -> Result<ExtendedReal> {
    cross_ratio_of_lines(lines.ordered())
}

fn coefficient_scale(p: &Partials) -> f64 {
    let mut s = p.get(1, 1).abs().max(1.0);
    for d in 2..=4 {
        for j in 0..=d {
            s = s.max(p.get(d - j, j).abs());
        }
    }
    s
}

fn quartic_scale(p: &Partials) -> f64 {
    (0..=4).map(|j| p.get(4 - j, j).abs()).fold(0.0, f64::max)
}

/// Checks that a jet is axes-adapted at an honest hyperbonode.
fn check_adapted(p: &Partials) -> Result<()> {
    let tol = scaled(TOL_NODE_CHART) * coefficient_scale(p);
    if p.get(1, 1) == 0.0 {
        return Err(Error::NotAdapted("f11 vanishes".into()));
    }
    for (i, j) in [(2, 0), (0, 2), (3, 0), (0, 3)] {
        if p.get(i, j).abs() > tol {
            return Err(Error::NotAdapted(format!("f{i}{j} = {:e}", p.get(i, j))));
        }
    }
    Ok(())
}

pub fn flecnodal_tangent_lines(adapted: &MongeJet) -> Result<TangentLineSet> {
    let p = adapted.partials(0.0, 0.0);
    check_adapted(&p)?;
    let f = |i, j| p.get(i, j);
    Ok(TangentLineSet {
        flec_left: [-(3.0 * f(1, 2) * f(1, 2) - 2.0 * f(1, 1) * f(1, 3)), 2.0 * f(1, 1) * f(0, 4)],
        right: [0.0, 1.0],
        flec_right: [2.0 * f(1, 1) * f(4, 0), -(3.0 * f(2, 1) * f(2, 1) - 2.0 * f(1, 1) * f(3, 1))],
        left: [1.0, 0.0],
    })
}

/// `num / den` with the infinite marker, scaled against `scale`.
fn extended_ratio(num: f64, den: f64, scale: f64) -> Result<ExtendedReal> {
    let tol = CR_EPS * scale.max(f64::MIN_POSITIVE);
    if den.abs() <= tol {
        if num.abs() <= tol {
            return Err(Error::Indeterminate("0/0 in the closed-form invariant".into()));
        }
        return Ok(ExtendedReal::Infinite);
    }
    Ok(ExtendedReal::Finite(num / den))
}

/// Closed-form ρ in an axes-adapted chart.
pub fn rho_from_adapted(adapted: &MongeJet) -> Result<ExtendedReal> {
    let p = adapted.partials(0.0, 0.0);
    check_adapted(&p)?;
    let f = |i, j| p.get(i, j);
    let u = 3.0 * f(2, 1) * f(2, 1) - 2.0 * f(1, 1) * f(3, 1);
    let v = 3.0 * f(1, 2) * f(1, 2) - 2.0 * f(1, 1) * f(1, 3);
    let den = 4.0 * f(1, 1) * f(1, 1) * f(4, 0) * f(0, 4);
    let s = coefficient_scale(&p);
    // ρ = (den - u v) / den
    extended_ratio(den - u * v, den, s.powi(4))
}

/// Axes-adapted chart at a hyperbonode, verified.
pub fn hyperbonode_chart(jet: &MongeJet, x: f64, y: f64) -> Result<MongeJet> {
    let (adapted, _) = adapted_chart(jet, x, y, ChartMode::Axes)
        .map_err(|e| Error::Precondition(format!("no adapted chart at ({x}, {y}): {e}")))?;
    check_adapted(&adapted.partials(0.0, 0.0))
        .map_err(|e| Error::Precondition(format!("({x}, {y}) is not a hyperbonode: {e}")))?;
    Ok(adapted)
}

pub fn rho_hyperbonode(jet: &MongeJet, x: f64, y: f64) -> Result<ExtendedReal> {
    rho_from_adapted(&hyperbonode_chart(jet, x, y)?)
}

/// ρ from the cross-ratio of the four tangent lines, for cross-checking.
pub fn rho_hyperbonode_geometric(jet: &MongeJet, x: f64, y: f64) -> Result<ExtendedReal> {
    cross_ratio(&flecnodal_tangent_lines(&hyperbonode_chart(jet, x, y)?)?)
}

pub fn parity_from_adapted(adapted: &MongeJet) -> Result<i8> {
    let p = adapted.partials(0.0, 0.0);
    check_adapted(&p)?;
    let prod = p.get(4, 0) * p.get(0, 4);
    if prod.abs() <= CR_EPS * coefficient_scale(&p).powi(2) {
        return Err(Error::BiflecnodeDegenerate(prod));
    }
    Ok(if prod > 0.0 { 1 } else { -1 })
}

pub fn parity(jet: &MongeJet, x: f64, y: f64) -> Result<i8> {
    parity_from_adapted(&hyperbonode_chart(jet, x, y)?)
}

/// `sign(4 f11² f40 f04 − (3f21² − 2f11f31)(3f12² − 2f11f13))` in an axes-adapted chart.
pub fn index_from_adapted(adapted: &MongeJet) -> Result<i8> {
    let rho = rho_from_adapted(adapted)?;
    if !hyperbonode_flags(rho).is_empty() {
        return Err(Error::DegenerateIndex(format!("ρ = {rho:?}")));
    }
    let p = adapted.partials(0.0, 0.0);
    let f = |i, j| p.get(i, j);
    let u = 3.0 * f(2, 1) * f(2, 1) - 2.0 * f(1, 1) * f(3, 1);
    let v = 3.0 * f(1, 2) * f(1, 2) - 2.0 * f(1, 1) * f(1, 3);
    let e = 4.0 * f(1, 1) * f(1, 1) * f(4, 0) * f(0, 4) - u * v;
    Ok(if e > 0.0 { 1 } else { -1 })
}

pub fn index_hyperbonode(jet: &MongeJet, x: f64, y: f64) -> Result<i8> {
    index_from_adapted(&hyperbonode_chart(jet, x, y)?)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QuadraticKind {
    /// Quadratic part proportional to `x² − y²`.
    Hyperbolic,
    /// Quadratic part proportional to `x² + y²`.
    Elliptic,
}

fn check_quadratic(jet: &MongeJet, kind: QuadraticKind) -> Result<()> {
    let (q20, q11, q02) = (jet.coeff(2, 0), jet.coeff(1, 1), jet.coeff(0, 2));
    let target = match kind {
        QuadraticKind::Hyperbolic => -q20,
        QuadraticKind::Elliptic => q20,
    };
    let tol = 1e-8 * q20.abs();
    if q20 == 0.0 || q11.abs() > tol || (q02 - target).abs() > tol {
        return Err(Error::NotAdapted(format!("quadratic part is not a multiple of the {kind:?} form")));
    }
    Ok(())
}

/// `(α, β)` with `C = Q · (αx + βy)` in the least-squares sense, plus the residual.
fn divide_cubic(jet: &MongeJet) -> ((f64, f64), f64) {
    let (q20, q11, q02) = (jet.coeff(2, 0), jet.coeff(1, 1), jet.coeff(0, 2));
    let c = [jet.coeff(3, 0), jet.coeff(2, 1), jet.coeff(1, 2), jet.coeff(0, 3)];
    let rows = [[q20, 0.0], [q11, q20], [q02, q11], [0.0, q02]];
    let mut ata = Matrix2::zeros();
    let mut atb = Vector2::zeros();
    for (r, &ck) in rows.iter().zip(&c) {
        let v = Vector2::new(r[0], r[1]);
        ata += v * v.transpose();
        atb += v * ck;
    }
    let sol = ata.lu().solve(&atb).unwrap_or_else(Vector2::zeros);
    let (alpha, beta) = (sol[0], sol[1]);
    let resid = rows.iter().zip(&c).map(|(r, &ck)| (ck - r[0] * alpha - r[1] * beta).abs()).fold(0.0, f64::max);
    ((alpha, beta), resid)
}

fn cubic_tolerance(jet: &MongeJet) -> f64 {
    scaled(TOL_NODE_CHART) * coefficient_scale(&jet.partials(0.0, 0.0))
}

/// Removes the cubic part with the collineation `z ↦ z / (1 − αx − βy)`.
///
/// Requires the cubic part to be divisible by the quadratic part, which is the
/// node condition at a hyperbonode in the diagonal chart and at an ellipnode.
pub fn kill_cubic(jet: &MongeJet, kind: QuadraticKind) -> Result<MongeJet> {
    check_quadratic(jet, kind)?;
    let ((alpha, beta), resid) = divide_cubic(jet);
    let tol = cubic_tolerance(jet);
    if resid > tol {
        return Err(Error::NotANode(format!("cubic part not divisible by the quadratic part (residual {resid:e})")));
    }
    if alpha == 0.0 && beta == 0.0 {
        return Ok(jet.clone());
    }
    let out = jet.project_regraph(&ProjectiveMap::cubic_shift(alpha, beta))?;
    let left = out.degree_scale(3);
    if left > tol {
        return Err(Error::NotANode(format!("cubic part survived the shift ({left:e})")));
    }
    Ok(out)
}

/// The `(α, β)` used by [`kill_cubic`].
pub fn cubic_kill_coefficients(jet: &MongeJet) -> (f64, f64) {
    divide_cubic(jet).0
}

/// Diagonal chart at a hyperbonode with the cubic part removed.
pub fn diagonal_normal_form(jet: &MongeJet, x: f64, y: f64) -> Result<MongeJet> {
    hyperbonode_chart(jet, x, y)?;
    let (diag, _) = adapted_chart(jet, x, y, ChartMode::Diagonals)?;
    kill_cubic(&diag, QuadraticKind::Hyperbolic)
}

fn diagonal_parts(p: &Partials) -> (f64, f64) {
    let f = |i, j| p.get(i, j);
    let num = (f(4, 0) + 3.0 * f(2, 2)) * (f(0, 4) + 3.0 * f(2, 2)) - (f(3, 1) + 3.0 * f(1, 3)) * (f(1, 3) + 3.0 * f(3, 1));
    let den = (f(4, 0) + 6.0 * f(2, 2) + f(0, 4)).powi(2) - 16.0 * (f(3, 1) + f(1, 3)).powi(2);
    (num, den)
}

/// Closed-form ρ in a diagonal chart without cubic terms.
pub fn rho_from_diagonal(diag: &MongeJet) -> Result<ExtendedReal> {
    check_quadratic(diag, QuadraticKind::Hyperbolic)?;
    let p = diag.partials(0.0, 0.0);
    let (num, den) = diagonal_parts(&p);
    extended_ratio(4.0 * num, den, quartic_scale(&p).powi(2).max(f64::MIN_POSITIVE))
}

pub fn rho_hyperbonode_diagonal(jet: &MongeJet, x: f64, y: f64) -> Result<ExtendedReal> {
    rho_from_diagonal(&diagonal_normal_form(jet, x, y)?)
}

fn strict_sign(v: f64, what: &str) -> Result<i8> {
    if v > 0.0 {
        Ok(1)
    } else if v < 0.0 {
        Ok(-1)
    } else {
        Err(Error::DegenerateIndex(format!("{what} vanishes")))
    }
}

/// Index read in the diagonal chart: the sign of the numerator of the diagonal formula.
pub fn index_from_diagonal(diag: &MongeJet) -> Result<i8> {
    strict_sign(diagonal_parts(&diag.partials(0.0, 0.0)).0, "diagonal index expression")
}

/// Parity read in the diagonal chart: the sign of the denominator of the diagonal formula.
pub fn parity_from_diagonal(diag: &MongeJet) -> Result<i8> {
    strict_sign(diagonal_parts(&diag.partials(0.0, 0.0)).1, "diagonal parity expression")
}

pub fn index_hyperbonode_diagonal(jet: &MongeJet, x: f64, y: f64) -> Result<i8> {
    index_from_diagonal(&diagonal_normal_form(jet, x, y)?)
}

/// Everything the node finder reports about a hyperbonode.
#[derive(Clone, Debug, PartialEq)]
pub struct HyperbonodeInvariants {
    pub rho: ExtendedReal,
    pub parity: Option<i8>,
    pub index: Option<i8>,
    pub flags: Vec<NodeFlag>,
}

pub fn hyperbonode_invariants(jet: &MongeJet, x: f64, y: f64) -> Result<HyperbonodeInvariants> {
    let chart = hyperbonode_chart(jet, x, y)?;
    let rho = rho_from_adapted(&chart)?;
    let flags = hyperbonode_flags(rho);
    let parity = parity_from_adapted(&chart).ok();
    let index = if flags.is_empty() { index_from_adapted(&chart).ok() } else { None };
    Ok(HyperbonodeInvariants { rho, parity, index, flags })
}

/// Translates to the point, rescales the quadratic part to `(x² + y²)/2` and removes the cubic part.
pub fn ellipnode_normal_form(jet: &MongeJet, x: f64, y: f64) -> Result<MongeJet> {
    let local = jet.translate_regraph(x, y);
    let p = local.partials(0.0, 0.0);
    let h = Matrix2::new(p.get(2, 0), p.get(1, 1), p.get(1, 1), p.get(0, 2));
    let eig = SymmetricEigen::new(h);
    let (l1, l2) = (eig.eigenvalues[0], eig.eigenvalues[1]);
    let prod = l1 * l2;
    if prod.is_nan() || prod <= 0.0 {
        return Err(Error::Precondition(format!("({x}, {y}) is not elliptic")));
    }
    let z_scale = l1.signum();
    let mut m = eig.eigenvectors;
    m.set_column(0, &(m.column(0) / l1.abs().sqrt()));
    m.set_column(1, &(m.column(1) / l2.abs().sqrt()));
    if m.determinant() < 0.0 {
        m.set_column(1, &(-m.column(1)));
    }
    let normal = local.linear_change(&m, z_scale)?;
    kill_cubic(&normal, QuadraticKind::Elliptic)
}

fn check_ellipnode_normal(jet: &MongeJet) -> Result<Partials> {
    check_quadratic(jet, QuadraticKind::Elliptic)?;
    let left = jet.degree_scale(3);
    if left > cubic_tolerance(jet) {
        return Err(Error::NotAdapted(format!("cubic part present ({left:e})")));
    }
    Ok(jet.partials(0.0, 0.0))
}

/// Closed-form ρ(e) in a normalized elliptic chart.
pub fn rho_from_elliptic_normal(normal: &MongeJet) -> Result<f64> {
    let p = check_ellipnode_normal(normal)?;
    let f = |i, j| p.get(i, j);
    let num = (f(4, 0) - 3.0 * f(2, 2)) * (f(0, 4) - 3.0 * f(2, 2)) - (f(3, 1) - 3.0 * f(1, 3)) * (f(1, 3) - 3.0 * f(3, 1));
    let den = (f(4, 0) - 6.0 * f(2, 2) + f(0, 4)).powi(2) + 16.0 * (f(3, 1) - f(1, 3)).powi(2);
    let s = quartic_scale(&p);
    if s == 0.0 || den < CR_EPS * s * s {
        return Err(Error::NonGeneric(format!("ellipnode formula denominator {den:e}")));
    }
    Ok(4.0 * num / den)
}

pub fn rho_ellipnode(jet: &MongeJet, x: f64, y: f64) -> Result<f64> {
    rho_from_elliptic_normal(&ellipnode_normal_form(jet, x, y)?)
}

/// The complex cross-ratio `(L_F̄, L, L_F, L̄)` on the transversal `y = −ix + 2i`.
pub fn rho_ellipnode_oracle_complex(normal: &MongeJet) -> Result<Complex64> {
    let p = check_ellipnode_normal(normal)?;
    let f = |i, j| p.get(i, j);
    let i = Complex64::i();
    let a = Complex64::new(f(4, 0) - 3.0 * f(2, 2), 3.0 * f(3, 1) - f(1, 3));
    let b = Complex64::new(f(3, 1) - 3.0 * f(1, 3), -(f(0, 4) - 3.0 * f(2, 2)));
    let (ac, bc) = (a.conj(), b.conj());
    // Homogeneous x-coordinates [x : w] of the four intersection points.
    let flec_bar = [2.0 * i * bc, bc * i - ac];
    let l = [Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0)];
    let flec = [2.0 * i * b, b * i - a];
    let l_bar = [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)];
    let br = |p: [Complex64; 2], q: [Complex64; 2]| p[0] * q[1] - p[1] * q[0];
    let num = br(flec_bar, flec) * br(l, l_bar);
    let den = br(flec_bar, l_bar) * br(l, flec);
    let s = quartic_scale(&p).max(f64::MIN_POSITIVE);
    if den.norm() <= CR_EPS * s * s {
        return Err(Error::Indeterminate("flecnodal tangent meets an asymptotic line".into()));
    }
    Ok(num / den)
}

pub fn rho_ellipnode_oracle(normal: &MongeJet) -> Result<f64> {
    let z = rho_ellipnode_oracle_complex(normal)?;
    if z.im.abs() > 1e-8 * (1.0 + z.re.abs()) {
        return Err(Error::NonGeneric(format!("complex cross-ratio is not real ({z})")));
    }
    Ok(z.re)
}

/// Coefficients of `z = xy + (a x³y + b xy³)/3! + (I x⁴ + J y⁴)/4!`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PrenormalForm {
    pub a: f64,
    pub b: f64,
    #[serde(rename = "I")]
    pub i: f64,
    #[serde(rename = "J")]
    pub j: f64,
}

impl PrenormalForm {
    pub fn new(a: f64, b: f64, i: f64, j: f64) -> Self {
        Self { a, b, i, j }
    }

    pub fn jet(&self) -> MongeJet {
        MongeJet::from_terms(
            DEFAULT_DEGREE,
            &[(1, 1, 1.0), (3, 1, self.a / 6.0), (1, 3, self.b / 6.0), (4, 0, self.i / 24.0), (0, 4, self.j / 24.0)],
        )
        .expect("prenormal jet has degree 4")
    }

    /// `1 − ab/(IJ)`.
    pub fn rho(&self) -> ExtendedReal {
        let ij = self.i * self.j;
        if ij == 0.0 {
            ExtendedReal::Infinite
        } else {
            ExtendedReal::Finite(1.0 - self.a * self.b / ij)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn h(a: f64, b: f64, i: f64, j: f64) -> MongeJet {
        PrenormalForm::new(a, b, i, j).jet()
    }

    fn finite(r: Result<ExtendedReal>) -> f64 {
        r.unwrap().finite().unwrap()
    }

    #[test]
    fn cross_ratio_arithmetic() {
        let inf = [1.0, 0.0];
        let pt = |x: f64| [x, 1.0];
        assert_eq!(cross_ratio_points([pt(0.0), inf, pt(1.0), pt(-1.0)]).unwrap(), ExtendedReal::Finite(-1.0));
        let r = cross_ratio_points([pt(0.0), pt(1.0), pt(2.0), pt(3.0)]).unwrap().finite().unwrap();
        assert!((r - 4.0 / 3.0).abs() < 1e-15);
        assert!(matches!(cross_ratio_points([pt(0.0), pt(0.0), pt(0.0), pt(3.0)]), Err(Error::Indeterminate(_))));
    }

    #[test]
    fn tangent_lines_for_unit_form() {
        let lines = flecnodal_tangent_lines(&h(1.0, 1.0, 2.0, 2.0)).unwrap();
        assert_eq!(lines.flec_right, [4.0, 2.0]);
        assert_eq!(lines.flec_left, [2.0, 4.0]);
        let r = cross_ratio(&lines).unwrap().finite().unwrap();
        assert!((r - 0.75).abs() < 1e-15);

        let lines = flecnodal_tangent_lines(&h(0.0, 0.0, 2.0, 3.0)).unwrap();
        assert_eq!(lines.flec_right[1], 0.0);
        assert_eq!(cross_ratio(&lines).unwrap(), ExtendedReal::Finite(1.0));

        let lines = flecnodal_tangent_lines(&h(1.0, 1.0, 0.0, 2.0)).unwrap();
        assert_eq!(lines.flec_right[0], 0.0);
        assert_eq!(cross_ratio(&lines).unwrap(), ExtendedReal::Infinite);

        let not_adapted = MongeJet::from_terms(5, &[(1, 1, 1.0), (3, 0, 1.0)]).unwrap();
        assert!(matches!(flecnodal_tangent_lines(&not_adapted), Err(Error::NotAdapted(_))));
    }

    #[test]
    fn rho_examples() {
        assert!((finite(rho_hyperbonode(&h(1.0, 1.0, 2.0, 2.0), 0.0, 0.0)) - 0.75).abs() < 1e-15);
        let r = rho_hyperbonode(&h(1.0, 1.0, 1.0, 1.0), 0.0, 0.0).unwrap();
        assert_eq!(r, ExtendedReal::Finite(0.0));
        assert_eq!(hyperbonode_flags(r), vec![NodeFlag::DoubleNode]);
        let r = rho_hyperbonode(&h(1.0, 1.0, 0.0, 1.0), 0.0, 0.0).unwrap();
        assert_eq!(r, ExtendedReal::Infinite);
        assert_eq!(hyperbonode_flags(r), vec![NodeFlag::FlecHyperbonode]);
        let not_node = MongeJet::from_terms(5, &[(1, 1, 1.0), (3, 0, 1.0)]).unwrap();
        assert!(matches!(rho_hyperbonode(&not_node, 0.0, 0.0), Err(Error::Precondition(_))));
    }

    #[test]
    fn normal_form_specializations() {
        for &(a, b) in &[(0.5, 1.5), (-1.2, 0.7), (2.0, 2.0)] {
            let lp = finite(rho_hyperbonode(&h(a, b, 1.0, 1.0), 0.0, 0.0));
            assert!((lp - (1.0 - a * b)).abs() < 1e-12);
            let lp = finite(rho_hyperbonode(&h(a, b, 1.0, -1.0), 0.0, 0.0));
            assert!((lp - (1.0 + a * b)).abs() < 1e-12);
        }
        for &(i, j) in &[(0.5, 1.5), (-1.2, 0.7), (2.0, 2.0)] {
            let ot = finite(rho_hyperbonode(&h(1.0, 1.0, i, j), 0.0, 0.0));
            assert!((ot - (1.0 - 1.0 / (i * j))).abs() < 1e-12);
            let ot = finite(rho_hyperbonode(&h(1.0, -1.0, i, j), 0.0, 0.0));
            assert!((ot - (1.0 + 1.0 / (i * j))).abs() < 1e-12);
        }
    }

    #[test]
    fn parity_and_index_examples() {
        assert_eq!(parity(&h(1.0, 1.0, 2.0, 2.0), 0.0, 0.0).unwrap(), 1);
        assert_eq!(parity(&h(1.0, 1.0, 2.0, -2.0), 0.0, 0.0).unwrap(), -1);
        assert!(matches!(parity(&h(1.0, 1.0, 0.0, 2.0), 0.0, 0.0), Err(Error::BiflecnodeDegenerate(_))));
        assert_eq!(index_hyperbonode(&h(1.0, 1.0, 2.0, 2.0), 0.0, 0.0).unwrap(), 1);
        assert_eq!(index_hyperbonode(&h(1.0, 1.0, 2.0, -2.0), 0.0, 0.0).unwrap(), -1);
        assert_eq!(index_hyperbonode(&h(-1.0, 1.0, 1.0, 1.0), 0.0, 0.0).unwrap(), 1);
        assert!(matches!(index_hyperbonode(&h(1.0, 1.0, 1.0, 1.0), 0.0, 0.0), Err(Error::DegenerateIndex(_))));
    }

    #[test]
    fn diagonal_formula_examples() {
        let f = MongeJet::from_terms(5, &[(2, 0, 0.5), (0, 2, -0.5), (4, 0, 1.0 / 24.0), (0, 4, 1.0 / 24.0)]).unwrap();
        assert_eq!(rho_from_diagonal(&f).unwrap(), ExtendedReal::Finite(1.0));
        let f = MongeJet::from_terms(5, &[(2, 0, 0.5), (0, 2, -0.5), (2, 2, 0.25)]).unwrap();
        assert_eq!(rho_from_diagonal(&f).unwrap(), ExtendedReal::Finite(1.0));
        let f = h(1.0, 1.0, 2.0, 2.0);
        let d = finite(rho_hyperbonode_diagonal(&f, 0.0, 0.0));
        assert!((d - 0.75).abs() < 1e-7, "{d}");
    }

    #[test]
    fn kill_cubic_examples() {
        let q = MongeJet::from_terms(5, &[(2, 0, 1.0), (0, 2, 1.0), (4, 0, 0.3)]).unwrap();
        assert_eq!(kill_cubic(&q, QuadraticKind::Elliptic).unwrap(), q);

        let f = MongeJet::from_terms(5, &[(2, 0, 1.0), (0, 2, 1.0), (3, 0, 1.0), (1, 2, 1.0)]).unwrap();
        let (alpha, beta) = cubic_kill_coefficients(&f);
        assert!((alpha - 1.0).abs() < 1e-15 && beta.abs() < 1e-15);
        let g = kill_cubic(&f, QuadraticKind::Elliptic).unwrap();
        assert!(g.degree_scale(3) <= 1e-10);
        assert_eq!(g.coeff(2, 0), 1.0);
        assert_eq!(g.coeff(0, 2), 1.0);

        let bad = MongeJet::from_terms(5, &[(2, 0, 1.0), (0, 2, 1.0), (3, 0, 1.0)]).unwrap();
        assert!(matches!(kill_cubic(&bad, QuadraticKind::Elliptic), Err(Error::NotANode(_))));
    }

    /// Normalized elliptic jet `(x² + y²)/2 + quartic`, with the quartic given by partials.
    fn elliptic(quartic: &[(usize, usize, f64)]) -> MongeJet {
        let mut derivs = vec![(2, 0, 1.0), (0, 2, 1.0)];
        derivs.extend_from_slice(quartic);
        MongeJet::from_derivatives(5, &derivs).unwrap()
    }

    #[test]
    fn ellipnode_examples() {
        let e = elliptic(&[(4, 0, 1.0), (0, 4, 1.0)]);
        assert_eq!(rho_from_elliptic_normal(&e).unwrap(), 1.0);
        assert!((rho_ellipnode_oracle(&e).unwrap() - 1.0).abs() < 1e-12);
        assert!((rho_ellipnode(&e, 0.0, 0.0).unwrap() - 1.0).abs() < 1e-12);

        let e = elliptic(&[(4, 0, 1.0), (0, 4, 1.0), (3, 1, 1.0)]);
        assert!((rho_from_elliptic_normal(&e).unwrap() - 0.8).abs() < 1e-12);
        assert!((rho_ellipnode_oracle(&e).unwrap() - 0.8).abs() < 1e-12);

        let e = elliptic(&[(4, 0, 3.0), (2, 2, 1.0), (0, 4, 3.0)]);
        assert!(matches!(rho_from_elliptic_normal(&e), Err(Error::NonGeneric(_))));

        let not_node = MongeJet::from_terms(5, &[(2, 0, 0.5), (0, 2, 0.5), (3, 0, 1.0 / 6.0)]).unwrap();
        assert!(matches!(rho_ellipnode(&not_node, 0.0, 0.0), Err(Error::NotANode(_))));
    }

    #[test]
    fn ellipnode_normalization_handles_general_quadratics() {
        // Stretch and rotate a normalized ellipnode; ρ must not move.
        let e = elliptic(&[(4, 0, 1.3), (0, 4, -0.4), (3, 1, 0.6), (2, 2, 0.2), (1, 3, -0.7)]);
        let base = rho_from_elliptic_normal(&e).unwrap();
        let m = Matrix2::new(1.3, 0.4, -0.2, 0.8);
        let g = e.linear_change(&m, -2.5).unwrap();
        assert!((rho_ellipnode(&g, 0.0, 0.0).unwrap() - base).abs() < 1e-10);
    }

    fn separated(lines: [Line; 4]) -> bool {
        let ang: Vec<f64> = lines.iter().map(|l| (-l[0]).atan2(l[1]).rem_euclid(std::f64::consts::PI)).collect();
        let between = |t: f64| {
            let (lo, hi) = if ang[0] < ang[1] { (ang[0], ang[1]) } else { (ang[1], ang[0]) };
            t > lo && t < hi
        };
        between(ang[2]) != between(ang[3])
    }

    proptest! {
        #[test]
        fn swapped_roles_give_same_cross_ratio(a in -2.0..2.0f64, b in -2.0..2.0f64, i in -2.0..2.0f64, j in -2.0..2.0f64) {
            prop_assume!((i * j).abs() > 0.05);
            let s = flecnodal_tangent_lines(&h(a, b, i, j)).unwrap();
            let fwd = cross_ratio_of_lines(s.ordered());
            let rev = cross_ratio_of_lines([s.flec_right, s.left, s.flec_left, s.right]);
            prop_assert_eq!(fwd, rev);
        }

        #[test]
        fn negative_rho_iff_separated(a in -2.0..2.0f64, b in -2.0..2.0f64, i in -2.0..2.0f64, j in -2.0..2.0f64) {
            prop_assume!((i * j).abs() > 0.05 && (i * j - a * b).abs() > 1e-6);
            let s = flecnodal_tangent_lines(&h(a, b, i, j)).unwrap();
            let rho = cross_ratio(&s).unwrap().finite().unwrap();
            prop_assert_eq!(rho < 0.0, separated(s.ordered()));
        }

        #[test]
        fn index_is_parity_times_sign(a in -2.0..2.0f64, b in -2.0..2.0f64, i in -2.0..2.0f64, j in -2.0..2.0f64) {
            prop_assume!((i * j).abs() > 0.05 && (i * j - a * b).abs() > 1e-6);
            let f = h(a, b, i, j);
            let rho = rho_hyperbonode(&f, 0.0, 0.0).unwrap();
            let idx = index_hyperbonode(&f, 0.0, 0.0).unwrap();
            prop_assert_eq!(idx, parity(&f, 0.0, 0.0).unwrap() * rho.sign().unwrap());
            prop_assert_eq!(idx, if i * j > a * b { 1 } else { -1 });
        }

        #[test]
        fn elliptic_oracle_is_real(f40 in -2.0..2.0f64, f31 in -2.0..2.0f64, f22 in -2.0..2.0f64, f13 in -2.0..2.0f64, f04 in -2.0..2.0f64) {
            let e = elliptic(&[(4, 0, f40), (3, 1, f31), (2, 2, f22), (1, 3, f13), (0, 4, f04)]);
            if let Ok(z) = rho_ellipnode_oracle_complex(&e) {
                prop_assert!(z.im.abs() <= 1e-10 * (1.0 + z.re.abs()));
            }
        }
    }
}
