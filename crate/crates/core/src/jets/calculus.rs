//! Polynomials and rational functions in `(x, y, p)`, with total derivatives
//! along a slope field `p' = F(x, y, p)`.
//!
//! Used to differentiate quantities along asymptotic curves: `D/dx = ∂x + p ∂y + p' ∂p`.

use std::collections::BTreeMap;

use super::{MongeJet, Poly2};

/// Sparse polynomial in the three variables `(x, y, p)`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Poly3 {
    terms: BTreeMap<[u32; 3], f64>,
}

impl Poly3 {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: f64) -> Self {
        let mut out = Self::zero();
        out.add_term([0, 0, 0], c);
        out
    }

    /// The coordinate function: 0 → x, 1 → y, 2 → p.
    pub fn var(k: usize) -> Self {
        let mut e = [0u32; 3];
        e[k] = 1;
        let mut out = Self::zero();
        out.add_term(e, 1.0);
        out
    }

    /// Embeds a polynomial in `(x, y)`.
    pub fn from_xy(p: &Poly2) -> Self {
        let mut out = Self::zero();
        for (i, j, c) in p.terms() {
            out.add_term([i as u32, j as u32, 0], c);
        }
        out
    }

    fn add_term(&mut self, e: [u32; 3], c: f64) {
        if c == 0.0 {
            return;
        }
        let slot = self.terms.entry(e).or_insert(0.0);
        *slot += c;
        if *slot == 0.0 {
            self.terms.remove(&e);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (&e, &c) in &other.terms {
            out.add_term(e, c);
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(-1.0))
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut out = Self::zero();
        for (&e, &c) in &self.terms {
            out.add_term(e, c * s);
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero();
        for (a, &ca) in &self.terms {
            for (b, &cb) in &other.terms {
                out.add_term([a[0] + b[0], a[1] + b[1], a[2] + b[2]], ca * cb);
            }
        }
        out
    }

    /// Partial derivative with respect to variable `k` (0 → x, 1 → y, 2 → p).
    pub fn partial(&self, k: usize) -> Self {
        let mut out = Self::zero();
        for (&e, &c) in &self.terms {
            if e[k] > 0 {
                let mut d = e;
                d[k] -= 1;
                out.add_term(d, c * e[k] as f64);
            }
        }
        out
    }

    pub fn eval(&self, x: f64, y: f64, p: f64) -> f64 {
        self.terms
            .iter()
            .map(|(e, c)| c * x.powi(e[0] as i32) * y.powi(e[1] as i32) * p.powi(e[2] as i32))
            .sum()
    }
}

/// Quotient of two [`Poly3`]s.
#[derive(Clone, Debug, PartialEq)]
pub struct Rational3 {
    pub num: Poly3,
    pub den: Poly3,
}

impl Rational3 {
    pub fn poly(num: Poly3) -> Self {
        Self { num, den: Poly3::constant(1.0) }
    }

    pub fn new(num: Poly3, den: Poly3) -> Self {
        Self { num, den }
    }

    /// Evaluates the quotient; non-finite when the denominator vanishes.
    pub fn eval(&self, x: f64, y: f64, p: f64) -> f64 {
        self.num.eval(x, y, p) / self.den.eval(x, y, p)
    }

    fn is_polynomial(&self) -> bool {
        self.den.terms.len() == 1 && self.den.terms.get(&[0, 0, 0]) == Some(&1.0)
    }
}

/// Total derivative of `expr` along the slope field `p' = field`.
pub fn total_derivative(expr: &Rational3, field: &Rational3) -> Rational3 {
    // D(P) = (F_d (P_x + p P_y) + F_n P_p) / F_d for a polynomial P.
    let p = Poly3::var(2);
    let lift = |poly: &Poly3| -> Rational3 {
        let flat = poly.partial(0).add(&p.mul(&poly.partial(1)));
        let vertical = poly.partial(2);
        if vertical.is_zero() {
            Rational3::poly(flat)
        } else {
            Rational3::new(
                field.den.mul(&flat).add(&field.num.mul(&vertical)),
                field.den.clone(),
            )
        }
    };
    let dn = lift(&expr.num);
    if expr.is_polynomial() {
        return dn;
    }
    let dm = lift(&expr.den);
    // (dn.num/dn.den * M - N * dm.num/dm.den) / M^2
    let m = &expr.den;
    let n = &expr.num;
    let num = dn.num.mul(&dm.den).mul(m).sub(&n.mul(&dm.num).mul(&dn.den));
    let den = dn.den.mul(&dm.den).mul(&m.mul(m));
    Rational3::new(num, den)
}

/// The asymptotic quadric `a(x,y,p) = f20 + 2 f11 p + f02 p^2` as a polynomial in `(x, y, p)`.
pub fn asymptotic_form(jet: &MongeJet) -> Poly3 {
    let p = Poly3::var(2);
    let f20 = Poly3::from_xy(&jet.poly().derivative(2, 0));
    let f11 = Poly3::from_xy(&jet.poly().derivative(1, 1));
    let f02 = Poly3::from_xy(&jet.poly().derivative(0, 2));
    f20.add(&f11.mul(&p).scale(2.0)).add(&f02.mul(&p).mul(&p))
}

/// Slope field of the asymptotic foliation: `p' = -(a_x + p a_y) / a_p`.
pub fn asymptotic_slope_field(jet: &MongeJet) -> Rational3 {
    let a = asymptotic_form(jet);
    let p = Poly3::var(2);
    let inflection = a.partial(0).add(&p.mul(&a.partial(1)));
    Rational3::new(inflection.scale(-1.0), a.partial(2))
}

/// Derivatives of the space curve `x -> (x, y(x), f(x, y(x)))` along an asymptotic curve.
#[derive(Clone, Debug)]
pub struct AsymptoticCalculus {
    pub y2: Rational3,
    pub y3: Rational3,
    pub z1: Rational3,
    pub z2: Rational3,
    pub z3: Rational3,
}

impl AsymptoticCalculus {
    pub fn new(jet: &MongeJet) -> Self {
        let field = asymptotic_slope_field(jet);
        let y1 = Rational3::poly(Poly3::var(2));
        let y2 = total_derivative(&y1, &field);
        let y3 = total_derivative(&y2, &field);
        let z0 = Rational3::poly(Poly3::from_xy(jet.poly()));
        let z1 = total_derivative(&z0, &field);
        let z2 = total_derivative(&z1, &field);
        let z3 = total_derivative(&z2, &field);
        Self { y2, y3, z1, z2, z3 }
    }

    /// `(γ', γ'', γ''')` at `(x, y)` with slope `p`.
    pub fn frame(&self, x: f64, y: f64, p: f64) -> [[f64; 3]; 3] {
        [
            [1.0, p, self.z1.eval(x, y, p)],
            [0.0, self.y2.eval(x, y, p), self.z2.eval(x, y, p)],
            [0.0, self.y3.eval(x, y, p), self.z3.eval(x, y, p)],
        ]
    }

    /// `det(γ', γ'', γ''')`; its sign tells right (positive) from left (negative).
    pub fn frame_det(&self, x: f64, y: f64, p: f64) -> f64 {
        det3(&self.frame(x, y, p))
    }
}

pub fn det3(m: &[[f64; 3]; 3]) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn jet(terms: &[(usize, usize, f64)]) -> MongeJet {
        MongeJet::from_terms(5, terms).unwrap()
    }

    #[test]
    fn coordinate_derivatives() {
        let f = jet(&[(1, 1, 1.0), (3, 0, 1.0 / 6.0)]);
        let field = asymptotic_slope_field(&f);
        let dx = total_derivative(&Rational3::poly(Poly3::var(0)), &field);
        let dy = total_derivative(&Rational3::poly(Poly3::var(1)), &field);
        assert_eq!(dx.eval(0.3, -0.2, 0.7), 1.0);
        assert_eq!(dy.eval(0.3, -0.2, 0.7), 0.7);
    }

    #[test]
    fn curvature_of_asymptotic_curve() {
        // f = xy + x^3/6: along the x-axis direction at the origin y'' = -1/2.
        let f = jet(&[(1, 1, 1.0), (3, 0, 1.0 / 6.0)]);
        let field = asymptotic_slope_field(&f);
        let y2 = total_derivative(&Rational3::poly(Poly3::var(2)), &field);
        assert!((y2.eval(0.0, 0.0, 0.0) + 0.5).abs() < 1e-15);
    }

    #[test]
    fn quotient_rule() {
        // D(1/p) along p' = 1 is -1/p^2.
        let field = Rational3::poly(Poly3::constant(1.0));
        let e = Rational3::new(Poly3::constant(1.0), Poly3::var(2));
        let d = total_derivative(&e, &field);
        assert!((d.eval(0.0, 0.0, 2.0) + 0.25).abs() < 1e-15);
    }

    #[test]
    fn frame_det_matches_closed_form() {
        // det(γ',γ'',γ''') = (f11 + f02 p) y''^2 on the asymptotic curve.
        let f = jet(&[(1, 1, 1.0), (3, 0, 0.4), (2, 1, -0.3), (0, 3, 0.2), (4, 0, 0.1), (2, 2, 0.05)]);
        let calc = AsymptoticCalculus::new(&f);
        let (x, y) = (0.05, -0.02);
        let pt = f.partials(x, y);
        let (a, b, c) = (pt.get(2, 0), pt.get(1, 1), pt.get(0, 2));
        let disc = (b * b - a * c).sqrt();
        for p in [(-b + disc) / c, (-b - disc) / c] {
            if p.abs() > 10.0 {
                continue;
            }
            let det = calc.frame_det(x, y, p);
            let y2 = calc.y2.eval(x, y, p);
            let closed = (b + c * p) * y2 * y2;
            assert!((det - closed).abs() < 1e-10 * (1.0 + closed.abs()), "{det} vs {closed}");
        }
    }
}
