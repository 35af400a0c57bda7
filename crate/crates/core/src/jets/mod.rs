//! Polynomial Monge jets `z = f(x, y)` and the chart changes used to normalize them.

mod calculus;
mod family;
mod poly;
mod projective;

pub use calculus::{
    asymptotic_form, asymptotic_slope_field, det3, total_derivative, AsymptoticCalculus, Poly3,
    Rational3,
};
pub use family::FamilyJet;
pub use nalgebra::Matrix2;
pub use poly::Poly2;
pub use projective::ProjectiveMap;

use crate::error::{Error, Result};

/// Default truncation degree: one guard order above the quartic terms.
pub const DEFAULT_DEGREE: usize = 5;

/// Coefficients below this magnitude are treated as zero when comparing jets.
pub const CANONICAL_ZERO: f64 = 1e-15;

/// Highest derivative order cached by [`Partials`].
pub const PARTIALS_ORDER: usize = 4;

/// A polynomial surface `z = f(x, y)` with total degree at most `max_degree`.
#[derive(Clone, Debug)]
pub struct MongeJet {
    poly: Poly2,
}

impl MongeJet {
    pub fn zero(max_degree: usize) -> Result<Self> {
        if max_degree < 4 {
            return Err(Error::Precondition(format!("jet degree must be at least 4, got {max_degree}")));
        }
        Ok(Self { poly: Poly2::zeros(max_degree) })
    }

    /// Builds a jet from `(i, j, c)` monomials `c x^i y^j`; repeated monomials add up.
    pub fn from_terms(max_degree: usize, terms: &[(usize, usize, f64)]) -> Result<Self> {
        let mut jet = Self::zero(max_degree)?;
        for &(i, j, c) in terms {
            if i + j > max_degree {
                return Err(Error::DegreeOverflow { order: i + j, degree: max_degree });
            }
            jet.poly.add_term(i, j, c);
        }
        Ok(jet)
    }

    pub fn from_poly(poly: Poly2) -> Result<Self> {
        if poly.degree() < 4 {
            return Err(Error::Precondition(format!("jet degree must be at least 4, got {}", poly.degree())));
        }
        Ok(Self { poly })
    }

    /// Builds a jet from Taylor data: `derivs` holds `(i, j, f_ij(0,0))`.
    pub fn from_derivatives(max_degree: usize, derivs: &[(usize, usize, f64)]) -> Result<Self> {
        let terms: Vec<_> = derivs
            .iter()
            .map(|&(i, j, d)| (i, j, d / (factorial(i) * factorial(j))))
            .collect();
        Self::from_terms(max_degree, &terms)
    }

    pub fn max_degree(&self) -> usize {
        self.poly.degree()
    }

    pub fn poly(&self) -> &Poly2 {
        &self.poly
    }

    pub fn coeff(&self, i: usize, j: usize) -> f64 {
        self.poly.coeff(i, j)
    }

    /// Nonzero monomials `(i, j, c)`.
    pub fn terms(&self) -> Vec<(usize, usize, f64)> {
        self.poly.terms().collect()
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        self.poly.eval(x, y)
    }

    /// `f_ij(x, y)`, the exact partial derivative of the polynomial.
    pub fn eval_partial(&self, i: usize, j: usize, x: f64, y: f64) -> Result<f64> {
        if i + j > self.max_degree() {
            return Err(Error::DegreeOverflow { order: i + j, degree: self.max_degree() });
        }
        Ok(self.poly.partial_at(i, j, x, y))
    }

    /// `f_ij(0, 0)`.
    pub fn deriv0(&self, i: usize, j: usize) -> f64 {
        self.coeff(i, j) * factorial(i) * factorial(j)
    }

    /// All partials of order at most four at `(x, y)`.
    pub fn partials(&self, x: f64, y: f64) -> Partials {
        let shifted = self.poly.shifted(x, y);
        let mut values = [0.0; 15];
        for d in 0..=PARTIALS_ORDER {
            for j in 0..=d {
                let i = d - j;
                values[partial_index(i, j)] = shifted.coeff(i, j) * factorial(i) * factorial(j);
            }
        }
        Partials { values }
    }

    /// Re-graphs the surface at `(x0, y0)`: returns `g(x, y) = f(x + x0, y + y0) - f(x0, y0) - f10 x - f01 y`.
    pub fn translate_regraph(&self, x0: f64, y0: f64) -> MongeJet {
        let mut poly = self.poly.shifted(x0, y0);
        poly.set(0, 0, 0.0);
        poly.set(1, 0, 0.0);
        poly.set(0, 1, 0.0);
        MongeJet { poly }
    }

    /// The jet of `(x, y) -> f(m (x, y)) / z_scale`.
    pub fn linear_change(&self, m: &Matrix2<f64>, z_scale: f64) -> Result<MongeJet> {
        let det = m.determinant();
        let scale = m.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()));
        if !det.is_finite() || det.abs() <= 1e-14 * scale * scale {
            return Err(Error::InvalidTransform(format!("singular linear map (det = {det:e})")));
        }
        if z_scale == 0.0 || !z_scale.is_finite() {
            return Err(Error::InvalidTransform("z scale must be nonzero".into()));
        }
        let n = self.max_degree();
        let xs = Poly2::linear(n, m[(0, 0)], m[(0, 1)]);
        let ys = Poly2::linear(n, m[(1, 0)], m[(1, 1)]);
        let poly = self.poly.compose(&xs, &ys, n).scaled(1.0 / z_scale);
        Ok(MongeJet { poly })
    }

    /// Re-graphs the image of the surface under a projective map fixing the origin.
    pub fn project_regraph(&self, map: &ProjectiveMap) -> Result<MongeJet> {
        map.regraph(self)
    }

    /// `f(y, x)`; reverses the ambient orientation.
    pub fn swapped(&self) -> MongeJet {
        MongeJet { poly: self.poly.transposed() }
    }

    /// `-f`; reverses the ambient orientation.
    pub fn negated(&self) -> MongeJet {
        MongeJet { poly: self.poly.scaled(-1.0) }
    }

    /// Keeps only monomials of total degree `lo..=hi`.
    pub fn truncated(&self, lo: usize, hi: usize) -> MongeJet {
        let mut poly = Poly2::zeros(self.max_degree());
        for (i, j, c) in self.poly.terms() {
            if (lo..=hi).contains(&(i + j)) {
                poly.set(i, j, c);
            }
        }
        MongeJet { poly }
    }

    /// Largest coefficient magnitude in total degree `d`.
    pub fn degree_scale(&self, d: usize) -> f64 {
        self.poly.degree_scale(d)
    }

    fn canonical_terms(&self) -> Vec<(usize, usize, f64)> {
        self.poly.terms().filter(|t| t.2.abs() >= CANONICAL_ZERO).collect()
    }
}

impl PartialEq for MongeJet {
    fn eq(&self, other: &Self) -> bool {
        self.canonical_terms() == other.canonical_terms()
    }
}

/// Partial derivatives `f_ij` of order at most four at one point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Partials {
    values: [f64; 15],
}

#[inline]
fn partial_index(i: usize, j: usize) -> usize {
    let d = i + j;
    d * (d + 1) / 2 + j
}

impl Partials {
    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        if i + j > PARTIALS_ORDER {
            0.0
        } else {
            self.values[partial_index(i, j)]
        }
    }

    /// Partials of `f(y, x)` at the mirrored point.
    pub fn transposed(&self) -> Partials {
        let mut values = [0.0; 15];
        for d in 0..=PARTIALS_ORDER {
            for j in 0..=d {
                values[partial_index(d - j, j)] = self.get(j, d - j);
            }
        }
        Partials { values }
    }

    /// `f11^2 - f20 f02`: positive at hyperbolic points.
    pub fn discriminant(&self) -> f64 {
        let b = self.get(1, 1);
        b * b - self.get(2, 0) * self.get(0, 2)
    }

    /// Magnitude of the second-order coefficients.
    pub fn hessian_scale(&self) -> f64 {
        self.get(2, 0).abs().max(self.get(1, 1).abs()).max(self.get(0, 2).abs())
    }

    /// Cubic form `f30 u^3 + 3 f21 u^2 v + 3 f12 u v^2 + f03 v^3`.
    pub fn cubic_form(&self, u: f64, v: f64) -> f64 {
        self.get(3, 0) * u * u * u
            + 3.0 * self.get(2, 1) * u * u * v
            + 3.0 * self.get(1, 2) * u * v * v
            + self.get(0, 3) * v * v * v
    }
}

pub(crate) fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * k as f64)
}
