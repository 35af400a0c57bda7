//! Projective re-graphing of Monge jets.

use nalgebra::{Matrix2, Matrix4};

use super::{MongeJet, Poly2};
use crate::error::{Error, Result};

/// A collineation of `RP^3` acting on homogeneous coordinates `[x : y : z : 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct ProjectiveMap {
    matrix: Matrix4<f64>,
}

impl ProjectiveMap {
    pub fn new(matrix: Matrix4<f64>) -> Result<Self> {
        let det = matrix.determinant();
        if !det.is_finite() || det.abs() <= 1e-14 * matrix.amax().powi(4) {
            return Err(Error::InvalidTransform(format!("projective matrix is singular (det = {det:e})")));
        }
        Ok(Self { matrix })
    }

    pub fn identity() -> Self {
        Self { matrix: Matrix4::identity() }
    }

    /// `(x, y, z) -> (x, y, z) / (1 - alpha x - beta y)`.
    ///
    /// On a Monge jet with quadratic part `Q` and cubic part `C` this replaces
    /// `C` by `C - Q (alpha x + beta y)` and leaves `Q` unchanged.
    pub fn cubic_shift(alpha: f64, beta: f64) -> Self {
        let mut matrix = Matrix4::identity();
        matrix[(3, 0)] = -alpha;
        matrix[(3, 1)] = -beta;
        Self { matrix }
    }

    pub fn matrix(&self) -> &Matrix4<f64> {
        &self.matrix
    }

    /// Whether the map sends the origin `[0:0:0:1]` to itself.
    pub fn fixes_origin(&self) -> bool {
        let m = &self.matrix;
        let tol = 1e-15 * m.amax();
        m[(0, 3)].abs() <= tol && m[(1, 3)].abs() <= tol && m[(2, 3)].abs() <= tol && m[(3, 3)] != 0.0
    }

    /// Jet of the image surface, re-graphed over its tangent chart at the origin.
    pub(crate) fn regraph(&self, jet: &MongeJet) -> Result<MongeJet> {
        if !self.fixes_origin() {
            return Err(Error::InvalidTransform("projective map must fix the origin".into()));
        }
        let n = jet.max_degree();
        let m = &self.matrix;
        let v = [
            Poly2::linear(n, 1.0, 0.0),
            Poly2::linear(n, 0.0, 1.0),
            jet.poly().clone(),
            Poly2::constant(n, 1.0),
        ];
        let row = |k: usize| -> Poly2 {
            (0..4).fold(Poly2::zeros(n), |acc, l| acc.add(&v[l].scaled(m[(k, l)])))
        };
        let w = row(3)
            .recip_trunc(n)
            .ok_or_else(|| Error::ChartFailure("origin sent to infinity".into()))?;
        let big_x = row(0).mul_trunc(&w, n);
        let big_y = row(1).mul_trunc(&w, n);
        let big_z = row(2).mul_trunc(&w, n);

        let lin = Matrix2::new(big_x.coeff(1, 0), big_x.coeff(0, 1), big_y.coeff(1, 0), big_y.coeff(0, 1));
        let scale = lin.amax().max(f64::MIN_POSITIVE);
        let inv = lin
            .try_inverse()
            .filter(|_| lin.determinant().abs() > 1e-12 * scale * scale)
            .ok_or_else(|| Error::ChartFailure("tangent plane is vertical after the map".into()))?;

        let nonlinear = |p: &Poly2| -> Poly2 {
            let mut q = p.clone();
            q.set(0, 0, 0.0);
            q.set(1, 0, 0.0);
            q.set(0, 1, 0.0);
            q
        };
        let nx = nonlinear(&big_x);
        let ny = nonlinear(&big_y);

        // Fixed point u = A^{-1} ((X, Y) - N(u)); each pass fixes one more degree.
        let apply_inv = |a: &Poly2, b: &Poly2| -> (Poly2, Poly2) {
            (
                a.scaled(inv[(0, 0)]).add(&b.scaled(inv[(0, 1)])),
                a.scaled(inv[(1, 0)]).add(&b.scaled(inv[(1, 1)])),
            )
        };
        let ident_x = Poly2::linear(n, 1.0, 0.0);
        let ident_y = Poly2::linear(n, 0.0, 1.0);
        let (mut ux, mut uy) = apply_inv(&ident_x, &ident_y);
        for _ in 1..n {
            let rx = ident_x.sub(&nx.compose(&ux, &uy, n));
            let ry = ident_y.sub(&ny.compose(&ux, &uy, n));
            let next = apply_inv(&rx, &ry);
            ux = next.0;
            uy = next.1;
        }
        MongeJet::from_poly(big_z.compose(&ux, &uy, n))
    }

    /// Image of an affine point, `None` when it lands at infinity.
    pub fn apply(&self, x: f64, y: f64, z: f64) -> Option<[f64; 3]> {
        let h = self.matrix * nalgebra::Vector4::new(x, y, z, 1.0);
        (h.w != 0.0).then(|| [h.x / h.w, h.y / h.w, h.z / h.w])
    }
}
