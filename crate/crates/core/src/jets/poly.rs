//! Dense bivariate polynomials truncated at a fixed total degree.
//!
//! Coefficients are stored in a triangular layout, one row per total degree.
//! The same type doubles as a truncated power series: products and
//! compositions drop every monomial above the requested degree.

use std::fmt;

#[inline]
fn index(i: usize, j: usize) -> usize {
    let d = i + j;
    d * (d + 1) / 2 + j
}

fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc = 1.0;
    for t in 0..k {
        acc = acc * (n - t) as f64 / (t + 1) as f64;
    }
    acc
}

fn falling(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, t| acc * (n - t) as f64)
}

fn powers(v: f64, n: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n + 1);
    let mut acc = 1.0;
    for _ in 0..=n {
        out.push(acc);
        acc *= v;
    }
    out
}

/// Polynomial `sum c_ij x^i y^j` with `i + j <= degree`.
#[derive(Clone, PartialEq)]
pub struct Poly2 {
    degree: usize,
    coeffs: Vec<f64>,
}

impl Poly2 {
    pub fn zeros(degree: usize) -> Self {
        Self { degree, coeffs: vec![0.0; index(0, degree) + 1] }
    }

    /// Builds `c` as a constant polynomial of the given degree.
    pub fn constant(degree: usize, c: f64) -> Self {
        let mut p = Self::zeros(degree);
        p.coeffs[0] = c;
        p
    }

    /// Linear form `a x + b y`.
    pub fn linear(degree: usize, a: f64, b: f64) -> Self {
        let mut p = Self::zeros(degree);
        if degree >= 1 {
            p.set(1, 0, a);
            p.set(0, 1, b);
        }
        p
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn coeff(&self, i: usize, j: usize) -> f64 {
        if i + j > self.degree {
            0.0
        } else {
            self.coeffs[index(i, j)]
        }
    }

    /// Sets a coefficient. Monomials above the degree are silently dropped.
    pub fn set(&mut self, i: usize, j: usize, c: f64) {
        if i + j <= self.degree {
            self.coeffs[index(i, j)] = c;
        }
    }

    pub fn add_term(&mut self, i: usize, j: usize, c: f64) {
        if i + j <= self.degree {
            self.coeffs[index(i, j)] += c;
        }
    }

    /// Nonzero monomials as `(i, j, c)`, ordered by total degree then by `j`.
    pub fn terms(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..=self.degree).flat_map(move |d| {
            (0..=d).filter_map(move |j| {
                let c = self.coeffs[index(d - j, j)];
                (c != 0.0).then_some((d - j, j, c))
            })
        })
    }

    /// Largest absolute coefficient among monomials of total degree `d`.
    pub fn degree_scale(&self, d: usize) -> f64 {
        if d > self.degree {
            return 0.0;
        }
        (0..=d).map(|j| self.coeffs[index(d - j, j)].abs()).fold(0.0, f64::max)
    }

    /// The homogeneous part of total degree `d`, kept at this polynomial's degree.
    pub fn homogeneous(&self, d: usize) -> Self {
        let mut out = Self::zeros(self.degree);
        if d <= self.degree {
            for j in 0..=d {
                out.set(d - j, j, self.coeff(d - j, j));
            }
        }
        out
    }

    /// Copy with a different truncation degree.
    pub fn with_degree(&self, degree: usize) -> Self {
        let mut out = Self::zeros(degree);
        for (i, j, c) in self.terms() {
            out.set(i, j, c);
        }
        out
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        let px = powers(x, self.degree);
        let py = powers(y, self.degree);
        let mut acc = 0.0;
        for d in 0..=self.degree {
            for j in 0..=d {
                let c = self.coeffs[index(d - j, j)];
                if c != 0.0 {
                    acc += c * px[d - j] * py[j];
                }
            }
        }
        acc
    }

    /// `d^{i+j} p / dx^i dy^j` evaluated at `(x, y)`.
    pub fn partial_at(&self, i: usize, j: usize, x: f64, y: f64) -> f64 {
        if i + j > self.degree {
            return 0.0;
        }
        let px = powers(x, self.degree);
        let py = powers(y, self.degree);
        let mut acc = 0.0;
        for d in (i + j)..=self.degree {
            for l in j..=(d - i) {
                let k = d - l;
                if k < i {
                    continue;
                }
                let c = self.coeffs[index(k, l)];
                if c != 0.0 {
                    acc += c * falling(k, i) * falling(l, j) * px[k - i] * py[l - j];
                }
            }
        }
        acc
    }

    /// Partial derivative polynomial `d^{i+j} p / dx^i dy^j`.
    pub fn derivative(&self, i: usize, j: usize) -> Self {
        let mut out = Self::zeros(self.degree);
        for (k, l, c) in self.terms() {
            if k >= i && l >= j {
                out.add_term(k - i, l - j, c * falling(k, i) * falling(l, j));
            }
        }
        out
    }

    /// Coefficients of `p(x + x0, y + y0)`.
    pub fn shifted(&self, x0: f64, y0: f64) -> Self {
        let px = powers(x0, self.degree);
        let py = powers(y0, self.degree);
        let mut out = Self::zeros(self.degree);
        for (k, l, c) in self.terms() {
            for i in 0..=k {
                let bx = binomial(k, i) * px[k - i];
                for j in 0..=l {
                    out.add_term(i, j, c * bx * binomial(l, j) * py[l - j]);
                }
            }
        }
        out
    }

    /// Swaps the roles of `x` and `y`.
    pub fn transposed(&self) -> Self {
        let mut out = Self::zeros(self.degree);
        for (i, j, c) in self.terms() {
            out.set(j, i, c);
        }
        out
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self { degree: self.degree, coeffs: self.coeffs.iter().map(|c| c * s).collect() }
    }

    pub fn add(&self, other: &Self) -> Self {
        let degree = self.degree.max(other.degree);
        let mut out = self.with_degree(degree);
        for (i, j, c) in other.terms() {
            out.add_term(i, j, c);
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scaled(-1.0))
    }

    /// Product truncated at `degree`.
    pub fn mul_trunc(&self, other: &Self, degree: usize) -> Self {
        let mut out = Self::zeros(degree);
        for (i, j, a) in self.terms() {
            if i + j > degree {
                continue;
            }
            for (k, l, b) in other.terms() {
                if i + j + k + l <= degree {
                    out.add_term(i + k, j + l, a * b);
                }
            }
        }
        out
    }

    /// `1 / p` as a series truncated at `degree`; `None` when the constant term vanishes.
    pub fn recip_trunc(&self, degree: usize) -> Option<Self> {
        let c = self.coeff(0, 0);
        if c == 0.0 {
            return None;
        }
        let mut u = self.with_degree(degree).scaled(-1.0 / c);
        u.set(0, 0, 0.0);
        // 1/(c(1 - u)) = (1/c) sum u^k
        let mut sum = Self::constant(degree, 1.0);
        let mut power = Self::constant(degree, 1.0);
        for _ in 0..degree {
            power = power.mul_trunc(&u, degree);
            sum = sum.add(&power);
        }
        Some(sum.scaled(1.0 / c))
    }

    /// Substitutes `x -> xs`, `y -> ys` and truncates at `degree`.
    ///
    /// Exact up to `degree` when `xs` and `ys` have no constant term.
    pub fn compose(&self, xs: &Self, ys: &Self, degree: usize) -> Self {
        let n = self.degree;
        let mut xp = vec![Self::constant(degree, 1.0)];
        let mut yp = vec![Self::constant(degree, 1.0)];
        for k in 1..=n {
            xp.push(xp[k - 1].mul_trunc(xs, degree));
            yp.push(yp[k - 1].mul_trunc(ys, degree));
        }
        let mut out = Self::zeros(degree);
        for (i, j, c) in self.terms() {
            let term = xp[i].mul_trunc(&yp[j], degree);
            for (k, l, t) in term.terms() {
                out.add_term(k, l, c * t);
            }
        }
        out
    }

    /// Max absolute coefficient difference, over the union of both supports.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let n = self.degree.max(other.degree);
        let mut worst: f64 = 0.0;
        for d in 0..=n {
            for j in 0..=d {
                worst = worst.max((self.coeff(d - j, j) - other.coeff(d - j, j)).abs());
            }
        }
        worst
    }
}

impl fmt::Debug for Poly2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Poly2[{}](", self.degree)?;
        let mut first = true;
        for (i, j, c) in self.terms() {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "{c}·x^{i}y^{j}")?;
        }
        write!(f, ")")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Poly2 {
        // 1 + 2x - y + 3xy + x^3 - 0.5 y^4
        let mut p = Poly2::zeros(4);
        p.set(0, 0, 1.0);
        p.set(1, 0, 2.0);
        p.set(0, 1, -1.0);
        p.set(1, 1, 3.0);
        p.set(3, 0, 1.0);
        p.set(0, 4, -0.5);
        p
    }

    #[test]
    fn eval_and_partials() {
        let p = sample();
        let (x, y) = (0.7_f64, -0.3_f64);
        let direct = 1.0 + 2.0 * x - y + 3.0 * x * y + x.powi(3) - 0.5 * y.powi(4);
        assert!((p.eval(x, y) - direct).abs() < 1e-14);
        assert!((p.partial_at(1, 0, x, y) - (2.0 + 3.0 * y + 3.0 * x * x)).abs() < 1e-14);
        assert!((p.partial_at(0, 3, x, y) - (-12.0 * y)).abs() < 1e-14);
        assert!((p.partial_at(1, 1, x, y) - 3.0).abs() < 1e-14);
        assert_eq!(p.partial_at(2, 3, x, y), 0.0);
        let d = p.derivative(2, 0);
        assert!((d.eval(x, y) - 6.0 * x).abs() < 1e-14);
    }

    #[test]
    fn shift_matches_evaluation() {
        let p = sample();
        let s = p.shifted(0.4, -1.1);
        for &(x, y) in &[(0.0, 0.0), (0.3, 0.2), (-1.0, 0.5)] {
            assert!((s.eval(x, y) - p.eval(x + 0.4, y - 1.1)).abs() < 1e-12);
        }
    }

    #[test]
    fn reciprocal_series() {
        let mut p = Poly2::zeros(5);
        p.set(0, 0, 2.0);
        p.set(1, 0, 0.5);
        p.set(0, 1, -0.25);
        let r = p.recip_trunc(5).unwrap();
        let prod = p.mul_trunc(&r, 5);
        assert!(prod.max_abs_diff(&Poly2::constant(5, 1.0)) < 1e-14);
        assert!(Poly2::zeros(3).recip_trunc(3).is_none());
    }

    #[test]
    fn compose_with_linear_forms() {
        let p = sample();
        let xs = Poly2::linear(4, 1.0, 1.0);
        let ys = Poly2::linear(4, 1.0, -1.0);
        let q = p.compose(&xs, &ys, 4);
        for &(x, y) in &[(0.1, 0.2), (-0.4, 0.3)] {
            assert!((q.eval(x, y) - p.eval(x + y, x - y)).abs() < 1e-13);
        }
    }
}
