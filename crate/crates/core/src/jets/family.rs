use std::collections::BTreeMap;

use super::MongeJet;
use crate::error::{Error, Result};

/// One-parameter family of jets: each coefficient is a polynomial in `t`.
#[derive(Clone, Debug, PartialEq)]
pub struct FamilyJet {
    max_degree: usize,
    terms: BTreeMap<(usize, usize), Vec<f64>>,
}

impl FamilyJet {
    /// `terms` holds `(i, j, [c0, c1, ...])` meaning `(c0 + c1 t + ...) x^i y^j`.
    pub fn from_terms(max_degree: usize, terms: &[(usize, usize, Vec<f64>)]) -> Result<Self> {
        MongeJet::zero(max_degree)?;
        let mut map: BTreeMap<(usize, usize), Vec<f64>> = BTreeMap::new();
        for (i, j, cs) in terms {
            if i + j > max_degree {
                return Err(Error::DegreeOverflow { order: i + j, degree: max_degree });
            }
            let slot = map.entry((*i, *j)).or_default();
            if slot.len() < cs.len() {
                slot.resize(cs.len(), 0.0);
            }
            for (k, c) in cs.iter().enumerate() {
                slot[k] += c;
            }
        }
        Ok(Self { max_degree, terms: map })
    }

    /// The constant family `t -> jet`.
    pub fn constant(jet: &MongeJet) -> Self {
        let terms = jet.terms().into_iter().map(|(i, j, c)| ((i, j), vec![c])).collect();
        Self { max_degree: jet.max_degree(), terms }
    }

    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    pub fn terms(&self) -> impl Iterator<Item = (usize, usize, &[f64])> {
        self.terms.iter().map(|(&(i, j), cs)| (i, j, cs.as_slice()))
    }

    pub fn eval(&self, t: f64) -> MongeJet {
        let terms: Vec<_> = self
            .terms
            .iter()
            .map(|(&(i, j), cs)| (i, j, cs.iter().rev().fold(0.0, |acc, c| acc * t + c)))
            .collect();
        MongeJet::from_terms(self.max_degree, &terms).expect("family terms are degree-checked")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn evaluates_coefficient_polynomials() {
        let fam = FamilyJet::from_terms(5, &[(1, 1, vec![1.0]), (3, 1, vec![0.0, 1.0 / 6.0]), (4, 0, vec![1.0, 0.0, 2.0])])
            .unwrap();
        let f = fam.eval(2.0);
        assert_eq!(f.coeff(1, 1), 1.0);
        assert!((f.coeff(3, 1) - 2.0 / 6.0).abs() < 1e-15);
        assert_eq!(f.coeff(4, 0), 9.0);
        assert!(FamilyJet::from_terms(4, &[(5, 0, vec![1.0])]).is_err());
    }
}
