//! Minimal exact multivariate polynomials over Q(i), used to state and check
//! Casimir identities.

use crate::exactfield::Scalar;
use std::collections::BTreeMap;

/// Monomial as a sparse exponent map `variable index -> exponent`.
pub type Monomial = BTreeMap<usize, u32>;

/// Sparse polynomial with exact coefficients.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct Poly {
    terms: BTreeMap<Monomial, Scalar>,
}

impl Poly {
    pub fn zero() -> Self {
        Poly::default()
    }

    pub fn constant(c: Scalar) -> Self {
        let mut p = Poly::zero();
        if !c.is_zero() {
            p.terms.insert(Monomial::new(), c);
        }
        p
    }

    pub fn var(idx: usize) -> Self {
        let mut mono = Monomial::new();
        mono.insert(idx, 1);
        let mut p = Poly::zero();
        p.terms.insert(mono, Scalar::one());
        p
    }

    /// A linear form `sum coeffs[i] * v_i`.
    pub fn linear_form(coeffs: &[Scalar]) -> Self {
        let mut p = Poly::zero();
        for (i, c) in coeffs.iter().enumerate() {
            if !c.is_zero() {
                p.add_term(Monomial::from([(i, 1)]), c.clone());
            }
        }
        p
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Scalar)> {
        self.terms.iter()
    }

    pub fn add_term(&mut self, mono: Monomial, coeff: Scalar) {
        if coeff.is_zero() {
            return;
        }
        let entry = self.terms.entry(mono.clone()).or_insert_with(Scalar::zero);
        *entry += &coeff;
        if entry.is_zero() {
            self.terms.remove(&mono);
        }
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn scale(&self, s: &Scalar) -> Poly {
        if s.is_zero() {
            return Poly::zero();
        }
        let mut out = Poly::zero();
        for (m, c) in &self.terms {
            out.terms.insert(m.clone(), c * s);
        }
        out
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        let mut out = Poly::zero();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                let mut m = ma.clone();
                for (&v, &e) in mb {
                    *m.entry(v).or_insert(0) += e;
                }
                out.add_term(m, ca * cb);
            }
        }
        out
    }

    pub fn pow(&self, e: u32) -> Poly {
        let mut out = Poly::constant(Scalar::one());
        for _ in 0..e {
            out = out.mul(self);
        }
        out
    }

    pub fn diff(&self, var: usize) -> Poly {
        let mut out = Poly::zero();
        for (m, c) in &self.terms {
            let Some(&e) = m.get(&var) else { continue };
            let mut m2 = m.clone();
            if e == 1 {
                m2.remove(&var);
            } else {
                m2.insert(var, e - 1);
            }
            out.add_term(m2, c * &Scalar::from_int(e as i64));
        }
        out
    }

    /// Total degree, or `None` for the zero polynomial.
    pub fn degree(&self) -> Option<u32> {
        self.terms
            .keys()
            .map(|m| m.values().sum::<u32>())
            .max()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arithmetic_and_diff() {
        // p = (v0 + v1)^2 = v0^2 + 2 v0 v1 + v1^2
        let p = Poly::var(0).add(&Poly::var(1)).pow(2);
        assert_eq!(p.terms().count(), 3);
        // dp/dv0 = 2 v0 + 2 v1
        let d = p.diff(0);
        let expected = Poly::var(0)
            .add(&Poly::var(1))
            .scale(&Scalar::from_int(2));
        assert_eq!(d, expected);
        assert!(p.add(&p.scale(&Scalar::from_int(-1))).is_zero());
        assert_eq!(p.degree(), Some(2));
    }
}
