//! Exact root extraction in Q(i) for small characteristic polynomials.
//!
//! The classification pipeline needs every eigenvalue of its input matrices
//! to lie in Q(i). Candidate roots are produced by the rational-root theorem
//! over the Gaussian integers Z[i] (a Euclidean domain), with divisors
//! enumerated through the factorization of the integer norm.

use super::scalar::Scalar;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

/// A Gaussian integer.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct GaussInt {
    pub re: BigInt,
    pub im: BigInt,
}

impl GaussInt {
    fn new(re: BigInt, im: BigInt) -> Self {
        GaussInt { re, im }
    }


    fn one() -> Self {
        GaussInt::new(BigInt::one(), BigInt::zero())
    }

    fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    fn norm(&self) -> BigInt {
        &self.re * &self.re + &self.im * &self.im
    }

    fn mul(&self, o: &GaussInt) -> GaussInt {
        GaussInt::new(
            &self.re * &o.re - &self.im * &o.im,
            &self.re * &o.im + &self.im * &o.re,
        )
    }

    /// Exact division; `None` if `o` does not divide `self` in Z[i].
    fn div_exact(&self, o: &GaussInt) -> Option<GaussInt> {
        let n = o.norm();
        if n.is_zero() {
            return None;
        }
        let conj = GaussInt::new(o.re.clone(), -o.im.clone());
        let p = self.mul(&conj);
        if (&p.re % &n).is_zero() && (&p.im % &n).is_zero() {
            Some(GaussInt::new(&p.re / &n, &p.im / &n))
        } else {
            None
        }
    }

    fn to_scalar(&self) -> Scalar {
        Scalar::from_parts(
            BigRational::from_integer(self.re.clone()),
            BigRational::from_integer(self.im.clone()),
        )
    }
}

fn trial_factor(mut n: BigInt) -> Vec<(BigInt, u32)> {
    let mut out = Vec::new();
    let mut p = BigInt::from(2);
    while &p * &p <= n {
        let mut e = 0;
        while (&n % &p).is_zero() {
            n /= &p;
            e += 1;
        }
        if e > 0 {
            out.push((p.clone(), e));
        }
        p += if p == BigInt::from(2) { 1 } else { 2 };
    }
    if n > BigInt::one() {
        out.push((n, 1));
    }
    out
}

/// Gaussian primes lying over a rational prime `p`.
fn gaussian_primes_over(p: &BigInt) -> Vec<GaussInt> {
    if *p == BigInt::from(2) {
        return vec![GaussInt::new(BigInt::one(), BigInt::one())];
    }
    if (p % BigInt::from(4u8)) == BigInt::from(3u8) {
        return vec![GaussInt::new(p.clone(), BigInt::zero())];
    }
    // p = 1 mod 4 splits: find a^2 + b^2 = p by search (norms stay small at
    // desk scale).
    let mut a = BigInt::one();
    loop {
        let rem = p - &a * &a;
        if rem <= BigInt::zero() {
            break;
        }
        let b = rem.sqrt();
        if &b * &b == rem {
            return vec![
                GaussInt::new(a.clone(), b.clone()),
                GaussInt::new(a, -b),
            ];
        }
        a += 1;
    }
    unreachable!("every prime 1 mod 4 is a sum of two squares");
}

/// All divisors of `z` in Z[i] up to unit multiples (one representative per
/// associate class).
fn gaussian_divisors(z: &GaussInt) -> Vec<GaussInt> {
    assert!(!z.is_zero());
    let mut prime_powers: Vec<(GaussInt, u32)> = Vec::new();
    for (p, _) in trial_factor(z.norm()) {
        for gp in gaussian_primes_over(&p) {
            let mut m = 0;
            let mut cur = z.clone();
            while let Some(next) = cur.div_exact(&gp) {
                cur = next;
                m += 1;
            }
            if m > 0 {
                prime_powers.push((gp, m));
            }
        }
    }
    let mut divisors = vec![GaussInt::one()];
    for (gp, m) in prime_powers {
        let mut next = Vec::with_capacity(divisors.len() * (m as usize + 1));
        for d in &divisors {
            let mut acc = d.clone();
            next.push(acc.clone());
            for _ in 0..m {
                acc = acc.mul(&gp);
                next.push(acc.clone());
            }
        }
        divisors = next;
    }
    divisors
}

fn eval_poly(coeffs: &[Scalar], x: &Scalar) -> Scalar {
    let mut acc = Scalar::zero();
    for c in coeffs.iter().rev() {
        acc = &acc * x + c;
    }
    acc
}

/// Synthetic division by `(x - root)`; assumes the remainder vanishes.
fn deflate(coeffs: &[Scalar], root: &Scalar) -> Vec<Scalar> {
    let n = coeffs.len() - 1;
    let mut out = vec![Scalar::zero(); n];
    let mut carry = Scalar::zero();
    for k in (0..n).rev() {
        carry = &coeffs[k + 1] + &(&carry * root);
        out[k] = carry.clone();
    }
    out
}

/// Clears denominators and content so coefficients are coprime in Z[i].
fn primitive_int_coeffs(coeffs: &[Scalar]) -> Vec<GaussInt> {
    let mut lcm = BigInt::one();
    for c in coeffs {
        for d in [c.re.denom(), c.im.denom()] {
            let g = num_integer::Integer::gcd(&lcm, d);
            lcm = &lcm / g * d;
        }
    }
    let scale = BigRational::from_integer(lcm);
    let ints: Vec<GaussInt> = coeffs
        .iter()
        .map(|c| {
            let re = (&c.re * &scale).to_integer();
            let im = (&c.im * &scale).to_integer();
            GaussInt::new(re, im)
        })
        .collect();
    // Divide out the integer gcd of all norms' common Gaussian factor; a
    // plain integer content strip is enough for root enumeration.
    let mut g = BigInt::zero();
    for c in &ints {
        g = num_integer::Integer::gcd(&g, &c.re);
        g = num_integer::Integer::gcd(&g, &c.im);
    }
    if g.is_zero() || g.is_one() {
        return ints;
    }
    ints.iter()
        .map(|c| GaussInt::new(&c.re / &g, &c.im / &g))
        .collect()
}

const UNITS: [(i8, i8); 4] = [(1, 0), (-1, 0), (0, 1), (0, -1)];

/// All roots of `p` in Q(i) with multiplicities, or `None` when `p` does not
/// split into linear factors over Q(i). Coefficients are lowest-degree first;
/// the polynomial must be nonzero.
pub fn roots_in_qi(coeffs: &[Scalar]) -> Option<Vec<(Scalar, usize)>> {
    let mut work: Vec<Scalar> = coeffs.to_vec();
    while work.last().is_some_and(Scalar::is_zero) {
        work.pop();
    }
    assert!(!work.is_empty(), "zero polynomial");
    let mut roots: Vec<(Scalar, usize)> = Vec::new();

    // Peel off roots at zero first.
    let mut zero_mult = 0;
    while work.len() > 1 && work[0].is_zero() {
        work.remove(0);
        zero_mult += 1;
    }
    if zero_mult > 0 {
        roots.push((Scalar::zero(), zero_mult));
    }

    while work.len() > 1 {
        let ints = primitive_int_coeffs(&work);
        let a0 = &ints[0];
        let an = ints.last().unwrap();
        debug_assert!(!a0.is_zero());
        let mut found = None;
        'search: for num in gaussian_divisors(a0) {
            for den in gaussian_divisors(an) {
                for (ur, ui) in UNITS {
                    let unit = GaussInt::new(BigInt::from(ur), BigInt::from(ui));
                    let cand_num = num.mul(&unit).to_scalar();
                    let cand = &cand_num / &den.to_scalar();
                    if eval_poly(&work, &cand).is_zero() {
                        found = Some(cand);
                        break 'search;
                    }
                }
            }
        }
        let root = found?;
        let mut mult = 0;
        while work.len() > 1 && eval_poly(&work, &root).is_zero() {
            work = deflate(&work, &root);
            mult += 1;
        }
        roots.push((root, mult));
    }
    roots.sort_by(|a, b| a.0.lex_cmp(&b.0));
    Some(roots)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(n: i64) -> Scalar {
        Scalar::from_int(n)
    }

    #[test]
    fn rational_roots_with_multiplicity() {
        // (x - 1)^2 (x + 2) = x^3 - 3x + 2
        let p = vec![s(2), s(-3), s(0), s(1)];
        let roots = roots_in_qi(&p).unwrap();
        assert_eq!(roots, vec![(s(-2), 1), (s(1), 2)]);
    }

    #[test]
    fn gaussian_roots() {
        // x^2 + 1 = (x - i)(x + i)
        let p = vec![s(1), s(0), s(1)];
        let roots = roots_in_qi(&p).unwrap();
        assert_eq!(roots.len(), 2);
        assert!(roots.iter().any(|(r, _)| *r == Scalar::i()));
        assert!(roots.iter().any(|(r, _)| *r == -Scalar::i()));
    }

    #[test]
    fn fractional_roots() {
        // (2x - 1)(3x + 2) = 6x^2 + x - 2
        let p = vec![s(-2), s(1), s(6)];
        let roots = roots_in_qi(&p).unwrap();
        assert!(roots.iter().any(|(r, _)| *r == Scalar::from_ratio(1, 2)));
        assert!(roots.iter().any(|(r, _)| *r == Scalar::from_ratio(-2, 3)));
    }

    #[test]
    fn irrational_detected() {
        // x^2 - 2 has no roots in Q(i)
        assert!(roots_in_qi(&[s(-2), s(0), s(1)]).is_none());
        // x^2 - i: root would be a square root of i, not in Q(i)
        assert!(roots_in_qi(&[-Scalar::i(), s(0), s(1)]).is_none());
    }

    #[test]
    fn zero_roots_and_mixed() {
        // x^2 (x - 1/2)
        let p = vec![s(0), s(0), Scalar::from_ratio(-1, 2), s(1)];
        let roots = roots_in_qi(&p).unwrap();
        assert_eq!(
            roots,
            vec![(s(0), 2), (Scalar::from_ratio(1, 2), 1)]
        );
    }

    #[test]
    fn gaussian_divisor_enumeration() {
        let z = GaussInt::new(BigInt::from(5), BigInt::zero());
        let divs = gaussian_divisors(&z);
        // 5 = (2+i)(2-i): divisors up to units: 1, 2+i, 2-i, 5
        assert_eq!(divs.len(), 4);
    }
}
