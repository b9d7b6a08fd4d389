//! Exact scalars in the field Q(i) of Gaussian rationals.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};
use std::str::FromStr;

/// A Gaussian rational `re + im*i` with both parts kept in lowest terms.
///
/// `BigRational` guarantees the canonical form (positive denominator, reduced
/// fraction), so equality is structural and arithmetic is exact.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Scalar {
    pub re: BigRational,
    pub im: BigRational,
}

impl Scalar {
    pub fn zero() -> Self {
        Scalar {
            re: BigRational::zero(),
            im: BigRational::zero(),
        }
    }

    pub fn one() -> Self {
        Scalar {
            re: BigRational::one(),
            im: BigRational::zero(),
        }
    }

    pub fn i() -> Self {
        Scalar {
            re: BigRational::zero(),
            im: BigRational::one(),
        }
    }

    pub fn from_int(n: i64) -> Self {
        Scalar {
            re: BigRational::from_integer(BigInt::from(n)),
            im: BigRational::zero(),
        }
    }

    /// Rational `p/q`. Panics if `q == 0`.
    pub fn from_ratio(p: i64, q: i64) -> Self {
        Scalar {
            re: BigRational::new(BigInt::from(p), BigInt::from(q)),
            im: BigRational::zero(),
        }
    }

    pub fn from_parts(re: BigRational, im: BigRational) -> Self {
        Scalar { re, im }
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.re.is_one() && self.im.is_zero()
    }

    pub fn is_real(&self) -> bool {
        self.im.is_zero()
    }

    pub fn conj(&self) -> Self {
        Scalar {
            re: self.re.clone(),
            im: -self.im.clone(),
        }
    }

    /// Field norm `re^2 + im^2` (a nonnegative rational).
    pub fn norm(&self) -> BigRational {
        &self.re * &self.re + &self.im * &self.im
    }

    pub fn inv(&self) -> Option<Self> {
        if self.is_zero() {
            return None;
        }
        let n = self.norm();
        Some(Scalar {
            re: &self.re / &n,
            im: -&self.im / &n,
        })
    }

    /// An exact square root in Q(i), if one exists.
    pub fn sqrt_exact(&self) -> Option<Self> {
        if self.is_zero() {
            return Some(Scalar::zero());
        }
        // (x + yi)^2 = a + bi  =>  x^2 - y^2 = a, 2xy = b, and
        // (x^2 + y^2)^2 = a^2 + b^2 must be a rational square.
        let a = &self.re;
        let b = &self.im;
        let t = rational_sqrt(&(a * a + b * b))?;
        let two = BigRational::from_integer(BigInt::from(2));
        // x^2 = (a + t)/2; if that is not a square try (a - t)/2 via the
        // conjugate branch x = 0.
        let x2 = (a + &t) / &two;
        if let Some(x) = rational_sqrt(&x2) {
            if !x.is_zero() {
                let y = b / (&two * &x);
                return Some(Scalar { re: x, im: y });
            }
            // x == 0 forces b == 0 and a <= 0: sqrt is purely imaginary.
        }
        if b.is_zero() && a.is_negative() {
            let y = rational_sqrt(&(-a.clone()))?;
            return Some(Scalar {
                re: BigRational::zero(),
                im: y,
            });
        }
        None
    }

    /// Lossy conversion for the numerical layers. The imaginary part must
    /// vanish.
    pub fn to_f64(&self) -> Option<f64> {
        if !self.im.is_zero() {
            return None;
        }
        rational_to_f64(&self.re)
    }

    /// Total order used for deterministic tie-breaks (not a field order).
    pub fn lex_cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.re.cmp(&other.re).then_with(|| self.im.cmp(&other.im))
    }
}

fn rational_to_f64(r: &BigRational) -> Option<f64> {
    let num = r.numer();
    let den = r.denom();
    // Go through i128 when possible, otherwise via string (desk-scale inputs
    // never reach that path in practice).
    let n: f64 = i128::try_from(num.clone())
        .map(|v| v as f64)
        .unwrap_or_else(|_| num.to_string().parse().unwrap_or(f64::NAN));
    let d: f64 = i128::try_from(den.clone())
        .map(|v| v as f64)
        .unwrap_or_else(|_| den.to_string().parse().unwrap_or(f64::NAN));
    let out = n / d;
    out.is_finite().then_some(out)
}

/// Exact square root of a nonnegative rational, if it is a perfect square.
pub fn rational_sqrt(r: &BigRational) -> Option<BigRational> {
    if r.is_negative() {
        return None;
    }
    let ns = r.numer().sqrt();
    let ds = r.denom().sqrt();
    if &(&ns * &ns) == r.numer() && &(&ds * &ds) == r.denom() {
        Some(BigRational::new(ns, ds))
    } else {
        None
    }
}

impl fmt::Display for Scalar {
    /// Canonical text form: `p/q` for real values, `p/q+r/s*i` or `p/q-r/s*i`
    /// otherwise. Denominators are always positive and fractions reduced.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn frac(r: &BigRational) -> String {
            format!("{}/{}", r.numer(), r.denom())
        }
        if self.im.is_zero() {
            write!(f, "{}", frac(&self.re))
        } else if self.im.is_negative() {
            write!(f, "{}-{}*i", frac(&self.re), frac(&(-self.im.clone())))
        } else {
            write!(f, "{}+{}*i", frac(&self.re), frac(&self.im))
        }
    }
}

impl fmt::Debug for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

#[derive(Debug, thiserror::Error)]
#[error("invalid scalar literal {0:?}")]
pub struct ParseScalarError(pub String);

fn parse_rational(s: &str) -> Result<BigRational, ParseScalarError> {
    let bad = || ParseScalarError(s.to_string());
    if let Some((p, q)) = s.split_once('/') {
        let p: BigInt = p.trim().parse().map_err(|_| bad())?;
        let q: BigInt = q.trim().parse().map_err(|_| bad())?;
        if q.is_zero() {
            return Err(bad());
        }
        Ok(BigRational::new(p, q))
    } else {
        let p: BigInt = s.trim().parse().map_err(|_| bad())?;
        Ok(BigRational::from_integer(p))
    }
}

impl FromStr for Scalar {
    type Err = ParseScalarError;

    /// Accepts `p/q`, `p`, `p/q+r/s*i`, `p/q-r/s*i`, and the pure-imaginary
    /// shorthands `i`, `-i`, `r/s*i`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let bad = || ParseScalarError(s.to_string());
        if s.is_empty() {
            return Err(bad());
        }
        // Pure imaginary forms.
        if s == "i" {
            return Ok(Scalar::i());
        }
        if s == "-i" {
            return Ok(-Scalar::i());
        }
        if let Some(body) = s.strip_suffix("*i") {
            // Either "r/s*i" alone or "re+r/s*i"; find the join sign after
            // the leading character so negative real parts still parse.
            if let Some(pos) = find_join_sign(body) {
                let (re_part, im_part) = body.split_at(pos);
                let sign = &body[pos..pos + 1];
                let im = parse_rational(&im_part[1..])?;
                let im = if sign == "-" { -im } else { im };
                return Ok(Scalar {
                    re: parse_rational(re_part)?,
                    im,
                });
            }
            return Ok(Scalar {
                re: BigRational::zero(),
                im: parse_rational(body)?,
            });
        }
        Ok(Scalar {
            re: parse_rational(s)?,
            im: BigRational::zero(),
        })
    }
}

/// Position of the `+`/`-` that joins real and imaginary parts, skipping a
/// leading sign and any sign directly after `/` (not produced by `Display`,
/// but accepted for robustness).
fn find_join_sign(body: &str) -> Option<usize> {
    body.char_indices().skip(1).find_map(|(k, c)| {
        let prev = body.as_bytes()[k - 1];
        ((c == '+' || c == '-') && prev != b'/' && prev != b'+' && prev != b'-').then_some(k)
    })
}

impl serde::Serialize for Scalar {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> Result<S::Ok, S::Error> {
        ser.serialize_str(&self.to_string())
    }
}

impl<'de> serde::Deserialize<'de> for Scalar {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> Result<Self, D::Error> {
        let s = String::deserialize(de)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

macro_rules! forward_binop {
    ($trait:ident, $method:ident) => {
        impl $trait for Scalar {
            type Output = Scalar;
            fn $method(self, rhs: Scalar) -> Scalar {
                (&self).$method(&rhs)
            }
        }
        impl $trait<&Scalar> for Scalar {
            type Output = Scalar;
            fn $method(self, rhs: &Scalar) -> Scalar {
                (&self).$method(rhs)
            }
        }
        impl $trait<Scalar> for &Scalar {
            type Output = Scalar;
            fn $method(self, rhs: Scalar) -> Scalar {
                self.$method(&rhs)
            }
        }
    };
}

impl Add<&Scalar> for &Scalar {
    type Output = Scalar;
    fn add(self, rhs: &Scalar) -> Scalar {
        Scalar {
            re: &self.re + &rhs.re,
            im: &self.im + &rhs.im,
        }
    }
}
forward_binop!(Add, add);

impl Sub<&Scalar> for &Scalar {
    type Output = Scalar;
    fn sub(self, rhs: &Scalar) -> Scalar {
        Scalar {
            re: &self.re - &rhs.re,
            im: &self.im - &rhs.im,
        }
    }
}
forward_binop!(Sub, sub);

impl Mul<&Scalar> for &Scalar {
    type Output = Scalar;
    fn mul(self, rhs: &Scalar) -> Scalar {
        Scalar {
            re: &self.re * &rhs.re - &self.im * &rhs.im,
            im: &self.re * &rhs.im + &self.im * &rhs.re,
        }
    }
}
forward_binop!(Mul, mul);

impl Div<&Scalar> for &Scalar {
    type Output = Scalar;
    fn div(self, rhs: &Scalar) -> Scalar {
        self * rhs.inv().expect("division by zero scalar")
    }
}
forward_binop!(Div, div);

impl Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        Scalar {
            re: -self.re,
            im: -self.im,
        }
    }
}

impl Neg for &Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        -self.clone()
    }
}

impl AddAssign<&Scalar> for Scalar {
    fn add_assign(&mut self, rhs: &Scalar) {
        self.re += &rhs.re;
        self.im += &rhs.im;
    }
}

impl SubAssign<&Scalar> for Scalar {
    fn sub_assign(&mut self, rhs: &Scalar) {
        self.re -= &rhs.re;
        self.im -= &rhs.im;
    }
}

impl MulAssign<&Scalar> for Scalar {
    fn mul_assign(&mut self, rhs: &Scalar) {
        *self = &*self * rhs;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_text_forms() {
        for s in [
            "0/1",
            "1/1",
            "-3/7",
            "1/2+3/4*i",
            "1/2-3/4*i",
            "0/1+1/1*i",
        ] {
            let v: Scalar = s.parse().unwrap();
            assert_eq!(v.to_string(), s);
        }
        // Shorthands accepted on input.
        assert_eq!("0".parse::<Scalar>().unwrap(), Scalar::zero());
        assert_eq!("1".parse::<Scalar>().unwrap(), Scalar::one());
        assert_eq!("i".parse::<Scalar>().unwrap(), Scalar::i());
        assert_eq!("-2".parse::<Scalar>().unwrap(), Scalar::from_int(-2));
        assert_eq!(
            "-1/2+1/2*i".parse::<Scalar>().unwrap().to_string(),
            "-1/2+1/2*i"
        );
    }

    #[test]
    fn exact_arithmetic() {
        let a = Scalar::from_ratio(1, 3) + Scalar::i() * Scalar::from_ratio(2, 7);
        let b = Scalar::from_ratio(-5, 11) + Scalar::i() * Scalar::from_ratio(1, 2);
        assert_eq!((&a + &b) - &b, a);
        assert_eq!(&a * &b.inv().unwrap() * &b, a);
        assert!((Scalar::i() * Scalar::i() + Scalar::one()).is_zero());
    }

    #[test]
    fn exact_sqrt() {
        let four = Scalar::from_int(4);
        assert_eq!(four.sqrt_exact().unwrap(), Scalar::from_int(2));
        assert_eq!(
            Scalar::from_int(-1).sqrt_exact().unwrap(),
            Scalar::i()
        );
        assert!(Scalar::from_int(2).sqrt_exact().is_none());
        // 2i = (1+i)^2
        let two_i = Scalar::from_int(2) * Scalar::i();
        let r = two_i.sqrt_exact().unwrap();
        assert_eq!(&r * &r, two_i);
        let q = Scalar::from_ratio(9, 4);
        assert_eq!(q.sqrt_exact().unwrap(), Scalar::from_ratio(3, 2));
    }
}
