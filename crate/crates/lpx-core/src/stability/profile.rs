//! Analytic 1-D profiles (polynomial, exponential, hyperbolic) with exact
//! derivatives, so stability runs are reproducible from configuration alone.

use std::str::FromStr;

/// A built-in analytic function of one variable with derivatives of any
/// order.
#[derive(Clone, Debug, PartialEq)]
pub enum Profile1D {
    /// Coefficients lowest-degree first.
    Poly(Vec<f64>),
    /// `amp * exp(rate * s)`
    Exp { amp: f64, rate: f64 },
    /// `amp * cosh(rate * s)`
    Cosh { amp: f64, rate: f64 },
    /// `amp * sinh(rate * s)`
    Sinh { amp: f64, rate: f64 },
}

impl Profile1D {
    pub fn constant(c: f64) -> Self {
        Profile1D::Poly(vec![c])
    }

    pub fn zero() -> Self {
        Profile1D::Poly(vec![])
    }

    /// Value of the `deriv`-th derivative at `s`.
    pub fn eval(&self, s: f64, deriv: usize) -> f64 {
        match self {
            Profile1D::Poly(coeffs) => {
                let mut acc = 0.0;
                for (k, c) in coeffs.iter().enumerate().skip(deriv) {
                    let mut fall = 1.0;
                    for j in 0..deriv {
                        fall *= (k - j) as f64;
                    }
                    acc += c * fall * s.powi((k - deriv) as i32);
                }
                acc
            }
            Profile1D::Exp { amp, rate } => amp * rate.powi(deriv as i32) * (rate * s).exp(),
            Profile1D::Cosh { amp, rate } => {
                let r = amp * rate.powi(deriv as i32);
                if deriv % 2 == 0 {
                    r * (rate * s).cosh()
                } else {
                    r * (rate * s).sinh()
                }
            }
            Profile1D::Sinh { amp, rate } => {
                let r = amp * rate.powi(deriv as i32);
                if deriv % 2 == 0 {
                    r * (rate * s).sinh()
                } else {
                    r * (rate * s).cosh()
                }
            }
        }
    }

    /// Finite-difference cross-check of the first three derivatives;
    /// construction-time guard against inconsistent profile definitions.
    pub fn check_derivatives(&self) -> bool {
        let h = 1e-5;
        for &s in &[-0.7, 0.0, 0.4, 1.3] {
            for d in 0..3 {
                let fd = (self.eval(s + h, d) - self.eval(s - h, d)) / (2.0 * h);
                let an = self.eval(s, d + 1);
                let scale = an.abs().max(fd.abs()).max(1.0);
                if (fd - an).abs() / scale > 1e-6 {
                    return false;
                }
            }
        }
        true
    }
}

impl FromStr for Profile1D {
    type Err = String;

    /// Textual form: `poly:c0,c1,...`, `const:c`, `exp:amp,rate`,
    /// `cosh:amp,rate`, `sinh:amp,rate`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (kind, args) = s
            .split_once(':')
            .ok_or_else(|| format!("profile {s:?} needs kind:args"))?;
        let nums: Vec<f64> = if args.trim().is_empty() {
            Vec::new()
        } else {
            args.split(',')
                .map(|a| a.trim().parse().map_err(|e| format!("{e} in {s:?}")))
                .collect::<Result<_, _>>()?
        };
        let two = |what: &str| -> Result<(f64, f64), String> {
            if nums.len() == 2 {
                Ok((nums[0], nums[1]))
            } else {
                Err(format!("{what} needs amp,rate"))
            }
        };
        let p = match kind {
            "poly" => Profile1D::Poly(nums),
            "const" => {
                if nums.len() != 1 {
                    return Err("const needs one value".into());
                }
                Profile1D::constant(nums[0])
            }
            "exp" => {
                let (amp, rate) = two("exp")?;
                Profile1D::Exp { amp, rate }
            }
            "cosh" => {
                let (amp, rate) = two("cosh")?;
                Profile1D::Cosh { amp, rate }
            }
            "sinh" => {
                let (amp, rate) = two("sinh")?;
                Profile1D::Sinh { amp, rate }
            }
            other => return Err(format!("unknown profile kind {other:?}")),
        };
        if !p.check_derivatives() {
            return Err(format!("profile {s:?} failed the derivative cross-check"));
        }
        Ok(p)
    }
}

/// The analytic data entering the CRMHD equilibrium relations: the stream
/// profile `Phi(psi)` and the Casimir profiles `a1, a2, a3`, plus the
/// electron beta.
#[derive(Clone, Debug)]
pub struct CrmhdProfile {
    pub phi: Profile1D,
    pub a1: Profile1D,
    pub a2: Profile1D,
    pub a3: Profile1D,
    pub beta_e: f64,
}

/// The analytic data of the RMHD dynamical-accessibility conditions:
/// streamfunction, magnetic flux, and Upsilon as functions of the labeling
/// field `u`.
#[derive(Clone, Debug)]
pub struct RmhdProfile {
    pub stream: Profile1D,
    pub mag: Profile1D,
    pub upsilon: Profile1D,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_eval() {
        let p: Profile1D = "poly:1,0,2".parse().unwrap();
        assert_eq!(p.eval(3.0, 0), 1.0 + 2.0 * 9.0);
        assert_eq!(p.eval(3.0, 1), 12.0);
        assert_eq!(p.eval(3.0, 2), 4.0);
        assert_eq!(p.eval(3.0, 3), 0.0);

        let c: Profile1D = "cosh:2,3".parse().unwrap();
        assert!((c.eval(0.5, 1) - 6.0 * (1.5f64).sinh()).abs() < 1e-12);

        assert!("poly".parse::<Profile1D>().is_err());
        assert!("wat:1".parse::<Profile1D>().is_err());
    }

    #[test]
    fn derivative_cross_check_passes_builtins() {
        for s in ["poly:0.5,-1,0,2", "exp:1,-2", "cosh:1,1", "sinh:0.3,2"] {
            let p: Profile1D = s.parse().unwrap();
            assert!(p.check_derivatives(), "{s}");
        }
    }
}
