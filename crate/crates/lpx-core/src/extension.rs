//! The extension 3-tensor `W_lambda^{mu nu}`, bracket-axiom validation,
//! basis transformation, constructors, and evaluation of the extension
//! bracket over a pluggable base algebra.

use crate::exactfield::{Matrix, Scalar};
use serde::{Deserialize, Serialize};

/// Errors from tensor construction and evaluation.
#[derive(Debug, thiserror::Error)]
pub enum ExtensionError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("tensor is not solvable: slice {0} is not nilpotent")]
    NotSolvable(usize),
    #[error("basis change is not invertible")]
    SingularBasis,
}

/// The 3-tensor of an n-tuple bracket extension.
///
/// Storage is a flat cube indexed `[lambda][mu][nu]`, all indices in
/// `0..dim()`. Solvable tensors have `dim() == n` and use 1-based paper
/// indices mapped to 0-based storage; semidirect tensors have
/// `dim() == n + 1` and expose the paper's `0..n` labeling directly, slot 0
/// being the appended identity.
#[derive(Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtensionTensor {
    n: usize,
    semidirect: bool,
    #[serde(rename = "W")]
    w: Vec<Vec<Vec<Scalar>>>,
}

/// An invertible change of basis with its exact inverse.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BasisChange {
    pub m: Matrix,
    pub minv: Matrix,
}

impl BasisChange {
    pub fn new(m: Matrix) -> Result<Self, ExtensionError> {
        let minv = m.inverse().ok_or(ExtensionError::SingularBasis)?;
        Ok(BasisChange { m, minv })
    }

    pub fn identity(dim: usize) -> Self {
        BasisChange {
            m: Matrix::identity(dim),
            minv: Matrix::identity(dim),
        }
    }

    pub fn inverse(&self) -> Self {
        BasisChange {
            m: self.minv.clone(),
            minv: self.m.clone(),
        }
    }

    /// `self` followed by `next` (matrix product `self.m * next.m`).
    pub fn then(&self, next: &BasisChange) -> Self {
        BasisChange {
            m: &self.m * &next.m,
            minv: &next.minv * &self.minv,
        }
    }
}

/// Per-axiom validation outcome; failures carry the first violating indices.
#[derive(Clone, Debug, Serialize)]
pub struct ValidationReport {
    /// `W[l][m][n] != W[l][n][m]` witness, if any.
    pub symmetry_violation: Option<(usize, usize, usize)>,
    /// Pair `(nu, sigma)` of non-commuting upper slices, if any.
    pub commutation_violation: Option<(usize, usize)>,
    /// Index tuple `(lambda, tau, mu, nu)` violating the tensorial Jacobi
    /// condition, if any.
    pub jacobi_violation: Option<(usize, usize, usize, usize)>,
    /// Set when a semidirect tensor's slot-0 slice is not the identity.
    pub semidirect_violation: bool,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.symmetry_violation.is_none()
            && self.commutation_violation.is_none()
            && self.jacobi_violation.is_none()
            && !self.semidirect_violation
    }
}

impl ExtensionTensor {
    /// All-zero cube.
    fn empty(n: usize, semidirect: bool) -> Self {
        let d = if semidirect { n + 1 } else { n };
        ExtensionTensor {
            n,
            semidirect,
            w: vec![vec![vec![Scalar::zero(); d]; d]; d],
        }
    }

    /// Order of the extension (count of solvable tuple slots).
    pub fn order(&self) -> usize {
        self.n
    }

    pub fn semidirect(&self) -> bool {
        self.semidirect
    }

    /// Storage dimension of each index axis.
    pub fn dim(&self) -> usize {
        if self.semidirect {
            self.n + 1
        } else {
            self.n
        }
    }

    pub fn get(&self, l: usize, m: usize, n: usize) -> &Scalar {
        &self.w[l][m][n]
    }

    pub fn set(&mut self, l: usize, m: usize, n: usize, v: Scalar) {
        self.w[l][m][n] = v;
    }

    /// Upper-index slice: `[w_up(nu)]_lambda^mu = W[lambda][mu][nu]`.
    pub fn w_up(&self, nu: usize) -> Matrix {
        let d = self.dim();
        Matrix::from_fn(d, d, |l, m| self.w[l][m][nu].clone())
    }

    /// Lower-index slice: `[w_low(lambda)]^{mu nu} = W[lambda][mu][nu]`.
    pub fn w_low(&self, lambda: usize) -> Matrix {
        let d = self.dim();
        Matrix::from_fn(d, d, |m, n| self.w[lambda][m][n].clone())
    }

    pub fn is_zero(&self) -> bool {
        self.w
            .iter()
            .flatten()
            .flatten()
            .all(Scalar::is_zero)
    }

    /// Abelian (all-zero) solvable tensor of order `n`.
    pub fn abelian(n: usize) -> Self {
        Self::empty(n, false)
    }

    /// Leibniz extension `W_lambda^{mu nu} = delta_lambda^{mu+nu}` in paper
    /// indices (1-based solvable, 0-based semidirect).
    pub fn leibniz(n: usize, semidirect: bool) -> Self {
        let mut t = Self::empty(n, semidirect);
        let d = t.dim();
        for l in 0..d {
            for m in 0..d {
                for nu in 0..d {
                    let delta = if semidirect {
                        l == m + nu
                    } else {
                        // paper indices are storage + 1
                        l + 1 == m + nu + 2
                    };
                    if delta {
                        t.w[l][m][nu] = Scalar::one();
                    }
                }
            }
        }
        t
    }

    /// The compressible reduced MHD tensor (order 3, semidirect) with exact
    /// electron beta.
    pub fn crmhd(beta_e: Scalar) -> Self {
        let mut t = Self::empty(3, true);
        for l in 0..4 {
            t.w[l][l][0] = Scalar::one();
            t.w[l][0][l] = Scalar::one();
        }
        // W^(1): rows lambda, cols mu
        t.w[1][0][1] = Scalar::one();
        t.w[1][1][0] = Scalar::one();
        t.w[3][2][1] = -&beta_e;
        t.w[3][1][2] = -&beta_e;
        // W^(2)
        t.w[2][0][2] = Scalar::one();
        t.w[2][2][0] = Scalar::one();
        // W^(3)
        t.w[3][0][3] = Scalar::one();
        t.w[3][3][0] = Scalar::one();
        t
    }

    /// Low-beta reduced MHD: the pure semidirect 2-tuple with one advected
    /// flux slot.
    pub fn rmhd() -> Self {
        Self::abelian(1).append_semisimple().unwrap()
    }

    /// Hazeltine's three-field model of MHD (vorticity, flux, density),
    /// written as a semidirect tensor of order 2.
    pub fn three_field_mhd() -> Self {
        let mut t = Self::empty(2, true);
        // Paper slices (1-based): W^(1) = I, W^(2), W^(3); storage is 0-based.
        for l in 0..3 {
            t.w[l][l][0] = Scalar::one();
            t.w[l][0][l] = Scalar::one();
        }
        // W^(2): rows 1..3 (paper) entries (2,1) and (2,3)
        t.w[1][0][1] = Scalar::one();
        t.w[1][1][0] = Scalar::one();
        t.w[1][2][1] = Scalar::one();
        t.w[1][1][2] = Scalar::one();
        // W^(3): entries (2,2) and (3,1), (3,3)
        t.w[2][0][2] = Scalar::one();
        t.w[2][2][0] = Scalar::one();
        t.w[2][2][2] = Scalar::one();
        t
    }

    /// Validates upper symmetry, pairwise commutation of the upper slices,
    /// the tensorial Jacobi condition, and (for semidirect tensors) the
    /// identity slot. Failures are report entries, never errors.
    pub fn validate(&self) -> ValidationReport {
        let d = self.dim();
        let mut report = ValidationReport {
            symmetry_violation: None,
            commutation_violation: None,
            jacobi_violation: None,
            semidirect_violation: false,
        };
        'sym: for l in 0..d {
            for m in 0..d {
                for n in 0..d {
                    if self.w[l][m][n] != self.w[l][n][m] {
                        report.symmetry_violation = Some((l, m, n));
                        break 'sym;
                    }
                }
            }
        }
        let ups: Vec<Matrix> = (0..d).map(|nu| self.w_up(nu)).collect();
        'comm: for nu in 0..d {
            for sg in nu + 1..d {
                if !ups[nu].commutes_with(&ups[sg]) {
                    report.commutation_violation = Some((nu, sg));
                    break 'comm;
                }
            }
        }
        // W_lambda^{sigma tau} W_sigma^{mu nu} = W_lambda^{sigma nu} W_sigma^{tau mu}
        'jac: for l in 0..d {
            for t in 0..d {
                for m in 0..d {
                    for n in 0..d {
                        let mut lhs = Scalar::zero();
                        let mut rhs = Scalar::zero();
                        for s in 0..d {
                            if !self.w[l][s][t].is_zero() {
                                lhs += &(&self.w[l][s][t] * &self.w[s][m][n]);
                            }
                            if !self.w[l][s][n].is_zero() {
                                rhs += &(&self.w[l][s][n] * &self.w[s][t][m]);
                            }
                        }
                        if lhs != rhs {
                            report.jacobi_violation = Some((l, t, m, n));
                            break 'jac;
                        }
                    }
                }
            }
        }
        if self.semidirect && ups[0] != Matrix::identity(d) {
            report.semidirect_violation = true;
        }
        report
    }

    /// Basis transformation
    /// `W'_b^{ag} = (M^-1)_b^l W_l^{mn} M_m^a M_n^g`.
    pub fn transform(&self, b: &BasisChange) -> Result<ExtensionTensor, ExtensionError> {
        let d = self.dim();
        if b.m.rows() != d || b.m.cols() != d {
            return Err(ExtensionError::DimensionMismatch {
                expected: d,
                got: b.m.rows(),
            });
        }
        let mut out = ExtensionTensor {
            n: self.n,
            semidirect: self.semidirect,
            w: vec![vec![vec![Scalar::zero(); d]; d]; d],
        };
        // Contract one index at a time to keep this O(d^4).
        let mut t1 = vec![vec![vec![Scalar::zero(); d]; d]; d];
        for bb in 0..d {
            for m in 0..d {
                for n in 0..d {
                    let mut acc = Scalar::zero();
                    for l in 0..d {
                        if !self.w[l][m][n].is_zero() && !b.minv[(bb, l)].is_zero() {
                            acc += &(&b.minv[(bb, l)] * &self.w[l][m][n]);
                        }
                    }
                    t1[bb][m][n] = acc;
                }
            }
        }
        let mut t2 = vec![vec![vec![Scalar::zero(); d]; d]; d];
        for bb in 0..d {
            for a in 0..d {
                for n in 0..d {
                    let mut acc = Scalar::zero();
                    for m in 0..d {
                        if !t1[bb][m][n].is_zero() && !b.m[(m, a)].is_zero() {
                            acc += &(&t1[bb][m][n] * &b.m[(m, a)]);
                        }
                    }
                    t2[bb][a][n] = acc;
                }
            }
        }
        for bb in 0..d {
            for a in 0..d {
                for g in 0..d {
                    let mut acc = Scalar::zero();
                    for n in 0..d {
                        if !t2[bb][a][n].is_zero() && !b.m[(n, g)].is_zero() {
                            acc += &(&t2[bb][a][n] * &b.m[(n, g)]);
                        }
                    }
                    out.w[bb][a][g] = acc;
                }
            }
        }
        // The semidirect labeling is only kept when the identity slot
        // survives the transformation.
        if out.semidirect && out.w_up(0) != Matrix::identity(d) {
            out = out.as_plain();
        }
        Ok(out)
    }

    /// Block direct sum. The result is stored as a plain (solvable-labeled)
    /// tensor of the combined dimension unless one side is empty.
    pub fn direct_sum(&self, other: &ExtensionTensor) -> ExtensionTensor {
        if other.dim() == 0 {
            return self.clone();
        }
        if self.dim() == 0 {
            return other.clone();
        }
        let d1 = self.dim();
        let d = d1 + other.dim();
        let mut t = ExtensionTensor {
            n: d,
            semidirect: false,
            w: vec![vec![vec![Scalar::zero(); d]; d]; d],
        };
        for l in 0..d1 {
            for m in 0..d1 {
                for n in 0..d1 {
                    t.w[l][m][n] = self.w[l][m][n].clone();
                }
            }
        }
        for l in 0..other.dim() {
            for m in 0..other.dim() {
                for n in 0..other.dim() {
                    t.w[d1 + l][d1 + m][d1 + n] = other.w[l][m][n].clone();
                }
            }
        }
        t
    }

    /// Appends the identity slot `W^(0) = I` to a solvable tensor, producing
    /// the semidirect extension of one higher storage dimension.
    pub fn append_semisimple(&self) -> Result<ExtensionTensor, ExtensionError> {
        let d = self.dim();
        for nu in 0..d {
            if !self.w_up(nu).is_nilpotent() {
                return Err(ExtensionError::NotSolvable(nu));
            }
        }
        let mut t = ExtensionTensor {
            n: d,
            semidirect: true,
            w: vec![vec![vec![Scalar::zero(); d + 1]; d + 1]; d + 1],
        };
        for l in 0..=d {
            t.w[l][l][0] = Scalar::one();
            t.w[l][0][l] = Scalar::one();
        }
        for l in 0..d {
            for m in 0..d {
                for n in 0..d {
                    if !self.w[l][m][n].is_zero() {
                        t.w[l + 1][m + 1][n + 1] = self.w[l][m][n].clone();
                    }
                }
            }
        }
        Ok(t)
    }

    /// Reinterprets the cube with the semidirect flag cleared (labels shift
    /// to the solvable convention); entries are unchanged.
    pub fn as_plain(&self) -> ExtensionTensor {
        ExtensionTensor {
            n: self.dim(),
            semidirect: false,
            w: self.w.clone(),
        }
    }

    /// Extracts the solvable sub-cube (slots `1..` of a semidirect tensor).
    pub fn solvable_part(&self) -> ExtensionTensor {
        assert!(self.semidirect);
        let d = self.dim();
        let mut t = ExtensionTensor::empty(d - 1, false);
        for l in 1..d {
            for m in 1..d {
                for n in 1..d {
                    t.w[l - 1][m - 1][n - 1] = self.w[l][m][n].clone();
                }
            }
        }
        t
    }

    /// Extracts the sub-cube on a sorted list of storage slots.
    pub fn restrict(&self, slots: &[usize], semidirect: bool) -> ExtensionTensor {
        let k = slots.len();
        let n = if semidirect { k - 1 } else { k };
        let mut t = ExtensionTensor {
            n,
            semidirect,
            w: vec![vec![vec![Scalar::zero(); k]; k]; k],
        };
        for (li, &l) in slots.iter().enumerate() {
            for (mi, &m) in slots.iter().enumerate() {
                for (ni, &nu) in slots.iter().enumerate() {
                    t.w[li][mi][ni] = self.w[l][m][nu].clone();
                }
            }
        }
        t
    }

    /// Evaluates the extension bracket
    /// `[a, b]_lambda = W_lambda^{mu nu} inner(a_mu, b_nu)` over any base
    /// algebra supplied as a vector-space interface plus an inner bracket.
    pub fn bracket_eval<E: Clone>(
        &self,
        a: &[E],
        b: &[E],
        space: &dyn TupleSpace<Elem = E>,
        inner: &dyn Fn(&E, &E) -> E,
    ) -> Result<Vec<E>, ExtensionError> {
        let d = self.dim();
        if a.len() != d || b.len() != d {
            return Err(ExtensionError::DimensionMismatch {
                expected: d,
                got: a.len().max(b.len()),
            });
        }
        let mut out = Vec::with_capacity(d);
        for l in 0..d {
            let mut acc = space.zero();
            for m in 0..d {
                for n in 0..d {
                    let w = &self.w[l][m][n];
                    if !w.is_zero() {
                        let term = space.scale(w, &inner(&a[m], &b[n]));
                        acc = space.add(&acc, &term);
                    }
                }
            }
            out.push(acc);
        }
        Ok(out)
    }
}

/// Vector-space operations of a base algebra, used by
/// [`ExtensionTensor::bracket_eval`].
pub trait TupleSpace {
    type Elem: Clone;
    fn zero(&self) -> Self::Elem;
    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn scale(&self, c: &Scalar, a: &Self::Elem) -> Self::Elem;
}

/// so(3) with exact rational coordinates; the inner bracket is the cross
/// product.
pub struct RationalSo3;

impl TupleSpace for RationalSo3 {
    type Elem = [Scalar; 3];

    fn zero(&self) -> [Scalar; 3] {
        [Scalar::zero(), Scalar::zero(), Scalar::zero()]
    }

    fn add(&self, a: &[Scalar; 3], b: &[Scalar; 3]) -> [Scalar; 3] {
        [&a[0] + &b[0], &a[1] + &b[1], &a[2] + &b[2]]
    }

    fn scale(&self, c: &Scalar, a: &[Scalar; 3]) -> [Scalar; 3] {
        [c * &a[0], c * &a[1], c * &a[2]]
    }
}

impl RationalSo3 {
    pub fn cross(a: &[Scalar; 3], b: &[Scalar; 3]) -> [Scalar; 3] {
        [
            &(&a[1] * &b[2]) - &(&a[2] * &b[1]),
            &(&a[2] * &b[0]) - &(&a[0] * &b[2]),
            &(&a[0] * &b[1]) - &(&a[1] * &b[0]),
        ]
    }
}

impl std::fmt::Debug for ExtensionTensor {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(
            f,
            "ExtensionTensor(n={}, semidirect={})",
            self.n, self.semidirect
        )?;
        for nu in 0..self.dim() {
            writeln!(f, "W^({nu}) = {:?}", self.w_up(nu))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn beta_half() -> Scalar {
        Scalar::from_ratio(1, 2)
    }

    #[test]
    fn crmhd_passes_all_axioms() {
        let t = ExtensionTensor::crmhd(beta_half());
        let report = t.validate();
        assert!(report.passed(), "{report:?}");
    }

    #[test]
    fn abelian_passes() {
        assert!(ExtensionTensor::abelian(5).validate().passed());
    }

    #[test]
    fn constructed_asymmetry_detected() {
        let mut t = ExtensionTensor::abelian(2);
        t.set(1, 0, 0, Scalar::one());
        assert!(t.validate().passed());
        // Now break the symmetry only.
        t.set(1, 0, 1, Scalar::one());
        let report = t.validate();
        assert_eq!(report.symmetry_violation, Some((1, 0, 1)));
    }

    #[test]
    fn leibniz_matches_paper_matrices() {
        let t = ExtensionTensor::leibniz(2, false);
        assert_eq!(t.w_up(0), Matrix::from_i64(&[&[0, 0], &[1, 0]]));
        assert_eq!(t.w_up(1), Matrix::zero(2, 2));
        assert!(ExtensionTensor::leibniz(1, false).is_zero());

        // Semidirect n=3: W^(nu) = N^nu with N the 4x4 shift, W^(0) = I.
        let t = ExtensionTensor::leibniz(3, true);
        let shift = Matrix::from_i64(&[
            &[0, 0, 0, 0],
            &[1, 0, 0, 0],
            &[0, 1, 0, 0],
            &[0, 0, 1, 0],
        ]);
        assert_eq!(t.w_up(0), Matrix::identity(4));
        assert_eq!(t.w_up(1), shift);
        assert_eq!(t.w_up(2), &shift * &shift);
        assert_eq!(t.w_up(3), &(&shift * &shift) * &shift);
    }

    #[test]
    fn leibniz_validates_up_to_12() {
        for n in 1..=12 {
            assert!(ExtensionTensor::leibniz(n, false).validate().passed());
        }
        for n in 1..=11 {
            assert!(ExtensionTensor::leibniz(n, true).validate().passed());
        }
    }

    #[test]
    fn rmhd_from_append() {
        let t = ExtensionTensor::rmhd();
        assert!(t.semidirect());
        assert_eq!(t.w_up(0), Matrix::identity(2));
        assert_eq!(t.w_up(1), Matrix::from_i64(&[&[0, 0], &[1, 0]]));
        assert!(t.validate().passed());
    }

    #[test]
    fn append_trivial_identity() {
        let t = ExtensionTensor::abelian(0).append_semisimple().unwrap();
        assert_eq!(t.dim(), 1);
        assert!(t.get(0, 0, 0).is_one());
    }

    #[test]
    fn append_rejects_non_solvable() {
        let t = ExtensionTensor::rmhd().as_plain();
        assert!(matches!(
            t.append_semisimple(),
            Err(ExtensionError::NotSolvable(0))
        ));
    }

    #[test]
    fn direct_sum_patterns() {
        let sum = ExtensionTensor::leibniz(2, false).direct_sum(&ExtensionTensor::abelian(1));
        assert!(sum.validate().passed());
        assert_eq!(sum.dim(), 3);
        assert!(sum.get(1, 0, 0).is_one());

        let ab2 = ExtensionTensor::abelian(1).direct_sum(&ExtensionTensor::abelian(1));
        assert_eq!(ab2, ExtensionTensor::abelian(2));

        let a = ExtensionTensor::leibniz(3, false);
        assert_eq!(a.direct_sum(&ExtensionTensor::abelian(0)), a);
    }

    #[test]
    fn transform_three_field_to_blocks() {
        // The transformation of the three-field MHD model produces the
        // printed block-diagonal slices.
        let t = ExtensionTensor::three_field_mhd();
        assert!(t.validate().passed());
        let m = Matrix::from_i64(&[&[0, 0, 1], &[0, 1, 0], &[1, 0, -1]]);
        let b = BasisChange::new(m).unwrap();
        let out = t.transform(&b).unwrap();
        assert!(out.validate().passed());
        assert_eq!(
            out.w_up(0),
            Matrix::from_i64(&[&[1, 0, 0], &[0, 1, 0], &[0, 0, 0]])
        );
        assert_eq!(
            out.w_up(1),
            Matrix::from_i64(&[&[0, 0, 0], &[1, 0, 0], &[0, 0, 0]])
        );
        assert_eq!(
            out.w_up(2),
            Matrix::from_i64(&[&[0, 0, 0], &[0, 0, 0], &[0, 0, 1]])
        );
    }

    #[test]
    fn transform_identity_and_roundtrip() {
        let t = ExtensionTensor::leibniz(3, false);
        let id = BasisChange::identity(3);
        assert_eq!(t.transform(&id).unwrap(), t);

        let m = Matrix::from_i64(&[&[1, 2, 0], &[0, 1, -1], &[2, 0, 1]]);
        let b = BasisChange::new(m).unwrap();
        let round = t.transform(&b).unwrap().transform(&b.inverse()).unwrap();
        assert_eq!(round, t);
    }

    #[test]
    fn transform_preserves_axioms() {
        let t = ExtensionTensor::crmhd(beta_half());
        let m = Matrix::from_i64(&[
            &[1, 0, 2, 0],
            &[-1, 1, 0, 0],
            &[0, 2, 1, 0],
            &[1, 0, 0, 1],
        ]);
        let out = t.transform(&BasisChange::new(m).unwrap()).unwrap();
        let report = out.validate();
        assert!(report.symmetry_violation.is_none());
        assert!(report.commutation_violation.is_none());
        assert!(report.jacobi_violation.is_none());
    }

    #[test]
    fn bracket_eval_rmhd_so3() {
        let t = ExtensionTensor::rmhd();
        let space = RationalSo3;
        let x = [Scalar::one(), Scalar::zero(), Scalar::zero()];
        let y = [Scalar::zero(), Scalar::one(), Scalar::zero()];
        let z = [Scalar::zero(), Scalar::zero(), Scalar::one()];
        let zero = space.zero();
        let a = [x.clone(), zero.clone()];
        let b = [y.clone(), zero.clone()];
        let out = t
            .bracket_eval(&a, &b, &space, &RationalSo3::cross)
            .unwrap();
        assert_eq!(out[0], z);
        assert_eq!(out[1], zero);
    }

    #[test]
    fn bracket_eval_abelian_zero() {
        let t = ExtensionTensor::abelian(2);
        let space = RationalSo3;
        let v = [Scalar::one(), Scalar::from_int(2), Scalar::from_int(3)];
        let a = [v.clone(), v.clone()];
        let out = t
            .bracket_eval(&a, &a, &space, &RationalSo3::cross)
            .unwrap();
        for c in out {
            assert_eq!(c, space.zero());
        }
    }

    #[test]
    fn jacobi_cyclic_sum_vanishes_exactly() {
        // Cyclic Jacobi sum under the CRMHD tensor with exact so(3) tuples.
        let t = ExtensionTensor::crmhd(beta_half());
        let space = RationalSo3;
        let mk = |v: [i64; 3]| {
            [
                Scalar::from_int(v[0]),
                Scalar::from_int(v[1]),
                Scalar::from_int(v[2]),
            ]
        };
        let tuples = [
            [mk([1, 2, 0]), mk([0, 1, 1]), mk([2, 0, 1]), mk([1, 1, 1])],
            [mk([0, 3, 1]), mk([1, 0, 2]), mk([0, 1, 0]), mk([2, 1, 0])],
            [mk([1, 1, 2]), mk([2, 1, 1]), mk([1, 0, 0]), mk([0, 0, 3])],
        ];
        let br = |a: &[[Scalar; 3]], b: &[[Scalar; 3]]| {
            t.bracket_eval(a, b, &RationalSo3, &RationalSo3::cross)
                .unwrap()
        };
        let [a, b, c] = tuples;
        let mut acc = br(&br(&a, &b), &c);
        for term in [br(&br(&b, &c), &a), br(&br(&c, &a), &b)] {
            acc = acc
                .iter()
                .zip(&term)
                .map(|(x, y)| space.add(x, y))
                .collect();
        }
        for comp in acc {
            assert_eq!(comp, space.zero());
        }
    }

    #[test]
    fn json_roundtrip_bit_exact() {
        let t = ExtensionTensor::crmhd(beta_half());
        let json = serde_json::to_string(&t).unwrap();
        let back: ExtensionTensor = serde_json::from_str(&json).unwrap();
        assert_eq!(back, t);
        assert_eq!(serde_json::to_string(&back).unwrap(), json);
        assert!(json.contains("\"n\":3"));
        assert!(json.contains("\"semidirect\":true"));
        assert!(json.contains("-1/2"));
    }
}
