//! Dense exact matrices over Q(i) with elimination-based kernels.

use super::scalar::Scalar;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::ops::{Add, Mul, Sub};

/// Row-major dense matrix of [`Scalar`] entries.
#[derive(Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    entries: Vec<Scalar>,
}

impl Matrix {
    pub fn zero(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            entries: vec![Scalar::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zero(n, n);
        for i in 0..n {
            m[(i, i)] = Scalar::one();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Scalar) -> Self {
        let mut entries = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                entries.push(f(r, c));
            }
        }
        Matrix {
            rows,
            cols,
            entries,
        }
    }

    /// Small-integer literal, handy in tests: `Matrix::from_i64(&[&[0, 1], &[0, 0]])`.
    pub fn from_i64(rows: &[&[i64]]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        Matrix::from_fn(r, c, |i, j| Scalar::from_int(rows[i][j]))
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(Scalar::is_zero)
    }

    pub fn transpose(&self) -> Matrix {
        Matrix::from_fn(self.cols, self.rows, |r, c| self[(c, r)].clone())
    }

    pub fn scale(&self, s: &Scalar) -> Matrix {
        Matrix::from_fn(self.rows, self.cols, |r, c| &self[(r, c)] * s)
    }

    pub fn trace(&self) -> Scalar {
        assert!(self.is_square());
        let mut t = Scalar::zero();
        for i in 0..self.rows {
            t += &self[(i, i)];
        }
        t
    }

    pub fn column(&self, c: usize) -> Vec<Scalar> {
        (0..self.rows).map(|r| self[(r, c)].clone()).collect()
    }

    pub fn from_columns(cols: &[Vec<Scalar>]) -> Matrix {
        let n = cols.first().map_or(0, Vec::len);
        Matrix::from_fn(n, cols.len(), |r, c| cols[c][r].clone())
    }

    pub fn is_symmetric(&self) -> bool {
        self.is_square()
            && (0..self.rows).all(|r| (0..r).all(|c| self[(r, c)] == self[(c, r)]))
    }

    pub fn commutes_with(&self, other: &Matrix) -> bool {
        self * other == other * self
    }

    pub fn is_nilpotent(&self) -> bool {
        assert!(self.is_square());
        let mut p = self.clone();
        for _ in 0..self.rows {
            if p.is_zero() {
                return true;
            }
            p = &p * self;
        }
        p.is_zero()
    }

    pub fn mul_vec(&self, v: &[Scalar]) -> Vec<Scalar> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|r| {
                let mut acc = Scalar::zero();
                for c in 0..self.cols {
                    if !self[(r, c)].is_zero() && !v[c].is_zero() {
                        acc += &(&self[(r, c)] * &v[c]);
                    }
                }
                acc
            })
            .collect()
    }

    /// Reduced row-echelon form together with the rank and pivot columns.
    pub fn rref(&self) -> (Matrix, usize, Vec<usize>) {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut row = 0;
        for col in 0..m.cols {
            if row == m.rows {
                break;
            }
            let Some(p) = (row..m.rows).find(|&r| !m[(r, col)].is_zero()) else {
                continue;
            };
            m.swap_rows(row, p);
            let inv = m[(row, col)].inv().unwrap();
            for c in col..m.cols {
                let v = &m[(row, c)] * &inv;
                m[(row, c)] = v;
            }
            for r in 0..m.rows {
                if r != row && !m[(r, col)].is_zero() {
                    let factor = m[(r, col)].clone();
                    for c in col..m.cols {
                        let v = &m[(r, c)] - &(&factor * &m[(row, c)]);
                        m[(r, c)] = v;
                    }
                }
            }
            pivots.push(col);
            row += 1;
        }
        (m, row, pivots)
    }

    pub fn rank(&self) -> usize {
        self.rref().1
    }

    /// Basis of the right null space, in RREF-canonical order.
    pub fn null_space(&self) -> Vec<Vec<Scalar>> {
        let (r, rank, pivots) = self.rref();
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        let mut basis = Vec::with_capacity(self.cols - rank);
        for &f in &free {
            let mut v = vec![Scalar::zero(); self.cols];
            v[f] = Scalar::one();
            for (i, &p) in pivots.iter().enumerate() {
                v[p] = -&r[(i, f)];
            }
            basis.push(v);
        }
        basis
    }

    /// Exact inverse; `None` when singular.
    pub fn inverse(&self) -> Option<Matrix> {
        assert!(self.is_square());
        let n = self.rows;
        let mut aug = Matrix::zero(n, 2 * n);
        for r in 0..n {
            for c in 0..n {
                aug[(r, c)] = self[(r, c)].clone();
            }
            aug[(r, n + r)] = Scalar::one();
        }
        let (red, _, pivots) = aug.rref();
        if pivots.len() < n || pivots[..n] != (0..n).collect::<Vec<_>>()[..] {
            return None;
        }
        Some(Matrix::from_fn(n, n, |r, c| red[(r, n + c)].clone()))
    }

    pub fn determinant(&self) -> Scalar {
        assert!(self.is_square());
        // Fraction-free is unnecessary at this scale; plain elimination with
        // pivot bookkeeping is exact over the field.
        let n = self.rows;
        let mut m = self.clone();
        let mut det = Scalar::one();
        for col in 0..n {
            let Some(p) = (col..n).find(|&r| !m[(r, col)].is_zero()) else {
                return Scalar::zero();
            };
            if p != col {
                m.swap_rows(col, p);
                det = -det;
            }
            det = &det * &m[(col, col)];
            let inv = m[(col, col)].inv().unwrap();
            for r in col + 1..n {
                if m[(r, col)].is_zero() {
                    continue;
                }
                let factor = &m[(r, col)] * &inv;
                for c in col..n {
                    let v = &m[(r, c)] - &(&factor * &m[(col, c)]);
                    m[(r, c)] = v;
                }
            }
        }
        det
    }

    /// Moore-Penrose pseudoinverse via exact rank factorization:
    /// `A = F G`, `A+ = G* (G G*)^-1 (F* F)^-1 F*` with `*` the conjugate
    /// transpose. For invertible `A` this is `A^-1`; the zero matrix maps to
    /// itself.
    pub fn pseudoinverse(&self) -> Matrix {
        let (red, rank, pivots) = self.rref();
        if rank == 0 {
            return Matrix::zero(self.cols, self.rows);
        }
        if self.is_square() && rank == self.rows {
            return self.inverse().unwrap();
        }
        // F: pivot columns of A (rows x rank); G: first `rank` rows of RREF.
        let f = Matrix::from_fn(self.rows, rank, |r, k| self[(r, pivots[k])].clone());
        let g = Matrix::from_fn(rank, self.cols, |k, c| red[(k, c)].clone());
        let fs = f.conj_transpose();
        let gs = g.conj_transpose();
        let ggs_inv = (&g * &gs).inverse().expect("G G* invertible by construction");
        let fsf_inv = (&fs * &f).inverse().expect("F* F invertible by construction");
        &(&(&gs * &ggs_inv) * &fsf_inv) * &fs
    }

    pub fn conj_transpose(&self) -> Matrix {
        Matrix::from_fn(self.cols, self.rows, |r, c| self[(c, r)].conj())
    }

    /// Coefficients of the characteristic polynomial `det(xI - A)`,
    /// lowest-degree first, computed by the Faddeev-LeVerrier recursion.
    pub fn char_poly(&self) -> Vec<Scalar> {
        assert!(self.is_square());
        let n = self.rows;
        let mut coeffs = vec![Scalar::zero(); n + 1];
        coeffs[n] = Scalar::one();
        let mut m = Matrix::identity(n);
        for k in 1..=n {
            m = self * &m;
            let c = -(&m.trace() / &Scalar::from_int(k as i64));
            coeffs[n - k] = c.clone();
            for i in 0..n {
                m[(i, i)] = &m[(i, i)] + &c;
            }
        }
        coeffs
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for c in 0..self.cols {
            self.entries.swap(a * self.cols + c, b * self.cols + c);
        }
    }

    /// Deterministic total order on matrices of equal shape (entry-lex).
    pub fn lex_cmp(&self, other: &Matrix) -> std::cmp::Ordering {
        debug_assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        for (a, b) in self.entries.iter().zip(&other.entries) {
            let o = a.lex_cmp(b);
            if o != std::cmp::Ordering::Equal {
                return o;
            }
        }
        std::cmp::Ordering::Equal
    }
}

impl std::ops::Index<(usize, usize)> for Matrix {
    type Output = Scalar;
    fn index(&self, (r, c): (usize, usize)) -> &Scalar {
        &self.entries[r * self.cols + c]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut Scalar {
        &mut self.entries[r * self.cols + c]
    }
}

impl Add for &Matrix {
    type Output = Matrix;
    fn add(self, rhs: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        Matrix::from_fn(self.rows, self.cols, |r, c| &self[(r, c)] + &rhs[(r, c)])
    }
}

impl Sub for &Matrix {
    type Output = Matrix;
    fn sub(self, rhs: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        Matrix::from_fn(self.rows, self.cols, |r, c| &self[(r, c)] - &rhs[(r, c)])
    }
}

impl Mul for &Matrix {
    type Output = Matrix;
    fn mul(self, rhs: &Matrix) -> Matrix {
        assert_eq!(self.cols, rhs.rows);
        Matrix::from_fn(self.rows, rhs.cols, |r, c| {
            let mut acc = Scalar::zero();
            for k in 0..self.cols {
                if !self[(r, k)].is_zero() && !rhs[(k, c)].is_zero() {
                    acc += &(&self[(r, k)] * &rhs[(k, c)]);
                }
            }
            acc
        })
    }
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            let row: Vec<String> = (0..self.cols).map(|c| self[(r, c)].to_string()).collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        write!(f, "]")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rref_identity_and_nilpotent() {
        let (r, rank, piv) = Matrix::identity(3).rref();
        assert_eq!(r, Matrix::identity(3));
        assert_eq!(rank, 3);
        assert_eq!(piv, vec![0, 1, 2]);

        let n = Matrix::from_i64(&[&[0, 1], &[0, 0]]);
        let (r, rank, _) = n.rref();
        assert_eq!(r, n);
        assert_eq!(rank, 1);
    }

    #[test]
    fn rref_gaussian_rational() {
        // [[1, i], [i, -1]] row-reduces to [[1, i], [0, 0]]: the rows are
        // proportional over Q(i).
        let m = Matrix::from_fn(2, 2, |r, c| match (r, c) {
            (0, 0) => Scalar::one(),
            (0, 1) => Scalar::i(),
            (1, 0) => Scalar::i(),
            (1, 1) => Scalar::from_int(-1),
            _ => unreachable!(),
        });
        let (r, rank, piv) = m.rref();
        assert_eq!(rank, 1);
        assert_eq!(piv, vec![0]);
        assert_eq!(r[(0, 0)], Scalar::one());
        assert_eq!(r[(0, 1)], Scalar::i());
        assert!(r[(1, 0)].is_zero() && r[(1, 1)].is_zero());
    }

    #[test]
    fn pseudoinverse_printed_example() {
        // This symmetric permutation-like matrix is its own pseudoinverse.
        let a = Matrix::from_i64(&[&[0, 0, 1], &[0, 0, 0], &[1, 0, 0]]);
        assert_eq!(a.pseudoinverse(), a);

        let b = Matrix::from_i64(&[&[0, -1], &[-1, 0]]);
        assert_eq!(b.pseudoinverse(), b);

        let z = Matrix::zero(1, 1);
        assert_eq!(z.pseudoinverse(), z);
    }

    #[test]
    fn pseudoinverse_penrose_identities() {
        let cases = [
            Matrix::from_i64(&[&[1, 2], &[2, 4]]),
            Matrix::from_i64(&[&[0, 0, 1], &[0, 0, 0], &[1, 0, 0]]),
            Matrix::from_i64(&[&[1, 1, 0], &[1, 1, 0], &[0, 0, 5]]),
            Matrix::from_i64(&[&[3]]),
            Matrix::zero(3, 3),
        ];
        for a in cases {
            let p = a.pseudoinverse();
            assert_eq!(&(&a * &p) * &a, a, "A A+ A = A");
            assert_eq!(&(&p * &a) * &p, p, "A+ A A+ = A+");
            if a.is_symmetric() {
                assert!(p.is_symmetric(), "A+ symmetric for symmetric A");
                let proj = &a * &p;
                assert_eq!(&proj * &proj, proj, "P^2 = P");
            }
        }
    }

    #[test]
    fn inverse_and_det() {
        let m = Matrix::from_i64(&[&[2, 1], &[1, 1]]);
        let inv = m.inverse().unwrap();
        assert_eq!(&m * &inv, Matrix::identity(2));
        assert_eq!(m.determinant(), Scalar::one());
        assert!(Matrix::from_i64(&[&[1, 2], &[2, 4]]).inverse().is_none());
    }

    #[test]
    fn char_poly_faddeev() {
        // diag(1, 2): x^2 - 3x + 2
        let m = Matrix::from_i64(&[&[1, 0], &[0, 2]]);
        let cp = m.char_poly();
        assert_eq!(
            cp,
            vec![Scalar::from_int(2), Scalar::from_int(-3), Scalar::one()]
        );
    }
}
