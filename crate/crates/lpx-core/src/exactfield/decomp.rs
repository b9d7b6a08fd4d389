//! Structural decompositions of commuting families: simultaneous block
//! diagonalization by degenerate eigenvalue, and common lower
//! triangularization of commuting nilpotents through the joint-kernel flag.

use super::matrix::Matrix;
use super::roots::roots_in_qi;
use super::scalar::Scalar;
use super::FieldError;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

/// Canonical (row-reduced) basis of the column span of `vectors`.
fn canonical_basis(vectors: &[Vec<Scalar>], dim: usize) -> Vec<Vec<Scalar>> {
    if vectors.is_empty() {
        return Vec::new();
    }
    let rows = Matrix::from_fn(vectors.len(), dim, |r, c| vectors[r][c].clone());
    let (red, rank, _) = rows.rref();
    (0..rank)
        .map(|r| (0..dim).map(|c| red[(r, c)].clone()).collect())
        .collect()
}

fn pivot_of(v: &[Scalar]) -> usize {
    v.iter().position(|x| !x.is_zero()).unwrap()
}

/// Matrix whose kernel (as row constraints) is exactly the span of `basis`.
fn annihilator_rows(basis: &[Vec<Scalar>], dim: usize) -> Matrix {
    if basis.is_empty() {
        return Matrix::identity(dim);
    }
    let b = Matrix::from_fn(dim, basis.len(), |r, c| basis[c][r].clone());
    let left = b.transpose().null_space();
    Matrix::from_fn(left.len(), dim, |r, c| left[r][c].clone())
}

/// Simultaneous block diagonalization of pairwise-commuting matrices whose
/// spectra lie in Q(i).
///
/// Returns an invertible `M` and the block sizes such that `M^-1 A M` is
/// block diagonal for every input, each block carrying a single (degenerate)
/// eigenvalue per input matrix. Blocks are deterministically ordered by
/// (size descending, lexicographic per-matrix eigenvalue tuple, lexicographic
/// entries).
pub fn simultaneous_block_diagonalize(
    ws: &[Matrix],
    seed: u64,
) -> Result<(Matrix, Vec<usize>), FieldError> {
    assert!(!ws.is_empty());
    let n = ws[0].rows();
    for w in ws {
        assert!(w.is_square() && w.rows() == n, "inputs must share a size");
    }
    for (i, a) in ws.iter().enumerate() {
        for b in &ws[i + 1..] {
            if !a.commutes_with(b) {
                return Err(FieldError::NonCommuting);
            }
        }
    }
    for w in ws {
        if roots_in_qi(&w.char_poly()).is_none() {
            return Err(FieldError::IrrationalSpectrum);
        }
    }

    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    for attempt in 0..8u32 {
        let range = 2 + 2 * attempt as i64;
        let coeffs: Vec<i64> = (0..ws.len()).map(|_| rng.gen_range(-range..=range)).collect();
        let mut a = Matrix::zero(n, n);
        for (w, &c) in ws.iter().zip(&coeffs) {
            a = &a + &w.scale(&Scalar::from_int(c));
        }
        let Some(eigs) = roots_in_qi(&a.char_poly()) else {
            continue;
        };
        // Generalized eigenspaces of the combination.
        let mut spaces: Vec<Vec<Vec<Scalar>>> = Vec::new();
        for (lambda, _) in &eigs {
            let mut shifted = a.clone();
            for i in 0..n {
                shifted[(i, i)] = &shifted[(i, i)] - lambda;
            }
            let mut power = Matrix::identity(n);
            for _ in 0..n {
                power = &power * &shifted;
            }
            spaces.push(canonical_basis(&power.null_space(), n));
        }
        if spaces.iter().map(Vec::len).sum::<usize>() != n {
            continue;
        }
        // Each block must be degenerate (single eigenvalue) for every input.
        let mut blocks: Vec<(Vec<Vec<Scalar>>, Vec<Scalar>)> = Vec::new();
        let mut ok = true;
        'outer: for basis in &spaces {
            let m_cols = Matrix::from_columns(basis);
            let mut evs = Vec::with_capacity(ws.len());
            for w in ws {
                // Restrict w to the invariant subspace: solve m_cols * R = w * m_cols.
                let img = w * &m_cols;
                let Some(r) = restrict_to_subspace(&m_cols, &img) else {
                    ok = false;
                    break 'outer;
                };
                let ev = &r.trace() / &Scalar::from_int(basis.len() as i64);
                let mut shifted = r.clone();
                for i in 0..basis.len() {
                    shifted[(i, i)] = &shifted[(i, i)] - &ev;
                }
                if !shifted.is_nilpotent() {
                    ok = false;
                    break 'outer;
                }
                evs.push(ev);
            }
            blocks.push((basis.clone(), evs));
        }
        if !ok {
            continue;
        }
        blocks.sort_by(|x, y| {
            y.0.len().cmp(&x.0.len()).then_with(|| {
                for (a, b) in x.1.iter().zip(&y.1) {
                    let o = a.lex_cmp(b);
                    if o != std::cmp::Ordering::Equal {
                        return o;
                    }
                }
                let xa = Matrix::from_columns(&x.0);
                let ya = Matrix::from_columns(&y.0);
                xa.lex_cmp(&ya)
            })
        });
        let sizes: Vec<usize> = blocks.iter().map(|(b, _)| b.len()).collect();
        let all_cols: Vec<Vec<Scalar>> =
            blocks.into_iter().flat_map(|(b, _)| b).collect();
        let m = Matrix::from_columns(&all_cols);
        if m.inverse().is_some() {
            return Ok((m, sizes));
        }
    }
    Err(FieldError::SplitFailed)
}

/// Solves `basis * R = image` exactly when `image`'s columns lie in the span
/// of `basis`'s columns.
fn restrict_to_subspace(basis: &Matrix, image: &Matrix) -> Option<Matrix> {
    let n = basis.rows();
    let k = basis.cols();
    let mut aug = Matrix::zero(n, k + image.cols());
    for r in 0..n {
        for c in 0..k {
            aug[(r, c)] = basis[(r, c)].clone();
        }
        for c in 0..image.cols() {
            aug[(r, k + c)] = image[(r, c)].clone();
        }
    }
    let (red, rank, pivots) = aug.rref();
    if rank != k || pivots != (0..k).collect::<Vec<_>>() {
        return None;
    }
    // Consistency: no pivot beyond the basis columns.
    for r in k..n.min(red.rows()) {
        for c in 0..red.cols() {
            if !red[(r, c)].is_zero() {
                return None;
            }
        }
    }
    Some(Matrix::from_fn(k, image.cols(), |r, c| red[(r, k + c)].clone()))
}

/// The joint-kernel filtration `U_1 subset U_2 subset ...` of a commuting
/// nilpotent family, as canonical bases per step.
pub fn joint_kernel_flag(ns: &[Matrix]) -> Vec<Vec<Vec<Scalar>>> {
    let n = ns[0].rows();
    let mut steps: Vec<Vec<Vec<Scalar>>> = Vec::new();
    let mut current: Vec<Vec<Scalar>> = Vec::new();
    loop {
        let ann = annihilator_rows(&current, n);
        let mut stacked_rows: Vec<Vec<Scalar>> = Vec::new();
        for m in ns {
            let prod = &ann * m;
            for r in 0..prod.rows() {
                stacked_rows.push((0..n).map(|c| prod[(r, c)].clone()).collect());
            }
        }
        let next = if stacked_rows.is_empty() {
            // No constraints: everything.
            (0..n)
                .map(|i| {
                    let mut v = vec![Scalar::zero(); n];
                    v[i] = Scalar::one();
                    v
                })
                .collect()
        } else {
            let constraint =
                Matrix::from_fn(stacked_rows.len(), n, |r, c| stacked_rows[r][c].clone());
            canonical_basis(&constraint.null_space(), n)
        };
        let grew = next.len() > current.len();
        current = next;
        steps.push(current.clone());
        if current.len() == n {
            return steps;
        }
        assert!(grew, "filtration stalled; inputs not a commuting nilpotent family");
    }
}

/// Common strict lower triangularization of pairwise-commuting nilpotent
/// matrices. The returned `M` is invertible and `M^-1 N M` is strictly lower
/// triangular for every input; already-triangular families map to the
/// identity.
pub fn common_lower_triangularize(ns: &[Matrix]) -> Result<Matrix, FieldError> {
    assert!(!ns.is_empty());
    let n = ns[0].rows();
    for m in ns {
        assert!(m.is_square() && m.rows() == n);
        if !m.is_nilpotent() {
            return Err(FieldError::NotNilpotent);
        }
    }
    for (i, a) in ns.iter().enumerate() {
        for b in &ns[i + 1..] {
            if !a.commutes_with(b) {
                return Err(FieldError::NonCommuting);
            }
        }
    }
    let steps = joint_kernel_flag(ns);
    // Basis vectors of U_k not already in U_{k-1}, identified by echelon
    // pivot; ordered deepest-last so images land strictly below.
    let mut columns: Vec<Vec<Scalar>> = Vec::new();
    for k in (0..steps.len()).rev() {
        let prev_pivots: Vec<usize> = if k == 0 {
            Vec::new()
        } else {
            steps[k - 1].iter().map(|v| pivot_of(v)).collect()
        };
        for v in &steps[k] {
            if !prev_pivots.contains(&pivot_of(v)) {
                columns.push(v.clone());
            }
        }
    }
    let m = Matrix::from_columns(&columns);
    debug_assert!(m.inverse().is_some());
    Ok(m)
}
