//! Casimir invariants of extension brackets: coextensions (nonsingular and
//! singular paths), symbolic invariant families, exact verification of the
//! Casimir condition, and the finite-dimensional quadratic-Casimir system.

mod poly;

pub use poly::{Monomial, Poly};

use crate::exactfield::{Matrix, Scalar};
use crate::extension::ExtensionTensor;
use serde::Serialize;
use std::collections::BTreeMap;

#[derive(Debug, thiserror::Error)]
pub enum CasimirError {
    #[error("tensor is not in lower-triangular (or normalized semidirect) form")]
    NotLowerTriangular,
    #[error("solvability condition P W_(s) = W_(s) P failed at interior slice {0}; the extension splits as a direct sum")]
    SolvabilityFailed(usize),
    #[error("coextension condition failed at indices {0:?}")]
    CoextConditionFailed((usize, usize, usize, usize)),
    #[error("family index {0} out of range for order {1}")]
    IndexOutOfRange(usize, usize),
}

/// The coextension of a lower-triangular tensor: the dual 3-tensor
/// `coW^nu_{tau sigma}` over the interior indices together with the
/// pseudoinverse/projector pair of the final cocycle slice.
#[derive(Clone, Debug)]
pub struct Coextension {
    /// Storage indices of the interior variables (between the semidirect
    /// slot, if any, and the final slot).
    pub interior: Vec<usize>,
    /// `cow[k]` is the symmetric matrix `coW^{interior[k]}_{tau sigma}` in
    /// local interior coordinates.
    pub cow: Vec<Matrix>,
    /// Final cocycle slice `Wn^{mu nu}` restricted to the interior.
    pub wn: Matrix,
    /// Exact inverse or Moore-Penrose pseudoinverse of `wn`.
    pub wn_pinv: Matrix,
    /// `P = Wn * Wn+`, the projector onto the range of `wn`.
    pub projector: Matrix,
    pub singular: bool,
}

impl Coextension {
    pub fn cow_is_zero(&self) -> bool {
        self.cow.iter().all(Matrix::is_zero)
    }
}

/// One Casimir family: a sum of terms `coeff * monomial * f_i(args)` where
/// `f_i` is the i-th derivative of an abstract function of the listed linear
/// forms (one form for the standard families, several for merged
/// null-eigenvector families, none for the trivial linear family).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CasimirExpression {
    /// Seed index of the family (storage index), or the tensor dimension for
    /// the merged null-eigenvector family.
    pub family: usize,
    /// Coefficient vectors of the linear forms the abstract function takes.
    pub function_args: Vec<Vec<Scalar>>,
    pub terms: Vec<CasimirTerm>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CasimirTerm {
    pub coeff: Scalar,
    /// Exponent map over storage field indices.
    pub monomial: BTreeMap<usize, u32>,
    /// Derivative order of the abstract function.
    pub deriv: usize,
}

impl CasimirExpression {
    fn sort_terms(&mut self) {
        self.terms
            .sort_by(|a, b| a.deriv.cmp(&b.deriv).then_with(|| a.monomial.cmp(&b.monomial)));
    }

    /// Paper-style rendering; solvable tensors label fields `v1..`, while
    /// semidirect tensors keep the `v0..` labeling.
    pub fn render(&self, one_based: bool) -> String {
        let off = usize::from(one_based);
        let var = |i: usize| format!("v{}", i + off);
        let form = |f: &Vec<Scalar>| {
            let mut parts = Vec::new();
            for (i, c) in f.iter().enumerate() {
                if c.is_zero() {
                    continue;
                }
                if c.is_one() {
                    parts.push(var(i));
                } else {
                    parts.push(format!("{}*{}", c, var(i)));
                }
            }
            if parts.is_empty() {
                "0".into()
            } else {
                parts.join("+")
            }
        };
        let args: Vec<String> = self.function_args.iter().map(form).collect();
        let mut out = Vec::new();
        for t in &self.terms {
            let mut factors = Vec::new();
            if !t.coeff.is_one() || (t.monomial.is_empty() && args.is_empty()) {
                factors.push(t.coeff.to_string());
            }
            for (&i, &e) in &t.monomial {
                if e == 1 {
                    factors.push(var(i));
                } else {
                    factors.push(format!("({})^{}", var(i), e));
                }
            }
            if !args.is_empty() {
                let primes = "'".repeat(t.deriv);
                factors.push(format!("f{}({})", primes, args.join(",")));
            }
            out.push(factors.join(" "));
        }
        if out.is_empty() {
            "0".into()
        } else {
            out.join(" + ")
        }
    }
}

fn strictly_lower(m: &Matrix) -> bool {
    (0..m.rows()).all(|r| (r..m.cols()).all(|c| m[(r, c)].is_zero()))
}

/// Lower-triangular form check: strictly lower slices for solvable tensors,
/// identity slot 0 plus strictly lower slices for semidirect ones.
pub fn is_lower_triangular(w: &ExtensionTensor) -> bool {
    let d = w.dim();
    let start = usize::from(w.semidirect());
    if w.semidirect() && w.w_up(0) != Matrix::identity(d) {
        return false;
    }
    (start..d).all(|nu| {
        let up = w.w_up(nu);
        let strict = Matrix::from_fn(d, d, |r, c| {
            if w.semidirect() && c == 0 {
                Scalar::zero()
            } else {
                up[(r, c)].clone()
            }
        });
        strictly_lower(&strict)
    })
}

fn interior_of(w: &ExtensionTensor) -> Vec<usize> {
    let start = usize::from(w.semidirect());
    (start..w.dim().saturating_sub(1)).collect()
}

/// Computes the coextension of a lower-triangular tensor, taking the
/// nonsingular inverse path when the final cocycle slice is invertible and
/// the pseudoinverse path otherwise. Both paths validate the coextension
/// condition exactly.
pub fn coextension(w: &ExtensionTensor) -> Result<Coextension, CasimirError> {
    if !is_lower_triangular(w) {
        return Err(CasimirError::NotLowerTriangular);
    }
    let interior = interior_of(w);
    let last = w.dim() - 1;
    let k = interior.len();
    let wn = Matrix::from_fn(k, k, |i, j| w.get(last, interior[i], interior[j]).clone());
    // wt[s] = W~_(interior[s]) as a matrix over interior indices.
    let wt: Vec<Matrix> = interior
        .iter()
        .map(|&s| Matrix::from_fn(k, k, |i, j| w.get(s, interior[i], interior[j]).clone()))
        .collect();

    let (pinv, projector, singular) = match wn.inverse() {
        Some(inv) => (inv, Matrix::identity(k), false),
        None => {
            let pinv = wn.pseudoinverse();
            let proj = &wn * &pinv;
            for (si, slice) in wt.iter().enumerate() {
                if &(&proj * slice) != &(slice * &proj) {
                    return Err(CasimirError::SolvabilityFailed(interior[si]));
                }
            }
            (pinv, proj, true)
        }
    };

    let mut cow = Vec::with_capacity(k);
    for nu in 0..k {
        // W~^(nu) as a matrix: rows lambda, cols rho, both interior.
        let wt_up = Matrix::from_fn(k, k, |l, r| {
            w.get(interior[l], interior[r], interior[nu]).clone()
        });
        let m = if singular {
            // coW^nu = W~^(nu) Wn+ + (W~^(nu) Wn+)^T - Wn+ Wn W~^(nu) Wn+
            let a = &wt_up * &pinv;
            let b = a.transpose();
            let c = &(&(&(&pinv * &wn) * &wt_up) * &pinv);
            &(&a + &b) - c
        } else {
            // coW^nu_{tau sigma} = Wni_{tau rho} W~_sigma^{rho nu}
            Matrix::from_fn(k, k, |tau, sigma| {
                let mut acc = Scalar::zero();
                for rho in 0..k {
                    if !pinv[(tau, rho)].is_zero() {
                        acc += &(&pinv[(tau, rho)]
                            * w.get(interior[sigma], interior[rho], interior[nu]));
                    }
                }
                acc
            })
        };
        cow.push(m);
    }

    // Symmetry and the coextension law.
    for (nu, m) in cow.iter().enumerate() {
        if !m.is_symmetric() {
            return Err(CasimirError::CoextConditionFailed((nu, 0, 0, 0)));
        }
    }
    for t in 0..k {
        for s in 0..k {
            for l in 0..k {
                for nu in 0..k {
                    let mut lhs = Scalar::zero();
                    let mut rhs = Scalar::zero();
                    for m in 0..k {
                        lhs += &(&cow[m][(t, s)] * &cow[nu][(m, l)]);
                        rhs += &(&cow[m][(t, l)] * &cow[nu][(m, s)]);
                    }
                    if lhs != rhs {
                        return Err(CasimirError::CoextConditionFailed((t, s, l, nu)));
                    }
                }
            }
        }
    }

    Ok(Coextension {
        interior,
        cow,
        wn,
        wn_pinv: pinv,
        projector,
        singular,
    })
}

/// Joint null directions: the common kernel of the nilpotent upper slices.
pub fn joint_null_space(w: &ExtensionTensor) -> Vec<Vec<Scalar>> {
    let d = w.dim();
    let start = usize::from(w.semidirect());
    if start >= d {
        return Vec::new();
    }
    let mut rows: Vec<Vec<Scalar>> = Vec::new();
    for nu in start..d {
        let up = w.w_up(nu);
        for r in 0..d {
            rows.push((0..d).map(|c| up[(r, c)].clone()).collect());
        }
    }
    if rows.is_empty() {
        return Vec::new();
    }
    let stacked = Matrix::from_fn(rows.len(), d, |r, c| rows[r][c].clone());
    let basis = stacked.null_space();
    // Canonical (rref) basis.
    if basis.is_empty() {
        return basis;
    }
    let m = Matrix::from_fn(basis.len(), d, |r, c| basis[r][c].clone());
    let (red, rank, _) = m.rref();
    (0..rank)
        .map(|r| (0..d).map(|c| red[(r, c)].clone()).collect())
        .collect()
}

/// Connected components of the coordinate support graph (indices linked when
/// they share a nonzero cube entry). Only meaningful for solvable tensors;
/// a semidirect tensor is always one component through slot 0.
fn coordinate_components(w: &ExtensionTensor) -> Vec<Vec<usize>> {
    let d = w.dim();
    let mut parent: Vec<usize> = (0..d).collect();
    fn find(parent: &mut Vec<usize>, x: usize) -> usize {
        if parent[x] != x {
            let root = find(parent, parent[x]);
            parent[x] = root;
        }
        parent[x]
    }
    let mut union = |parent: &mut Vec<usize>, a: usize, b: usize| {
        let ra = find(parent, a);
        let rb = find(parent, b);
        if ra != rb {
            parent[ra.max(rb)] = ra.min(rb);
        }
    };
    for l in 0..d {
        for m in 0..d {
            for n in 0..d {
                if !w.get(l, m, n).is_zero() {
                    union(&mut parent, l, m);
                    union(&mut parent, l, n);
                }
            }
        }
    }
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for i in 0..d {
        let r = find(&mut parent, i);
        groups.entry(r).or_default().push(i);
    }
    groups.into_values().collect()
}

/// Builds the polynomial families of a single connected, trivially-stripped
/// block. `slots` maps local storage indices to global ones.
fn block_families(
    w: &ExtensionTensor,
    slots: &[usize],
    out: &mut Vec<CasimirExpression>,
) -> Result<(), CasimirError> {
    let d = w.dim();
    let start = usize::from(w.semidirect());
    // Strip trailing trivial levels: the last variable decouples whenever its
    // lower slice has no solvable content.
    if d > start + 1 {
        let last = d - 1;
        let trivial = (start..d).all(|m| (start..d).all(|n| w.get(last, m, n).is_zero()));
        if trivial {
            let sub = w.restrict(&(0..d - 1).collect::<Vec<_>>(), w.semidirect());
            return block_families(&sub, &slots[..d - 1], out);
        }
    }
    if d <= start {
        // Pure base slot: no solvable variables, no polynomial families.
        return Ok(());
    }

    let co = coextension(w)?;
    let k = co.interior.len();
    let last = d - 1;

    // Seeds: v^nu for every interior nu (nonsingular), or the independent
    // rows of the projector (singular path).
    let mut seeds: Vec<(usize, Poly)> = Vec::new();
    if co.singular {
        let mut taken: Vec<Vec<Scalar>> = Vec::new();
        for nu in 0..k {
            let row: Vec<Scalar> = (0..k).map(|c| co.projector[(nu, c)].clone()).collect();
            if row.iter().all(Scalar::is_zero) {
                continue;
            }
            let mut probe = taken.clone();
            probe.push(row.clone());
            let m = Matrix::from_fn(probe.len(), k, |r, c| probe[r][c].clone());
            if m.rank() == probe.len() {
                taken.push(row.clone());
                let mut p = Poly::zero();
                for (c, coeff) in row.iter().enumerate() {
                    p = p.add(&Poly::var(co.interior[c]).scale(coeff));
                }
                seeds.push((co.interior[nu], p));
            }
        }
    } else {
        for nu in 0..k {
            seeds.push((co.interior[nu], Poly::var(co.interior[nu])));
        }
    }

    // The semidirect slot contributes a full family when Wn is invertible
    // and only the trivial linear Casimir when it is singular.
    let semidirect_family = w.semidirect() && !co.singular;
    if w.semidirect() && co.singular {
        out.push(CasimirExpression {
            family: slots[0],
            function_args: Vec::new(),
            terms: vec![CasimirTerm {
                coeff: Scalar::one(),
                monomial: BTreeMap::from([(slots[0], 1)]),
                deriv: 0,
            }],
        });
    }

    let arg_form = {
        let mut f = vec![Scalar::zero(); slots.last().unwrap() + 1];
        f[slots[last]] = Scalar::one();
        f
    };

    // Hessian recursion g^(i)_{,ls} = coW^m_{ls} g^(i-1)_{,m} (+ Wn+ seed for
    // the semidirect family), carried out on exact polynomials; nilpotency
    // terminates every chain.
    let mut emit = |seed_idx: usize, g0: Poly, first_hessian: Option<Matrix>| {
        let mut terms = vec![];
        let mut push_poly = |p: &Poly, deriv: usize, terms: &mut Vec<CasimirTerm>| {
            for (mono, coeff) in p.terms() {
                terms.push(CasimirTerm {
                    coeff: coeff.clone(),
                    monomial: mono.clone(),
                    deriv,
                });
            }
        };
        push_poly(&g0, 0, &mut terms);
        let mut g = match first_hessian {
            Some(h) => {
                let mut p = Poly::zero();
                for t in 0..k {
                    for s in 0..k {
                        if h[(t, s)].is_zero() {
                            continue;
                        }
                        let m = Poly::var(co.interior[t]).mul(&Poly::var(co.interior[s]));
                        p = p.add(&m.scale(&(&h[(t, s)] / &Scalar::from_int(2))));
                    }
                }
                p
            }
            None => Poly::zero(),
        };
        let mut i = 1usize;
        while !g.is_zero() {
            push_poly(&g, i, &mut terms);
            // g^(i+1) = sum_{l,s} v^l v^s (coW^m_{ls} d_m g) / ((i+2)(i+1))
            let mut next = Poly::zero();
            for t in 0..k {
                for s in 0..k {
                    let mut dsum = Poly::zero();
                    for m in 0..k {
                        if !co.cow[m][(t, s)].is_zero() {
                            dsum = dsum.add(&g.diff(co.interior[m]).scale(&co.cow[m][(t, s)]));
                        }
                    }
                    if !dsum.is_zero() {
                        next = next.add(
                            &Poly::var(co.interior[t])
                                .mul(&Poly::var(co.interior[s]))
                                .mul(&dsum),
                        );
                    }
                }
            }
            let denom = Scalar::from_int(((i + 2) * (i + 1)) as i64);
            g = next.scale(&denom.inv().unwrap());
            i += 1;
            assert!(i <= d + 2, "coextension chain failed to terminate");
        }
        let mut expr = CasimirExpression {
            family: seed_idx,
            function_args: vec![arg_form.clone()],
            terms,
        };
        expr.sort_terms();
        out.push(expr);
    };

    if semidirect_family {
        emit(slots[0], Poly::var(slots[0]), Some(co.wn_pinv.clone()));
    }
    for (nu_global_idx, g0) in &seeds {
        // Remap the seed polynomial to global variables.
        let mut g0_global = Poly::zero();
        for (mono, c) in g0.terms() {
            let mut m2 = Monomial::new();
            for (&v, &e) in mono {
                m2.insert(slots[v], e);
            }
            g0_global.add_term(m2, c.clone());
        }
        // First Hessian: coW^m_{ts} P^nu_m (singular) or coW^nu (nonsingular).
        let local_nu = co
            .interior
            .iter()
            .position(|&x| x == *nu_global_idx)
            .unwrap();
        let h = if co.singular {
            let mut h = Matrix::zero(k, k);
            for t in 0..k {
                for s in 0..k {
                    let mut acc = Scalar::zero();
                    for m in 0..k {
                        acc += &(&co.cow[m][(t, s)] * &co.projector[(local_nu, m)]);
                    }
                    h[(t, s)] = acc;
                }
            }
            h
        } else {
            co.cow[local_nu].clone()
        };
        emit(*nu_global_idx, g0_global, Some(h));
    }
    Ok(())
}

/// All Casimir families of a lower-triangular (solvable or normalized
/// semidirect) tensor: per-coordinate-block polynomial families plus one
/// merged family over the joint null directions.
///
/// Local variables of a block are mapped back to global storage indices, so
/// the families read directly against the input tensor's labeling.
pub fn casimir_families(w: &ExtensionTensor) -> Result<Vec<CasimirExpression>, CasimirError> {
    if !is_lower_triangular(w) {
        return Err(CasimirError::NotLowerTriangular);
    }
    let d = w.dim();
    let mut out = Vec::new();
    if w.semidirect() {
        block_families(w, &(0..d).collect::<Vec<_>>(), &mut out)?;
    } else {
        for comp in coordinate_components(w) {
            let sub = w.restrict(&comp, false);
            block_families(&sub, &comp, &mut out)?;
        }
    }
    // Merged family over the global joint null directions.
    let null = joint_null_space(w);
    if !null.is_empty() {
        out.push(CasimirExpression {
            family: d,
            function_args: null,
            terms: vec![CasimirTerm {
                coeff: Scalar::one(),
                monomial: BTreeMap::new(),
                deriv: 0,
            }],
        });
    }
    out.sort_by_key(|e| e.family);
    Ok(out)
}

/// Closed-form Leibniz Casimir family
/// `C^nu = sum_k (1/k!) delta^{nu+(k-1)n}_{t_1+...+t_k} v^{t_1}...v^{t_k} f_{k-1}(v^n)`.
///
/// `nu` uses paper labels: `1..n` for solvable tensors (with `nu = n` the
/// pure family), `0..n` for semidirect ones.
pub fn leibniz_casimirs(n: usize, nu: usize, semidirect: bool) -> Result<CasimirExpression, CasimirError> {
    if n == 0 || nu > n || (!semidirect && nu == 0) {
        return Err(CasimirError::IndexOutOfRange(nu, n));
    }
    // Storage index of paper variable i.
    let store = |i: usize| if semidirect { i } else { i - 1 };
    let d = if semidirect { n + 1 } else { n };
    let mut arg = vec![Scalar::zero(); d];
    arg[store(n)] = Scalar::one();
    if nu == n {
        return Ok(CasimirExpression {
            family: store(n),
            function_args: vec![arg],
            terms: vec![CasimirTerm {
                coeff: Scalar::one(),
                monomial: BTreeMap::new(),
                deriv: 0,
            }],
        });
    }
    // Interior paper labels run nu..n-1 in the monomials; enumerate multisets
    // {t_1 <= ... <= t_k} with sum = nu + (k-1) n.
    let lo = if semidirect { 0 } else { 1 };
    let mut terms = Vec::new();
    for k in 1..=(n - nu) {
        let target = nu + (k - 1) * n;
        let mut stack: Vec<(usize, usize, Vec<usize>)> = vec![(lo, target, Vec::new())];
        while let Some((min, rem, chosen)) = stack.pop() {
            if chosen.len() == k {
                if rem == 0 {
                    let mut mono: BTreeMap<usize, u32> = BTreeMap::new();
                    let mut mult_factorial = Scalar::one();
                    let mut run = 1i64;
                    for (i, &t) in chosen.iter().enumerate() {
                        *mono.entry(store(t)).or_insert(0) += 1;
                        if i > 0 && chosen[i - 1] == t {
                            run += 1;
                            mult_factorial = &mult_factorial * &Scalar::from_int(run);
                        } else {
                            run = 1;
                        }
                    }
                    terms.push(CasimirTerm {
                        coeff: mult_factorial.inv().unwrap(),
                        monomial: mono,
                        deriv: k - 1,
                    });
                }
                continue;
            }
            for t in min..=(n - 1) {
                if t > rem {
                    break;
                }
                let mut c = chosen.clone();
                c.push(t);
                stack.push((t, rem - t, c));
            }
        }
    }
    let mut expr = CasimirExpression {
        family: store(nu),
        function_args: vec![arg],
        terms,
    };
    expr.sort_terms();
    Ok(expr)
}

/// Substitutes monomials for the abstract function and checks the Casimir
/// condition `W_l^{mn} C_{,ms} = W_s^{mn} C_{,ml}` as exact polynomial
/// identities for every derivative order `0..=kmax`.
pub fn verify_casimir(w: &ExtensionTensor, c: &CasimirExpression, kmax: usize) -> bool {
    substitutions(c, kmax).iter().all(|p| poly_is_casimir(w, p))
}

/// The polynomial instances used by [`verify_casimir`].
fn substitutions(c: &CasimirExpression, kmax: usize) -> Vec<Poly> {
    let args: Vec<Poly> = c
        .function_args
        .iter()
        .map(|f| Poly::linear_form(f))
        .collect();
    let mut polys = Vec::new();
    if args.is_empty() {
        let mut p = Poly::zero();
        for t in &c.terms {
            if t.deriv == 0 {
                let mut m = Poly::constant(t.coeff.clone());
                for (&v, &e) in &t.monomial {
                    m = m.mul(&Poly::var(v).pow(e));
                }
                p = p.add(&m);
            }
        }
        return vec![p];
    }
    if args.len() == 1 {
        // f(s) = s^k for k in 0..=kmax.
        for k in 0..=kmax {
            let mut p = Poly::zero();
            for t in &c.terms {
                if t.deriv > k {
                    continue;
                }
                // d^deriv/ds^deriv s^k = k!/(k-deriv)! s^(k-deriv)
                let mut fall = Scalar::one();
                for j in 0..t.deriv {
                    fall = &fall * &Scalar::from_int((k - j) as i64);
                }
                let mut term = Poly::constant(&t.coeff * &fall).mul(&args[0].pow((k - t.deriv) as u32));
                for (&v, &e) in &t.monomial {
                    term = term.mul(&Poly::var(v).pow(e));
                }
                p = p.add(&term);
            }
            polys.push(p);
        }
        return polys;
    }
    // Merged families carry a single derivative-free term; substitute all
    // monomials of total degree <= kmax in the argument forms.
    debug_assert!(c.terms.iter().all(|t| t.deriv == 0));
    let m = args.len();
    let mut exps = vec![0usize; m];
    loop {
        let total: usize = exps.iter().sum();
        if total <= kmax {
            let mut p = Poly::constant(Scalar::one());
            for (a, &e) in args.iter().zip(&exps) {
                p = p.mul(&a.pow(e as u32));
            }
            let mut full = Poly::zero();
            for t in &c.terms {
                let mut term = Poly::constant(t.coeff.clone()).mul(&p);
                for (&v, &e) in &t.monomial {
                    term = term.mul(&Poly::var(v).pow(e));
                }
                full = full.add(&term);
            }
            polys.push(full);
        }
        // Next exponent tuple with entries <= kmax.
        let mut i = 0;
        loop {
            if i == m {
                return polys;
            }
            exps[i] += 1;
            if exps[i] > kmax {
                exps[i] = 0;
                i += 1;
            } else {
                break;
            }
        }
    }
}

fn poly_is_casimir(w: &ExtensionTensor, c: &Poly) -> bool {
    let d = w.dim();
    let grads: Vec<Poly> = (0..d).map(|m| c.diff(m)).collect();
    let hess: Vec<Vec<Poly>> = (0..d)
        .map(|m| (0..d).map(|s| grads[m].diff(s)).collect())
        .collect();
    for nu in 0..d {
        for l in 0..d {
            for s in 0..l {
                let mut lhs = Poly::zero();
                let mut rhs = Poly::zero();
                for m in 0..d {
                    if !w.get(l, m, nu).is_zero() {
                        lhs = lhs.add(&hess[m][s].scale(w.get(l, m, nu)));
                    }
                    if !w.get(s, m, nu).is_zero() {
                        rhs = rhs.add(&hess[m][l].scale(w.get(s, m, nu)));
                    }
                }
                if lhs != rhs {
                    return false;
                }
            }
        }
    }
    true
}

/// Exact basis of symmetric matrices `C` with
/// `W_l^{mn} C_{ms} = W_s^{mn} C_{ml}`: the coefficient space of quadratic
/// Casimirs for finite-dimensional semisimple base algebras.
pub fn quadratic_casimirs(w: &ExtensionTensor) -> Vec<Matrix> {
    let d = w.dim();
    let unknowns: Vec<(usize, usize)> = (0..d)
        .flat_map(|a| (a..d).map(move |b| (a, b)))
        .collect();
    let idx = |a: usize, b: usize| {
        let (a, b) = if a <= b { (a, b) } else { (b, a) };
        unknowns.iter().position(|&p| p == (a, b)).unwrap()
    };
    let mut rows: Vec<Vec<Scalar>> = Vec::new();
    for nu in 0..d {
        for l in 0..d {
            for s in 0..l {
                let mut row = vec![Scalar::zero(); unknowns.len()];
                let mut nonzero = false;
                for m in 0..d {
                    if !w.get(l, m, nu).is_zero() {
                        row[idx(m, s)] += w.get(l, m, nu);
                        nonzero = true;
                    }
                    if !w.get(s, m, nu).is_zero() {
                        row[idx(m, l)] -= w.get(s, m, nu);
                        nonzero = true;
                    }
                }
                if nonzero {
                    rows.push(row);
                }
            }
        }
    }
    let basis = if rows.is_empty() {
        Matrix::zero(1, unknowns.len()).null_space()
    } else {
        Matrix::from_fn(rows.len(), unknowns.len(), |r, c| rows[r][c].clone()).null_space()
    };
    basis
        .into_iter()
        .map(|v| {
            Matrix::from_fn(d, d, |a, b| v[idx(a, b)].clone())
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::extension::ExtensionTensor;

    fn beta_half() -> Scalar {
        Scalar::from_ratio(1, 2)
    }

    #[test]
    fn crmhd_coextension_trivial() {
        let t = ExtensionTensor::crmhd(beta_half());
        let co = coextension(&t).unwrap();
        assert!(!co.singular);
        assert!(co.cow_is_zero());
        // Wn^-1 = [[0, -1/beta], [-1/beta, 0]] = [[0, -2], [-2, 0]]
        let mut expect = Matrix::zero(2, 2);
        expect[(0, 1)] = Scalar::from_int(-2);
        expect[(1, 0)] = Scalar::from_int(-2);
        assert_eq!(co.wn_pinv, expect);
    }

    #[test]
    fn leibniz_coextension_delta() {
        // coW^mu_{tau sigma} = delta^{mu+n}_{tau+sigma} in paper labels.
        for n in 3..=6 {
            let t = ExtensionTensor::leibniz(n, false);
            let co = coextension(&t).unwrap();
            assert!(!co.singular);
            let k = n - 1;
            for mu in 0..k {
                for tau in 0..k {
                    for sigma in 0..k {
                        // storage + 1 = paper
                        let expect = (mu + 1) + n == (tau + 1) + (sigma + 1);
                        assert_eq!(
                            co.cow[mu][(tau, sigma)].is_one(),
                            expect,
                            "n={n} mu={mu} tau={tau} sigma={sigma}"
                        );
                        assert_eq!(co.cow[mu][(tau, sigma)].is_zero(), !expect);
                    }
                }
            }
        }
    }

    /// The n=4 case 3c tensor of the singular-coextension worked example.
    fn sing_wn_example() -> ExtensionTensor {
        let mut t = ExtensionTensor::abelian(4);
        // Paper labels: W_2^{11} = 1; W_4^{13} = W_4^{31} = 1.
        t.set(1, 0, 0, Scalar::one());
        t.set(3, 0, 2, Scalar::one());
        t.set(3, 2, 0, Scalar::one());
        t
    }

    #[test]
    fn singular_path_printed_example() {
        let t = sing_wn_example();
        assert!(t.validate().passed());
        let co = coextension(&t).unwrap();
        assert!(co.singular);
        // Wn+ = Wn
        assert_eq!(co.wn_pinv, co.wn);
        // P = diag(1, 0, 1)
        assert_eq!(
            co.projector,
            Matrix::from_i64(&[&[1, 0, 0], &[0, 0, 0], &[0, 0, 1]])
        );
        // coW^(1) = [[0,0,0],[0,0,1],[0,1,0]], coW^(2) = coW^(3) = 0.
        assert_eq!(
            co.cow[0],
            Matrix::from_i64(&[&[0, 0, 0], &[0, 0, 1], &[0, 1, 0]])
        );
        assert!(co.cow[1].is_zero());
        assert!(co.cow[2].is_zero());
    }

    #[test]
    fn singular_path_families() {
        let t = sing_wn_example();
        let fams = casimir_families(&t).unwrap();
        // v1 f(v4) + v2 v3 f'(v4); v3 g(v4); h(v2, v4)
        assert_eq!(fams.len(), 3);
        assert_eq!(fams[0].render(true), "v1 f(v4) + v2 v3 f'(v4)");
        assert_eq!(fams[1].render(true), "v3 f(v4)");
        assert_eq!(fams[2].render(true), "f(v2,v4)");
        for f in &fams {
            assert!(verify_casimir(&t, f, 4), "{}", f.render(true));
        }
    }

    #[test]
    fn crmhd_families() {
        let t = ExtensionTensor::crmhd(beta_half());
        let fams = casimir_families(&t).unwrap();
        assert_eq!(fams.len(), 4);
        // Omega f(psi) - (1/beta) v p f'(psi)
        assert_eq!(fams[0].render(false), "v0 f(v3) + -2/1 v1 v2 f'(v3)");
        assert_eq!(fams[1].render(false), "v1 f(v3)");
        assert_eq!(fams[2].render(false), "v2 f(v3)");
        assert_eq!(fams[3].render(false), "f(v3)");
        for f in &fams {
            assert!(verify_casimir(&t, f, 4));
        }
    }

    #[test]
    fn rmhd_families() {
        let fams = casimir_families(&ExtensionTensor::rmhd()).unwrap();
        assert_eq!(fams.len(), 2);
        assert_eq!(fams[0].render(false), "v0 f(v1)");
        assert_eq!(fams[1].render(false), "f(v1)");
    }

    #[test]
    fn leibniz_closed_form_table() {
        // Table rows nu = 1 up to order five.
        let rows = [
            (1, "f(v1)"),
            (2, "v1 f(v2)"),
            (3, "v1 f(v3) + 1/2 (v2)^2 f'(v3)"),
            (4, "v1 f(v4) + v2 v3 f'(v4) + 1/6 (v3)^3 f''(v4)"),
            (
                5,
                "v1 f(v5) + v2 v4 f'(v5) + 1/2 (v3)^2 f'(v5) + 1/2 v3 (v4)^2 f''(v5) + 1/24 (v4)^4 f'''(v5)",
            ),
        ];
        for (n, expect) in rows {
            let nu = if n == 1 { 1 } else { 1 };
            let e = leibniz_casimirs(n, nu, false).unwrap();
            assert_eq!(e.render(true), expect, "n={n}");
        }
        // n=2 nu=1 and n=4 nu=3 spot checks.
        assert_eq!(leibniz_casimirs(2, 1, false).unwrap().render(true), "v1 f(v2)");
        assert_eq!(leibniz_casimirs(4, 3, false).unwrap().render(true), "v3 f(v4)");
    }

    #[test]
    fn leibniz_closed_form_matches_families() {
        for n in 2..=6 {
            let t = ExtensionTensor::leibniz(n, false);
            let fams = casimir_families(&t).unwrap();
            // Families nu = 1..n-1 polynomial plus the merged pure family.
            assert_eq!(fams.len(), n);
            for nu in 1..n {
                let closed = leibniz_casimirs(n, nu, false).unwrap();
                assert_eq!(fams[nu - 1].terms, closed.terms, "n={n} nu={nu}");
                assert!(verify_casimir(&t, &closed, n.min(5)));
            }
        }
        // Semidirect: the nu=0 family of leibniz(n, true) matches the nu=1
        // family of the order n+1 solvable Leibniz extension, shifted.
        for n in 2..=4 {
            let t = ExtensionTensor::leibniz(n, true);
            let fams = casimir_families(&t).unwrap();
            let c0 = &fams[0];
            // Solvable paper labels 1..n+1 map to storage 0..n, matching the
            // semidirect storage labels directly.
            let shifted = leibniz_casimirs(n + 1, 1, false).unwrap();
            assert_eq!(c0.terms, shifted.terms, "n={n}");
            assert!(verify_casimir(&t, c0, n + 1));
        }
    }

    #[test]
    fn direct_sum_families_merge_null_args() {
        // leibniz(2) + abelian(1): v1 f(v2) and h(v2, v3).
        let t = ExtensionTensor::leibniz(2, false).direct_sum(&ExtensionTensor::abelian(1));
        let fams = casimir_families(&t).unwrap();
        assert_eq!(fams.len(), 2);
        assert_eq!(fams[0].render(true), "v1 f(v2)");
        assert_eq!(fams[1].render(true), "f(v2,v3)");
        for f in &fams {
            assert!(verify_casimir(&t, f, 3));
        }
    }

    #[test]
    fn abelian_families() {
        let fams = casimir_families(&ExtensionTensor::abelian(3)).unwrap();
        assert_eq!(fams.len(), 1);
        assert_eq!(fams[0].render(true), "f(v1,v2,v3)");
    }

    #[test]
    fn non_casimir_rejected() {
        // v1 v2 is not a Casimir of leibniz(3).
        let t = ExtensionTensor::leibniz(3, false);
        let c = CasimirExpression {
            family: 0,
            function_args: vec![],
            terms: vec![CasimirTerm {
                coeff: Scalar::one(),
                monomial: BTreeMap::from([(0, 1), (1, 1)]),
                deriv: 0,
            }],
        };
        assert!(!verify_casimir(&t, &c, 3));
        // The linear v0 is a Casimir of CRMHD trivially.
        let lin = CasimirExpression {
            family: 0,
            function_args: vec![],
            terms: vec![CasimirTerm {
                coeff: Scalar::one(),
                monomial: BTreeMap::from([(0, 1)]),
                deriv: 0,
            }],
        };
        assert!(verify_casimir(&ExtensionTensor::crmhd(beta_half()), &lin, 2));
    }

    #[test]
    fn quadratic_casimirs_heavy_top_and_so3() {
        // Pure semidirect 2-tuple (heavy-top algebra): span{C01, C11}.
        let t = ExtensionTensor::rmhd();
        let basis = quadratic_casimirs(&t);
        assert_eq!(basis.len(), 2);
        for c in &basis {
            assert!(c.is_symmetric());
            // No C00 component: |l|^2 is not conserved for the heavy top.
            assert!(c[(0, 0)].is_zero());
        }
        // Single so(3): every symmetric 1x1 matrix.
        let single = ExtensionTensor::abelian(0).append_semisimple().unwrap();
        let basis = quadratic_casimirs(&single);
        assert_eq!(basis.len(), 1);
        // Abelian: all symmetric C.
        let ab = ExtensionTensor::abelian(2);
        assert_eq!(quadratic_casimirs(&ab).len(), 3);
    }

    #[test]
    fn singular_reduces_to_nonsingular_formula() {
        // When Wn is invertible the three-term singular formula equals the
        // inverse-based one; check on Leibniz tensors and CRMHD.
        for t in [
            ExtensionTensor::leibniz(4, false),
            ExtensionTensor::leibniz(6, false),
            ExtensionTensor::crmhd(beta_half()),
        ] {
            let co = coextension(&t).unwrap();
            assert!(!co.singular);
            let k = co.interior.len();
            let pinv = co.wn.pseudoinverse();
            assert_eq!(pinv, co.wn_pinv);
            for nu in 0..k {
                let wt_up = Matrix::from_fn(k, k, |l, r| {
                    t.get(co.interior[l], co.interior[r], co.interior[nu]).clone()
                });
                let a = &wt_up * &pinv;
                let sing = &(&a + &a.transpose()) - &(&(&(&pinv * &co.wn) * &wt_up) * &pinv);
                assert_eq!(sing, co.cow[nu]);
            }
        }
    }
}
