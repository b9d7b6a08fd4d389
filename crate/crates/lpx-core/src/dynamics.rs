//! Finite-dimensional Lie-Poisson time integration over extension brackets
//! with so(3) as base algebra: rigid body, heavy top, and arbitrary
//! quadratic Hamiltonians, with conservation monitors.
//!
//! Unlike the algebraic modules this one works in binary64; the exactness
//! budget is spent on the algebra, not on ODE integration.

use crate::casimir::quadratic_casimirs;
use crate::exactfield::Matrix;
use crate::extension::ExtensionTensor;

#[derive(Debug, thiserror::Error)]
pub enum DynamicsError {
    #[error("dimension mismatch between tensor, algebra, and state")]
    DimensionMismatch,
    #[error("state became non-finite at step {0}")]
    NonFinite(usize),
    #[error("Cartan-Killing form is singular; the base algebra is not semisimple")]
    NotSemisimple,
    #[error("tensor entries must be real for numerical integration")]
    ComplexTensor,
}

/// A finite-dimensional Lie algebra given by structure constants and its
/// Cartan-Killing form.
#[derive(Clone, Debug)]
pub struct LieAlgebraSpec {
    pub dim: usize,
    /// `c[i][j][k]` = structure constant `c_ij^k`.
    pub c: Vec<Vec<Vec<f64>>>,
    /// Cartan-Killing form `g_ij = c_is^t c_jt^s`.
    pub g: Vec<Vec<f64>>,
}

impl LieAlgebraSpec {
    /// Builds the spec from structure constants, checking antisymmetry and
    /// the Jacobi identity once.
    pub fn new(c: Vec<Vec<Vec<f64>>>) -> Result<Self, DynamicsError> {
        let dim = c.len();
        for i in 0..dim {
            for j in 0..dim {
                for k in 0..dim {
                    if (c[i][j][k] + c[j][i][k]).abs() > 1e-12 {
                        return Err(DynamicsError::DimensionMismatch);
                    }
                }
            }
        }
        // Jacobi: c_ij^m c_mk^l + c_jk^m c_mi^l + c_ki^m c_mj^l = 0.
        for i in 0..dim {
            for j in 0..dim {
                for k in 0..dim {
                    for l in 0..dim {
                        let mut s = 0.0;
                        for m in 0..dim {
                            s += c[i][j][m] * c[m][k][l]
                                + c[j][k][m] * c[m][i][l]
                                + c[k][i][m] * c[m][j][l];
                        }
                        if s.abs() > 1e-12 {
                            return Err(DynamicsError::DimensionMismatch);
                        }
                    }
                }
            }
        }
        let mut g = vec![vec![0.0; dim]; dim];
        for i in 0..dim {
            for j in 0..dim {
                let mut s = 0.0;
                for a in 0..dim {
                    for t in 0..dim {
                        s += c[i][a][t] * c[j][t][a];
                    }
                }
                g[i][j] = s;
            }
        }
        Ok(LieAlgebraSpec { dim, c, g })
    }

    /// so(3) with the totally antisymmetric structure constants.
    pub fn so3() -> Self {
        let mut c = vec![vec![vec![0.0; 3]; 3]; 3];
        for (i, j, k, s) in [
            (0, 1, 2, 1.0),
            (1, 2, 0, 1.0),
            (2, 0, 1, 1.0),
            (1, 0, 2, -1.0),
            (2, 1, 0, -1.0),
            (0, 2, 1, -1.0),
        ] {
            c[i][j][k] = s;
        }
        LieAlgebraSpec::new(c).expect("so(3) satisfies the axioms")
    }

    pub fn killing_det(&self) -> f64 {
        det(&self.g)
    }
}

fn det(m: &[Vec<f64>]) -> f64 {
    let n = m.len();
    let mut a: Vec<Vec<f64>> = m.to_vec();
    let mut d = 1.0;
    for col in 0..n {
        let Some(p) = (col..n).find(|&r| a[r][col].abs() > 1e-14) else {
            return 0.0;
        };
        if p != col {
            a.swap(p, col);
            d = -d;
        }
        d *= a[col][col];
        for r in col + 1..n {
            let f = a[r][col] / a[col][col];
            for c in col..n {
                a[r][c] -= f * a[col][c];
            }
        }
    }
    d
}

/// Tuple state: one `dim`-vector per tensor slot, plus time.
#[derive(Clone, Debug, PartialEq)]
pub struct SimState {
    pub v: Vec<Vec<f64>>,
    pub t: f64,
}

impl SimState {
    pub fn new(v: Vec<Vec<f64>>) -> Self {
        SimState { v, t: 0.0 }
    }

    pub fn is_finite(&self) -> bool {
        self.v.iter().flatten().all(|x| x.is_finite())
    }
}

/// Hamiltonians with closed-form gradients.
#[derive(Clone, Debug)]
pub enum HamiltonianSpec {
    /// `H = 1/2 sum l_i^2 / I_i` on a single so(3) slot.
    RigidBody { inertia: [f64; 3] },
    /// Rigid body plus gravity coupling `mgl * (v . chi)` on the advected
    /// slot.
    HeavyTop {
        inertia: [f64; 3],
        mgl: f64,
        chi: [f64; 3],
    },
    /// `H = 1/2 x^T A x` over the flattened state (slot-major).
    Quadratic { a: Vec<Vec<f64>> },
}

impl HamiltonianSpec {
    pub fn eval(&self, s: &SimState) -> f64 {
        match self {
            HamiltonianSpec::RigidBody { inertia } => {
                let l = &s.v[0];
                0.5 * (l[0] * l[0] / inertia[0]
                    + l[1] * l[1] / inertia[1]
                    + l[2] * l[2] / inertia[2])
            }
            HamiltonianSpec::HeavyTop { inertia, mgl, chi } => {
                let l = &s.v[0];
                let v = &s.v[1];
                0.5 * (l[0] * l[0] / inertia[0]
                    + l[1] * l[1] / inertia[1]
                    + l[2] * l[2] / inertia[2])
                    + mgl * (v[0] * chi[0] + v[1] * chi[1] + v[2] * chi[2])
            }
            HamiltonianSpec::Quadratic { a } => {
                let x: Vec<f64> = s.v.iter().flatten().copied().collect();
                let mut h = 0.0;
                for i in 0..x.len() {
                    for j in 0..x.len() {
                        h += 0.5 * x[i] * a[i][j] * x[j];
                    }
                }
                h
            }
        }
    }

    /// Gradient `dH/dv^mu_i`, same shape as the state.
    pub fn grad(&self, s: &SimState) -> Vec<Vec<f64>> {
        match self {
            HamiltonianSpec::RigidBody { inertia } => {
                let l = &s.v[0];
                vec![vec![
                    l[0] / inertia[0],
                    l[1] / inertia[1],
                    l[2] / inertia[2],
                ]]
            }
            HamiltonianSpec::HeavyTop { inertia, mgl, chi } => {
                let l = &s.v[0];
                vec![
                    vec![l[0] / inertia[0], l[1] / inertia[1], l[2] / inertia[2]],
                    vec![mgl * chi[0], mgl * chi[1], mgl * chi[2]],
                ]
            }
            HamiltonianSpec::Quadratic { a } => {
                let x: Vec<f64> = s.v.iter().flatten().copied().collect();
                let mut g = vec![0.0; x.len()];
                for i in 0..x.len() {
                    for j in 0..x.len() {
                        g[i] += 0.5 * (a[i][j] + a[j][i]) * x[j];
                    }
                }
                let dim = s.v[0].len();
                s.v.iter()
                    .enumerate()
                    .map(|(mu, _)| g[mu * dim..(mu + 1) * dim].to_vec())
                    .collect()
            }
        }
    }
}

/// Real entries of the tensor as f64, slot-major `w[l][m][n]`.
fn tensor_f64(w: &ExtensionTensor) -> Result<Vec<Vec<Vec<f64>>>, DynamicsError> {
    let d = w.dim();
    let mut out = vec![vec![vec![0.0; d]; d]; d];
    for l in 0..d {
        for m in 0..d {
            for n in 0..d {
                out[l][m][n] = w
                    .get(l, m, n)
                    .to_f64()
                    .ok_or(DynamicsError::ComplexTensor)?;
            }
        }
    }
    Ok(out)
}

/// Coadjoint equation of motion:
/// `(dv/dt)^nu_i = -W_l^{mu nu} [dH/dv^mu, v^l]+_i` with
/// `[b, l]+_i = -c_ij^k b^j l_k`.
pub fn coadjoint_rhs(
    w: &ExtensionTensor,
    alg: &LieAlgebraSpec,
    h: &HamiltonianSpec,
    s: &SimState,
) -> Result<Vec<Vec<f64>>, DynamicsError> {
    let d = w.dim();
    if s.v.len() != d || s.v.iter().any(|x| x.len() != alg.dim) {
        return Err(DynamicsError::DimensionMismatch);
    }
    let wf = tensor_f64(w)?;
    let grad = h.grad(s);
    if grad.len() != d {
        return Err(DynamicsError::DimensionMismatch);
    }
    let mut out = vec![vec![0.0; alg.dim]; d];
    for nu in 0..d {
        for l in 0..d {
            for mu in 0..d {
                let wv = wf[l][mu][nu];
                if wv == 0.0 {
                    continue;
                }
                // [beta, v]+_i = -c_ij^k beta^j v_k; RHS gets another minus.
                for i in 0..alg.dim {
                    let mut co = 0.0;
                    for j in 0..alg.dim {
                        for k in 0..alg.dim {
                            co -= alg.c[i][j][k] * grad[mu][j] * s.v[l][k];
                        }
                    }
                    out[nu][i] -= wv * co;
                }
            }
        }
    }
    Ok(out)
}

/// A labeled conserved-quantity callback.
pub struct Monitor {
    pub name: String,
    pub eval: Box<dyn Fn(&SimState) -> f64>,
}

impl Monitor {
    pub fn new(name: impl Into<String>, eval: impl Fn(&SimState) -> f64 + 'static) -> Self {
        Monitor {
            name: name.into(),
            eval: Box::new(eval),
        }
    }
}

/// Monitors for the quadratic Casimirs of `w` under the pairing induced by
/// the algebra's Cartan-Killing form: `C = 1/2 g^{ij} C_{mu nu} v^mu_i v^nu_j`.
pub fn quadratic_casimir_monitors(
    w: &ExtensionTensor,
    alg: &LieAlgebraSpec,
) -> Result<Vec<Monitor>, DynamicsError> {
    if alg.killing_det().abs() < 1e-12 {
        return Err(DynamicsError::NotSemisimple);
    }
    let coeffs = quadratic_casimirs_findim(w, alg)?;
    let ginv = invert(&alg.g).ok_or(DynamicsError::NotSemisimple)?;
    let mut out = Vec::new();
    for (idx, c) in coeffs.iter().enumerate() {
        let d = c.rows();
        let mut cf = vec![vec![0.0; d]; d];
        for a in 0..d {
            for b in 0..d {
                cf[a][b] = c[(a, b)].to_f64().ok_or(DynamicsError::ComplexTensor)?;
            }
        }
        let ginv = ginv.clone();
        out.push(Monitor::new(format!("C{}", idx + 1), move |s: &SimState| {
            let mut acc = 0.0;
            for mu in 0..cf.len() {
                for nu in 0..cf.len() {
                    if cf[mu][nu] == 0.0 {
                        continue;
                    }
                    for i in 0..ginv.len() {
                        for j in 0..ginv.len() {
                            acc += 0.5 * ginv[i][j] * cf[mu][nu] * s.v[mu][i] * s.v[nu][j];
                        }
                    }
                }
            }
            acc
        }));
    }
    Ok(out)
}

/// Exact basis of quadratic-Casimir coefficient matrices, gated on the base
/// algebra being semisimple.
pub fn quadratic_casimirs_findim(
    w: &ExtensionTensor,
    alg: &LieAlgebraSpec,
) -> Result<Vec<Matrix>, DynamicsError> {
    if alg.killing_det().abs() < 1e-12 {
        return Err(DynamicsError::NotSemisimple);
    }
    Ok(quadratic_casimirs(w))
}

fn invert(m: &[Vec<f64>]) -> Option<Vec<Vec<f64>>> {
    let n = m.len();
    let mut a: Vec<Vec<f64>> = m
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { 1.0 } else { 0.0 }));
            r
        })
        .collect();
    for col in 0..n {
        let p = (col..n).max_by(|&x, &y| {
            a[x][col].abs().partial_cmp(&a[y][col].abs()).unwrap()
        })?;
        if a[p][col].abs() < 1e-14 {
            return None;
        }
        a.swap(p, col);
        let pv = a[col][col];
        for c in 0..2 * n {
            a[col][c] /= pv;
        }
        for r in 0..n {
            if r != col && a[r][col] != 0.0 {
                let f = a[r][col];
                for c in 0..2 * n {
                    a[r][c] -= f * a[col][c];
                }
            }
        }
    }
    Some(a.into_iter().map(|r| r[n..].to_vec()).collect())
}

/// One recorded trajectory row plus monitor values.
pub struct TrajectoryPoint {
    pub t: f64,
    pub state: Vec<Vec<f64>>,
    pub h: f64,
    pub monitors: Vec<f64>,
}

pub struct RunResult {
    pub points: Vec<TrajectoryPoint>,
    pub monitor_names: Vec<String>,
}

/// Classical fixed-step RK4 with per-step monitor recording. `thin` controls
/// how often rows are recorded (every `thin` steps; the initial and final
/// states are always included).
pub fn rk4_run(
    w: &ExtensionTensor,
    alg: &LieAlgebraSpec,
    h: &HamiltonianSpec,
    s0: &SimState,
    dt: f64,
    steps: usize,
    monitors: &[Monitor],
    thin: usize,
) -> Result<RunResult, DynamicsError> {
    assert!(dt > 0.0, "dt must be positive");
    let thin = thin.max(1);
    let mut s = s0.clone();
    let record = |s: &SimState, points: &mut Vec<TrajectoryPoint>| {
        points.push(TrajectoryPoint {
            t: s.t,
            state: s.v.clone(),
            h: h.eval(s),
            monitors: monitors.iter().map(|m| (m.eval)(s)).collect(),
        });
    };
    let mut points = Vec::new();
    record(&s, &mut points);
    let add = |a: &SimState, k: &[Vec<f64>], f: f64| -> SimState {
        SimState {
            v: a
                .v
                .iter()
                .zip(k)
                .map(|(row, krow)| row.iter().zip(krow).map(|(x, dx)| x + f * dx).collect())
                .collect(),
            t: a.t,
        }
    };
    for step in 1..=steps {
        let k1 = coadjoint_rhs(w, alg, h, &s)?;
        let k2 = coadjoint_rhs(w, alg, h, &add(&s, &k1, dt / 2.0))?;
        let k3 = coadjoint_rhs(w, alg, h, &add(&s, &k2, dt / 2.0))?;
        let k4 = coadjoint_rhs(w, alg, h, &add(&s, &k3, dt))?;
        for (mu, row) in s.v.iter_mut().enumerate() {
            for (i, x) in row.iter_mut().enumerate() {
                *x += dt / 6.0
                    * (k1[mu][i] + 2.0 * k2[mu][i] + 2.0 * k3[mu][i] + k4[mu][i]);
            }
        }
        s.t += dt;
        if !s.is_finite() {
            return Err(DynamicsError::NonFinite(step));
        }
        if step % thin == 0 || step == steps {
            record(&s, &mut points);
        }
    }
    Ok(RunResult {
        points,
        monitor_names: monitors.iter().map(|m| m.name.clone()).collect(),
    })
}

/// The order-zero tensor wrapped as the trivial semidirect extension; the
/// bracket of a single so(3) slot (free rigid body).
pub fn rigid_body_tensor() -> ExtensionTensor {
    ExtensionTensor::abelian(0).append_semisimple().unwrap()
}

/// Relative drift of a monitor series: `max |x - x0| / max(|x0|, eps)`.
pub fn relative_drift(series: &[f64]) -> f64 {
    let x0 = series[0];
    let scale = x0.abs().max(1e-30);
    series
        .iter()
        .map(|x| (x - x0).abs() / scale)
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rigid_body_rhs_is_euler() {
        let w = rigid_body_tensor();
        let alg = LieAlgebraSpec::so3();
        let ham = HamiltonianSpec::RigidBody {
            inertia: [1.0, 2.0, 3.0],
        };
        let s = SimState::new(vec![vec![0.0, 1.0, 1.0]]);
        let rhs = coadjoint_rhs(&w, &alg, &ham, &s).unwrap();
        // dl1/dt = (1/I2 - 1/I3) l2 l3 = 1/6
        assert!((rhs[0][0] - 1.0 / 6.0).abs() < 1e-14);
        // Cyclic: dl2/dt = (1/I3 - 1/I1) l3 l1 = 0; dl3/dt = (1/I1 - 1/I2) l1 l2 = 0.
        assert!(rhs[0][1].abs() < 1e-14);
        assert!(rhs[0][2].abs() < 1e-14);
    }

    #[test]
    fn heavy_top_advected_slot() {
        // With zero gravity coupling the advected vector rotates with the
        // body: dv/dt = (I^-1 l) x v.
        let w = ExtensionTensor::rmhd();
        let alg = LieAlgebraSpec::so3();
        let ham = HamiltonianSpec::HeavyTop {
            inertia: [1.0, 2.0, 3.0],
            mgl: 0.0,
            chi: [0.0, 0.0, 1.0],
        };
        let l = [0.3, -0.2, 0.9];
        let v = [0.5, 0.1, -0.4];
        let s = SimState::new(vec![l.to_vec(), v.to_vec()]);
        let rhs = coadjoint_rhs(&w, &alg, &ham, &s).unwrap();
        let omega = [l[0] / 1.0, l[1] / 2.0, l[2] / 3.0];
        let expect = [
            omega[1] * v[2] - omega[2] * v[1],
            omega[2] * v[0] - omega[0] * v[2],
            omega[0] * v[1] - omega[1] * v[0],
        ];
        for i in 0..3 {
            assert!((rhs[1][i] - expect[i]).abs() < 1e-14, "component {i}");
        }
    }

    #[test]
    fn zero_hamiltonian_constant_trajectory() {
        let w = rigid_body_tensor();
        let alg = LieAlgebraSpec::so3();
        let ham = HamiltonianSpec::Quadratic {
            a: vec![vec![0.0; 3]; 3],
        };
        let s0 = SimState::new(vec![vec![0.4, -0.1, 0.2]]);
        let run = rk4_run(&w, &alg, &ham, &s0, 1e-2, 100, &[], 10).unwrap();
        assert_eq!(run.points.last().unwrap().state, s0.v);
    }

    #[test]
    fn rigid_body_conserves_momentum_norm() {
        let w = rigid_body_tensor();
        let alg = LieAlgebraSpec::so3();
        let ham = HamiltonianSpec::RigidBody {
            inertia: [1.0, 2.0, 3.0],
        };
        let s0 = SimState::new(vec![vec![0.2, 0.7, -0.6]]);
        let monitors = vec![Monitor::new("l2", |s: &SimState| {
            s.v[0].iter().map(|x| x * x).sum()
        })];
        let run = rk4_run(&w, &alg, &ham, &s0, 1e-3, 10_000, &monitors, 100).unwrap();
        let series: Vec<f64> = run.points.iter().map(|p| p.monitors[0]).collect();
        assert!(relative_drift(&series) < 1e-8, "drift {}", relative_drift(&series));
        let energy: Vec<f64> = run.points.iter().map(|p| p.h).collect();
        assert!(relative_drift(&energy) < 1e-8);
    }

    #[test]
    fn heavy_top_conserves_quadratic_casimirs() {
        let w = ExtensionTensor::rmhd();
        let alg = LieAlgebraSpec::so3();
        let ham = HamiltonianSpec::HeavyTop {
            inertia: [1.0, 2.0, 3.0],
            mgl: 1.0,
            chi: [0.0, 0.0, 1.0],
        };
        let s0 = SimState::new(vec![vec![0.3, 0.5, 0.2], vec![0.1, -0.4, 0.6]]);
        let monitors = quadratic_casimir_monitors(&w, &alg).unwrap();
        assert_eq!(monitors.len(), 2);
        let run = rk4_run(&w, &alg, &ham, &s0, 1e-3, 10_000, &monitors, 100).unwrap();
        for k in 0..monitors.len() {
            let series: Vec<f64> = run.points.iter().map(|p| p.monitors[k]).collect();
            assert!(relative_drift(&series) < 1e-8, "casimir {k}");
        }
        let energy: Vec<f64> = run.points.iter().map(|p| p.h).collect();
        assert!(relative_drift(&energy) < 1e-8);
    }

    #[test]
    fn rhs_bilinear_scaling() {
        // Doubling the state doubles the RHS for linear-gradient parts: for
        // the rigid body (quadratic H) the RHS is homogeneous of degree 2.
        let w = rigid_body_tensor();
        let alg = LieAlgebraSpec::so3();
        let ham = HamiltonianSpec::RigidBody {
            inertia: [1.0, 2.0, 3.0],
        };
        let s = SimState::new(vec![vec![0.3, -0.7, 0.4]]);
        let s2 = SimState::new(vec![vec![0.6, -1.4, 0.8]]);
        let r1 = coadjoint_rhs(&w, &alg, &ham, &s).unwrap();
        let r2 = coadjoint_rhs(&w, &alg, &ham, &s2).unwrap();
        for i in 0..3 {
            assert!((r2[0][i] - 4.0 * r1[0][i]).abs() < 1e-13);
        }
    }

    #[test]
    fn intermediate_axis_instability() {
        // Linearize about rotation around each principal axis; the reduced
        // 2x2 Jacobian has negative determinant (real +- pair) only for the
        // intermediate axis.
        let w = rigid_body_tensor();
        let alg = LieAlgebraSpec::so3();
        let ham = HamiltonianSpec::RigidBody {
            inertia: [1.0, 2.0, 3.0],
        };
        let eps = 1e-6;
        for axis in 0..3 {
            let mut base = vec![0.0; 3];
            base[axis] = 1.0;
            let others: Vec<usize> = (0..3).filter(|&i| i != axis).collect();
            // Numerical Jacobian restricted to the transverse components.
            let mut jac = [[0.0; 2]; 2];
            for (col, &j) in others.iter().enumerate() {
                let mut vp = base.clone();
                vp[j] += eps;
                let mut vm = base.clone();
                vm[j] -= eps;
                let rp = coadjoint_rhs(&w, &alg, &ham, &SimState::new(vec![vp])).unwrap();
                let rm = coadjoint_rhs(&w, &alg, &ham, &SimState::new(vec![vm])).unwrap();
                for (row, &i) in others.iter().enumerate() {
                    jac[row][col] = (rp[0][i] - rm[0][i]) / (2.0 * eps);
                }
            }
            let det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
            if axis == 1 {
                assert!(det < -1e-6, "intermediate axis must be hyperbolic, det={det}");
            } else {
                assert!(det > 1e-6, "extreme axes must be elliptic, det={det}");
            }
        }
    }

    #[test]
    fn hamiltonian_gradients_match_finite_differences() {
        let hams = vec![
            HamiltonianSpec::RigidBody {
                inertia: [1.0, 2.0, 3.0],
            },
            HamiltonianSpec::HeavyTop {
                inertia: [2.0, 1.0, 1.5],
                mgl: 0.7,
                chi: [0.1, 0.0, 0.9],
            },
        ];
        for ham in hams {
            let slots = match ham {
                HamiltonianSpec::RigidBody { .. } => 1,
                _ => 2,
            };
            let s = SimState::new(
                (0..slots)
                    .map(|k| vec![0.3 + k as f64 * 0.2, -0.5, 0.8])
                    .collect(),
            );
            let g = ham.grad(&s);
            let eps = 1e-6;
            for mu in 0..slots {
                for i in 0..3 {
                    let mut sp = s.clone();
                    sp.v[mu][i] += eps;
                    let mut sm = s.clone();
                    sm.v[mu][i] -= eps;
                    let fd = (ham.eval(&sp) - ham.eval(&sm)) / (2.0 * eps);
                    assert!((fd - g[mu][i]).abs() < 1e-8, "grad mismatch {mu} {i}");
                }
            }
        }
    }

    #[test]
    fn single_so3_casimir_span() {
        let alg = LieAlgebraSpec::so3();
        let basis = quadratic_casimirs_findim(&rigid_body_tensor(), &alg).unwrap();
        assert_eq!(basis.len(), 1);
    }
}
