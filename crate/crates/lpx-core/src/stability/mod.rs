//! Grid-based evaluation of closed-form equilibria and formal-stability
//! criteria: CRMHD energy-Casimir equilibria and principal minors, cat's-eye
//! solutions, magnetic islands with flow, RMHD dynamical-accessibility
//! conditions, and the 2-D Euler condition.

mod grid;
mod profile;

pub use grid::{FieldGrid, GridSpec, Mask};
pub use profile::{CrmhdProfile, Profile1D, RmhdProfile};

use serde::Serialize;

#[derive(Debug, thiserror::Error)]
pub enum StabilityError {
    #[error("bad parameter: {0}")]
    BadParameter(String),
    #[error("every grid point is resonance-masked")]
    AllResonant,
}

/// The Kelvin-Stuart cat's eye field `u = ln(a cosh y + sqrt(a^2-1) cos x)`.
pub fn catseye_field(a: f64, spec: GridSpec) -> Result<FieldGrid, StabilityError> {
    if !(a >= 1.0) {
        return Err(StabilityError::BadParameter(format!(
            "cat's eye parameter a = {a} must be >= 1"
        )));
    }
    let b = (a * a - 1.0).sqrt();
    Ok(FieldGrid::from_fn(spec, |x, y| {
        (a * y.cosh() + b * x.cos()).ln()
    }))
}

/// Max and RMS residual of `lap(u) - rhs(u)` on interior points.
pub fn pde_residual(u: &FieldGrid, rhs: impl Fn(f64) -> f64) -> (f64, f64) {
    let lap = u.laplacian();
    let mut max_res: f64 = 0.0;
    let mut sum2 = 0.0;
    let mut count = 0usize;
    for (idx, l) in lap.iter().enumerate() {
        if let Some(l) = l {
            let r = l - rhs(u.values[idx]);
            max_res = max_res.max(r.abs());
            sum2 += r * r;
            count += 1;
        }
    }
    (max_res, (sum2 / count.max(1) as f64).sqrt())
}

/// CRMHD equilibrium fields on a given flux surface sample.
pub struct CrmhdEquilibrium {
    pub psi: FieldGrid,
    pub v_e: FieldGrid,
    pub p_e: FieldGrid,
    /// Points excluded by the acoustic resonance `|Phi'|^2 = beta_e`.
    pub resonant: Mask,
}

/// Pointwise solve of the equilibrium relations for the parallel velocity
/// and pressure:
/// `(v_e, p_e) = (|Phi'|^2/beta - 1)^-1 (a2 + (a3 - 2x) Phi',
///               a2 Phi' + beta (a3 - 2x))`.
pub fn crmhd_equilibrium(
    profile: &CrmhdProfile,
    psi: &FieldGrid,
) -> Result<CrmhdEquilibrium, StabilityError> {
    let spec = psi.spec();
    let n = psi.values.len();
    let mut v_e = vec![0.0; n];
    let mut p_e = vec![0.0; n];
    let mut resonant = vec![false; n];
    for j in 0..psi.ny {
        for i in 0..psi.nx {
            let idx = j * psi.nx + i;
            let x = spec.x(i);
            let s = psi.values[idx];
            let phi_p = profile.phi.eval(s, 1);
            let a2 = profile.a2.eval(s, 0);
            let a3 = profile.a3.eval(s, 0);
            let ratio = phi_p * phi_p / profile.beta_e;
            // Resonance tolerance: 1e-12 at the local scale.
            let tol = 1e-12 * ratio.abs().max(1.0);
            if (1.0 - ratio).abs() < tol {
                resonant[idx] = true;
                v_e[idx] = f64::NAN;
                p_e[idx] = f64::NAN;
                continue;
            }
            let inv = 1.0 / (ratio - 1.0);
            v_e[idx] = inv * (a2 + (a3 - 2.0 * x) * phi_p);
            p_e[idx] = inv * (a2 * phi_p + profile.beta_e * (a3 - 2.0 * x));
        }
    }
    let mask = Mask { bits: resonant };
    if mask.count() == n {
        return Err(StabilityError::AllResonant);
    }
    Ok(CrmhdEquilibrium {
        psi: psi.clone(),
        v_e: FieldGrid {
            nx: psi.nx,
            ny: psi.ny,
            ly: psi.ly,
            values: v_e,
        },
        p_e: FieldGrid {
            nx: psi.nx,
            ny: psi.ny,
            ly: psi.ly,
            values: p_e,
        },
        resonant: mask,
    })
}

/// Principal minors and condition flags of the CRMHD formal-stability
/// quadratic form.
pub struct StabilityReport {
    pub p1: FieldGrid,
    pub p2: FieldGrid,
    pub p3: FieldGrid,
    /// Resonance-or-boundary points excluded from the conditions.
    pub masked: Mask,
    /// `|Phi'| <= 1`
    pub sub_alfvenic: Mask,
    /// `|Phi'|^2 <= min(1, beta_e)`
    pub acoustic_window: Mask,
    /// `P3 >= 0`
    pub p3_nonneg: Mask,
    /// Alfvenic shortcut `J_e'(psi_e) >= 0` where the gradient is resolvable.
    pub je_monotone: Mask,
    pub summary: StabilitySummary,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct StabilitySummary {
    pub masked_fraction: f64,
    pub sub_alfvenic_fraction: f64,
    pub acoustic_window_fraction: f64,
    pub p3_nonneg_fraction: f64,
    pub je_monotone_fraction: f64,
}

/// Evaluates the principal minors P1, P2, P3 of the symmetric 3x3 form in
/// `(dv, dp, dpsi)` at every unmasked interior point, plus the condition
/// flags. Failed sufficient conditions mean "not provably stable", never
/// "unstable".
pub fn crmhd_minors(profile: &CrmhdProfile, eq: &CrmhdEquilibrium) -> StabilityReport {
    let psi = &eq.psi;
    let spec = psi.spec();
    let n = psi.values.len();
    let beta = profile.beta_e;
    // Stencil fields for the psi-dependent compositions.
    let phi_of_psi = psi.map(|s| profile.phi.eval(s, 0));
    let phip_of_psi = psi.map(|s| profile.phi.eval(s, 1));
    let lap_phi = phi_of_psi.laplacian(); // equilibrium vorticity Omega_e
    let lap_phip = phip_of_psi.laplacian();
    let lap_psi = psi.laplacian(); // equilibrium current J_e
    let je = FieldGrid {
        nx: psi.nx,
        ny: psi.ny,
        ly: psi.ly,
        values: lap_psi
            .iter()
            .map(|v| v.unwrap_or(f64::NAN))
            .collect(),
    };
    let grad_psi = psi.gradient();
    let grad_je = je.gradient();

    let mut p1 = vec![f64::NAN; n];
    let mut p2 = vec![f64::NAN; n];
    let mut p3 = vec![f64::NAN; n];
    let mut masked = vec![false; n];
    let mut sub_alf = vec![false; n];
    let mut window = vec![false; n];
    let mut p3ok = vec![false; n];
    let mut jeok = vec![false; n];
    for j in 0..psi.ny {
        for i in 0..psi.nx {
            let idx = j * psi.nx + i;
            let boundary = j == 0 || j + 1 == psi.ny;
            if eq.resonant.bits[idx] || boundary {
                masked[idx] = true;
                continue;
            }
            let s = psi.values[idx];
            let phi_p = profile.phi.eval(s, 1);
            let phi_pp = profile.phi.eval(s, 2);
            let phi_ppp = profile.phi.eval(s, 3);
            let ve = eq.v_e.values[idx];
            let pe = eq.p_e.values[idx];
            let omega = lap_phi[idx].unwrap_or(f64::NAN);
            let lap_phip_here = lap_phip[idx].unwrap_or(f64::NAN);
            // Matrix entries: [[1, b, c], [b, d, e], [c, e, f]].
            let b = -phi_p / beta;
            let d = 1.0 / beta;
            let c = profile.a2.eval(s, 1) - pe * phi_pp / beta;
            let e = profile.a3.eval(s, 1) - ve * phi_pp / beta;
            let f = profile.a1.eval(s, 2)
                + ve * profile.a2.eval(s, 2)
                + pe * profile.a3.eval(s, 2)
                + omega * phi_pp
                - pe * ve * phi_ppp / beta
                + phi_p * lap_phip_here;
            p1[idx] = 1.0;
            p2[idx] = d - b * b;
            p3[idx] = (d - b * b) * f - e * e + 2.0 * b * c * e - d * c * c;
            sub_alf[idx] = phi_p.abs() <= 1.0 + 1e-12;
            window[idx] = phi_p * phi_p <= beta.min(1.0) + 1e-12;
            p3ok[idx] = p3[idx] >= -1e-12;
            // Alfvenic shortcut: J_e'(psi) from grad J . grad psi / |grad psi|^2.
            if let (Some((jx, jy)), Some((px, py))) = (grad_je[idx], grad_psi[idx]) {
                let g2 = px * px + py * py;
                if g2 > 1e-12 && jx.is_finite() && jy.is_finite() {
                    jeok[idx] = (jx * px + jy * py) / g2 >= -1e-9;
                }
            }
        }
    }
    let masked = Mask { bits: masked };
    let unmasked = n - masked.count();
    let frac = |m: &Mask| {
        if unmasked == 0 {
            0.0
        } else {
            m.count() as f64 / unmasked as f64
        }
    };
    let sub_alfvenic = Mask { bits: sub_alf };
    let acoustic_window = Mask { bits: window };
    let p3_nonneg = Mask { bits: p3ok };
    let je_monotone = Mask { bits: jeok };
    let summary = StabilitySummary {
        masked_fraction: masked.fraction(),
        sub_alfvenic_fraction: frac(&sub_alfvenic),
        acoustic_window_fraction: frac(&acoustic_window),
        p3_nonneg_fraction: frac(&p3_nonneg),
        je_monotone_fraction: frac(&je_monotone),
    };
    let wrap = |values: Vec<f64>| FieldGrid {
        nx: psi.nx,
        ny: psi.ny,
        ly: psi.ly,
        values,
    };
    StabilityReport {
        p1: wrap(p1),
        p2: wrap(p2),
        p3: wrap(p3),
        masked,
        sub_alfvenic,
        acoustic_window,
        p3_nonneg,
        je_monotone,
        summary,
    }
}

/// Magnetic islands with flow: the cat's-eye labeling field with
/// `M'(u) = k cosh(nu u)`, `Psi'(u) = k sinh(nu u)`, and the
/// dynamical-accessibility ratio `D Psi = tanh(nu u)`.
pub struct IslandFields {
    pub u: FieldGrid,
    pub mag_prime: FieldGrid,
    pub stream_prime: FieldGrid,
    pub dpsi: FieldGrid,
}

pub fn islands_with_flow(
    k: f64,
    nu: f64,
    a: f64,
    spec: GridSpec,
) -> Result<IslandFields, StabilityError> {
    if !(k > 0.0) {
        return Err(StabilityError::BadParameter(format!(
            "island scale k = {k} must be positive"
        )));
    }
    let u = catseye_field(a, spec)?;
    let mag_prime = u.map(|s| k * (nu * s).cosh());
    let stream_prime = u.map(|s| k * (nu * s).sinh());
    let dpsi = u.map(|s| (nu * s).tanh());
    Ok(IslandFields {
        u,
        mag_prime,
        stream_prime,
        dpsi,
    })
}

/// RMHD dynamical-accessibility report: the sub-Alfvenic condition
/// `|D Psi| <= 1` and the curvature condition
/// `D Psi lap(D Psi) + lap(Psi) D^2 Psi + D^2 Upsilon >= 0`.
pub struct RmhdDaReport {
    pub cond1: Mask,
    pub cond2: Mask,
    /// Points where `M'(u)` is too small to divide by.
    pub masked: Mask,
    pub cond1_fraction: f64,
    pub cond2_fraction: f64,
}

pub fn rmhd_da_conditions(profile: &RmhdProfile, u: &FieldGrid) -> RmhdDaReport {
    let n = u.values.len();
    let d_of = |f: &Profile1D, s: f64| -> f64 {
        // D g = g'(u) / M'(u)
        f.eval(s, 1) / profile.mag.eval(s, 1)
    };
    let d2_of = |f: &Profile1D, s: f64| -> f64 {
        // D^2 g = (1/M') d/du (D g) = (g'' M' - g' M'') / M'^3
        let m1 = profile.mag.eval(s, 1);
        let m2 = profile.mag.eval(s, 2);
        (f.eval(s, 2) * m1 - f.eval(s, 1) * m2) / (m1 * m1 * m1)
    };
    let dpsi_field = u.map(|s| d_of(&profile.stream, s));
    let psi_field = u.map(|s| profile.stream.eval(s, 0));
    let lap_dpsi = dpsi_field.laplacian();
    let lap_psi = psi_field.laplacian();
    let mut cond1 = vec![false; n];
    let mut cond2 = vec![false; n];
    let mut masked = vec![false; n];
    for idx in 0..n {
        let s = u.values[idx];
        let m1 = profile.mag.eval(s, 1);
        if m1.abs() < 1e-12 {
            masked[idx] = true;
            continue;
        }
        let dpsi = d_of(&profile.stream, s);
        cond1[idx] = dpsi.abs() <= 1.0 + 1e-12;
        match (lap_dpsi[idx], lap_psi[idx]) {
            (Some(ld), Some(lp)) => {
                let val = dpsi * ld + lp * d2_of(&profile.stream, s) + d2_of(&profile.upsilon, s);
                cond2[idx] = val >= -1e-9;
            }
            _ => masked[idx] = true,
        }
    }
    let masked = Mask { bits: masked };
    let unmasked = (n - masked.count()).max(1);
    let cond1 = Mask { bits: cond1 };
    let cond2 = Mask { bits: cond2 };
    let cond1_fraction = cond1.count() as f64 / unmasked as f64;
    let cond2_fraction = cond2.count() as f64 / unmasked as f64;
    RmhdDaReport {
        cond1,
        cond2,
        masked,
        cond1_fraction,
        cond2_fraction,
    }
}

/// The 2-D Euler (generalized Rayleigh) pointwise condition
/// `Psi'(u) V'(u) >= 0`.
pub fn euler_rayleigh(
    stream: &Profile1D,
    vort: &Profile1D,
    u: &FieldGrid,
) -> (Mask, f64) {
    let bits: Vec<bool> = u
        .values
        .iter()
        .map(|&s| stream.eval(s, 1) * vort.eval(s, 1) >= 0.0)
        .collect();
    let mask = Mask { bits };
    let f = mask.fraction();
    (mask, f)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catseye_values() {
        let spec = GridSpec::new(16, 17, 1.0);
        // a = 2 at the origin: ln(2 + sqrt(3)).
        let g = catseye_field(2.0, spec).unwrap();
        let j0 = 8; // y = 0 row
        assert!((g.at(0, j0) - (2.0 + 3.0f64.sqrt()).ln()).abs() < 1e-14);
        // a = 1: x-independent ln(cosh y).
        let g1 = catseye_field(1.0, spec).unwrap();
        for j in 0..17 {
            for i in 1..16 {
                assert!((g1.at(i, j) - g1.at(0, j)).abs() < 1e-14);
            }
        }
        assert!(catseye_field(0.5, spec).is_err());
    }

    #[test]
    fn catseye_solves_sinh_poisson_at_second_order() {
        // lap u = exp(-2u); halving h divides the max residual by ~4.
        let mut residuals = Vec::new();
        for n in [32, 64, 128] {
            let spec = GridSpec::new(n, n + 1, std::f64::consts::PI);
            let u = catseye_field(1.5, spec).unwrap();
            let (max_res, _) = pde_residual(&u, |s| (-2.0 * s).exp());
            residuals.push(max_res);
        }
        for w in residuals.windows(2) {
            let order = (w[0] / w[1]).log2();
            assert!(
                (order - 2.0).abs() < 0.2,
                "observed order {order}, residuals {residuals:?}"
            );
        }
    }

    #[test]
    fn quadratic_residual_exact() {
        let spec = GridSpec::new(16, 17, 1.0);
        let u = FieldGrid::from_fn(spec, |_, y| y * y);
        let (max_res, l2) = pde_residual(&u, |_| 2.0);
        assert!(max_res < 1e-10);
        assert!(l2 < 1e-10);
    }

    #[test]
    fn crmhd_equilibrium_zero_profiles() {
        // Phi' = a2 = a3 = 0 gives v_e = 0 and p_e = 2 beta x.
        let spec = GridSpec::new(8, 9, 1.0);
        let psi = FieldGrid::from_fn(spec, |x, y| 0.3 * x + 0.1 * y);
        let profile = CrmhdProfile {
            phi: Profile1D::zero(),
            a1: Profile1D::zero(),
            a2: Profile1D::zero(),
            a3: Profile1D::zero(),
            beta_e: 2.0,
        };
        let eq = crmhd_equilibrium(&profile, &psi).unwrap();
        assert_eq!(eq.resonant.count(), 0);
        for j in 0..9 {
            for i in 0..8 {
                let idx = j * 8 + i;
                assert!(eq.v_e.values[idx].abs() < 1e-14);
                assert!((eq.p_e.values[idx] - 2.0 * 2.0 * spec.x(i)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn crmhd_all_resonant() {
        // |Phi'|^2 = beta everywhere.
        let spec = GridSpec::new(8, 9, 1.0);
        let psi = FieldGrid::from_fn(spec, |x, _| x);
        let profile = CrmhdProfile {
            phi: Profile1D::Poly(vec![0.0, 1.0]), // Phi' = 1
            a1: Profile1D::zero(),
            a2: Profile1D::zero(),
            a3: Profile1D::zero(),
            beta_e: 1.0,
        };
        assert!(matches!(
            crmhd_equilibrium(&profile, &psi),
            Err(StabilityError::AllResonant)
        ));
    }

    #[test]
    fn crmhd_minors_constant_phi_prime() {
        // Phi' = 0, beta = 2: P2 = 1/2 at every unmasked point, P1 = 1.
        let spec = GridSpec::new(16, 17, 1.0);
        let psi = FieldGrid::from_fn(spec, |x, y| (x).sin() * 0.2 + 0.5 * y);
        let profile = CrmhdProfile {
            phi: Profile1D::zero(),
            a1: Profile1D::zero(),
            a2: Profile1D::zero(),
            a3: Profile1D::zero(),
            beta_e: 2.0,
        };
        let eq = crmhd_equilibrium(&profile, &psi).unwrap();
        let rep = crmhd_minors(&profile, &eq);
        for idx in 0..psi.values.len() {
            if rep.masked.bits[idx] {
                continue;
            }
            assert!((rep.p1.values[idx] - 1.0).abs() < 1e-14);
            assert!((rep.p2.values[idx] - 0.5).abs() < 1e-12);
            assert!(rep.sub_alfvenic.bits[idx]);
            assert!(rep.acoustic_window.bits[idx]);
        }
        assert!(rep.summary.acoustic_window_fraction > 0.99);
    }

    #[test]
    fn crmhd_minors_flags_super_acoustic() {
        // Phi' = 1 with beta = 1/2: |Phi'|^2 = 1 > min(1, beta) fails.
        let spec = GridSpec::new(8, 9, 1.0);
        let psi = FieldGrid::from_fn(spec, |x, y| 0.2 * x + y);
        let profile = CrmhdProfile {
            phi: Profile1D::Poly(vec![0.0, 1.0]),
            a1: Profile1D::zero(),
            a2: Profile1D::zero(),
            a3: Profile1D::zero(),
            beta_e: 0.5,
        };
        let eq = crmhd_equilibrium(&profile, &psi).unwrap();
        let rep = crmhd_minors(&profile, &eq);
        assert!(rep.summary.acoustic_window_fraction < 1e-12);
        // Still sub-Alfvenic in the RMHD sense.
        assert!(rep.summary.sub_alfvenic_fraction > 0.99);
    }

    #[test]
    fn islands_bounded_flow_ratio() {
        let spec = GridSpec::new(32, 33, std::f64::consts::PI);
        for nu in [0.0, 0.5, 3.0] {
            let isl = islands_with_flow(1.0, nu, 1.5, spec).unwrap();
            let max_dpsi = isl
                .dpsi
                .values
                .iter()
                .fold(0.0f64, |m, v| m.max(v.abs()));
            assert!(max_dpsi < 1.0, "nu = {nu}: {max_dpsi}");
            if nu == 0.0 {
                assert!(isl.stream_prime.values.iter().all(|&v| v == 0.0));
            }
        }
        assert!(islands_with_flow(0.0, 1.0, 1.5, spec).is_err());
    }

    #[test]
    fn rmhd_da_const_stream_passes() {
        let spec = GridSpec::new(16, 17, 1.0);
        let u = catseye_field(1.5, spec).unwrap();
        let profile = RmhdProfile {
            stream: Profile1D::constant(0.7),
            mag: Profile1D::Poly(vec![0.0, 1.0]),
            upsilon: Profile1D::zero(),
        };
        let rep = rmhd_da_conditions(&profile, &u);
        assert!((rep.cond1_fraction - 1.0).abs() < 1e-12);
        assert!((rep.cond2_fraction - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rmhd_da_alfvenic_marginal() {
        // Psi = M: D Psi = 1 exactly, condition 1 marginal everywhere.
        let spec = GridSpec::new(16, 17, 1.0);
        let u = catseye_field(1.5, spec).unwrap();
        let m = Profile1D::Sinh { amp: 1.0, rate: 1.0 };
        let profile = RmhdProfile {
            stream: m.clone(),
            mag: m,
            upsilon: Profile1D::zero(),
        };
        let rep = rmhd_da_conditions(&profile, &u);
        assert!((rep.cond1_fraction - 1.0).abs() < 1e-12);
    }

    #[test]
    fn euler_rayleigh_signs() {
        let spec = GridSpec::new(8, 9, 1.0);
        let u = FieldGrid::from_fn(spec, |x, y| x + y);
        let ident = Profile1D::Poly(vec![0.0, 1.0]);
        let (_, frac) = euler_rayleigh(&ident, &ident, &u);
        assert_eq!(frac, 1.0);
        let neg = Profile1D::Poly(vec![0.0, -1.0]);
        let (_, frac) = euler_rayleigh(&ident, &neg, &u);
        assert_eq!(frac, 0.0);
    }
}
