//! Closed-form two- and three-emitter results used as ground truth.
//!
//! Two-emitter matrices are in the computational basis
//! `{|gg>, |eg>, |ge>, |ee>}` of this crate (index 1 = emitter 1 excited,
//! index 2 = emitter 2 excited). The evolving state starts with emitter 2
//! excited.

use std::f64::consts::SQRT_2;

use crate::couplings::{all_to_all, decompose};
use crate::dynamics::{evolve_expm, evolve_ode, evolve_reduced, OdeOptions, TimeGrid};
use crate::entanglement::{concurrence, fidelity, multipartite_negativity};
use crate::hilbert::{single_excitation_ket, w_state, DensityMatrix, Register};
use crate::linalg::max_abs_diff;
use crate::liouvillian::{build_liouvillian, spectrum, Form, Representation};
use crate::sector::SectorMatrix;
use crate::steady::{predict_quasi, steady_basis};
use crate::{CMat, Error, Result, C64};

/// Parameters of the symmetric two-emitter network.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoQubitParams {
    pub alpha: f64,
    pub g: f64,
    pub omega0: f64,
}

impl TwoQubitParams {
    pub fn new(alpha: f64, g: f64, omega0: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&alpha) {
            return Err(Error::InvalidArgument(format!("alpha = {alpha} outside [0, 1]")));
        }
        if !g.is_finite() || !omega0.is_finite() {
            return Err(Error::InvalidArgument("g and omega0 must be finite".into()));
        }
        Ok(Self { alpha, g, omega0 })
    }
}

fn reg2() -> Register {
    Register::new(2).expect("two emitters")
}

fn check_time(t: f64) -> Result<()> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::InvalidArgument(format!("time {t} must be finite and >= 0")));
    }
    Ok(())
}

fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// Exact state at time `t` from `|eg>` (emitter 2 excited):
///
/// ```text
/// rho = 1/4 [[4 - 2 E1, 0, 0, 0],
///            [0, E1 - 2 E3, E2 - 2i E4, 0],
///            [0, E2 + 2i E4, E1 + 2 E3, 0],
///            [0, 0, 0, 0]]
/// E1 = e^{(a-1)t} + e^{-(a+1)t},  E2 = e^{-(a+1)t} - e^{(a-1)t},
/// E3 = cos(2gt) e^{-t},           E4 = sin(2gt) e^{-t}
/// ```
pub fn exact_rho_eg(t: f64, p: TwoQubitParams) -> Result<DensityMatrix> {
    check_time(t)?;
    let slow = ((p.alpha - 1.0) * t).exp();
    let fast = (-(p.alpha + 1.0) * t).exp();
    let e1 = slow + fast;
    let e2 = fast - slow;
    let e3 = (2.0 * p.g * t).cos() * (-t).exp();
    let e4 = (2.0 * p.g * t).sin() * (-t).exp();
    let mut m = CMat::zeros(4, 4);
    m[(0, 0)] = re((4.0 - 2.0 * e1) / 4.0);
    m[(1, 1)] = re((e1 - 2.0 * e3) / 4.0);
    m[(2, 2)] = re((e1 + 2.0 * e3) / 4.0);
    m[(1, 2)] = C64::new(e2, -2.0 * e4) / 4.0;
    m[(2, 1)] = C64::new(e2, 2.0 * e4) / 4.0;
    DensityMatrix::new(reg2(), m)
}

/// `(1/2) sqrt(e^{2(a-1)t} + e^{-2(a+1)t} - 2 e^{-2t} cos(4gt))`.
pub fn exact_concurrence_eg(t: f64, p: TwoQubitParams) -> Result<f64> {
    check_time(t)?;
    let a = p.alpha;
    let r = (2.0 * (a - 1.0) * t).exp() + (-2.0 * (a + 1.0) * t).exp()
        - 2.0 * (-2.0 * t).exp() * (4.0 * p.g * t).cos();
    Ok(0.5 * r.max(0.0).sqrt())
}

/// Predicted state from `|eg>`: weight `e^{(a-1)t}/2` on the antisymmetric
/// state, the rest in vacuum.
pub fn theory_rho_eg(t: f64, alpha: f64) -> Result<DensityMatrix> {
    check_time(t)?;
    TwoQubitParams::new(alpha, 0.0, 0.0)?;
    let e = ((alpha - 1.0) * t).exp();
    let mut m = CMat::zeros(4, 4);
    m[(0, 0)] = re((4.0 - 2.0 * e) / 4.0);
    m[(1, 1)] = re(e / 4.0);
    m[(2, 2)] = re(e / 4.0);
    m[(1, 2)] = re(-e / 4.0);
    m[(2, 1)] = re(-e / 4.0);
    DensityMatrix::new(reg2(), m)
}

/// `(1/2) e^{(a-1)t}`.
pub fn theory_concurrence_eg(t: f64, alpha: f64) -> Result<f64> {
    check_time(t)?;
    TwoQubitParams::new(alpha, 0.0, 0.0)?;
    Ok(0.5 * ((alpha - 1.0) * t).exp())
}

/// Fidelity between [`exact_rho_eg`] and [`theory_rho_eg`]; independent of `g`.
pub fn fidelity_closed_eg(t: f64, alpha: f64) -> Result<f64> {
    check_time(t)?;
    TwoQubitParams::new(alpha, 0.0, 0.0)?;
    let e = ((alpha - 1.0) * t).exp();
    let r = e * e + (-2.0 * t).exp() - 4.0 * e - 2.0 * (-(alpha + 1.0) * t).exp() + 4.0;
    Ok(0.5 * (e + r.max(0.0).sqrt()))
}

/// The sixteen generator eigenvalues for `alpha = 1`.
pub fn l_spectrum_two_qubit(omega0: f64, g: f64) -> Vec<C64> {
    let c = C64::new;
    vec![
        c(0.0, 0.0),
        c(0.0, 0.0),
        c(0.0, -(omega0 - g)),
        c(0.0, omega0 - g),
        c(-1.0, -2.0 * g),
        c(-1.0, 2.0 * g),
        c(-2.0, 0.0),
        c(-2.0, 0.0),
        c(-1.0, -(omega0 + g)),
        c(-1.0, -(omega0 + g)),
        c(-1.0, omega0 + g),
        c(-1.0, omega0 + g),
        c(-1.0, -2.0 * omega0),
        c(-1.0, 2.0 * omega0),
        c(-2.0, -(omega0 - g)),
        c(-2.0, omega0 - g),
    ]
}

/// Orthonormal three-emitter steady matrices `A1..A4` and oscillatory
/// matrices `B1..B4` on the sector `{|0>, |1>, |2>, |3>}`.
#[derive(Debug, Clone)]
pub struct ThreeQubitReference {
    pub a: [SectorMatrix; 4],
    pub b: [SectorMatrix; 4],
}

pub fn three_qubit_steady_reference() -> ThreeQubitReference {
    let r = Register::new(3).expect("three emitters");
    let ket = |coeffs: [f64; 4]| crate::CVec::from_iterator(4, coeffs.iter().map(|&x| re(x)));
    let outer = |u: &crate::CVec, v: &crate::CVec, s: f64| (u * v.adjoint()).scale(s);
    let mat = |m: CMat| SectorMatrix::new(r, m).expect("4x4 sector matrix");
    let s3 = 3f64.sqrt();
    let e = |k: usize| {
        let mut c = [0.0; 4];
        c[k] = 1.0;
        ket(c)
    };
    let (k0, k1, k2, k3) = (e(0), e(1), e(2), e(3));

    let a1 = outer(&(&k1 - &k3), &(&k1 - &k3), 0.5);
    let a2 = (outer(&(&k1 + &k3), &(&k1 - &k3), 1.0) + outer(&k2, &(&k3 - &k1), 2.0)).scale(1.0 / (2.0 * s3));
    let a3 = (outer(&(&k1 - &k3), &(&k1 + &k3), 1.0) + outer(&(&k3 - &k1), &k2, 2.0)).scale(1.0 / (2.0 * s3));
    let a4 = (outer(&(&k1 + &k3), &(&k1 + &k3), 1.0) + outer(&k2, &k2, 4.0)
        - outer(&k2, &k1, 2.0)
        - outer(&k2, &k3, 2.0)
        - outer(&k1, &k2, 2.0)
        - outer(&k3, &k2, 2.0))
    .scale(1.0 / 6.0);

    let b12 = (&k2 - &k1).unscale(SQRT_2);
    let b123 = (&k3 * re(2.0) - &k1 - &k2).unscale(6f64.sqrt());
    let b1 = outer(&b12, &k0, 1.0);
    let b2 = outer(&b123, &k0, 1.0);
    let b3 = outer(&k0, &b12, 1.0);
    let b4 = outer(&k0, &b123, 1.0);
    ThreeQubitReference { a: [mat(a1), mat(a2), mat(a3), mat(a4)], b: [mat(b1), mat(b2), mat(b3), mat(b4)] }
}

/// Max distance between two vectors after removing the best global phase
/// of `b` relative to `a`.
pub fn phase_aligned_distance(a: &CMat, b: &CMat) -> f64 {
    let ov: C64 = b.iter().zip(a.iter()).map(|(x, y)| x.conj() * y).sum();
    let phase = if ov.norm() > 0.0 { ov / ov.norm() } else { re(1.0) };
    max_abs_diff(a, &(b * phase))
}

/// Greedy nearest-neighbour matching of two eigenvalue multisets; returns
/// the largest pairing distance, or infinity for unequal sizes.
pub fn multiset_distance(expected: &[C64], found: &[C64]) -> f64 {
    if expected.len() != found.len() {
        return f64::INFINITY;
    }
    let mut used = vec![false; found.len()];
    let mut worst: f64 = 0.0;
    for e in expected {
        let (k, d) = found
            .iter()
            .enumerate()
            .filter(|(k, _)| !used[*k])
            .map(|(k, f)| (k, (f - e).norm()))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("sizes match");
        used[k] = true;
        worst = worst.max(d);
    }
    worst
}

/// One oracle comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub max_err: f64,
}

impl Check {
    fn new(name: &str, max_err: f64, tol: f64) -> Self {
        Self { name: name.to_string(), pass: max_err.is_finite() && max_err < tol, max_err }
    }

    /// `<name> pass|fail max_err=<float>`.
    pub fn line(&self) -> String {
        format!("{} {} max_err={:e}", self.name, if self.pass { "pass" } else { "fail" }, self.max_err)
    }
}

pub const ORACLE_ALPHAS: [f64; 4] = [0.0, 0.5, 0.9, 1.0];
pub const ORACLE_GS: [f64; 3] = [0.0, 0.6, 5.0];
pub const ORACLE_OMEGA0: f64 = 10.0;

/// `t in [0, 10]`, 101 points.
pub fn oracle_grid() -> TimeGrid {
    TimeGrid::linear(0.0, 10.0, 101).expect("valid grid")
}

pub fn check_spectrum() -> Result<Check> {
    let mut worst: f64 = 0.0;
    for (w0, g) in [(10.0, 0.0), (10.0, 0.6), (10.0, 5.0)] {
        let c = all_to_all(reg2(), 1.0, Some(g), w0)?;
        let l = build_liouvillian(&c, Form::PerPair, Representation::Dense)?;
        let found = spectrum(&l, false)?.eigenvalues;
        worst = worst.max(multiset_distance(&l_spectrum_two_qubit(w0, g), &found));
    }
    Ok(Check::new("two_qubit_spectrum", worst, 1e-9))
}

/// Max elementwise error of an engine against the exact `|eg>` state.
pub fn check_exact_dynamics(use_ode: bool) -> Result<Check> {
    let grid = oracle_grid();
    let psi = single_excitation_ket(2, reg2())?;
    let rho0 = psi.projector()?;
    let mut worst: f64 = 0.0;
    for &alpha in &ORACLE_ALPHAS {
        for &g in &ORACLE_GS {
            let c = all_to_all(reg2(), alpha, Some(g), ORACLE_OMEGA0)?;
            let l = build_liouvillian(&c, Form::PerPair, Representation::Dense)?;
            let traj = if use_ode {
                evolve_ode(&l, &rho0, &grid, OdeOptions::for_omega0(ORACLE_OMEGA0))?
            } else {
                evolve_expm(&l, &rho0, &grid)?
            };
            let p = TwoQubitParams::new(alpha, g, ORACLE_OMEGA0)?;
            for (t, s) in traj.iter() {
                worst = worst.max(max_abs_diff(s.entries(), exact_rho_eg(t, p)?.entries()));
            }
        }
    }
    let name = if use_ode { "exact_dynamics_ode" } else { "exact_dynamics_expm" };
    Ok(Check::new(name, worst, 1e-8))
}

/// Concurrence of the propagated `|eg>` state, fidelity against the quasi
/// prediction, and the spread of that fidelity over `g`.
pub fn check_concurrence_fidelity() -> Result<[Check; 3]> {
    let grid = oracle_grid();
    let reg = reg2();
    let psi = single_excitation_ket(2, reg)?;
    let rho0 = psi.projector()?;
    let basis = steady_basis(reg)?;
    let (mut c_err, mut f_err, mut spread): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for &alpha in &ORACLE_ALPHAS {
        let mut per_g: Vec<Vec<f64>> = Vec::new();
        for &g in &ORACLE_GS {
            let c = all_to_all(reg, alpha, Some(g), ORACLE_OMEGA0)?;
            let l = build_liouvillian(&c, Form::PerPair, Representation::Dense)?;
            let traj = evolve_expm(&l, &rho0, &grid)?;
            let p = TwoQubitParams::new(alpha, g, ORACLE_OMEGA0)?;
            let mut fs = Vec::with_capacity(grid.len());
            for (t, s) in traj.iter() {
                c_err = c_err.max((concurrence(s)? - exact_concurrence_eg(t, p)?).abs());
                let predicted = predict_quasi(&basis, alpha, &psi, ORACLE_OMEGA0, t)?;
                let f = fidelity(s, &predicted)?;
                f_err = f_err.max((f - fidelity_closed_eg(t, alpha)?).abs());
                fs.push(f);
            }
            per_g.push(fs);
        }
        for k in 0..grid.len() {
            let lo = per_g.iter().map(|v| v[k]).fold(f64::INFINITY, f64::min);
            let hi = per_g.iter().map(|v| v[k]).fold(f64::NEG_INFINITY, f64::max);
            spread = spread.max(hi - lo);
        }
    }
    Ok([
        Check::new("concurrence_closed_form", c_err, 1e-8),
        Check::new("fidelity_closed_form", f_err, 1e-8),
        Check::new("fidelity_independent_of_g", spread, 1e-8),
    ])
}

/// `predict_quasi` for `|eg>` against the closed-form prediction.
pub fn check_quasi_prediction() -> Result<Check> {
    let reg = reg2();
    let basis = steady_basis(reg)?;
    let psi = single_excitation_ket(2, reg)?;
    let mut worst: f64 = 0.0;
    for &alpha in &ORACLE_ALPHAS {
        for &t in oracle_grid().times() {
            let a = predict_quasi(&basis, alpha, &psi, ORACLE_OMEGA0, t)?;
            worst = worst.max(max_abs_diff(a.entries(), theory_rho_eg(t, alpha)?.entries()));
        }
    }
    Ok(Check::new("quasi_prediction_two_qubit", worst, 1e-12))
}

pub fn check_three_qubit_basis() -> Result<Check> {
    let basis = steady_basis(Register::new(3)?)?;
    let reference = three_qubit_steady_reference();
    let got = basis
        .a_matrices()
        .into_iter()
        .chain(basis.b_minus_matrices())
        .chain(basis.b_plus_matrices())
        .collect::<Vec<_>>();
    let expected = reference.a.iter().chain(reference.b.iter()).collect::<Vec<_>>();
    let worst = if got.len() == expected.len() {
        got.iter()
            .zip(expected)
            .map(|(g, e)| phase_aligned_distance(e.entries(), g.entries()))
            .fold(0.0, f64::max)
    } else {
        f64::INFINITY
    };
    Ok(Check::new("three_qubit_steady_basis", worst, 1e-12))
}

pub fn check_w_negativity() -> Result<Check> {
    let mut worst: f64 = 0.0;
    for n in 2..=8 {
        let r = Register::new(n)?;
        let expected = 2.0 * ((n - 1) as f64).sqrt() / n as f64;
        let got = multipartite_negativity(&w_state(r).projector()?)?;
        worst = worst.max((got - expected).abs());
    }
    Ok(Check::new("w_state_negativity", worst, 1e-10))
}

pub fn check_reduced_vs_full() -> Result<Check> {
    let r = Register::new(4)?;
    let c = all_to_all(r, 0.9, Some(0.3), ORACLE_OMEGA0)?;
    let psi = w_state(r);
    let grid = TimeGrid::linear(0.0, 5.0, 11)?;
    let full =
        evolve_expm(&build_liouvillian(&c, Form::PerPair, Representation::Dense)?, &psi.projector()?, &grid)?;
    let reduced = evolve_reduced(&c, &psi, &grid)?.to_full()?;
    let worst = full
        .states()
        .iter()
        .zip(reduced.states())
        .map(|(a, b)| max_abs_diff(a.entries(), b.entries()))
        .fold(0.0, f64::max);
    Ok(Check::new("reduced_vs_full", worst, 1e-9))
}

pub fn check_forms_agree() -> Result<Check> {
    let mut worst: f64 = 0.0;
    for (n, alpha, g) in [(2, 0.3, 0.6), (3, 1.0, 0.0), (3, -0.4, 1.2), (4, 0.9, 5.0)] {
        let c = all_to_all(Register::new(n)?, alpha, Some(g), ORACLE_OMEGA0)?;
        let a = build_liouvillian(&c, Form::PerPair, Representation::Dense)?;
        let b = build_liouvillian(&c, Form::Collective, Representation::Dense)?;
        worst = worst.max(max_abs_diff(&a.to_dense()?, &b.to_dense()?));
        worst = worst.max(max_abs_diff(&decompose(&c)?.reconstruct().map(|z| re(z.re)), &c.gamma().map(re)));
    }
    Ok(Check::new("per_pair_vs_collective", worst, 1e-12))
}

/// Every oracle comparison, in a fixed order.
pub fn validation_suite() -> Result<Vec<Check>> {
    let mut out = vec![check_spectrum()?, check_exact_dynamics(false)?, check_exact_dynamics(true)?];
    out.extend(check_concurrence_fidelity()?);
    out.push(check_quasi_prediction()?);
    out.push(check_three_qubit_basis()?);
    out.push(check_w_negativity()?);
    out.push(check_reduced_vs_full()?);
    out.push(check_forms_agree()?);
    Ok(out)
}
