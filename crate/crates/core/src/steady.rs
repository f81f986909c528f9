//! Analytic dark-state basis of the all-to-all generator and long-time
//! state prediction.
//!
//! With `u_i = |1> - |i>` (`i = 2..n`) spanning the dark single-excitation
//! subspace, the generator has
//!
//! * zero eigenvalue on `(1/2) |u_i><u_j|` for all `i, j` in `2..n`;
//! * eigenvalue `-i omega0` on `|u_i><0| / sqrt 2` and `+i omega0` on
//!   `|0><u_i| / sqrt 2`.
//!
//! Projecting the flattened initial state onto the orthonormalized sets and
//! completing the trace with the vacuum gives the state at long times.
//!
//! All vectors here live in the `(n+1)^2` Liouville block of the
//! single-excitation sector. Embedding that block into the full `4^n` space
//! is an isometry, so inner products and Gram–Schmidt are unchanged.

use std::f64::consts::FRAC_1_SQRT_2;

use crate::entanglement::fidelity;
use crate::hilbert::{w_state, DensityMatrix, FlatState, PureState, Register, TOL_NORM};
use crate::linalg::{hermitian_part, hermiticity_residual, ONE};
use crate::sector::{sector_amplitudes, SectorMatrix};
use crate::{CMat, CVec, Error, Result, C64};

/// Residual norm below which Gram–Schmidt treats an input as dependent.
pub const RANK_TOL: f64 = 1e-9;
/// Largest anti-Hermitian residual tolerated before it is discarded.
pub const HERMITIZE_TOL: f64 = 1e-10;

/// Classical Gram–Schmidt in the given order with normalization.
pub fn gram_schmidt_vectors(vs: &[CVec], rank_tol: f64) -> Result<Vec<CVec>> {
    let mut out: Vec<CVec> = Vec::with_capacity(vs.len());
    for (position, v) in vs.iter().enumerate() {
        let mut u = v.clone();
        for q in &out {
            // proj_q(v) = <q, v> q for unit q
            let coeff = q.dotc(v);
            u.axpy(-coeff, q, ONE);
        }
        let residual = u.norm();
        if residual < rank_tol * v.norm().max(1.0) {
            return Err(Error::DependentVectors { position, residual });
        }
        out.push(u.unscale(residual));
    }
    Ok(out)
}

/// Gram–Schmidt over flattened operators of one register.
pub fn gram_schmidt(vs: &[FlatState]) -> Result<Vec<FlatState>> {
    let Some(first) = vs.first() else {
        return Ok(Vec::new());
    };
    let register = first.register();
    if let Some(bad) = vs.iter().find(|v| v.register() != register) {
        return Err(Error::DimensionMismatch { expected: register.n(), found: bad.register().n() });
    }
    let raw: Vec<CVec> = vs.iter().map(|v| v.entries().clone()).collect();
    gram_schmidt_vectors(&raw, RANK_TOL)?.into_iter().map(|v| FlatState::new(register, v)).collect()
}

fn require_pair(register: Register) -> Result<usize> {
    let n = register.n();
    if n < 2 {
        return Err(Error::InvalidArgument("steady bases need at least two emitters".into()));
    }
    Ok(n)
}

fn unit(d: usize, k: usize) -> CVec {
    let mut v = CVec::zeros(d);
    v[k] = ONE;
    v
}

/// `|1> - |i>` in sector coordinates.
fn dark_pair(d: usize, i: usize) -> CVec {
    unit(d, 1) - unit(d, i)
}

/// Zero-eigenvalue matrices `a_k` on the sector: the `n - 1` projectors
/// `(1/2)(|1>-|i>)(<1|-<i|)` (i ascending) followed by the `(n-1)(n-2)`
/// cross terms `(1/2)(|1>-|i>)(<1|-<j|)` (i, then j ascending).
pub fn zero_eigenbasis_sector(register: Register) -> Result<Vec<SectorMatrix>> {
    let n = require_pair(register)?;
    let d = n + 1;
    let outer = |i: usize, j: usize| (dark_pair(d, i) * dark_pair(d, j).adjoint()).scale(0.5);
    let mut out = Vec::with_capacity((n - 1) * (n - 1));
    for i in 2..=n {
        out.push(SectorMatrix::new(register, outer(i, i))?);
    }
    for i in 2..=n {
        for j in 2..=n {
            if i != j {
                out.push(SectorMatrix::new(register, outer(i, j))?);
            }
        }
    }
    Ok(out)
}

/// Full-space matrices of [`zero_eigenbasis_sector`].
pub fn zero_eigenbasis(register: Register) -> Result<Vec<CMat>> {
    register.require_full()?;
    zero_eigenbasis_sector(register)?.iter().map(SectorMatrix::embed).collect()
}

/// Sign of the `omega0` in an oscillatory eigenvalue `∓ i omega0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Oscillation {
    /// `|u><0|` coherences, eigenvalue `-i omega0`.
    Minus,
    /// `|0><u|` coherences, eigenvalue `+i omega0`.
    Plus,
}

/// Purely imaginary-eigenvalue matrices: `(|i><0| - |1><0|)/sqrt 2` tagged
/// [`Oscillation::Minus`] then `(|0><i| - |0><1|)/sqrt 2` tagged
/// [`Oscillation::Plus`], i ascending from 2.
pub fn oscillatory_eigenbasis_sector(register: Register) -> Result<Vec<(SectorMatrix, Oscillation)>> {
    let n = require_pair(register)?;
    let d = n + 1;
    let s = C64::new(FRAC_1_SQRT_2, 0.0);
    let mut out = Vec::with_capacity(2 * (n - 1));
    for i in 2..=n {
        let m = (unit(d, i) - unit(d, 1)) * unit(d, 0).adjoint() * s;
        out.push((SectorMatrix::new(register, m)?, Oscillation::Minus));
    }
    for i in 2..=n {
        let m = unit(d, 0) * (unit(d, i) - unit(d, 1)).adjoint() * s;
        out.push((SectorMatrix::new(register, m)?, Oscillation::Plus));
    }
    Ok(out)
}

pub fn oscillatory_eigenbasis(register: Register) -> Result<Vec<(CMat, Oscillation)>> {
    register.require_full()?;
    oscillatory_eigenbasis_sector(register)?.into_iter().map(|(m, tag)| Ok((m.embed()?, tag))).collect()
}

fn flat(m: &SectorMatrix) -> CVec {
    CVec::from_column_slice(m.entries().as_slice())
}

fn unflat(register: Register, v: &CVec) -> SectorMatrix {
    let d = register.n() + 1;
    SectorMatrix::new(register, CMat::from_column_slice(d, d, v.as_slice())).expect("sector-sized vector")
}

/// Orthonormal steady and oscillatory vectors, in flattened sector
/// coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct SteadyBasis {
    register: Register,
    a_vectors: Vec<CVec>,
    b_minus: Vec<CVec>,
    b_plus: Vec<CVec>,
    vacuum: CVec,
}

/// Builds the orthonormal basis.
///
/// The zero set enters Gram–Schmidt as the projector with `i = n`, then all
/// cross terms, then the remaining projectors (`i = 2..n-1`); for three
/// emitters this is the order `(a2, a3, a4, a1)`. Oscillatory sets enter in
/// ascending `i`.
pub fn steady_basis(register: Register) -> Result<SteadyBasis> {
    let n = require_pair(register)?;
    let zero = zero_eigenbasis_sector(register)?;
    let (projectors, cross) = zero.split_at(n - 1);
    let mut ordered: Vec<CVec> = Vec::with_capacity(zero.len());
    ordered.push(flat(&projectors[n - 2]));
    ordered.extend(cross.iter().map(flat));
    ordered.extend(projectors[..n - 2].iter().map(flat));
    let a_vectors = gram_schmidt_vectors(&ordered, RANK_TOL)?;

    let osc = oscillatory_eigenbasis_sector(register)?;
    let pick = |tag: Oscillation| -> Vec<CVec> {
        osc.iter().filter(|(_, t)| *t == tag).map(|(m, _)| flat(m)).collect()
    };
    let b_minus = gram_schmidt_vectors(&pick(Oscillation::Minus), RANK_TOL)?;
    let b_plus = gram_schmidt_vectors(&pick(Oscillation::Plus), RANK_TOL)?;

    let d = n + 1;
    let mut vacuum = CVec::zeros(d * d);
    vacuum[0] = ONE;
    Ok(SteadyBasis { register, a_vectors, b_minus, b_plus, vacuum })
}

impl SteadyBasis {
    pub fn register(&self) -> Register {
        self.register
    }

    pub fn a_matrices(&self) -> Vec<SectorMatrix> {
        self.a_vectors.iter().map(|v| unflat(self.register, v)).collect()
    }

    pub fn b_minus_matrices(&self) -> Vec<SectorMatrix> {
        self.b_minus.iter().map(|v| unflat(self.register, v)).collect()
    }

    pub fn b_plus_matrices(&self) -> Vec<SectorMatrix> {
        self.b_plus.iter().map(|v| unflat(self.register, v)).collect()
    }

    /// All basis vectors as full-space flattened states, in the order
    /// `A..., B_minus..., B_plus..., vacuum`.
    pub fn flat_states(&self) -> Result<Vec<FlatState>> {
        self.register.require_full()?;
        self.a_vectors
            .iter()
            .chain(&self.b_minus)
            .chain(&self.b_plus)
            .chain(std::iter::once(&self.vacuum))
            .map(|v| FlatState::from_matrix(self.register, &unflat(self.register, v).embed()?))
            .collect()
    }

    /// Gram matrix of every listed vector.
    pub fn gram(&self) -> CMat {
        let all: Vec<&CVec> = self
            .a_vectors
            .iter()
            .chain(&self.b_minus)
            .chain(&self.b_plus)
            .chain(std::iter::once(&self.vacuum))
            .collect();
        CMat::from_fn(all.len(), all.len(), |i, j| all[i].dotc(all[j]))
    }

    fn project(vectors: &[CVec], r0: &CVec) -> CVec {
        let mut out = CVec::zeros(r0.len());
        for v in vectors {
            out.axpy(v.dotc(r0), v, ONE);
        }
        out
    }

    /// Decomposes `|psi0><psi0|` onto the basis.
    pub fn prediction(&self, psi0: &PureState, omega0: f64, decay: f64) -> Result<FinalStatePrediction> {
        if psi0.register() != self.register {
            return Err(Error::DimensionMismatch { expected: self.register.n(), found: psi0.register().n() });
        }
        if !(decay >= 0.0 && decay.is_finite()) {
            return Err(Error::InvalidArgument(format!("decay rate {decay} must be >= 0")));
        }
        let r0 = flat(&SectorMatrix::projector(psi0)?);
        let steady = unflat(self.register, &Self::project(&self.a_vectors, &r0));
        let minus = unflat(self.register, &Self::project(&self.b_minus, &r0));
        let plus = unflat(self.register, &Self::project(&self.b_plus, &r0));
        Ok(FinalStatePrediction { register: self.register, steady, minus, plus, omega0, decay })
    }
}

/// Long-time state in closed form:
///
/// ```text
/// rho(t) = e^{-d t} S + e^{(-d/2 - i w) t} M + e^{(-d/2 + i w) t} P + c0(t) |0><0|
/// c0(t)  = 1 - e^{-d t} Tr S
/// ```
///
/// where `S`, `M`, `P` are the projections onto the zero and `∓ i omega0`
/// sets and `d` is the dark-state decay rate (`0` for exact all-to-all
/// coupling, `1 - alpha` for uniform coupling `alpha`). Dark coherences with
/// the vacuum decay at half the dark population rate.
#[derive(Debug, Clone, PartialEq)]
pub struct FinalStatePrediction {
    register: Register,
    steady: SectorMatrix,
    minus: SectorMatrix,
    plus: SectorMatrix,
    omega0: f64,
    decay: f64,
}

impl FinalStatePrediction {
    pub fn steady_part(&self) -> &SectorMatrix {
        &self.steady
    }

    pub fn oscillatory_parts(&self) -> (&SectorMatrix, &SectorMatrix) {
        (&self.minus, &self.plus)
    }

    pub fn decay_rate(&self) -> f64 {
        self.decay
    }

    /// Weight of the dark block, `Tr S`.
    pub fn dark_weight(&self) -> f64 {
        self.steady.trace().re
    }

    pub fn c0(&self, t: f64) -> f64 {
        1.0 - (-self.decay * t).exp() * self.dark_weight()
    }

    /// The predicted state at time `t` on the sector.
    pub fn evaluate(&self, t: f64) -> Result<SectorMatrix> {
        let damp = (-self.decay * t).exp();
        let half = (-0.5 * self.decay * t).exp();
        let phase_minus = C64::from_polar(half, -self.omega0 * t);
        let phase_plus = C64::from_polar(half, self.omega0 * t);
        let mut m = self.steady.entries().scale(damp)
            + self.minus.entries() * phase_minus
            + self.plus.entries() * phase_plus;
        m[(0, 0)] += C64::new(self.c0(t), 0.0);
        let residual = hermiticity_residual(&m);
        if residual > HERMITIZE_TOL {
            return Err(Error::InvalidState(format!(
                "predicted state has anti-Hermitian residual {residual:e}"
            )));
        }
        SectorMatrix::new(self.register, hermitian_part(&m))
    }

    pub fn evaluate_full(&self, t: f64) -> Result<DensityMatrix> {
        self.evaluate(t)?.to_density_matrix()
    }
}

/// Long-time state of the all-to-all network (`alpha = 1`).
pub fn predict_final(basis: &SteadyBasis, psi0: &PureState, omega0: f64, t: f64) -> Result<DensityMatrix> {
    basis.prediction(psi0, omega0, 0.0)?.evaluate_full(t)
}

/// Approximate state for uniform coupling `alpha` close to one: dark
/// populations decay at `1 - alpha`, dark-vacuum coherences at `(1 - alpha)/2`.
pub fn predict_quasi(
    basis: &SteadyBasis,
    alpha: f64,
    psi0: &PureState,
    omega0: f64,
    t: f64,
) -> Result<DensityMatrix> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::InvalidArgument(format!("alpha = {alpha} outside [0, 1]")));
    }
    basis.prediction(psi0, omega0, 1.0 - alpha)?.evaluate_full(t)
}

/// Steadiness and entanglement class of an initial state.
#[derive(Debug, Clone, PartialEq)]
pub struct Classification {
    /// Single-excitation state orthogonal to the W state, no vacuum part.
    pub steady: bool,
    /// Steady with all coefficient moduli equal to `1/sqrt(n)`.
    pub max_entangled: bool,
    /// Fidelity between the initial state and its predicted final state.
    pub fidelity_initial_final: f64,
    pub w_overlap: f64,
    pub vacuum_weight: f64,
    pub outside_weight: f64,
}

pub fn classify_initial(basis: &SteadyBasis, psi0: &PureState) -> Result<Classification> {
    let register = psi0.register();
    let n = register.n() as f64;
    let outside_weight = psi0.weight_outside_sector();
    let vacuum_weight = psi0.amplitudes()[0].norm_sqr();
    let w_overlap = w_state(register).inner(psi0).norm();
    let steady = outside_weight <= TOL_NORM && vacuum_weight <= TOL_NORM && w_overlap <= TOL_NORM;
    let target = 1.0 / n.sqrt();
    let max_entangled =
        steady && psi0.excitation_coefficients().iter().all(|c| (c.norm() - target).abs() <= TOL_NORM);
    let fidelity_initial_final = if outside_weight <= TOL_NORM {
        // F(|psi><psi|, rho) = sqrt(<psi|rho|psi>)
        let rho = basis.prediction(psi0, 0.0, 0.0)?.evaluate(0.0)?;
        rho.expectation(psi0)?.re.clamp(0.0, 1.0).sqrt()
    } else {
        0.0
    };
    Ok(Classification {
        steady,
        max_entangled,
        fidelity_initial_final,
        w_overlap,
        vacuum_weight,
        outside_weight,
    })
}

/// Fidelity between two full-space predictions or states.
pub fn state_fidelity(a: &DensityMatrix, b: &DensityMatrix) -> Result<f64> {
    fidelity(a, b)
}

/// `true` when the state lives in the single-excitation sector.
pub fn in_sector(psi: &PureState) -> bool {
    sector_amplitudes(psi).is_ok()
}
