//! Basis conventions, state types and the flatten/unflatten algebra.

use std::f64::consts::PI;

use crate::linalg::{hermitian_eigenvalues, hermiticity_residual, trace};
use crate::{CMat, CVec, Error, Result, C64};

/// Largest register accepted by operations on the full `4^n` Liouville space.
pub const N_MAX_FULL: usize = 10;
/// Largest register accepted by single-excitation sector operations.
pub const N_MAX_SECTOR: usize = 16;

pub const TOL_NORM: f64 = 1e-10;
pub const TOL_HERM: f64 = 1e-10;
pub const TOL_TRACE: f64 = 1e-10;
pub const TOL_PSD: f64 = 1e-8;

/// Number of emitters in the network.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Register {
    n: usize,
}

impl Register {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 || n > N_MAX_SECTOR {
            return Err(Error::RegisterSize { n, max: N_MAX_SECTOR });
        }
        Ok(Self { n })
    }

    pub fn n(self) -> usize {
        self.n
    }

    /// Hilbert-space dimension `2^n`.
    pub fn dim(self) -> usize {
        1 << self.n
    }

    /// Liouville-space dimension `4^n`.
    pub fn liouville_dim(self) -> usize {
        1 << (2 * self.n)
    }

    /// Rejects registers too large for full-space matrices.
    pub fn require_full(self) -> Result<Self> {
        if self.n > N_MAX_FULL {
            return Err(Error::RegisterSize { n: self.n, max: N_MAX_FULL });
        }
        Ok(self)
    }

    /// Computational index of the single-excitation ket `|i>`; `0` is vacuum.
    pub fn excitation_index(self, i: usize) -> Result<usize> {
        if i > self.n {
            return Err(Error::IndexOutOfRange { index: i, limit: self.n });
        }
        Ok(if i == 0 { 0 } else { 1 << (i - 1) })
    }
}

/// Normalized state vector of length `2^n`.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    register: Register,
    amplitudes: CVec,
}

impl PureState {
    pub fn new(register: Register, amplitudes: CVec) -> Result<Self> {
        if amplitudes.len() != register.dim() {
            return Err(Error::DimensionMismatch { expected: register.dim(), found: amplitudes.len() });
        }
        let norm = amplitudes.norm();
        if (norm - 1.0).abs() > TOL_NORM {
            return Err(Error::InvalidState(format!("state norm {norm} differs from 1")));
        }
        Ok(Self { register, amplitudes })
    }

    /// Builds a state from unnormalized amplitudes, normalizing them.
    pub fn normalized(register: Register, amplitudes: CVec) -> Result<Self> {
        let norm = amplitudes.norm();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::InvalidState("zero or non-finite amplitude vector".into()));
        }
        Self::new(register, amplitudes.unscale(norm))
    }

    /// Builds a normalized state from `(computational index, amplitude)` pairs.
    pub fn from_sparse(register: Register, entries: &[(usize, C64)]) -> Result<Self> {
        let mut v = CVec::zeros(register.dim());
        for &(index, amp) in entries {
            if index >= register.dim() {
                return Err(Error::IndexOutOfRange { index, limit: register.dim() - 1 });
            }
            v[index] += amp;
        }
        Self::normalized(register, v)
    }

    /// Builds a state from single-excitation coefficients `c_1..c_n`.
    pub fn from_excitation_coefficients(register: Register, coeffs: &[C64]) -> Result<Self> {
        if coeffs.len() != register.n() {
            return Err(Error::DimensionMismatch { expected: register.n(), found: coeffs.len() });
        }
        let entries: Vec<(usize, C64)> = coeffs.iter().enumerate().map(|(k, &c)| (1usize << k, c)).collect();
        Self::from_sparse(register, &entries)
    }

    pub fn register(&self) -> Register {
        self.register
    }

    pub fn amplitudes(&self) -> &CVec {
        &self.amplitudes
    }

    /// Amplitude on `|i>` (vacuum for `i = 0`).
    pub fn excitation_amplitude(&self, i: usize) -> Result<C64> {
        Ok(self.amplitudes[self.register.excitation_index(i)?])
    }

    /// Coefficients `c_1..c_n` on the single-excitation kets.
    pub fn excitation_coefficients(&self) -> Vec<C64> {
        (0..self.register.n()).map(|k| self.amplitudes[1 << k]).collect()
    }

    /// Squared norm of the part outside `span{|0>, |1>, ..., |n>}`.
    pub fn weight_outside_sector(&self) -> f64 {
        self.amplitudes
            .iter()
            .enumerate()
            .filter(|(idx, _)| idx.count_ones() > 1)
            .map(|(_, a)| a.norm_sqr())
            .sum()
    }

    pub fn inner(&self, other: &PureState) -> C64 {
        self.amplitudes.dotc(&other.amplitudes)
    }

    /// `|psi><psi|`; requires a full-space register.
    pub fn projector(&self) -> Result<DensityMatrix> {
        self.register.require_full()?;
        let m = &self.amplitudes * self.amplitudes.adjoint();
        Ok(DensityMatrix { register: self.register, entries: m })
    }
}

/// Deviation of a matrix from the density-matrix constraints.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Physicality {
    pub trace_error: f64,
    pub hermiticity_residual: f64,
    pub min_eigenvalue: f64,
}

impl Physicality {
    pub fn of(m: &CMat) -> Self {
        let tr = trace(m);
        Self {
            trace_error: (tr - C64::new(1.0, 0.0)).norm(),
            hermiticity_residual: hermiticity_residual(m),
            min_eigenvalue: hermitian_eigenvalues(m).first().copied().unwrap_or(0.0),
        }
    }

    pub fn within(&self, tol_trace: f64, tol_herm: f64, tol_psd: f64) -> bool {
        self.trace_error <= tol_trace
            && self.hermiticity_residual <= tol_herm
            && self.min_eigenvalue >= -tol_psd
    }
}

/// Hermitian, unit-trace, positive semidefinite `2^n x 2^n` operator.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    register: Register,
    entries: CMat,
}

impl DensityMatrix {
    pub fn new(register: Register, entries: CMat) -> Result<Self> {
        Self::with_tolerances(register, entries, TOL_TRACE, TOL_HERM, TOL_PSD)
    }

    pub fn with_tolerances(
        register: Register,
        entries: CMat,
        tol_trace: f64,
        tol_herm: f64,
        tol_psd: f64,
    ) -> Result<Self> {
        register.require_full()?;
        let dim = register.dim();
        if entries.shape() != (dim, dim) {
            return Err(Error::DimensionMismatch { expected: dim, found: entries.nrows() });
        }
        let p = Physicality::of(&entries);
        if !p.within(tol_trace, tol_herm, tol_psd) {
            return Err(Error::InvalidState(format!(
                "not a density matrix: trace error {:e}, hermiticity residual {:e}, min eigenvalue {:e}",
                p.trace_error, p.hermiticity_residual, p.min_eigenvalue
            )));
        }
        Ok(Self { register, entries })
    }

    /// Wraps a matrix without checking physicality. Shape is still checked.
    pub fn unchecked(register: Register, entries: CMat) -> Result<Self> {
        register.require_full()?;
        let dim = register.dim();
        if entries.shape() != (dim, dim) {
            return Err(Error::DimensionMismatch { expected: dim, found: entries.nrows() });
        }
        Ok(Self { register, entries })
    }

    pub fn vacuum(register: Register) -> Result<Self> {
        register.require_full()?;
        let mut m = CMat::zeros(register.dim(), register.dim());
        m[(0, 0)] = C64::new(1.0, 0.0);
        Ok(Self { register, entries: m })
    }

    pub fn register(&self) -> Register {
        self.register
    }

    pub fn entries(&self) -> &CMat {
        &self.entries
    }

    pub fn into_entries(self) -> CMat {
        self.entries
    }

    pub fn physicality(&self) -> Physicality {
        Physicality::of(&self.entries)
    }

    /// `<psi| rho |psi>`.
    pub fn expectation(&self, psi: &PureState) -> Result<C64> {
        if psi.register() != self.register {
            return Err(Error::DimensionMismatch { expected: self.register.n(), found: psi.register().n() });
        }
        let a = psi.amplitudes();
        Ok(a.dotc(&(&self.entries * a)))
    }

    pub fn flatten(&self) -> FlatState {
        FlatState { register: self.register, entries: flatten(&self.entries) }
    }
}

/// Column-stacked `4^n` vector form of an operator.
#[derive(Debug, Clone, PartialEq)]
pub struct FlatState {
    register: Register,
    entries: CVec,
}

impl FlatState {
    pub fn new(register: Register, entries: CVec) -> Result<Self> {
        register.require_full()?;
        if entries.len() != register.liouville_dim() {
            return Err(Error::DimensionMismatch {
                expected: register.liouville_dim(),
                found: entries.len(),
            });
        }
        Ok(Self { register, entries })
    }

    pub fn from_matrix(register: Register, m: &CMat) -> Result<Self> {
        register.require_full()?;
        if m.shape() != (register.dim(), register.dim()) {
            return Err(Error::DimensionMismatch { expected: register.dim(), found: m.nrows() });
        }
        Ok(Self { register, entries: flatten(m) })
    }

    pub fn register(&self) -> Register {
        self.register
    }

    pub fn entries(&self) -> &CVec {
        &self.entries
    }

    pub fn into_entries(self) -> CVec {
        self.entries
    }

    pub fn unflatten(&self) -> CMat {
        let d = self.register.dim();
        CMat::from_column_slice(d, d, self.entries.as_slice())
    }
}

/// Column-stacks a matrix: `[[a, b], [c, d]] -> (a, c, b, d)`.
pub fn flatten(m: &CMat) -> CVec {
    // nalgebra stores matrices column-major, so the storage order is the
    // flattening order.
    CVec::from_column_slice(m.as_slice())
}

/// Inverse of [`flatten`]; the length must be a power of four.
pub fn unflatten(v: &CVec) -> Result<CMat> {
    let len = v.len();
    if len == 0 || !len.is_power_of_two() || !len.trailing_zeros().is_multiple_of(2) {
        return Err(Error::InvalidArgument(format!("flattened length {len} is not a power of four")));
    }
    let d = 1usize << (len.trailing_zeros() / 2);
    Ok(CMat::from_column_slice(d, d, v.as_slice()))
}

/// The computational basis state with emitter `i` excited; vacuum for `i = 0`.
pub fn single_excitation_ket(i: usize, register: Register) -> Result<PureState> {
    let idx = register.excitation_index(i)?;
    let mut v = CVec::zeros(register.dim());
    v[idx] = C64::new(1.0, 0.0);
    PureState::new(register, v)
}

/// Equal-amplitude superposition of all single-excitation kets.
pub fn w_state(register: Register) -> PureState {
    let c = C64::new(1.0 / (register.n() as f64).sqrt(), 0.0);
    let coeffs = vec![c; register.n()];
    PureState::from_excitation_coefficients(register, &coeffs).expect("W state coefficients are normalized")
}

/// Dark, maximally entangled state with discrete-Fourier phases
/// `c_i = exp(2 pi i k (i - 1) / n) / sqrt(n)`.
///
/// Every `k` in `1..n` gives coefficients of equal modulus that sum to zero,
/// so the state is orthogonal to the W state and lies in the span of the
/// antisymmetric pairs `|i> - |j>`.
pub fn max_entangled_steady(register: Register, k: usize) -> Result<PureState> {
    let n = register.n();
    if n < 2 {
        return Err(Error::InvalidArgument("a dark state needs at least two emitters".into()));
    }
    if k == 0 || k >= n {
        return Err(Error::InvalidArgument(format!(
            "phase index {k} outside 1..={}; k = 0 is the decaying W state",
            n - 1
        )));
    }
    let scale = 1.0 / (n as f64).sqrt();
    let coeffs: Vec<C64> =
        (0..n).map(|m| C64::from_polar(scale, 2.0 * PI * (k * m) as f64 / n as f64)).collect();
    PureState::from_excitation_coefficients(register, &coeffs)
}

/// Named six-emitter demonstration states `r1`..`r6`.
pub fn preset(name: &str, register: Register) -> Result<PureState> {
    let n = register.n();
    let re = |x: f64| C64::new(x, 0.0);
    let coeffs: Vec<C64> = match name {
        "r1" => vec![1.0, -1.0, 1.0, -1.0, 1.0, -1.0].into_iter().map(re).collect(),
        "r2" => vec![8.0, -8.0, 1.0, -1.0, 8.0, -8.0].into_iter().map(re).collect(),
        "r3" => vec![1.0, 0.0, 0.0, -1.0, 0.0, 0.0].into_iter().map(re).collect(),
        "r4" => vec![1.0, 0.0, 0.0, 0.0, 0.0, 0.0].into_iter().map(re).collect(),
        "r5" => vec![1.0, 1.0, 1.0, -1.0, -1.0, 1.0].into_iter().map(re).collect(),
        "r6" => vec![re(1.0); 6],
        other => return Err(Error::Config(format!("unknown preset '{other}'"))),
    };
    if n != 6 {
        return Err(Error::Config(format!("preset '{name}' is defined for n = 6, not n = {n}")));
    }
    PureState::from_excitation_coefficients(register, &coeffs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_abs_diff;

    fn reg(n: usize) -> Register {
        Register::new(n).unwrap()
    }

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn register_bounds() {
        assert!(Register::new(0).is_err());
        assert!(Register::new(N_MAX_SECTOR + 1).is_err());
        assert!(Register::new(12).unwrap().require_full().is_err());
    }

    #[test]
    fn first_ket_is_lowest_bit() {
        let k = single_excitation_ket(1, reg(2)).unwrap();
        assert_eq!(k.amplitudes()[1], c(1.0, 0.0));
        assert_eq!(k.amplitudes().iter().filter(|a| a.norm() > 0.0).count(), 1);
    }

    #[test]
    fn last_ket_is_highest_bit() {
        for n in 1..=6 {
            let k = single_excitation_ket(n, reg(n)).unwrap();
            assert_eq!(k.amplitudes()[1 << (n - 1)], c(1.0, 0.0));
        }
    }

    #[test]
    fn vacuum_ket() {
        let k = single_excitation_ket(0, reg(3)).unwrap();
        assert_eq!(k.amplitudes()[0], c(1.0, 0.0));
    }

    #[test]
    fn ket_index_out_of_range() {
        assert!(matches!(single_excitation_ket(4, reg(3)), Err(Error::IndexOutOfRange { .. })));
    }

    #[test]
    fn kets_orthonormal() {
        let r = reg(4);
        let kets: Vec<_> = (0..=4).map(|i| single_excitation_ket(i, r).unwrap()).collect();
        for (a, ka) in kets.iter().enumerate() {
            for (b, kb) in kets.iter().enumerate() {
                let expected = if a == b { 1.0 } else { 0.0 };
                assert!((ka.inner(kb) - c(expected, 0.0)).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn w_state_two_emitters() {
        let w = w_state(reg(2));
        let s = 1.0 / 2f64.sqrt();
        assert!((w.amplitudes()[1] - c(s, 0.0)).norm() < 1e-15);
        assert!((w.amplitudes()[2] - c(s, 0.0)).norm() < 1e-15);
        assert_eq!(w.amplitudes()[0], c(0.0, 0.0));
    }

    #[test]
    fn w_state_single_emitter_is_excited_ket() {
        let w = w_state(reg(1));
        assert_eq!(w.amplitudes()[1], c(1.0, 0.0));
    }

    #[test]
    fn w_state_six() {
        let r = reg(6);
        let w = w_state(r);
        assert!((w.amplitudes().norm() - 1.0).abs() < 1e-14);
        for i in 1..=6 {
            let k = single_excitation_ket(i, r).unwrap();
            assert!((k.inner(&w) - c(1.0 / 6f64.sqrt(), 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn max_entangled_four_alternates() {
        let s = max_entangled_steady(reg(4), 2).unwrap();
        let expected = [0.5, -0.5, 0.5, -0.5];
        for (got, want) in s.excitation_coefficients().iter().zip(expected) {
            assert!((got - c(want, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn max_entangled_three_matches_closed_form() {
        // (1/(2 sqrt 3)) [(1 + sqrt3 i)(|1>-|2>) + (1 - sqrt3 i)(|1>-|3>)]
        let s3 = 3f64.sqrt();
        let a = c(1.0, s3);
        let b = c(1.0, -s3);
        let norm = 1.0 / (2.0 * s3);
        let closed = [(a + b) * norm, -a * norm, -b * norm];
        let k2 = max_entangled_steady(reg(3), 2).unwrap().excitation_coefficients();
        let k1 = max_entangled_steady(reg(3), 1).unwrap().excitation_coefficients();
        for i in 0..3 {
            assert!((k2[i] - closed[i]).norm() < 1e-15);
            assert!((k1[i] - closed[i].conj()).norm() < 1e-15);
        }
    }

    #[test]
    fn max_entangled_six_half_is_r1() {
        let r = reg(6);
        let s = max_entangled_steady(r, 3).unwrap();
        let r1 = preset("r1", r).unwrap();
        assert!((s.inner(&r1).norm() - 1.0).abs() < 1e-14);
        assert!((s.inner(&r1) - c(1.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn max_entangled_rejects_k_zero_and_small_registers() {
        assert!(max_entangled_steady(reg(4), 0).is_err());
        assert!(max_entangled_steady(reg(4), 4).is_err());
        assert!(max_entangled_steady(reg(1), 1).is_err());
    }

    #[test]
    fn max_entangled_is_dark_with_equal_moduli() {
        for n in 2..=9 {
            let r = reg(n);
            let w = w_state(r);
            for k in 1..n {
                let s = max_entangled_steady(r, k).unwrap();
                assert!(s.inner(&w).norm() < 1e-14, "n={n} k={k}");
                for cf in s.excitation_coefficients() {
                    assert!((cf.norm() - 1.0 / (n as f64).sqrt()).abs() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn flatten_is_column_stacking() {
        let m = CMat::from_row_slice(2, 2, &[c(1.0, 0.0), c(2.0, 0.0), c(3.0, 0.0), c(4.0, 0.0)]);
        let v = flatten(&m);
        let expected: Vec<C64> = [1.0, 3.0, 2.0, 4.0].iter().map(|&x| c(x, 0.0)).collect();
        assert_eq!(v.as_slice(), expected.as_slice());
    }

    #[test]
    fn flatten_symbolic_two_by_two() {
        // entries tagged by (row, col) so the ordering is unambiguous
        let m = CMat::from_fn(2, 2, |i, j| c((10 * (i + 1) + (j + 1)) as f64, 0.0));
        let v = flatten(&m);
        let expected: Vec<C64> = [11.0, 21.0, 12.0, 22.0].iter().map(|&x| c(x, 0.0)).collect();
        assert_eq!(v.as_slice(), expected.as_slice());
    }

    #[test]
    fn unflatten_rejects_bad_lengths() {
        for len in [0, 2, 3, 8, 32] {
            assert!(unflatten(&CVec::zeros(len)).is_err(), "len {len}");
        }
        assert!(unflatten(&CVec::zeros(16)).is_ok());
    }

    #[test]
    fn unflatten_inverts_flatten() {
        let m = CMat::from_fn(4, 4, |i, j| c((i * 7 + j) as f64 * 0.3, (j as f64) - 1.5 * i as f64));
        assert!(max_abs_diff(&unflatten(&flatten(&m)).unwrap(), &m) == 0.0);
    }

    #[test]
    fn density_matrix_checks() {
        let r = reg(1);
        let bad_trace = CMat::identity(2, 2);
        assert!(DensityMatrix::new(r, bad_trace).is_err());
        let non_psd = CMat::from_row_slice(2, 2, &[c(1.5, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-0.5, 0.0)]);
        assert!(DensityMatrix::new(r, non_psd).is_err());
        let non_herm = CMat::from_row_slice(2, 2, &[c(0.5, 0.0), c(0.1, 0.0), c(0.0, 0.0), c(0.5, 0.0)]);
        assert!(DensityMatrix::new(r, non_herm).is_err());
        let ok = CMat::identity(2, 2).scale(0.5);
        assert!(DensityMatrix::new(r, ok).is_ok());
    }

    #[test]
    fn presets_are_defined_for_six_only() {
        assert!(preset("r1", reg(6)).is_ok());
        assert!(preset("r1", reg(4)).is_err());
        assert!(preset("r9", reg(6)).is_err());
        let r2 = preset("r2", reg(6)).unwrap();
        assert!((r2.excitation_coefficients()[0] - c(8.0 / 258f64.sqrt(), 0.0)).norm() < 1e-15);
    }

    #[test]
    fn pure_state_rejects_unnormalized() {
        let r = reg(1);
        assert!(PureState::new(r, CVec::from_vec(vec![c(1.0, 0.0), c(1.0, 0.0)])).is_err());
        assert!(PureState::normalized(r, CVec::zeros(2)).is_err());
    }
}
