//! Partial transpose, negativities, two-qubit concurrence and Uhlmann
//! fidelity.

use crate::hilbert::{DensityMatrix, Register, TOL_PSD};
use crate::linalg::{hermitian_eigen, hermitian_eigenvalues, psd_sqrt, ZERO};
use crate::sector::{sector_indices, SectorMatrix};
use crate::{CMat, Error, Result, C64};

/// Negativity factors below this are treated as exactly zero.
pub const NEGATIVITY_FLOOR: f64 = 1e-12;
/// Purity above `1 - PURE_TOL` takes the pure-state fidelity formula.
const PURE_TOL: f64 = 1e-12;

/// A cut `A | complement` of the register; `A` holds 1-based emitter labels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Bipartition {
    register: Register,
    subset: Vec<usize>,
    mask: usize,
}

impl Bipartition {
    pub fn new(register: Register, subset: &[usize]) -> Result<Self> {
        let n = register.n();
        let mut subset = subset.to_vec();
        subset.sort_unstable();
        subset.dedup();
        if subset.is_empty() || subset.len() >= n {
            return Err(Error::InvalidArgument(format!(
                "bipartition needs a non-empty proper subset of 1..={n}"
            )));
        }
        if let Some(&bad) = subset.iter().find(|&&i| i == 0 || i > n) {
            return Err(Error::IndexOutOfRange { index: bad, limit: n });
        }
        let mask = subset.iter().fold(0usize, |m, &i| m | (1 << (i - 1)));
        Ok(Self { register, subset, mask })
    }

    /// Emitter `k` against the rest.
    pub fn single(register: Register, k: usize) -> Result<Self> {
        Self::new(register, &[k])
    }

    /// `A = {1, ..., ceil(n/2)}`.
    pub fn half(register: Register) -> Result<Self> {
        let a: Vec<usize> = (1..=register.n().div_ceil(2)).collect();
        Self::new(register, &a)
    }

    pub fn subset(&self) -> &[usize] {
        &self.subset
    }

    pub fn complement(&self) -> Self {
        let subset: Vec<usize> = (1..=self.register.n()).filter(|i| !self.subset.contains(i)).collect();
        let full = (1usize << self.register.n()) - 1;
        Self { register: self.register, subset, mask: full & !self.mask }
    }
}

/// Transposes the `A` tensor factors: `<a_A a_B| rho^{T_A} |b_A b_B> = <b_A a_B| rho |a_A b_B>`.
pub fn partial_transpose(rho: &DensityMatrix, part: &Bipartition) -> Result<CMat> {
    partial_transpose_matrix(rho.entries(), rho.register(), part)
}

pub fn partial_transpose_matrix(m: &CMat, register: Register, part: &Bipartition) -> Result<CMat> {
    if part.register != register {
        return Err(Error::DimensionMismatch { expected: register.n(), found: part.register.n() });
    }
    let d = register.dim();
    if m.shape() != (d, d) {
        return Err(Error::DimensionMismatch { expected: d, found: m.nrows() });
    }
    let mask = part.mask;
    let mut out = CMat::from_element(d, d, ZERO);
    for b in 0..d {
        for a in 0..d {
            let a2 = (a & !mask) | (b & mask);
            let b2 = (b & !mask) | (a & mask);
            out[(a2, b2)] = m[(a, b)];
        }
    }
    Ok(out)
}

/// `||rho^{T_A}||_1 - 1 = 2 sum |negative eigenvalues|`, floored at zero.
pub fn negativity(rho: &DensityMatrix, part: &Bipartition) -> Result<f64> {
    let pt = partial_transpose(rho, part)?;
    let neg: f64 = hermitian_eigenvalues(&pt).iter().filter(|&&l| l < 0.0).map(|l| -l).sum();
    Ok((2.0 * neg).max(0.0))
}

/// Geometric mean of the `n` single-emitter negativities; zero when any
/// factor vanishes.
pub fn multipartite_negativity(rho: &DensityMatrix) -> Result<f64> {
    let register = rho.register();
    let n = register.n();
    if n < 2 {
        return Err(Error::InvalidArgument("multipartite negativity needs n >= 2".into()));
    }
    let mut log_sum = 0.0;
    for k in 1..=n {
        let f = negativity(rho, &Bipartition::single(register, k)?)?;
        if f <= NEGATIVITY_FLOOR {
            return Ok(0.0);
        }
        log_sum += f.ln();
    }
    Ok((log_sum / n as f64).exp())
}

/// Negativity across `{1..ceil(n/2)} | rest`.
pub fn n_half(rho: &DensityMatrix) -> Result<f64> {
    let register = rho.register();
    if register.n() < 2 {
        return Err(Error::InvalidArgument("half-cut negativity needs n >= 2".into()));
    }
    let v = negativity(rho, &Bipartition::half(register)?)?;
    Ok(if v <= NEGATIVITY_FLOOR { 0.0 } else { v })
}

/// Negativity of a sector-supported state. Its partial transpose touches
/// only `O(n^2)` basis states, so only that block is diagonalized.
pub fn negativity_sector(rho: &SectorMatrix, part: &Bipartition) -> Result<f64> {
    let register = rho.register();
    if part.register != register {
        return Err(Error::DimensionMismatch { expected: register.n(), found: part.register.n() });
    }
    let idx = sector_indices(register);
    let mask = part.mask;
    let mut moved = Vec::with_capacity(idx.len() * idx.len());
    for (q, &b) in idx.iter().enumerate() {
        for (p, &a) in idx.iter().enumerate() {
            let v = rho.entries()[(p, q)];
            if v != ZERO {
                moved.push(((a & !mask) | (b & mask), (b & !mask) | (a & mask), v));
            }
        }
    }
    let mut support: Vec<usize> = moved.iter().flat_map(|&(a, b, _)| [a, b]).collect();
    support.sort_unstable();
    support.dedup();
    let pos = |x: usize| support.binary_search(&x).expect("index collected above");
    let mut block = CMat::from_element(support.len(), support.len(), ZERO);
    for (a, b, v) in moved {
        block[(pos(a), pos(b))] += v;
    }
    let neg: f64 = hermitian_eigenvalues(&block).iter().filter(|&&l| l < 0.0).map(|l| -l).sum();
    Ok((2.0 * neg).max(0.0))
}

/// [`multipartite_negativity`] of a sector-supported state.
pub fn multipartite_negativity_sector(rho: &SectorMatrix) -> Result<f64> {
    let register = rho.register();
    let n = register.n();
    if n < 2 {
        return Err(Error::InvalidArgument("multipartite negativity needs n >= 2".into()));
    }
    let mut log_sum = 0.0;
    for k in 1..=n {
        let f = negativity_sector(rho, &Bipartition::single(register, k)?)?;
        if f <= NEGATIVITY_FLOOR {
            return Ok(0.0);
        }
        log_sum += f.ln();
    }
    Ok((log_sum / n as f64).exp())
}

/// [`n_half`] of a sector-supported state.
pub fn n_half_sector(rho: &SectorMatrix) -> Result<f64> {
    let register = rho.register();
    if register.n() < 2 {
        return Err(Error::InvalidArgument("half-cut negativity needs n >= 2".into()));
    }
    let v = negativity_sector(rho, &Bipartition::half(register)?)?;
    Ok(if v <= NEGATIVITY_FLOOR { 0.0 } else { v })
}

/// Fidelity of two sector-supported states.
pub fn fidelity_sector(a: &SectorMatrix, b: &SectorMatrix) -> Result<f64> {
    if a.register() != b.register() {
        return Err(Error::DimensionMismatch { expected: a.register().n(), found: b.register().n() });
    }
    fidelity_matrices(a.entries(), b.entries())
}

/// Wootters concurrence of a two-qubit state.
pub fn concurrence(rho: &DensityMatrix) -> Result<f64> {
    if rho.register().n() != 2 {
        return Err(Error::InvalidArgument(format!(
            "concurrence needs n = 2, got n = {}",
            rho.register().n()
        )));
    }
    let m = rho.entries();
    // sigma_y ⊗ sigma_y
    let mut yy = CMat::zeros(4, 4);
    yy[(0, 3)] = C64::new(-1.0, 0.0);
    yy[(1, 2)] = C64::new(1.0, 0.0);
    yy[(2, 1)] = C64::new(1.0, 0.0);
    yy[(3, 0)] = C64::new(-1.0, 0.0);
    let tilde = &yy * m.conjugate() * &yy;
    let s = psd_sqrt(m, TOL_PSD)? * psd_sqrt(&tilde, TOL_PSD)?;
    let mut l: Vec<f64> = s.singular_values().iter().copied().collect();
    l.sort_by(|a, b| b.total_cmp(a));
    Ok((l[0] - l[1] - l[2] - l[3]).max(0.0))
}

fn pure_vector(m: &CMat) -> Option<crate::CVec> {
    let (values, vectors) = hermitian_eigen(m);
    let top = *values.last()?;
    let purity: f64 = m.iter().map(|z| z.norm_sqr()).sum();
    if purity > 1.0 - PURE_TOL && top > 1.0 - PURE_TOL {
        Some(vectors.column(values.len() - 1).into_owned())
    } else {
        None
    }
}

/// Uhlmann fidelity `Tr sqrt(sqrt(rho1) rho2 sqrt(rho1))`, computed as the
/// nuclear norm of `sqrt(rho1) sqrt(rho2)`.
pub fn fidelity(rho1: &DensityMatrix, rho2: &DensityMatrix) -> Result<f64> {
    if rho1.register() != rho2.register() {
        return Err(Error::DimensionMismatch { expected: rho1.register().n(), found: rho2.register().n() });
    }
    fidelity_matrices(rho1.entries(), rho2.entries())
}

/// [`fidelity`] on raw matrices of equal shape.
pub fn fidelity_matrices(a: &CMat, b: &CMat) -> Result<f64> {
    if a.shape() != b.shape() {
        return Err(Error::DimensionMismatch { expected: a.nrows(), found: b.nrows() });
    }
    let pure = |psi: &crate::CVec, other: &CMat| -> Result<f64> {
        let ov = psi.dotc(&(other * psi)).re;
        if ov < -TOL_PSD {
            return Err(Error::InvalidState(format!("negative overlap {ov:e}")));
        }
        Ok(ov.max(0.0).sqrt().min(1.0))
    };
    if let Some(psi) = pure_vector(a) {
        return pure(&psi, b);
    }
    if let Some(psi) = pure_vector(b) {
        return pure(&psi, a);
    }
    let s = psd_sqrt(a, TOL_PSD)? * psd_sqrt(b, TOL_PSD)?;
    Ok(s.singular_values().iter().sum::<f64>().min(1.0))
}
