//! The single-excitation sector `span{|0>, |1>, ..., |n>}`.
//!
//! Operators supported on the sector are stored as `(n + 1) x (n + 1)`
//! matrices indexed by excitation label (0 = vacuum, `i` = emitter `i`
//! excited). The collective dynamics never leaves this block, which is what
//! makes registers far beyond the full-space limit tractable.

use crate::hilbert::{DensityMatrix, PureState, Register, TOL_NORM};
use crate::{CMat, CVec, Error, Result, C64};

/// Amplitudes of `psi` on the sector basis, rejecting any weight outside it.
pub fn sector_amplitudes(psi: &PureState) -> Result<CVec> {
    let outside = psi.weight_outside_sector();
    if outside > TOL_NORM {
        return Err(Error::OutsideSector(format!("weight {outside:e} on multi-excitation states")));
    }
    let reg = psi.register();
    let a = psi.amplitudes();
    Ok(CVec::from_iterator(
        reg.n() + 1,
        (0..=reg.n()).map(|i| a[reg.excitation_index(i).expect("label within register")]),
    ))
}

/// A sector-supported operator.
#[derive(Debug, Clone, PartialEq)]
pub struct SectorMatrix {
    register: Register,
    entries: CMat,
}

impl SectorMatrix {
    pub fn new(register: Register, entries: CMat) -> Result<Self> {
        let d = register.n() + 1;
        if entries.shape() != (d, d) {
            return Err(Error::DimensionMismatch { expected: d, found: entries.nrows() });
        }
        Ok(Self { register, entries })
    }

    pub fn projector(psi: &PureState) -> Result<Self> {
        let a = sector_amplitudes(psi)?;
        Ok(Self { register: psi.register(), entries: &a * a.adjoint() })
    }

    /// Restricts a full-space matrix to the sector; entries outside it must
    /// vanish within `tol`.
    pub fn from_full(register: Register, m: &CMat, tol: f64) -> Result<Self> {
        let dim = register.dim();
        if m.shape() != (dim, dim) {
            return Err(Error::DimensionMismatch { expected: dim, found: m.nrows() });
        }
        let in_sector = |idx: usize| idx.count_ones() <= 1;
        for j in 0..dim {
            for i in 0..dim {
                if !(in_sector(i) && in_sector(j)) && m[(i, j)].norm() > tol {
                    return Err(Error::OutsideSector(format!("entry ({i}, {j}) = {}", m[(i, j)])));
                }
            }
        }
        let idx = sector_indices(register);
        let d = register.n() + 1;
        Ok(Self { register, entries: CMat::from_fn(d, d, |a, b| m[(idx[a], idx[b])]) })
    }

    pub fn register(&self) -> Register {
        self.register
    }

    pub fn entries(&self) -> &CMat {
        &self.entries
    }

    pub fn trace(&self) -> C64 {
        self.entries.diagonal().iter().sum()
    }

    /// `<psi| rho |psi>` for a sector-supported `psi`.
    pub fn expectation(&self, psi: &PureState) -> Result<C64> {
        let a = sector_amplitudes(psi)?;
        Ok(a.dotc(&(&self.entries * &a)))
    }

    /// Embeds into the full `2^n x 2^n` matrix.
    pub fn embed(&self) -> Result<CMat> {
        self.register.require_full()?;
        let dim = self.register.dim();
        let idx = sector_indices(self.register);
        let mut m = CMat::zeros(dim, dim);
        for (b, &jb) in idx.iter().enumerate() {
            for (a, &ia) in idx.iter().enumerate() {
                m[(ia, jb)] = self.entries[(a, b)];
            }
        }
        Ok(m)
    }

    pub fn to_density_matrix(&self) -> Result<DensityMatrix> {
        DensityMatrix::unchecked(self.register, self.embed()?)
    }
}

/// Computational indices of the sector labels `0..=n`.
pub fn sector_indices(register: Register) -> Vec<usize> {
    (0..=register.n()).map(|i| register.excitation_index(i).expect("label within register")).collect()
}
