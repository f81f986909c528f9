//! Coherent and incoherent coupling matrices of the emitter network.

use nalgebra::SymmetricEigen;

use crate::hilbert::{Register, TOL_PSD};
use crate::steady::gram_schmidt_vectors;

pub use crate::io::{load_couplings, save_couplings};
use crate::{CMat, CVec, Error, RMat, Result, C64};

/// Tolerance for symmetry and unit-diagonal checks.
pub const TOL_COUPLING: f64 = 1e-10;
/// Eigenvalues closer than this are treated as one degenerate cluster.
pub const DEGENERACY_TOL: f64 = 1e-9;
/// Transition frequency (units of gamma) used when none is given.
pub const DEFAULT_OMEGA0: f64 = 10.0;

/// `omega0` plus the symmetric `gamma_ij` and `g_ij` matrices, all in units
/// of the single-emitter decay rate.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingSet {
    register: Register,
    omega0: f64,
    gamma: RMat,
    g: RMat,
}

impl CouplingSet {
    pub fn new(register: Register, omega0: f64, gamma: RMat, g: RMat) -> Result<Self> {
        let n = register.n();
        for (name, m) in [("gamma", &gamma), ("g", &g)] {
            if m.shape() != (n, n) {
                return Err(Error::InvalidCouplings(format!(
                    "{name} is {}x{}, expected {n}x{n}",
                    m.nrows(),
                    m.ncols()
                )));
            }
            if m.iter().any(|x| !x.is_finite()) {
                return Err(Error::InvalidCouplings(format!("{name} has non-finite entries")));
            }
            for i in 0..n {
                for j in 0..i {
                    if (m[(i, j)] - m[(j, i)]).abs() > TOL_COUPLING {
                        return Err(Error::InvalidCouplings(format!(
                            "{name} is not symmetric at ({i}, {j})"
                        )));
                    }
                }
            }
        }
        if !omega0.is_finite() {
            return Err(Error::InvalidCouplings("omega0 is not finite".into()));
        }
        for i in 0..n {
            if (gamma[(i, i)] - 1.0).abs() > TOL_COUPLING {
                return Err(Error::InvalidCouplings(format!(
                    "gamma[{i}][{i}] = {} but the diagonal must be 1",
                    gamma[(i, i)]
                )));
            }
            if g[(i, i)].abs() > TOL_COUPLING {
                return Err(Error::InvalidCouplings(format!("g[{i}][{i}] must be 0")));
            }
        }
        let lowest = gamma.clone().symmetric_eigenvalues().min();
        if lowest < -TOL_PSD {
            return Err(Error::InvalidCouplings(format!(
                "gamma is not positive semidefinite (eigenvalue {lowest:e})"
            )));
        }
        Ok(Self { register, omega0, gamma, g })
    }

    pub fn register(&self) -> Register {
        self.register
    }

    pub fn omega0(&self) -> f64 {
        self.omega0
    }

    pub fn gamma(&self) -> &RMat {
        &self.gamma
    }

    pub fn g(&self) -> &RMat {
        &self.g
    }

    pub fn has_coherent_coupling(&self) -> bool {
        self.g.iter().any(|&x| x != 0.0)
    }

    /// Common off-diagonal `gamma` value when uniform.
    pub fn uniform_alpha(&self) -> Option<f64> {
        let n = self.register.n();
        if n < 2 {
            return None;
        }
        let alpha = self.gamma[(0, 1)];
        for i in 0..n {
            for j in 0..n {
                if i != j && (self.gamma[(i, j)] - alpha).abs() > TOL_COUPLING {
                    return None;
                }
            }
        }
        Some(alpha)
    }

    /// Mean and largest deviation of the off-diagonal `gamma` values.
    pub fn off_diagonal_stats(&self) -> Option<(f64, f64)> {
        let n = self.register.n();
        if n < 2 {
            return None;
        }
        let values: Vec<f64> = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| self.gamma[(i, j)])
            .collect();
        let mean = values.iter().sum::<f64>() / values.len() as f64;
        let spread = values.iter().map(|v| (v - mean).abs()).fold(0.0, f64::max);
        Some((mean, spread))
    }
}

/// Uniform network: `gamma_ij = alpha` and `g_ij = g_uniform` off the diagonal.
pub fn all_to_all(
    register: Register,
    alpha: f64,
    g_uniform: Option<f64>,
    omega0: f64,
) -> Result<CouplingSet> {
    let n = register.n();
    if n >= 2 {
        let lower = -1.0 / (n as f64 - 1.0);
        if !(alpha >= lower - TOL_COUPLING && alpha <= 1.0 + TOL_COUPLING) {
            return Err(Error::InvalidCouplings(format!(
                "alpha = {alpha} outside the physical range [{lower}, 1]"
            )));
        }
    }
    let g0 = g_uniform.unwrap_or(0.0);
    let gamma = RMat::from_fn(n, n, |i, j| if i == j { 1.0 } else { alpha });
    let g = RMat::from_fn(n, n, |i, j| if i == j { 0.0 } else { g0 });
    CouplingSet::new(register, omega0, gamma, g)
}

/// Collective decay rates `Gamma_nu` (descending) and the normalized
/// eigenvectors of `gamma`, one per column.
#[derive(Debug, Clone, PartialEq)]
pub struct JumpDecomposition {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: CMat,
}

impl JumpDecomposition {
    /// `sum_nu Gamma_nu alpha_{nu,i} alpha*_{nu,j}`.
    pub fn reconstruct(&self) -> CMat {
        let n = self.eigenvalues.len();
        let mut m = CMat::zeros(n, n);
        for (nu, &rate) in self.eigenvalues.iter().enumerate() {
            let v = self.eigenvectors.column(nu);
            m += (v * v.adjoint()).scale(rate);
        }
        m
    }

    /// Coefficients `alpha_{nu, i}` of jump operator `nu`.
    pub fn coefficients(&self, nu: usize) -> CVec {
        self.eigenvectors.column(nu).into_owned()
    }
}

/// Real-symmetric eigendecomposition of `gamma` with deterministic bases in
/// degenerate clusters.
pub fn decompose(c: &CouplingSet) -> Result<JumpDecomposition> {
    let n = c.register().n();
    let eig = SymmetricEigen::new(c.gamma().clone());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values: Vec<f64> = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    if let Some(&low) = values.last() {
        if low < -TOL_PSD {
            return Err(Error::InvalidCouplings(format!("decoherence matrix has negative rate {low:e}")));
        }
    }
    let mut vectors: Vec<CVec> = order
        .iter()
        .map(|&k| {
            let col = eig.eigenvectors.column(k);
            let mut v = CVec::from_iterator(n, col.iter().map(|&x| C64::new(x, 0.0)));
            let lead = v[largest_component(&v)];
            if lead.re < 0.0 {
                v.neg_mut();
            }
            v
        })
        .collect();

    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && (values[end] - values[start]).abs() < DEGENERACY_TOL {
            end += 1;
        }
        if end - start > 1 {
            let mut cluster: Vec<CVec> = vectors[start..end].to_vec();
            cluster.sort_by_key(largest_component);
            let ortho = gram_schmidt_vectors(&cluster, 1e-9)?;
            vectors.splice(start..end, ortho);
        }
        start = end;
    }

    Ok(JumpDecomposition { eigenvalues: values, eigenvectors: CMat::from_columns(&vectors) })
}

fn largest_component(v: &CVec) -> usize {
    let mut best = 0;
    for (i, z) in v.iter().enumerate() {
        if z.norm() > v[best].norm() + 1e-12 {
            best = i;
        }
    }
    best
}

/// Per-pair complex field responses `G_ij` from an electromagnetic solver.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldSamples {
    pub register: Register,
    pub response: CMat,
}

/// Converts field responses into dimensionless couplings,
/// `gamma_ij = Im G_ij / Im G_ii` and `g_ij = Re G_ij / (2 Im G_ii)`.
///
/// Physical prefactors are common to every pair and cancel in these ratios.
pub fn couplings_from_field(samples: &FieldSamples, omega0: f64) -> Result<CouplingSet> {
    let n = samples.register.n();
    let r = &samples.response;
    if r.shape() != (n, n) {
        return Err(Error::DimensionMismatch { expected: n, found: r.nrows() });
    }
    let reference = r[(0, 0)].im;
    if !(reference.is_finite() && reference.abs() > 1e-300) || reference <= 0.0 {
        return Err(Error::InvalidCouplings(format!("self-response Im G_11 = {reference} must be positive")));
    }
    let scale = r.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let tol = TOL_COUPLING * scale.max(reference);
    for i in 0..n {
        if (r[(i, i)].im - reference).abs() > tol {
            return Err(Error::InvalidCouplings(format!(
                "self-response of emitter {} differs from emitter 1 ({} vs {reference})",
                i + 1,
                r[(i, i)].im
            )));
        }
        for j in 0..i {
            if (r[(i, j)] - r[(j, i)]).norm() > tol {
                return Err(Error::InvalidCouplings(format!(
                    "response is not symmetric at ({}, {})",
                    i + 1,
                    j + 1
                )));
            }
        }
    }
    let gamma = RMat::from_fn(n, n, |i, j| if i == j { 1.0 } else { r[(i, j)].im / reference });
    let g = RMat::from_fn(n, n, |i, j| if i == j { 0.0 } else { r[(i, j)].re / (2.0 * reference) });
    CouplingSet::new(samples.register, omega0, gamma, g)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reg(n: usize) -> Register {
        Register::new(n).unwrap()
    }

    #[test]
    fn all_ones_for_unit_alpha() {
        let c = all_to_all(reg(3), 1.0, None, 10.0).unwrap();
        assert!(c.gamma().iter().all(|&x| x == 1.0));
        assert!(c.g().iter().all(|&x| x == 0.0));
    }

    #[test]
    fn two_emitter_alpha() {
        let c = all_to_all(reg(2), 0.37, Some(0.6), 10.0).unwrap();
        assert_eq!(c.gamma()[(0, 1)], 0.37);
        assert_eq!(c.gamma()[(1, 0)], 0.37);
        assert_eq!(c.g()[(0, 1)], 0.6);
        assert_eq!(c.g()[(0, 0)], 0.0);
    }

    #[test]
    fn independent_emitters() {
        let c = all_to_all(reg(4), 0.0, None, 10.0).unwrap();
        assert_eq!(c.gamma(), &RMat::identity(4, 4));
    }

    #[test]
    fn alpha_outside_psd_range() {
        assert!(all_to_all(reg(3), 1.01, None, 1.0).is_err());
        assert!(all_to_all(reg(3), -0.6, None, 1.0).is_err());
        assert!(all_to_all(reg(3), -0.5, None, 1.0).is_ok());
    }

    #[test]
    fn all_ones_has_single_bright_channel() {
        for n in 2..=7 {
            let d = decompose(&all_to_all(reg(n), 1.0, None, 10.0).unwrap()).unwrap();
            assert!((d.eigenvalues[0] - n as f64).abs() < 1e-12);
            assert!(d.eigenvalues[1..].iter().all(|x| x.abs() < 1e-12));
            let s = 1.0 / (n as f64).sqrt();
            for i in 0..n {
                assert!((d.eigenvectors[(i, 0)] - C64::new(s, 0.0)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn two_emitter_rates() {
        let alpha = 0.9;
        let d = decompose(&all_to_all(reg(2), alpha, None, 10.0).unwrap()).unwrap();
        assert!((d.eigenvalues[0] - (1.0 + alpha)).abs() < 1e-14);
        assert!((d.eigenvalues[1] - (1.0 - alpha)).abs() < 1e-14);
        let s = 1.0 / 2f64.sqrt();
        assert!((d.eigenvectors[(0, 0)].re - s).abs() < 1e-14);
        assert!((d.eigenvectors[(1, 0)].re - s).abs() < 1e-14);
        assert!((d.eigenvectors[(0, 1)].re.abs() - s).abs() < 1e-14);
        assert!((d.eigenvectors[(0, 1)].re + d.eigenvectors[(1, 1)].re).abs() < 1e-14);
    }

    #[test]
    fn diagonal_gamma_is_identity_decomposition() {
        let d = decompose(&all_to_all(reg(3), 0.0, None, 1.0).unwrap()).unwrap();
        assert!(d.eigenvalues.iter().all(|x| (x - 1.0).abs() < 1e-14));
        let ortho = d.eigenvectors.adjoint() * &d.eigenvectors;
        assert!((ortho - CMat::identity(3, 3)).norm() < 1e-14);
    }

    #[test]
    fn decomposition_is_deterministic_for_clusters() {
        let c = all_to_all(reg(5), 1.0, None, 1.0).unwrap();
        let a = decompose(&c).unwrap();
        let b = decompose(&c).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn rejects_bad_matrices() {
        let r = reg(2);
        let z = RMat::zeros(2, 2);
        let off_diag = RMat::from_row_slice(2, 2, &[0.99, 0.0, 0.0, 1.0]);
        assert!(CouplingSet::new(r, 1.0, off_diag, z.clone()).is_err());
        let asym_g = RMat::from_row_slice(2, 2, &[0.0, 0.1, 0.2, 0.0]);
        assert!(CouplingSet::new(r, 1.0, RMat::identity(2, 2), asym_g).is_err());
        let not_psd = RMat::from_row_slice(2, 2, &[1.0, 1.5, 1.5, 1.0]);
        assert!(CouplingSet::new(r, 1.0, not_psd, z).is_err());
    }

    fn samples(n: usize, f: impl Fn(usize, usize) -> C64) -> FieldSamples {
        FieldSamples { register: reg(n), response: CMat::from_fn(n, n, f) }
    }

    #[test]
    fn uniform_imaginary_response_is_all_to_all() {
        let c = couplings_from_field(&samples(4, |_, _| C64::new(0.0, 3.7)), 10.0).unwrap();
        assert!(c.gamma().iter().all(|&x| (x - 1.0).abs() < 1e-15));
        assert!(c.g().iter().all(|&x| x == 0.0));
    }

    #[test]
    fn incoherent_ratio() {
        let s = samples(2, |i, j| if i == j { C64::new(0.0, 2.0) } else { C64::new(0.0, 1.8) });
        let c = couplings_from_field(&s, 10.0).unwrap();
        assert!((c.gamma()[(0, 1)] - 0.9).abs() < 1e-15);
        assert_eq!(c.g()[(0, 1)], 0.0);
    }

    #[test]
    fn coherent_ratio_carries_factor_two() {
        let s = samples(2, |i, j| if i == j { C64::new(0.0, 2.0) } else { C64::new(4.0, 0.0) });
        let c = couplings_from_field(&s, 10.0).unwrap();
        assert!((c.g()[(0, 1)] - 1.0).abs() < 1e-15);
        assert_eq!(c.gamma()[(0, 1)], 0.0);
    }

    #[test]
    fn field_errors() {
        let asym = samples(2, |i, j| C64::new(0.0, if i < j { 0.5 } else { 1.0 }));
        assert!(couplings_from_field(&asym, 1.0).is_err());
        let vanishing = samples(2, |_, _| C64::new(1.0, 0.0));
        assert!(couplings_from_field(&vanishing, 1.0).is_err());
        let inhomogeneous =
            samples(2, |i, j| if i == j { C64::new(0.0, 1.0 + i as f64) } else { C64::new(0.0, 0.1) });
        assert!(couplings_from_field(&inhomogeneous, 1.0).is_err());
    }
}
