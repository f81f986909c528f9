//! JSON file formats.
//!
//! * pure state: `{"n": 3, "amplitudes": {"1": [0.6, 0.0], "2": [0.0, -0.8]}}`,
//!   a sparse map from computational index to `[re, im]`;
//! * couplings: `{"n": 2, "omega0": 10.0, "gamma": [[1, a], [a, 1]], "g": [[0, g], [g, 0]]}`;
//! * field samples: `{"n": 2, "response": [[[re, im], ...], ...]}`;
//! * density matrix: `{"n": 1, "rho": [[[re, im], ...], ...]}`.
//!
//! Every parser validates shapes before allocating and then applies the
//! invariants of the target type.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::couplings::{CouplingSet, FieldSamples};
use crate::hilbert::{DensityMatrix, PureState, Register, N_MAX_FULL};
use crate::{CMat, CVec, Error, RMat, Result, C64};

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PureStateFile {
    n: usize,
    amplitudes: BTreeMap<String, [f64; 2]>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CouplingsFile {
    n: usize,
    omega0: f64,
    gamma: Vec<Vec<f64>>,
    g: Vec<Vec<f64>>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FieldFile {
    n: usize,
    response: Vec<Vec<[f64; 2]>>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DensityFile {
    n: usize,
    rho: Vec<Vec<[f64; 2]>>,
}

fn pair(z: C64) -> [f64; 2] {
    [z.re, z.im]
}

fn complex(p: [f64; 2]) -> Result<C64> {
    if !(p[0].is_finite() && p[1].is_finite()) {
        return Err(Error::Config(format!("non-finite value [{}, {}]", p[0], p[1])));
    }
    Ok(C64::new(p[0], p[1]))
}

fn square<T: Copy>(rows: &[Vec<T>], dim: usize, what: &str) -> Result<()> {
    if rows.len() != dim {
        return Err(Error::Config(format!("{what}: expected {dim} rows, found {}", rows.len())));
    }
    if let Some((i, row)) = rows.iter().enumerate().find(|(_, r)| r.len() != dim) {
        return Err(Error::Config(format!("{what}: row {i} has {} entries, expected {dim}", row.len())));
    }
    Ok(())
}

fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("plain data serializes")
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(Error::from)
}

fn with_path<T>(path: &Path, r: Result<T>) -> Result<T> {
    r.map_err(|e| match e {
        Error::Schema(inner) => Error::Config(format!("{}: {inner}", path.display())),
        Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
        other => other,
    })
}

/// Parses a pure state; the amplitudes must be normalized.
pub fn parse_pure_state(json: &str) -> Result<PureState> {
    let f: PureStateFile = serde_json::from_str(json)?;
    let register = Register::new(f.n)?;
    let mut amplitudes = CVec::zeros(register.dim());
    let mut seen = vec![false; register.dim()];
    for (key, value) in &f.amplitudes {
        let idx: usize = key
            .trim()
            .parse()
            .map_err(|_| Error::Config(format!("amplitude key '{key}' is not a basis index")))?;
        if idx >= register.dim() {
            return Err(Error::IndexOutOfRange { index: idx, limit: register.dim() });
        }
        if std::mem::replace(&mut seen[idx], true) {
            return Err(Error::Config(format!("basis index {idx} listed twice")));
        }
        amplitudes[idx] = complex(*value)?;
    }
    PureState::new(register, amplitudes)
}

/// Serializes the nonzero amplitudes of a state.
pub fn pure_state_to_json(psi: &PureState) -> String {
    let amplitudes = psi
        .amplitudes()
        .iter()
        .enumerate()
        .filter(|(_, z)| z.norm() != 0.0)
        .map(|(i, z)| (i.to_string(), pair(*z)))
        .collect();
    to_json(&PureStateFile { n: psi.register().n(), amplitudes })
}

pub fn load_pure_state(path: impl AsRef<Path>) -> Result<PureState> {
    let path = path.as_ref();
    with_path(path, parse_pure_state(&read(path)?))
}

pub fn save_pure_state(psi: &PureState, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, pure_state_to_json(psi)).map_err(Error::from)
}

pub fn parse_couplings(json: &str) -> Result<CouplingSet> {
    let f: CouplingsFile = serde_json::from_str(json)?;
    let register = Register::new(f.n)?;
    square(&f.gamma, f.n, "gamma")?;
    square(&f.g, f.n, "g")?;
    let gamma = RMat::from_fn(f.n, f.n, |i, j| f.gamma[i][j]);
    let g = RMat::from_fn(f.n, f.n, |i, j| f.g[i][j]);
    CouplingSet::new(register, f.omega0, gamma, g)
}

pub fn couplings_to_json(c: &CouplingSet) -> String {
    let n = c.register().n();
    let rows = |m: &RMat| (0..n).map(|i| (0..n).map(|j| m[(i, j)]).collect()).collect();
    to_json(&CouplingsFile { n, omega0: c.omega0(), gamma: rows(c.gamma()), g: rows(c.g()) })
}

pub fn load_couplings(path: impl AsRef<Path>) -> Result<CouplingSet> {
    let path = path.as_ref();
    with_path(path, parse_couplings(&read(path)?))
}

pub fn save_couplings(c: &CouplingSet, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, couplings_to_json(c)).map_err(Error::from)
}

pub fn parse_field_samples(json: &str) -> Result<FieldSamples> {
    let f: FieldFile = serde_json::from_str(json)?;
    let register = Register::new(f.n)?;
    square(&f.response, f.n, "response")?;
    let mut response = CMat::zeros(f.n, f.n);
    for (i, row) in f.response.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            response[(i, j)] = complex(*v)?;
        }
    }
    Ok(FieldSamples { register, response })
}

pub fn field_samples_to_json(s: &FieldSamples) -> String {
    let n = s.register.n();
    let response = (0..n).map(|i| (0..n).map(|j| pair(s.response[(i, j)])).collect()).collect();
    to_json(&FieldFile { n, response })
}

pub fn load_field_samples(path: impl AsRef<Path>) -> Result<FieldSamples> {
    let path = path.as_ref();
    with_path(path, parse_field_samples(&read(path)?))
}

/// Parses a density matrix and checks its physicality.
pub fn parse_density_matrix(json: &str) -> Result<DensityMatrix> {
    let f: DensityFile = serde_json::from_str(json)?;
    let register = Register::new(f.n)?;
    if f.n > N_MAX_FULL {
        return Err(Error::SizeGuard(format!("density matrix with n = {} exceeds {N_MAX_FULL}", f.n)));
    }
    let dim = register.dim();
    square(&f.rho, dim, "rho")?;
    let mut m = CMat::zeros(dim, dim);
    for (i, row) in f.rho.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            m[(i, j)] = complex(*v)?;
        }
    }
    DensityMatrix::new(register, m)
}

pub fn density_matrix_to_json(rho: &DensityMatrix) -> String {
    let m = rho.entries();
    let dim = m.nrows();
    let rho_rows = (0..dim).map(|i| (0..dim).map(|j| pair(m[(i, j)])).collect()).collect();
    to_json(&DensityFile { n: rho.register().n(), rho: rho_rows })
}

pub fn load_density_matrix(path: impl AsRef<Path>) -> Result<DensityMatrix> {
    let path = path.as_ref();
    with_path(path, parse_density_matrix(&read(path)?))
}

pub fn save_density_matrix(rho: &DensityMatrix, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, density_matrix_to_json(rho)).map_err(Error::from)
}
