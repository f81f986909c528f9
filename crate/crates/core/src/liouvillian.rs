//! The vectorized Lindblad generator.
//!
//! With column stacking, `A rho B` flattens to `(B^T ⊗ A) vec(rho)`, so
//! `pre(A) = I ⊗ A` and `post(B) = B^T ⊗ I`. The generator is
//!
//! ```text
//! L = i [post(H) - pre(H)]
//!   + sum_nu Gamma_nu [pre(O_nu) post(O_nu^†) - pre(O_nu^† O_nu)/2 - post(O_nu^† O_nu)/2]
//! ```
//!
//! in the collective form, or the equivalent sum over emitter pairs weighted
//! by `gamma_ij` in the per-pair form. Dense and sparse representations are
//! assembled from these Kronecker terms; the matrix-free representation
//! evaluates the per-pair master equation directly on the unflattened
//! operator using bit manipulation, and shares no assembly code with them.

use crate::couplings::{decompose, CouplingSet};
use crate::hilbert::{FlatState, Register};
use crate::linalg::{general_eigenvalues, null_vectors, I, ONE, ZERO};
use crate::{CMat, CVec, Error, RMat, Result, C64};

/// Largest register for which a dense `4^n x 4^n` generator is built.
pub const DENSE_MAX_N: usize = 6;
/// Largest register for which eigenvalues are computed.
pub const SPECTRUM_MAX_N: usize = 5;
/// Largest register for which eigenvectors are computed.
pub const EIGENVECTOR_MAX_N: usize = 3;

/// Which form of the dissipator to assemble.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Form {
    /// Sum over emitter pairs weighted by `gamma_ij`.
    PerPair,
    /// Sum over collective jump operators from the eigendecomposition of `gamma`.
    Collective,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Representation {
    Dense,
    Sparse,
    MatrixFree,
}

type Entry = (usize, usize, C64);

/// Square sparse matrix stored as row-major sorted coordinate triplets with
/// duplicates summed.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    dim: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<C64>,
}

impl SparseMatrix {
    pub fn from_triplets(dim: usize, mut triplets: Vec<Entry>) -> Self {
        triplets.sort_unstable_by_key(|&(r, c, _)| (r, c));
        let mut cols = Vec::with_capacity(triplets.len());
        let mut vals: Vec<C64> = Vec::with_capacity(triplets.len());
        let mut rows = Vec::with_capacity(triplets.len());
        for (r, c, v) in triplets {
            match (rows.last(), cols.last()) {
                (Some(&lr), Some(&lc)) if lr == r && lc == c => {
                    *vals.last_mut().expect("paired with cols") += v;
                }
                _ => {
                    rows.push(r);
                    cols.push(c);
                    vals.push(v);
                }
            }
        }
        let mut row_ptr = vec![0usize; dim + 1];
        let mut keep_rows = Vec::with_capacity(rows.len());
        let mut keep_cols = Vec::with_capacity(rows.len());
        let mut keep_vals = Vec::with_capacity(rows.len());
        for ((r, c), v) in rows.into_iter().zip(cols).zip(vals) {
            if v != ZERO {
                keep_rows.push(r);
                keep_cols.push(c);
                keep_vals.push(v);
            }
        }
        for &r in &keep_rows {
            row_ptr[r + 1] += 1;
        }
        for k in 0..dim {
            row_ptr[k + 1] += row_ptr[k];
        }
        Self { dim, row_ptr, cols: keep_cols, vals: keep_vals }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    /// Row-major `(row, col, value)` triplets.
    pub fn triplets(&self) -> impl Iterator<Item = Entry> + '_ {
        (0..self.dim).flat_map(move |r| {
            (self.row_ptr[r]..self.row_ptr[r + 1]).map(move |k| (r, self.cols[k], self.vals[k]))
        })
    }

    pub fn mul_vec(&self, x: &[C64], out: &mut [C64]) {
        for (r, o) in out.iter_mut().enumerate() {
            let mut acc = ZERO;
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += self.vals[k] * x[self.cols[k]];
            }
            *o = acc;
        }
    }

    pub fn to_dense(&self) -> CMat {
        let mut m = CMat::zeros(self.dim, self.dim);
        for (r, c, v) in self.triplets() {
            m[(r, c)] = v;
        }
        m
    }

    fn one_norm(&self) -> f64 {
        let mut col_sums = vec![0.0; self.dim];
        for (_, c, v) in self.triplets() {
            col_sums[c] += v.norm();
        }
        col_sums.into_iter().fold(0.0, f64::max)
    }
}

/// Operators on `span{|0>,...,|n>}` or on the full `2^n` space.
#[derive(Debug, Clone, Copy)]
enum Space {
    Full(usize),
    Sector(usize),
}

impl Space {
    fn dim(self) -> usize {
        match self {
            Space::Full(n) => 1 << n,
            Space::Sector(n) => n + 1,
        }
    }

    /// Lowering operator of emitter `i` (0-based).
    fn lowering(self, i: usize) -> Vec<Entry> {
        match self {
            Space::Full(n) => {
                let bit = 1usize << i;
                (0..1usize << n).filter(|a| a & bit == 0).map(|a| (a, a | bit, ONE)).collect()
            }
            Space::Sector(_) => vec![(0, i + 1, ONE)],
        }
    }

    /// `sigma_i^† sigma_j` (0-based).
    fn hop(self, i: usize, j: usize) -> Vec<Entry> {
        match self {
            Space::Full(n) => {
                let (bi, bj) = (1usize << i, 1usize << j);
                if i == j {
                    (0..1usize << n).filter(|a| a & bi != 0).map(|a| (a, a, ONE)).collect()
                } else {
                    (0..1usize << n)
                        .filter(|c| c & bj != 0 && c & bi == 0)
                        .map(|c| ((c ^ bj) | bi, c, ONE))
                        .collect()
                }
            }
            Space::Sector(_) => vec![(i + 1, j + 1, ONE)],
        }
    }
}

fn scaled(entries: Vec<Entry>, s: C64) -> impl Iterator<Item = Entry> {
    entries.into_iter().map(move |(r, c, v)| (r, c, v * s))
}

fn merge(mut entries: Vec<Entry>) -> Vec<Entry> {
    entries.sort_unstable_by_key(|&(r, c, _)| (r, c));
    let mut out: Vec<Entry> = Vec::with_capacity(entries.len());
    for (r, c, v) in entries {
        match out.last_mut() {
            Some(last) if last.0 == r && last.1 == c => last.2 += v,
            _ => out.push((r, c, v)),
        }
    }
    out.retain(|e| e.2 != ZERO);
    out
}

fn hamiltonian_entries(c: &CouplingSet, space: Space) -> Vec<Entry> {
    let n = c.register().n();
    let mut h = Vec::new();
    for i in 0..n {
        h.extend(scaled(space.hop(i, i), C64::new(c.omega0(), 0.0)));
        for j in 0..n {
            let gij = c.g()[(i, j)];
            if i != j && gij != 0.0 {
                h.extend(scaled(space.hop(i, j), C64::new(gij, 0.0)));
            }
        }
    }
    merge(h)
}

/// `H = omega0 sum_i sigma_i^† sigma_i + sum_{i != j} g_ij sigma_i^† sigma_j`.
pub fn hamiltonian(c: &CouplingSet) -> Result<CMat> {
    let reg = c.register().require_full()?;
    Ok(entries_to_dense(reg.dim(), &hamiltonian_entries(c, Space::Full(reg.n()))))
}

fn entries_to_dense(dim: usize, entries: &[Entry]) -> CMat {
    let mut m = CMat::zeros(dim, dim);
    for &(r, c, v) in entries {
        m[(r, c)] += v;
    }
    m
}

fn dense_to_entries(m: &CMat) -> Vec<Entry> {
    let mut out = Vec::new();
    for c in 0..m.ncols() {
        for r in 0..m.nrows() {
            if m[(r, c)] != ZERO {
                out.push((r, c, m[(r, c)]));
            }
        }
    }
    out
}

/// Appends the triplets of `coeff * pre(A) post(B) = coeff * (B^T ⊗ A)`;
/// `None` stands for the identity.
fn push_term(dim: usize, a: Option<&[Entry]>, b: Option<&[Entry]>, coeff: C64, out: &mut Vec<Entry>) {
    let identity: Vec<Entry> = (0..dim).map(|k| (k, k, ONE)).collect();
    let a = a.unwrap_or(&identity);
    let b = b.unwrap_or(&identity);
    for &(s, q, bv) in b {
        for &(p, r, av) in a {
            out.push((q * dim + p, s * dim + r, coeff * av * bv));
        }
    }
}

fn assemble(c: &CouplingSet, form: Form, space: Space) -> Result<Vec<Entry>> {
    let n = c.register().n();
    let d = space.dim();
    let mut out = Vec::new();

    let h = hamiltonian_entries(c, space);
    push_term(d, None, Some(&h), I, &mut out);
    push_term(d, Some(&h), None, -I, &mut out);

    let half = C64::new(-0.5, 0.0);
    match form {
        Form::PerPair => {
            for i in 0..n {
                let si = space.lowering(i);
                for j in 0..n {
                    let gamma = c.gamma()[(i, j)];
                    if gamma == 0.0 {
                        continue;
                    }
                    let rate = C64::new(gamma, 0.0);
                    let sj_dag: Vec<Entry> =
                        space.lowering(j).into_iter().map(|(r, c, v)| (c, r, v.conj())).collect();
                    push_term(d, Some(&si), Some(&sj_dag), rate, &mut out);
                    let hop = space.hop(i, j);
                    push_term(d, Some(&hop), None, rate * half, &mut out);
                    push_term(d, None, Some(&hop), rate * half, &mut out);
                }
            }
        }
        Form::Collective => {
            let jumps = decompose(c)?;
            for (nu, &rate) in jumps.eigenvalues.iter().enumerate() {
                if rate.abs() < 1e-14 {
                    continue;
                }
                let alpha = jumps.coefficients(nu);
                let mut o = Vec::new();
                let mut odo = Vec::new();
                for i in 0..n {
                    o.extend(scaled(space.lowering(i), alpha[i]));
                    for j in 0..n {
                        odo.extend(scaled(space.hop(i, j), alpha[i].conj() * alpha[j]));
                    }
                }
                let o = merge(o);
                let odo = merge(odo);
                let o_dag: Vec<Entry> = o.iter().map(|&(r, c, v)| (c, r, v.conj())).collect();
                let rate = C64::new(rate, 0.0);
                push_term(d, Some(&o), Some(&o_dag), rate, &mut out);
                push_term(d, Some(&odo), None, rate * half, &mut out);
                push_term(d, None, Some(&odo), rate * half, &mut out);
            }
        }
    }
    Ok(out)
}

/// Generator restricted to the `(n+1)^2`-dimensional Liouville block of the
/// single-excitation sector, acting on column-stacked sector matrices.
pub fn sector_generator(c: &CouplingSet, form: Form) -> Result<CMat> {
    let n = c.register().n();
    let space = Space::Sector(n);
    let d = space.dim();
    Ok(SparseMatrix::from_triplets(d * d, assemble(c, form, space)?).to_dense())
}

/// Matrix-free per-pair generator: `K rho + rho K^† + sum_ij gamma_ij sigma_i rho sigma_j^†`
/// with `K = -iH - (1/2) sum_ij gamma_ij sigma_i^† sigma_j`.
#[derive(Debug, Clone)]
pub struct MatrixFree {
    n: usize,
    /// Rows of `K`: `k_rows[a]` lists `(c, K_ac)`.
    k_rows: Vec<Vec<(usize, C64)>>,
    /// Nonzero `(i, j, gamma_ij)`.
    jumps: Vec<(usize, usize, f64)>,
    norm_bound: f64,
}

impl MatrixFree {
    fn new(c: &CouplingSet, gamma: &RMat) -> Self {
        let n = c.register().n();
        let d = 1usize << n;
        let mut k_rows: Vec<Vec<(usize, C64)>> = vec![Vec::new(); d];
        for (a, row) in k_rows.iter_mut().enumerate() {
            let excited: Vec<usize> = (0..n).filter(|&i| a & (1 << i) != 0).collect();
            // diagonal: -i omega0 N - (1/2) sum_{i excited} gamma_ii
            let mut diag = C64::new(0.0, -c.omega0() * excited.len() as f64);
            for &i in &excited {
                diag += C64::new(-0.5 * gamma[(i, i)], 0.0);
            }
            if diag != ZERO {
                row.push((a, diag));
            }
            // hopping from c = a - bit i + bit j, for i excited in a and j not
            for &i in &excited {
                for j in 0..n {
                    if a & (1 << j) != 0 {
                        continue;
                    }
                    let src = (a ^ (1 << i)) | (1 << j);
                    let v = C64::new(-0.5 * gamma[(i, j)], -c.g()[(i, j)]);
                    if v != ZERO {
                        row.push((src, v));
                    }
                }
            }
        }
        let mut jumps = Vec::new();
        let mut jump_sum = 0.0;
        for i in 0..n {
            for j in 0..n {
                if gamma[(i, j)] != 0.0 {
                    jumps.push((i, j, gamma[(i, j)]));
                    jump_sum += gamma[(i, j)].abs();
                }
            }
        }
        let k_norm = k_rows.iter().map(|r| r.iter().map(|(_, v)| v.norm()).sum::<f64>()).fold(0.0, f64::max);
        // ||K ⊗ I + I ⊗ conj(K) + J||_1 <= 2 ||K||_inf-ish + sum |gamma|
        let norm_bound = 2.0 * k_norm + jump_sum;
        Self { n, k_rows, jumps, norm_bound }
    }

    fn apply(&self, x: &[C64], out: &mut [C64]) {
        let d = 1usize << self.n;
        // x and out are column-stacked: entry (a, b) at b * d + a
        for b in 0..d {
            for a in 0..d {
                let mut acc = ZERO;
                for &(c, k) in &self.k_rows[a] {
                    acc += k * x[b * d + c];
                }
                for &(c, k) in &self.k_rows[b] {
                    acc += x[c * d + a] * k.conj();
                }
                for &(i, j, g) in &self.jumps {
                    if a & (1 << i) == 0 && b & (1 << j) == 0 {
                        acc += x[(b | (1 << j)) * d + (a | (1 << i))] * g;
                    }
                }
                out[b * d + a] = acc;
            }
        }
    }
}

#[derive(Debug, Clone)]
enum Repr {
    Dense(CMat),
    Sparse(SparseMatrix),
    MatrixFree(MatrixFree),
}

/// A linear map on flattened operators of one register. Immutable once built.
#[derive(Debug, Clone)]
pub struct Superoperator {
    register: Register,
    repr: Repr,
}

impl Superoperator {
    pub fn register(&self) -> Register {
        self.register
    }

    pub fn representation(&self) -> Representation {
        match self.repr {
            Repr::Dense(_) => Representation::Dense,
            Repr::Sparse(_) => Representation::Sparse,
            Repr::MatrixFree(_) => Representation::MatrixFree,
        }
    }

    pub fn dim(&self) -> usize {
        self.register.liouville_dim()
    }

    /// The dense matrix when this operator is stored densely.
    pub fn as_dense(&self) -> Option<&CMat> {
        match &self.repr {
            Repr::Dense(m) => Some(m),
            _ => None,
        }
    }

    pub fn as_sparse(&self) -> Option<&SparseMatrix> {
        match &self.repr {
            Repr::Sparse(m) => Some(m),
            _ => None,
        }
    }

    /// Materializes the operator; refused beyond the dense size guard.
    pub fn to_dense(&self) -> Result<CMat> {
        dense_guard(self.register)?;
        Ok(match &self.repr {
            Repr::Dense(m) => m.clone(),
            Repr::Sparse(s) => s.to_dense(),
            Repr::MatrixFree(_) => {
                let dim = self.dim();
                let mut m = CMat::zeros(dim, dim);
                let mut e = vec![ZERO; dim];
                let mut col = vec![ZERO; dim];
                for k in 0..dim {
                    e[k] = ONE;
                    self.apply_slice(&e, &mut col);
                    m.column_mut(k).copy_from_slice(&col);
                    e[k] = ZERO;
                }
                m
            }
        })
    }

    /// Upper bound on the induced 1-norm.
    pub fn norm_bound(&self) -> f64 {
        match &self.repr {
            Repr::Dense(m) => crate::linalg::one_norm(m),
            Repr::Sparse(s) => s.one_norm(),
            Repr::MatrixFree(f) => f.norm_bound,
        }
    }

    /// `out = L x` on raw column-stacked storage.
    pub fn apply_slice(&self, x: &[C64], out: &mut [C64]) {
        match &self.repr {
            Repr::Dense(m) => {
                let y = m * CVec::from_column_slice(x);
                out.copy_from_slice(y.as_slice());
            }
            Repr::Sparse(s) => s.mul_vec(x, out),
            Repr::MatrixFree(f) => f.apply(x, out),
        }
    }

    pub fn apply_vec(&self, x: &CVec) -> Result<CVec> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: x.len() });
        }
        let mut out = CVec::zeros(self.dim());
        self.apply_slice(x.as_slice(), out.as_mut_slice());
        Ok(out)
    }

    pub fn apply(&self, v: &FlatState) -> Result<FlatState> {
        if v.register() != self.register {
            return Err(Error::DimensionMismatch { expected: self.register.n(), found: v.register().n() });
        }
        FlatState::new(self.register, self.apply_vec(v.entries())?)
    }
}

fn dense_guard(register: Register) -> Result<()> {
    if register.n() > DENSE_MAX_N {
        return Err(Error::SizeGuard(format!(
            "dense Liouvillian refused for n = {} (limit {DENSE_MAX_N})",
            register.n()
        )));
    }
    Ok(())
}

fn check_square(register: Register, m: &CMat) -> Result<()> {
    let d = register.dim();
    if m.shape() != (d, d) {
        return Err(Error::DimensionMismatch { expected: d, found: m.nrows() });
    }
    Ok(())
}

/// `pre(A) = I ⊗ A`, so that `pre(A) vec(rho) = vec(A rho)`.
pub fn pre(register: Register, a: &CMat) -> Result<Superoperator> {
    register.require_full()?;
    check_square(register, a)?;
    let d = register.dim();
    let mut out = Vec::new();
    push_term(d, Some(&dense_to_entries(a)), None, ONE, &mut out);
    Ok(Superoperator { register, repr: Repr::Sparse(SparseMatrix::from_triplets(d * d, out)) })
}

/// `post(B) = B^T ⊗ I`, so that `post(B) vec(rho) = vec(rho B)`.
pub fn post(register: Register, b: &CMat) -> Result<Superoperator> {
    register.require_full()?;
    check_square(register, b)?;
    let d = register.dim();
    let mut out = Vec::new();
    push_term(d, None, Some(&dense_to_entries(b)), ONE, &mut out);
    Ok(Superoperator { register, repr: Repr::Sparse(SparseMatrix::from_triplets(d * d, out)) })
}

/// Builds the generator `L` with `d vec(rho)/dt = L vec(rho)`.
pub fn build_liouvillian(
    c: &CouplingSet,
    form: Form,
    representation: Representation,
) -> Result<Superoperator> {
    let register = c.register().require_full()?;
    let dim = register.liouville_dim();
    let repr = match representation {
        Representation::Dense => {
            dense_guard(register)?;
            let sparse = SparseMatrix::from_triplets(dim, assemble(c, form, Space::Full(register.n()))?);
            Repr::Dense(sparse.to_dense())
        }
        Representation::Sparse => {
            Repr::Sparse(SparseMatrix::from_triplets(dim, assemble(c, form, Space::Full(register.n()))?))
        }
        Representation::MatrixFree => {
            let gamma = match form {
                Form::PerPair => c.gamma().clone(),
                Form::Collective => decompose(c)?.reconstruct().map(|z| z.re),
            };
            Repr::MatrixFree(MatrixFree::new(c, &gamma))
        }
    };
    Ok(Superoperator { register, repr })
}

/// Eigenvalues (and optionally right eigenvectors) of a generator.
#[derive(Debug, Clone)]
pub struct SpectrumReport {
    /// Sorted by real part descending, then imaginary part ascending.
    pub eigenvalues: Vec<C64>,
    /// Unit-norm right eigenvectors aligned with `eigenvalues`; not
    /// orthogonalized.
    pub eigenvectors: Option<Vec<CVec>>,
}

impl SpectrumReport {
    pub fn max_real_part(&self) -> f64 {
        self.eigenvalues.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max)
    }

    /// Number of eigenvalues within `tol` of zero.
    pub fn zero_multiplicity(&self, tol: f64) -> usize {
        self.eigenvalues.iter().filter(|z| z.norm() < tol).count()
    }

    /// Largest distance from an eigenvalue's conjugate to the nearest eigenvalue.
    pub fn conjugation_defect(&self) -> f64 {
        self.eigenvalues
            .iter()
            .map(|z| self.eigenvalues.iter().map(|w| (w - z.conj()).norm()).fold(f64::INFINITY, f64::min))
            .fold(0.0, f64::max)
    }

    /// CSV with header `re,im`, one eigenvalue per row.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("re,im\n");
        for z in &self.eigenvalues {
            s.push_str(&format!("{},{}\n", z.re, z.im));
        }
        s
    }
}

pub fn sort_spectrum(values: &mut [C64]) {
    values.sort_by(|a, b| b.re.total_cmp(&a.re).then(a.im.total_cmp(&b.im)));
}

/// Complete spectrum of a generator with `n <= 5`; eigenvectors for `n <= 3`.
pub fn spectrum(l: &Superoperator, with_vectors: bool) -> Result<SpectrumReport> {
    let n = l.register().n();
    if n > SPECTRUM_MAX_N {
        return Err(Error::SizeGuard(format!("eigenvalues refused for n = {n} (limit {SPECTRUM_MAX_N})")));
    }
    if with_vectors && n > EIGENVECTOR_MAX_N {
        return Err(Error::SizeGuard(format!(
            "eigenvectors refused for n = {n} (limit {EIGENVECTOR_MAX_N})"
        )));
    }
    let m = l.to_dense()?;
    let mut values = general_eigenvalues(&m);
    sort_spectrum(&mut values);

    let eigenvectors = if with_vectors {
        let dim = m.nrows();
        let mut vectors = Vec::with_capacity(dim);
        let mut k = 0;
        while k < values.len() {
            let mut end = k + 1;
            while end < values.len() && (values[end] - values[k]).norm() < 1e-7 {
                end += 1;
            }
            let mult = end - k;
            let mean: C64 = values[k..end].iter().sum::<C64>() / mult as f64;
            let shifted = &m - CMat::identity(dim, dim) * mean;
            vectors.extend(null_vectors(&shifted, mult).into_iter().map(|(_, v)| v));
            k = end;
        }
        Some(vectors)
    } else {
        None
    };
    Ok(SpectrumReport { eigenvalues: values, eigenvectors })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::couplings::all_to_all;
    use crate::hilbert::{flatten, unflatten};
    use crate::linalg::{max_abs_diff, trace};

    fn reg(n: usize) -> Register {
        Register::new(n).unwrap()
    }

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn two_emitter_hamiltonian() {
        let cs = all_to_all(reg(2), 1.0, Some(0.6), 10.0).unwrap();
        let h = hamiltonian(&cs).unwrap();
        let mut expected = CMat::zeros(4, 4);
        expected[(1, 1)] = c(10.0, 0.0);
        expected[(2, 2)] = c(10.0, 0.0);
        expected[(3, 3)] = c(20.0, 0.0);
        expected[(1, 2)] = c(0.6, 0.0);
        expected[(2, 1)] = c(0.6, 0.0);
        assert!(max_abs_diff(&h, &expected) < 1e-15);
    }

    #[test]
    fn free_hamiltonian_counts_excitations() {
        let cs = all_to_all(reg(3), 0.5, None, 2.5).unwrap();
        let h = hamiltonian(&cs).unwrap();
        for a in 0..8usize {
            assert_eq!(h[(a, a)], c(2.5 * a.count_ones() as f64, 0.0));
        }
        assert_eq!(h.iter().filter(|z| **z != ZERO).count(), 7);
    }

    #[test]
    fn uniform_three_emitter_single_excitation_block() {
        // the 3x3 block omega0 I + g (J - I) has eigenvalues omega0 + {2g, -g, -g}
        let (w0, g) = (10.0, 0.7);
        let cs = all_to_all(reg(3), 1.0, Some(g), w0).unwrap();
        let h = hamiltonian(&cs).unwrap();
        let idx = [1usize, 2, 4];
        let block = CMat::from_fn(3, 3, |i, j| h[(idx[i], idx[j])]);
        let mut ev = crate::linalg::hermitian_eigenvalues(&block);
        ev.sort_by(f64::total_cmp);
        let expected = [w0 - g, w0 - g, w0 + 2.0 * g];
        for (a, b) in ev.iter().zip(expected) {
            assert!((a - b).abs() < 1e-13);
        }
    }

    #[test]
    fn pre_post_identity() {
        let r = reg(2);
        let id = CMat::identity(4, 4);
        assert!(max_abs_diff(&pre(r, &id).unwrap().to_dense().unwrap(), &CMat::identity(16, 16)) == 0.0);
        assert!(max_abs_diff(&post(r, &id).unwrap().to_dense().unwrap(), &CMat::identity(16, 16)) == 0.0);
    }

    #[test]
    fn pre_of_raising_on_excited() {
        let r = reg(1);
        let a = CMat::from_row_slice(2, 2, &[ZERO, ONE, ZERO, ZERO]);
        let mut rho = CMat::zeros(2, 2);
        rho[(1, 1)] = ONE;
        let out = pre(r, &a).unwrap().apply_vec(&flatten(&rho)).unwrap();
        let expected = CVec::from_vec(vec![ZERO, ZERO, ONE, ZERO]);
        assert_eq!(out, expected);
    }

    #[test]
    fn dimension_mismatch_rejected() {
        assert!(pre(reg(2), &CMat::identity(2, 2)).is_err());
        assert!(post(reg(1), &CMat::identity(4, 4)).is_err());
        let l = build_liouvillian(
            &all_to_all(reg(2), 1.0, None, 1.0).unwrap(),
            Form::PerPair,
            Representation::Sparse,
        )
        .unwrap();
        assert!(l.apply_vec(&CVec::zeros(4)).is_err());
    }

    #[test]
    fn single_emitter_decays_at_unit_rate() {
        let cs = all_to_all(reg(1), 0.0, None, 3.0).unwrap();
        for repr in [Representation::Dense, Representation::Sparse, Representation::MatrixFree] {
            let l = build_liouvillian(&cs, Form::PerPair, repr).unwrap();
            let mut rho = CMat::zeros(2, 2);
            rho[(1, 1)] = ONE;
            let d = unflatten(&l.apply_vec(&flatten(&rho)).unwrap()).unwrap();
            assert!((d[(1, 1)] - c(-1.0, 0.0)).norm() < 1e-15);
            assert!((d[(0, 0)] - c(1.0, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn single_emitter_spectrum() {
        let w0 = 3.0;
        let cs = all_to_all(reg(1), 0.0, None, w0).unwrap();
        let l = build_liouvillian(&cs, Form::PerPair, Representation::Dense).unwrap();
        let s = spectrum(&l, false).unwrap();
        let expected = [c(0.0, 0.0), c(-0.5, -w0), c(-0.5, w0), c(-1.0, 0.0)];
        for (a, b) in s.eigenvalues.iter().zip(expected) {
            assert!((a - b).norm() < 1e-12, "{a} vs {b}");
        }
    }

    #[test]
    fn vacuum_is_dark() {
        let cs = all_to_all(reg(3), 0.8, Some(0.3), 10.0).unwrap();
        let l = build_liouvillian(&cs, Form::Collective, Representation::Sparse).unwrap();
        let mut v = CVec::zeros(64);
        v[0] = ONE;
        assert!(l.apply_vec(&v).unwrap().norm() == 0.0);
    }

    #[test]
    fn dense_guard_applies() {
        let cs = all_to_all(reg(7), 1.0, None, 10.0).unwrap();
        assert!(matches!(
            build_liouvillian(&cs, Form::PerPair, Representation::Dense),
            Err(Error::SizeGuard(_))
        ));
        assert!(build_liouvillian(&cs, Form::PerPair, Representation::MatrixFree).is_ok());
    }

    #[test]
    fn trace_and_hermiticity_preserved() {
        let cs = all_to_all(reg(2), 0.6, Some(1.1), 4.0).unwrap();
        let l = build_liouvillian(&cs, Form::PerPair, Representation::Sparse).unwrap();
        let a = CMat::from_fn(4, 4, |i, j| c((i + 2 * j) as f64 * 0.1, (i as f64 - j as f64) * 0.2));
        let rho = &a * a.adjoint();
        let d = unflatten(&l.apply_vec(&flatten(&rho)).unwrap()).unwrap();
        assert!(trace(&d).norm() < 1e-12);
        assert!(crate::linalg::hermiticity_residual(&d) < 1e-12);
    }

    #[test]
    fn sparse_triplets_sorted_and_summed() {
        let s = SparseMatrix::from_triplets(
            3,
            vec![(2, 0, ONE), (0, 1, ONE), (0, 1, ONE), (1, 1, ONE), (1, 2, -ONE), (1, 2, ONE)],
        );
        let t: Vec<_> = s.triplets().collect();
        assert_eq!(t, vec![(0, 1, c(2.0, 0.0)), (1, 1, ONE), (2, 0, ONE)]);
    }

    #[test]
    fn spectrum_size_guard() {
        let cs = all_to_all(reg(4), 1.0, None, 10.0).unwrap();
        let l = build_liouvillian(&cs, Form::PerPair, Representation::Sparse).unwrap();
        assert!(spectrum(&l, true).is_err());
    }
}
