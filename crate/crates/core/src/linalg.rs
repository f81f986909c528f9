//! Dense linear-algebra helpers shared by the simulation and measure modules.

use nalgebra::linalg::Schur;

use crate::{CMat, CVec, Error, Result, C64};

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

/// Kronecker product `a ⊗ b`.
pub fn kron(a: &CMat, b: &CMat) -> CMat {
    let (ar, ac) = a.shape();
    let (br, bc) = b.shape();
    let mut out = CMat::zeros(ar * br, ac * bc);
    for j in 0..ac {
        for i in 0..ar {
            let s = a[(i, j)];
            if s == ZERO {
                continue;
            }
            for q in 0..bc {
                for p in 0..br {
                    out[(i * br + p, j * bc + q)] = s * b[(p, q)];
                }
            }
        }
    }
    out
}

pub fn trace(m: &CMat) -> C64 {
    m.diagonal().iter().sum()
}

/// Largest elementwise modulus of `m - m^†`.
pub fn hermiticity_residual(m: &CMat) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for j in 0..n {
        for i in 0..=j {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

pub fn hermitian_part(m: &CMat) -> CMat {
    (m + m.adjoint()).scale(0.5)
}

pub fn max_abs_diff(a: &CMat, b: &CMat) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

pub fn max_abs_diff_vec(a: &CVec, b: &CVec) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// Index sets of the connected components of the sparsity graph of `h`.
fn sparsity_blocks(h: &CMat) -> Vec<Vec<usize>> {
    let n = h.nrows();
    let mut parent: Vec<usize> = (0..n).collect();
    fn root(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for j in 0..n {
        for i in 0..j {
            if h[(i, j)] != ZERO {
                let (a, b) = (root(&mut parent, i), root(&mut parent, j));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
    }
    let mut blocks: Vec<Vec<usize>> = Vec::new();
    let mut slot = vec![usize::MAX; n];
    for i in 0..n {
        let r = root(&mut parent, i);
        if slot[r] == usize::MAX {
            slot[r] = blocks.len();
            blocks.push(Vec::new());
        }
        blocks[slot[r]].push(i);
    }
    blocks
}

fn submatrix(h: &CMat, idx: &[usize]) -> CMat {
    CMat::from_fn(idx.len(), idx.len(), |p, q| h[(idx[p], idx[q])])
}

/// Eigenpairs of a Hermitian block. Falls back to the real symmetric
/// embedding `[[Re, -Im], [Im, Re]]` when the complex solver returns NaN.
fn block_eigen(h: &CMat) -> (Vec<f64>, CMat) {
    let k = h.nrows();
    if k == 1 {
        return (vec![h[(0, 0)].re], CMat::identity(1, 1));
    }
    let eig = h.clone().symmetric_eigen();
    if eig.eigenvalues.iter().all(|x| x.is_finite())
        && eig.eigenvectors.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    {
        return (eig.eigenvalues.iter().copied().collect(), eig.eigenvectors);
    }
    embedded_eigen(h)
}

fn embedded_eigen(h: &CMat) -> (Vec<f64>, CMat) {
    let k = h.nrows();
    let real = nalgebra::DMatrix::<f64>::from_fn(2 * k, 2 * k, |p, q| {
        let z = h[(p % k, q % k)];
        match (p < k, q < k) {
            (true, true) | (false, false) => z.re,
            (true, false) => -z.im,
            (false, true) => z.im,
        }
    });
    let eig = real.symmetric_eigen();
    let mut order: Vec<usize> = (0..2 * k).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    // Each eigenvalue appears twice; keep a maximal orthonormal set of the
    // complex vectors x + i y.
    let mut values = Vec::with_capacity(k);
    let mut vectors: Vec<CVec> = Vec::with_capacity(k);
    for &c in &order {
        let col = eig.eigenvectors.column(c);
        let mut v = CVec::from_fn(k, |p, _| C64::new(col[p], col[p + k]));
        for u in &vectors {
            let proj = u.dotc(&v);
            v -= u * proj;
        }
        let norm = v.norm();
        if norm > 0.5 && vectors.len() < k {
            vectors.push(v.unscale(norm));
            values.push(eig.eigenvalues[c]);
        }
    }
    (values, CMat::from_columns(&vectors))
}

/// Eigen-decomposition of the Hermitian part of `m`, eigenvalues ascending.
/// Decoupled blocks of the sparsity pattern are diagonalized separately.
pub fn hermitian_eigen(m: &CMat) -> (Vec<f64>, CMat) {
    let h = hermitian_part(m);
    let n = h.nrows();
    let mut pairs: Vec<(f64, CVec)> = Vec::with_capacity(n);
    for idx in sparsity_blocks(&h) {
        let (values, vectors) = block_eigen(&submatrix(&h, &idx));
        for (c, &l) in values.iter().enumerate() {
            let mut full = CVec::zeros(n);
            for (p, &i) in idx.iter().enumerate() {
                full[i] = vectors[(p, c)];
            }
            pairs.push((l, full));
        }
    }
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let values = pairs.iter().map(|p| p.0).collect();
    let vectors = CMat::from_columns(&pairs.into_iter().map(|p| p.1).collect::<Vec<_>>());
    (values, vectors)
}

pub fn hermitian_eigenvalues(m: &CMat) -> Vec<f64> {
    let h = hermitian_part(m);
    let mut v = Vec::with_capacity(h.nrows());
    for idx in sparsity_blocks(&h) {
        let block = submatrix(&h, &idx);
        if idx.len() == 1 {
            v.push(block[(0, 0)].re);
            continue;
        }
        let values = block.clone().symmetric_eigenvalues();
        if values.iter().all(|x| x.is_finite()) {
            v.extend(values.iter().copied());
        } else {
            v.extend(block_eigen(&block).0);
        }
    }
    v.sort_by(f64::total_cmp);
    v
}

/// Principal square root of a positive semidefinite matrix. Eigenvalues in
/// `[-tol_psd, 0)` are clipped to zero; anything more negative is an error.
pub fn psd_sqrt(m: &CMat, tol_psd: f64) -> Result<CMat> {
    let (values, vectors) = hermitian_eigen(m);
    if let Some(&lo) = values.first() {
        if lo < -tol_psd {
            return Err(Error::InvalidState(format!(
                "matrix is not positive semidefinite (eigenvalue {lo:e})"
            )));
        }
    }
    let roots = CVec::from_iterator(values.len(), values.iter().map(|&l| C64::new(l.max(0.0).sqrt(), 0.0)));
    Ok(&vectors * CMat::from_diagonal(&roots) * vectors.adjoint())
}

/// Eigenvalues of a general complex matrix from its Schur form.
pub fn general_eigenvalues(m: &CMat) -> Vec<C64> {
    let schur = Schur::new(m.clone());
    let (_, t) = schur.unpack();
    (0..t.nrows()).map(|k| t[(k, k)]).collect()
}

pub fn one_norm(m: &CMat) -> f64 {
    (0..m.ncols()).map(|j| m.column(j).iter().map(|z| z.norm()).sum::<f64>()).fold(0.0, f64::max)
}

const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];
const THETA13: f64 = 5.371920351148152;

/// Matrix exponential by degree-13 Padé approximation with scaling and
/// squaring.
pub fn expm(a: &CMat) -> CMat {
    let n = a.nrows();
    let norm = one_norm(a);
    let squarings = if norm > THETA13 { (norm / THETA13).log2().ceil() as i32 } else { 0 };
    let a = a.scale(0.5f64.powi(squarings));
    let b = PADE13;
    let id = CMat::identity(n, n);
    let a2 = &a * &a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let c = |x: f64| C64::new(x, 0.0);

    let inner_u = &a6 * (a6.scale(b[13]) + a4.scale(b[11]) + a2.scale(b[9]))
        + a6.scale(b[7])
        + a4.scale(b[5])
        + a2.scale(b[3])
        + &id * c(b[1]);
    let u = &a * inner_u;
    let v = &a6 * (a6.scale(b[12]) + a4.scale(b[10]) + a2.scale(b[8]))
        + a6.scale(b[6])
        + a4.scale(b[4])
        + a2.scale(b[2])
        + &id * c(b[0]);

    let p = &v + &u;
    let q = &v - &u;
    let mut r = q.lu().solve(&p).expect("Padé denominator is nonsingular for scaled arguments");
    for _ in 0..squarings {
        r = &r * &r;
    }
    r
}

/// Solves for a vector spanning the numerical null space of `m` (the right
/// singular vector of its smallest singular value), returning it with that
/// singular value.
pub fn null_vectors(m: &CMat, count: usize) -> Vec<(f64, CVec)> {
    let svd = m.clone().svd(false, true);
    let v_t = svd.v_t.expect("requested right singular vectors");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[a].total_cmp(&svd.singular_values[b]));
    order.into_iter().take(count).map(|k| (svd.singular_values[k], v_t.row(k).adjoint())).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn expm_of_diagonal() {
        let a = CMat::from_diagonal(&CVec::from_vec(vec![c(-1.0, 0.0), c(0.0, 3.0), c(2.0, -1.0)]));
        let e = expm(&a);
        for k in 0..3 {
            assert!((e[(k, k)] - a[(k, k)].exp()).norm() < 1e-13);
        }
    }

    #[test]
    fn expm_of_rotation_generator() {
        // exp(t [[0,-1],[1,0]]) is a rotation; t large enough to force squaring.
        let t = 37.0;
        let a = CMat::from_row_slice(2, 2, &[c(0.0, 0.0), c(-t, 0.0), c(t, 0.0), c(0.0, 0.0)]);
        let e = expm(&a);
        let expected = CMat::from_row_slice(
            2,
            2,
            &[c(t.cos(), 0.0), c(-t.sin(), 0.0), c(t.sin(), 0.0), c(t.cos(), 0.0)],
        );
        assert!(max_abs_diff(&e, &expected) < 1e-11);
    }

    #[test]
    fn expm_nilpotent() {
        let a = CMat::from_row_slice(2, 2, &[ZERO, c(2.5, 1.0), ZERO, ZERO]);
        let e = expm(&a);
        let expected = CMat::from_row_slice(2, 2, &[ONE, c(2.5, 1.0), ZERO, ONE]);
        assert!(max_abs_diff(&e, &expected) < 1e-14);
    }

    #[test]
    fn kron_shapes_and_entries() {
        let a = CMat::from_row_slice(2, 2, &[c(1.0, 0.0), c(2.0, 0.0), c(3.0, 0.0), c(4.0, 0.0)]);
        let b = CMat::identity(2, 2);
        let k = kron(&a, &b);
        assert_eq!(k.shape(), (4, 4));
        assert_eq!(k[(0, 2)], c(2.0, 0.0));
        assert_eq!(k[(3, 1)], c(3.0, 0.0));
        assert_eq!(k[(0, 1)], ZERO);
    }

    #[test]
    fn sqrt_squares_back() {
        let m = CMat::from_row_slice(2, 2, &[c(0.7, 0.0), c(0.1, 0.2), c(0.1, -0.2), c(0.3, 0.0)]);
        let s = psd_sqrt(&m, 1e-8).unwrap();
        assert!(max_abs_diff(&(&s * &s), &m) < 1e-14);
    }

    #[test]
    fn sqrt_rejects_indefinite() {
        let m = CMat::from_diagonal(&CVec::from_vec(vec![c(1.0, 0.0), c(-0.1, 0.0)]));
        assert!(psd_sqrt(&m, 1e-8).is_err());
    }

    #[test]
    fn schur_eigenvalues_of_triangular() {
        let m = CMat::from_row_slice(2, 2, &[c(1.0, 1.0), c(5.0, 0.0), ZERO, c(-2.0, 0.5)]);
        let mut ev = general_eigenvalues(&m);
        ev.sort_by(|a, b| a.re.total_cmp(&b.re));
        assert!((ev[0] - c(-2.0, 0.5)).norm() < 1e-13);
        assert!((ev[1] - c(1.0, 1.0)).norm() < 1e-13);
    }

    fn sample_hermitian() -> CMat {
        let a =
            CMat::from_fn(5, 5, |i, j| c((i * 7 + j * 3) as f64 % 5.0 - 2.0, (i as f64 - j as f64) * 0.3));
        hermitian_part(&a)
    }

    #[test]
    fn embedded_eigen_matches_complex_solver() {
        let h = sample_hermitian();
        let (values, vectors) = embedded_eigen(&h);
        let mut direct: Vec<f64> = h.clone().symmetric_eigenvalues().iter().copied().collect();
        direct.sort_by(f64::total_cmp);
        for (a, b) in values.iter().zip(&direct) {
            assert!((a - b).abs() < 1e-12);
        }
        let d = CMat::from_diagonal(&CVec::from_iterator(5, values.iter().map(|&l| c(l, 0.0))));
        assert!(max_abs_diff(&(&vectors * d * vectors.adjoint()), &h) < 1e-12);
    }

    #[test]
    fn block_split_reassembles() {
        let mut h = CMat::zeros(6, 6);
        h[(0, 4)] = c(0.0, 1.0);
        h[(4, 0)] = c(0.0, -1.0);
        h[(2, 2)] = c(3.0, 0.0);
        h[(1, 5)] = c(0.5, 0.5);
        h[(5, 1)] = c(0.5, -0.5);
        let (values, vectors) = hermitian_eigen(&h);
        let d = CMat::from_diagonal(&CVec::from_iterator(6, values.iter().map(|&l| c(l, 0.0))));
        assert!(max_abs_diff(&(&vectors * d * vectors.adjoint()), &h) < 1e-13);
        assert!(max_abs_diff(&(vectors.adjoint() * &vectors), &CMat::identity(6, 6)) < 1e-13);
        assert_eq!(values, hermitian_eigenvalues(&h));
    }
}
