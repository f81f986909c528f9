//! Exponential action `e^{tA} v` by Arnoldi projection with adaptive
//! substeps.
//!
//! The Krylov basis does not depend on the step length, so a rejected step
//! only recomputes the small Hessenberg exponential.

use crate::linalg::{expm, ONE, ZERO};
use crate::{CMat, CVec, Error, Result, C64};

/// Default Krylov subspace dimension.
pub const DEFAULT_KRYLOV_DIM: usize = 30;
/// Default local error tolerance per unit time, relative to the vector norm.
pub const DEFAULT_KRYLOV_TOL: f64 = 1e-12;

const MAX_SUBSTEPS: usize = 100_000;

/// Parameters of [`expmv`].
#[derive(Debug, Clone, Copy)]
pub struct KrylovOptions {
    pub dim: usize,
    pub tol: f64,
}

impl Default for KrylovOptions {
    fn default() -> Self {
        Self { dim: DEFAULT_KRYLOV_DIM, tol: DEFAULT_KRYLOV_TOL }
    }
}

struct Arnoldi {
    basis: Vec<CVec>,
    h: CMat,
    /// Subdiagonal entry past the last column; zero on breakdown.
    h_next: f64,
    beta: f64,
}

fn arnoldi<F>(apply: &F, v: &CVec, m: usize) -> Arnoldi
where
    F: Fn(&[C64], &mut [C64]),
{
    let beta = v.norm();
    let mut basis = vec![v.unscale(beta)];
    let mut h = CMat::zeros(m, m);
    let mut w = CVec::zeros(v.len());
    let breakdown = 1e-13 * beta.max(1e-300);
    for j in 0..m {
        apply(basis[j].as_slice(), w.as_mut_slice());
        let scale = w.norm();
        // modified Gram–Schmidt with one reorthogonalization pass
        for _ in 0..2 {
            for (i, q) in basis.iter().enumerate() {
                let c = q.dotc(&w);
                h[(i, j)] += c;
                w.axpy(-c, q, ONE);
            }
        }
        let next = w.norm();
        if next <= breakdown.max(1e-14 * scale) || j + 1 == m {
            let size = j + 1;
            let h = h.view((0, 0), (size, size)).into_owned();
            let h_next = if j + 1 == m && next > breakdown.max(1e-14 * scale) { next } else { 0.0 };
            if h_next > 0.0 {
                basis.push(w.unscale(next));
            }
            return Arnoldi { basis, h, h_next, beta };
        }
        h[(j + 1, j)] = C64::new(next, 0.0);
        basis.push(w.unscale(next));
    }
    unreachable!("loop returns on its last iteration")
}

/// `e^{t A} v` where `apply(x, out)` writes `A x` into `out` and `norm`
/// bounds `||A||`.
pub fn expmv<F>(apply: F, norm: f64, v: &CVec, t: f64, opts: KrylovOptions) -> Result<CVec>
where
    F: Fn(&[C64], &mut [C64]),
{
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::InvalidArgument(format!("propagation time {t} must be finite and >= 0")));
    }
    if t == 0.0 || v.norm() == 0.0 {
        return Ok(v.clone());
    }
    let m = opts.dim.clamp(1, v.len());
    let mut w = v.clone();
    let mut done = 0.0;
    // initial step from the norm bound, grown or shrunk by the estimator
    let mut tau = if norm > 0.0 { (m as f64 / (2.0 * norm)).min(t) } else { t };
    let mut substeps = 0;
    while done < t {
        substeps += 1;
        if substeps > MAX_SUBSTEPS {
            return Err(Error::Integration {
                time: done,
                reason: format!("Krylov propagation exceeded {MAX_SUBSTEPS} substeps"),
            });
        }
        let kr = arnoldi(&apply, &w, m);
        let k = kr.h.nrows();
        let remaining = t - done;
        tau = tau.min(remaining);
        if kr.h_next == 0.0 {
            // invariant subspace: the projection is exact
            tau = remaining;
        }
        let (step, small) = loop {
            let e = expm(&kr.h.scale(tau));
            if kr.h_next == 0.0 {
                break (tau, e);
            }
            let err = kr.beta * kr.h_next * e[(k - 1, 0)].norm() * tau;
            let allowed = opts.tol * kr.beta * tau.max(1e-300) / t * t.max(1.0);
            if err <= allowed {
                break (tau, e);
            }
            let shrink = (0.9 * (allowed / err).powf(1.0 / (k as f64 + 1.0))).clamp(0.1, 0.5);
            tau *= shrink;
            if tau < 1e-12 * t {
                return Err(Error::Integration { time: done, reason: "Krylov step size underflow".into() });
            }
        };
        let mut next = CVec::zeros(w.len());
        for (i, q) in kr.basis.iter().take(k).enumerate() {
            let c = small[(i, 0)] * kr.beta;
            if c != ZERO {
                next.axpy(c, q, ONE);
            }
        }
        w = next;
        done += step;
        if remaining - step <= 1e-14 * t {
            done = t;
        }
        // try a larger step next time
        tau = step * 2.0;
    }
    Ok(w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_abs_diff_vec;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn dense_apply(a: &CMat) -> impl Fn(&[C64], &mut [C64]) + '_ {
        move |x, out| {
            let y = a * CVec::from_column_slice(x);
            out.copy_from_slice(y.as_slice());
        }
    }

    #[test]
    fn matches_dense_exponential() {
        let n = 60;
        let a = CMat::from_fn(n, n, |i, j| {
            let x = ((i * 7 + j * 13) % 17) as f64 / 17.0 - 0.5;
            let y = ((i * 3 + j * 5) % 11) as f64 / 11.0 - 0.5;
            c(x - if i == j { 2.0 } else { 0.0 }, 3.0 * y)
        });
        let v = CVec::from_fn(n, |i, _| c(1.0 / (1.0 + i as f64), (i % 3) as f64));
        let norm = crate::linalg::one_norm(&a);
        for t in [0.0, 0.01, 0.7, 5.0] {
            let exact = expm(&a.scale(t)) * &v;
            let got = expmv(dense_apply(&a), norm, &v, t, KrylovOptions::default()).unwrap();
            assert!(max_abs_diff_vec(&exact, &got) < 1e-10 * exact.norm().max(1.0), "t={t}");
        }
    }

    #[test]
    fn small_invariant_subspace_is_exact() {
        let a = CMat::from_diagonal(&CVec::from_vec(vec![c(0.0, 2.0), c(-1.0, 0.0), ZERO]));
        let v = CVec::from_vec(vec![ONE, ONE, ZERO]);
        let got = expmv(dense_apply(&a), 2.0, &v, 3.0, KrylovOptions::default()).unwrap();
        let expected = CVec::from_vec(vec![C64::from_polar(1.0, 6.0), c((-3.0f64).exp(), 0.0), ZERO]);
        assert!(max_abs_diff_vec(&expected, &got) < 1e-13);
    }

    #[test]
    fn rejects_negative_time() {
        let a = CMat::identity(2, 2);
        let v = CVec::from_vec(vec![ONE, ZERO]);
        assert!(expmv(dense_apply(&a), 1.0, &v, -1.0, KrylovOptions::default()).is_err());
    }
}
