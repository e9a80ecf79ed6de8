//! Dense linear algebra helpers on top of [`faer`].
//!
//! Everything runs sequentially ([`pin_sequential`]) so that identical
//! invocations produce bit-identical artifacts, and every factorization or
//! solve checks its output for non-finite values instead of silently
//! propagating them into result files.

use faer::linalg::solvers::{Llt, PartialPivLu, Solve};
use faer::{Mat, MatRef};
use thiserror::Error;

/// Errors from dense and iterative solvers.
#[derive(Debug, Error)]
pub enum LinalgError {
    #[error("matrix is not symmetric positive definite")]
    NotPositiveDefinite,
    #[error("linear solve produced non-finite values")]
    NonFinite,
    #[error("iterative solver stalled: relative residual {residual:.3e} after {iters} iterations")]
    NoConvergence { iters: usize, residual: f64 },
}

/// Pins faer to sequential execution.  Determinism matters more than wall
/// clock at the problem sizes this crate targets; call sites are idempotent.
pub fn pin_sequential() {
    static ONCE: std::sync::Once = std::sync::Once::new();
    ONCE.call_once(|| faer::set_global_parallelism(faer::Par::Seq));
}

fn all_finite(m: &Mat<f64>) -> bool {
    (0..m.ncols()).all(|j| (0..m.nrows()).all(|i| m[(i, j)].is_finite()))
}

/// Largest absolute entry; 0 for empty matrices.
pub fn max_abs(m: MatRef<'_, f64>) -> f64 {
    let mut best = 0.0f64;
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            best = best.max(m[(i, j)].abs());
        }
    }
    best
}

/// Partial-pivoting LU factorization of a square matrix.
pub struct Lu {
    inner: PartialPivLu<f64>,
}

impl Lu {
    pub fn new(a: MatRef<'_, f64>) -> Result<Self, LinalgError> {
        pin_sequential();
        if !(0..a.ncols()).all(|j| (0..a.nrows()).all(|i| a[(i, j)].is_finite())) {
            return Err(LinalgError::NonFinite);
        }
        Ok(Lu {
            inner: PartialPivLu::new(a),
        })
    }

    pub fn solve(&self, b: &Mat<f64>) -> Result<Mat<f64>, LinalgError> {
        let x = self.inner.solve(b);
        if all_finite(&x) {
            Ok(x)
        } else {
            Err(LinalgError::NonFinite)
        }
    }
}

/// Cholesky factorization of a symmetric positive definite matrix.
pub struct Chol {
    inner: Llt<f64>,
}

impl Chol {
    pub fn new(a: MatRef<'_, f64>) -> Result<Self, LinalgError> {
        pin_sequential();
        Llt::new(a, faer::Side::Lower)
            .map(|inner| Chol { inner })
            .map_err(|_| LinalgError::NotPositiveDefinite)
    }

    pub fn solve(&self, b: &Mat<f64>) -> Mat<f64> {
        self.inner.solve(b)
    }
}

/// Options for the restarted GMRES solver.
#[derive(Debug, Clone, Copy)]
pub struct IterOptions {
    /// Relative residual target (in the preconditioned norm).
    pub tol: f64,
    /// Total iteration budget across restarts.
    pub max_iters: usize,
    /// Krylov subspace dimension per restart cycle.
    pub restart: usize,
}

impl Default for IterOptions {
    fn default() -> Self {
        IterOptions {
            tol: 1e-13,
            max_iters: 600,
            restart: 150,
        }
    }
}

/// Left-preconditioned restarted GMRES for square nonsymmetric systems.
///
/// `apply` evaluates `A x`; `precond` applies an approximate inverse.  Returns
/// the solution and the total iteration count.  The implementation is the
/// textbook Arnoldi / modified Gram-Schmidt / Givens-rotation variant; it is
/// deliberately allocation-heavy and simple, since the dense factorized path
/// is the primary solver and this one is an opt-in alternative.
pub fn gmres(
    apply: &dyn Fn(&Mat<f64>) -> Mat<f64>,
    precond: &dyn Fn(&Mat<f64>) -> Mat<f64>,
    b: &Mat<f64>,
    x0: Mat<f64>,
    opts: &IterOptions,
) -> Result<(Mat<f64>, usize), LinalgError> {
    pin_sequential();
    let n = b.nrows();
    assert_eq!(x0.nrows(), n);
    let pb_norm = precond(b).norm_l2();
    if pb_norm == 0.0 {
        return Ok((Mat::zeros(n, 1), 0));
    }
    let target = opts.tol * pb_norm;
    let mut x = x0;
    let mut total_iters = 0usize;
    let mut last_resid = f64::INFINITY;

    while total_iters < opts.max_iters {
        let r = precond(&(b - apply(&x)));
        let beta = r.norm_l2();
        last_resid = beta / pb_norm;
        if beta <= target || !beta.is_finite() {
            break;
        }
        let m = opts.restart.min(opts.max_iters - total_iters);
        let mut basis: Vec<Mat<f64>> = vec![&r * faer::Scale(1.0 / beta)];
        // Upper-Hessenberg column storage: h[j] has j+2 entries.
        let mut h: Vec<Vec<f64>> = Vec::new();
        // Givens rotations and the rotated RHS of the least-squares problem.
        let mut cs: Vec<f64> = Vec::new();
        let mut sn: Vec<f64> = Vec::new();
        let mut g = vec![0.0f64; m + 1];
        g[0] = beta;
        let mut k_used = 0usize;

        for j in 0..m {
            total_iters += 1;
            let mut w = precond(&apply(&basis[j]));
            let mut col = vec![0.0f64; j + 2];
            for (i, v) in basis.iter().enumerate() {
                let mut dot = 0.0;
                for row in 0..n {
                    dot += v[(row, 0)] * w[(row, 0)];
                }
                col[i] = dot;
                for row in 0..n {
                    w[(row, 0)] -= dot * v[(row, 0)];
                }
            }
            let wn = w.norm_l2();
            col[j + 1] = wn;
            // Apply the accumulated rotations to the new column.
            for i in 0..j {
                let t = cs[i] * col[i] + sn[i] * col[i + 1];
                col[i + 1] = -sn[i] * col[i] + cs[i] * col[i + 1];
                col[i] = t;
            }
            let (c, s) = givens(col[j], col[j + 1]);
            cs.push(c);
            sn.push(s);
            col[j] = c * col[j] + s * col[j + 1];
            col[j + 1] = 0.0;
            let gj = g[j];
            g[j] = c * gj;
            g[j + 1] = -s * gj;
            h.push(col);
            k_used = j + 1;
            let resid = g[j + 1].abs();
            if !resid.is_finite() {
                return Err(LinalgError::NonFinite);
            }
            if resid <= target || wn == 0.0 {
                break;
            }
            basis.push(&w * faer::Scale(1.0 / wn));
        }

        // Back-substitute the triangularized least-squares system.
        let mut y = vec![0.0f64; k_used];
        for i in (0..k_used).rev() {
            let mut v = g[i];
            for j in (i + 1)..k_used {
                v -= h[j][i] * y[j];
            }
            y[i] = v / h[i][i];
        }
        for (j, yj) in y.iter().enumerate() {
            for row in 0..n {
                x[(row, 0)] += yj * basis[j][(row, 0)];
            }
        }
        last_resid = g[k_used].abs() / pb_norm;
        if last_resid <= opts.tol {
            if !all_finite(&x) {
                return Err(LinalgError::NonFinite);
            }
            return Ok((x, total_iters));
        }
    }

    // Final check on the true residual (the loop may exit via `break`).
    let r = precond(&(b - apply(&x)));
    let rel = r.norm_l2() / pb_norm;
    if rel <= opts.tol && all_finite(&x) {
        Ok((x, total_iters))
    } else {
        Err(LinalgError::NoConvergence {
            iters: total_iters,
            residual: rel.min(last_resid),
        })
    }
}

fn givens(a: f64, b: f64) -> (f64, f64) {
    if b == 0.0 {
        (1.0, 0.0)
    } else {
        let r = a.hypot(b);
        (a / r, b / r)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn test_system(n: usize) -> (Mat<f64>, Mat<f64>) {
        // Diagonally dominant nonsymmetric matrix with a deterministic
        // pseudo-random fill.
        let mut state = 0x9e3779b97f4a7c15u64;
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        let mut a = Mat::<f64>::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                a[(i, j)] = if i == j { 4.0 } else { 0.5 * next() };
            }
        }
        let b = Mat::from_fn(n, 1, |i, _| (i as f64 * 0.37).sin());
        (a, b)
    }

    #[test]
    fn lu_solves_and_checks_finiteness() {
        let (a, b) = test_system(24);
        let lu = Lu::new(a.as_ref()).unwrap();
        let x = lu.solve(&b).unwrap();
        assert!((&a * &x - &b).norm_l2() < 1e-12);
    }

    #[test]
    fn chol_rejects_indefinite() {
        let mut a = Mat::<f64>::zeros(3, 3);
        a[(0, 0)] = 1.0;
        a[(1, 1)] = -1.0;
        a[(2, 2)] = 1.0;
        assert!(Chol::new(a.as_ref()).is_err());
    }

    #[test]
    fn chol_solves_spd() {
        let n = 16;
        let mut a = Mat::<f64>::zeros(n, n);
        for i in 0..n {
            a[(i, i)] = 2.0;
            if i + 1 < n {
                a[(i, i + 1)] = -1.0;
                a[(i + 1, i)] = -1.0;
            }
        }
        let b = Mat::from_fn(n, 1, |i, _| 1.0 + i as f64);
        let ch = Chol::new(a.as_ref()).unwrap();
        let x = ch.solve(&b);
        assert!((&a * &x - &b).norm_l2() < 1e-10);
    }

    #[test]
    fn gmres_matches_lu() {
        let (a, b) = test_system(40);
        let lu = Lu::new(a.as_ref()).unwrap();
        let x_direct = lu.solve(&b).unwrap();
        let apply = |v: &Mat<f64>| &a * v;
        let diag_inv = |v: &Mat<f64>| {
            Mat::from_fn(v.nrows(), 1, |i, _| v[(i, 0)] / a[(i, i)])
        };
        let (x_iter, iters) = gmres(
            &apply,
            &diag_inv,
            &b,
            Mat::zeros(b.nrows(), 1),
            &IterOptions::default(),
        )
        .unwrap();
        assert!(iters > 0);
        assert!((&x_iter - &x_direct).norm_l2() < 1e-10);
    }
}
