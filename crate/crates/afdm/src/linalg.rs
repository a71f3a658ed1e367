//! Dense complex linear algebra used by the detectors: matrix products and
//! Hermitian positive-definite factorizations, backed by `faer`.
//!
//! Matrices at the crate API are `ndarray::Array2<Complex64>` in standard
//! (row-major) layout; views are passed to `faer` without copying. All
//! routines run sequentially so results are bit-reproducible regardless of
//! thread count (trial-level parallelism happens above this layer).

use crate::{Error, Result};
use faer::linalg::solvers::Llt;
use faer::prelude::Solve;
use faer::{MatRef, Par, Side};
use ndarray::Array2;
use num_complex::Complex64;

fn as_faer(a: &Array2<Complex64>) -> MatRef<'_, Complex64> {
    let (r, c) = a.dim();
    let slice = a
        .as_slice()
        .expect("matrix must be in standard row-major layout");
    MatRef::from_row_major_slice(slice, r, c)
}

fn to_ndarray(m: faer::Mat<Complex64>) -> Array2<Complex64> {
    Array2::from_shape_fn((m.nrows(), m.ncols()), |(i, j)| m[(i, j)])
}

/// `A B`.
pub fn matmul(a: &Array2<Complex64>, b: &Array2<Complex64>) -> Array2<Complex64> {
    assert_eq!(a.ncols(), b.nrows());
    let mut out = faer::Mat::<Complex64>::zeros(a.nrows(), b.ncols());
    faer::linalg::matmul::matmul(
        out.as_mut(),
        faer::Accum::Replace,
        as_faer(a),
        as_faer(b),
        Complex64::new(1.0, 0.0),
        Par::Seq,
    );
    to_ndarray(out)
}

/// `A B^H`.
pub fn matmul_adj(a: &Array2<Complex64>, b: &Array2<Complex64>) -> Array2<Complex64> {
    assert_eq!(a.ncols(), b.ncols());
    let mut out = faer::Mat::<Complex64>::zeros(a.nrows(), b.nrows());
    faer::linalg::matmul::matmul(
        out.as_mut(),
        faer::Accum::Replace,
        as_faer(a),
        as_faer(b).adjoint(),
        Complex64::new(1.0, 0.0),
        Par::Seq,
    );
    to_ndarray(out)
}

/// `A x` for a vector `x`.
pub fn matvec(a: &Array2<Complex64>, x: &[Complex64]) -> Vec<Complex64> {
    assert_eq!(a.ncols(), x.len());
    a.rows()
        .into_iter()
        .map(|row| row.iter().zip(x).map(|(h, v)| h * v).sum())
        .collect()
}

/// `A^H x`.
pub fn adj_matvec(a: &Array2<Complex64>, x: &[Complex64]) -> Vec<Complex64> {
    assert_eq!(a.nrows(), x.len());
    let mut out = vec![Complex64::default(); a.ncols()];
    for (row, xv) in a.rows().into_iter().zip(x) {
        for (o, h) in out.iter_mut().zip(row) {
            *o += h.conj() * xv;
        }
    }
    out
}

/// Cholesky factorization of a Hermitian positive-definite matrix.
pub struct HermChol {
    llt: Llt<Complex64>,
}

impl HermChol {
    pub fn new(m: &Array2<Complex64>) -> Result<Self> {
        let llt = Llt::new(as_faer(m), Side::Lower).map_err(|_| Error::Singular)?;
        Ok(Self { llt })
    }

    /// `M^{-1} B`.
    pub fn solve_mat(&self, b: &Array2<Complex64>) -> Array2<Complex64> {
        to_ndarray(self.llt.solve(as_faer(b)))
    }

    /// `M^{-1} x`.
    pub fn solve_vec(&self, x: &[Complex64]) -> Vec<Complex64> {
        let rhs = MatRef::from_row_major_slice(x, x.len(), 1);
        let sol = self.llt.solve(rhs);
        (0..x.len()).map(|i| sol[(i, 0)]).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::util::trial_rng;
    use rand::Rng;

    fn random_mat(r: usize, c: usize, seed: u64) -> Array2<Complex64> {
        let mut rng = trial_rng(seed, 0);
        Array2::from_shape_fn((r, c), |_| {
            Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
        })
    }

    fn naive_matmul(a: &Array2<Complex64>, b: &Array2<Complex64>) -> Array2<Complex64> {
        let (m, k) = a.dim();
        let n = b.ncols();
        let mut out = Array2::default((m, n));
        for i in 0..m {
            for j in 0..n {
                let mut acc = Complex64::default();
                for l in 0..k {
                    acc += a[(i, l)] * b[(l, j)];
                }
                out[(i, j)] = acc;
            }
        }
        out
    }

    #[test]
    fn matmul_matches_naive() {
        let a = random_mat(7, 5, 1);
        let b = random_mat(5, 9, 2);
        let fast = matmul(&a, &b);
        let slow = naive_matmul(&a, &b);
        for (x, y) in fast.iter().zip(slow.iter()) {
            assert!((x - y).norm() < 1e-12);
        }
    }

    #[test]
    fn adjoint_product_hermitian() {
        let a = random_mat(6, 11, 3);
        let g = matmul_adj(&a, &a);
        for i in 0..6 {
            for j in 0..6 {
                assert!((g[(i, j)] - g[(j, i)].conj()).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn cholesky_solves() {
        let a = random_mat(8, 8, 4);
        let mut m = matmul_adj(&a, &a);
        for i in 0..8 {
            m[(i, i)] += Complex64::new(8.0, 0.0);
        }
        let x_true: Vec<Complex64> = (0..8).map(|i| Complex64::new(i as f64, -1.0)).collect();
        let b = matvec(&m, &x_true);
        let chol = HermChol::new(&m).unwrap();
        let x = chol.solve_vec(&b);
        for (u, v) in x.iter().zip(&x_true) {
            assert!((u - v).norm() < 1e-9);
        }
    }

    #[test]
    fn cholesky_rejects_indefinite() {
        let mut m = Array2::<Complex64>::default((3, 3));
        m[(0, 0)] = Complex64::new(-1.0, 0.0);
        m[(1, 1)] = Complex64::new(1.0, 0.0);
        m[(2, 2)] = Complex64::new(1.0, 0.0);
        assert!(HermChol::new(&m).is_err());
    }
}
