//! One-shot linear MMSE detection in the DAF domain.

use crate::config::SystemConfig;
use crate::linalg::{adj_matvec, matmul_adj, HermChol};
use crate::{Error, Result};
use ndarray::Array2;
use num_complex::Complex64;

/// `x_hat = H^H (H H^H + N0 I)^{-1} y`, then per-symbol nearest-point
/// slicing. Returns the soft estimates and the hard symbol labels.
pub fn lmmse_detect(
    y_daf: &[Complex64],
    h_daf: &Array2<Complex64>,
    n0: f64,
    config: &SystemConfig,
) -> Result<(Vec<Complex64>, Vec<usize>)> {
    let n = config.n;
    if y_daf.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: y_daf.len() });
    }
    let mut gram = matmul_adj(h_daf, h_daf);
    for i in 0..n {
        gram[(i, i)] += Complex64::new(n0, 0.0);
    }
    let chol = HermChol::new(&gram)?;
    let z = chol.solve_vec(y_daf);
    let soft = adj_matvec(h_daf, &z);
    let hard = soft.iter().map(|&v| config.alphabet.slice(v)).collect();
    Ok((soft, hard))
}
