//! Exhaustive maximum-likelihood detection.
//!
//! Minimizes `||y - H x||^2` over every constellation vector. Candidates
//! are visited in mixed-radix reflected-Gray order so consecutive vectors
//! differ in a single position; the residual is then updated with one
//! column axpy (`O(N)` per candidate) instead of a full product. The
//! search space is capped at 2^20 candidates.

use crate::config::SystemConfig;
use crate::{Error, Result};
use ndarray::Array2;
use num_complex::Complex64;

/// Hard cap on `N log2(Q)` for exhaustive search.
pub const ML_CAP_BITS: usize = 20;

/// Exact ML decisions (symbol labels) for `y = H x + w` in the DAF domain.
pub fn ml_detect(
    y_daf: &[Complex64],
    h_daf: &Array2<Complex64>,
    config: &SystemConfig,
) -> Result<Vec<usize>> {
    let n = config.n;
    if y_daf.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: y_daf.len() });
    }
    let q = config.alphabet.len();
    let bits = n * config.alphabet.bits_per_symbol;
    if bits > ML_CAP_BITS {
        return Err(Error::SearchCapExceeded { bits, cap: ML_CAP_BITS });
    }
    let points = &config.alphabet.points;

    // start at the all-zeros label vector
    let mut digits = vec![0usize; n];
    let mut dirs = vec![1isize; n];
    let mut residual: Vec<Complex64> = (0..n)
        .map(|r| {
            let hx: Complex64 = (0..n).map(|c| h_daf[(r, c)] * points[0]).sum();
            y_daf[r] - hx
        })
        .collect();
    let metric = |r: &[Complex64]| -> f64 { r.iter().map(|v| v.norm_sqr()).sum() };

    let mut best_metric = metric(&residual);
    let mut best = digits.clone();
    let mut steps: u64 = 0;

    loop {
        // mixed-radix reflected-Gray odometer: advance the lowest position
        // that can move in its current direction
        let mut pos = 0;
        let mut moved = false;
        while pos < n {
            let next = digits[pos] as isize + dirs[pos];
            if next >= 0 && (next as usize) < q {
                let old = digits[pos];
                digits[pos] = next as usize;
                let delta = points[digits[pos]] - points[old];
                for (r, res) in residual.iter_mut().enumerate() {
                    *res -= h_daf[(r, pos)] * delta;
                }
                moved = true;
                break;
            }
            dirs[pos] = -dirs[pos];
            pos += 1;
        }
        if !moved {
            break;
        }
        steps += 1;
        // refresh the residual occasionally to stop drift from the
        // incremental updates
        if steps & 0x1FFF == 0 {
            for (r, res) in residual.iter_mut().enumerate() {
                let hx: Complex64 = (0..n).map(|c| h_daf[(r, c)] * points[digits[c]]).sum();
                *res = y_daf[r] - hx;
            }
        }
        let m = metric(&residual);
        if m < best_metric {
            best_metric = m;
            best.copy_from_slice(&digits);
        }
    }
    Ok(best)
}
