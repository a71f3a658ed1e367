//! Closed-form chirp-rate selection and frame-length feasibility.
//!
//! The chirp rate `c1` is chosen so that the DAF-domain supports of any
//! two resolvable paths stay disjoint under worst-case delay, Doppler
//! shift and Doppler scale, while staying as small as possible (smaller
//! `c1` means sparser rows). For dense delay profiles (minimum delay gap
//! of one tap) and small scales the rule simplifies to
//!
//! ```text
//! c1 = (2 k_max + 2 alpha_max (N - 1) + 2 N_v + 1) / (2 N (1 - 4 alpha_max (N - 1)))
//! ```
//!
//! which requires `N < 1/(4 alpha_max) + 1`. Keeping the total span of all
//! supports inside one frame adds a quadratic constraint on `N`; its root
//! window, intersected with the cap above, is the admissible frame-length
//! range.

use crate::channel::ChannelSpread;
use crate::{Error, Result};
use serde::Serialize;

/// Outcome of the admissible-frame-length analysis.
#[derive(Debug, Clone, Serialize)]
pub struct DesignReport {
    /// Optimized chirp rate at the reference frame length (NaN when that
    /// length is infeasible).
    pub c1_opt: f64,
    /// Narrowband-rule chirp rate at the reference frame length.
    pub c1_narrowband: f64,
    /// Reference frame length the two rates above were evaluated at.
    pub n_ref: usize,
    /// Open interval of admissible `N` (upper end already intersected
    /// with the positivity cap).
    pub n_low: f64,
    pub n_high: f64,
    /// Positivity cap `1/(4 alpha_max) + 1`.
    pub n_cap: f64,
    /// Quadratic coefficients `(a_N, b_N, c_N)` of the span constraint.
    pub a_n: f64,
    pub b_n: f64,
    pub c_n: f64,
    pub discriminant: f64,
    pub feasible: bool,
}

/// Optimized chirp rate for `N` symbols under the given spread.
///
/// `dense_delays = true` applies the simplified rule (minimum delay gap of
/// one tap, `alpha_max^2` terms dropped), the normal operating point. With
/// `dense_delays = false` the exact rule is used with [`optimize_c1_gap`]'s
/// default gap of one; call that variant directly for larger gaps.
pub fn optimize_c1(
    spread: &ChannelSpread,
    n: usize,
    n_v: usize,
    dense_delays: bool,
) -> Result<f64> {
    if dense_delays {
        let am = spread.alpha_max;
        let nf = n as f64;
        let denom_bracket = 1.0 - 4.0 * am * (nf - 1.0);
        if denom_bracket <= 0.0 {
            return Err(Error::InfeasibleN { n, cap: feasibility_cap(am) });
        }
        let num = 2.0 * spread.k_max + 2.0 * am * (nf - 1.0) + 2.0 * n_v as f64 + 1.0;
        Ok(num / (2.0 * nf * denom_bracket))
    } else {
        optimize_c1_gap(spread, n, n_v, 1)
    }
}

/// Exact chirp-rate rule for a caller-supplied minimum delay gap
/// (in taps) between resolvable paths.
pub fn optimize_c1_gap(
    spread: &ChannelSpread,
    n: usize,
    n_v: usize,
    min_delay_gap: usize,
) -> Result<f64> {
    let am = spread.alpha_max;
    let am2 = am * am;
    let nf = n as f64;
    let denom_bracket =
        (1.0 - am2) * min_delay_gap as f64 - 2.0 * am * (2.0 - am2) * (nf - 1.0);
    if denom_bracket <= 0.0 {
        let cap = (1.0 - am2) * min_delay_gap as f64 / (2.0 * am * (2.0 - am2)) + 1.0;
        return Err(Error::InfeasibleN { n, cap });
    }
    let num =
        2.0 * spread.k_max + 2.0 * am * (nf - 1.0) + 2.0 * (1.0 - am2) * n_v as f64 + 1.0;
    Ok(num / (2.0 * nf * denom_bracket))
}

/// Chirp rate under the narrowband rule `(2 k_max + 2 N_v + 1) / (2 N)`,
/// which ignores time-scaling entirely.
pub fn narrowband_c1(spread: &ChannelSpread, n: usize, n_v: usize) -> f64 {
    (2.0 * spread.k_max + 2.0 * n_v as f64 + 1.0) / (2.0 * n as f64)
}

/// Largest `N` keeping the optimized rate positive: `1/(4 alpha_max) + 1`.
pub fn feasibility_cap(alpha_max: f64) -> f64 {
    if alpha_max == 0.0 {
        f64::INFINITY
    } else {
        1.0 / (4.0 * alpha_max) + 1.0
    }
}

/// Admissible frame-length window for a spread: the quadratic span
/// constraint `a_N N^2 + b_N N + c_N < 0` intersected with the positivity
/// cap. `n_ref` (the reference config's `N`) is where the two chirp rates
/// in the report are evaluated. A non-positive discriminant yields
/// `feasible = false` rather than an error.
pub fn admissible_n(spread: &ChannelSpread, n_v: usize, n_ref: usize) -> DesignReport {
    let am = spread.alpha_max;
    let lm = spread.ell_max as f64;
    let a_n = 4.0 * am;
    let b_n = 2.0 * am * lm - 1.0;
    let c_n = (2.0 * spread.k_max + 2.0 * n_v as f64) * (lm + 1.0) + lm
        - (2.0 * lm + 6.0) * am;
    let cap = feasibility_cap(am);
    let (disc, n_low, n_high, feasible) = if a_n == 0.0 {
        // zero scale: the constraint is linear, N > c_N
        (b_n * b_n, c_n, f64::INFINITY, true)
    } else {
        let disc = b_n * b_n - 4.0 * a_n * c_n;
        if disc > 0.0 {
            let x_l = (-b_n - disc.sqrt()) / (2.0 * a_n);
            let x_h = (-b_n + disc.sqrt()) / (2.0 * a_n);
            let hi = x_h.min(cap);
            (disc, x_l, hi, x_l < hi)
        } else {
            (disc, f64::NAN, f64::NAN, false)
        }
    };
    let c1_opt = optimize_c1(spread, n_ref, n_v, true).unwrap_or(f64::NAN);
    DesignReport {
        c1_opt,
        c1_narrowband: narrowband_c1(spread, n_ref, n_v),
        n_ref,
        n_low,
        n_high: n_high.min(cap),
        n_cap: cap,
        a_n,
        b_n,
        c_n,
        discriminant: disc,
        feasible,
    }
}
