//! DAF-domain equivalent channel and its sparsity structure.
//!
//! The exact DAF-domain channel is the unitary conjugation
//! `H = U H_T U^H` of the time-domain equivalent matrix. For a path with
//! Doppler scale `alpha != 0` the row entries follow an oscillatory sum
//! with quadratic phase; a stationary-phase approximation localizes the
//! nonzero entries of row `p` to an interval `[Q, Q~]` (mod `N`), widened
//! by a small guard `N_v`. Those intervals are what the chirp-rate
//! optimization keeps disjoint across paths.

use crate::channel::{
    all_wrap_schedules, phase_wrap_schedule, time_domain_path_matrix_with, ChannelPath,
    WidebandChannel,
};
use crate::config::{ChirpParams, SystemConfig};
use crate::daf::UnitaryTransform;
use crate::util::{cis_pos, cis_pos_prod};
use crate::{Error, Result};
use ndarray::Array2;
use num_complex::Complex64;

/// Stationary-phase kernel of one `(path, p, q)` entry: quadratic phase
/// rate `K = 2 c1 (alpha^2 + 2 alpha)`, normalized phase slope `phi`, and
/// stationary point `n_stat = phi / K`. The band-edge wrap count is taken
/// as zero here; support computations fold its full range instead.
#[derive(Debug, Clone, Copy)]
pub struct PospKernel {
    pub k: f64,
    pub phi: f64,
    pub n_stat: f64,
}

/// Predicted nonzero interval of row `p` for one path: real endpoints
/// `[q_low_real, q_high_real]` before rounding, integer bins
/// `[q_low, q_high]` (pre-modulo; reduce mod `N` for lookups), guard
/// `n_v` and total width `q_high - q_low + 1`.
#[derive(Debug, Clone, Copy)]
pub struct PospSupport {
    pub q_low: i64,
    pub q_high: i64,
    pub n_v: usize,
    pub width: usize,
    pub q_low_real: f64,
    pub q_high_real: f64,
}

impl PospSupport {
    /// Does DAF bin `q` fall inside the support (mod `N`)?
    pub fn contains(&self, q: usize, n: usize) -> bool {
        let nn = n as i64;
        let rel = (q as i64 - self.q_low).rem_euclid(nn);
        rel < self.width as i64
    }

    /// The support bins reduced mod `N`.
    pub fn bins(&self, n: usize) -> Vec<usize> {
        let nn = n as i64;
        (0..self.width.min(n) as i64)
            .map(|i| (self.q_low + i).rem_euclid(nn) as usize)
            .collect()
    }
}

/// Exact DAF-domain channel `sum_i h_i U H_i U^H` (ground truth for the
/// approximations; `O(P N^2 log N)`).
pub fn daf_domain_channel(
    channel: &WidebandChannel,
    config: &SystemConfig,
    chirp: ChirpParams,
) -> Result<Array2<Complex64>> {
    let u = UnitaryTransform::new(config.n, chirp);
    let ht = crate::channel::time_domain_channel(channel, config, chirp);
    u.conjugate(&ht)
}

/// Row `p` of the exact DAF-domain matrix of a single unit-gain path,
/// without materializing the full conjugated matrix.
pub fn daf_domain_path_row(
    path: &ChannelPath,
    p: usize,
    config: &SystemConfig,
    chirp: ChirpParams,
) -> Result<Vec<Complex64>> {
    Ok(daf_domain_path_rows(path, &[p], config, chirp)?.pop().unwrap())
}

/// Several rows of one path's exact DAF-domain matrix; the time-domain
/// matrix is built once and shared.
pub fn daf_domain_path_rows(
    path: &ChannelPath,
    rows: &[usize],
    config: &SystemConfig,
    chirp: ChirpParams,
) -> Result<Vec<Vec<Complex64>>> {
    let n = config.n;
    let schedules = all_wrap_schedules(config, chirp);
    let ht = time_domain_path_matrix_with(path, config, chirp, &schedules);
    let u = UnitaryTransform::new(n, chirp);
    rows.iter()
        .map(|&p| {
            // a = row p of U, b = a H_T, row = b U^H
            let a: Vec<Complex64> = (0..n).map(|j| u.entry(p, j)).collect();
            let mut b = vec![Complex64::default(); n];
            for (i, &ai) in a.iter().enumerate() {
                for (j, bv) in b.iter_mut().enumerate() {
                    *bv += ai * ht[(i, j)];
                }
            }
            let mut conj_b: Vec<Complex64> = b.iter().map(|v| v.conj()).collect();
            u.forward_in_place(&mut conj_b)?;
            Ok(conj_b.into_iter().map(|v| v.conj()).collect())
        })
        .collect()
}

/// Entry `H_i[p, q]` evaluated directly from the per-sample sum
/// (`O(N)` per entry): with `brk = p - (1 + alpha) q + 2 N c1 (1 + alpha) ell - k`,
///
/// ```text
/// H_i[p, q] = (1/N) exp(j 2 pi (c1 ell^2 - q ell / N + c2 (q^2 - p^2))) * F(p, q)
/// F(p, q)   = sum_n exp(j 2 pi (c1 (alpha^2 + 2 alpha) n^2
///                               - [brk + psi_q(t'(n)) alpha N] n / N))
/// ```
///
/// where `t'(n) = (n - ell + alpha n) delta_t` and `psi_q` is the wrap
/// schedule of sub-carrier `q`. Cross-checks the unitary-conjugation path.
pub fn daf_domain_path_direct(
    path: &ChannelPath,
    p: usize,
    q: usize,
    config: &SystemConfig,
    chirp: ChirpParams,
) -> Complex64 {
    let schedule = phase_wrap_schedule(q, config, chirp);
    daf_entry_with_schedule(path, p, q, config, chirp, &schedule)
}

fn daf_entry_with_schedule(
    path: &ChannelPath,
    p: usize,
    q: usize,
    config: &SystemConfig,
    chirp: ChirpParams,
    schedule_q: &crate::channel::PhaseWrapSchedule,
) -> Complex64 {
    let n = config.n;
    let nf = n as f64;
    let quad = chirp.c1 * (path.alpha * path.alpha + 2.0 * path.alpha);
    let brk = p as f64 - (1.0 + path.alpha) * q as f64
        + 2.0 * nf * chirp.c1 * (1.0 + path.alpha) * path.ell as f64
        - path.k;
    let mut f = Complex64::default();
    for nn in 0..n {
        let t = (nn as f64 - path.ell as f64 + path.alpha * nn as f64) * config.delta_t;
        let psi = schedule_q.count(t) as f64;
        let lin = (brk + psi * path.alpha * nf) * nn as f64 / nf;
        f += cis_pos_prod(quad, (nn * nn) as f64) * cis_pos(-lin);
    }
    let pre = cis_pos_prod(chirp.c1, (path.ell * path.ell) as f64)
        * cis_pos(-(q as f64) * path.ell as f64 / nf)
        * cis_pos_prod(chirp.c2, (q * q) as f64 - (p * p) as f64);
    pre * f / nf
}

/// Full matrix of one path assembled entrywise via
/// [`daf_domain_path_direct`] (test oracle; `O(N^3)`).
pub fn daf_domain_path_matrix_direct(
    path: &ChannelPath,
    config: &SystemConfig,
    chirp: ChirpParams,
) -> Array2<Complex64> {
    let n = config.n;
    let mut out = Array2::default((n, n));
    for q in 0..n {
        let schedule = phase_wrap_schedule(q, config, chirp);
        for p in 0..n {
            out[(p, q)] = daf_entry_with_schedule(path, p, q, config, chirp, &schedule);
        }
    }
    out
}

/// Stationary-phase kernel for entry `(p, q)`; errors when the path has
/// zero Doppler scale (no quadratic phase).
pub fn posp_kernel(
    path: &ChannelPath,
    p: usize,
    q: usize,
    config: &SystemConfig,
    chirp: ChirpParams,
) -> Result<PospKernel> {
    if path.alpha == 0.0 {
        return Err(Error::DegenerateKernel);
    }
    let nf = config.n as f64;
    let k = 2.0 * chirp.c1 * (path.alpha * path.alpha + 2.0 * path.alpha);
    let phi = (p as f64 - (1.0 + path.alpha) * q as f64
        + 2.0 * nf * chirp.c1 * (1.0 + path.alpha) * path.ell as f64
        - path.k)
        / nf;
    Ok(PospKernel { k, phi, n_stat: phi / k })
}

/// Stationary-phase magnitude estimate `|H_i[p, q]|`: `1 / (N sqrt(|K|))`
/// when the stationary point lies inside the frame, zero outside.
pub fn posp_magnitude(
    path: &ChannelPath,
    p: usize,
    q: usize,
    config: &SystemConfig,
    chirp: ChirpParams,
) -> Result<f64> {
    let kernel = posp_kernel(path, p, q, config, chirp)?;
    let inside = kernel.n_stat / (config.n as f64 - 1.0);
    if (0.0..=1.0).contains(&inside) {
        Ok(1.0 / (config.n as f64 * kernel.k.abs().sqrt()))
    } else {
        Ok(0.0)
    }
}

/// Real support endpoints `[Q, Q~]` of row `p` for one path, using the
/// bounds strengthened over the full wrap-count range (sign-split on
/// `alpha`; at `alpha = 0` both collapse onto the narrowband center
/// `p + 2 N c1 ell - k`).
pub fn support_endpoints(
    path: &ChannelPath,
    p: usize,
    config: &SystemConfig,
    chirp: ChirpParams,
) -> (f64, f64) {
    let nf = config.n as f64;
    let base = 2.0 * nf * chirp.c1 * path.ell as f64;
    let a = path.alpha;
    let rel = p as f64 - path.k;
    if a == 0.0 {
        let center = base + rel;
        return (center, center);
    }
    let sweep = 2.0 * chirp.c1 * (a * a + 2.0 * a) * nf * (nf - 1.0);
    let wrap = 2.0 * chirp.c1 * a * nf * nf;
    let (lo, hi) = if a > 0.0 {
        (base + (rel - sweep) / (1.0 + a), base + (rel + wrap) / (1.0 + a))
    } else {
        (base + (rel + wrap) / (1.0 + a), base + (rel - sweep) / (1.0 + a))
    };
    (lo, hi)
}

/// Predicted support of row `p`, widened by `n_v` bins each side.
pub fn posp_support(
    path: &ChannelPath,
    p: usize,
    n_v: usize,
    config: &SystemConfig,
    chirp: ChirpParams,
) -> PospSupport {
    let (lo, hi) = support_endpoints(path, p, config, chirp);
    let width = support_width(path, n_v, config, chirp);
    let q_low = lo.floor() as i64 - n_v as i64;
    PospSupport {
        q_low,
        q_high: q_low + width as i64 - 1,
        n_v,
        width,
        q_low_real: lo - n_v as f64,
        q_high_real: hi + n_v as f64,
    }
}

/// Support width in bins:
/// `ceil(|2 c1 (alpha^2 + 2 alpha) N (N - 1) + 2 c1 alpha N^2| / (1 + alpha)) + 2 n_v + 1`.
pub fn support_width(
    path: &ChannelPath,
    n_v: usize,
    config: &SystemConfig,
    chirp: ChirpParams,
) -> usize {
    let nf = config.n as f64;
    let a = path.alpha;
    let span = (2.0 * chirp.c1 * (a * a + 2.0 * a) * nf * (nf - 1.0)
        + 2.0 * chirp.c1 * a * nf * nf)
        .abs()
        / (1.0 + a);
    span.ceil() as usize + 2 * n_v + 1
}

/// Truncated product: apply the channel in the DAF domain keeping, for
/// each output row, only the exact entries inside each path's predicted
/// support. With `n_v >= N/2` no truncation occurs and the result equals
/// the exact product.
pub fn sparse_io(
    x_daf: &[Complex64],
    channel: &WidebandChannel,
    config: &SystemConfig,
    chirp: ChirpParams,
    n_v: usize,
) -> Result<Vec<Complex64>> {
    let n = config.n;
    if x_daf.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: x_daf.len() });
    }
    let schedules = all_wrap_schedules(config, chirp);
    let mut y = vec![Complex64::default(); n];
    for path in &channel.paths {
        for (p, acc) in y.iter_mut().enumerate() {
            let support = posp_support(path, p, n_v, config, chirp);
            let mut contrib = Complex64::default();
            for q in support.bins(n) {
                contrib +=
                    daf_entry_with_schedule(path, p, q, config, chirp, &schedules[q]) * x_daf[q];
            }
            *acc += path.gain * contrib;
        }
    }
    Ok(y)
}
