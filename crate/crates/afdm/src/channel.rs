//! Wideband doubly-dispersive channel model.
//!
//! Each propagation path has a complex gain, an integer-tap delay and a
//! Doppler *scale* factor `alpha`: the received contribution of a path is
//! the transmit waveform evaluated at the scaled time `(1 + alpha) t - tau`
//! times the carrier-induced phase ramp. With `alpha != 0` the pulse is
//! compressed or dilated (time-scaling), which a plain frequency shift
//! cannot represent.
//!
//! The module provides:
//! - spread descriptors and path sampling (arcsine-distributed scales,
//!   distinct integer delays);
//! - chirp-periodic prefix/suffix (CPP/CPS) framing and the guard lengths
//!   that absorb delay and time-scaling inside the observation window;
//! - the piecewise phase-wrap schedule of each chirp sub-carrier (the times
//!   where its instantaneous frequency wraps around the band edge);
//! - exact `N x N` time-domain equivalent path matrices, built row-wise
//!   with one FFT per row (`O(N^2 log N)`);
//! - channel application with AWGN under the circular (guards stripped)
//!   model.

use crate::config::{ChirpParams, SystemConfig};
use crate::util::{cis_neg_prod, cis_pos, cis_pos_prod, complex_gaussian, trial_rng};
use crate::{Error, Result};
use ndarray::Array2;
use num_complex::Complex64;
use rand::seq::index::sample as index_sample;
use rand::Rng;
use rustfft::FftPlanner;
use std::f64::consts::{PI, TAU};

/// Delay / Doppler-scale spread of a channel ensemble, with the derived
/// integer delay span `ell_max = floor(tau_max / delta_t)` and normalized
/// Doppler span `k_max = alpha_max f_c / delta_f`.
#[derive(Debug, Clone, Copy)]
pub struct ChannelSpread {
    pub tau_max: f64,
    pub alpha_max: f64,
    pub ell_max: usize,
    pub k_max: f64,
}

impl ChannelSpread {
    pub fn new(tau_max: f64, alpha_max: f64, config: &SystemConfig) -> Result<Self> {
        if !(0.0..1.0).contains(&alpha_max) {
            return Err(Error::Config(format!(
                "alpha_max = {alpha_max} must lie in [0, 1)"
            )));
        }
        if tau_max < 0.0 {
            return Err(Error::Config("tau_max must be non-negative".into()));
        }
        let ell_max = (tau_max / config.delta_t).floor() as usize;
        let k_max = alpha_max * config.f_c / config.delta_f;
        Ok(Self { tau_max, alpha_max, ell_max, k_max })
    }
}

/// One propagation path. Delays are quantized to the sample grid, so
/// `tau = ell * delta_t` exactly; `nu = alpha f_c` and `k = nu / delta_f`.
#[derive(Debug, Clone, Copy)]
pub struct ChannelPath {
    pub gain: Complex64,
    pub tau: f64,
    pub alpha: f64,
    pub nu: f64,
    pub ell: usize,
    pub k: f64,
}

impl ChannelPath {
    pub fn from_taps(gain: Complex64, ell: usize, alpha: f64, config: &SystemConfig) -> Self {
        let nu = alpha * config.f_c;
        Self {
            gain,
            tau: ell as f64 * config.delta_t,
            alpha,
            nu,
            ell,
            k: nu / config.delta_f,
        }
    }
}

/// A sampled channel: `P` paths plus the CPP/CPS guard lengths.
#[derive(Debug, Clone)]
pub struct WidebandChannel {
    pub paths: Vec<ChannelPath>,
    pub l_cpp: usize,
    pub l_cps: usize,
}

/// Per-path average-power profile used by [`sample_channel`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GainProfile {
    /// Gains i.i.d. circular complex Gaussian with variance `1/P`.
    ComplexGaussian,
    /// Equal-magnitude gains `1/sqrt(P)` with i.i.d. uniform phases.
    UniformPhase,
}

/// Smallest guard lengths whose durations strictly exceed
/// `tau_max / (1 - alpha_max)` (prefix) and
/// `alpha_max T / (1 + alpha_max)` (suffix).
pub fn guard_lengths(config: &SystemConfig, spread: &ChannelSpread) -> (usize, usize) {
    let cpp = spread.tau_max / ((1.0 - spread.alpha_max) * config.delta_t);
    let cps = spread.alpha_max * config.t / ((1.0 + spread.alpha_max) * config.delta_t);
    (cpp.floor() as usize + 1, cps.floor() as usize + 1)
}

/// Extend an in-window time-domain frame with its chirp-periodic prefix and
/// suffix. Prefix samples at `n in [-L_cpp, 0)` satisfy
/// `x[n] = x[n + N] exp(-j 2 pi c1 (N^2 + 2 N n))`, and suffix samples at
/// `n in [N, N + L_cps)` the mirrored relation.
pub fn add_cpp_cps(
    x_time: &[Complex64],
    channel: &WidebandChannel,
    chirp: ChirpParams,
) -> Vec<Complex64> {
    let n = x_time.len();
    let nf = n as f64;
    let mut out = Vec::with_capacity(channel.l_cpp + n + channel.l_cps);
    for i in 0..channel.l_cpp {
        let nn = i as f64 - channel.l_cpp as f64; // negative sample index
        let phase = cis_neg_prod(chirp.c1, nf * nf + 2.0 * nf * nn);
        out.push(x_time[(n - channel.l_cpp) + i] * phase);
    }
    out.extend_from_slice(x_time);
    for i in 0..channel.l_cps {
        let nn = (n + i) as f64;
        let phase = cis_pos_prod(chirp.c1, nf * nf + 2.0 * nf * nn);
        out.push(x_time[i] * phase);
    }
    out
}

/// The times in `(0, T)` where chirp sub-carrier `m`'s instantaneous
/// frequency wraps around the band edge, and the step count
/// `psi_m(t) = #{breakpoints <= t}` (left-closed intervals).
#[derive(Debug, Clone)]
pub struct PhaseWrapSchedule {
    pub m: usize,
    pub breakpoints: Vec<f64>,
    frame_t: f64,
}

impl PhaseWrapSchedule {
    /// Wrap count at time `t`; times outside `[0, T)` are reduced modulo
    /// `T`, matching the chirp-periodic frame extension.
    #[inline]
    pub fn count(&self, t: f64) -> usize {
        let tw = if (0.0..self.frame_t).contains(&t) {
            t
        } else {
            t.rem_euclid(self.frame_t)
        };
        self.breakpoints.partition_point(|b| *b <= tw)
    }
}

/// Build the wrap schedule of sub-carrier `m`. Breakpoints follow
/// `t_rho = ((N - m) / (2 N c1) + (rho - 1) / (2 c1)) T / N` for
/// `rho = 1, 2, ...` while they stay inside `(0, T)`; at most
/// `ceil(2 N c1)` of them exist. With `c1 = 0` no sub-carrier sweeps and
/// the schedule is empty.
pub fn phase_wrap_schedule(m: usize, config: &SystemConfig, chirp: ChirpParams) -> PhaseWrapSchedule {
    debug_assert!(m <= config.n);
    let mut breakpoints = Vec::new();
    if chirp.c1 > 0.0 {
        let n = config.n as f64;
        let step = config.t / (2.0 * chirp.c1 * n);
        let first = (n - m as f64) / (2.0 * n * chirp.c1) * (config.t / n);
        let cap = (2.0 * n * chirp.c1).ceil() as usize + 1;
        for rho in 0..cap {
            let t = first + rho as f64 * step;
            if t >= config.t {
                break;
            }
            if t > 0.0 {
                breakpoints.push(t);
            }
        }
    }
    PhaseWrapSchedule { m, breakpoints, frame_t: config.t }
}

/// Wrap schedules for every sub-carrier `m = 0..N`.
pub fn all_wrap_schedules(config: &SystemConfig, chirp: ChirpParams) -> Vec<PhaseWrapSchedule> {
    (0..config.n)
        .map(|m| phase_wrap_schedule(m, config, chirp))
        .collect()
}

/// Exact time-domain equivalent matrix of a single path (unit gain).
///
/// Row `p` of the matrix maps the in-window transmit samples to the
/// received sample `p` of this path: with `s = (1 + alpha) p - ell` and
/// `t' = s delta_t`,
///
/// ```text
/// H[p, q] = exp(j 2 pi (c1 s^2 - c1 q^2 + k p / N)) * F[p, q]
/// F[p, q] = (1/N) sum_m exp(j 2 pi (m (s - q) / N - psi_m(t') alpha p))
/// ```
///
/// The inner sum over `m` is a DFT of the row sequence
/// `g[m] = exp(j 2 pi (m s / N - psi_m(t') alpha p))`, so each row costs one
/// FFT and the whole matrix `O(N^2 log N)`.
pub fn time_domain_path_matrix(
    path: &ChannelPath,
    config: &SystemConfig,
    chirp: ChirpParams,
) -> Array2<Complex64> {
    let schedules = all_wrap_schedules(config, chirp);
    time_domain_path_matrix_with(path, config, chirp, &schedules)
}

/// As [`time_domain_path_matrix`] but reusing prebuilt wrap schedules.
pub fn time_domain_path_matrix_with(
    path: &ChannelPath,
    config: &SystemConfig,
    chirp: ChirpParams,
    schedules: &[PhaseWrapSchedule],
) -> Array2<Complex64> {
    let n = config.n;
    let nf = n as f64;
    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_forward(n);
    let mut out = Array2::default((n, n));
    let mut row = vec![Complex64::default(); n];
    let col_chirp: Vec<Complex64> = (0..n)
        .map(|q| cis_neg_prod(chirp.c1, (q * q) as f64))
        .collect();
    for p in 0..n {
        let s = (1.0 + path.alpha) * p as f64 - path.ell as f64;
        let t_scaled = s * config.delta_t;
        for (m, g) in row.iter_mut().enumerate() {
            let psi = schedules[m].count(t_scaled) as f64;
            *g = cis_pos(m as f64 * s / nf - psi * path.alpha * p as f64);
        }
        fft.process(&mut row);
        let pre = cis_pos_prod(chirp.c1, s * s) * cis_pos(path.k * p as f64 / nf) / nf;
        for q in 0..n {
            out[(p, q)] = pre * col_chirp[q] * row[q];
        }
    }
    out
}

/// `sum_i h_i H_i`: the combined time-domain equivalent channel matrix.
pub fn time_domain_channel(
    channel: &WidebandChannel,
    config: &SystemConfig,
    chirp: ChirpParams,
) -> Array2<Complex64> {
    let schedules = all_wrap_schedules(config, chirp);
    let mut acc = Array2::<Complex64>::default((config.n, config.n));
    for path in &channel.paths {
        let h = time_domain_path_matrix_with(path, config, chirp, &schedules);
        acc.zip_mut_with(&h, |a, b| *a += path.gain * b);
    }
    acc
}

/// Draw a random channel: `P` distinct integer delays uniform over
/// `[0, ell_max]`, Doppler scales `alpha = alpha_max cos(theta)` with
/// `theta` uniform on `[-pi, pi]`, and gains per the requested profile.
pub fn sample_channel(
    spread: &ChannelSpread,
    p: usize,
    rng_seed: u64,
    profile: GainProfile,
    config: &SystemConfig,
) -> Result<WidebandChannel> {
    sample_channel_with(spread, p, rng_seed, profile, config, true)
}

/// As [`sample_channel`]; `distinct_delays = false` permits repeated
/// delays (stress-testing only).
pub fn sample_channel_with(
    spread: &ChannelSpread,
    p: usize,
    rng_seed: u64,
    profile: GainProfile,
    config: &SystemConfig,
    distinct_delays: bool,
) -> Result<WidebandChannel> {
    if p == 0 {
        return Err(Error::Config("channel needs at least one path".into()));
    }
    let grid = spread.ell_max + 1;
    if distinct_delays && p > grid {
        return Err(Error::Config(format!(
            "{p} distinct delays do not fit on the {grid}-tap grid [0, ell_max]"
        )));
    }
    let mut rng = trial_rng(rng_seed, 0);
    let mut delays: Vec<usize> = if distinct_delays {
        index_sample(&mut rng, grid, p).into_vec()
    } else {
        (0..p).map(|_| rng.gen_range(0..grid)).collect()
    };
    delays.sort_unstable();
    let paths = delays
        .into_iter()
        .map(|ell| {
            let theta = rng.gen_range(-PI..PI);
            let alpha = spread.alpha_max * theta.cos();
            let gain = match profile {
                GainProfile::ComplexGaussian => complex_gaussian(&mut rng, 1.0 / p as f64),
                GainProfile::UniformPhase => {
                    let phi = rng.gen_range(0.0..TAU);
                    Complex64::new(phi.cos(), phi.sin()) / (p as f64).sqrt()
                }
            };
            ChannelPath::from_taps(gain, ell, alpha, config)
        })
        .collect();
    let (l_cpp, l_cps) = guard_lengths(config, spread);
    Ok(WidebandChannel { paths, l_cpp, l_cps })
}

/// Push in-window transmit samples through the circular channel model:
/// `y = sum_i h_i H_i x + w` with `w` i.i.d. CN(0, N0). Guards are assumed
/// absorbed and stripped; the observation window is `[0, T)`.
pub fn apply_channel(
    x_time: &[Complex64],
    channel: &WidebandChannel,
    config: &SystemConfig,
    chirp: ChirpParams,
    n0: f64,
    rng_seed: u64,
) -> Result<Vec<Complex64>> {
    if x_time.len() != config.n {
        return Err(Error::DimensionMismatch { expected: config.n, got: x_time.len() });
    }
    let h = time_domain_channel(channel, config, chirp);
    Ok(apply_time_channel(&h, x_time, n0, rng_seed))
}

/// Apply a prebuilt time-domain channel matrix and add CN(0, N0) noise.
pub fn apply_time_channel(
    h: &Array2<Complex64>,
    x_time: &[Complex64],
    n0: f64,
    rng_seed: u64,
) -> Vec<Complex64> {
    let mut y = crate::linalg::matvec(h, x_time);
    if n0 > 0.0 {
        let mut rng = trial_rng(rng_seed, 1);
        for v in y.iter_mut() {
            *v += complex_gaussian(&mut rng, n0);
        }
    }
    y
}
