//! Cross-domain distributed OAMP detection.
//!
//! One iteration alternates a linear stage and a nonlinear stage coupled
//! through extrinsic (prior-removed) messages:
//!
//! 1. per row group, an LMMSE estimate of the associated symbols from the
//!    group's received samples and trimmed channel matrix;
//! 2. extrinsic extraction per entry (precision subtraction) and
//!    precision-weighted combining of symbols shared between groups;
//! 3. a unitary transform into the DAF domain (for the cross-domain
//!    variants) where the per-symbol posterior over the constellation is
//!    computed against the scalar-averaged message variance;
//! 4. posterior means return to the time domain and per-group priors for
//!    the next iteration come from another precision subtraction.
//!
//! Iteration stops once the fraction of symbols with a dominant posterior
//! reaches one, or after `max_iterations`. Posteriors are retained across
//! iterations whenever the convergence indicator does not decrease, and
//! final decisions are the per-symbol MAP under the retained posteriors.
//!
//! Variance bookkeeping follows the usual hazard rules: precision
//! differences are clamped into `[1/VAR_CAP, 1/VAR_FLOOR]` and clamp
//! events are reported per iteration.
//!
//! Counted multiply-accumulates cover the distributed-LMMSE stage (gram
//! build, factorization, solves, mean path) so the `C N_c^3 + C N_c^2 |D_c|`
//! complexity scaling can be checked empirically.

use crate::config::{Alphabet, ChirpParams, SystemConfig};
use crate::daf::UnitaryTransform;
use crate::detect::partition::{partition_groups, Group, GroupPartition};
use crate::linalg::{adj_matvec, matmul_adj, matvec, HermChol};
use crate::{Error, Result};
use ndarray::Array2;
use num_complex::Complex64;

/// Lower clamp for any stored variance.
pub const VAR_FLOOR: f64 = 1e-12;
/// Upper clamp for any stored variance.
pub const VAR_CAP: f64 = 1e6;

/// Knobs of the iterative detectors.
#[derive(Debug, Clone, Copy)]
pub struct OampParams {
    /// Number of row groups `C` (must divide `N`).
    pub groups: usize,
    /// Maximum iterations `n_t`.
    pub max_iterations: usize,
    /// Posterior-dominance tolerance in the convergence indicator.
    pub convergence_tol: f64,
    /// Relative column-energy threshold for group trimming.
    pub energy_threshold: f64,
    /// Stop at full convergence (`theta = 1`); disable to force exactly
    /// `max_iterations` iterations (used when tracing MSE trajectories).
    pub stop_on_convergence: bool,
}

impl Default for OampParams {
    fn default() -> Self {
        Self {
            groups: 1,
            max_iterations: 15,
            convergence_tol: 0.01,
            energy_threshold: 1e-6,
            stop_on_convergence: true,
        }
    }
}

/// Per-iteration diagnostics.
#[derive(Debug, Clone, Copy)]
pub struct IterationTrace {
    /// Average DAF-domain posterior variance after denoising.
    pub eta_daf_posterior: f64,
    /// Convergence indicator (fraction of symbols with dominant posterior).
    pub theta: f64,
    /// Mean squared error of the DAF-domain posterior mean against the
    /// true symbols, when the truth was supplied.
    pub mse: Option<f64>,
    /// Variance clamp events this iteration.
    pub clamps: u64,
    /// Multiply-accumulates spent in the distributed-LMMSE stage.
    pub dlmmse_macs: u64,
}

/// Detector result: MAP symbol labels, retained posteriors, and the
/// per-iteration trace.
#[derive(Debug, Clone)]
pub struct DetectorOutput {
    pub symbols: Vec<usize>,
    pub posteriors: Vec<Vec<f64>>,
    pub iterations: usize,
    pub trace: Vec<IterationTrace>,
}

impl DetectorOutput {
    /// Total distributed-LMMSE multiply-accumulates across iterations.
    pub fn total_dlmmse_macs(&self) -> u64 {
        self.trace.iter().map(|t| t.dlmmse_macs).sum()
    }
}

struct GroupState {
    mu_a: Vec<Complex64>,
    eta_a: Vec<f64>,
    mu_e: Vec<Complex64>,
    eta_e: Vec<f64>,
}

/// Factorized LMMSE stage of one group: the Cholesky factor of
/// `H S H^H + N0 I` and the posterior variance `diag(S - W H S)` with
/// `S = diag(eta_a)`. The variance part is data-free, which is also what
/// the state-evolution recursion tracks.
pub(crate) fn lmmse_factor(
    h: &Array2<Complex64>,
    eta_a: &[f64],
    n0: f64,
    macs: &mut u64,
) -> Result<(HermChol, Vec<f64>, u64)> {
    let (nc, dc) = h.dim();
    let mut scaled = h.clone();
    for mut row in scaled.rows_mut() {
        for (v, &e) in row.iter_mut().zip(eta_a) {
            *v *= e;
        }
    }
    let mut m = matmul_adj(&scaled, h);
    for i in 0..nc {
        m[(i, i)] += Complex64::new(n0, 0.0);
    }
    let chol = HermChol::new(&m)?;
    // posterior variance: eta_a[d] - eta_a[d]^2 * (H^H M^{-1} H)[d, d]
    let x = chol.solve_mat(h);
    let mut clamps = 0;
    let mut eta_p = Vec::with_capacity(dc);
    for d in 0..dc {
        let mut acc = 0.0;
        for r in 0..nc {
            let prod = h[(r, d)].conj() * x[(r, d)];
            acc += prod.re;
        }
        let mut v = eta_a[d] - eta_a[d] * eta_a[d] * acc;
        if !(v >= VAR_FLOOR) {
            v = VAR_FLOOR;
            clamps += 1;
        }
        eta_p.push(v.min(VAR_CAP));
    }
    let (ncu, dcu) = (nc as u64, dc as u64);
    *macs += ncu * ncu * dcu // gram build
        + ncu * ncu * ncu / 3 // factorization
        + ncu * ncu * dcu // posterior-variance solve
        + ncu * dcu; // diagonal accumulation
    Ok((chol, eta_p, clamps))
}

/// LMMSE posterior of one group: `W = S H^H (H S H^H + N0 I)^{-1}` with
/// `S = diag(eta_a)`, posterior mean `mu_a + W (y - H mu_a)` and variance
/// `diag(S - W H S)`.
fn d_lmmse_step(
    y: &[Complex64],
    h: &Array2<Complex64>,
    mu_a: &[Complex64],
    eta_a: &[f64],
    n0: f64,
    macs: &mut u64,
) -> Result<(Vec<Complex64>, Vec<f64>, u64)> {
    let (nc, dc) = h.dim();
    let (chol, eta_p, clamps) = lmmse_factor(h, eta_a, n0, macs)?;
    // posterior mean
    let hm = matvec(h, mu_a);
    let r: Vec<Complex64> = y.iter().zip(&hm).map(|(a, b)| a - b).collect();
    let z = chol.solve_vec(&r);
    let corr = adj_matvec(h, &z);
    let mu_p: Vec<Complex64> = mu_a
        .iter()
        .zip(&corr)
        .zip(eta_a)
        .map(|((m, c), &e)| m + c * e)
        .collect();
    let (ncu, dcu) = (nc as u64, dc as u64);
    *macs += 2 * ncu * dcu + ncu * ncu; // mean path
    Ok((mu_p, eta_p, clamps))
}

/// Variance left after removing one Gaussian factor from another by
/// precision subtraction, clamped into the variance window.
#[inline]
pub(crate) fn subtracted_variance(eta_num: f64, eta_removed: f64, clamps: &mut u64) -> f64 {
    let mut prec = 1.0 / eta_num - 1.0 / eta_removed;
    if !(prec > 1.0 / VAR_CAP) {
        prec = 1.0 / VAR_CAP;
        *clamps += 1;
    } else if prec > 1.0 / VAR_FLOOR {
        prec = 1.0 / VAR_FLOOR;
        *clamps += 1;
    }
    1.0 / prec
}

/// Extrinsic message from a (posterior, prior) pair by precision
/// subtraction; clamped into the variance window.
#[inline]
fn extrinsic_pair(
    mu_p: Complex64,
    eta_p: f64,
    mu_a: Complex64,
    eta_a: f64,
    clamps: &mut u64,
) -> (Complex64, f64) {
    let eta_e = subtracted_variance(eta_p, eta_a, clamps);
    let mu_e = eta_e * (mu_p / eta_p - mu_a / eta_a);
    (mu_e, eta_e)
}

/// Next-iteration prior from the transformed posterior and the group's
/// own extrinsic message.
#[inline]
fn prior_pair(
    mu_tp: Complex64,
    eta_tp: f64,
    mu_e: Complex64,
    eta_e: f64,
    clamps: &mut u64,
) -> (Complex64, f64) {
    let eta_a = subtracted_variance(eta_tp, eta_e, clamps);
    let mu_a = eta_a * (mu_tp / eta_tp - mu_e / eta_e);
    (mu_a, eta_a)
}

struct DenoiseOutput {
    mu_p: Vec<Complex64>,
    eta_bar_p: f64,
    posteriors: Vec<Vec<f64>>,
    theta: f64,
}

/// Posterior of one symbol under a Gaussian observation `mu` with variance
/// `eta_bar` and a uniform prior: normalized constellation weights plus the
/// projected mean and variance. Weights are stabilized by subtracting the
/// minimum distance before exponentiation.
pub fn posterior_moments(
    mu: Complex64,
    eta_bar: f64,
    alphabet: &Alphabet,
) -> (Vec<f64>, Complex64, f64) {
    let q = alphabet.len();
    let mut dist = vec![0.0_f64; q];
    let mut dmin = f64::INFINITY;
    for (i, chi) in alphabet.points.iter().enumerate() {
        dist[i] = (chi - mu).norm_sqr();
        dmin = dmin.min(dist[i]);
    }
    let mut weights = vec![0.0_f64; q];
    let mut z = 0.0;
    for i in 0..q {
        let w = (-(dist[i] - dmin) / eta_bar).exp();
        weights[i] = w;
        z += w;
    }
    let mut mean = Complex64::default();
    for i in 0..q {
        weights[i] /= z;
        mean += alphabet.points[i] * weights[i];
    }
    let mut var = 0.0;
    for i in 0..q {
        var += weights[i] * (alphabet.points[i] - mean).norm_sqr();
    }
    (weights, mean, var)
}

/// Symbol-by-symbol posterior under a Gaussian message of scalar variance
/// `eta_bar` and a uniform prior over the alphabet, projected to its
/// per-symbol mean/variance; the variance is then scalar-averaged.
fn daf_denoise(
    mu_a: &[Complex64],
    eta_bar: f64,
    alphabet: &Alphabet,
    convergence_tol: f64,
) -> DenoiseOutput {
    let n = mu_a.len();
    let mut posteriors = Vec::with_capacity(n);
    let mut mu_p = Vec::with_capacity(n);
    let mut eta_sum = 0.0;
    let mut dominant = 0usize;
    for &m in mu_a {
        let (weights, mean, var) = posterior_moments(m, eta_bar, alphabet);
        let pmax = weights.iter().cloned().fold(0.0, f64::max);
        if pmax >= 1.0 - convergence_tol {
            dominant += 1;
        }
        eta_sum += var;
        mu_p.push(mean);
        posteriors.push(weights);
    }
    DenoiseOutput {
        mu_p,
        eta_bar_p: eta_sum / n as f64,
        posteriors,
        theta: dominant as f64 / n as f64,
    }
}

/// The shared iteration loop. `transform = Some(U)` runs the cross-domain
/// variant (LMMSE in the observation domain, denoising after a unitary
/// hop); `None` denoises in place.
fn oamp_core(
    y: &[Complex64],
    partition: &GroupPartition,
    transform: Option<&UnitaryTransform>,
    alphabet: &Alphabet,
    n0: f64,
    params: &OampParams,
    truth: Option<&[Complex64]>,
) -> Result<DetectorOutput> {
    let n = partition.membership.len();
    let q = alphabet.len();
    let mut states: Vec<GroupState> = partition
        .groups
        .iter()
        .map(|g| GroupState {
            mu_a: vec![Complex64::default(); g.cols.len()],
            eta_a: vec![1.0; g.cols.len()],
            mu_e: vec![Complex64::default(); g.cols.len()],
            eta_e: vec![1.0; g.cols.len()],
        })
        .collect();
    let mut retained = vec![vec![1.0 / q as f64; q]; n];
    let mut theta_prev = 0.0_f64;
    let mut trace = Vec::with_capacity(params.max_iterations);

    for _iter in 0..params.max_iterations {
        let mut macs = 0u64;
        let mut clamps = 0u64;

        // linear stage per group, then extrinsic extraction
        for (g, st) in states.iter_mut().enumerate() {
            let rows = partition.rows(g);
            let (mu_p, eta_p, c0) = d_lmmse_step(
                &y[rows],
                &partition.groups[g].h,
                &st.mu_a,
                &st.eta_a,
                n0,
                &mut macs,
            )?;
            clamps += c0;
            for d in 0..st.mu_a.len() {
                let (me, ee) =
                    extrinsic_pair(mu_p[d], eta_p[d], st.mu_a[d], st.eta_a[d], &mut clamps);
                st.mu_e[d] = me;
                st.eta_e[d] = ee;
            }
        }

        // combine messages for symbols shared between groups
        let mut mu_comb = vec![Complex64::default(); n];
        let mut eta_comb = vec![1.0_f64; n];
        for j in 0..n {
            let places = &partition.membership[j];
            match places.len() {
                0 => {
                    // not observed by any group: uninformative prior
                    mu_comb[j] = Complex64::default();
                    eta_comb[j] = 1.0;
                }
                1 => {
                    let (g, d) = places[0];
                    mu_comb[j] = states[g].mu_e[d];
                    eta_comb[j] = states[g].eta_e[d];
                }
                _ => {
                    let mut prec = 0.0;
                    let mut wmean = Complex64::default();
                    for &(g, d) in places {
                        prec += 1.0 / states[g].eta_e[d];
                        wmean += states[g].mu_e[d] / states[g].eta_e[d];
                    }
                    eta_comb[j] = 1.0 / prec;
                    mu_comb[j] = wmean / prec;
                }
            }
        }

        // hop to the DAF domain (variances ride along unchanged and are
        // scalar-averaged)
        let mu_da = match transform {
            Some(u) => u.forward(&mu_comb)?,
            None => mu_comb.clone(),
        };
        let eta_bar_da = eta_comb.iter().sum::<f64>() / n as f64;

        let den = daf_denoise(&mu_da, eta_bar_da, alphabet, params.convergence_tol);

        let mse = truth.map(|x| {
            den.mu_p
                .iter()
                .zip(x)
                .map(|(a, b)| (a - b).norm_sqr())
                .sum::<f64>()
                / n as f64
        });

        // posterior means return to the observation domain
        let mu_tp = match transform {
            Some(u) => u.inverse(&den.mu_p)?,
            None => den.mu_p.clone(),
        };
        let eta_bar_tp = den.eta_bar_p;

        // next-iteration priors per group entry
        for (g, st) in states.iter_mut().enumerate() {
            for (d, &j) in partition.groups[g].cols.iter().enumerate() {
                let (ma, ea) =
                    prior_pair(mu_tp[j], eta_bar_tp, st.mu_e[d], st.eta_e[d], &mut clamps);
                st.mu_a[d] = ma;
                st.eta_a[d] = ea;
            }
        }

        trace.push(IterationTrace {
            eta_daf_posterior: den.eta_bar_p,
            theta: den.theta,
            mse,
            clamps,
            dlmmse_macs: macs,
        });
        if den.theta >= theta_prev {
            retained = den.posteriors;
        }
        theta_prev = den.theta;
        if params.stop_on_convergence && den.theta == 1.0 {
            break;
        }
    }

    let symbols = retained
        .iter()
        .map(|p| {
            p.iter()
                .enumerate()
                .max_by(|a, b| a.1.total_cmp(b.1))
                .map(|(i, _)| i)
                .unwrap()
        })
        .collect();
    Ok(DetectorOutput { symbols, posteriors: retained, iterations: trace.len(), trace })
}

fn trivial_partition(h: &Array2<Complex64>) -> GroupPartition {
    let n = h.nrows();
    GroupPartition {
        c: 1,
        n_c: n,
        groups: vec![Group { cols: (0..n).collect(), h: h.clone() }],
        membership: (0..n).map(|j| vec![(0, j)]).collect(),
    }
}

/// Cross-domain distributed OAMP: distributed LMMSE on the time-domain
/// channel, symbol posteriors in the DAF domain.
pub fn cd_d_oamp_detect(
    y_time: &[Complex64],
    h_time: &Array2<Complex64>,
    config: &SystemConfig,
    chirp: ChirpParams,
    n0: f64,
    params: &OampParams,
    truth_daf: Option<&[Complex64]>,
) -> Result<DetectorOutput> {
    if y_time.len() != config.n {
        return Err(Error::DimensionMismatch { expected: config.n, got: y_time.len() });
    }
    let partition = partition_groups(h_time, params.groups, params.energy_threshold)?;
    let u = UnitaryTransform::new(config.n, chirp);
    oamp_core(y_time, &partition, Some(&u), &config.alphabet, n0, params, truth_daf)
}

/// Non-distributed cross-domain OAMP: one full-matrix LMMSE stage plus the
/// DAF-domain denoiser (the `C = 1` reduction, implemented without the
/// partitioning machinery).
pub fn cd_oamp_detect(
    y_time: &[Complex64],
    h_time: &Array2<Complex64>,
    config: &SystemConfig,
    chirp: ChirpParams,
    n0: f64,
    params: &OampParams,
    truth_daf: Option<&[Complex64]>,
) -> Result<DetectorOutput> {
    if y_time.len() != config.n {
        return Err(Error::DimensionMismatch { expected: config.n, got: y_time.len() });
    }
    let partition = trivial_partition(h_time);
    let u = UnitaryTransform::new(config.n, chirp);
    oamp_core(y_time, &partition, Some(&u), &config.alphabet, n0, params, truth_daf)
}

/// Distributed OAMP directly in the DAF domain: distributed LMMSE on the
/// DAF-domain channel and in-place denoising, no cross-domain hops.
pub fn d_oamp_detect(
    y_daf: &[Complex64],
    h_daf: &Array2<Complex64>,
    config: &SystemConfig,
    n0: f64,
    params: &OampParams,
    truth_daf: Option<&[Complex64]>,
) -> Result<DetectorOutput> {
    if y_daf.len() != config.n {
        return Err(Error::DimensionMismatch { expected: config.n, got: y_daf.len() });
    }
    let partition = partition_groups(h_daf, params.groups, params.energy_threshold)?;
    oamp_core(y_daf, &partition, None, &config.alphabet, n0, params, truth_daf)
}

/// Plain OAMP in the DAF domain (full-matrix LMMSE, in-place denoising).
pub fn oamp_detect(
    y_daf: &[Complex64],
    h_daf: &Array2<Complex64>,
    config: &SystemConfig,
    n0: f64,
    params: &OampParams,
    truth_daf: Option<&[Complex64]>,
) -> Result<DetectorOutput> {
    if y_daf.len() != config.n {
        return Err(Error::DimensionMismatch { expected: config.n, got: y_daf.len() });
    }
    let partition = trivial_partition(h_daf);
    oamp_core(y_daf, &partition, None, &config.alphabet, n0, params, truth_daf)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::util::{complex_gaussian, trial_rng};
    use rand::Rng;

    fn cfg(n: usize, alphabet: Alphabet) -> SystemConfig {
        SystemConfig::new(n, 4.0, 6000.0, alphabet).unwrap()
    }

    #[test]
    fn lmmse_step_scalar_identity_case() {
        let n = 4;
        let h = Array2::from_shape_fn((n, n), |(i, j)| {
            Complex64::new(if i == j { 1.0 } else { 0.0 }, 0.0)
        });
        let mut rng = trial_rng(1, 0);
        let y: Vec<Complex64> = (0..n).map(|_| complex_gaussian(&mut rng, 1.0)).collect();
        let mu_a: Vec<Complex64> = (0..n).map(|_| complex_gaussian(&mut rng, 1.0)).collect();
        let eta_a = vec![1.0; n];
        let n0 = 0.3;
        let mut macs = 0;
        let (mu_p, eta_p, _) = d_lmmse_step(&y, &h, &mu_a, &eta_a, n0, &mut macs).unwrap();
        for d in 0..n {
            let expect = (y[d] + mu_a[d] * n0) / (1.0 + n0);
            assert!((mu_p[d] - expect).norm() < 1e-12);
            assert!((eta_p[d] - n0 / (1.0 + n0)).abs() < 1e-12);
        }
        assert!(macs > 0);
    }

    #[test]
    fn lmmse_step_zero_noise_inverts() {
        let n = 6;
        let mut rng = trial_rng(2, 0);
        let mut h = Array2::from_shape_fn((n, n), |_| complex_gaussian(&mut rng, 1.0 / n as f64));
        for i in 0..n {
            h[(i, i)] += Complex64::new(1.0, 0.0);
        }
        let x: Vec<Complex64> = (0..n).map(|_| complex_gaussian(&mut rng, 1.0)).collect();
        let y = matvec(&h, &x);
        let mu_a = vec![Complex64::default(); n];
        let eta_a = vec![1.0; n];
        let mut macs = 0;
        let (mu_p, _, _) = d_lmmse_step(&y, &h, &mu_a, &eta_a, 1e-12, &mut macs).unwrap();
        for d in 0..n {
            assert!((mu_p[d] - x[d]).norm() < 1e-4);
        }
    }

    #[test]
    fn lmmse_step_matches_independent_dense_solver() {
        // rectangular 8 x 12 group against a from-scratch evaluation of the
        // posterior formulas with a Gauss-Jordan inverse
        let (nc, dc) = (8, 12);
        let mut rng = trial_rng(3, 0);
        let h = Array2::from_shape_fn((nc, dc), |_| complex_gaussian(&mut rng, 0.5));
        let y: Vec<Complex64> = (0..nc).map(|_| complex_gaussian(&mut rng, 1.0)).collect();
        let mu_a: Vec<Complex64> = (0..dc).map(|_| complex_gaussian(&mut rng, 0.5)).collect();
        let eta_a: Vec<f64> = (0..dc).map(|_| rng.gen_range(0.2..1.5)).collect();
        let n0 = 0.17;
        let mut macs = 0;
        let (mu_p, eta_p, _) = d_lmmse_step(&y, &h, &mu_a, &eta_a, n0, &mut macs).unwrap();

        // independent: complex Gauss-Jordan inverse of M
        let mut m = vec![vec![Complex64::default(); nc]; nc];
        for i in 0..nc {
            for j in 0..nc {
                let mut acc = Complex64::default();
                for d in 0..dc {
                    acc += h[(i, d)] * eta_a[d] * h[(j, d)].conj();
                }
                m[i][j] = acc + if i == j { Complex64::new(n0, 0.0) } else { Complex64::default() };
            }
        }
        let mut inv = vec![vec![Complex64::default(); nc]; nc];
        for (i, row) in inv.iter_mut().enumerate() {
            row[i] = Complex64::new(1.0, 0.0);
        }
        for col in 0..nc {
            let piv = (col..nc)
                .max_by(|&a, &b| m[a][col].norm().total_cmp(&m[b][col].norm()))
                .unwrap();
            m.swap(col, piv);
            inv.swap(col, piv);
            let d = m[col][col];
            for k in 0..nc {
                m[col][k] /= d;
                inv[col][k] /= d;
            }
            for row in 0..nc {
                if row == col {
                    continue;
                }
                let f = m[row][col];
                for k in 0..nc {
                    let (mv, iv) = (m[col][k], inv[col][k]);
                    m[row][k] -= f * mv;
                    inv[row][k] -= f * iv;
                }
            }
        }
        // W = S H^H M^{-1}; posterior mean and variance from the definitions
        for d in 0..dc {
            let mut w_row = vec![Complex64::default(); nc];
            for (r, w) in w_row.iter_mut().enumerate() {
                let mut acc = Complex64::default();
                for k in 0..nc {
                    acc += h[(k, d)].conj() * inv[k][r];
                }
                *w = acc * eta_a[d];
            }
            let mut mu = mu_a[d];
            for r in 0..nc {
                let hm: Complex64 = (0..dc).map(|dd| h[(r, dd)] * mu_a[dd]).sum();
                mu += w_row[r] * (y[r] - hm);
            }
            assert!((mu - mu_p[d]).norm() < 1e-10, "mean entry {d}");
            let mut wh = Complex64::default();
            for r in 0..nc {
                wh += w_row[r] * h[(r, d)];
            }
            let eta = eta_a[d] - (wh * eta_a[d]).re;
            assert!((eta - eta_p[d]).abs() < 1e-10, "variance entry {d}");
        }
    }

    #[test]
    fn extrinsic_halved_variance_doubles_mean() {
        let mut clamps = 0;
        let mu_p = Complex64::new(0.3, -0.4);
        let (mu_e, eta_e) =
            extrinsic_pair(mu_p, 0.5, Complex64::default(), 1.0, &mut clamps);
        assert!((eta_e - 1.0).abs() < 1e-12);
        assert!((mu_e - mu_p * 2.0).norm() < 1e-12);
        assert_eq!(clamps, 0);
    }

    #[test]
    fn extrinsic_clamps_non_positive_precision() {
        let mut clamps = 0;
        let (_, eta_e) = extrinsic_pair(
            Complex64::new(0.1, 0.0),
            1.0,
            Complex64::default(),
            0.5,
            &mut clamps,
        );
        assert_eq!(eta_e, VAR_CAP);
        assert_eq!(clamps, 1);
    }

    #[test]
    fn prior_pair_examples() {
        let mut clamps = 0;
        // posterior variance half the extrinsic: next prior variance equals
        // the extrinsic variance
        let (_, eta_a) = prior_pair(
            Complex64::new(0.2, 0.0),
            0.4,
            Complex64::new(0.1, 0.0),
            0.8,
            &mut clamps,
        );
        assert!((eta_a - 0.8).abs() < 1e-12);
        // matching means: the combination returns the same mean whenever
        // the precision difference is positive
        let mu = Complex64::new(0.37, -0.2);
        let (mu_a, eta_a) = prior_pair(mu, 0.4, mu, 0.5, &mut clamps);
        assert!((mu_a - mu).norm() < 1e-12);
        assert!((eta_a - 2.0).abs() < 1e-12);
        assert_eq!(clamps, 0);
        // equal variances have no information left after subtraction: the
        // precision difference clamps and the mean collapses toward zero
        let (mu_c, eta_c) = prior_pair(mu, 0.5, mu, 0.5, &mut clamps);
        assert_eq!(eta_c, VAR_CAP);
        assert!(mu_c.norm() < 1e-6);
        assert_eq!(clamps, 1);
    }

    #[test]
    fn denoiser_limits_and_bpsk_value() {
        let a = Alphabet::bpsk();
        // sharp observation on a constellation point
        let out = daf_denoise(&[Complex64::new(1.0, 0.0)], 1e-9, &a, 0.01);
        assert!((out.posteriors[0][0] - 1.0).abs() < 1e-12);
        assert!(out.eta_bar_p < 1e-6);
        assert!((out.theta - 1.0).abs() < 1e-12);

        // diffuse observation: centroid mean, unit variance
        let q = Alphabet::qpsk();
        let out = daf_denoise(&[Complex64::new(0.3, 0.1)], 1e9, &q, 0.01);
        assert!(out.mu_p[0].norm() < 1e-6);
        assert!((out.eta_bar_p - 1.0).abs() < 1e-6);

        // closed-form binary case: mean = tanh(2 mu / eta)
        let out = daf_denoise(&[Complex64::new(0.5, 0.0)], 1.0, &a, 0.01);
        assert!((out.mu_p[0].re - 1.0_f64.tanh()).abs() < 1e-12);
        assert!(out.mu_p[0].im.abs() < 1e-15);
        let psum: f64 = out.posteriors[0].iter().sum();
        assert!((psum - 1.0).abs() < 1e-12);
    }

    #[test]
    fn noiseless_identity_channel_converges_first_iteration() {
        let c = cfg(16, Alphabet::qpsk());
        let chirp = ChirpParams::new(0.09, 0.3).unwrap();
        let u = UnitaryTransform::new(16, chirp);
        let mut rng = trial_rng(4, 0);
        let labels: Vec<usize> = (0..16).map(|_| rng.gen_range(0..4)).collect();
        let x: Vec<Complex64> = labels.iter().map(|&s| c.alphabet.points[s]).collect();
        let y_time = u.inverse(&x).unwrap();
        let h = Array2::from_shape_fn((16, 16), |(i, j)| {
            Complex64::new(if i == j { 1.0 } else { 0.0 }, 0.0)
        });
        let params = OampParams { groups: 1, ..Default::default() };
        let out = cd_d_oamp_detect(&y_time, &h, &c, chirp, 1e-9, &params, Some(&x)).unwrap();
        assert_eq!(out.iterations, 1);
        assert!((out.trace[0].theta - 1.0).abs() < 1e-12);
        assert_eq!(out.symbols, labels);
        assert!(out.trace[0].mse.unwrap() < 1e-9);
    }

    fn run_pair_reduction(seed: u64) -> (Vec<usize>, Vec<usize>, Vec<usize>, Vec<usize>) {
        use crate::channel::{sample_channel, time_domain_channel, ChannelSpread, GainProfile};
        let n = 32;
        let c = cfg(n, Alphabet::qpsk());
        let spread = ChannelSpread::new(4.0 * c.delta_t, 1e-4, &c).unwrap();
        let c1 = crate::chirp_opt::optimize_c1(&spread, n, 1, true).unwrap();
        let chirp = ChirpParams::new(c1, ChirpParams::default_c2()).unwrap();
        let ch = sample_channel(&spread, 3, seed, GainProfile::ComplexGaussian, &c).unwrap();
        let h_t = time_domain_channel(&ch, &c, chirp);
        let u = UnitaryTransform::new(n, chirp);
        let mut rng = trial_rng(seed, 5);
        let labels: Vec<usize> = (0..n).map(|_| rng.gen_range(0..4)).collect();
        let x: Vec<Complex64> = labels.iter().map(|&s| c.alphabet.points[s]).collect();
        let x_time = u.inverse(&x).unwrap();
        let n0 = 0.05;
        let y_time = crate::channel::apply_time_channel(&h_t, &x_time, n0, seed ^ 77);
        let params1 = OampParams { groups: 1, max_iterations: 8, ..Default::default() };
        let a = cd_d_oamp_detect(&y_time, &h_t, &c, chirp, n0, &params1, None).unwrap();
        let b = cd_oamp_detect(&y_time, &h_t, &c, chirp, n0, &params1, None).unwrap();
        let y_daf = u.forward(&y_time).unwrap();
        let h_daf = u.conjugate(&h_t).unwrap();
        let d = d_oamp_detect(&y_daf, &h_daf, &c, n0, &params1, None).unwrap();
        let o = oamp_detect(&y_daf, &h_daf, &c, n0, &params1, None).unwrap();
        (a.symbols, b.symbols, d.symbols, o.symbols)
    }

    #[test]
    fn single_group_reductions_bit_identical() {
        for seed in 0..5 {
            let (cd_d, cd, d, o) = run_pair_reduction(seed);
            assert_eq!(cd_d, cd, "cross-domain reduction, seed {seed}");
            assert_eq!(d, o, "direct-domain reduction, seed {seed}");
        }
    }

    #[test]
    fn distributed_matches_ml_at_high_snr() {
        use crate::channel::{sample_channel, time_domain_channel, ChannelSpread, GainProfile};
        let n = 16;
        let c = cfg(n, Alphabet::bpsk());
        let spread = ChannelSpread::new(3.0 * c.delta_t, 1e-4, &c).unwrap();
        let c1 = crate::chirp_opt::optimize_c1(&spread, n, 1, true).unwrap();
        let chirp = ChirpParams::new(c1, ChirpParams::default_c2()).unwrap();
        let u = UnitaryTransform::new(n, chirp);
        let mut agree = 0usize;
        let mut total = 0usize;
        for seed in 0..25u64 {
            let ch = sample_channel(&spread, 4, seed, GainProfile::ComplexGaussian, &c).unwrap();
            let h_t = time_domain_channel(&ch, &c, chirp);
            let h_daf = u.conjugate(&h_t).unwrap();
            let mut rng = trial_rng(seed, 6);
            let labels: Vec<usize> = (0..n).map(|_| rng.gen_range(0..2)).collect();
            let x: Vec<Complex64> = labels.iter().map(|&s| c.alphabet.points[s]).collect();
            let x_time = u.inverse(&x).unwrap();
            let n0 = 10f64.powf(-2.0); // 20 dB
            let y_time = crate::channel::apply_time_channel(&h_t, &x_time, n0, seed ^ 3);
            let y_daf = u.forward(&y_time).unwrap();
            let ml = crate::detect::ml_detect(&y_daf, &h_daf, &c).unwrap();
            let params = OampParams { groups: 2, ..Default::default() };
            let it = cd_d_oamp_detect(&y_time, &h_t, &c, chirp, n0, &params, None).unwrap();
            total += n;
            agree += ml.iter().zip(&it.symbols).filter(|(a, b)| a == b).count();
        }
        let rate = agree as f64 / total as f64;
        assert!(rate >= 0.99, "agreement with ML only {rate}");
    }

    #[test]
    fn posterior_sanity_and_variance_bounds_under_low_snr() {
        use crate::channel::{sample_channel, time_domain_channel, ChannelSpread, GainProfile};
        let n = 32;
        let c = cfg(n, Alphabet::qpsk());
        let spread = ChannelSpread::new(4.0 * c.delta_t, 1e-4, &c).unwrap();
        let c1 = crate::chirp_opt::optimize_c1(&spread, n, 1, true).unwrap();
        let chirp = ChirpParams::new(c1, ChirpParams::default_c2()).unwrap();
        let ch = sample_channel(&spread, 3, 11, GainProfile::ComplexGaussian, &c).unwrap();
        let h_t = time_domain_channel(&ch, &c, chirp);
        let u = UnitaryTransform::new(n, chirp);
        let mut rng = trial_rng(11, 6);
        let labels: Vec<usize> = (0..n).map(|_| rng.gen_range(0..4)).collect();
        let x: Vec<Complex64> = labels.iter().map(|&s| c.alphabet.points[s]).collect();
        let x_time = u.inverse(&x).unwrap();
        let n0 = 1.0; // 0 dB
        let y_time = crate::channel::apply_time_channel(&h_t, &x_time, n0, 9);
        let params = OampParams { groups: 4, ..Default::default() };
        let out = cd_d_oamp_detect(&y_time, &h_t, &c, chirp, n0, &params, Some(&x)).unwrap();
        for p in &out.posteriors {
            let s: f64 = p.iter().sum();
            assert!((s - 1.0).abs() < 1e-12);
        }
        for t in &out.trace {
            assert!(t.eta_daf_posterior.is_finite());
            assert!(t.eta_daf_posterior <= 1.0 + 1e-12);
            assert!(t.eta_daf_posterior >= 0.0);
            assert!((0.0..=1.0).contains(&t.theta));
        }
    }

    #[test]
    fn median_posterior_variance_non_increasing_at_good_snr() {
        use crate::channel::{sample_channel, time_domain_channel, ChannelSpread, GainProfile};
        let n = 64;
        let c = cfg(n, Alphabet::qpsk());
        let spread = ChannelSpread::new(5.0 * c.delta_t, 1e-4, &c).unwrap();
        let c1 = crate::chirp_opt::optimize_c1(&spread, n, 1, true).unwrap();
        let chirp = ChirpParams::new(c1, ChirpParams::default_c2()).unwrap();
        let u = UnitaryTransform::new(n, chirp);
        let n_t = 8;
        let mut traces: Vec<Vec<f64>> = vec![Vec::new(); n_t];
        for seed in 0..30u64 {
            let ch = sample_channel(&spread, 4, seed, GainProfile::ComplexGaussian, &c).unwrap();
            let h_t = time_domain_channel(&ch, &c, chirp);
            let mut rng = trial_rng(seed, 8);
            let labels: Vec<usize> = (0..n).map(|_| rng.gen_range(0..4)).collect();
            let x: Vec<Complex64> = labels.iter().map(|&s| c.alphabet.points[s]).collect();
            let x_time = u.inverse(&x).unwrap();
            let n0 = 10f64.powf(-1.2); // 12 dB
            let y_time = crate::channel::apply_time_channel(&h_t, &x_time, n0, seed ^ 41);
            let params = OampParams {
                groups: 4,
                max_iterations: n_t,
                stop_on_convergence: false,
                ..Default::default()
            };
            let out = cd_d_oamp_detect(&y_time, &h_t, &c, chirp, n0, &params, None).unwrap();
            for (i, t) in out.trace.iter().enumerate() {
                traces[i].push(t.eta_daf_posterior);
            }
        }
        let medians: Vec<f64> = traces
            .iter()
            .map(|v| {
                let mut s = v.clone();
                s.sort_by(f64::total_cmp);
                s[s.len() / 2]
            })
            .collect();
        // monotone decrease down to the convergence floor; tiny wiggle at
        // the floor itself is noise, not divergence
        let floor = 1e-3;
        for w in medians.windows(2) {
            assert!(
                w[1] <= w[0] * 1.02 || w[1] < floor,
                "median variance rose: {medians:?}"
            );
        }
        assert!(*medians.last().unwrap() < floor, "{medians:?}");
    }
}
