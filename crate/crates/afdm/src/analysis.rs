//! Error-rate analysis: pairwise error bounds, the union bound on BER,
//! and state-evolution prediction of the iterative detector's MSE.

use crate::config::Alphabet;
use crate::detect::oamp::{lmmse_factor, posterior_moments, subtracted_variance};
use crate::detect::partition::GroupPartition;
use crate::util::{complex_gaussian, trial_rng};
use crate::{Error, Result};
use ndarray::Array2;
use num_complex::Complex64;
use rand::Rng;

/// Relative eigenvalue threshold for the numerical rank in pairwise
/// bounds.
pub const RANK_EPS: f64 = 1e-10;

/// Exact-enumeration cap for the union bound, in information bits.
pub const EXACT_BOUND_CAP_BITS: usize = 10;

/// One pairwise error event: eigenvalues of the difference Gram matrix,
/// its numerical rank, and the resulting bound.
#[derive(Debug, Clone)]
pub struct PepReport {
    pub eigenvalues: Vec<f64>,
    pub rank: usize,
    pub bound: f64,
}

/// Union-bound estimate. In sampled mode the confidence interval is a
/// 95% normal interval over the pair draws; in exact mode it collapses
/// onto the value.
#[derive(Debug, Clone, Copy)]
pub struct BoundEstimate {
    pub value: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub exact: bool,
    pub pairs: u64,
}

/// How to enumerate error pairs in [`ber_union_bound`].
#[derive(Debug, Clone, Copy)]
pub enum EnumerationPolicy {
    /// Exact when the frame carries at most [`EXACT_BOUND_CAP_BITS`] bits,
    /// otherwise sampled with the default budget.
    Auto { seed: u64 },
    /// Full double enumeration (errors above the cap).
    Exact,
    /// Monte Carlo over uniformly drawn ordered pairs.
    Sampled { pairs: usize, seed: u64 },
}

/// Eigenvalues of a small Hermitian matrix via cyclic Jacobi on the real
/// symmetric embedding `[[Re, -Im], [Im, Re]]` (each eigenvalue appears
/// twice; one copy of each is returned, descending).
fn hermitian_eigenvalues(omega: &[Vec<Complex64>]) -> Vec<f64> {
    let p = omega.len();
    let m = 2 * p;
    let mut a = vec![vec![0.0_f64; m]; m];
    for i in 0..p {
        for j in 0..p {
            a[i][j] = omega[i][j].re;
            a[i][j + p] = -omega[i][j].im;
            a[i + p][j] = omega[i][j].im;
            a[i + p][j + p] = omega[i][j].re;
        }
    }
    for _sweep in 0..64 {
        let mut off = 0.0;
        for i in 0..m {
            for j in (i + 1)..m {
                off += a[i][j] * a[i][j];
            }
        }
        if off < 1e-24 {
            break;
        }
        for i in 0..m {
            for j in (i + 1)..m {
                if a[i][j].abs() < 1e-300 {
                    continue;
                }
                let theta = 0.5 * (a[j][j] - a[i][i]) / a[i][j];
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..m {
                    let (aik, ajk) = (a[i][k], a[j][k]);
                    a[i][k] = c * aik - s * ajk;
                    a[j][k] = s * aik + c * ajk;
                }
                for k in 0..m {
                    let (aki, akj) = (a[k][i], a[k][j]);
                    a[k][i] = c * aki - s * akj;
                    a[k][j] = s * aki + c * akj;
                }
            }
        }
    }
    let mut eigs: Vec<f64> = (0..m).map(|i| a[i][i]).collect();
    eigs.sort_by(|x, y| y.total_cmp(x));
    eigs.into_iter().step_by(2).collect()
}

/// Pairwise error bound for confusing symbol vector `x` with `x_hat`
/// under per-path gains i.i.d. CN(0, 1/P):
/// `prod_{i<=R} (4 N0 P / lambda_i)` over the nonzero eigenvalues of the
/// difference Gram matrix.
pub fn pep_pair_bound(
    x: &[Complex64],
    x_hat: &[Complex64],
    path_matrices: &[Array2<Complex64>],
    n0: f64,
) -> Result<PepReport> {
    let e: Vec<Complex64> = x.iter().zip(x_hat).map(|(a, b)| a - b).collect();
    if e.iter().all(|v| v.norm_sqr() == 0.0) {
        return Err(Error::ZeroDifference);
    }
    let p = path_matrices.len();
    let diffs: Vec<Vec<Complex64>> =
        path_matrices.iter().map(|h| crate::linalg::matvec(h, &e)).collect();
    let mut omega = vec![vec![Complex64::default(); p]; p];
    for i in 0..p {
        for j in 0..p {
            omega[i][j] = diffs[i]
                .iter()
                .zip(&diffs[j])
                .map(|(a, b)| a.conj() * b)
                .sum();
        }
    }
    let eigenvalues = hermitian_eigenvalues(&omega);
    let lmax = eigenvalues.first().cloned().unwrap_or(0.0);
    let rank = eigenvalues.iter().filter(|&&l| l > RANK_EPS * lmax).count();
    let mut bound = 1.0;
    for &l in eigenvalues.iter().take(rank) {
        bound *= 4.0 * n0 * p as f64 / l;
    }
    Ok(PepReport { eigenvalues, rank, bound })
}

fn labels_to_points(labels: &[usize], alphabet: &Alphabet) -> Vec<Complex64> {
    labels.iter().map(|&s| alphabet.points[s]).collect()
}

/// Union bound on average BER: pairwise bounds weighted by differing
/// bits, summed (exact) or estimated (sampled) over ordered symbol-vector
/// pairs.
pub fn ber_union_bound(
    alphabet: &Alphabet,
    n: usize,
    path_matrices: &[Array2<Complex64>],
    n0: f64,
    policy: EnumerationPolicy,
) -> Result<BoundEstimate> {
    let q = alphabet.len();
    let bits_per_frame = n * alphabet.bits_per_symbol;
    let exact = match policy {
        EnumerationPolicy::Exact => {
            if bits_per_frame > EXACT_BOUND_CAP_BITS {
                return Err(Error::SearchCapExceeded {
                    bits: bits_per_frame,
                    cap: EXACT_BOUND_CAP_BITS,
                });
            }
            true
        }
        EnumerationPolicy::Auto { .. } => bits_per_frame <= EXACT_BOUND_CAP_BITS,
        EnumerationPolicy::Sampled { .. } => false,
    };

    if exact {
        let total = q.pow(n as u32) as u64;
        let mut acc = 0.0;
        let decode = |idx: u64| -> Vec<usize> {
            let mut digits = vec![0usize; n];
            let mut rem = idx;
            for d in digits.iter_mut() {
                *d = (rem % q as u64) as usize;
                rem /= q as u64;
            }
            digits
        };
        let mut pairs = 0u64;
        for xi in 0..total {
            let xl = decode(xi);
            let xp = labels_to_points(&xl, alphabet);
            for yi in 0..total {
                if xi == yi {
                    continue;
                }
                let yl = decode(yi);
                let yp = labels_to_points(&yl, alphabet);
                let rep = pep_pair_bound(&xp, &yp, path_matrices, n0)?;
                let bits = crate::detect::bit_errors(&xl, &yl, alphabet) as f64;
                acc += rep.bound * bits;
                pairs += 1;
            }
        }
        let value = acc / (total as f64 * bits_per_frame as f64);
        return Ok(BoundEstimate { value, ci_low: value, ci_high: value, exact: true, pairs });
    }

    let (pairs, seed) = match policy {
        EnumerationPolicy::Sampled { pairs, seed } => (pairs, seed),
        EnumerationPolicy::Auto { seed } => (100_000, seed),
        EnumerationPolicy::Exact => unreachable!(),
    };
    if bits_per_frame > 512 {
        return Err(Error::SearchCapExceeded { bits: bits_per_frame, cap: 512 });
    }
    let mut rng = trial_rng(seed, 0xbe);
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for _ in 0..pairs {
        let xl: Vec<usize> = (0..n).map(|_| rng.gen_range(0..q)).collect();
        let mut yl: Vec<usize> = (0..n).map(|_| rng.gen_range(0..q)).collect();
        while yl == xl {
            yl = (0..n).map(|_| rng.gen_range(0..q)).collect();
        }
        let xp = labels_to_points(&xl, alphabet);
        let yp = labels_to_points(&yl, alphabet);
        let rep = pep_pair_bound(&xp, &yp, path_matrices, n0)?;
        let v = rep.bound * crate::detect::bit_errors(&xl, &yl, alphabet) as f64;
        sum += v;
        sum_sq += v * v;
    }
    let m = pairs as f64;
    let mean = sum / m;
    let var = (sum_sq / m - mean * mean).max(0.0);
    let half = 1.96 * (var / m).sqrt();
    // ordered pairs per transmitted vector: Q^N - 1
    let scale = ((q as f64).powi(n as i32) - 1.0) / bits_per_frame as f64;
    Ok(BoundEstimate {
        value: mean * scale,
        ci_low: (mean - half) * scale,
        ci_high: (mean + half) * scale,
        exact: false,
        pairs: pairs as u64,
    })
}

/// Monte Carlo estimate of the denoiser output variance: draw symbols
/// uniformly, observe them through CN(0, eta_bar) noise, and average the
/// squared error of the exact conditional mean.
pub fn denoiser_variance_mc(eta_bar: f64, alphabet: &Alphabet, samples: usize, seed: u64) -> f64 {
    let mut rng = trial_rng(seed, 0xfd);
    let q = alphabet.len();
    let mut acc = 0.0;
    for _ in 0..samples {
        let x = alphabet.points[rng.gen_range(0..q)];
        let obs = x + complex_gaussian(&mut rng, eta_bar);
        let (_, mean, _) = posterior_moments(obs, eta_bar, alphabet);
        acc += (x - mean).norm_sqr();
    }
    acc / samples as f64
}

/// Deterministic per-iteration MSE prediction of the distributed
/// detector.
#[derive(Debug, Clone)]
pub struct SeTrace {
    /// Predicted average DAF-domain posterior variance per iteration.
    pub eta_daf_posterior: Vec<f64>,
    /// Per-group prior variance vectors entering each iteration.
    pub group_priors: Vec<Vec<Vec<f64>>>,
}

/// Monte Carlo sample count for the denoiser-variance map inside
/// [`state_evolution`].
pub const SE_MC_SAMPLES: usize = 100_000;
/// Fixed seed for reproducible state-evolution traces.
pub const SE_MC_SEED: u64 = 0x5e;

/// Track the variance recursion of the distributed detector on a given
/// partition: group LMMSE posterior variance, extrinsic subtraction,
/// precision-weighted combining with scalar averaging, the denoiser
/// variance map (Monte Carlo), and the next-prior subtraction.
pub fn state_evolution(
    partition: &GroupPartition,
    n0: f64,
    alphabet: &Alphabet,
    n_t: usize,
) -> Result<SeTrace> {
    let n = partition.membership.len();
    let mut eta_a: Vec<Vec<f64>> = partition
        .groups
        .iter()
        .map(|g| vec![1.0; g.cols.len()])
        .collect();
    let mut trace = SeTrace { eta_daf_posterior: Vec::new(), group_priors: Vec::new() };
    let mut clamps = 0u64;
    for _ in 0..n_t {
        trace.group_priors.push(eta_a.clone());
        // linear stage variances and extrinsic subtraction per group
        let mut eta_e: Vec<Vec<f64>> = Vec::with_capacity(partition.groups.len());
        for (g, group) in partition.groups.iter().enumerate() {
            let mut macs = 0u64;
            let (_, eta_p, _) = lmmse_factor(&group.h, &eta_a[g], n0, &mut macs)?;
            eta_e.push(
                eta_p
                    .iter()
                    .zip(&eta_a[g])
                    .map(|(&p, &a)| subtracted_variance(p, a, &mut clamps))
                    .collect(),
            );
        }
        // combine shared symbols, then average across the frame
        let mut eta_bar = 0.0;
        for places in &partition.membership {
            let combined = match places.len() {
                0 => 1.0,
                1 => eta_e[places[0].0][places[0].1],
                _ => 1.0 / places.iter().map(|&(g, d)| 1.0 / eta_e[g][d]).sum::<f64>(),
            };
            eta_bar += combined;
        }
        eta_bar /= n as f64;
        // denoiser variance map
        let eta_dp = denoiser_variance_mc(eta_bar, alphabet, SE_MC_SAMPLES, SE_MC_SEED);
        trace.eta_daf_posterior.push(eta_dp);
        // next priors
        for (g, group) in partition.groups.iter().enumerate() {
            for d in 0..group.cols.len() {
                eta_a[g][d] = subtracted_variance(eta_dp, eta_e[g][d], &mut clamps);
            }
        }
    }
    Ok(trace)
}
