//! Reference implementations used as independent oracles in tests.
//!
//! These evaluate the transmit/receive chain directly from first
//! principles (continuous-time waveform sampling, naive entry formulas,
//! closed-form geometric sums) without going through the production
//! matrix/FFT paths, so the two can be checked against each other.

use crate::channel::{all_wrap_schedules, PhaseWrapSchedule, WidebandChannel};
use crate::config::{ChirpParams, SystemConfig};
use crate::util::{cis_neg_prod, cis_pos, cis_pos_prod};
use num_complex::Complex64;

/// Continuous-time transmit waveform synthesized from DAF-domain symbols,
/// including the chirp-periodic extension outside the core window `[0, T)`.
///
/// Inside the window, with `s = t / delta_t`,
///
/// ```text
/// x(t) = (1/sqrt(N)) sum_m x[m] exp(j 2 pi (c1 s^2 + m s / N + c2 m^2 - psi_m(t) s))
/// ```
///
/// where `psi_m(t)` counts the band-edge wraps of sub-carrier `m` up to
/// time `t`. Outside the window the waveform repeats chirp-periodically:
/// one step is `x(t) = x(t + T) exp(-j 2 pi c1 (N^2 + 2 N s))` for `t < 0`
/// and the mirrored relation for `t >= T`.
pub struct WaveformEvaluator<'a> {
    x_daf: &'a [Complex64],
    config: &'a SystemConfig,
    chirp: ChirpParams,
    schedules: Vec<PhaseWrapSchedule>,
}

impl<'a> WaveformEvaluator<'a> {
    pub fn new(x_daf: &'a [Complex64], config: &'a SystemConfig, chirp: ChirpParams) -> Self {
        assert_eq!(x_daf.len(), config.n);
        Self { x_daf, config, chirp, schedules: all_wrap_schedules(config, chirp) }
    }

    pub fn eval(&self, t: f64) -> Complex64 {
        let n = self.config.n as f64;
        let s = t / self.config.delta_t;
        if t < 0.0 {
            return self.eval(t + self.config.t)
                * cis_neg_prod(self.chirp.c1, n * n + 2.0 * n * s);
        }
        if t >= self.config.t {
            return self.eval(t - self.config.t)
                * cis_pos_prod(self.chirp.c1, n * n + 2.0 * n * s);
        }
        let mut acc = Complex64::default();
        for (m, &xm) in self.x_daf.iter().enumerate() {
            let psi = self.schedules[m].count(t) as f64;
            let phase = cis_pos_prod(self.chirp.c1, s * s)
                * cis_pos(m as f64 * s / n - psi * s)
                * cis_pos_prod(self.chirp.c2, (m * m) as f64);
            acc += xm * phase;
        }
        acc / n.sqrt()
    }
}

/// Noise-free received window sampled directly from the continuous
/// waveform: `y[p] = sum_i h_i x((1 + alpha_i) p delta_t - tau_i)
/// exp(j 2 pi k_i p / N)`.
pub fn received_window_oracle(
    x_daf: &[Complex64],
    channel: &WidebandChannel,
    config: &SystemConfig,
    chirp: ChirpParams,
) -> Vec<Complex64> {
    let eval = WaveformEvaluator::new(x_daf, config, chirp);
    let nf = config.n as f64;
    (0..config.n)
        .map(|p| {
            channel
                .paths
                .iter()
                .map(|path| {
                    let t = (1.0 + path.alpha) * p as f64 * config.delta_t - path.tau;
                    path.gain * eval.eval(t) * cis_pos(path.k * p as f64 / nf)
                })
                .sum()
        })
        .collect()
}

/// Closed form of the geometric sum `sum_{r=0}^{N-1} exp(-j 2 pi a r / N)`,
/// used by the narrowband (zero Doppler-scale) kernel checks. Near-integer
/// multiples of `N` fall back to the direct sum.
pub fn geometric_kernel(a: f64, n: usize) -> Complex64 {
    let nf = n as f64;
    let one = Complex64::new(1.0, 0.0);
    let denom = crate::util::cis_neg(a / nf) - one;
    if denom.norm() < 1e-9 {
        return (0..n).map(|r| crate::util::cis_neg(a * r as f64 / nf)).sum();
    }
    (crate::util::cis_neg(a) - one) / denom
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::util::cis_neg;

    #[test]
    fn geometric_kernel_matches_direct_sum() {
        for (a, n) in [(0.37_f64, 16usize), (3.0, 8), (7.9, 32), (16.0, 16), (15.9999999, 16)] {
            let direct: Complex64 = (0..n).map(|r| cis_neg(a * r as f64 / n as f64)).sum();
            let closed = geometric_kernel(a, n);
            assert!(
                (direct - closed).norm() < 1e-8,
                "a={a} n={n}: {direct} vs {closed}"
            );
        }
    }
}
