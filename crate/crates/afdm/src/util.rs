//! Small numeric helpers shared across modules: exact-ish unit phasors,
//! complex Gaussian draws, and seed derivation.

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;
use std::f64::consts::TAU;

/// `exp(-j 2 pi x)` with the argument reduced modulo 1 before scaling by
/// `2 pi`. The reduction `x - round(x)` is exact in f64 for |x| < 2^52, so
/// accuracy is limited only by the rounding already present in `x`.
#[inline]
pub fn cis_neg(x: f64) -> Complex64 {
    let f = x - x.round();
    let (s, c) = (-TAU * f).sin_cos();
    Complex64::new(c, s)
}

/// `exp(+j 2 pi x)` with the same argument reduction as [`cis_neg`].
#[inline]
pub fn cis_pos(x: f64) -> Complex64 {
    let f = x - x.round();
    let (s, c) = (TAU * f).sin_cos();
    Complex64::new(c, s)
}

/// `exp(-j 2 pi a b)` where the product is refined with a fused
/// multiply-add so the phase keeps ~1e-16 absolute accuracy even when
/// `a * b` is large (e.g. chirp phases `c1 * n^2` at big frame lengths).
#[inline]
pub fn cis_neg_prod(a: f64, b: f64) -> Complex64 {
    let hi = a * b;
    let lo = a.mul_add(b, -hi);
    let f = (hi - hi.round()) + lo;
    let (s, c) = (-TAU * f).sin_cos();
    Complex64::new(c, s)
}

/// `exp(+j 2 pi a b)` with fused multiply-add refinement.
#[inline]
pub fn cis_pos_prod(a: f64, b: f64) -> Complex64 {
    cis_neg_prod(a, b).conj()
}

/// One draw of a circularly-symmetric complex Gaussian CN(0, variance)
/// via Box-Muller (real and imaginary parts each N(0, variance/2)).
#[inline]
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R, variance: f64) -> Complex64 {
    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.gen::<f64>();
    let r = (-variance * u1.ln()).sqrt();
    let (s, c) = (TAU * u2).sin_cos();
    Complex64::new(r * c, r * s)
}

/// SplitMix64 step; used to derive independent per-trial seeds from a
/// master seed and a trial counter, so results do not depend on how
/// trials are scheduled across threads.
#[inline]
pub fn splitmix64(state: u64) -> u64 {
    let mut z = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Deterministic ChaCha RNG for trial `counter` under `master_seed`.
pub fn trial_rng(master_seed: u64, counter: u64) -> ChaCha12Rng {
    let mixed = splitmix64(master_seed ^ splitmix64(counter));
    ChaCha12Rng::seed_from_u64(mixed)
}

/// Max absolute entry difference between two complex slices.
pub fn max_abs_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}
