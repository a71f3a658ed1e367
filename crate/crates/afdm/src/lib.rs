//! Link-level simulation library for affine frequency division multiplexing
//! (AFDM) over wideband doubly-dispersive channels with time-scaling effects.
//!
//! The crate covers the full transmit/receive chain:
//!
//! - [`daf`]: the discrete affine Fourier (DAF) transform pair that maps
//!   symbols between the DAF domain and the time domain, as a factored
//!   fast path (chirp multiply, FFT, chirp multiply) or a dense matrix.
//! - [`channel`]: wideband doubly-dispersive channels where each path has a
//!   complex gain, an integer-tap delay and a Doppler *scale* factor (not a
//!   plain frequency shift), chirp-periodic prefix/suffix framing, and exact
//!   time-domain equivalent channel matrices.
//! - [`sparsity`]: the DAF-domain equivalent channel, its stationary-phase
//!   approximation, and per-path support intervals.
//! - [`chirp_opt`]: closed-form selection of the chirp rate `c1` so that
//!   resolvable paths occupy disjoint DAF-domain supports, plus the
//!   admissible frame-length window.
//! - [`detect`]: exhaustive ML, one-shot LMMSE, and the cross-domain
//!   distributed OAMP iterative detector family.
//! - [`analysis`]: pairwise error probability bounds, the union bound on
//!   BER, and state-evolution prediction of detector MSE.
//! - [`harness`]: seeded Monte Carlo BER sweeps with deterministic,
//!   thread-count-independent results, plus CSV persistence.
//!
//! The `afdm` binary exposes the harness through subcommands
//! (`optimize-chirp`, `sim-ber`, `pep-bound`, `state-evolution`,
//! `channel-dump`); see the repository README.

pub mod analysis;
pub mod channel;
pub mod chirp_opt;
pub mod cli;
pub mod config;
pub mod daf;
pub mod detect;
pub mod harness;
pub mod linalg;
pub mod reference;
pub mod sparsity;
pub mod util;

pub use config::{Alphabet, ChirpParams, SystemConfig};
pub use daf::UnitaryTransform;

use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid configuration: {0}")]
    Config(String),

    /// The chirp-rate denominator is non-positive: the frame length violates
    /// the feasibility cap N < 1/(4 alpha_max) + 1.
    #[error("infeasible frame length N = {n}: must satisfy N < {cap:.1}")]
    InfeasibleN { n: usize, cap: f64 },

    /// Stationary-phase quantities are undefined for a path with zero
    /// Doppler scale; callers must use the narrowband branch instead.
    #[error("degenerate stationary-phase kernel: path has zero Doppler scale")]
    DegenerateKernel,

    /// Exhaustive search space is too large to enumerate.
    #[error("search space of {bits} bits exceeds the cap of {cap} bits")]
    SearchCapExceeded { bits: usize, cap: usize },

    #[error("pairwise error bound requires two distinct symbol vectors")]
    ZeroDifference,

    #[error("matrix is singular or not positive definite")]
    Singular,

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
