//! Discrete affine Fourier (DAF) transform pair.
//!
//! The forward transform takes time-domain samples to the DAF domain:
//!
//! ```text
//! y[m] = (1/sqrt(N)) sum_n x[n] exp(-j 2 pi (c1 n^2 + m n / N + c2 m^2))
//! ```
//!
//! and factors as `U = L_{c2} F_N L_{c1}` with `F_N` the normalized DFT and
//! `L_c = diag(exp(-j 2 pi c n^2))`. The production path applies the factors
//! (two diagonal multiplies around an FFT, `O(N log N)`); a dense `N x N`
//! matrix is available below a size cap and serves as the reference path.
//! With `c1 = c2 = 0` both collapse to the plain normalized DFT/IDFT.

use crate::config::{ChirpParams, SystemConfig};
use crate::util::{cis_neg, cis_neg_prod};
use crate::{Error, Result};
use ndarray::Array2;
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::sync::Arc;

/// Default largest `N` for which a dense transform matrix may be built.
pub const DENSE_CAP_DEFAULT: usize = 4096;

/// The unitary DAF transform for one `(N, c1, c2)` triple. Immutable after
/// construction and safe to share across threads.
pub struct UnitaryTransform {
    pub n: usize,
    pub chirp: ChirpParams,
    chirp1: Vec<Complex64>,
    chirp2: Vec<Complex64>,
    fft_fwd: Arc<dyn Fft<f64>>,
    fft_inv: Arc<dyn Fft<f64>>,
    dense_cap: usize,
}

impl UnitaryTransform {
    pub fn new(n: usize, chirp: ChirpParams) -> Self {
        let mut planner = FftPlanner::new();
        let fft_fwd = planner.plan_fft_forward(n);
        let fft_inv = planner.plan_fft_inverse(n);
        let chirp1 = (0..n)
            .map(|i| cis_neg_prod(chirp.c1, (i * i) as f64))
            .collect();
        let chirp2 = (0..n)
            .map(|i| cis_neg_prod(chirp.c2, (i * i) as f64))
            .collect();
        Self { n, chirp, chirp1, chirp2, fft_fwd, fft_inv, dense_cap: DENSE_CAP_DEFAULT }
    }

    pub fn with_dense_cap(mut self, cap: usize) -> Self {
        self.dense_cap = cap;
        self
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: len });
        }
        Ok(())
    }

    /// Time domain -> DAF domain, in place.
    pub fn forward_in_place(&self, buf: &mut [Complex64]) -> Result<()> {
        self.check_len(buf.len())?;
        let scale = 1.0 / (self.n as f64).sqrt();
        for (b, c) in buf.iter_mut().zip(&self.chirp1) {
            *b *= c;
        }
        self.fft_fwd.process(buf);
        for (b, c) in buf.iter_mut().zip(&self.chirp2) {
            *b *= c * scale;
        }
        Ok(())
    }

    /// DAF domain -> time domain, in place (adjoint of the forward path).
    pub fn inverse_in_place(&self, buf: &mut [Complex64]) -> Result<()> {
        self.check_len(buf.len())?;
        let scale = 1.0 / (self.n as f64).sqrt();
        for (b, c) in buf.iter_mut().zip(&self.chirp2) {
            *b *= c.conj();
        }
        self.fft_inv.process(buf);
        for (b, c) in buf.iter_mut().zip(&self.chirp1) {
            *b *= c.conj() * scale;
        }
        Ok(())
    }

    pub fn forward(&self, x: &[Complex64]) -> Result<Vec<Complex64>> {
        let mut buf = x.to_vec();
        self.forward_in_place(&mut buf)?;
        Ok(buf)
    }

    pub fn inverse(&self, x: &[Complex64]) -> Result<Vec<Complex64>> {
        let mut buf = x.to_vec();
        self.inverse_in_place(&mut buf)?;
        Ok(buf)
    }

    /// Entry `U[m, n]` of the dense transform matrix.
    #[inline]
    pub fn entry(&self, m: usize, n: usize) -> Complex64 {
        let nn = self.n as f64;
        let scale = 1.0 / nn.sqrt();
        self.chirp1[n] * self.chirp2[m] * cis_neg((m * n) as f64 / nn) * scale
    }

    /// Materialize the dense `N x N` matrix (reference path; errors above
    /// the configured cap).
    pub fn dense(&self) -> Result<Array2<Complex64>> {
        if self.n > self.dense_cap {
            return Err(Error::Config(format!(
                "dense transform of size {} exceeds cap {}",
                self.n, self.dense_cap
            )));
        }
        Ok(Array2::from_shape_fn((self.n, self.n), |(m, n)| self.entry(m, n)))
    }

    /// `U A`: forward transform applied to each column of `A`.
    pub fn forward_cols(&self, a: &Array2<Complex64>) -> Result<Array2<Complex64>> {
        self.check_len(a.nrows())?;
        let mut out = a.clone();
        let mut buf = vec![Complex64::default(); self.n];
        for j in 0..a.ncols() {
            for (i, b) in buf.iter_mut().enumerate() {
                *b = a[(i, j)];
            }
            self.forward_in_place(&mut buf)?;
            for (i, b) in buf.iter().enumerate() {
                out[(i, j)] = *b;
            }
        }
        Ok(out)
    }

    /// `A U^H`: each row `r` satisfies `(A U^H)[r, .] = conj(U conj(A[r, .]))`.
    pub fn adjoint_rows(&self, a: &Array2<Complex64>) -> Result<Array2<Complex64>> {
        self.check_len(a.ncols())?;
        let mut out = a.clone();
        let mut buf = vec![Complex64::default(); self.n];
        for r in 0..a.nrows() {
            for (j, b) in buf.iter_mut().enumerate() {
                *b = a[(r, j)].conj();
            }
            self.forward_in_place(&mut buf)?;
            for (j, b) in buf.iter().enumerate() {
                out[(r, j)] = b.conj();
            }
        }
        Ok(out)
    }

    /// `U A U^H` in `O(N^2 log N)`.
    pub fn conjugate(&self, a: &Array2<Complex64>) -> Result<Array2<Complex64>> {
        self.adjoint_rows(&self.forward_cols(a)?)
    }
}

impl std::fmt::Debug for UnitaryTransform {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("UnitaryTransform")
            .field("n", &self.n)
            .field("chirp", &self.chirp)
            .finish()
    }
}

/// Build the transform for a frame configuration.
pub fn daf_matrix(config: &SystemConfig, chirp: ChirpParams) -> UnitaryTransform {
    UnitaryTransform::new(config.n, chirp)
}

/// One-shot forward transform (`O(N log N)`).
pub fn daf_forward(
    x_time: &[Complex64],
    chirp: ChirpParams,
    config: &SystemConfig,
) -> Result<Vec<Complex64>> {
    UnitaryTransform::new(config.n, chirp).forward(x_time)
}

/// One-shot inverse transform.
pub fn daf_inverse(
    x_daf: &[Complex64],
    chirp: ChirpParams,
    config: &SystemConfig,
) -> Result<Vec<Complex64>> {
    UnitaryTransform::new(config.n, chirp).inverse(x_daf)
}
