//! Static frame geometry and constellation alphabets.

use crate::{Error, Result};
use num_complex::Complex64;
use std::f64::consts::TAU;

/// Frame geometry: `N` symbols at sub-carrier spacing `delta_f` around
/// carrier `f_c`. Bandwidth, duration and the sample period are always
/// recomputed from `(N, delta_f)` so that `B = N delta_f` and
/// `T = N delta_t` hold exactly as stored.
#[derive(Debug, Clone)]
pub struct SystemConfig {
    /// Symbols per frame.
    pub n: usize,
    /// Sub-carrier spacing in Hz (`1/T`).
    pub delta_f: f64,
    /// Sample period in seconds (`1/B`).
    pub delta_t: f64,
    /// Carrier frequency in Hz.
    pub f_c: f64,
    /// Bandwidth in Hz (`N delta_f`).
    pub b: f64,
    /// Frame duration in seconds (`N delta_t = 1/delta_f`).
    pub t: f64,
    /// Constellation alphabet (unit average energy).
    pub alphabet: Alphabet,
}

impl SystemConfig {
    pub fn new(n: usize, delta_f: f64, f_c: f64, alphabet: Alphabet) -> Result<Self> {
        if n == 0 {
            return Err(Error::Config("N must be positive".into()));
        }
        if delta_f <= 0.0 || f_c <= 0.0 {
            return Err(Error::Config("delta_f and f_c must be positive".into()));
        }
        let b = n as f64 * delta_f;
        let delta_t = 1.0 / b;
        let t = n as f64 * delta_t;
        Ok(Self { n, delta_f, delta_t, f_c, b, t, alphabet })
    }
}

/// Constellation alphabet with Gray bit labels. `points[i]` is the point
/// whose bit label is the binary expansion of `i`, so the number of
/// differing bits between two symbols is `popcount(i ^ j)`.
#[derive(Debug, Clone)]
pub struct Alphabet {
    pub name: String,
    pub points: Vec<Complex64>,
    pub bits_per_symbol: usize,
}

impl Alphabet {
    /// 2-point real alphabet: label 0 -> +1, label 1 -> -1.
    pub fn bpsk() -> Self {
        Self {
            name: "bpsk".into(),
            points: vec![Complex64::new(1.0, 0.0), Complex64::new(-1.0, 0.0)],
            bits_per_symbol: 1,
        }
    }

    /// Gray-labelled QPSK at unit energy; bit 0 selects the real sign,
    /// bit 1 the imaginary sign.
    pub fn qpsk() -> Self {
        let s = 1.0 / 2.0_f64.sqrt();
        let points = (0..4)
            .map(|i| {
                let re = if i & 0b10 == 0 { s } else { -s };
                let im = if i & 0b01 == 0 { s } else { -s };
                Complex64::new(re, im)
            })
            .collect();
        Self { name: "qpsk".into(), points, bits_per_symbol: 2 }
    }

    /// Gray-labelled 16-QAM at unit energy (per-axis Gray code
    /// 00 -> +3, 01 -> +1, 11 -> -1, 10 -> -3, scaled by 1/sqrt(10)).
    pub fn qam16() -> Self {
        let s = 1.0 / 10.0_f64.sqrt();
        let axis = |b: usize| -> f64 {
            match b {
                0b00 => 3.0,
                0b01 => 1.0,
                0b11 => -1.0,
                _ => -3.0,
            }
        };
        let points = (0..16)
            .map(|i| Complex64::new(axis((i >> 2) & 3) * s, axis(i & 3) * s))
            .collect();
        Self { name: "16qam".into(), points, bits_per_symbol: 4 }
    }

    pub fn by_name(name: &str) -> Result<Self> {
        match name.to_ascii_lowercase().as_str() {
            "bpsk" => Ok(Self::bpsk()),
            "qpsk" => Ok(Self::qpsk()),
            "16qam" | "qam16" => Ok(Self::qam16()),
            other => Err(Error::Config(format!("unknown alphabet '{other}'"))),
        }
    }

    /// Number of constellation points `Q`.
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Average symbol energy; unity for the built-in alphabets.
    pub fn avg_energy(&self) -> f64 {
        self.points.iter().map(|p| p.norm_sqr()).sum::<f64>() / self.len() as f64
    }

    /// Index of the nearest constellation point.
    pub fn slice(&self, v: Complex64) -> usize {
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (i, p) in self.points.iter().enumerate() {
            let d = (v - p).norm_sqr();
            if d < best_d {
                best_d = d;
                best = i;
            }
        }
        best
    }

    /// Bits differing between the labels of symbols `i` and `j`.
    #[inline]
    pub fn bit_distance(&self, i: usize, j: usize) -> u32 {
        ((i ^ j) as u64).count_ones()
    }
}

/// Chirp parameters of the affine transform. `c1` is the chirp rate that
/// controls how sub-carriers sweep across the band; `c2` only rotates
/// per-symbol phases and is normally an irrational constant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChirpParams {
    pub c1: f64,
    pub c2: f64,
}

impl ChirpParams {
    /// `c1 < 0` (the negative-rate branch) is not supported; `c1 = 0`
    /// degenerates to the plain DFT and is allowed for testing.
    pub fn new(c1: f64, c2: f64) -> Result<Self> {
        if !(c1 >= 0.0) {
            return Err(Error::Config(format!("chirp rate c1 = {c1} must be >= 0")));
        }
        Ok(Self { c1, c2 })
    }

    /// Default second parameter: the fixed irrational 1/(2 pi).
    pub fn default_c2() -> f64 {
        1.0 / TAU
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derived_fields_consistent() {
        let cfg = SystemConfig::new(1024, 4.0, 6000.0, Alphabet::qpsk()).unwrap();
        assert_eq!(cfg.b, 1024.0 * 4.0);
        assert_eq!(cfg.delta_t, 1.0 / cfg.b);
        assert_eq!(cfg.t, 1024.0 * cfg.delta_t);
    }

    #[test]
    fn alphabets_unit_energy() {
        for a in [Alphabet::bpsk(), Alphabet::qpsk(), Alphabet::qam16()] {
            assert!((a.avg_energy() - 1.0).abs() < 1e-12, "{}", a.name);
        }
    }

    #[test]
    fn gray_labels_adjacent_qpsk() {
        let a = Alphabet::qpsk();
        // nearest neighbours in the constellation differ by exactly one bit
        for i in 0..4 {
            for j in 0..4 {
                if i == j {
                    continue;
                }
                let d = (a.points[i] - a.points[j]).norm();
                if d < 1.5 {
                    assert_eq!(a.bit_distance(i, j), 1);
                }
            }
        }
    }

    #[test]
    fn slicing_recovers_points() {
        let a = Alphabet::qam16();
        for (i, p) in a.points.iter().enumerate() {
            let noisy = p + Complex64::new(0.05, -0.04);
            assert_eq!(a.slice(noisy), i);
        }
    }

    #[test]
    fn rejects_negative_chirp_rate() {
        assert!(ChirpParams::new(-0.1, 0.0).is_err());
        assert!(ChirpParams::new(0.0, 0.3).is_ok());
    }
}
