//! Symbol detection: exhaustive ML, one-shot LMMSE, and the cross-domain
//! distributed OAMP iterative family.

pub mod lmmse;
pub mod ml;
pub mod oamp;
pub mod partition;

pub use lmmse::lmmse_detect;
pub use ml::ml_detect;
pub use oamp::{
    cd_d_oamp_detect, cd_oamp_detect, d_oamp_detect, oamp_detect, DetectorOutput,
    IterationTrace, OampParams,
};
pub use partition::{partition_groups, GroupPartition};

use crate::config::Alphabet;

/// Expand detected symbol labels into bits (most significant bit first).
pub fn symbols_to_bits(symbols: &[usize], alphabet: &Alphabet) -> Vec<u8> {
    let bps = alphabet.bits_per_symbol;
    let mut bits = Vec::with_capacity(symbols.len() * bps);
    for &s in symbols {
        for b in (0..bps).rev() {
            bits.push(((s >> b) & 1) as u8);
        }
    }
    bits
}

/// Pack a bit stream into symbol labels.
pub fn bits_to_symbols(bits: &[u8], alphabet: &Alphabet) -> Vec<usize> {
    let bps = alphabet.bits_per_symbol;
    assert_eq!(bits.len() % bps, 0);
    bits.chunks(bps)
        .map(|chunk| chunk.iter().fold(0usize, |acc, &b| (acc << 1) | b as usize))
        .collect()
}

/// Hamming distance between two label sequences under an alphabet.
pub fn bit_errors(a: &[usize], b: &[usize], alphabet: &Alphabet) -> u64 {
    a.iter()
        .zip(b)
        .map(|(&x, &y)| alphabet.bit_distance(x, y) as u64)
        .sum()
}
