//! Row-block partitioning of the time-domain channel for distributed
//! LMMSE: each group keeps only the columns carrying energy in its rows.

use crate::{Error, Result};
use ndarray::Array2;
use num_complex::Complex64;

/// One row group: the retained (global) column indices and the trimmed
/// matrix over them.
#[derive(Debug, Clone)]
pub struct Group {
    pub cols: Vec<usize>,
    pub h: Array2<Complex64>,
}

/// Partition of an `N x N` channel into `C` contiguous row blocks of
/// `N_c = N / C` rows, with per-block column trimming and the reverse
/// symbol-to-group map.
#[derive(Debug, Clone)]
pub struct GroupPartition {
    pub c: usize,
    pub n_c: usize,
    pub groups: Vec<Group>,
    /// For each symbol `j`: the `(group, position-within-group)` pairs
    /// where it appears.
    pub membership: Vec<Vec<(usize, usize)>>,
}

impl GroupPartition {
    /// Row range of group `g`.
    pub fn rows(&self, g: usize) -> std::ops::Range<usize> {
        g * self.n_c..(g + 1) * self.n_c
    }
}

/// Split `h_t` into `C` row blocks and keep, per block, the columns whose
/// block-restricted energy exceeds `energy_threshold` times the largest
/// column energy in that block. With `C = 1` every column is kept and the
/// partition is the trivial one.
pub fn partition_groups(
    h_t: &Array2<Complex64>,
    c: usize,
    energy_threshold: f64,
) -> Result<GroupPartition> {
    let n = h_t.nrows();
    if h_t.ncols() != n {
        return Err(Error::DimensionMismatch { expected: n, got: h_t.ncols() });
    }
    if c == 0 || n % c != 0 {
        return Err(Error::Config(format!("group count {c} must divide N = {n}")));
    }
    let n_c = n / c;
    let mut groups = Vec::with_capacity(c);
    let mut membership = vec![Vec::new(); n];
    for g in 0..c {
        let r0 = g * n_c;
        let cols: Vec<usize> = if c == 1 {
            (0..n).collect()
        } else {
            let mut energy = vec![0.0_f64; n];
            for r in r0..r0 + n_c {
                for (q, e) in energy.iter_mut().enumerate() {
                    *e += h_t[(r, q)].norm_sqr();
                }
            }
            let peak = energy.iter().cloned().fold(0.0, f64::max);
            (0..n).filter(|&q| energy[q] > energy_threshold * peak).collect()
        };
        let h = Array2::from_shape_fn((n_c, cols.len()), |(r, d)| h_t[(r0 + r, cols[d])]);
        for (d, &q) in cols.iter().enumerate() {
            membership[q].push((g, d));
        }
        groups.push(Group { cols, h });
    }
    Ok(GroupPartition { c, n_c, groups, membership })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{time_domain_channel, ChannelPath, WidebandChannel};
    use crate::config::{Alphabet, ChirpParams, SystemConfig};
    use num_complex::Complex64;

    fn cfg(n: usize) -> SystemConfig {
        SystemConfig::new(n, 4.0, 6000.0, Alphabet::qpsk()).unwrap()
    }

    fn narrowband_channel(c: &SystemConfig, delays: &[usize]) -> WidebandChannel {
        let paths = delays
            .iter()
            .map(|&ell| {
                ChannelPath::from_taps(
                    Complex64::new(1.0 / (delays.len() as f64).sqrt(), 0.0),
                    ell,
                    0.0,
                    c,
                )
            })
            .collect();
        WidebandChannel { paths, l_cpp: 8, l_cps: 1 }
    }

    #[test]
    fn single_group_keeps_everything() {
        let c = cfg(32);
        let chirp = ChirpParams::new(0.06, 0.3).unwrap();
        let ch = narrowband_channel(&c, &[0, 3]);
        let h = time_domain_channel(&ch, &c, chirp);
        let part = partition_groups(&h, 1, 1e-6).unwrap();
        assert_eq!(part.groups.len(), 1);
        assert_eq!(part.groups[0].cols, (0..32).collect::<Vec<_>>());
        assert_eq!(part.groups[0].h, h);
        for j in 0..32 {
            assert_eq!(part.membership[j], vec![(0, j)]);
        }
    }

    #[test]
    fn banded_narrowband_block_widths() {
        // paths at every delay 0..=L give interior blocks N_c + L columns
        let n = 64;
        let c = cfg(n);
        let chirp = ChirpParams::new(2.0 / n as f64, 0.3).unwrap();
        let spread_l = 5usize;
        let ch = narrowband_channel(&c, &(0..=spread_l).collect::<Vec<_>>());
        let h = time_domain_channel(&ch, &c, chirp);
        let part = partition_groups(&h, 4, 1e-6).unwrap();
        let n_c = 16;
        for g in 1..4 {
            assert_eq!(
                part.groups[g].cols.len(),
                n_c + spread_l,
                "group {g}: {:?}",
                part.groups[g].cols
            );
        }
        // wrap-around block picks up the tail columns too
        assert_eq!(part.groups[0].cols.len(), n_c + spread_l);
    }

    #[test]
    fn discarded_energy_negligible() {
        let n = 64;
        let c = cfg(n);
        let chirp = ChirpParams::new(2.0 / n as f64, 0.3).unwrap();
        let ch = narrowband_channel(&c, &[0, 2, 5]);
        let h = time_domain_channel(&ch, &c, chirp);
        let part = partition_groups(&h, 8, 1e-6).unwrap();
        for (g, group) in part.groups.iter().enumerate() {
            let rows = part.rows(g);
            let total: f64 = (rows.start..rows.end)
                .map(|r| (0..n).map(|q| h[(r, q)].norm_sqr()).sum::<f64>())
                .sum();
            let kept: f64 = (0..group.cols.len())
                .map(|d| (0..part.n_c).map(|r| group.h[(r, d)].norm_sqr()).sum::<f64>())
                .sum();
            assert!((total - kept) / total < 1e-6, "group {g} discards {}", (total - kept) / total);
        }
    }

    #[test]
    fn membership_positions_consistent() {
        let n = 32;
        let c = cfg(n);
        let chirp = ChirpParams::new(0.06, 0.3).unwrap();
        let ch = narrowband_channel(&c, &[1, 4]);
        let h = time_domain_channel(&ch, &c, chirp);
        let part = partition_groups(&h, 4, 1e-6).unwrap();
        for (j, places) in part.membership.iter().enumerate() {
            for &(g, d) in places {
                assert_eq!(part.groups[g].cols[d], j);
            }
        }
        // every column with energy is covered by at least one group
        for j in 0..n {
            let col_energy: f64 = (0..n).map(|r| h[(r, j)].norm_sqr()).sum();
            if col_energy > 1e-12 {
                assert!(!part.membership[j].is_empty(), "column {j} dropped");
            }
        }
    }

    #[test]
    fn rejects_non_dividing_group_count() {
        let h = Array2::<Complex64>::default((32, 32));
        assert!(partition_groups(&h, 5, 1e-6).is_err());
        assert!(partition_groups(&h, 0, 1e-6).is_err());
    }
}
