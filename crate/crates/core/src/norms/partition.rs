//! Smooth dyadic partition `φ_j` with `Σ φ_j^2 = 1`, blocks indexed by
//! `<x> = (1 + |x|^2)^{1/2}`.
//!
//! `χ0` is a C^∞ cutoff equal to 1 on `[0, 1]` and 0 on `[3/2, ∞)`;
//! `ρ_0 = χ0(<x>)`, `ρ_j = χ0(<x>/2^j) - χ0(<x>/2^{j-1})`, and
//! `φ_j = ρ_j / (Σ_k ρ_k^2)^{1/2}`. Block `j ≥ 1` is supported in
//! `2^{j-1} ≤ <x> ≤ 3·2^{j-1}`, block 0 in `<x> ≤ 3/2`.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::grid::RadialGrid;
use crate::math::{exp, japanese, log2, sqrt};

fn smooth_step_kernel(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        exp(-1.0 / x)
    }
}

/// End of the transition band of [`chi0`].
pub const CHI_EDGE: f64 = 1.5;

/// C^∞ cutoff: 1 on `[0, 1]`, 0 on `[3/2, ∞)`.
///
/// The band is narrower than an octave, so each `φ_j` equals 1 on
/// `<x> ∈ [3·2^{j-2}, 2^j]`.
pub fn chi0(s: f64) -> f64 {
    if s <= 1.0 {
        return 1.0;
    }
    if s >= CHI_EDGE {
        return 0.0;
    }
    let x = (s - 1.0) / (CHI_EDGE - 1.0);
    let a = smooth_step_kernel(1.0 - x);
    let b = smooth_step_kernel(x);
    a / (a + b)
}

fn rho(j: usize, bracket: f64) -> f64 {
    if j == 0 {
        chi0(bracket)
    } else {
        let scale = (1u64 << j) as f64;
        chi0(bracket / scale) - chi0(2.0 * bracket / scale)
    }
}

/// Indices of the (at most two) blocks that can be nonzero at `<x> = bracket`.
pub fn active_blocks(bracket: f64) -> (usize, usize) {
    if bracket <= 2.0 {
        return (0, 1);
    }
    let k = log2(bracket) as usize;
    (k, k + 1)
}

/// `φ_j` evaluated at radius `r` (no truncation: the family is the infinite one).
pub fn phi(j: usize, r: f64) -> f64 {
    let b = japanese(r);
    let (lo, hi) = active_blocks(b);
    if j + 1 < lo || j > hi + 1 {
        return 0.0;
    }
    let lo = lo.saturating_sub(1);
    let norm2: f64 = (lo..=hi + 1).map(|k| rho(k, b) * rho(k, b)).sum();
    rho(j, b) / sqrt(norm2)
}

/// The partition sampled on a radial grid.
#[derive(Debug, Clone)]
pub struct DyadicPartition {
    pub grid: RadialGrid,
    pub j_max: usize,
    /// `values[j][i] = φ_j(r_i)`.
    pub values: Vec<Vec<f64>>,
    /// Per block: node index range `[start, end)` where `φ_j` may be nonzero.
    pub support: Vec<(usize, usize)>,
}

impl DyadicPartition {
    pub fn build(grid: RadialGrid, j_max: usize) -> Result<Self> {
        let needed = japanese(grid.r_max);
        if j_max >= 62 || ((1u64 << j_max) as f64) < needed {
            return Err(Error::Coverage { needed });
        }
        let mut values = vec![vec![0.0; grid.len()]; j_max + 1];
        let mut support = vec![(usize::MAX, 0usize); j_max + 1];
        for i in 0..grid.len() {
            let r = grid.r(i);
            let b = japanese(r);
            let (lo, hi) = active_blocks(b);
            let lo = lo.saturating_sub(1);
            let hi = (hi + 1).min(j_max);
            let norm2: f64 = (lo..=hi).map(|k| rho(k, b) * rho(k, b)).sum();
            let norm = sqrt(norm2);
            for j in lo..=hi {
                let v = rho(j, b) / norm;
                if v != 0.0 {
                    values[j][i] = v;
                    let s = &mut support[j];
                    s.0 = s.0.min(i);
                    s.1 = s.1.max(i + 1);
                }
            }
        }
        for s in &mut support {
            if s.0 == usize::MAX {
                *s = (0, 0);
            }
        }
        Ok(Self { grid, j_max, values, support })
    }

    /// The partition with the smallest `J_max` covering `grid`.
    pub fn covering(grid: RadialGrid) -> Result<Self> {
        let needed = japanese(grid.r_max);
        let mut j = 0;
        while ((1u64 << j) as f64) < needed && j < 61 {
            j += 1;
        }
        Self::build(grid, j)
    }

    pub fn blocks(&self) -> usize {
        self.j_max + 1
    }

    /// `max_i |Σ_j φ_j(r_i)^2 - 1|`.
    pub fn squares_residual(&self) -> f64 {
        (0..self.grid.len())
            .map(|i| {
                let s: f64 = self.values.iter().map(|v| v[i] * v[i]).sum();
                (s - 1.0).abs()
            })
            .fold(0.0, f64::max)
    }
}

/// Samples `φ_0 .. φ_{J_max}` on `grid`.
pub fn build_partition(grid: RadialGrid, j_max: usize) -> Result<DyadicPartition> {
    DyadicPartition::build(grid, j_max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chi0_is_a_monotone_cutoff() {
        assert_eq!(chi0(0.5), 1.0);
        assert_eq!(chi0(2.5), 0.0);
        let mut prev = 1.0;
        for k in 0..=100 {
            let v = chi0(1.0 + k as f64 / 200.0);
            assert!(v <= prev + 1e-15);
            prev = v;
        }
        assert!((chi0(1.25) - 0.5).abs() < 1e-15);
        assert_eq!(chi0(1.5), 0.0);
    }

    #[test]
    fn partition_of_squares() {
        let g = RadialGrid::new(200.0, 4000).unwrap();
        let p = DyadicPartition::build(g, 8).unwrap();
        assert!(p.squares_residual() < 1e-12);
    }

    #[test]
    fn adjacent_only_overlap() {
        let g = RadialGrid::new(500.0, 5000).unwrap();
        let p = DyadicPartition::build(g, 10).unwrap();
        for j in 0..p.blocks() {
            for k in j + 2..p.blocks() {
                for i in 0..g.len() {
                    assert!(p.values[j][i] == 0.0 || p.values[k][i] == 0.0, "blocks {j},{k} overlap at {i}");
                }
            }
        }
        // declared block supports
        for j in 1..p.blocks() {
            for i in 0..g.len() {
                if p.values[j][i] != 0.0 {
                    let b = japanese(g.r(i));
                    let s = (1u64 << j) as f64;
                    assert!(b >= s / 2.0 - 1e-12 && b <= 1.5 * s + 1e-12);
                }
            }
        }
    }

    #[test]
    fn plateau_where_neighbours_vanish() {
        for j in 2..8usize {
            let s = (1u64 << j) as f64;
            for k in 0..=50 {
                let b = 0.75 * s + 0.25 * s * k as f64 / 50.0;
                let r = (b * b - 1.0).sqrt();
                assert!((phi(j, r) - 1.0).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn nested_under_refinement_of_j_max() {
        let g = RadialGrid::new(60.0, 600).unwrap();
        let a = DyadicPartition::build(g, 6).unwrap();
        let b = DyadicPartition::build(g, 12).unwrap();
        for j in 0..6 {
            assert_eq!(a.values[j], b.values[j]);
        }
    }

    #[test]
    fn coverage_error() {
        let g = RadialGrid::new(100.0, 100).unwrap();
        assert!(matches!(DyadicPartition::build(g, 6), Err(Error::Coverage { .. })));
        assert!(DyadicPartition::build(g, 7).is_ok());
    }

    #[test]
    fn analytic_phi_matches_sampled() {
        let g = RadialGrid::new(60.0, 300).unwrap();
        let p = DyadicPartition::build(g, 7).unwrap();
        for j in 0..7 {
            for i in 0..g.len() {
                assert!((phi(j, g.r(i)) - p.values[j][i]).abs() < 1e-15);
            }
        }
    }
}
