//! Uniform radial grid `r_i = i Δr`, `i = 0..=n_r`, with dual-cell quadrature
//! weights and parity-aware finite differences.
//!
//! Node `n_r` sits on the outer boundary `R_max` and carries a homogeneous
//! Dirichlet value in evolutions. The origin is handled by ghost values from
//! the even (or odd) extension of the field through `r = 0`.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Minimum number of cells for the radial stencils.
pub const MIN_CELLS: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialGrid {
    pub r_max: f64,
    pub n_r: usize,
}

/// Parity of a radial field under `r -> -r`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn flip(self) -> Self {
        match self {
            Parity::Even => Parity::Odd,
            Parity::Odd => Parity::Even,
        }
    }

    fn ghost(self, value: f64) -> f64 {
        match self {
            Parity::Even => value,
            Parity::Odd => -value,
        }
    }
}

impl RadialGrid {
    pub fn new(r_max: f64, n_r: usize) -> Result<Self> {
        if n_r < MIN_CELLS {
            return Err(Error::Grid(format!("need at least {MIN_CELLS} cells, got {n_r}")));
        }
        if !(r_max > 0.0 && r_max.is_finite()) {
            return Err(Error::Grid(format!("invalid radius {r_max}")));
        }
        Ok(Self { r_max, n_r })
    }

    #[inline]
    pub fn dr(&self) -> f64 {
        self.r_max / self.n_r as f64
    }

    /// Number of nodes, `n_r + 1`.
    #[inline]
    pub fn len(&self) -> usize {
        self.n_r + 1
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn r(&self, i: usize) -> f64 {
        i as f64 * self.dr()
    }

    pub fn radii(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.r(i)).collect()
    }

    /// `r_{i+1/2}` for `i = 0..n_r`.
    pub fn faces(&self) -> Vec<f64> {
        (0..self.n_r).map(|i| (i as f64 + 0.5) * self.dr()).collect()
    }

    /// Dual-cell volumes `∫ r^2 dr` over `[r_{i-1/2}, r_{i+1/2}] ∩ [0, R_max]`.
    ///
    /// These are the midpoint weights for the `r^2 dr` measure; multiply by
    /// `4π` for volume integrals over `R^3`.
    pub fn volume_weights(&self) -> Vec<f64> {
        let h = self.dr();
        (0..self.len())
            .map(|i| {
                let lo = if i == 0 { 0.0 } else { (i as f64 - 0.5) * h };
                let hi = if i == self.n_r { self.r_max } else { (i as f64 + 0.5) * h };
                (hi * hi * hi - lo * lo * lo) / 3.0
            })
            .collect()
    }

    /// Full dual-cell volumes, including the outer half cell beyond `R_max`.
    pub(crate) fn full_cell_volumes(&self) -> Vec<f64> {
        let h = self.dr();
        (0..self.len())
            .map(|i| {
                let lo = if i == 0 { 0.0 } else { (i as f64 - 0.5) * h };
                let hi = (i as f64 + 0.5) * h;
                (hi * hi * hi - lo * lo * lo) / 3.0
            })
            .collect()
    }

    /// Central first derivative; ghost at the origin from `parity`,
    /// one-sided second-order stencil at the outer node.
    pub fn d_r(&self, u: &[f64], parity: Parity) -> Vec<f64> {
        let n = self.n_r;
        let h = self.dr();
        let mut out = Vec::with_capacity(n + 1);
        out.push((u[1] - parity.ghost(u[1])) / (2.0 * h));
        for i in 1..n {
            out.push((u[i + 1] - u[i - 1]) / (2.0 * h));
        }
        out.push((3.0 * u[n] - 4.0 * u[n - 1] + u[n - 2]) / (2.0 * h));
        out
    }

    /// Central second derivative with the same boundary treatment as [`Self::d_r`].
    pub fn d_rr(&self, u: &[f64], parity: Parity) -> Vec<f64> {
        let n = self.n_r;
        let h2 = self.dr() * self.dr();
        let mut out = Vec::with_capacity(n + 1);
        out.push((u[1] - 2.0 * u[0] + parity.ghost(u[1])) / h2);
        for i in 1..n {
            out.push((u[i + 1] - 2.0 * u[i] + u[i - 1]) / h2);
        }
        out.push((2.0 * u[n] - 5.0 * u[n - 1] + 4.0 * u[n - 2] - u[n - 3]) / h2);
        out
    }

    /// `∫ f r^2 dr` with the dual-cell weights.
    pub fn integrate_r2(&self, f: &[f64]) -> f64 {
        self.volume_weights().iter().zip(f).map(|(w, v)| w * v).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_coarse_grid() {
        assert!(matches!(RadialGrid::new(1.0, 7), Err(Error::Grid(_))));
        assert!(RadialGrid::new(1.0, 8).is_ok());
    }

    #[test]
    fn weights_sum_to_ball_volume() {
        let g = RadialGrid::new(3.0, 40).unwrap();
        let s: f64 = g.volume_weights().iter().sum();
        assert!((s - 9.0).abs() < 1e-12);
    }

    #[test]
    fn derivatives_exact_on_quadratics() {
        let g = RadialGrid::new(2.0, 16).unwrap();
        let u: Vec<f64> = g.radii().iter().map(|r| 1.0 + r * r).collect();
        let du = g.d_r(&u, Parity::Even);
        let ddu = g.d_rr(&u, Parity::Even);
        for (i, r) in g.radii().iter().enumerate() {
            assert!((du[i] - 2.0 * r).abs() < 1e-11);
            assert!((ddu[i] - 2.0).abs() < 1e-9);
        }
        let v: Vec<f64> = g.radii().iter().map(|r| 3.0 * r).collect();
        let dv = g.d_r(&v, Parity::Odd);
        assert!(dv.iter().all(|d| (d - 3.0).abs() < 1e-12));
    }

    #[test]
    fn r2_quadrature_is_second_order() {
        let err = |n: usize| {
            let g = RadialGrid::new(6.0, n).unwrap();
            let f: Vec<f64> = g.radii().iter().map(|r| (-r * r).exp()).collect();
            (g.integrate_r2(&f) - core::f64::consts::PI.sqrt() / 4.0).abs()
        };
        let ratio = err(100) / err(200);
        assert!((ratio - 4.0).abs() < 0.4, "ratio {ratio}");
    }
}
