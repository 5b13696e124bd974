//! Space-time samples of radial fields and the mixed Lebesgue norms
//! `L^p_t L^q_r L^s_ω` on them, with `r^2 dr` in the radial integral.
//!
//! A radial sample `f(r)` has `‖f(r·)‖_{L^s_ω} = (4π)^{1/s} |f(r)|`.

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::error::{Error, Result};
use crate::grid::RadialGrid;
use crate::math::{abs, powf, sqrt};
use crate::norms::partition::DyadicPartition;

/// Values of a radial field at `times × grid nodes`.
///
/// A single slice with `times = [0]` is a spatial field.
#[derive(Debug, Clone, PartialEq)]
pub struct Samples {
    pub grid: RadialGrid,
    pub times: Vec<f64>,
    pub values: Vec<Vec<f64>>,
}

impl Samples {
    pub fn new(grid: RadialGrid, times: Vec<f64>, values: Vec<Vec<f64>>) -> Result<Self> {
        if times.len() != values.len() || values.iter().any(|v| v.len() != grid.len()) {
            return Err(Error::Grid(format!(
                "{} times, {} slices, {} nodes per slice expected",
                times.len(),
                values.len(),
                grid.len()
            )));
        }
        Ok(Self { grid, times, values })
    }

    pub fn spatial(grid: RadialGrid, values: Vec<f64>) -> Result<Self> {
        Self::new(grid, alloc::vec![0.0], alloc::vec![values])
    }

    pub fn map<F: Fn(usize, f64) -> f64>(&self, f: F) -> Self {
        let values = self.values.iter().map(|s| s.iter().enumerate().map(|(i, &x)| f(i, x)).collect()).collect();
        Self { grid: self.grid, times: self.times.clone(), values }
    }

    /// Pointwise sum; both operands must share grid and times.
    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.grid != other.grid || self.times != other.times {
            return Err(Error::Grid("samples live on different grids".into()));
        }
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a.iter().zip(b).map(|(x, y)| x + y).collect())
            .collect();
        Ok(Self { grid: self.grid, times: self.times.clone(), values })
    }
}

/// Inner norm of a dyadic sequence norm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InnerNorm {
    /// `L²_{t,x}`
    L2tx,
    /// `L^∞_t L²_x`
    LinfL2x,
    /// `L^p_t L^p_r L²_ω`
    Lp(f64),
    /// `L^∞_{t,x}`
    Linftx,
    /// `L¹_t L¹_r L²_ω`
    L1L1L2,
    /// `L¹_t L²_x`
    L1L2x,
    /// `L²_x` of a spatial field
    L2x,
    /// `L^∞_x` of a spatial field
    Linfx,
    /// `L^p_r L²_ω` of a spatial field
    Lpx(f64),
}

impl InnerNorm {
    fn spatial_only(self) -> bool {
        matches!(self, InnerNorm::L2x | InnerNorm::Linfx | InnerNorm::Lpx(_))
    }

    pub fn label(&self) -> alloc::string::String {
        match self {
            InnerNorm::L2tx => "L2tx".into(),
            InnerNorm::LinfL2x => "LinftL2x".into(),
            InnerNorm::Lp(p) => format!("L{p}tL{p}rL2w"),
            InnerNorm::Linftx => "Linftx".into(),
            InnerNorm::L1L1L2 => "L1tL1rL2w".into(),
            InnerNorm::L1L2x => "L1tL2x".into(),
            InnerNorm::L2x => "L2x".into(),
            InnerNorm::Linfx => "Linfx".into(),
            InnerNorm::Lpx(p) => format!("L{p}rL2w"),
        }
    }
}

/// Outer sequence exponent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SeqExponent {
    Finite(f64),
    Infinity,
}

const SPHERE: f64 = 4.0 * PI;

/// Trapezoid weights for a (possibly nonuniform) time grid.
pub fn trapezoid_weights(times: &[f64]) -> Vec<f64> {
    let n = times.len();
    let mut w = alloc::vec![0.0; n];
    for k in 1..n {
        let h = times[k] - times[k - 1];
        w[k - 1] += 0.5 * h;
        w[k] += 0.5 * h;
    }
    w
}

/// Spatial norm of one slice weighted by `cut` over nodes `range`.
fn spatial(inner: InnerNorm, weights: &[f64], slice: &[f64], cut: &dyn Fn(usize) -> f64, range: (usize, usize)) -> f64 {
    let (a, b) = range;
    match inner {
        InnerNorm::L2tx | InnerNorm::LinfL2x | InnerNorm::L1L2x | InnerNorm::L2x => {
            let mut s = 0.0;
            for i in a..b {
                let f = cut(i) * slice[i];
                s += weights[i] * f * f;
            }
            sqrt(SPHERE * s)
        }
        InnerNorm::Lp(p) | InnerNorm::Lpx(p) => {
            let mut s = 0.0;
            for i in a..b {
                s += weights[i] * powf(sqrt(SPHERE) * abs(cut(i) * slice[i]), p);
            }
            s
        }
        InnerNorm::L1L1L2 => {
            let mut s = 0.0;
            for i in a..b {
                s += weights[i] * sqrt(SPHERE) * abs(cut(i) * slice[i]);
            }
            s
        }
        InnerNorm::Linftx | InnerNorm::Linfx => {
            let mut m: f64 = 0.0;
            for i in a..b {
                m = m.max(abs(cut(i) * slice[i]));
            }
            m
        }
    }
}

/// `‖cut · f‖_A` for the inner norm `A`, restricted to nodes in `range`.
pub fn inner_norm(samples: &Samples, inner: InnerNorm, cut: &dyn Fn(usize) -> f64, range: (usize, usize)) -> Result<f64> {
    if let InnerNorm::Lp(p) | InnerNorm::Lpx(p) = inner {
        if !(p >= 1.0) || !p.is_finite() {
            return Err(Error::Config(format!("unsupported Lebesgue exponent {p}")));
        }
    }
    if inner.spatial_only() && samples.values.len() != 1 {
        return Err(Error::Config(format!("{} needs a spatial field", inner.label())));
    }
    let weights = samples.grid.volume_weights();
    let tw = trapezoid_weights(&samples.times);
    let per_slice = samples.values.iter().map(|s| spatial(inner, &weights, s, cut, range));
    Ok(match inner {
        InnerNorm::L2tx => sqrt(per_slice.zip(&tw).map(|(x, w)| w * x * x).sum()),
        InnerNorm::LinfL2x | InnerNorm::Linftx | InnerNorm::Linfx | InnerNorm::L2x => per_slice.fold(0.0, f64::max),
        InnerNorm::Lp(p) => powf(per_slice.zip(&tw).map(|(x, w)| w * x).sum(), 1.0 / p),
        InnerNorm::Lpx(p) => powf(per_slice.sum(), 1.0 / p),
        InnerNorm::L1L1L2 => per_slice.zip(&tw).map(|(x, w)| w * x).sum(),
        InnerNorm::L1L2x => per_slice.zip(&tw).map(|(x, w)| w * x).sum(),
    })
}

/// `‖ 2^{js} ‖φ_j cut f‖_A ‖_{ℓ^q_j}` over the blocks of `partition`.
///
/// The partition covers the whole grid, so the truncated tail is exactly zero.
pub fn dyadic_seq_norm_with_cut(
    samples: &Samples,
    partition: &DyadicPartition,
    s: f64,
    q: SeqExponent,
    inner: InnerNorm,
    cut: &dyn Fn(usize) -> f64,
) -> Result<f64> {
    if samples.grid != partition.grid {
        return Err(Error::Grid("partition and samples use different grids".into()));
    }
    if let SeqExponent::Finite(q) = q {
        if !(q >= 1.0) || !q.is_finite() {
            return Err(Error::Config(format!("unsupported sequence exponent {q}")));
        }
    }
    let mut acc = 0.0;
    for j in 0..partition.blocks() {
        let range = partition.support[j];
        if range.0 >= range.1 {
            continue;
        }
        let phi = &partition.values[j];
        let c = |i: usize| phi[i] * cut(i);
        let block = powf(2.0, j as f64 * s) * inner_norm(samples, inner, &c, range)?;
        acc = match q {
            SeqExponent::Infinity => f64::max(acc, block),
            SeqExponent::Finite(q) => acc + powf(block, q),
        };
    }
    Ok(match q {
        SeqExponent::Infinity => acc,
        SeqExponent::Finite(q) => powf(acc, 1.0 / q),
    })
}

/// `‖ 2^{js} ‖φ_j f‖_A ‖_{ℓ^q_j}`.
pub fn dyadic_seq_norm(samples: &Samples, partition: &DyadicPartition, s: f64, q: SeqExponent, inner: InnerNorm) -> Result<f64> {
    dyadic_seq_norm_with_cut(samples, partition, s, q, inner, &|_| 1.0)
}

/// `‖f‖_A` over the whole grid.
pub fn plain_norm(samples: &Samples, inner: InnerNorm) -> Result<f64> {
    inner_norm(samples, inner, &|_| 1.0, (0, samples.grid.len()))
}
