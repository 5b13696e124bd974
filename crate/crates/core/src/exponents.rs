//! Closed-form exponent algebra for the coupled system: critical power,
//! Strauss curve `C(p, q)`, the weighted-Strichartz indices and the region
//! classification of the `(p, q)` plane.

use alloc::format;

use crate::error::{Error, Result};
use crate::math::sqrt;

/// Default margin for strict inequalities in [`classify`].
pub const DEFAULT_MARGIN: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExponentPair {
    pub p: f64,
    pub q: f64,
    pub n: u32,
}

impl ExponentPair {
    /// Pair in three space dimensions.
    pub fn new(p: f64, q: f64) -> Result<Self> {
        Self::with_dimension(p, q, 3)
    }

    pub fn with_dimension(p: f64, q: f64, n: u32) -> Result<Self> {
        if !(p > 1.0 && q > 1.0) {
            return Err(Error::Domain(format!("powers must exceed 1, got ({p}, {q})")));
        }
        if n < 2 {
            return Err(Error::Domain(format!("dimension must be at least 2, got {n}")));
        }
        Ok(Self { p, q, n })
    }

    pub fn swapped(self) -> Self {
        Self { p: self.q, q: self.p, n: self.n }
    }
}

/// Positive root of `(n-1) p^2 - (n+1) p - 2 = 0`.
pub fn critical_exponent(n: u32) -> Result<f64> {
    if n < 2 {
        return Err(Error::Domain(format!("dimension must be at least 2, got {n}")));
    }
    let a = (n - 1) as f64;
    let b = (n + 1) as f64;
    // the roots have product -2/a, so the positive one is free of cancellation
    Ok((b + sqrt(b * b + 8.0 * a)) / (2.0 * a))
}

/// The two competing terms of the Strauss curve, before subtracting `(n-1)/2`.
pub fn strauss_terms(pair: ExponentPair) -> Result<(f64, f64)> {
    let ExponentPair { p, q, .. } = pair;
    let denom = p * q - 1.0;
    if denom == 0.0 {
        return Err(Error::SingularCurve);
    }
    Ok(((q + 2.0 + 1.0 / p) / denom, (p + 2.0 + 1.0 / q) / denom))
}

pub fn strauss_c(pair: ExponentPair) -> Result<f64> {
    let (a, b) = strauss_terms(pair)?;
    Ok(a.max(b) - (pair.n as f64 - 1.0) / 2.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Indices {
    pub s1: f64,
    pub s2: f64,
    pub alpha1: f64,
    pub alpha2: f64,
}

/// `s1 = (7+4p-3pq)/(2-2pq)`, `s2 = (7+4q-3pq)/(2-2pq)`,
/// `alpha1 = 3/2 - 4/q - s1`, `alpha2 = 3/2 - 4/p - s2`.
pub fn derived_indices(pair: ExponentPair) -> Result<Indices> {
    let ExponentPair { p, q, .. } = pair;
    let denom = 2.0 - 2.0 * p * q;
    if denom == 0.0 {
        return Err(Error::SingularCurve);
    }
    let s1 = (7.0 + 4.0 * p - 3.0 * p * q) / denom;
    let s2 = (7.0 + 4.0 * q - 3.0 * p * q) / denom;
    Ok(Indices {
        s1,
        s2,
        alpha1: 1.5 - 4.0 / q - s1,
        alpha2: 1.5 - 4.0 / p - s2,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Region {
    GlobalDirect,
    GlobalAfterReduction,
    RectangleClassical,
    CriticalBoundary,
    SubcriticalBlowup,
}

impl Region {
    pub fn label(self) -> &'static str {
        match self {
            Region::GlobalDirect => "global-direct",
            Region::GlobalAfterReduction => "global-after-reduction",
            Region::RectangleClassical => "rectangle-classical",
            Region::CriticalBoundary => "critical-boundary",
            Region::SubcriticalBlowup => "subcritical-blowup",
        }
    }

    pub fn from_label(s: &str) -> Option<Self> {
        [
            Region::GlobalDirect,
            Region::GlobalAfterReduction,
            Region::RectangleClassical,
            Region::CriticalBoundary,
            Region::SubcriticalBlowup,
        ]
        .into_iter()
        .find(|r| r.label() == s)
    }
}

/// Three-way comparison against a threshold with a dead band of width `margin`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Side {
    Below,
    Near,
    Above,
}

fn side(value: f64, threshold: f64, margin: f64) -> Side {
    if value < threshold - margin {
        Side::Below
    } else if value > threshold + margin {
        Side::Above
    } else {
        Side::Near
    }
}

/// `p(q-2) < 3` and `q(p-2) < 3`, evaluated strictly.
pub fn conditions(pair: ExponentPair) -> (bool, bool) {
    let ExponentPair { p, q, .. } = pair;
    (p * (q - 2.0) < 3.0, q * (p - 2.0) < 3.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExponentProfile {
    pub pair: ExponentPair,
    pub p_c: f64,
    pub c: f64,
    pub indices: Indices,
    pub conditions_ok: (bool, bool),
    pub region: Region,
}

impl ExponentProfile {
    pub fn new(pair: ExponentPair) -> Result<Self> {
        Self::with_margin(pair, DEFAULT_MARGIN)
    }

    pub fn with_margin(pair: ExponentPair, margin: f64) -> Result<Self> {
        Ok(Self {
            pair,
            p_c: critical_exponent(pair.n)?,
            c: strauss_c(pair)?,
            indices: derived_indices(pair)?,
            conditions_ok: conditions(pair),
            region: classify_with_margin(pair, margin),
        })
    }

    /// Weights of the `L^1` source norms: `(p * alpha2, q * alpha1)`.
    pub fn source_weights(&self) -> (f64, f64) {
        (self.pair.p * self.indices.alpha2, self.pair.q * self.indices.alpha1)
    }
}

pub fn classify(pair: ExponentPair) -> Region {
    classify_with_margin(pair, DEFAULT_MARGIN)
}

/// Region of the `(p, q)` plane. Any deciding quantity within `margin` of
/// its threshold sends the pair to [`Region::CriticalBoundary`].
pub fn classify_with_margin(pair: ExponentPair, margin: f64) -> Region {
    let ExponentPair { p, q, n } = pair;
    let Ok(c) = strauss_c(pair) else {
        return Region::CriticalBoundary;
    };
    let p_c = critical_exponent(n).unwrap_or(f64::NAN);
    let c_side = side(c, 0.0, margin);
    if c_side == Side::Near {
        return Region::CriticalBoundary;
    }
    let above_two = side(p, 2.0, margin) == Side::Above && side(q, 2.0, margin) == Side::Above;
    let in_rectangle = side(p, p_c, margin) == Side::Above && side(q, p_c, margin) == Side::Above;
    if above_two && c_side == Side::Below {
        let first = side(p * (q - 2.0), 3.0, margin);
        let second = side(q * (p - 2.0), 3.0, margin);
        if first == Side::Below && second == Side::Below {
            return Region::GlobalDirect;
        }
        if first == Side::Near || second == Side::Near {
            return Region::CriticalBoundary;
        }
        if reduction_interval_with_margin(pair, margin).is_ok()
            || reduction_interval_with_margin(pair.swapped(), margin).is_ok()
        {
            return Region::GlobalAfterReduction;
        }
    }
    if in_rectangle {
        return Region::RectangleClassical;
    }
    if c_side == Side::Above {
        return Region::SubcriticalBlowup;
    }
    Region::CriticalBoundary
}

/// Smallest `q` (for fixed `p`) beyond which `C(p, q) < 0`.
///
/// Both Strauss terms decrease in `q`, so `C(p, q) < 0` iff `q` exceeds the
/// larger of the two crossing points.
pub fn strauss_threshold_q(p: f64, n: u32) -> f64 {
    let k = (n as f64 - 1.0) / 2.0;
    // (q + 2 + 1/p) = k (p q - 1)
    let first = if k * p > 1.0 { (2.0 + 1.0 / p + k) / (k * p - 1.0) } else { f64::INFINITY };
    // (p + 2 + 1/q) = k (p q - 1)  <=>  k p q^2 - (p + 2 + k) q - 1 = 0
    let b = p + 2.0 + k;
    let second = (b + sqrt(b * b + 4.0 * k * p)) / (2.0 * k * p);
    first.max(second)
}

/// Open interval of admissible reduced exponents `q~ < q` for which `C(p, q~) < 0`
/// and both `p(q~-2) < 3`, `q~(p-2) < 3` hold (and `q~ > 2`).
pub fn reduction_interval(pair: ExponentPair) -> Result<(f64, f64)> {
    reduction_interval_with_margin(pair, DEFAULT_MARGIN)
}

fn reduction_interval_with_margin(pair: ExponentPair, margin: f64) -> Result<(f64, f64)> {
    let ExponentPair { p, q, n } = pair;
    let c = strauss_c(pair)?;
    if !(c < -margin) {
        return Err(Error::ReductionInfeasible(format!("C({p}, {q}) = {c} is not negative")));
    }
    let lo = strauss_threshold_q(p, n).max(2.0);
    let mut hi = q.min(2.0 + 3.0 / p);
    if p > 2.0 {
        hi = hi.min(3.0 / (p - 2.0));
    }
    if hi - lo > 2.0 * margin {
        Ok((lo, hi))
    } else {
        Err(Error::ReductionInfeasible(format!(
            "empty interval ({lo}, {hi}) for p = {p}, q = {q}"
        )))
    }
}

/// Reduced exponent `q~`: midpoint of [`reduction_interval`].
pub fn reduce_exponent(pair: ExponentPair) -> Result<f64> {
    let (a, b) = conditions(pair);
    if a && b {
        return Err(Error::Domain(format!(
            "({}, {}) already satisfies both conditions; no reduction needed",
            pair.p, pair.q
        )));
    }
    let (lo, hi) = reduction_interval(pair)?;
    Ok(0.5 * (lo + hi))
}
