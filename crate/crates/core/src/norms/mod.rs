//! Dyadic space-time norms, the `M_k` functional of the iteration, the
//! localized-energy monitor and weighted Sobolev testers.

pub mod jet;
pub mod mixed;
pub mod partition;
pub mod sobolev;

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::exponents::{ExponentProfile, Region};
use crate::math::powf;
use crate::solver::data::sobolev_squared;
use crate::solver::{FieldTrajectory, Nonlinearity};

pub use jet::DerivativeJet;
pub use mixed::{dyadic_seq_norm, plain_norm, InnerNorm, Samples, SeqExponent};
pub use partition::{build_partition, DyadicPartition};

/// `ψ_R^p̃` with `ψ_R(r) = S((r - R)/R)`, `S` the quintic smoothstep:
/// 0 for `r ≤ R`, 1 for `r ≥ 2R`, C².
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CutoffPsi {
    pub radius: f64,
    pub power: f64,
}

impl CutoffPsi {
    pub fn new(radius: f64, power: f64) -> Result<Self> {
        if !(radius > 0.0) || !(power > 0.0) || !radius.is_finite() || !power.is_finite() {
            return Err(Error::Config(format!("cutoff needs R > 0 and power > 0, got R = {radius}, power = {power}")));
        }
        Ok(Self { radius, power })
    }

    pub fn with_power(self, power: f64) -> Self {
        Self { power, ..self }
    }

    pub fn value(&self, r: f64) -> f64 {
        let x = ((r - self.radius) / self.radius).clamp(0.0, 1.0);
        let s = x * x * x * (10.0 - 15.0 * x + 6.0 * x * x);
        if self.power == 1.0 {
            s
        } else {
            powf(s, self.power)
        }
    }
}

fn jet_in_window(traj: &FieldTrajectory, window: (f64, f64), max_order: usize) -> Result<DerivativeJet> {
    let range = traj.window(window.0, window.1)?;
    DerivativeJet::new(traj, range, max_order)
}

fn check_partition(traj: &FieldTrajectory, partition: &DyadicPartition) -> Result<()> {
    if *traj.radial() != partition.grid {
        return Err(Error::Grid("partition built on a different grid".into()));
    }
    Ok(())
}

/// `‖ψ Z^{≤k} u‖_{ℓ^α_p L^p_t L^p_r L²_ω}` over `window`.
pub fn weighted_strichartz_norm(
    traj: &FieldTrajectory,
    partition: &DyadicPartition,
    k: usize,
    alpha: f64,
    p_exp: f64,
    psi: &CutoffPsi,
    window: (f64, f64),
) -> Result<f64> {
    if !(p_exp > 2.0) || !p_exp.is_finite() {
        return Err(Error::Config(format!("Strichartz exponent must exceed 2, got {p_exp}")));
    }
    check_partition(traj, partition)?;
    let jet = jet_in_window(traj, window, k)?;
    let field = jet.sum(0, k)?;
    let grid = partition.grid;
    mixed::dyadic_seq_norm_with_cut(&field, partition, alpha, SeqExponent::Finite(p_exp), InnerNorm::Lp(p_exp), &|i| {
        psi.value(grid.r(i))
    })
}

/// `‖ψ Z^{≤k} F‖_{ℓ^s_1 L¹_t L¹_r L²_ω}` for a source trajectory `F`.
pub fn weighted_source_norm(
    source: &FieldTrajectory,
    partition: &DyadicPartition,
    k: usize,
    s: f64,
    psi: &CutoffPsi,
    window: (f64, f64),
) -> Result<f64> {
    check_partition(source, partition)?;
    let jet = jet_in_window(source, window, k)?;
    let field = jet.sum(0, k)?;
    let grid = partition.grid;
    mixed::dyadic_seq_norm_with_cut(&field, partition, s, SeqExponent::Finite(1.0), InnerNorm::L1L1L2, &|i| {
        psi.value(grid.r(i))
    })
}

/// `‖∂^{≤k} F‖_{L¹_t L²_x}`.
pub fn source_energy_norm(source: &FieldTrajectory, k: usize, window: (f64, f64)) -> Result<f64> {
    let jet = jet_in_window(source, window, k)?;
    plain_norm(&jet.sum(0, k)?, InnerNorm::L1L2x)
}

/// `F(u)` with time derivative `F'(u) u_t`, slice by slice.
pub fn nonlinear_image(traj: &FieldTrajectory, nl: &Nonlinearity) -> FieldTrajectory {
    let mut out = traj.clone();
    for (k, (u, ut)) in traj.u.iter().zip(&traj.u_t).enumerate() {
        for i in 0..u.len() {
            out.u[k][i] = nl.eval(u[i]);
            out.u_t[k][i] = nl.derivative(u[i], 1) * ut[i];
        }
    }
    out
}

/// Left side of the localized energy estimate for `|μ| ≤ mu_max`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalizedEnergy {
    /// `‖∂∂^{≤μ} u‖_{L^∞_t L²_x}`
    pub energy: f64,
    /// `‖(1 - χ) ∂∂^{≤μ} u‖_{ℓ^{-1/2}_∞ L²_{t,x}}`
    pub exterior: f64,
    /// `‖∂^{≤μ} u‖_{ℓ^{-3/2}_∞ L²_{t,x}}`
    pub weighted: f64,
}

impl LocalizedEnergy {
    pub fn total(&self) -> f64 {
        self.energy + self.exterior + self.weighted
    }
}

/// The three left-hand terms of the localized energy estimate.
///
/// `exterior` is `1 - χ`: zero near the origin and one far out.
pub fn localized_energy_lhs(
    traj: &FieldTrajectory,
    partition: &DyadicPartition,
    mu_max: usize,
    exterior: &CutoffPsi,
    window: (f64, f64),
) -> Result<LocalizedEnergy> {
    if mu_max > 2 {
        return Err(Error::Config(format!("|μ| ≤ 2 required, got {mu_max}")));
    }
    check_partition(traj, partition)?;
    let jet = jet_in_window(traj, window, mu_max + 1)?;
    let grad = jet.sum(1, mu_max + 1)?;
    let low = jet.sum(0, mu_max)?;
    let grid = partition.grid;
    Ok(LocalizedEnergy {
        energy: plain_norm(&grad, InnerNorm::LinfL2x)?,
        exterior: mixed::dyadic_seq_norm_with_cut(&grad, partition, -0.5, SeqExponent::Infinity, InnerNorm::L2tx, &|i| {
            exterior.value(grid.r(i))
        })?,
        weighted: dyadic_seq_norm(&low, partition, -1.5, SeqExponent::Infinity, InnerNorm::L2tx)?,
    })
}

/// Right side of the localized energy estimate without its constant:
/// `‖u(0)‖_{H^{μ+1}} + ‖u_t(0)‖_{H^μ} + Σ_{ν≤μ} ‖∂^ν F‖_{L¹L²}`.
pub fn localized_energy_rhs(traj: &FieldTrajectory, mu_max: usize, source_l1l2: f64) -> Result<f64> {
    if mu_max > 2 {
        return Err(Error::Config(format!("|μ| ≤ 2 required, got {mu_max}")));
    }
    if traj.is_empty() || traj.times[0] != 0.0 {
        return Err(Error::Range("trajectory must start at t = 0".into()));
    }
    let grid = traj.radial();
    let f = crate::math::sqrt(sobolev_squared(grid, &traj.u[0], mu_max + 1));
    let g = crate::math::sqrt(sobolev_squared(grid, &traj.u_t[0], mu_max));
    Ok(f + g + source_l1l2)
}

/// `LHS / RHS` of the localized energy estimate.
pub fn le_ratio(
    traj: &FieldTrajectory,
    partition: &DyadicPartition,
    mu_max: usize,
    exterior: &CutoffPsi,
    window: (f64, f64),
    source_l1l2: f64,
) -> Result<f64> {
    let lhs = localized_energy_lhs(traj, partition, mu_max, exterior, window)?.total();
    let rhs = localized_energy_rhs(traj, mu_max, source_l1l2)?;
    if rhs == 0.0 {
        return Err(Error::Evaluation("zero data and source".into()));
    }
    Ok(lhs / rhs)
}

/// The four terms of `M_k(u, v)`.
#[derive(Debug, Clone, PartialEq)]
pub struct NormReport {
    pub k: usize,
    pub window: (f64, f64),
    pub alpha1: f64,
    pub alpha2: f64,
    pub p: f64,
    pub q: f64,
    /// `‖ψ Z^{≤k} u‖_{ℓ^{α1}_q L^q L^q L²}`
    pub strichartz_u: f64,
    /// `‖ψ Z^{≤k} v‖_{ℓ^{α2}_p L^p L^p L²}`
    pub strichartz_v: f64,
    /// `‖∂^{≤k}(u, v)‖_{ℓ^{-3/2}_∞ L² L² L²}`
    pub local_energy: f64,
    /// `‖∂^{≤k} ∂(u, v)‖_{L^∞ L² L²}`
    pub energy: f64,
    pub total: f64,
}

/// One exported line of a [`NormReport`].
#[derive(Debug, Clone, PartialEq)]
pub struct NormRow {
    pub term: String,
    pub k: usize,
    pub weight: f64,
    pub exponent: f64,
    pub value: f64,
    pub window: (f64, f64),
}

impl NormReport {
    pub fn rows(&self) -> Vec<NormRow> {
        let row = |term: &str, weight: f64, exponent: f64, value: f64| NormRow {
            term: term.into(),
            k: self.k,
            weight,
            exponent,
            value,
            window: self.window,
        };
        alloc::vec![
            row("strichartz-u", self.alpha1, self.q, self.strichartz_u),
            row("strichartz-v", self.alpha2, self.p, self.strichartz_v),
            row("local-energy", -1.5, 2.0, self.local_energy),
            row("energy", 0.0, 2.0, self.energy),
            row("total", f64::NAN, f64::NAN, self.total),
        ]
    }
}

/// `M_k(u, v)` for `k ∈ {0, 2}` with `(α1, q)` on `u` and `(α2, p)` on `v`.
pub fn m_k(
    u: &FieldTrajectory,
    v: &FieldTrajectory,
    k: usize,
    profile: &ExponentProfile,
    psi: &CutoffPsi,
    window: (f64, f64),
    partition: &DyadicPartition,
) -> Result<NormReport> {
    if profile.region != Region::GlobalDirect {
        return Err(Error::Config(format!(
            "M_k needs a directly admissible pair, ({}, {}) is {}",
            profile.pair.p,
            profile.pair.q,
            profile.region.label()
        )));
    }
    if k > 2 {
        return Err(Error::Config(format!("k must be at most 2, got {k}")));
    }
    let (p, q) = (profile.pair.p, profile.pair.q);
    let (a1, a2) = (profile.indices.alpha1, profile.indices.alpha2);
    let strichartz_u = weighted_strichartz_norm(u, partition, k, a1, q, psi, window)?;
    let strichartz_v = weighted_strichartz_norm(v, partition, k, a2, p, psi, window)?;
    let mut local_energy = 0.0;
    let mut energy = 0.0;
    for traj in [u, v] {
        check_partition(traj, partition)?;
        let jet = jet_in_window(traj, window, k + 1)?;
        local_energy += dyadic_seq_norm(&jet.sum(0, k)?, partition, -1.5, SeqExponent::Infinity, InnerNorm::L2tx)?;
        energy += plain_norm(&jet.sum(1, k + 1)?, InnerNorm::LinfL2x)?;
    }
    Ok(NormReport {
        k,
        window,
        alpha1: a1,
        alpha2: a2,
        p,
        q,
        strichartz_u,
        strichartz_v,
        local_energy,
        energy,
        total: strichartz_u + strichartz_v + local_energy + energy,
    })
}
