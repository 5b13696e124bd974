//! Picard iteration for the coupled system with fixed Cauchy data:
//!
//! ```text
//! P1 u_j = F_p(v_{j-1}),   P2 v_j = F_q(u_{j-1}),   u_{-1} = v_{-1} = 0.
//! ```
//!
//! Each linear solve takes the previous iterate's RK4 stage values as its
//! source, so the iteration converges to the direct coupled RK4 solution on
//! the same grid.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::exponents::{ExponentProfile, Region};
use crate::norms::{self, CutoffPsi, DyadicPartition, NormReport};
use crate::solver::{
    evolve_linear_recorded, sup_abs, CoupledProblem, FieldTrajectory, Grid, NoSource, StageHistory, StageSource,
};

/// Largest `ρ_j` (`j ≥ 2`) accepted as contraction, `1/2 + 0.05`.
pub const CONTRACTION_LIMIT: f64 = 0.55;
/// First index whose ratio is judged.
pub const FIRST_JUDGED: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RatioFlag {
    /// `ρ_j = Δ_j / Δ_{j-1}` is defined.
    Defined,
    /// No previous difference (`j = 0`) or `Δ_j = Δ_{j-1} = 0`.
    Undefined,
    /// `Δ_{j-1} = 0` but `Δ_j ≠ 0`.
    NumericalNoise,
}

impl RatioFlag {
    pub fn label(&self) -> &'static str {
        match self {
            RatioFlag::Defined => "defined",
            RatioFlag::Undefined => "undefined",
            RatioFlag::NumericalNoise => "numerical-noise",
        }
    }
}

/// One iterate and its monitors.
#[derive(Debug, Clone)]
pub struct IterationState {
    pub j: usize,
    pub m2: NormReport,
    /// `M_0(u_j - u_{j-1}, v_j - v_{j-1})`
    pub m0_diff: f64,
    pub rho: Option<f64>,
    pub flag: RatioFlag,
    /// `‖ψ^p Z^{≤2} F_p(v_{j-1})‖_{ℓ^{pα2}_1 L¹L¹L²} / ‖ψ Z^{≤2} v_{j-1}‖^p_{ℓ^{α2}_p L^pL^pL²}`, `j ≥ 1`.
    pub source_constant_p: Option<f64>,
    /// The same with `(q, α1)` and `u_{j-1}`.
    pub source_constant_q: Option<f64>,
    /// `(u_j, v_j)`, kept according to [`Retain`].
    pub fields: Option<(FieldTrajectory, FieldTrajectory)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Retain {
    All,
    Last,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StopReason {
    /// All requested iterates computed.
    Finished,
    /// `ρ_j > 1` for some `j ≥ 2`.
    NonContraction { j: usize },
    /// A linear solve failed or crossed the blow-up threshold.
    SolverFailure { j: usize },
}

impl StopReason {
    pub fn label(&self) -> &'static str {
        match self {
            StopReason::Finished => "finished",
            StopReason::NonContraction { .. } => "non-contraction",
            StopReason::SolverFailure { .. } => "solver-failure",
        }
    }
}

#[derive(Debug, Clone)]
pub struct PicardRun {
    pub states: Vec<IterationState>,
    pub stop: StopReason,
    pub solver_error: Option<Error>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PicardProblem {
    pub system: CoupledProblem,
    pub profile: ExponentProfile,
    pub grid: Grid,
    pub psi: CutoffPsi,
    pub window: (f64, f64),
}

impl PicardProblem {
    /// `ψ_R` with `R` twice the data support radius.
    pub fn default_cutoff(system: &CoupledProblem) -> Result<CutoffPsi> {
        let support = system.data_u.support_radius().max(system.data_v.support_radius());
        CutoffPsi::new(2.0 * support.max(0.5), 1.0)
    }
}

struct Iterate {
    u: FieldTrajectory,
    v: FieldTrajectory,
    hu: StageHistory,
    hv: StageHistory,
}

fn solve_pair(problem: &PicardProblem, prev: Option<&Iterate>) -> Result<Iterate> {
    let sys = &problem.system;
    let (ru, rv) = match prev {
        None => (
            evolve_linear_recorded(&sys.spec1, &NoSource, &sys.data_u, &problem.grid)?,
            evolve_linear_recorded(&sys.spec2, &NoSource, &sys.data_v, &problem.grid)?,
        ),
        Some(it) => (
            evolve_linear_recorded(&sys.spec1, &StageSource { history: &it.hv, nonlinearity: sys.fp }, &sys.data_u, &problem.grid)?,
            evolve_linear_recorded(&sys.spec2, &StageSource { history: &it.hu, nonlinearity: sys.fq }, &sys.data_v, &problem.grid)?,
        ),
    };
    match (ru, rv) {
        ((u, Some(hu)), (v, Some(hv))) => Ok(Iterate { u, v, hu, hv }),
        ((u, _), _) => Err(Error::Evaluation(format!(
            "iterate crossed the blow-up threshold at t = {}",
            u.blowup.unwrap_or(f64::NAN)
        ))),
    }
}

/// `ρ = Δ_j/Δ_{j-1}` with the zero-difference conventions of [`RatioFlag`].
pub fn ratio(prev: Option<f64>, current: f64) -> (Option<f64>, RatioFlag) {
    match prev {
        None => (None, RatioFlag::Undefined),
        Some(p) if p > 0.0 => (Some(current / p), RatioFlag::Defined),
        Some(_) if current == 0.0 => (None, RatioFlag::Undefined),
        Some(_) => (None, RatioFlag::NumericalNoise),
    }
}

/// Runs `J + 1` iterates `j = 0..=J`.
pub fn picard_run(problem: &PicardProblem, iterations: usize, retain: Retain) -> Result<PicardRun> {
    if problem.profile.region != Region::GlobalDirect {
        return Err(Error::Config(format!(
            "Picard iteration needs a directly admissible pair, ({}, {}) is {}",
            problem.profile.pair.p,
            problem.profile.pair.q,
            problem.profile.region.label()
        )));
    }
    let partition = DyadicPartition::covering(problem.grid.radial)?;
    let (p, q) = (problem.profile.pair.p, problem.profile.pair.q);
    let (wv, wu) = problem.profile.source_weights();
    let mut states: Vec<IterationState> = Vec::with_capacity(iterations + 1);
    let mut prev: Option<Iterate> = None;
    let mut stop = StopReason::Finished;
    let mut solver_error = None;
    for j in 0..=iterations {
        let it = match solve_pair(problem, prev.as_ref()) {
            Ok(it) => it,
            Err(e) => {
                stop = StopReason::SolverFailure { j };
                solver_error = Some(e);
                break;
            }
        };
        let m2 = norms::m_k(&it.u, &it.v, 2, &problem.profile, &problem.psi, problem.window, &partition)?;
        let m0_diff = match &prev {
            None => norms::m_k(&it.u, &it.v, 0, &problem.profile, &problem.psi, problem.window, &partition)?.total,
            Some(pr) => {
                let du = it.u.difference(&pr.u)?;
                let dv = it.v.difference(&pr.v)?;
                norms::m_k(&du, &dv, 0, &problem.profile, &problem.psi, problem.window, &partition)?.total
            }
        };
        let (rho, flag) = ratio(states.last().map(|s| s.m0_diff), m0_diff);
        let (mut cp, mut cq) = (None, None);
        if let (Some(pr), Some(last)) = (&prev, states.last()) {
            let fv = norms::nonlinear_image(&pr.v, &problem.system.fp);
            let fu = norms::nonlinear_image(&pr.u, &problem.system.fq);
            let src_p = norms::weighted_source_norm(&fv, &partition, 2, wv, &problem.psi.with_power(p), problem.window)?;
            let src_q = norms::weighted_source_norm(&fu, &partition, 2, wu, &problem.psi.with_power(q), problem.window)?;
            let sv = crate::math::powf(last.m2.strichartz_v, p);
            let su = crate::math::powf(last.m2.strichartz_u, q);
            cp = (sv > 0.0).then(|| src_p / sv);
            cq = (su > 0.0).then(|| src_q / su);
        }
        if retain == Retain::Last {
            if let Some(last) = states.last_mut() {
                last.fields = None;
            }
        }
        states.push(IterationState {
            j,
            m2,
            m0_diff,
            rho,
            flag,
            source_constant_p: cp,
            source_constant_q: cq,
            fields: Some((it.u.clone(), it.v.clone())),
        });
        prev = Some(it);
        if j >= FIRST_JUDGED && rho.is_some_and(|r| r > 1.0) {
            stop = StopReason::NonContraction { j };
            break;
        }
    }
    Ok(PicardRun { states, stop, solver_error })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Contracting,
    NotContracting,
    /// Fewer than three iterates.
    Insufficient,
}

impl Verdict {
    pub fn label(&self) -> &'static str {
        match self {
            Verdict::Contracting => "contracting",
            Verdict::NotContracting => "not-contracting",
            Verdict::Insufficient => "insufficient",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContractionReport {
    pub ratios: Vec<(Option<f64>, RatioFlag)>,
    pub verdict: Verdict,
}

/// Ratios of successive differences and the contraction verdict:
/// `ρ_j ≤ 0.55` for every `j ≥ 2`. Exactly repeated iterates
/// (`Δ_j = Δ_{j-1} = 0`) count as contracting, noise after an exact zero does not.
pub fn contraction_ratio(diffs: &[f64]) -> ContractionReport {
    let mut ratios = Vec::with_capacity(diffs.len());
    let mut prev = None;
    for &d in diffs {
        ratios.push(ratio(prev, d));
        prev = Some(d);
    }
    let verdict = if diffs.len() < 3 {
        Verdict::Insufficient
    } else if ratios.iter().skip(FIRST_JUDGED).all(|(r, flag)| match flag {
        RatioFlag::Defined => r.is_some_and(|r| r <= CONTRACTION_LIMIT),
        RatioFlag::Undefined => true,
        RatioFlag::NumericalNoise => false,
    }) {
        Verdict::Contracting
    } else {
        Verdict::NotContracting
    };
    ContractionReport { ratios, verdict }
}

impl PicardRun {
    pub fn contraction(&self) -> ContractionReport {
        let diffs: Vec<f64> = self.states.iter().map(|s| s.m0_diff).collect();
        contraction_ratio(&diffs)
    }

    /// `sup_j M_2(u_j, v_j) / M_2(u_0, v_0)`.
    pub fn boundedness_ratio(&self) -> Option<f64> {
        let first = self.states.first()?.m2.total;
        if first == 0.0 {
            return None;
        }
        Some(self.states.iter().map(|s| s.m2.total).fold(0.0, f64::max) / first)
    }

    pub fn last_fields(&self) -> Option<&(FieldTrajectory, FieldTrajectory)> {
        self.states.last()?.fields.as_ref()
    }
}

/// `sup |u_J - u| + sup |v_J - v|` over the stored slices in `window`.
pub fn compare_to_direct(
    iterate: &(FieldTrajectory, FieldTrajectory),
    direct: &(FieldTrajectory, FieldTrajectory),
    window: (f64, f64),
) -> Result<f64> {
    let mut gap = 0.0;
    for (a, b) in [(&iterate.0, &direct.0), (&iterate.1, &direct.1)] {
        if a.grid != b.grid || a.times != b.times {
            return Err(Error::Config("iterate and direct run use different grids".into()));
        }
        let range = a.window(window.0, window.1)?;
        let mut sup: f64 = 0.0;
        for k in range {
            let d: Vec<f64> = a.u[k].iter().zip(&b.u[k]).map(|(x, y)| x - y).collect();
            sup = sup.max(sup_abs(&d));
        }
        gap += sup;
    }
    Ok(gap)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::backgrounds::BackgroundSpec;
    use crate::exponents::ExponentPair;
    use crate::solver::{evolve_coupled, InitialData, Nonlinearity, RadialFunction};
    use std::vec;

    fn problem(eps: f64, t: f64) -> PicardProblem {
        let data = InitialData::new(RadialFunction::Gaussian { amp: eps, center: 0.0, width: 1.0 }, RadialFunction::Zero);
        let system = CoupledProblem {
            spec1: BackgroundSpec::minkowski(),
            spec2: BackgroundSpec::minkowski(),
            fp: Nonlinearity::absolute(2.5),
            fq: Nonlinearity::absolute(3.0),
            data_u: data,
            data_v: data,
        };
        let grid = Grid::new(6.0 + t + 1.0, 8 * (7 + t as usize), 0.5, t).unwrap();
        PicardProblem {
            psi: PicardProblem::default_cutoff(&system).unwrap(),
            system,
            profile: ExponentProfile::new(ExponentPair::new(2.5, 3.0).unwrap()).unwrap(),
            grid,
            window: (0.0, t),
        }
    }

    #[test]
    fn toy_sequences() {
        let geometric: Vec<f64> = (0..6).map(|j| 2f64.powi(-j)).collect();
        let r = contraction_ratio(&geometric);
        assert_eq!(r.verdict, Verdict::Contracting);
        assert!(r.ratios.iter().skip(1).all(|(x, _)| (x.unwrap() - 0.5).abs() < 1e-15));
        let constant = vec![1.0; 6];
        let r = contraction_ratio(&constant);
        assert_eq!(r.verdict, Verdict::NotContracting);
        assert!(r.ratios.iter().skip(1).all(|(x, _)| x.unwrap() == 1.0));
        assert_eq!(contraction_ratio(&[1.0, 0.5]).verdict, Verdict::Insufficient);
        assert_eq!(contraction_ratio(&[1.0, 0.0, 1e-17]).verdict, Verdict::NotContracting);
    }

    #[test]
    fn zero_data_iterates_vanish() {
        let mut pr = problem(0.0, 4.0);
        pr.psi = CutoffPsi::new(4.0, 1.0).unwrap();
        let run = picard_run(&pr, 3, Retain::All).unwrap();
        assert_eq!(run.states.len(), 4);
        for s in &run.states {
            assert_eq!(s.m2.total, 0.0);
            assert_eq!(s.rho, None);
            assert_eq!(s.flag, RatioFlag::Undefined);
            let (u, v) = s.fields.as_ref().unwrap();
            assert!(u.u.iter().chain(&v.u).all(|x| x.iter().all(|&y| y == 0.0)));
        }
    }

    #[test]
    fn zero_data_gap_vanishes() {
        let mut pr = problem(0.0, 3.0);
        pr.psi = CutoffPsi::new(4.0, 1.0).unwrap();
        let run = picard_run(&pr, 2, Retain::Last).unwrap();
        let (du, dv, _) = evolve_coupled(&pr.system, &pr.grid).unwrap();
        assert_eq!(compare_to_direct(run.last_fields().unwrap(), &(du, dv), pr.window).unwrap(), 0.0);
    }

    #[test]
    fn first_iterate_scales_linearly() {
        let a = picard_run(&problem(1e-3, 3.0), 0, Retain::Last).unwrap();
        let b = picard_run(&problem(2e-3, 3.0), 0, Retain::Last).unwrap();
        let ratio = b.states[0].m2.total / a.states[0].m2.total;
        assert!((ratio - 2.0).abs() < 1e-12, "{ratio}");
    }

    #[test]
    fn inadmissible_pair_rejected() {
        let mut pr = problem(1e-3, 2.0);
        pr.profile = ExponentProfile::new(ExponentPair::new(2.1, 2.1).unwrap()).unwrap();
        assert!(matches!(picard_run(&pr, 2, Retain::Last), Err(Error::Config(_))));
    }

    #[test]
    fn small_data_contracts_and_approaches_direct_solution() {
        let pr = problem(0.05, 6.0);
        let run = picard_run(&pr, 5, Retain::All).unwrap();
        assert_eq!(run.stop, StopReason::Finished);
        assert_eq!(run.contraction().verdict, Verdict::Contracting);
        assert!(run.boundedness_ratio().unwrap() <= 4.0);
        let (du, dv, _) = evolve_coupled(&pr.system, &pr.grid).unwrap();
        let direct = (du, dv);
        let gaps: Vec<f64> =
            run.states.iter().map(|s| compare_to_direct(s.fields.as_ref().unwrap(), &direct, pr.window).unwrap()).collect();
        for w in gaps.windows(2) {
            assert!(w[1] <= w[0]);
        }
        assert!(*gaps.last().unwrap() < 1e-12, "{gaps:?}");
        // source constants are defined from j = 1 on
        assert!(run.states[0].source_constant_p.is_none());
        assert!(run.states[1].source_constant_p.unwrap() > 0.0 && run.states[1].source_constant_q.unwrap() > 0.0);
    }

    #[test]
    fn large_data_does_not_contract() {
        let pr = problem(10.0, 4.0);
        let run = picard_run(&pr, 6, Retain::Last).unwrap();
        let failed = matches!(run.stop, StopReason::NonContraction { .. } | StopReason::SolverFailure { .. });
        assert!(failed, "{:?}", run.stop);
        assert_ne!(run.contraction().verdict, Verdict::Contracting);
    }

    #[test]
    fn retain_last_keeps_only_final_fields() {
        let run = picard_run(&problem(1e-3, 2.0), 2, Retain::Last).unwrap();
        assert!(run.states[..2].iter().all(|s| s.fields.is_none()));
        assert!(run.last_fields().is_some());
    }

    #[test]
    fn grid_mismatch_rejected() {
        let a = picard_run(&problem(1e-3, 2.0), 0, Retain::Last).unwrap();
        let b = picard_run(&problem(1e-3, 3.0), 0, Retain::Last).unwrap();
        assert!(matches!(
            compare_to_direct(a.last_fields().unwrap(), b.last_fields().unwrap(), (0.0, 1.0)),
            Err(Error::Config(_))
        ));
    }
}
