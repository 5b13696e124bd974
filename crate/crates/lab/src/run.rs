//! Mode execution. Every mode computes in memory and returns a
//! [`RunOutput`]; persisting it is a separate step.

use std::time::Instant;

use coupled_wave_core::backgrounds::{verify_hypotheses, HypothesisOptions};
use coupled_wave_core::exponents::{
    classify, conditions, derived_indices, reduction_interval, strauss_c, ExponentPair, Indices, Region,
};
use coupled_wave_core::iteration::{picard_run, PicardProblem, Retain, StopReason};
use coupled_wave_core::norms::{self, CutoffPsi, DyadicPartition};
use coupled_wave_core::solver::{evolve_coupled, RunStatus};
use coupled_wave_core::Error as CoreError;
use rayon::prelude::*;

use crate::config::{ClassifyConfig, Mode, RunConfig};
use crate::error::{LabError, Result};
use crate::export::{self, num};
use crate::record::{config_digest, RunOutput, RunRecord, TOOL_VERSION};

/// One node of the region map.
#[derive(Debug, Clone, PartialEq)]
pub struct MapCell {
    pub p: f64,
    pub q: f64,
    pub region: Region,
    pub c: f64,
    pub indices: Indices,
    pub conditions: (bool, bool),
    /// Admissible reduced-exponent interval, for reducible pairs.
    pub reduced: Option<(f64, f64)>,
}

pub fn axis(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

/// Row-major (`p` outer) classification grid. Nodes on the singular curve
/// `pq = 1` are skipped.
pub fn classify_map(c: &ClassifyConfig) -> Vec<MapCell> {
    let ps = axis(c.p_min, c.p_max, c.resolution);
    let qs = axis(c.q_min, c.q_max, c.resolution);
    let mut cells = Vec::with_capacity(ps.len() * qs.len());
    for &p in &ps {
        for &q in &qs {
            let Ok(pair) = ExponentPair::new(p, q) else { continue };
            let (Ok(cv), Ok(indices)) = (strauss_c(pair), derived_indices(pair)) else { continue };
            let region = classify(pair);
            let reduced = if region == Region::GlobalAfterReduction { reduction_interval(pair).ok() } else { None };
            cells.push(MapCell { p, q, region, c: cv, indices, conditions: conditions(pair), reduced });
        }
    }
    cells
}

/// One cell of a sweep summary.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub index: usize,
    pub p: f64,
    pub q: f64,
    pub amplitude: f64,
    pub region: String,
    pub status: String,
    pub t_star: Option<f64>,
    pub peak_amplitude: Option<f64>,
    pub final_energy: Option<f64>,
    pub digest: String,
}

fn status_of(err: &CoreError) -> &'static str {
    match err {
        CoreError::CflViolation { .. } => RunStatus::CflViolation.label(),
        _ => RunStatus::EvaluationError.label(),
    }
}

fn kv(k: &str, v: impl Into<String>) -> (String, String) {
    (k.to_string(), v.into())
}

/// Validates and runs `config`. `jobs` bounds sweep concurrency.
pub fn execute(config: &RunConfig, jobs: usize) -> Result<RunOutput> {
    config.validate().map_err(LabError::Invalid)?;
    let start = Instant::now();
    let digest = config_digest(config)?;
    let (outcome, summary, files) = match config.mode {
        Mode::Classify => run_classify(config)?,
        Mode::Simulate => run_simulate(config)?,
        Mode::Picard => run_picard(config)?,
        Mode::Norms => run_norms(config)?,
        Mode::VerifyBackground => run_verify(config)?,
        Mode::Sweep => run_sweep(config, jobs)?,
    };
    Ok(RunOutput {
        record: RunRecord {
            digest,
            mode: config.mode,
            outcome,
            summary,
            wall_time: start.elapsed(),
            tool_version: TOOL_VERSION,
        },
        config: config.clone(),
        files,
    })
}

type ModeResult = Result<(String, Vec<(String, String)>, Vec<crate::record::ExportFile>)>;

fn run_classify(config: &RunConfig) -> ModeResult {
    let cells = classify_map(&config.classify);
    let mut counts: Vec<(Region, usize)> = Vec::new();
    for c in &cells {
        match counts.iter_mut().find(|(r, _)| *r == c.region) {
            Some(e) => e.1 += 1,
            None => counts.push((c.region, 1)),
        }
    }
    counts.sort();
    let mut summary = vec![kv("cells", cells.len().to_string())];
    summary.extend(counts.iter().map(|(r, n)| kv(r.label(), n.to_string())));
    Ok(("ok".into(), summary, vec![export::region_map(&cells)?]))
}

fn run_simulate(config: &RunConfig) -> ModeResult {
    let (u, v, outcome) = evolve_coupled(&config.coupled_problem()?, &config.solver_grid()?)?;
    let mut summary = vec![
        kv("slices", u.len().to_string()),
        kv("final_time", num(u.final_time())),
        kv("peak_amplitude", num(outcome.peak_amplitude)),
        kv("final_energy", num(outcome.final_energy)),
    ];
    if let RunStatus::BlowUpDetected { t_star } = outcome.status {
        summary.push(kv("t_star", num(t_star)));
    }
    let mut files = export::trajectory_chunks(&u, &v)?;
    files.push(export::energies(&u, &v)?);
    Ok((outcome.status.label().into(), summary, files))
}

fn cutoff(config: &RunConfig, problem: &coupled_wave_core::solver::CoupledProblem) -> Result<CutoffPsi> {
    Ok(match config.picard.cutoff_radius {
        Some(r) => CutoffPsi::new(r, 1.0)?,
        None => PicardProblem::default_cutoff(problem)?,
    })
}

fn run_picard(config: &RunConfig) -> ModeResult {
    let system = config.coupled_problem()?;
    let grid = config.solver_grid()?;
    let problem = PicardProblem {
        psi: cutoff(config, &system)?,
        system,
        profile: config.profile()?,
        grid,
        window: (0.0, grid.t_final),
    };
    let run = picard_run(&problem, config.picard.j_max, Retain::Last)?;
    let verdict = run.contraction().verdict;
    let mut summary = vec![
        kv("iterates", run.states.len().to_string()),
        kv("stop", run.stop.label()),
        kv("cutoff_radius", num(problem.psi.radius)),
    ];
    if let StopReason::NonContraction { j } | StopReason::SolverFailure { j } = run.stop {
        summary.push(kv("stop_j", j.to_string()));
    }
    if let Some(e) = &run.solver_error {
        summary.push(kv("solver_error", e.to_string()));
    }
    if let Some(b) = run.boundedness_ratio() {
        summary.push(kv("boundedness_ratio", num(b)));
    }
    let files = vec![export::picard_ledger(&run)?, export::picard_norms(&run)?];
    Ok((verdict.label().into(), summary, files))
}

fn run_norms(config: &RunConfig) -> ModeResult {
    let system = config.coupled_problem()?;
    let grid = config.solver_grid()?;
    let profile = config.profile()?;
    let psi = cutoff(config, &system)?;
    let (u, v, outcome) = evolve_coupled(&system, &grid)?;
    let window = (0.0, u.final_time());
    let partition = DyadicPartition::covering(grid.radial)?;
    let mut reports = Vec::new();
    for k in 0..=2 {
        reports.push((format!("M{k}"), norms::m_k(&u, &v, k, &profile, &psi, window, &partition)?));
    }
    let chi = CutoffPsi::new(1.0, 1.0)?;
    let mut le = Vec::new();
    for (name, field, other, nl) in [("u", &u, &v, &system.fp), ("v", &v, &u, &system.fq)] {
        for mu in 0..=2 {
            let src = norms::source_energy_norm(&norms::nonlinear_image(other, nl), mu, window)?;
            le.push((name.to_string(), mu, norms::le_ratio(field, &partition, mu, &chi, window, src)?));
        }
    }
    let summary = vec![
        kv("status", outcome.status.label()),
        kv("m0", num(reports[0].1.total)),
        kv("m2", num(reports[2].1.total)),
    ];
    let files = vec![export::norm_table(&reports)?, export::le_table(&le)?];
    Ok((outcome.status.label().into(), summary, files))
}

fn run_verify(config: &RunConfig) -> ModeResult {
    let (s1, s2) = config.backgrounds()?;
    let opts = HypothesisOptions::default();
    let reports = vec![
        ("operator1".to_string(), verify_hypotheses(&s1, config.verify.j_max, &opts)?),
        ("operator2".to_string(), verify_hypotheses(&s2, config.verify.j_max, &opts)?),
    ];
    let pass = reports.iter().all(|(_, r)| r.pass());
    let max_norm = reports.iter().flat_map(|(_, r)| &r.rows).map(|r| r.norm_at_j.max(r.norm_at_2j)).fold(0.0, f64::max);
    let summary = vec![kv("rows", reports.iter().map(|(_, r)| r.rows.len()).sum::<usize>().to_string()), kv("max_norm", num(max_norm))];
    Ok(((if pass { "pass" } else { "fail" }).into(), summary, vec![export::hypotheses(&reports)?]))
}

fn sweep_cell(index: usize, cell: &RunConfig) -> Result<SweepRow> {
    let pair = cell.pair()?;
    let base = SweepRow {
        index,
        p: pair.p,
        q: pair.q,
        amplitude: cell.data.amplitude,
        region: classify(pair).label().into(),
        status: String::new(),
        t_star: None,
        peak_amplitude: None,
        final_energy: None,
        digest: config_digest(cell)?,
    };
    let result = cell.coupled_problem().and_then(|p| Ok((p, cell.solver_grid()?))).and_then(|(p, g)| evolve_coupled(&p, &g));
    Ok(match result {
        Ok((_, _, o)) => SweepRow {
            status: o.status.label().into(),
            t_star: match o.status {
                RunStatus::BlowUpDetected { t_star } => Some(t_star),
                _ => None,
            },
            peak_amplitude: Some(o.peak_amplitude),
            final_energy: Some(o.final_energy),
            ..base
        },
        Err(e) => SweepRow { status: status_of(&e).into(), ..base },
    })
}

/// Sweep cells in index order (`p` outermost, then `q`, then amplitude).
pub fn sweep_cells(config: &RunConfig) -> Vec<RunConfig> {
    let sw = &config.sweep;
    let mut cells = Vec::with_capacity(sw.len());
    for &p in &sw.p {
        for &q in &sw.q {
            for &a in &sw.amplitude {
                cells.push(config.sweep_cell(p, q, a));
            }
        }
    }
    cells
}

fn run_sweep(config: &RunConfig, jobs: usize) -> ModeResult {
    let cells = sweep_cells(config);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| LabError::Invalid(vec![format!("cannot start {jobs} workers: {e}")]))?;
    // collect() on an indexed parallel iterator keeps index order
    let rows: Vec<SweepRow> =
        pool.install(|| cells.par_iter().enumerate().map(|(i, c)| sweep_cell(i, c)).collect::<Result<_>>())?;
    let mut counts: Vec<(String, usize)> = Vec::new();
    for r in &rows {
        match counts.iter_mut().find(|(s, _)| *s == r.status) {
            Some(e) => e.1 += 1,
            None => counts.push((r.status.clone(), 1)),
        }
    }
    counts.sort();
    let mut summary = vec![kv("runs", rows.len().to_string())];
    summary.extend(counts.into_iter().map(|(s, n)| (s, n.to_string())));
    Ok(("ok".into(), summary, vec![export::sweep_summary(&rows)?]))
}
