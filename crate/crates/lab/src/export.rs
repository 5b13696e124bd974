//! Comma-separated exports. Floats use Rust's shortest round-trip form.

use coupled_wave_core::backgrounds::HypothesisReport;
use coupled_wave_core::iteration::{IterationState, PicardRun};
use coupled_wave_core::norms::NormReport;
use coupled_wave_core::solver::{linear_energy, FieldTrajectory};

use crate::error::Result;
use crate::record::ExportFile;
use crate::run::{MapCell, SweepRow};

/// Time slices per trajectory chunk.
pub const CHUNK_SLICES: usize = 64;

pub fn num(x: f64) -> String {
    format!("{x:?}")
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

fn table<I, R>(name: impl Into<String>, header: &[&str], rows: I) -> Result<ExportFile>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator<Item = String>,
{
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for row in rows {
        w.write_record(row.into_iter().collect::<Vec<_>>())?;
    }
    let bytes = w.into_inner().map_err(|e| csv::Error::from(e.into_error()))?;
    Ok(ExportFile { name: name.into(), bytes })
}

pub fn region_map(cells: &[MapCell]) -> Result<ExportFile> {
    let header = [
        "p", "q", "region", "c", "s1", "s2", "alpha1", "alpha2", "cond_p", "cond_q", "reduced_lo", "reduced_hi",
    ];
    table(
        "region_map.csv",
        &header,
        cells.iter().map(|c| {
            let (lo, hi) = c.reduced.unzip();
            vec![
                num(c.p),
                num(c.q),
                c.region.label().to_string(),
                num(c.c),
                num(c.indices.s1),
                num(c.indices.s2),
                num(c.indices.alpha1),
                num(c.indices.alpha2),
                c.conditions.0.to_string(),
                c.conditions.1.to_string(),
                opt(lo),
                opt(hi),
            ]
        }),
    )
}

/// `trajectory/chunk_NNNN.csv` files with columns `t, r, u, u_t, v, v_t`.
pub fn trajectory_chunks(u: &FieldTrajectory, v: &FieldTrajectory) -> Result<Vec<ExportFile>> {
    let radii = u.radial().radii();
    let n = u.len().min(v.len());
    let mut files = Vec::new();
    for (c, start) in (0..n).step_by(CHUNK_SLICES).enumerate() {
        let end = (start + CHUNK_SLICES).min(n);
        let rows = (start..end).flat_map(|k| {
            radii.iter().enumerate().map(move |(i, &r)| {
                vec![num(u.times[k]), num(r), num(u.u[k][i]), num(u.u_t[k][i]), num(v.u[k][i]), num(v.u_t[k][i])]
            })
        });
        files.push(table(format!("trajectory/chunk_{c:04}.csv"), &["t", "r", "u", "u_t", "v", "v_t"], rows)?);
    }
    Ok(files)
}

/// Linear energies of both fields per stored slice.
pub fn energies(u: &FieldTrajectory, v: &FieldTrajectory) -> Result<ExportFile> {
    let grid = u.radial();
    let n = u.len().min(v.len());
    table(
        "energy.csv",
        &["t", "energy_u", "energy_v"],
        (0..n).map(|k| {
            vec![
                num(u.times[k]),
                num(linear_energy(grid, &u.u[k], &u.u_t[k])),
                num(linear_energy(grid, &v.u[k], &v.u_t[k])),
            ]
        }),
    )
}

fn norm_rows(tag: &str, report: &NormReport) -> Vec<Vec<String>> {
    report
        .rows()
        .into_iter()
        .map(|r| {
            vec![
                tag.to_string(),
                r.term,
                r.k.to_string(),
                num(r.weight),
                num(r.exponent),
                num(r.value),
                num(r.window.0),
                num(r.window.1),
            ]
        })
        .collect()
}

const NORM_HEADER: [&str; 8] = ["tag", "term", "k", "weight", "exponent", "value", "t0", "t1"];

pub fn norm_table(reports: &[(String, NormReport)]) -> Result<ExportFile> {
    table("norms.csv", &NORM_HEADER, reports.iter().flat_map(|(tag, r)| norm_rows(tag, r)))
}

/// Per-iterate ledger rows `(j, M2, M0_diff, rho, outcome)` plus the
/// measured source constants.
pub fn picard_ledger(run: &PicardRun) -> Result<ExportFile> {
    let last = run.states.len().saturating_sub(1);
    let header =
        ["j", "m2", "m0_diff", "rho", "rho_flag", "outcome", "source_constant_p", "source_constant_q"];
    table(
        "ledger.csv",
        &header,
        run.states.iter().enumerate().map(|(i, s): (usize, &IterationState)| {
            let outcome = if i == last { run.stop.label() } else { "continue" };
            vec![
                s.j.to_string(),
                num(s.m2.total),
                num(s.m0_diff),
                opt(s.rho),
                s.flag.label().to_string(),
                outcome.to_string(),
                opt(s.source_constant_p),
                opt(s.source_constant_q),
            ]
        }),
    )
}

pub fn picard_norms(run: &PicardRun) -> Result<ExportFile> {
    let reports: Vec<(String, NormReport)> = run.states.iter().map(|s| (format!("j={}", s.j), s.m2.clone())).collect();
    norm_table(&reports)
}

pub fn hypotheses(reports: &[(String, HypothesisReport)]) -> Result<ExportFile> {
    let header = ["operator", "background", "component", "order", "s_index", "norm_at_j", "norm_at_2j", "pass"];
    table(
        "hypotheses.csv",
        &header,
        reports.iter().flat_map(|(op, rep)| {
            rep.rows.iter().map(move |r| {
                vec![
                    op.clone(),
                    rep.background.clone(),
                    r.component.clone(),
                    r.order.to_string(),
                    num(r.s_index),
                    num(r.norm_at_j),
                    num(r.norm_at_2j),
                    r.pass.to_string(),
                ]
            })
        }),
    )
}

pub fn sweep_summary(rows: &[SweepRow]) -> Result<ExportFile> {
    let header =
        ["index", "p", "q", "amplitude", "region", "status", "t_star", "peak_amplitude", "final_energy", "digest"];
    table(
        "summary.csv",
        &header,
        rows.iter().map(|r| {
            vec![
                r.index.to_string(),
                num(r.p),
                num(r.q),
                num(r.amplitude),
                r.region.clone(),
                r.status.clone(),
                opt(r.t_star),
                opt(r.peak_amplitude),
                opt(r.final_energy),
                r.digest.clone(),
            ]
        }),
    )
}

pub fn le_table(rows: &[(String, usize, f64)]) -> Result<ExportFile> {
    table(
        "localized_energy.csv",
        &["field", "mu_max", "le_ratio"],
        rows.iter().map(|(f, mu, x)| vec![f.clone(), mu.to_string(), num(*x)]),
    )
}
