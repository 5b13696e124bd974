//! Method-of-lines evolution of `P u = S` and of the coupled system
//! `P1 u = F_p(v)`, `P2 v = F_q(u)` for radial fields.
//!
//! Space: the conservative radial stencil of [`RadialOperator`], Dirichlet at
//! `R_max`. Time: classical RK4 at fixed step.

pub mod data;
pub mod exact;

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::backgrounds::{BackgroundSpec, RadialOperator};
use crate::error::{Error, Result};
use crate::grid::RadialGrid;
use crate::math::{abs, ceil, linspace, powf};

pub use data::{data_norm, InitialData, RadialFunction};
pub use exact::exact_flat_radial_solution;

/// Default threshold for [`detect_blowup`].
pub const BLOWUP_THRESHOLD: f64 = 1e8;
/// Largest admissible `c_max · Δt/Δr` for the RK4 scheme.
pub const CFL_MAX: f64 = 1.0;

/// Space-time discretization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub radial: RadialGrid,
    pub cfl: f64,
    pub t_final: f64,
    /// Keep every `stride`-th step in the trajectory (the final step is always kept).
    pub stride: usize,
}

impl Grid {
    pub fn new(r_max: f64, n_r: usize, cfl: f64, t_final: f64) -> Result<Self> {
        let radial = RadialGrid::new(r_max, n_r)?;
        if !(cfl > 0.0) || !cfl.is_finite() {
            return Err(Error::Grid(format!("cfl must be positive, got {cfl}")));
        }
        if !(t_final >= 0.0) || !t_final.is_finite() {
            return Err(Error::Grid(format!("T must be non-negative, got {t_final}")));
        }
        Ok(Self { radial, cfl, t_final, stride: 1 })
    }

    pub fn with_stride(mut self, stride: usize) -> Self {
        self.stride = stride.max(1);
        self
    }

    pub fn dr(&self) -> f64 {
        self.radial.dr()
    }

    pub fn n_steps(&self) -> usize {
        if self.t_final == 0.0 {
            0
        } else {
            ceil(self.t_final / (self.cfl * self.dr())) as usize
        }
    }

    /// `T / n_steps`, never larger than `cfl · Δr`.
    pub fn dt(&self) -> f64 {
        match self.n_steps() {
            0 => 0.0,
            n => self.t_final / n as f64,
        }
    }

    /// Smallest `R_max` that keeps data supported in `r ≤ support` away from the
    /// outer boundary up to time `T`.
    pub fn required_radius(&self, support: f64, c_max: f64) -> f64 {
        support + c_max * self.t_final + 2.0 * self.dr()
    }

    /// Checks the stability and sizing rules for `spec` with data supported in `r ≤ support`.
    pub fn validate(&self, spec: &BackgroundSpec, support: f64) -> Result<f64> {
        let times = if spec.is_static() { vec![0.0] } else { linspace(0.0, self.t_final, 9) };
        let c_max = spec.max_speed(&self.radial, &times)?;
        let limit = CFL_MAX / c_max;
        if self.cfl > limit {
            return Err(Error::CflViolation { cfl: self.cfl, limit });
        }
        let need = self.required_radius(support, c_max);
        if self.radial.r_max < need {
            return Err(Error::Grid(format!(
                "R_max = {} is below the finite-propagation bound {need}",
                self.radial.r_max
            )));
        }
        Ok(c_max)
    }
}

/// Form of the power nonlinearity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NonlinearityForm {
    /// `|u|^p`
    Absolute,
    /// `|u|^{p-1} u`
    Signed,
}

impl NonlinearityForm {
    pub fn label(self) -> &'static str {
        match self {
            NonlinearityForm::Absolute => "absolute",
            NonlinearityForm::Signed => "signed",
        }
    }

    pub fn from_label(s: &str) -> Option<Self> {
        match s {
            "absolute" => Some(NonlinearityForm::Absolute),
            "signed" => Some(NonlinearityForm::Signed),
            _ => None,
        }
    }
}

/// Power nonlinearity entering as `P u = F(v)`.
///
/// With `P = -d_t^2 + Δ` in the flat case, `F(v) = -|v|^p` is `□u = |v|^p`;
/// the signed form `-|v|^{p-1} v` is the focusing counterpart.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Nonlinearity {
    pub power: f64,
    pub form: NonlinearityForm,
}

impl Nonlinearity {
    pub fn new(power: f64, form: NonlinearityForm) -> Result<Self> {
        if !(power >= 2.0) || !power.is_finite() {
            return Err(Error::Config(format!("nonlinearity power must be ≥ 2, got {power}")));
        }
        Ok(Self { power, form })
    }

    pub fn absolute(power: f64) -> Self {
        Self { power, form: NonlinearityForm::Absolute }
    }

    pub fn signed(power: f64) -> Self {
        Self { power, form: NonlinearityForm::Signed }
    }

    #[inline]
    pub fn eval(&self, u: f64) -> f64 {
        let a = powf(abs(u), self.power);
        match self.form {
            NonlinearityForm::Absolute => -a,
            NonlinearityForm::Signed => {
                if u < 0.0 {
                    a
                } else {
                    -a
                }
            }
        }
    }

    /// `F^{(j)}(u)` for `j ≤ 2`.
    pub fn derivative(&self, u: f64, j: usize) -> f64 {
        let p = self.power;
        let sign = if u < 0.0 { -1.0 } else { 1.0 };
        match (j, self.form) {
            (0, _) => self.eval(u),
            (1, NonlinearityForm::Absolute) => -p * powf(abs(u), p - 1.0) * sign,
            (1, NonlinearityForm::Signed) => -p * powf(abs(u), p - 1.0),
            (2, NonlinearityForm::Absolute) => -p * (p - 1.0) * powf(abs(u), p - 2.0),
            (2, NonlinearityForm::Signed) => -p * (p - 1.0) * powf(abs(u), p - 2.0) * sign,
            _ => f64::NAN,
        }
    }

    /// `K` with `Σ_{j≤2} |u|^j |F^{(j)}(u)| ≤ K |u|^p`.
    pub fn bound_constant(&self) -> f64 {
        1.0 + self.power + self.power * self.power
    }

    pub fn apply(&self, u: &[f64], out: &mut [f64]) {
        for (o, &x) in out.iter_mut().zip(u) {
            *o = self.eval(x);
        }
    }
}

/// `u` values at every RK4 stage input of an evolution, used as the exact
/// source record for a later linear solve on the same grid.
#[derive(Debug, Clone, PartialEq)]
pub struct StageHistory {
    len: usize,
    n_steps: usize,
    values: Vec<f64>,
}

impl StageHistory {
    fn with_capacity(len: usize, n_steps: usize) -> Self {
        Self { len, n_steps, values: Vec::with_capacity(len * 4 * n_steps) }
    }

    pub fn stage(&self, step: usize, stage: usize) -> &[f64] {
        let k = (step * 4 + stage) * self.len;
        &self.values[k..k + self.len]
    }

    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    fn complete(&self) -> bool {
        self.values.len() == self.len * 4 * self.n_steps
    }
}

/// Right-hand side `S` of `P u = S`, evaluated at each RK4 stage.
pub trait Source {
    /// Fills `out` (one value per node) for stage `stage ∈ 0..4` of step `step`, at time `t`.
    fn fill(&self, step: usize, stage: usize, t: f64, grid: &RadialGrid, out: &mut [f64]);

    fn check(&self, _grid: &Grid) -> Result<()> {
        Ok(())
    }

    fn is_zero(&self) -> bool {
        false
    }
}

pub struct NoSource;

impl Source for NoSource {
    fn fill(&self, _: usize, _: usize, _: f64, _: &RadialGrid, out: &mut [f64]) {
        out.fill(0.0);
    }

    fn is_zero(&self) -> bool {
        true
    }
}

/// A source given as a function of `(t, r)`.
pub struct FnSource<F: Fn(f64, f64) -> f64>(pub F);

impl<F: Fn(f64, f64) -> f64> Source for FnSource<F> {
    fn fill(&self, _: usize, _: usize, t: f64, grid: &RadialGrid, out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate() {
            *o = (self.0)(t, grid.r(i));
        }
    }
}

/// `F(w)` for a recorded field `w`, stage by stage.
pub struct StageSource<'a> {
    pub history: &'a StageHistory,
    pub nonlinearity: Nonlinearity,
}

impl Source for StageSource<'_> {
    fn fill(&self, step: usize, stage: usize, _: f64, _: &RadialGrid, out: &mut [f64]) {
        self.nonlinearity.apply(self.history.stage(step, stage), out);
    }

    fn check(&self, grid: &Grid) -> Result<()> {
        if self.history.len != grid.radial.len() || self.history.n_steps != grid.n_steps() || !self.history.complete() {
            return Err(Error::Config("stage history does not match the grid".into()));
        }
        Ok(())
    }
}

/// Stored `(u, u_t)` slices of one field.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldTrajectory {
    pub grid: Grid,
    pub background: String,
    pub times: Vec<f64>,
    pub u: Vec<Vec<f64>>,
    pub u_t: Vec<Vec<f64>>,
    /// First time at which the field crossed the blow-up threshold.
    pub blowup: Option<f64>,
}

impl FieldTrajectory {
    fn new(grid: Grid, background: &str) -> Self {
        Self { grid, background: background.into(), times: Vec::new(), u: Vec::new(), u_t: Vec::new(), blowup: None }
    }

    pub fn radial(&self) -> &RadialGrid {
        &self.grid.radial
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn final_time(&self) -> f64 {
        self.times.last().copied().unwrap_or(0.0)
    }

    /// `sup |u|` over stored slices with `t ≥ t0`.
    pub fn sup_after(&self, t0: f64) -> f64 {
        self.times
            .iter()
            .zip(&self.u)
            .filter(|(t, _)| **t >= t0)
            .map(|(_, u)| sup_abs(u))
            .fold(0.0, f64::max)
    }

    pub fn energy(&self, k: usize) -> f64 {
        linear_energy(&self.grid.radial, &self.u[k], &self.u_t[k])
    }

    /// Indices of the slices inside `[t0, t1]`.
    pub fn window(&self, t0: f64, t1: f64) -> Result<core::ops::Range<usize>> {
        let end = self.final_time();
        let tol = 1e-9 * end.max(1.0);
        if t0 < -tol || t1 > end + tol || t1 < t0 || self.is_empty() {
            return Err(Error::Range(format!("window [{t0}, {t1}] outside [0, {end}]")));
        }
        let a = self.times.iter().position(|&t| t >= t0 - tol).unwrap_or(0);
        let b = self.times.iter().rposition(|&t| t <= t1 + tol).map_or(a, |k| k + 1);
        Ok(a..b)
    }

    /// The same trajectory with every slice multiplied by `c`.
    pub fn scaled(&self, c: f64) -> Self {
        let mut out = self.clone();
        for s in out.u.iter_mut().chain(out.u_t.iter_mut()) {
            for x in s.iter_mut() {
                *x *= c;
            }
        }
        out
    }

    /// `self - other`, slice by slice. Fails if the time samples differ.
    pub fn difference(&self, other: &Self) -> Result<Self> {
        if self.grid != other.grid || self.times != other.times {
            return Err(Error::Config("trajectories live on different grids".into()));
        }
        let mut out = self.clone();
        for (a, b) in out.u.iter_mut().zip(&other.u).chain(out.u_t.iter_mut().zip(&other.u_t)) {
            for (x, y) in a.iter_mut().zip(b) {
                *x -= y;
            }
        }
        out.blowup = None;
        Ok(out)
    }
}

/// `sup |u|`, or infinity if any sample is not finite.
pub fn sup_abs(u: &[f64]) -> f64 {
    let mut m: f64 = 0.0;
    for &x in u {
        if !x.is_finite() {
            return f64::INFINITY;
        }
        m = m.max(abs(x));
    }
    m
}

/// True iff `sup |u| > threshold` or some sample is not finite.
pub fn detect_blowup(u: &[f64], threshold: f64) -> bool {
    sup_abs(u) > threshold
}

/// Discrete flat energy `½ Σ W_i u_t² + ½ Σ r_{i+½}² (u_{i+1} - u_i)² / Δr`,
/// approximating `½ ∫ (u_t² + u_r²) r² dr`. Conserved by the semi-discrete
/// flat scheme with the Dirichlet condition.
pub fn linear_energy(grid: &RadialGrid, u: &[f64], u_t: &[f64]) -> f64 {
    let h = grid.dr();
    let vol = grid.full_cell_volumes();
    let n = grid.n_r;
    let mut e = 0.0;
    for i in 0..n {
        let face = (i as f64 + 0.5) * h;
        let d = u[i + 1] - u[i];
        e += vol[i] * u_t[i] * u_t[i] + face * face * d * d / h;
    }
    0.5 * e
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RunStatus {
    Completed,
    BlowUpDetected { t_star: f64 },
    CflViolation,
    EvaluationError,
}

impl RunStatus {
    pub fn label(&self) -> &'static str {
        match self {
            RunStatus::Completed => "completed",
            RunStatus::BlowUpDetected { .. } => "blowup",
            RunStatus::CflViolation => "cfl-violation",
            RunStatus::EvaluationError => "evaluation-error",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunOutcome {
    pub status: RunStatus,
    pub peak_amplitude: f64,
    pub final_energy: f64,
}

/// Frozen operator for static backgrounds, rebuilt per stage time otherwise.
struct Operators<'a> {
    spec: &'a BackgroundSpec,
    radial: RadialGrid,
    frozen: Option<RadialOperator>,
}

impl<'a> Operators<'a> {
    fn new(spec: &'a BackgroundSpec, radial: RadialGrid) -> Result<Self> {
        let frozen = if spec.is_static() { Some(RadialOperator::new(spec, radial, 0.0)?) } else { None };
        Ok(Self { spec, radial, frozen })
    }

    /// `u_tt = (S - K(u, u_t)) / G^tt` into `acc`; the outer node stays pinned.
    fn acceleration(&self, t: f64, u: &[f64], w: &[f64], s: &[f64], acc: &mut [f64]) -> Result<()> {
        let fresh;
        let op = match &self.frozen {
            Some(op) => op,
            None => {
                fresh = RadialOperator::new(self.spec, self.radial, t)?;
                &fresh
            }
        };
        op.spatial_part(u, w, acc);
        let n = self.radial.n_r;
        for i in 0..n {
            acc[i] = (s[i] - acc[i]) / op.g_tt[i];
        }
        acc[n] = 0.0;
        Ok(())
    }
}

/// One field's RK4 state and scratch space.
struct Field<'a> {
    ops: Operators<'a>,
    u: Vec<f64>,
    w: Vec<f64>,
    stage_u: Vec<f64>,
    stage_w: Vec<f64>,
    ku: [Vec<f64>; 4],
    kw: [Vec<f64>; 4],
    src: Vec<f64>,
}

impl<'a> Field<'a> {
    fn new(spec: &'a BackgroundSpec, grid: &Grid, data: &InitialData) -> Result<Self> {
        let radial = grid.radial;
        let n = radial.len();
        let mut u = data.f.sample(&radial);
        let mut w = data.g.sample(&radial);
        u[n - 1] = 0.0;
        w[n - 1] = 0.0;
        let z = || vec![0.0; n];
        Ok(Self {
            ops: Operators::new(spec, radial)?,
            u,
            w,
            stage_u: z(),
            stage_w: z(),
            ku: [z(), z(), z(), z()],
            kw: [z(), z(), z(), z()],
            src: z(),
        })
    }

    /// Sets the stage input `y_n + c·dt·k_{stage-1}`.
    fn prepare_stage(&mut self, stage: usize, dt: f64) {
        if stage == 0 {
            self.stage_u.copy_from_slice(&self.u);
            self.stage_w.copy_from_slice(&self.w);
            return;
        }
        let c = if stage == 3 { dt } else { 0.5 * dt };
        for i in 0..self.u.len() {
            self.stage_u[i] = self.u[i] + c * self.ku[stage - 1][i];
            self.stage_w[i] = self.w[i] + c * self.kw[stage - 1][i];
        }
    }

    /// Evaluates stage slopes with the source already in `self.src`.
    fn slopes(&mut self, stage: usize, t: f64) -> Result<()> {
        self.ku[stage].copy_from_slice(&self.stage_w);
        self.ops.acceleration(t, &self.stage_u, &self.stage_w, &self.src, &mut self.kw[stage])
    }

    fn finish_step(&mut self, dt: f64) {
        let c = dt / 6.0;
        for i in 0..self.u.len() {
            self.u[i] += c * (self.ku[0][i] + 2.0 * self.ku[1][i] + 2.0 * self.ku[2][i] + self.ku[3][i]);
            self.w[i] += c * (self.kw[0][i] + 2.0 * self.kw[1][i] + 2.0 * self.kw[2][i] + self.kw[3][i]);
        }
    }
}

const STAGE_OFFSET: [f64; 4] = [0.0, 0.5, 0.5, 1.0];

fn store(traj: &mut FieldTrajectory, t: f64, f: &Field) {
    traj.times.push(t);
    traj.u.push(f.u.clone());
    traj.u_t.push(f.w.clone());
}

fn linear_run(
    spec: &BackgroundSpec,
    source: &dyn Source,
    data: &InitialData,
    grid: &Grid,
    record: bool,
) -> Result<(FieldTrajectory, Option<StageHistory>)> {
    grid.validate(spec, data.support_radius())?;
    source.check(grid)?;
    let radial = grid.radial;
    let n_steps = grid.n_steps();
    let dt = grid.dt();
    let mut field = Field::new(spec, grid, data)?;
    let mut traj = FieldTrajectory::new(*grid, &spec.name);
    let mut history = if record { Some(StageHistory::with_capacity(radial.len(), n_steps)) } else { None };
    store(&mut traj, 0.0, &field);
    for step in 0..n_steps {
        let t = step as f64 * dt;
        for stage in 0..4 {
            field.prepare_stage(stage, dt);
            if let Some(h) = history.as_mut() {
                h.values.extend_from_slice(&field.stage_u);
            }
            let ts = t + STAGE_OFFSET[stage] * dt;
            source.fill(step, stage, ts, &radial, &mut field.src);
            field.slopes(stage, ts)?;
        }
        field.finish_step(dt);
        let t_next = (step + 1) as f64 * dt;
        let sup = sup_abs(&field.u).max(sup_abs(&field.w));
        if !sup.is_finite() {
            return Err(Error::Evaluation(format!("non-finite field at t = {t_next}")));
        }
        if sup > BLOWUP_THRESHOLD {
            traj.blowup = Some(t_next);
            return Ok((traj, None));
        }
        if (step + 1) % grid.stride == 0 || step + 1 == n_steps {
            store(&mut traj, t_next, &field);
        }
    }
    Ok((traj, history))
}

/// Solves `P u = source` with `u(0) = f`, `u_t(0) = g`.
pub fn evolve_linear(spec: &BackgroundSpec, source: &dyn Source, data: &InitialData, grid: &Grid) -> Result<FieldTrajectory> {
    linear_run(spec, source, data, grid, false).map(|(t, _)| t)
}

/// As [`evolve_linear`], also returning the stage inputs of `u`.
///
/// The history is `None` if the run stopped at the blow-up threshold.
pub fn evolve_linear_recorded(
    spec: &BackgroundSpec,
    source: &dyn Source,
    data: &InitialData,
    grid: &Grid,
) -> Result<(FieldTrajectory, Option<StageHistory>)> {
    linear_run(spec, source, data, grid, true)
}

/// Operators, nonlinearities and data of the coupled system.
#[derive(Debug, Clone, PartialEq)]
pub struct CoupledProblem {
    pub spec1: BackgroundSpec,
    pub spec2: BackgroundSpec,
    /// `F_p`, source of the `u` equation.
    pub fp: Nonlinearity,
    /// `F_q`, source of the `v` equation.
    pub fq: Nonlinearity,
    pub data_u: InitialData,
    pub data_v: InitialData,
}

/// Solves `P1 u = F_p(v)`, `P2 v = F_q(u)` with a shared RK4 integrator,
/// stopping at the first step where either field trips [`detect_blowup`].
pub fn evolve_coupled(problem: &CoupledProblem, grid: &Grid) -> Result<(FieldTrajectory, FieldTrajectory, RunOutcome)> {
    grid.validate(&problem.spec1, problem.data_u.support_radius())?;
    grid.validate(&problem.spec2, problem.data_v.support_radius())?;
    let radial = grid.radial;
    let n_steps = grid.n_steps();
    let dt = grid.dt();
    let mut a = Field::new(&problem.spec1, grid, &problem.data_u)?;
    let mut b = Field::new(&problem.spec2, grid, &problem.data_v)?;
    let mut tu = FieldTrajectory::new(*grid, &problem.spec1.name);
    let mut tv = FieldTrajectory::new(*grid, &problem.spec2.name);
    store(&mut tu, 0.0, &a);
    store(&mut tv, 0.0, &b);
    let mut peak = sup_abs(&a.u).max(sup_abs(&b.u));
    let energy = |a: &Field, b: &Field| linear_energy(&radial, &a.u, &a.w) + linear_energy(&radial, &b.u, &b.w);
    let mut last_energy = energy(&a, &b);
    for step in 0..n_steps {
        let t = step as f64 * dt;
        for stage in 0..4 {
            a.prepare_stage(stage, dt);
            b.prepare_stage(stage, dt);
            problem.fp.apply(&b.stage_u, &mut a.src);
            problem.fq.apply(&a.stage_u, &mut b.src);
            let ts = t + STAGE_OFFSET[stage] * dt;
            a.slopes(stage, ts)?;
            b.slopes(stage, ts)?;
        }
        a.finish_step(dt);
        b.finish_step(dt);
        let t_next = (step + 1) as f64 * dt;
        if detect_blowup(&a.u, BLOWUP_THRESHOLD) || detect_blowup(&b.u, BLOWUP_THRESHOLD) {
            let peak_now = sup_abs(&a.u).max(sup_abs(&b.u));
            tu.blowup = Some(t_next);
            tv.blowup = Some(t_next);
            let outcome = RunOutcome {
                status: RunStatus::BlowUpDetected { t_star: t_next },
                peak_amplitude: peak_now,
                final_energy: last_energy,
            };
            return Ok((tu, tv, outcome));
        }
        peak = peak.max(sup_abs(&a.u)).max(sup_abs(&b.u));
        last_energy = energy(&a, &b);
        if (step + 1) % grid.stride == 0 || step + 1 == n_steps {
            store(&mut tu, t_next, &a);
            store(&mut tv, t_next, &b);
        }
    }
    let outcome = RunOutcome { status: RunStatus::Completed, peak_amplitude: peak, final_energy: last_energy };
    Ok((tu, tv, outcome))
}
