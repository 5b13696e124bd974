//! Run configuration and its text format.
//!
//! The format is flat `key = value` lines with dotted section names
//! (`grid.n_r = 560`), `#` comments and TOML value syntax. Any TOML
//! document with the same keys parses too.

use std::fmt::Write as _;
use std::path::Path;

use coupled_wave_core::backgrounds::{builtin_background, BackgroundSpec};
use coupled_wave_core::exponents::{ExponentPair, ExponentProfile, Region};
use coupled_wave_core::solver::{CoupledProblem, Grid, InitialData, Nonlinearity, NonlinearityForm, RadialFunction};
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

/// Default cap on the number of runs in one sweep.
pub const DEFAULT_RUN_CAP: usize = 500;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Simulate,
    Picard,
    Classify,
    Norms,
    VerifyBackground,
    Sweep,
}

impl Mode {
    pub fn label(self) -> &'static str {
        match self {
            Mode::Simulate => "simulate",
            Mode::Picard => "picard",
            Mode::Classify => "classify",
            Mode::Norms => "norms",
            Mode::VerifyBackground => "verify-background",
            Mode::Sweep => "sweep",
        }
    }

    fn evolves(self) -> bool {
        matches!(self, Mode::Simulate | Mode::Picard | Mode::Norms | Mode::Sweep)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Form {
    Absolute,
    Signed,
}

impl From<Form> for NonlinearityForm {
    fn from(f: Form) -> Self {
        match f {
            Form::Absolute => NonlinearityForm::Absolute,
            Form::Signed => NonlinearityForm::Signed,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Shape {
    Gaussian,
    Bump,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperatorConfig {
    pub background: String,
    #[serde(default)]
    pub params: Vec<f64>,
}

impl Default for OperatorConfig {
    fn default() -> Self {
        Self { background: "minkowski".into(), params: Vec::new() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NonlinearityConfig {
    pub p: f64,
    pub q: f64,
    pub form_p: Form,
    pub form_q: Form,
}

impl Default for NonlinearityConfig {
    fn default() -> Self {
        Self { p: 2.5, q: 3.0, form_p: Form::Absolute, form_q: Form::Absolute }
    }
}

/// The same radial profile is used for `u(0)` and `v(0)`; both time derivatives vanish.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DataConfig {
    pub shape: Shape,
    pub amplitude: f64,
    pub width: f64,
    pub center: f64,
}

impl Default for DataConfig {
    fn default() -> Self {
        Self { shape: Shape::Gaussian, amplitude: 1e-3, width: 1.0, center: 0.0 }
    }
}

impl DataConfig {
    pub fn profile(&self) -> RadialFunction {
        let (amp, center, width) = (self.amplitude, self.center, self.width);
        match self.shape {
            Shape::Gaussian => RadialFunction::Gaussian { amp, center, width },
            Shape::Bump => RadialFunction::Bump { amp, center, width },
        }
    }

    pub fn initial_data(&self) -> InitialData {
        InitialData::new(self.profile(), RadialFunction::Zero)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    pub r_max: f64,
    pub n_r: usize,
    pub cfl: f64,
    pub t_final: f64,
    pub stride: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self { r_max: 28.0, n_r: 560, cfl: 0.5, t_final: 20.0, stride: 1 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PicardConfig {
    /// Radius of the cutoff `ψ_R`; twice the data support radius when unset.
    pub cutoff_radius: Option<f64>,
    pub j_max: usize,
}

impl Default for PicardConfig {
    fn default() -> Self {
        Self { cutoff_radius: None, j_max: 6 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClassifyConfig {
    pub p_min: f64,
    pub p_max: f64,
    pub q_min: f64,
    pub q_max: f64,
    pub resolution: usize,
}

impl Default for ClassifyConfig {
    fn default() -> Self {
        Self { p_min: 1.8, p_max: 4.5, q_min: 1.8, q_max: 4.5, resolution: 200 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifyConfig {
    pub j_max: usize,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self { j_max: 8 }
    }
}

/// Cartesian product `p × q × amplitude`, each cell a `simulate` run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub p: Vec<f64>,
    pub q: Vec<f64>,
    pub amplitude: Vec<f64>,
    pub cap: usize,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self { p: Vec::new(), q: Vec::new(), amplitude: Vec::new(), cap: DEFAULT_RUN_CAP }
    }
}

impl SweepConfig {
    pub fn len(&self) -> usize {
        self.p.len() * self.q.len() * self.amplitude.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub mode: Mode,
    pub operator1: OperatorConfig,
    pub operator2: OperatorConfig,
    pub nonlinearity: NonlinearityConfig,
    pub data: DataConfig,
    pub grid: GridConfig,
    pub picard: PicardConfig,
    pub classify: ClassifyConfig,
    pub verify: VerifyConfig,
    pub sweep: SweepConfig,
    pub output: OutputConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            mode: Mode::Simulate,
            operator1: OperatorConfig::default(),
            operator2: OperatorConfig::default(),
            nonlinearity: NonlinearityConfig::default(),
            data: DataConfig::default(),
            grid: GridConfig::default(),
            picard: PicardConfig::default(),
            classify: ClassifyConfig::default(),
            verify: VerifyConfig::default(),
            sweep: SweepConfig::default(),
            output: OutputConfig::default(),
        }
    }
}

fn flatten(prefix: &str, table: &toml::Table, out: &mut String) {
    let mut leaves = Vec::new();
    let mut tables = Vec::new();
    for (key, value) in table {
        let path = if prefix.is_empty() { key.clone() } else { format!("{prefix}.{key}") };
        match value {
            toml::Value::Table(t) => tables.push((path, t)),
            v => leaves.push((path, v)),
        }
    }
    for (path, v) in leaves {
        let _ = writeln!(out, "{path} = {v}");
    }
    for (path, t) in tables {
        flatten(&path, t, out);
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        Ok(toml::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| LabError::io(path, e))?;
        Self::parse(&text)
    }

    /// Flat dotted-key text. `parse(serialize(c)) == c`.
    pub fn serialize(&self) -> Result<String> {
        let table = toml::Table::try_from(self)?;
        let mut out = String::new();
        flatten("", &table, &mut out);
        Ok(out)
    }

    /// The configuration without its output location; digests are taken over this.
    pub fn canonical(&self) -> Result<String> {
        let mut c = self.clone();
        c.output = OutputConfig::default();
        c.serialize()
    }

    pub fn pair(&self) -> coupled_wave_core::Result<ExponentPair> {
        ExponentPair::new(self.nonlinearity.p, self.nonlinearity.q)
    }

    pub fn profile(&self) -> coupled_wave_core::Result<ExponentProfile> {
        ExponentProfile::new(self.pair()?)
    }

    pub fn backgrounds(&self) -> coupled_wave_core::Result<(BackgroundSpec, BackgroundSpec)> {
        Ok((
            builtin_background(&self.operator1.background, &self.operator1.params)?,
            builtin_background(&self.operator2.background, &self.operator2.params)?,
        ))
    }

    pub fn solver_grid(&self) -> coupled_wave_core::Result<Grid> {
        let g = &self.grid;
        Ok(Grid::new(g.r_max, g.n_r, g.cfl, g.t_final)?.with_stride(g.stride))
    }

    pub fn coupled_problem(&self) -> coupled_wave_core::Result<CoupledProblem> {
        let (spec1, spec2) = self.backgrounds()?;
        let nl = &self.nonlinearity;
        let data = self.data.initial_data();
        Ok(CoupledProblem {
            spec1,
            spec2,
            fp: Nonlinearity::new(nl.p, nl.form_p.into())?,
            fq: Nonlinearity::new(nl.q, nl.form_q.into())?,
            data_u: data,
            data_v: data,
        })
    }

    /// Copy of the configuration for one sweep cell.
    pub fn sweep_cell(&self, p: f64, q: f64, amplitude: f64) -> Self {
        let mut c = self.clone();
        c.mode = Mode::Simulate;
        c.nonlinearity.p = p;
        c.nonlinearity.q = q;
        c.data.amplitude = amplitude;
        c.sweep = SweepConfig::default();
        c
    }

    /// Every violated rule, or `Ok` when the configuration can run.
    pub fn validate(&self) -> std::result::Result<(), Vec<String>> {
        let mut errs = Vec::new();
        match self.mode {
            Mode::Classify => self.validate_classify(&mut errs),
            Mode::VerifyBackground => {
                if let Err(e) = self.backgrounds() {
                    errs.push(e.to_string());
                }
                if !(1..=30).contains(&self.verify.j_max) {
                    errs.push(format!("verify.j_max must lie in 1..=30, got {}", self.verify.j_max));
                }
            }
            Mode::Sweep => {
                let sw = &self.sweep;
                if sw.is_empty() {
                    errs.push("sweep.p, sweep.q and sweep.amplitude must all be non-empty".into());
                }
                if sw.len() > sw.cap {
                    errs.push(format!("sweep has {} runs, above the cap {}", sw.len(), sw.cap));
                }
                let mut cells = Vec::new();
                for &p in &sw.p {
                    for &q in &sw.q {
                        for &a in &sw.amplitude {
                            cells.push(self.sweep_cell(p, q, a));
                        }
                    }
                }
                // cells differ only in (p, q, ε): report each distinct message once
                for cell in cells.iter().take(sw.cap) {
                    let mut cell_errs = Vec::new();
                    cell.validate_evolution(&mut cell_errs);
                    for e in cell_errs {
                        if !errs.contains(&e) {
                            errs.push(e);
                        }
                    }
                }
            }
            m => {
                debug_assert!(m.evolves());
                self.validate_evolution(&mut errs);
                if matches!(m, Mode::Picard | Mode::Norms) {
                    if let Ok(profile) = self.profile() {
                        if profile.region != Region::GlobalDirect {
                            errs.push(format!(
                                "mode {} needs a directly admissible pair, ({}, {}) is {}",
                                m.label(),
                                self.nonlinearity.p,
                                self.nonlinearity.q,
                                profile.region.label()
                            ));
                        }
                    }
                    if let Some(r) = self.picard.cutoff_radius {
                        if !(r > 0.0 && r.is_finite()) {
                            errs.push(format!("picard.cutoff_radius must be positive, got {r}"));
                        }
                    }
                }
                if m == Mode::Picard && self.picard.j_max < 2 {
                    errs.push(format!("picard.j_max must be at least 2, got {}", self.picard.j_max));
                }
            }
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(errs)
        }
    }

    fn validate_classify(&self, errs: &mut Vec<String>) {
        let c = &self.classify;
        for (name, lo, hi) in [("p", c.p_min, c.p_max), ("q", c.q_min, c.q_max)] {
            if !(lo > 1.0 && hi < 10.0) {
                errs.push(format!("classify.{name} range [{lo}, {hi}] must lie inside (1, 10)"));
            }
            if lo >= hi || lo.is_nan() || hi.is_nan() {
                errs.push(format!("classify.{name}_min must be below classify.{name}_max"));
            }
        }
        if !(2..=4000).contains(&c.resolution) {
            errs.push(format!("classify.resolution must lie in 2..=4000, got {}", c.resolution));
        }
    }

    fn validate_evolution(&self, errs: &mut Vec<String>) {
        let nl = &self.nonlinearity;
        if let Err(e) = self.pair() {
            errs.push(e.to_string());
        }
        for (name, power, form) in [("p", nl.p, nl.form_p), ("q", nl.q, nl.form_q)] {
            if let Err(e) = Nonlinearity::new(power, form.into()) {
                errs.push(format!("nonlinearity.{name}: {e}"));
            }
        }
        let d = &self.data;
        if !d.amplitude.is_finite() {
            errs.push(format!("data.amplitude must be finite, got {}", d.amplitude));
        }
        if !(d.width > 0.0 && d.width.is_finite()) {
            errs.push(format!("data.width must be positive, got {}", d.width));
        }
        if !(d.center >= 0.0 && d.center.is_finite()) {
            errs.push(format!("data.center must be non-negative, got {}", d.center));
        }
        let specs = [
            ("operator1", builtin_background(&self.operator1.background, &self.operator1.params)),
            ("operator2", builtin_background(&self.operator2.background, &self.operator2.params)),
        ];
        for (name, s) in &specs {
            if let Err(e) = s {
                errs.push(format!("{name}: {e}"));
            }
        }
        if self.grid.stride == 0 {
            errs.push("grid.stride must be at least 1".into());
        }
        let grid = match self.solver_grid() {
            Ok(g) => g,
            Err(e) => {
                errs.push(e.to_string());
                return;
            }
        };
        // with an invalid width (already reported) only the CFL rule is meaningful
        let support = if d.width > 0.0 && d.width.is_finite() { self.data.initial_data().support_radius() } else { 0.0 };
        for (name, s) in &specs {
            if let Ok(spec) = s {
                if let Err(e) = grid.validate(spec, support) {
                    errs.push(format!("{name}: {e}"));
                }
            }
        }
    }
}
