//! Asymptotically flat operators `P = d_a g^{ab} d_b + b^a d_a + c` restricted to
//! spherically symmetric coefficients, their radial reduction, and numerical
//! checks of the dyadic decay hypotheses.
//!
//! The metric is `m + g0 + g1` with the spherically symmetric form
//!
//! ```text
//! (-1 + g00) dt^2 + 2 g01 dt dr + (1 + g11) dr^2 + (1 + g22) r^2 dω^2
//! ```
//!
//! where each tilde component is the sum of a long-range (`g0`) and a
//! short-range (`g1`) profile of `(t, r)`. For a radial field the angular
//! factor `g22` drops out and
//!
//! ```text
//! P u = d_t(G^tt u_t + G^tr u_r) + r^-2 d_r(r^2 (G^tr u_t + G^rr u_r)) + b^0 u_t + b^r u_r + c u
//! ```
//!
//! with `G` the inverse of the `(t, r)` block.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::grid::RadialGrid;
use crate::math::{abs, cos, exp, japanese, powf, sqrt};
use crate::norms::partition::phi;

/// Scalar coefficient profile of `(t, r)`, linear in its amplitude.
#[derive(Debug, Clone, PartialEq)]
pub enum Profile {
    Zero,
    /// `amp <r>^{-kappa}`
    PowerDecay { amp: f64, kappa: f64 },
    /// `amp r <r>^{-kappa-1}`; odd in `r`, for radial vector components.
    RadialPowerDecay { amp: f64, kappa: f64 },
    /// `amp exp(1 - 1/(1 - (r/radius)^2))` for `r < radius`, else 0.
    Bump { amp: f64, radius: f64 },
    /// `amp <r>^{-kappa} cos(omega t)`
    Pulsating { amp: f64, kappa: f64, omega: f64 },
    Sum(Vec<Profile>),
}

impl Profile {
    pub fn eval(&self, t: f64, r: f64) -> f64 {
        match self {
            Profile::Zero => 0.0,
            Profile::PowerDecay { amp, kappa } => amp * powf(japanese(r), -kappa),
            Profile::RadialPowerDecay { amp, kappa } => amp * r * powf(japanese(r), -kappa - 1.0),
            Profile::Bump { amp, radius } => {
                let s = r / radius;
                if abs(s) >= 1.0 {
                    0.0
                } else {
                    amp * exp(1.0 - 1.0 / (1.0 - s * s))
                }
            }
            Profile::Pulsating { amp, kappa, omega } => {
                amp * powf(japanese(r), -kappa) * cos(omega * t)
            }
            Profile::Sum(parts) => parts.iter().map(|p| p.eval(t, r)).sum(),
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Profile::Zero => true,
            Profile::PowerDecay { amp, .. }
            | Profile::RadialPowerDecay { amp, .. }
            | Profile::Bump { amp, .. }
            | Profile::Pulsating { amp, .. } => *amp == 0.0,
            Profile::Sum(parts) => parts.iter().all(Profile::is_zero),
        }
    }

    pub fn is_static(&self) -> bool {
        match self {
            Profile::Pulsating { omega, amp, .. } => *omega == 0.0 || *amp == 0.0,
            Profile::Sum(parts) => parts.iter().all(Profile::is_static),
            _ => true,
        }
    }
}

/// The four tilde components of a spherically symmetric metric perturbation.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricProfiles {
    pub g00: Profile,
    pub g01: Profile,
    pub g11: Profile,
    pub g22: Profile,
}

impl MetricProfiles {
    pub fn zero() -> Self {
        Self { g00: Profile::Zero, g01: Profile::Zero, g11: Profile::Zero, g22: Profile::Zero }
    }

    fn components(&self) -> [(&'static str, &Profile); 4] {
        [("00", &self.g00), ("01", &self.g01), ("11", &self.g11), ("22", &self.g22)]
    }

    fn is_zero(&self) -> bool {
        self.components().iter().all(|(_, p)| p.is_zero())
    }

    fn is_static(&self) -> bool {
        self.components().iter().all(|(_, p)| p.is_static())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BackgroundSpec {
    pub name: String,
    pub params: Vec<f64>,
    /// `g0`: long-range, spherically symmetric.
    pub long_range: MetricProfiles,
    /// `g1`: short-range, restricted to radial dependence.
    pub short_range: MetricProfiles,
    pub b0: Profile,
    pub br: Profile,
    pub c: Profile,
}

pub const BUILTIN_NAMES: [&str; 5] =
    ["minkowski", "long-range-power", "short-range-bump", "lower-order", "composite"];

fn expect_params(name: &str, params: &[f64], n: usize) -> Result<()> {
    if params.len() != n {
        return Err(Error::Config(format!(
            "background {name} takes {n} parameters, got {}",
            params.len()
        )));
    }
    if params.iter().any(|p| !p.is_finite()) {
        return Err(Error::Config(format!("background {name}: non-finite parameter")));
    }
    Ok(())
}

fn long_range(delta: f64, kappa: f64) -> MetricProfiles {
    let w = Profile::PowerDecay { amp: -delta, kappa };
    MetricProfiles { g00: w.clone(), g01: Profile::Zero, g11: w.clone(), g22: w }
}

fn short_range(delta: f64, radius: f64) -> MetricProfiles {
    let w = Profile::Bump { amp: -delta, radius };
    MetricProfiles { g00: w.clone(), g01: Profile::Zero, g11: w.clone(), g22: w }
}

/// Built-in backgrounds by name:
///
/// | name | params |
/// |------|--------|
/// | `minkowski` | none |
/// | `long-range-power` | `δ, κ` |
/// | `short-range-bump` | `δ, r0` |
/// | `lower-order` | `δ_b, δ_c` |
/// | `composite` | `δ, κ, δ_s, r0, δ_b, δ_c` |
pub fn builtin_background(name: &str, params: &[f64]) -> Result<BackgroundSpec> {
    let mut spec = BackgroundSpec {
        name: name.to_string(),
        params: params.to_vec(),
        long_range: MetricProfiles::zero(),
        short_range: MetricProfiles::zero(),
        b0: Profile::Zero,
        br: Profile::Zero,
        c: Profile::Zero,
    };
    match name {
        "minkowski" => expect_params(name, params, 0)?,
        "long-range-power" => {
            expect_params(name, params, 2)?;
            spec.long_range = long_range(params[0], params[1]);
        }
        "short-range-bump" => {
            expect_params(name, params, 2)?;
            if params[1] <= 0.0 {
                return Err(Error::Config("short-range-bump radius must be positive".to_string()));
            }
            spec.short_range = short_range(params[0], params[1]);
        }
        "lower-order" => {
            expect_params(name, params, 2)?;
            spec.b0 = Profile::PowerDecay { amp: params[0], kappa: 2.0 };
            spec.br = Profile::RadialPowerDecay { amp: params[0], kappa: 2.0 };
            spec.c = Profile::PowerDecay { amp: params[1], kappa: 3.0 };
        }
        "composite" => {
            expect_params(name, params, 6)?;
            if params[3] <= 0.0 {
                return Err(Error::Config("composite bump radius must be positive".to_string()));
            }
            spec.long_range = long_range(params[0], params[1]);
            spec.short_range = short_range(params[2], params[3]);
            spec.b0 = Profile::PowerDecay { amp: params[4], kappa: 2.0 };
            spec.br = Profile::RadialPowerDecay { amp: params[4], kappa: 2.0 };
            spec.c = Profile::PowerDecay { amp: params[5], kappa: 3.0 };
        }
        other => {
            return Err(Error::Config(format!(
                "unknown background '{other}' (known: {})",
                BUILTIN_NAMES.join(", ")
            )))
        }
    }
    Ok(spec)
}

/// Inverse of the `(t, r)` block at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InverseBlock {
    pub tt: f64,
    pub tr: f64,
    pub rr: f64,
}

impl BackgroundSpec {
    pub fn minkowski() -> Self {
        builtin_background("minkowski", &[]).expect("minkowski is built in")
    }

    pub fn is_flat(&self) -> bool {
        self.long_range.is_zero()
            && self.short_range.is_zero()
            && self.b0.is_zero()
            && self.br.is_zero()
            && self.c.is_zero()
    }

    pub fn is_static(&self) -> bool {
        self.long_range.is_static()
            && self.short_range.is_static()
            && self.b0.is_static()
            && self.br.is_static()
            && self.c.is_static()
    }

    /// Total metric `(g_tt, g_tr, g_rr, g_angular)` at `(t, r)`.
    pub fn metric(&self, t: f64, r: f64) -> (f64, f64, f64, f64) {
        let l = &self.long_range;
        let s = &self.short_range;
        (
            -1.0 + l.g00.eval(t, r) + s.g00.eval(t, r),
            l.g01.eval(t, r) + s.g01.eval(t, r),
            1.0 + l.g11.eval(t, r) + s.g11.eval(t, r),
            1.0 + l.g22.eval(t, r) + s.g22.eval(t, r),
        )
    }

    /// Explicit 2×2 inversion of the `(t, r)` block.
    pub fn inverse_block(&self, t: f64, r: f64) -> Result<InverseBlock> {
        let (gtt, gtr, grr, gang) = self.metric(t, r);
        let det = gtt * grr - gtr * gtr;
        if !(det < 0.0) || !(gang > 0.0) || !det.is_finite() {
            return Err(Error::NotLorentzian { r, t });
        }
        Ok(InverseBlock { tt: grr / det, tr: -gtr / det, rr: gtt / det })
    }

    /// Largest radial null speed `|dr/dt|` at `(t, r)`.
    pub fn characteristic_speed(&self, t: f64, r: f64) -> Result<f64> {
        let (gtt, gtr, grr, _) = self.metric(t, r);
        let disc = gtr * gtr - gtt * grr;
        if !(disc > 0.0) || !(grr > 0.0) {
            return Err(Error::NotLorentzian { r, t });
        }
        let root = sqrt(disc);
        Ok(abs((-gtr + root) / grr).max(abs((-gtr - root) / grr)))
    }

    /// `c_max` over the grid nodes and sample times: exactly 1 when flat,
    /// otherwise the sampled supremum padded by 10% (and never below 1).
    pub fn max_speed(&self, grid: &RadialGrid, times: &[f64]) -> Result<f64> {
        if self.is_flat() {
            return Ok(1.0);
        }
        let mut sup: f64 = 0.0;
        for &t in times {
            for i in 0..grid.len() {
                sup = sup.max(self.characteristic_speed(t, grid.r(i))?);
            }
        }
        Ok((1.1 * sup).max(1.0))
    }
}

/// Coefficients of [`BackgroundSpec`] frozen on a grid at one time, and the
/// discrete radial operator built from them.
///
/// The principal part is in flux form: face fluxes
/// `r_{i+1/2}^2 (G^rr u_r + G^tr u_t)` are differenced over dual-cell
/// volumes, which makes `P(r^2) = 6` exact for the flat operator and
/// reduces at `r = 0` to the even-ghost limit `(2/r) u_r -> 2 u_rr`.
#[derive(Debug, Clone)]
pub struct RadialOperator {
    pub grid: RadialGrid,
    pub t: f64,
    flat: bool,
    pub g_tt: Vec<f64>,
    pub g_tr: Vec<f64>,
    dt_g_tt: Vec<f64>,
    dt_g_tr: Vec<f64>,
    face_rr: Vec<f64>,
    face_tr: Vec<f64>,
    b0: Vec<f64>,
    br: Vec<f64>,
    c: Vec<f64>,
    face_area: Vec<f64>,
    volume: Vec<f64>,
}

impl RadialOperator {
    pub fn new(spec: &BackgroundSpec, grid: RadialGrid, t: f64) -> Result<Self> {
        let n = grid.len();
        let flat = spec.is_flat();
        let faces: Vec<f64> = (0..=grid.n_r).map(|i| (i as f64 + 0.5) * grid.dr()).collect();
        let face_area: Vec<f64> = faces.iter().map(|r| r * r).collect();
        let volume = grid.full_cell_volumes();
        let mut op = RadialOperator {
            grid,
            t,
            flat,
            g_tt: vec![-1.0; n],
            g_tr: vec![0.0; n],
            dt_g_tt: vec![0.0; n],
            dt_g_tr: vec![0.0; n],
            face_rr: vec![1.0; n],
            face_tr: vec![0.0; n],
            b0: vec![0.0; n],
            br: vec![0.0; n],
            c: vec![0.0; n],
            face_area,
            volume,
        };
        if flat {
            return Ok(op);
        }
        let static_spec = spec.is_static();
        let h_t = 1e-4 * t.abs().max(1.0);
        for i in 0..n {
            let r = grid.r(i);
            let g = spec.inverse_block(t, r)?;
            op.g_tt[i] = g.tt;
            op.g_tr[i] = g.tr;
            if !static_spec {
                let gp = spec.inverse_block(t + h_t, r)?;
                let gm = spec.inverse_block(t - h_t, r)?;
                op.dt_g_tt[i] = (gp.tt - gm.tt) / (2.0 * h_t);
                op.dt_g_tr[i] = (gp.tr - gm.tr) / (2.0 * h_t);
            }
            let f = spec.inverse_block(t, faces[i])?;
            op.face_rr[i] = f.rr;
            op.face_tr[i] = f.tr;
            op.b0[i] = spec.b0.eval(t, r);
            op.br[i] = spec.br.eval(t, r);
            op.c[i] = spec.c.eval(t, r);
        }
        Ok(op)
    }

    /// Everything in `P u` except `G^tt u_tt`, at nodes `0..n_r` (the outer
    /// node is left at zero; evolutions pin it by the Dirichlet condition).
    pub fn spatial_part(&self, u: &[f64], w: &[f64], out: &mut [f64]) {
        let n = self.grid.n_r;
        let h = self.grid.dr();
        let inv_h = 1.0 / h;
        // flux through face i+1/2
        let flux = |i: usize, u_next: f64, w_next: f64| -> f64 {
            let mut f = self.face_rr[i] * (u_next - u[i]) * inv_h;
            if !self.flat {
                f += self.face_tr[i] * 0.5 * (w[i] + w_next);
            }
            self.face_area[i] * f
        };
        let mut left = 0.0;
        for i in 0..n {
            let right = flux(i, u[i + 1], w[i + 1]);
            let mut v = (right - left) / self.volume[i];
            if !self.flat {
                let (u_r, w_r) = if i == 0 {
                    (0.0, 0.0)
                } else {
                    ((u[i + 1] - u[i - 1]) * 0.5 * inv_h, (w[i + 1] - w[i - 1]) * 0.5 * inv_h)
                };
                v += (self.dt_g_tt[i] + self.b0[i]) * w[i]
                    + (self.dt_g_tr[i] + self.br[i]) * u_r
                    + self.g_tr[i] * w_r
                    + self.c[i] * u[i];
            }
            out[i] = v;
            left = right;
        }
        out[n] = 0.0;
    }

    /// `P u` for a field given with its first two time derivatives at time `t`.
    ///
    /// The outer node uses a quadratically extrapolated ghost value.
    pub fn apply(&self, u: &[f64], u_t: &[f64], u_tt: &[f64]) -> Result<Vec<f64>> {
        let n = self.grid.n_r;
        if u.len() != n + 1 || u_t.len() != n + 1 || u_tt.len() != n + 1 {
            return Err(Error::Grid(format!("expected {} samples", n + 1)));
        }
        let mut out = vec![0.0; n + 1];
        self.spatial_part(u, u_t, &mut out);
        // outer node with ghost u_{n+1}
        let h = self.grid.dr();
        let ghost = |f: &[f64]| 3.0 * f[n] - 3.0 * f[n - 1] + f[n - 2];
        let ug = ghost(u);
        let wg = ghost(u_t);
        let face = |i: usize, a: f64, b: f64, wa: f64, wb: f64| {
            let mut f = self.face_rr[i] * (b - a) / h;
            if !self.flat {
                f += self.face_tr[i] * 0.5 * (wa + wb);
            }
            self.face_area[i] * f
        };
        let right = face(n, u[n], ug, u_t[n], wg);
        let left = face(n - 1, u[n - 1], u[n], u_t[n - 1], u_t[n]);
        let mut v = (right - left) / self.volume[n];
        if !self.flat {
            let u_r = (ug - u[n - 1]) / (2.0 * h);
            let w_r = (wg - u_t[n - 1]) / (2.0 * h);
            v += (self.dt_g_tt[n] + self.b0[n]) * u_t[n]
                + (self.dt_g_tr[n] + self.br[n]) * u_r
                + self.g_tr[n] * w_r
                + self.c[n] * u[n];
        }
        out[n] = v;
        for i in 0..=n {
            out[i] += self.g_tt[i] * u_tt[i];
        }
        Ok(out)
    }
}

/// Convenience wrapper: `P u` on `grid` at time `t`.
pub fn radial_operator_apply(
    spec: &BackgroundSpec,
    grid: RadialGrid,
    t: f64,
    u: &[f64],
    u_t: &[f64],
    u_tt: &[f64],
) -> Result<Vec<f64>> {
    RadialOperator::new(spec, grid, t)?.apply(u, u_t, u_tt)
}

// ---------------------------------------------------------------------------
// decay hypotheses

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HypothesisOptions {
    /// Time samples `linspace(0, t_max, n_t)` for the `L^∞_t` part.
    pub t_max: f64,
    pub n_t: usize,
    /// Radial samples per dyadic block.
    pub samples_per_block: usize,
    /// Relative growth allowed when `J_max` doubles.
    pub growth_tolerance: f64,
}

impl Default for HypothesisOptions {
    fn default() -> Self {
        Self { t_max: 10.0, n_t: 3, samples_per_block: 256, growth_tolerance: 0.01 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HypothesisRow {
    pub component: String,
    pub order: usize,
    /// Dyadic weight exponent `s` in `ℓ^s_1 L^∞`.
    pub s_index: f64,
    pub norm_at_j: f64,
    pub norm_at_2j: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HypothesisReport {
    pub background: String,
    pub j_max: usize,
    pub rows: Vec<HypothesisRow>,
}

impl HypothesisReport {
    pub fn pass(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }

    pub fn row(&self, component: &str, order: usize) -> Option<&HypothesisRow> {
        self.rows.iter().find(|r| r.component == component && r.order == order)
    }
}

const FD_REL_STEP: f64 = 1e-4;

/// Central difference weights for derivative order 0..=3 on offsets -2..=2 (in units of h).
fn fd_stencil(order: usize) -> ([f64; 5], i32) {
    match order {
        0 => ([0.0, 0.0, 1.0, 0.0, 0.0], 0),
        1 => ([0.0, -0.5, 0.0, 0.5, 0.0], 1),
        2 => ([0.0, 1.0, -2.0, 1.0, 0.0], 2),
        _ => ([-0.5, 1.0, 0.0, -1.0, 0.5], 3),
    }
}

/// `d_t^a d_r^b f` by nested central differences with relative step 1e-4.
fn mixed_derivative(f: &Profile, t: f64, r: f64, a: usize, b: usize, static_profile: bool) -> f64 {
    if a > 0 && static_profile {
        return 0.0;
    }
    let ht = FD_REL_STEP * t.abs().max(1.0);
    let hr = FD_REL_STEP * r.abs().max(1.0);
    let (wt, pt) = fd_stencil(a);
    let (wr, pr) = fd_stencil(b);
    let mut acc = 0.0;
    for (i, cwt) in wt.iter().enumerate() {
        if *cwt == 0.0 {
            continue;
        }
        let tt = t + (i as f64 - 2.0) * ht;
        for (k, cwr) in wr.iter().enumerate() {
            if *cwr == 0.0 {
                continue;
            }
            acc += cwt * cwr * f.eval(tt, r + (k as f64 - 2.0) * hr);
        }
    }
    acc / (crate::math::powi(ht, pt) * crate::math::powi(hr, pr))
}

/// `Σ_{j ≤ j_max} 2^{j s} sup_{t, x} |φ_j d^μ f|`, maximised over `|μ| = order`
/// for `(t, r)` multi-indices.
fn dyadic_sup_norm(
    f: &Profile,
    order: usize,
    s: f64,
    j_max: usize,
    opts: &HypothesisOptions,
) -> Result<f64> {
    let times = crate::math::linspace(0.0, opts.t_max, opts.n_t.max(1));
    let stat = f.is_static();
    let mut total = 0.0;
    for j in 0..=j_max {
        let (lo, hi) = if j == 0 { (1.0, 2.0) } else { (powf(2.0, j as f64 - 1.0), powf(2.0, j as f64 + 1.0)) };
        let mut sup: f64 = 0.0;
        for k in 0..opts.samples_per_block {
            let bracket = lo + (hi - lo) * (k as f64 + 0.5) / opts.samples_per_block as f64;
            let r = sqrt(bracket * bracket - 1.0);
            let weight = phi(j, r);
            if weight == 0.0 {
                continue;
            }
            for &t in &times {
                for a in 0..=order {
                    let d = mixed_derivative(f, t, r, a, order - a, stat);
                    if !d.is_finite() {
                        return Err(Error::Evaluation(format!("non-finite derivative at r = {r}, t = {t}")));
                    }
                    sup = sup.max(abs(weight * d));
                }
            }
        }
        total += powf(2.0, j as f64 * s) * sup;
    }
    Ok(total)
}

/// Dyadic `ℓ^s_1 L^∞` norms of all coefficient derivatives, at `J_max` and `2 J_max`.
///
/// Long-range metric pieces are measured in `ℓ^{|μ|}_1`, short-range in
/// `ℓ^{1+|μ|}_1` (`|μ| ≤ 3`); `b` in `ℓ^{1+|μ|}_1` and `c` in `ℓ^{2+|μ|}_1`
/// (`|μ| ≤ 2`). A row passes when the norm is finite and grows by less than
/// `growth_tolerance` (relative) under doubling of `J_max`.
pub fn verify_hypotheses(spec: &BackgroundSpec, j_max: usize, opts: &HypothesisOptions) -> Result<HypothesisReport> {
    if j_max == 0 || 2 * j_max > 60 {
        return Err(Error::Config(format!("J_max must be in 1..=30, got {j_max}")));
    }
    let mut entries: Vec<(String, &Profile, usize, f64)> = Vec::new();
    for (name, p) in spec.long_range.components() {
        entries.push((format!("g0.{name}"), p, 3, 0.0));
    }
    for (name, p) in spec.short_range.components() {
        entries.push((format!("g1.{name}"), p, 3, 1.0));
    }
    entries.push(("b.0".to_string(), &spec.b0, 2, 1.0));
    entries.push(("b.r".to_string(), &spec.br, 2, 1.0));
    entries.push(("c".to_string(), &spec.c, 2, 2.0));

    let mut rows = Vec::new();
    for (component, profile, max_order, base) in entries {
        for order in 0..=max_order {
            let s = base + order as f64;
            let (a, b) = if profile.is_zero() {
                (0.0, 0.0)
            } else {
                (
                    dyadic_sup_norm(profile, order, s, j_max, opts)?,
                    dyadic_sup_norm(profile, order, s, 2 * j_max, opts)?,
                )
            };
            let pass = a.is_finite() && b.is_finite() && (b - a) <= opts.growth_tolerance * a.max(0.0);
            rows.push(HypothesisRow { component: component.clone(), order, s_index: s, norm_at_j: a, norm_at_2j: b, pass });
        }
    }
    Ok(HypothesisReport { background: spec.name.clone(), j_max, rows })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> RadialGrid {
        RadialGrid::new(8.0, 160).unwrap()
    }

    #[test]
    fn unknown_background() {
        assert!(matches!(builtin_background("kerr", &[]), Err(Error::Config(_))));
        assert!(matches!(builtin_background("long-range-power", &[0.1]), Err(Error::Config(_))));
    }

    #[test]
    fn minkowski_profiles_vanish() {
        let m = BackgroundSpec::minkowski();
        assert!(m.is_flat());
        for r in [0.0, 1.0, 10.0] {
            assert_eq!(m.metric(0.3, r), (-1.0, 0.0, 1.0, 1.0));
        }
    }

    #[test]
    fn flat_operator_on_r_squared() {
        let g = grid();
        let u: Vec<f64> = g.radii().iter().map(|r| r * r).collect();
        let z = vec![0.0; g.len()];
        let pu = radial_operator_apply(&BackgroundSpec::minkowski(), g, 0.0, &u, &z, &z).unwrap();
        for v in &pu {
            assert!((v - 6.0).abs() < 1e-9, "{v}");
        }
    }

    #[test]
    fn flat_operator_on_t_squared() {
        let g = grid();
        let t: f64 = 1.7;
        let u = vec![t * t; g.len()];
        let ut = vec![2.0 * t; g.len()];
        let utt = vec![2.0; g.len()];
        let pu = radial_operator_apply(&BackgroundSpec::minkowski(), g, t, &u, &ut, &utt).unwrap();
        for v in &pu {
            assert!((v + 2.0).abs() < 1e-9);
        }
    }

    #[test]
    fn coarse_grid_rejected() {
        assert!(matches!(RadialGrid::new(1.0, 4), Err(Error::Grid(_))));
    }

    #[test]
    fn zero_amplitude_is_bitwise_flat() {
        let g = grid();
        let u: Vec<f64> = g.radii().iter().map(|r| (-r * r).exp()).collect();
        let ut: Vec<f64> = g.radii().iter().map(|r| 0.3 * (-r * r).exp()).collect();
        let utt = vec![0.1; g.len()];
        let flat = radial_operator_apply(&BackgroundSpec::minkowski(), g, 0.0, &u, &ut, &utt).unwrap();
        let zero = builtin_background("composite", &[0.0, 1.0, 0.0, 2.0, 0.0, 0.0]).unwrap();
        let pz = radial_operator_apply(&zero, g, 0.0, &u, &ut, &utt).unwrap();
        assert_eq!(flat, pz);
    }

    #[test]
    fn operator_is_continuous_in_delta() {
        let g = grid();
        let u: Vec<f64> = g.radii().iter().map(|r| (-r * r).exp()).collect();
        let z = vec![0.0; g.len()];
        let flat = radial_operator_apply(&BackgroundSpec::minkowski(), g, 0.0, &u, &z, &z).unwrap();
        let mut prev = f64::INFINITY;
        for delta in [1e-2, 1e-3, 1e-4] {
            let s = builtin_background("long-range-power", &[delta, 1.0]).unwrap();
            let pu = radial_operator_apply(&s, g, 0.0, &u, &z, &z).unwrap();
            let diff = pu.iter().zip(&flat).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            assert!(diff < prev);
            assert!(diff / delta < 50.0);
            prev = diff;
        }
    }

    /// Hand-derived `P u` for a static Gaussian on the long-range background:
    /// `G^rr (u'' + 2u'/r) + (G^rr)' u'` with `G^rr = 1/(1 - δ w)`, `w = <r>^{-κ}`.
    fn long_range_gaussian_oracle(delta: f64, kappa: f64, r: f64) -> f64 {
        let u1 = -2.0 * r * (-r * r).exp();
        let u2 = (4.0 * r * r - 2.0) * (-r * r).exp();
        let br = (1.0 + r * r).sqrt();
        let w = br.powf(-kappa);
        let dw = -kappa * r * br.powf(-kappa - 2.0);
        let grr = 1.0 / (1.0 - delta * w);
        let dgrr = delta * dw / ((1.0 - delta * w) * (1.0 - delta * w));
        grr * (u2 + 2.0 * u1 / r) + dgrr * u1
    }

    #[test]
    fn long_range_operator_matches_symbolic_oracle() {
        let spec = builtin_background("long-range-power", &[0.2, 1.0]).unwrap();
        let points = [0.4, 0.8, 1.2, 1.6, 2.0];
        let mut errs = Vec::new();
        for n in [200usize, 400, 800] {
            let g = RadialGrid::new(8.0, n).unwrap();
            let u: Vec<f64> = g.radii().iter().map(|r| (-r * r).exp()).collect();
            let z = vec![0.0; g.len()];
            let pu = radial_operator_apply(&spec, g, 0.0, &u, &z, &z).unwrap();
            let mut e: f64 = 0.0;
            for &r in &points {
                let i = (r / g.dr()).round() as usize;
                e = e.max((pu[i] - long_range_gaussian_oracle(0.2, 1.0, g.r(i))).abs());
            }
            errs.push(e);
        }
        assert!(errs[0] < 1e-2);
        let r1 = errs[0] / errs[1];
        let r2 = errs[1] / errs[2];
        assert!((r1 - 4.0).abs() < 0.8 && (r2 - 4.0).abs() < 0.8, "{errs:?}");
    }

    #[test]
    fn not_lorentzian_detected() {
        let spec = builtin_background("long-range-power", &[-2.0, 1.0]).unwrap();
        // g_tt = -1 + 2<r>^-1 > 0 at the origin
        assert!(matches!(RadialOperator::new(&spec, grid(), 0.0), Err(Error::NotLorentzian { .. })));
    }

    #[test]
    fn max_speed_flat_and_perturbed() {
        let g = grid();
        assert_eq!(BackgroundSpec::minkowski().max_speed(&g, &[0.0]).unwrap(), 1.0);
        let s = builtin_background("long-range-power", &[0.1, 1.0]).unwrap();
        let c = s.max_speed(&g, &[0.0]).unwrap();
        let expected = 1.1 * ((1.0f64 + 0.1) / (1.0 - 0.1)).sqrt();
        assert!((c - expected).abs() < 1e-12);
    }

    #[test]
    fn time_dependent_coefficients_enter_through_dt_terms() {
        let mut spec = BackgroundSpec::minkowski();
        spec.long_range.g00 = Profile::Pulsating { amp: 0.1, kappa: 1.0, omega: 2.0 };
        assert!(!spec.is_static());
        let g = grid();
        let t = 0.4;
        let u = vec![0.0; g.len()];
        let ut = vec![1.0; g.len()];
        let utt = vec![0.0; g.len()];
        let pu = radial_operator_apply(&spec, g, t, &u, &ut, &utt).unwrap();
        // d_t(G^tt) u_t with G^tt = -1/(1 - g00)... here g_tt = -1 + g00
        for i in [0usize, 10, 50] {
            let r = g.r(i);
            let gtt = |t: f64| 1.0 / (-1.0 + 0.1 * (1.0 + r * r).sqrt().recip() * (2.0 * t).cos());
            let d = (gtt(t + 1e-6) - gtt(t - 1e-6)) / 2e-6;
            assert!((pu[i] - d).abs() < 1e-6, "{} vs {d}", pu[i]);
        }
    }

    #[test]
    fn hypotheses_minkowski() {
        let rep = verify_hypotheses(&BackgroundSpec::minkowski(), 10, &HypothesisOptions::default()).unwrap();
        assert!(rep.pass());
        assert!(rep.rows.iter().all(|r| r.norm_at_j == 0.0 && r.norm_at_2j == 0.0));
    }

    #[test]
    fn hypotheses_long_range_decaying() {
        let delta = 0.05;
        let spec = builtin_background("long-range-power", &[delta, 1.0]).unwrap();
        let rep = verify_hypotheses(&spec, 12, &HypothesisOptions::default()).unwrap();
        assert!(rep.pass(), "{:?}", rep.rows.iter().filter(|r| !r.pass).collect::<Vec<_>>());
        let g00 = rep.row("g0.00", 0).unwrap();
        assert!(g00.norm_at_j <= 4.0 * delta);
        // oracle: dense sampling of sup |φ_j| δ <r>^{-1} per block, independent of the block sampler
        let mut oracle = 0.0;
        for j in 0..=24usize {
            let mut sup: f64 = 0.0;
            for k in 0..20000 {
                let r = (k as f64 / 20000.0) * 2f64.powi(j as i32 + 1);
                sup = sup.max(phi(j, r).abs() * delta / (1.0 + r * r).sqrt());
            }
            oracle += sup;
        }
        assert!((g00.norm_at_2j - oracle).abs() < 2e-3 * oracle, "{} vs {oracle}", g00.norm_at_2j);
    }

    #[test]
    fn hypotheses_long_range_nondecaying_fails() {
        let spec = builtin_background("long-range-power", &[0.05, 0.0]).unwrap();
        let rep = verify_hypotheses(&spec, 10, &HypothesisOptions::default()).unwrap();
        assert!(!rep.pass());
        let g00 = rep.row("g0.00", 0).unwrap();
        assert!(!g00.pass);
        // linear divergence in the number of blocks
        assert!((g00.norm_at_2j / g00.norm_at_j - 21.0 / 11.0).abs() < 0.05);
    }

    #[test]
    fn hypotheses_short_range_bump() {
        let spec = builtin_background("short-range-bump", &[0.1, 2.0]).unwrap();
        let rep = verify_hypotheses(&spec, 8, &HypothesisOptions::default()).unwrap();
        assert!(rep.pass());
        let row = rep.row("g1.00", 0).unwrap();
        assert_eq!(row.norm_at_j, row.norm_at_2j);
        assert!(row.norm_at_j > 0.0);
    }

    #[test]
    fn hypotheses_lower_order_and_composite() {
        let spec = builtin_background("lower-order", &[0.05, 0.05]).unwrap();
        assert!(verify_hypotheses(&spec, 10, &HypothesisOptions::default()).unwrap().pass());
        let spec = builtin_background("composite", &[0.05, 1.0, 0.05, 2.0, 0.02, 0.02]).unwrap();
        assert!(verify_hypotheses(&spec, 10, &HypothesisOptions::default()).unwrap().pass());
    }

    #[test]
    fn hypothesis_norms_scale_linearly() {
        let opts = HypothesisOptions::default();
        let a = verify_hypotheses(&builtin_background("composite", &[0.01, 1.0, 0.02, 2.0, 0.01, 0.01]).unwrap(), 8, &opts).unwrap();
        let b = verify_hypotheses(&builtin_background("composite", &[0.03, 1.0, 0.06, 2.0, 0.03, 0.03]).unwrap(), 8, &opts).unwrap();
        for (x, y) in a.rows.iter().zip(&b.rows) {
            if x.norm_at_j > 1e-12 {
                assert!((y.norm_at_j / x.norm_at_j - 3.0).abs() < 1e-4, "{} {}", x.component, x.order);
            }
        }
    }

    #[test]
    fn non_finite_profile_is_an_evaluation_error() {
        let mut spec = BackgroundSpec::minkowski();
        spec.c = Profile::PowerDecay { amp: f64::INFINITY, kappa: 3.0 };
        assert!(matches!(
            verify_hypotheses(&spec, 4, &HypothesisOptions::default()),
            Err(Error::Evaluation(_))
        ));
    }
}
