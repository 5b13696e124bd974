//! Measured constants of the weighted Sobolev inequalities on `R^3`
//!
//! ```text
//! ‖r^β u‖_{L^q_r L^∞_ω(r ≥ R+1)} ≤ C Σ_{|μ|≤2} ‖r^{β-2/p+2/q} Y^μ u‖_{L^p_r L²_ω(r ≥ R)},  2 ≤ p ≤ q ≤ ∞
//! ‖r^β u‖_{L^q_r L^4_ω(r ≥ R+1)} ≤ C Σ_{|μ|≤1} ‖r^{β-2/p+2/q} Y^μ u‖_{L^p_r L²_ω(r ≥ R)},  2 ≤ p ≤ q ≤ 4
//! ```
//!
//! with `Y = {∇, Ω}`, over separable test functions `g(r) Y_ℓ(ω)`. Each
//! `Y_ℓ` is a normalized solid harmonic `H(x)/r^ℓ`, so all derivatives are
//! evaluated exactly in Cartesian coordinates.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::error::{Error, Result};
use crate::math::{abs, cos, exp, gauss_legendre, japanese, powf, sin, sqrt};

/// Homogeneous polynomial in `(x, y, z)`.
#[derive(Debug, Clone, PartialEq)]
struct Poly {
    terms: Vec<(f64, [u32; 3])>,
}

impl Poly {
    fn eval(&self, x: [f64; 3]) -> f64 {
        self.terms
            .iter()
            .map(|(c, e)| c * crate::math::powi(x[0], e[0] as i32) * crate::math::powi(x[1], e[1] as i32) * crate::math::powi(x[2], e[2] as i32))
            .sum()
    }

    fn derivative(&self, axis: usize) -> Poly {
        let terms = self
            .terms
            .iter()
            .filter(|(_, e)| e[axis] > 0)
            .map(|(c, e)| {
                let mut e2 = *e;
                e2[axis] -= 1;
                (c * e[axis] as f64, e2)
            })
            .collect();
        Poly { terms }
    }
}

/// Real spherical harmonics used by the test family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Harmonic {
    /// `√((2ℓ+1)/4π) P_ℓ(cos θ)`, `ℓ ≤ 4`
    Zonal(u32),
    /// `√(15/4π) xy/r²`
    Xy,
}

impl Harmonic {
    pub const ALL: [Harmonic; 6] =
        [Harmonic::Zonal(0), Harmonic::Zonal(1), Harmonic::Zonal(2), Harmonic::Zonal(3), Harmonic::Zonal(4), Harmonic::Xy];

    pub fn degree(&self) -> u32 {
        match self {
            Harmonic::Zonal(l) => *l,
            Harmonic::Xy => 2,
        }
    }

    fn solid(&self) -> Poly {
        let raw: Vec<(f64, [u32; 3])> = match self {
            Harmonic::Zonal(0) => vec![(1.0, [0, 0, 0])],
            Harmonic::Zonal(1) => vec![(1.0, [0, 0, 1])],
            Harmonic::Zonal(2) => vec![(1.0, [0, 0, 2]), (-0.5, [2, 0, 0]), (-0.5, [0, 2, 0])],
            Harmonic::Zonal(3) => vec![(1.0, [0, 0, 3]), (-1.5, [2, 0, 1]), (-1.5, [0, 2, 1])],
            Harmonic::Zonal(_) => vec![
                (1.0, [0, 0, 4]),
                (-3.0, [2, 0, 2]),
                (-3.0, [0, 2, 2]),
                (0.375, [4, 0, 0]),
                (0.375, [0, 4, 0]),
                (0.75, [2, 2, 0]),
            ],
            Harmonic::Xy => vec![(1.0, [1, 1, 0])],
        };
        let norm = match self {
            Harmonic::Zonal(l) => sqrt((2.0 * *l as f64 + 1.0) / (4.0 * PI)),
            Harmonic::Xy => sqrt(15.0 / (4.0 * PI)),
        };
        Poly { terms: raw.into_iter().map(|(c, e)| (c * norm, e)).collect() }
    }

    pub fn label(&self) -> alloc::string::String {
        match self {
            Harmonic::Zonal(l) => format!("Y{l}0"),
            Harmonic::Xy => "Yxy".into(),
        }
    }
}

/// `(‖Y‖_{L²_ω}, ‖Y‖_{L⁴_ω}, ‖Y‖_{L^∞_ω})` for [`Harmonic::ALL`], from [`angular_table`].
pub const ANGULAR_NORMS: [(f64, f64, f64); 6] = [
    (1.0, 0.5311259660135992, 0.28209479177387814),
    (1.0, 0.61519905583723489, 0.48860251190291992),
    (1.0, 0.64260757216655551, 0.63078313050504009),
    (1.0, 0.65826352969526092, 0.74635266518023080),
    (1.0, 0.66905521009906310, 0.84628437532163447),
    (1.0, 0.64260757216655406, 0.54627421529603970),
];

/// Gauss–Legendre in `cos θ` × uniform in `φ`: nodes on `S²` and weights summing to `4π`.
pub fn sphere_quadrature(n_theta: usize, n_phi: usize) -> Vec<([f64; 3], f64)> {
    let (x, w) = gauss_legendre(n_theta);
    let mut out = Vec::with_capacity(n_theta * n_phi);
    for (ct, wt) in x.iter().zip(&w) {
        let st = sqrt((1.0 - ct * ct).max(0.0));
        for k in 0..n_phi {
            let ph = 2.0 * PI * k as f64 / n_phi as f64;
            out.push(([st * cos(ph), st * sin(ph), *ct], wt * 2.0 * PI / n_phi as f64));
        }
    }
    out
}

/// Regenerates [`ANGULAR_NORMS`]: quadrature for `L²`, `L⁴`, and a dense
/// `θ, φ` scan refined by golden-section search for `L^∞`.
pub fn angular_table() -> Vec<(f64, f64, f64)> {
    let quad = sphere_quadrature(24, 48);
    Harmonic::ALL
        .iter()
        .map(|h| {
            let poly = h.solid();
            let (mut l2, mut l4) = (0.0, 0.0);
            for (x, w) in &quad {
                let y = poly.eval(*x);
                l2 += w * y * y;
                l4 += w * y * y * y * y;
            }
            let at = |t: f64, p: f64| abs(poly.eval([sin(t) * cos(p), sin(t) * sin(p), cos(t)]));
            let mut sup: f64 = 0.0;
            let n = 400;
            for i in 0..=n {
                for k in 0..n {
                    let (t, p) = (PI * i as f64 / n as f64, 2.0 * PI * k as f64 / n as f64);
                    sup = sup.max(at(t, p));
                }
            }
            // the maxima of these harmonics sit on the poles or at θ = π/2, φ = π/4
            sup = sup.max(at(0.0, 0.0)).max(at(PI / 2.0, PI / 4.0));
            (sqrt(l2), sqrt(sqrt(l4)), sup)
        })
        .collect()
}

/// Radial factor of a test function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RadialProfile {
    /// `exp(-((r - center)/width)^2)`
    Gaussian { center: f64, width: f64 },
    /// `exp(1 - 1/(1 - s^2))`, `s = (r - center)/width`
    Bump { center: f64, width: f64 },
    /// `<r>^{-power}`
    PowerTail { power: f64 },
}

impl RadialProfile {
    /// `(g, g', g'')` at `r`.
    pub fn jet(&self, r: f64) -> (f64, f64, f64) {
        match *self {
            RadialProfile::Gaussian { center, width } => {
                let s = (r - center) / width;
                let g = exp(-s * s);
                let d1 = -2.0 * s / width * g;
                let d2 = (4.0 * s * s - 2.0) / (width * width) * g;
                (g, d1, d2)
            }
            RadialProfile::Bump { center, width } => {
                let s = (r - center) / width;
                if abs(s) >= 1.0 {
                    return (0.0, 0.0, 0.0);
                }
                let d = 1.0 - s * s;
                let g = exp(1.0 - 1.0 / d);
                // h = 1 - 1/d, h' = -2s/d², h'' = -2/d² - 8s²/d³ (in s)
                let h1 = -2.0 * s / (d * d);
                let h2 = -2.0 / (d * d) - 8.0 * s * s / (d * d * d);
                (g, g * h1 / width, g * (h1 * h1 + h2) / (width * width))
            }
            RadialProfile::PowerTail { power } => {
                let b = japanese(r);
                let g = powf(b, -power);
                let d1 = -power * r * powf(b, -power - 2.0);
                let d2 = -power * powf(b, -power - 2.0) + power * (power + 2.0) * r * r * powf(b, -power - 4.0);
                (g, d1, d2)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TestFunction {
    pub radial: RadialProfile,
    pub harmonic: Harmonic,
}

/// Gaussians, bumps and power tails against every harmonic.
pub fn default_family(r_inner: f64) -> Vec<TestFunction> {
    let radials = [
        RadialProfile::Gaussian { center: r_inner + 2.0, width: 1.0 },
        RadialProfile::Gaussian { center: r_inner + 6.0, width: 3.0 },
        RadialProfile::Bump { center: r_inner + 1.5, width: 1.2 },
        RadialProfile::Bump { center: 2.0 * r_inner + 8.0, width: 4.0 },
        RadialProfile::PowerTail { power: 3.0 },
        RadialProfile::PowerTail { power: 5.0 },
    ];
    let mut out = Vec::new();
    for radial in radials {
        for harmonic in Harmonic::ALL {
            out.push(TestFunction { radial, harmonic });
        }
    }
    out
}

/// Which inequality is measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SobolevVariant {
    /// `L^∞_ω` on the left, `|μ| ≤ 2` on the right, `2 ≤ p ≤ q ≤ ∞`.
    Infinity,
    /// `L⁴_ω` on the left, `|μ| ≤ 1` on the right, `2 ≤ p ≤ q ≤ 4`.
    Four,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SobolevOptions {
    /// Outer truncation radius of both integrals.
    pub r_outer: f64,
    /// Radial intervals on `[R, r_outer]`; the other integrals reuse the spacing.
    pub n_r: usize,
    /// The right side is taken over `r ≥ R + rhs_offset` (0 as in the inequality).
    pub rhs_offset: f64,
    pub n_theta: usize,
    pub n_phi: usize,
}

impl Default for SobolevOptions {
    fn default() -> Self {
        Self { r_outer: 81.0, n_r: 1600, rhs_offset: 0.0, n_theta: 10, n_phi: 20 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SobolevMeasurement {
    /// `max` of `LHS/RHS` over the family.
    pub constant: f64,
    pub ratios: Vec<f64>,
}

/// `u = G(r) H(x)` with `G = g r^{-ℓ}`: value, gradient, Hessian at `x`.
struct Evaluator {
    poly: Poly,
    grad: [Poly; 3],
    hess: [[Poly; 3]; 3],
    degree: i32,
}

impl Evaluator {
    fn new(h: Harmonic) -> Self {
        let poly = h.solid();
        let grad = [poly.derivative(0), poly.derivative(1), poly.derivative(2)];
        let hess = [
            [grad[0].derivative(0), grad[0].derivative(1), grad[0].derivative(2)],
            [grad[1].derivative(0), grad[1].derivative(1), grad[1].derivative(2)],
            [grad[2].derivative(0), grad[2].derivative(1), grad[2].derivative(2)],
        ];
        Self { poly, grad, hess, degree: h.degree() as i32 }
    }

    #[allow(clippy::type_complexity)]
    fn eval(&self, g: (f64, f64, f64), r: f64, x: [f64; 3]) -> (f64, [f64; 3], [[f64; 3]; 3]) {
        let l = self.degree as f64;
        let ri = crate::math::powi(r, -self.degree);
        let gg = g.0 * ri;
        let g1 = g.1 * ri - l * g.0 * ri / r;
        let g2 = g.2 * ri - 2.0 * l * g.1 * ri / r + l * (l + 1.0) * g.0 * ri / (r * r);
        let h = self.poly.eval(x);
        let dh = [self.grad[0].eval(x), self.grad[1].eval(x), self.grad[2].eval(x)];
        let n = [x[0] / r, x[1] / r, x[2] / r];
        let u = gg * h;
        let mut grad = [0.0; 3];
        for i in 0..3 {
            grad[i] = g1 * n[i] * h + gg * dh[i];
        }
        let mut hess = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                let delta = if i == j { 1.0 } else { 0.0 };
                hess[i][j] = (g2 * n[i] * n[j] + g1 * (delta - n[i] * n[j]) / r) * h
                    + g1 * (n[i] * dh[j] + n[j] * dh[i])
                    + gg * self.hess[i][j].eval(x);
            }
        }
        (u, grad, hess)
    }
}

const ROTATIONS: [(usize, usize); 3] = [(0, 1), (0, 2), (1, 2)];

/// All `Y^μ u` for `|μ| ≤ order` at `x`, in a fixed order.
fn y_derivatives(u: f64, d: [f64; 3], h: [[f64; 3]; 3], x: [f64; 3], order: usize, out: &mut Vec<f64>) {
    out.clear();
    out.push(u);
    // first order: ∇ then Ω
    for i in 0..3 {
        out.push(d[i]);
    }
    let omega = |a: usize, b: usize| x[a] * d[b] - x[b] * d[a];
    for &(a, b) in &ROTATIONS {
        out.push(omega(a, b));
    }
    if order < 2 {
        return;
    }
    let delta = |i: usize, j: usize| if i == j { 1.0 } else { 0.0 };
    // ∂_i (Ω_ab u)
    let d_omega = |i: usize, a: usize, b: usize| delta(i, a) * d[b] + x[a] * h[i][b] - delta(i, b) * d[a] - x[b] * h[i][a];
    // outer ∇_i
    for i in 0..3 {
        for j in 0..3 {
            out.push(h[i][j]);
        }
        for &(a, b) in &ROTATIONS {
            out.push(d_omega(i, a, b));
        }
    }
    // outer Ω_cd
    for &(c, e) in &ROTATIONS {
        for j in 0..3 {
            out.push(x[c] * h[e][j] - x[e] * h[c][j]);
        }
        for &(a, b) in &ROTATIONS {
            out.push(x[c] * d_omega(e, a, b) - x[e] * d_omega(c, a, b));
        }
    }
}

fn check_exponents(p: f64, q: f64, variant: SobolevVariant) -> Result<()> {
    let top = match variant {
        SobolevVariant::Infinity => f64::INFINITY,
        SobolevVariant::Four => 4.0,
    };
    if !(2.0 <= p && p <= q && q <= top) || p.is_infinite() {
        return Err(Error::Config(format!("exponents need 2 ≤ p ≤ q ≤ {top} with p finite, got p = {p}, q = {q}")));
    }
    Ok(())
}

/// Trapezoid nodes and weights on `[a, b]` for `r^2 dr`, spacing close to `step`.
fn radial_nodes(a: f64, b: f64, step: f64) -> Vec<(f64, f64)> {
    let n = (crate::math::floor((b - a) / step + 0.5) as usize).max(1);
    let h = (b - a) / n as f64;
    (0..=n)
        .map(|i| {
            let r = a + h * i as f64;
            let w = if i == 0 || i == n { 0.5 * h } else { h };
            (r, w * r * r)
        })
        .collect()
}

/// `‖ (w_i, f_i) ‖_{L^q}` from trapezoid weights; `q = ∞` takes the maximum.
fn lq(values: impl Iterator<Item = (f64, f64)>, q: f64) -> f64 {
    if q.is_infinite() {
        values.map(|(_, f)| abs(f)).fold(0.0, f64::max)
    } else {
        powf(values.map(|(w, f)| w * powf(abs(f), q)).sum::<f64>(), 1.0 / q)
    }
}

/// `(LHS, RHS)` for one test function.
pub fn sobolev_sides(
    f: &TestFunction,
    beta: f64,
    p: f64,
    q: f64,
    r_inner: f64,
    variant: SobolevVariant,
    opts: &SobolevOptions,
) -> Result<(f64, f64)> {
    check_exponents(p, q, variant)?;
    if r_inner < 1.0 {
        return Err(Error::Config(format!("R ≥ 1 required, got {r_inner}")));
    }
    let index = Harmonic::ALL.iter().position(|h| *h == f.harmonic).unwrap_or(0);
    let (_, l4, linf) = ANGULAR_NORMS[index];
    let angular = match variant {
        SobolevVariant::Infinity => linf,
        SobolevVariant::Four => l4,
    };
    if !(opts.r_outer > r_inner + 1.0 + opts.rhs_offset) || opts.n_r == 0 {
        return Err(Error::Config(format!("outer radius {} too small", opts.r_outer)));
    }
    // one spacing for every integral, so nested domains share their nodes
    let step = (opts.r_outer - r_inner) / opts.n_r as f64;
    let lhs = lq(
        radial_nodes(r_inner + 1.0, opts.r_outer, step).into_iter().map(|(r, w)| (w, powf(r, beta) * f.radial.jet(r).0 * angular)),
        q,
    );
    let order = match variant {
        SobolevVariant::Infinity => 2,
        SobolevVariant::Four => 1,
    };
    let gamma = beta - 2.0 / p + if q.is_infinite() { 0.0 } else { 2.0 / q };
    let eval = Evaluator::new(f.harmonic);
    let quad = sphere_quadrature(opts.n_theta, opts.n_phi);
    let nodes = radial_nodes(r_inner + opts.rhs_offset, opts.r_outer, step);
    let terms = if order == 2 { 43 } else { 7 };
    // per μ: Σ_i w_i (r^γ ‖Y^μ u‖_{L²_ω})^p
    let mut acc = vec![0.0; terms];
    let mut ys = Vec::with_capacity(terms);
    let mut sq = vec![0.0; terms];
    for (r, w) in nodes {
        let g = f.radial.jet(r);
        sq.iter_mut().for_each(|s| *s = 0.0);
        for (omega, wq) in &quad {
            let x = [r * omega[0], r * omega[1], r * omega[2]];
            let (u, d, h) = eval.eval(g, r, x);
            y_derivatives(u, d, h, x, order, &mut ys);
            for (s, y) in sq.iter_mut().zip(&ys) {
                *s += wq * y * y;
            }
        }
        let rg = powf(r, gamma);
        for (a, s) in acc.iter_mut().zip(&sq) {
            *a += w * powf(rg * sqrt(*s), p);
        }
    }
    let rhs = acc.iter().map(|a| powf(*a, 1.0 / p)).sum();
    Ok((lhs, rhs))
}

/// Largest `LHS/RHS` over `family`.
pub fn sobolev_test(
    family: &[TestFunction],
    beta: f64,
    p: f64,
    q: f64,
    r_inner: f64,
    variant: SobolevVariant,
    opts: &SobolevOptions,
) -> Result<SobolevMeasurement> {
    let mut ratios = Vec::with_capacity(family.len());
    for f in family {
        let (lhs, rhs) = sobolev_sides(f, beta, p, q, r_inner, variant, opts)?;
        ratios.push(if rhs > 0.0 { lhs / rhs } else { 0.0 });
    }
    let constant = ratios.iter().cloned().fold(0.0, f64::max);
    Ok(SobolevMeasurement { constant, ratios })
}
