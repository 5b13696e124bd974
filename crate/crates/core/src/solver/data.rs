//! Radial initial data profiles and their Sobolev norms.

use alloc::vec::Vec;

use crate::grid::RadialGrid;
use crate::math::{abs, exp, sqrt};

/// Number of widths after which a Gaussian is treated as zero.
pub const GAUSSIAN_CUTOFF_WIDTHS: f64 = 6.0;

/// A smooth, even, radial profile.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RadialFunction {
    Zero,
    /// `amp exp(-((r - center)/width)^2)`
    Gaussian { amp: f64, center: f64, width: f64 },
    /// `amp exp(1 - 1/(1 - s^2))`, `s = (r - center)/width`, zero for `|s| ≥ 1`.
    Bump { amp: f64, center: f64, width: f64 },
}

impl RadialFunction {
    pub fn value(&self, r: f64) -> f64 {
        match *self {
            RadialFunction::Zero => 0.0,
            RadialFunction::Gaussian { amp, center, width } => {
                let s = (r - center) / width;
                amp * exp(-s * s)
            }
            RadialFunction::Bump { amp, center, width } => {
                let s = (r - center) / width;
                if abs(s) >= 1.0 {
                    0.0
                } else {
                    amp * exp(1.0 - 1.0 / (1.0 - s * s))
                }
            }
        }
    }

    /// `d/dr`
    pub fn derivative(&self, r: f64) -> f64 {
        match *self {
            RadialFunction::Zero => 0.0,
            RadialFunction::Gaussian { center, width, .. } => {
                -2.0 * (r - center) / (width * width) * self.value(r)
            }
            RadialFunction::Bump { center, width, .. } => {
                let s = (r - center) / width;
                if abs(s) >= 1.0 {
                    0.0
                } else {
                    let d = 1.0 - s * s;
                    -2.0 * s / (d * d) / width * self.value(r)
                }
            }
        }
    }

    pub fn amplitude(&self) -> f64 {
        match *self {
            RadialFunction::Zero => 0.0,
            RadialFunction::Gaussian { amp, .. } | RadialFunction::Bump { amp, .. } => amp,
        }
    }

    /// Radius beyond which the profile vanishes (Gaussians are cut at six widths).
    pub fn support_radius(&self) -> f64 {
        match *self {
            RadialFunction::Zero => 0.0,
            RadialFunction::Gaussian { center, width, .. } => center + GAUSSIAN_CUTOFF_WIDTHS * width,
            RadialFunction::Bump { center, width, .. } => center + width,
        }
    }

    /// Smooth as a function on `R^3`: centred at the origin or vanishing near it.
    pub fn is_regular(&self) -> bool {
        match *self {
            RadialFunction::Zero => true,
            RadialFunction::Gaussian { center, width, .. } => {
                width > 0.0 && (center == 0.0 || center >= GAUSSIAN_CUTOFF_WIDTHS * width)
            }
            RadialFunction::Bump { center, width, .. } => {
                width > 0.0 && (center == 0.0 || center >= width)
            }
        }
    }

    pub fn scaled(&self, c: f64) -> Self {
        match *self {
            RadialFunction::Zero => RadialFunction::Zero,
            RadialFunction::Gaussian { amp, center, width } => {
                RadialFunction::Gaussian { amp: c * amp, center, width }
            }
            RadialFunction::Bump { amp, center, width } => {
                RadialFunction::Bump { amp: c * amp, center, width }
            }
        }
    }

    pub fn sample(&self, grid: &RadialGrid) -> Vec<f64> {
        grid.radii().iter().map(|&r| self.value(r)).collect()
    }
}

/// Cauchy data `(u(0), u_t(0))` for one field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InitialData {
    pub f: RadialFunction,
    pub g: RadialFunction,
}

impl InitialData {
    pub fn new(f: RadialFunction, g: RadialFunction) -> Self {
        Self { f, g }
    }

    pub fn zero() -> Self {
        Self { f: RadialFunction::Zero, g: RadialFunction::Zero }
    }

    pub fn support_radius(&self) -> f64 {
        self.f.support_radius().max(self.g.support_radius())
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self { f: self.f.scaled(c), g: self.g.scaled(c) }
    }
}

/// Fourth-order central first derivative of an even (`odd = false`) or odd
/// grid function, reflected through the origin. The last two nodes fall back
/// to one-sided second-order stencils.
fn d1_fourth(u: &[f64], h: f64, odd: bool) -> Vec<f64> {
    let n = u.len() - 1;
    let sign = if odd { -1.0 } else { 1.0 };
    let at = |i: isize| -> f64 {
        if i < 0 {
            sign * u[(-i) as usize]
        } else {
            u[i as usize]
        }
    };
    let mut out = Vec::with_capacity(n + 1);
    for i in 0..=n {
        let k = i as isize;
        let v = if i + 2 <= n {
            (at(k - 2) - 8.0 * at(k - 1) + 8.0 * at(k + 1) - at(k + 2)) / (12.0 * h)
        } else if i < n {
            (u[i + 1] - u[i - 1]) / (2.0 * h)
        } else {
            (3.0 * u[n] - 4.0 * u[n - 1] + u[n - 2]) / (2.0 * h)
        };
        out.push(v);
    }
    out
}

/// Fourth-order `f_rr` for an even function.
fn d2_fourth_even(u: &[f64], h: f64) -> Vec<f64> {
    let n = u.len() - 1;
    let at = |i: isize| u[i.unsigned_abs()];
    let mut out = Vec::with_capacity(n + 1);
    for i in 0..=n {
        let k = i as isize;
        let v = if i + 2 <= n {
            (-at(k - 2) + 16.0 * at(k - 1) - 30.0 * at(k) + 16.0 * at(k + 1) - at(k + 2)) / (12.0 * h * h)
        } else if i < n {
            (u[i + 1] - 2.0 * u[i] + u[i - 1]) / (h * h)
        } else {
            (2.0 * u[n] - 5.0 * u[n - 1] + 4.0 * u[n - 2] - u[n - 3]) / (h * h)
        };
        out.push(v);
    }
    out
}

/// `Δf = f_rr + 2 f_r / r`, with the limit `3 f_rr` at the origin.
fn radial_laplacian(grid: &RadialGrid, f: &[f64]) -> Vec<f64> {
    let h = grid.dr();
    let f_r = d1_fourth(f, h, false);
    let f_rr = d2_fourth_even(f, h);
    (0..f.len())
        .map(|i| if i == 0 { 3.0 * f_rr[0] } else { f_rr[i] + 2.0 * f_r[i] / grid.r(i) })
        .collect()
}

/// `‖f‖_{L²(R³)}²` for radial samples by the trapezoid rule in `r^2 dr`.
fn l2_squared(grid: &RadialGrid, f: &[f64]) -> f64 {
    let h = grid.dr();
    let n = grid.n_r;
    let mut s = 0.0;
    for (i, v) in f.iter().enumerate() {
        let r = grid.r(i);
        let w = if i == n { 0.5 } else { 1.0 };
        s += w * v * v * r * r;
    }
    4.0 * core::f64::consts::PI * s * h
}

/// `Σ_{m ≤ k} ‖∇^m f‖²` with `k ≤ 3`, using `‖∇²f‖ = ‖Δf‖` and `‖∇³f‖ = ‖∇Δf‖`.
pub fn sobolev_squared(grid: &RadialGrid, f: &[f64], k: usize) -> f64 {
    let h = grid.dr();
    let mut total = l2_squared(grid, f);
    if k >= 1 {
        total += l2_squared(grid, &d1_fourth(f, h, false));
    }
    if k >= 2 {
        let lap = radial_laplacian(grid, f);
        total += l2_squared(grid, &lap);
        if k >= 3 {
            total += l2_squared(grid, &d1_fourth(&lap, h, false));
        }
    }
    total
}

/// `(‖f‖_{H³}, ‖g‖_{H²})` for radial samples on `grid`.
pub fn data_norm(grid: &RadialGrid, f: &[f64], g: &[f64]) -> (f64, f64) {
    (sqrt(sobolev_squared(grid, f, 3)), sqrt(sobolev_squared(grid, g, 2)))
}
