//! Closed-form radial solutions of the flat homogeneous wave equation.
//!
//! With `w = r u` the radial equation becomes the 1D wave equation on the
//! half line with `w(t, 0) = 0`; odd extension through the origin and
//! d'Alembert's formula give
//!
//! ```text
//! u(t, r) = [W(r + t) + W(r - t)] / (2r) + (1/2r) ∫_{r-t}^{r+t} s g(|s|) ds,   W(s) = s f(|s|).
//! ```

use crate::backgrounds::BackgroundSpec;
use crate::error::{Error, Result};
use crate::math::{abs, gauss_legendre, integrate};
use crate::solver::data::{InitialData, RadialFunction};

/// Below this radius the first term is evaluated as the mean of `W'` over
/// `[t - r, t + r]` to avoid cancellation.
const SMALL_R: f64 = 1e-3;
const PANELS: usize = 64;
const ORDER: usize = 10;

/// `W'(s) = f(|s|) + |s| f'(|s|)`, even in `s`.
fn w_prime(f: &RadialFunction, s: f64) -> f64 {
    let a = abs(s);
    f.value(a) + a * f.derivative(a)
}

fn odd_w(f: &RadialFunction, s: f64) -> f64 {
    s * f.value(abs(s))
}

/// Mean of `h` over `[a, b]` by a single high-order Gauss rule.
fn mean_gl<F: Fn(f64) -> f64>(h: F, a: f64, b: f64) -> f64 {
    let (x, w) = gauss_legendre(ORDER);
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut s = 0.0;
    for (xi, wi) in x.iter().zip(&w) {
        s += wi * h(mid + half * xi);
    }
    0.5 * s
}

/// Value at `(t, r)` of the flat solution with data `(f, g)`, `t ≥ 0`, `r ≥ 0`.
pub fn exact_flat_radial_solution(spec: &BackgroundSpec, data: &InitialData, t: f64, r: f64) -> Result<f64> {
    if !spec.is_flat() {
        return Err(Error::Domain("exact solution requires the flat background".into()));
    }
    if t < 0.0 || r < 0.0 || !t.is_finite() || !r.is_finite() {
        return Err(Error::Domain("exact solution needs t ≥ 0 and r ≥ 0".into()));
    }
    if t == 0.0 {
        return Ok(data.f.value(r));
    }
    let f = &data.f;
    let g = &data.g;
    let first = if r < SMALL_R {
        if r == 0.0 {
            w_prime(f, t)
        } else {
            mean_gl(|s| w_prime(f, s), t - r, t + r)
        }
    } else {
        (odd_w(f, r + t) + odd_w(f, r - t)) / (2.0 * r)
    };
    let second = match g {
        RadialFunction::Zero => 0.0,
        _ => {
            // the odd integrand cancels on [r - t, t - r] when r < t
            let lo = abs(r - t);
            let hi = r + t;
            if r < SMALL_R {
                if r == 0.0 {
                    t * g.value(t)
                } else {
                    // (1/2r)∫_{t-r}^{t+r} s g(s) ds = mean over the interval
                    mean_gl(|s| s * g.value(abs(s)), t - r, t + r)
                }
            } else {
                integrate(|s| s * g.value(s), lo, hi, PANELS, ORDER) / (2.0 * r)
            }
        }
    };
    Ok(first + second)
}
