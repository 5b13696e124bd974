//! Pointwise magnitudes of space-time derivatives of a radial field.
//!
//! For `u(t, |x|)` the Cartesian derivative tensors have Frobenius norms
//!
//! ```text
//! |∂u|²  = u_t² + u_r²
//! |∂²u|² = u_tt² + 2 u_tr² + u_rr² + 2 (u_r/r)²
//! |∂³u|² = u_ttt² + 3 u_ttr² + 3 (u_trr² + 2 (u_tr/r)²)
//!        + u_rrr² + 2 (u_rr/r - u_r/r²)² + 4 ((u_rr - u_r/r)/r)²
//! ```
//!
//! with the regular limits `u_r/r → u_rr` and vanishing correction terms at
//! `r = 0`. Rotations annihilate radial fields, so `|Z^{≤k} u|` is
//! `Σ_{m≤k} |∂^m u|`. Time derivatives beyond `u_t` come from differences
//! of stored slices.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::grid::{Parity, RadialGrid};
use crate::math::sqrt;
use crate::norms::mixed::Samples;
use crate::solver::FieldTrajectory;

/// Second-order time derivative of a sequence of slices on a nonuniform grid.
pub fn time_derivative(times: &[f64], slices: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = slices.len();
    let len = slices.first().map_or(0, Vec::len);
    let mut out = vec![vec![0.0; len]; n];
    if n < 2 {
        return out;
    }
    if n == 2 {
        let h = times[1] - times[0];
        for i in 0..len {
            let d = (slices[1][i] - slices[0][i]) / h;
            out[0][i] = d;
            out[1][i] = d;
        }
        return out;
    }
    let three = |k0: usize, at: usize, out: &mut Vec<f64>| {
        // derivative at times[at] of the quadratic through k0, k0+1, k0+2
        let (t0, t1, t2) = (times[k0], times[k0 + 1], times[k0 + 2]);
        let x = times[at];
        let c0 = ((x - t1) + (x - t2)) / ((t0 - t1) * (t0 - t2));
        let c1 = ((x - t0) + (x - t2)) / ((t1 - t0) * (t1 - t2));
        let c2 = ((x - t0) + (x - t1)) / ((t2 - t0) * (t2 - t1));
        for i in 0..len {
            out[i] = c0 * slices[k0][i] + c1 * slices[k0 + 1][i] + c2 * slices[k0 + 2][i];
        }
    };
    for (k, o) in out.iter_mut().enumerate() {
        let k0 = k.saturating_sub(1).min(n - 3);
        three(k0, k, o);
    }
    out
}

/// `|∂^m u|` for `m = 0..=max_order` on the slices `range` of a trajectory.
#[derive(Debug, Clone)]
pub struct DerivativeJet {
    pub orders: Vec<Samples>,
}

fn div_r(grid: &RadialGrid, f: &[f64], limit: &[f64]) -> Vec<f64> {
    (0..f.len()).map(|i| if i == 0 { limit[0] } else { f[i] / grid.r(i) }).collect()
}

impl DerivativeJet {
    pub fn new(traj: &FieldTrajectory, range: core::ops::Range<usize>, max_order: usize) -> Result<Self> {
        if max_order > 3 {
            return Err(Error::Config(alloc::format!("derivative order {max_order} exceeds 3")));
        }
        if range.end > traj.len() || range.start >= range.end {
            return Err(Error::Range("empty or out-of-bounds slice range".into()));
        }
        let grid = *traj.radial();
        let times: Vec<f64> = traj.times[range.clone()].to_vec();
        let u_tt = if max_order >= 2 { time_derivative(&traj.times, &traj.u_t) } else { Vec::new() };
        let u_ttt = if max_order >= 3 { time_derivative(&traj.times, &u_tt) } else { Vec::new() };
        let mut orders: Vec<Vec<Vec<f64>>> = vec![Vec::with_capacity(range.len()); max_order + 1];
        for k in range {
            let u = &traj.u[k];
            let ut = &traj.u_t[k];
            orders[0].push(u.iter().map(|x| x.abs()).collect());
            if max_order == 0 {
                continue;
            }
            let u_r = grid.d_r(u, Parity::Even);
            let u_rr = grid.d_rr(u, Parity::Even);
            let ur_r = div_r(&grid, &u_r, &u_rr);
            orders[1].push((0..u.len()).map(|i| sqrt(ut[i] * ut[i] + u_r[i] * u_r[i])).collect());
            if max_order == 1 {
                continue;
            }
            let utt = &u_tt[k];
            let u_tr = grid.d_r(ut, Parity::Even);
            orders[2].push(
                (0..u.len())
                    .map(|i| {
                        sqrt(utt[i] * utt[i] + 2.0 * u_tr[i] * u_tr[i] + u_rr[i] * u_rr[i] + 2.0 * ur_r[i] * ur_r[i])
                    })
                    .collect(),
            );
            if max_order == 2 {
                continue;
            }
            let uttt = &u_ttt[k];
            let u_ttr = grid.d_r(utt, Parity::Even);
            let u_trr = grid.d_rr(ut, Parity::Even);
            let utr_r = div_r(&grid, &u_tr, &u_trr);
            let u_rrr = grid.d_r(&u_rr, Parity::Even);
            orders[3].push(
                (0..u.len())
                    .map(|i| {
                        let (a, b) = if i == 0 {
                            (0.0, 0.0)
                        } else {
                            let r = grid.r(i);
                            (u_rr[i] / r - u_r[i] / (r * r), (u_rr[i] - ur_r[i]) / r)
                        };
                        sqrt(
                            uttt[i] * uttt[i]
                                + 3.0 * u_ttr[i] * u_ttr[i]
                                + 3.0 * (u_trr[i] * u_trr[i] + 2.0 * utr_r[i] * utr_r[i])
                                + u_rrr[i] * u_rrr[i]
                                + 2.0 * a * a
                                + 4.0 * b * b,
                        )
                    })
                    .collect(),
            );
        }
        let orders = orders
            .into_iter()
            .map(|values| Samples { grid, times: times.clone(), values })
            .collect();
        Ok(Self { orders })
    }

    /// `Σ_{lo ≤ m ≤ hi} |∂^m u|`.
    pub fn sum(&self, lo: usize, hi: usize) -> Result<Samples> {
        if hi >= self.orders.len() || lo > hi {
            return Err(Error::Config(alloc::format!("orders {lo}..={hi} not available")));
        }
        let mut acc = self.orders[lo].clone();
        for m in lo + 1..=hi {
            acc = acc.add(&self.orders[m])?;
        }
        Ok(acc)
    }
}
