//! Numerical core for the coupled semilinear wave system
//!
//! ```text
//!     P1 u = F_p(v),    P2 v = F_q(u)
//! ```
//!
//! on radially symmetric, asymptotically flat backgrounds in three space
//! dimensions. The crate is `no_std` (it needs `alloc`) and holds only pure
//! computation: exponent calculus, background operators, the method-of-lines
//! solver, dyadic weighted norms and the Picard iteration driver. File
//! formats, configuration and the CLI live in the `coupled-wave-lab` crate.
//!
//! Sign convention: operators are written `P u = d_a(g^{ab} d_b u) + b^a d_a u + c u`
//! with `m = diag(-1, 1, 1, 1)`, so the flat operator is `-u_tt + Δu`. The
//! evolution solves `P u = S` everywhere.

#![no_std]
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop, clippy::excessive_precision)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod backgrounds;
pub mod error;
pub mod exponents;
pub mod grid;
pub mod iteration;
pub mod math;
pub mod norms;
pub mod solver;

pub use error::{Error, Result};
