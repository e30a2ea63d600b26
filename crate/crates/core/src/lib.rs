//! Boundary integral solver for the homogeneous Dirichlet problem of the
//! Yukawa-Beltrami equation `(-Δ_S + k²) u = 0` on multiply-connected
//! regions of the unit sphere.
//!
//! The solution is sought as a double-layer potential whose density solves
//! the second-kind equation `μ/2 + Kμ = g`.  The kernel is built from the
//! conical function `P_{-1/2+iτ}`, evaluated in real arithmetic.

pub mod bie;
pub mod error;
pub mod geometry;
pub mod postproc;
pub mod quadrature;
pub mod specfun;

pub use error::{Error, Result};
