//! Numerical laboratory for the porous medium / fast diffusion equation
//! u_t = Delta(u^m) on rotationally symmetric model manifolds.
//!
//! The crate has three layers:
//!
//! * infrastructure: cell-centered radial grids (`grid`), model manifolds and
//!   their radial operators (`geometry`), an implicit finite-volume solver
//!   (`solver`), and closed-form reference solutions (`exact`);
//! * derived fields: the pressure-type transform f of a positive solution and
//!   the ratio fields X, Y, Z built from it, together with the parabolic
//!   operator that governs their evolution (`hopf`);
//! * estimates: closed-form sharp bound functions (`bounds`) and pointwise
//!   margin checks of the gradient estimates they come from (`verifier`).
//!
//! Everything is deterministic: no randomness, no platform-dependent
//! iteration order, and fixed stencil choices, so the same inputs reproduce
//! byte-identical reports.

// Validation guards are written as `!(x > 0.0)` on purpose: unlike `x <= 0.0`
// they also catch NaN, which must be rejected everywhere.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod error;
pub mod exact;
pub mod geometry;
pub mod grid;
pub mod hopf;
pub mod numerics;
pub mod solver;
pub mod verifier;

pub use error::{PmeError, Result};
