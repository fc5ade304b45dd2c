//! Ground states and virial diagnostics for the radial 2D eigenproblem
//! `Δu + Γ f(u²) u = λu` with `‖u‖₂ = 1`.
//!
//! - [`model`]: the nonlinearities and the scalar inequalities behind the bounds.
//! - [`grid`]: radial mesh, quadrature, and the fourth-order kinetic form.
//! - [`energy`]: energy, eigenvalue, virial ratio and identity residuals.
//! - [`solver`]: normalised gradient flow and threshold estimation.
//! - [`sweep`]: Γ sweeps and the asymptotic verdicts built on them.

// `!(x > 0.0)` is deliberate throughout: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod banded;
pub mod energy;
pub mod error;
pub mod grid;
pub mod model;
pub mod solver;
pub mod sweep;

pub use error::{Error, Result};
pub use grid::{Profile, RadialGrid};
pub use model::Nonlinearity;
