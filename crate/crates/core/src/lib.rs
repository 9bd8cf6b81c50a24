//! Numerical laboratory for the one-dimensional cubic nonlinear Schrödinger
//! equation with a small point impurity at the origin:
//!
//!   i u_t + ½ u_xx + q δ₀(x) u + |u|² u = 0.
//!
//! The crate computes the closed-form nonlinear ground states and their
//! linearized spectral data (generalized kernel, continuum states, impurity
//! scattering coefficients, threshold eigenstates), evolves the PDE directly
//! by Strang splitting with a Crank-Nicolson linear step, and evaluates the
//! breathing-amplitude asymptotics of |u(0,t)| so the two routes can be
//! compared quantitatively. A scenario runner reproduces the reference
//! experiments and emits CSV series plus a JSON manifest of pass/fail checks.

pub mod breathing;
pub mod coercivity;
pub mod error;
pub mod grid;
pub mod ground;
pub mod kaup;
pub mod linalg;
pub mod pde;
pub mod scattering;
pub mod scenario;
pub mod soliton;
pub mod volterra;

#[cfg(test)]
pub(crate) mod testutil;

pub use error::{Error, Result};
pub use grid::{default_grid, make_grid, ComplexField, Grid, Vec2Field};
pub use ground::{ground_state, select_lambda_exact, select_lambda_linear, GroundStateParams};
pub use pde::{evolve, evolve_linear, hamiltonian, EvolveConfig, TimeSeries};
