//! Numerics laboratory for positive solutions of the singular elliptic
//! equation Δu = u^τ with τ < 0.
//!
//! The crate is organised around the objects it computes with:
//!
//! * [`core_model`] — problem configuration, closed-form solution families,
//!   residual evaluators, scaling transforms, and scalar threshold formulas.
//! * [`radial`] — radial ODE machinery: shooting, boundary-value solves, the
//!   Emden–Fowler change of variables, Euler-equation zeros, and the periodic
//!   limit equation.
//! * [`elliptic_fd`] — finite-difference Dirichlet solver on masked grids
//!   (monotone sub/super bracketing, safeguarded Newton, constrained energy
//!   minimisation) plus touchdown continuation.
//! * [`auditor`] — numerical verification of the a-priori estimates on
//!   closed-form and computed solutions.
//! * [`spectral`] — stability and Morse-index analysis of the linearised
//!   operator −Δ + τ u^{τ−1}.
//! * [`potential`] — Riesz potentials, the nonlocal integral equation,
//!   Kelvin transform, reflection identities and moving-plane diagnostics.

pub mod auditor;
pub mod core_model;
pub mod elliptic_fd;
mod error;
pub mod potential;
pub mod radial;
pub mod spectral;

pub use error::{Error, Result};
