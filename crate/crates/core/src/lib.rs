//! Numerical and exact tooling for the Lane-Emden equation
//!
//! ```text
//! ψ'' + (2/r) ψ' = -ψⁿ,   ψ(0) = 1, ψ'(0) = 0
//! ```
//!
//! The crate is split along the natural seams of the problem:
//!
//! - [`ode`]: the equation itself, an adaptive Dormand–Prince integrator
//!   started from the regular series at the centre, first-zero detection and
//!   the closed-form solutions for n = 0, 1, 5.
//! - [`reduction`]: the canonical variables of the scaling symmetry, the
//!   reduced first-order equation for `u = ds/dt`, its Abel form for
//!   `y = -1/u`, and numerical round-trip checks tying them back to the
//!   original equation.
//! - [`singular`]: the scale-invariant solution `ψ ∝ r^(-2/(n-1))` and the
//!   action of the scaling group on solutions.
//! - [`algebra`]: an exact rational monomial algebra used to verify the
//!   symmetry condition and to recompute the admitted symmetries by kernel
//!   scans over polynomial ansätze.
//! - [`sweep`]: parameter sweeps over the polytropic index, parallel when the
//!   `parallel` feature is enabled.

// `!(x > 0.0)`-style checks are used on purpose: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod algebra;
mod error;
pub mod fd;
pub mod ode;
pub mod reduction;
mod rk;
pub mod singular;
pub mod sweep;

pub use error::{Error, Result};
pub use ode::{Index, PhaseState, SolverConfig, Termination, Trajectory};
