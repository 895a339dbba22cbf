//! Solver and verification laboratory for the one-dimensional heat-conductive
//! compressible Navier-Stokes equations in Lagrangian coordinates, with a
//! density that is positive everywhere but decays to vacuum at the far field.
//!
//! The unknowns are the Jacobian `J` of the flow map, the velocity `v` and
//! the temperature `theta`, evolving under
//!
//! ```text
//! J_t = v_y
//! rho0 v_t - mu (v_y / J)_y + R (rho0 theta / J)_y = 0
//! c_v rho0 theta_t - kappa (theta_y / J)_y + R rho0 theta v_y / J = mu v_y^2 / J
//! ```
//!
//! Besides the integrator ([`solver`]), the crate computes the conserved
//! energy, the effective viscous flux, the Jacobian representation, entropy
//! fields, singularly weighted norms and De Giorgi level-set energies
//! ([`diagnostics`]), the explicit gap of the iteration lemma ([`degiorgi`]),
//! and checkers for two weighted functional inequalities ([`inequalities`]).

// `!(x > 0.0)` is the idiom used throughout to reject NaN along with
// out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod degiorgi;
pub mod diagnostics;
pub mod error;
pub mod grid;
pub mod inequalities;
pub mod params;
pub mod profiles;
pub mod quadrature;
pub mod solver;
pub mod state;
pub mod tridiag;

pub use error::{Error, Result};
pub use grid::Grid;
pub use params::PhysParams;
pub use state::SimState;
