//! Representation of the Jacobian through
//! `B = exp{(1/mu) int_{-inf}^y rho0 (v - v0) dy'}`:
//!
//! ```text
//! J = B (J0 + (R/mu) int_0^t rho0 theta / B dtau)
//! ```
//!
//! The lower limit `-inf` is replaced by `-L`.

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::params::PhysParams;
use crate::profiles::{DensityProfile, InitialData};
use crate::quadrature::cumulative_trapezoid;
use crate::state::SimState;

/// Running trapezoid-in-time of `rho0 theta / B` at every node.
#[derive(Debug, Clone, PartialEq)]
pub struct JIdentityAccumulator {
    pub t: f64,
    pub integral: Vec<f64>,
    last_integrand: Vec<f64>,
}

pub fn b_field(state: &SimState, v0: &[f64], profile: &DensityProfile, grid: &Grid, mu: f64) -> Vec<f64> {
    let integrand: Vec<f64> = (0..state.len())
        .map(|i| profile.rho0[i] * (state.v[i] - v0[i]))
        .collect();
    cumulative_trapezoid(&integrand, grid.h())
        .into_iter()
        .map(|x| (x / mu).exp())
        .collect()
}

fn integrand(state: &SimState, b: &[f64], profile: &DensityProfile) -> Vec<f64> {
    (0..state.len())
        .map(|i| profile.rho0[i] * state.theta[i] / b[i])
        .collect()
}

impl JIdentityAccumulator {
    pub fn new(initial: &SimState, v0: &[f64], profile: &DensityProfile, grid: &Grid, params: &PhysParams) -> Self {
        let b = b_field(initial, v0, profile, grid, params.mu());
        Self {
            t: initial.t,
            integral: vec![0.0; initial.len()],
            last_integrand: integrand(initial, &b, profile),
        }
    }

    /// Advances the time integral to `state.t`.
    pub fn update(&mut self, state: &SimState, v0: &[f64], profile: &DensityProfile, grid: &Grid, params: &PhysParams) {
        let dt = state.t - self.t;
        let b = b_field(state, v0, profile, grid, params.mu());
        let next = integrand(state, &b, profile);
        for ((acc, a), b) in self.integral.iter_mut().zip(&self.last_integrand).zip(&next) {
            *acc += 0.5 * dt * (a + b);
        }
        self.last_integrand = next;
        self.t = state.t;
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct JIdentity {
    pub b: Vec<f64>,
    pub j_pred: Vec<f64>,
    /// `max_i |J_i - J_pred_i| / J_i`.
    pub residual: f64,
    /// Bound on the neglected `(-inf, -L)` part of the exponent of `B`:
    /// `(1/mu) * tail mass * sup |v - v0|`, when the tail mass is known.
    pub tail_bound: Option<f64>,
}

pub fn j_identity(
    state: &SimState,
    initial: &InitialData,
    profile: &DensityProfile,
    grid: &Grid,
    params: &PhysParams,
    acc: &JIdentityAccumulator,
) -> Result<JIdentity> {
    if acc.t != state.t {
        return Err(Error::Usage(format!(
            "J-identity accumulator is at t = {} but the state is at t = {}",
            acc.t, state.t
        )));
    }
    let b = b_field(state, &initial.v0, profile, grid, params.mu());
    let coef = params.r() / params.mu();
    let j_pred: Vec<f64> = (0..state.len())
        .map(|i| b[i] * (initial.j0[i] + coef * acc.integral[i]))
        .collect();
    let residual = state
        .j
        .iter()
        .zip(&j_pred)
        .map(|(j, p)| (j - p).abs() / j)
        .fold(0.0, f64::max);
    let sup_dv = state
        .v
        .iter()
        .zip(&initial.v0)
        .map(|(v, v0)| (v - v0).abs())
        .fold(0.0, f64::max);
    let tail_bound = profile
        .tail_mass_bound(grid)
        .map(|m| 0.5 * m * sup_dv / params.mu());
    Ok(JIdentity {
        b,
        j_pred,
        residual,
        tail_bound,
    })
}

/// Exponent `(2 sqrt 2 / mu) sqrt(||rho0||_1 E0)` of the two-sided bound on `B`
/// and of the floor `J >= J_lower exp(-exponent)`.
pub fn b_bracket_exponent(mass: f64, e0: f64, mu: f64) -> f64 {
    2.0 * std::f64::consts::SQRT_2 / mu * (mass * e0).sqrt()
}
