//! Singularly weighted norms
//!
//! ```text
//! Z_J     = sup_t ( ||rho0^{-1/2} J_y||^2 + ||rho0^{1/2} theta||^2 )
//! Z_theta = sup_t ||rho0^{1-gamma/2} theta||^2 + int_0^t ||rho0^{(1-gamma)/2} theta||^2
//! Z_G     = sup_t ||rho0^{-gamma/2} G||^2     + int_0^t ||rho0^{-(gamma+1)/2} G||^2
//! ```
//!
//! with spatial integrals over the whole truncated domain.

use crate::grid::Grid;
use crate::params::PhysParams;
use crate::profiles::DensityProfile;
use crate::quadrature::{derivative, trapezoid_by};
use crate::state::SimState;
use serde::{Deserialize, Serialize};

/// Spatial pieces of the three norms at one instant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormPieces {
    pub j_sup: f64,
    pub theta_sup: f64,
    pub theta_rate: f64,
    pub g_sup: f64,
    pub g_rate: f64,
}

pub fn norm_pieces(state: &SimState, g: &[f64], profile: &DensityProfile, grid: &Grid, params: &PhysParams) -> NormPieces {
    let gamma = params.gamma();
    let h = grid.h();
    let all = 0..=grid.cells();
    let rho = &profile.rho0;
    let jy = derivative(&state.j, h);
    let th = &state.theta;
    NormPieces {
        j_sup: trapezoid_by(all.clone(), h, |i| jy[i] * jy[i] / rho[i] + rho[i] * th[i] * th[i]),
        theta_sup: trapezoid_by(all.clone(), h, |i| rho[i].powf(2.0 - gamma) * th[i] * th[i]),
        theta_rate: trapezoid_by(all.clone(), h, |i| rho[i].powf(1.0 - gamma) * th[i] * th[i]),
        g_sup: trapezoid_by(all.clone(), h, |i| rho[i].powf(-gamma) * g[i] * g[i]),
        g_rate: trapezoid_by(all, h, |i| rho[i].powf(-gamma - 1.0) * g[i] * g[i]),
    }
}

/// Running values of `Z_J`, `Z_theta`, `Z_G`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct WeightedNorms {
    pub j_sup: f64,
    pub theta_sup: f64,
    pub theta_int: f64,
    pub g_sup: f64,
    pub g_int: f64,
    last: Option<NormPieces>,
}

impl WeightedNorms {
    /// Folds in the state reached after a step of length `dt`; the first call
    /// records the initial instant and ignores `dt`.
    pub fn update(&mut self, state: &SimState, g: &[f64], profile: &DensityProfile, grid: &Grid, params: &PhysParams, dt: f64) {
        let p = norm_pieces(state, g, profile, grid, params);
        if let Some(prev) = self.last {
            self.theta_int += 0.5 * dt * (prev.theta_rate + p.theta_rate);
            self.g_int += 0.5 * dt * (prev.g_rate + p.g_rate);
        }
        self.j_sup = self.j_sup.max(p.j_sup);
        self.theta_sup = self.theta_sup.max(p.theta_sup);
        self.g_sup = self.g_sup.max(p.g_sup);
        self.last = Some(p);
    }

    pub fn z_j(&self) -> f64 {
        self.j_sup
    }

    pub fn z_theta(&self) -> f64 {
        self.theta_sup + self.theta_int
    }

    pub fn z_g(&self) -> f64 {
        self.g_sup + self.g_int
    }
}
