//! Effective viscous flux `G = mu v_y / J - R rho0 theta / J` and the
//! residual of the parabolic equation it satisfies.

use crate::grid::Grid;
use crate::params::PhysParams;
use crate::profiles::DensityProfile;
use crate::quadrature::derivative;
use crate::state::SimState;

pub fn viscous_flux(state: &SimState, profile: &DensityProfile, grid: &Grid, params: &PhysParams) -> Vec<f64> {
    let vy = derivative(&state.v, grid.h());
    (0..state.len())
        .map(|i| (params.mu() * vy[i] - params.r() * profile.rho0[i] * state.theta[i]) / state.j[i])
        .collect()
}

/// Largest relative defect of `mu v_y = J G + R rho0 theta` over all nodes.
pub fn flux_identity_residual(
    state: &SimState,
    g: &[f64],
    profile: &DensityProfile,
    grid: &Grid,
    params: &PhysParams,
) -> f64 {
    let vy = derivative(&state.v, grid.h());
    (0..state.len())
        .map(|i| {
            let lhs = params.mu() * vy[i];
            let jg = state.j[i] * g[i];
            let p = params.r() * profile.rho0[i] * state.theta[i];
            let scale = lhs.abs().max(jg.abs() + p.abs());
            if scale == 0.0 {
                0.0
            } else {
                (lhs - jg - p).abs() / scale
            }
        })
        .fold(0.0, f64::max)
}

/// Nodal residual of
/// `G_t - (mu/J)(G_y/rho0)_y + kappa(gamma-1)/J (theta_y/J)_y + gamma (v_y/J) G`
/// between two consecutive states: forward difference in time, spatial terms
/// at the later state in conservative flux form. Entries outside the
/// buffer-excluded region are zero.
pub fn flux_equation_residual_field(
    prev: &SimState,
    next: &SimState,
    profile: &DensityProfile,
    grid: &Grid,
    params: &PhysParams,
) -> Vec<f64> {
    let dt = next.t - prev.t;
    let h = grid.h();
    let rho = &profile.rho0;
    let g_prev = viscous_flux(prev, profile, grid, params);
    let g = viscous_flux(next, profile, grid, params);
    let vy = derivative(&next.v, h);
    let j = &next.j;
    let th = &next.theta;
    let (mu, kappa, gamma) = (params.mu(), params.kappa(), params.gamma());
    let n = grid.len();
    let mut out = vec![0.0; n];
    let range = grid.interior();
    let lo = (*range.start()).max(1);
    let hi = (*range.end()).min(n - 2);
    for i in lo..=hi {
        let rp = 0.5 * (rho[i] + rho[i + 1]);
        let rm = 0.5 * (rho[i] + rho[i - 1]);
        let g_diff = ((g[i + 1] - g[i]) / rp - (g[i] - g[i - 1]) / rm) / (h * h);
        let cp = 2.0 / (j[i] + j[i + 1]);
        let cm = 2.0 / (j[i] + j[i - 1]);
        let th_diff = (cp * (th[i + 1] - th[i]) - cm * (th[i] - th[i - 1])) / (h * h);
        out[i] = (g[i] - g_prev[i]) / dt - mu / j[i] * g_diff + kappa * (gamma - 1.0) / j[i] * th_diff
            + gamma * vy[i] / j[i] * g[i];
    }
    out
}

/// Max-norm of [`flux_equation_residual_field`].
pub fn flux_equation_residual(
    prev: &SimState,
    next: &SimState,
    profile: &DensityProfile,
    grid: &Grid,
    params: &PhysParams,
) -> f64 {
    flux_equation_residual_field(prev, next, profile, grid, params)
        .iter()
        .fold(0.0, |m, r| m.max(r.abs()))
}
