use crate::grid::Grid;
use crate::params::PhysParams;
use crate::profiles::DensityProfile;
use crate::quadrature::trapezoid_by;
use crate::state::SimState;

/// `int rho0 (v^2/2 + c_v theta) dy` over the truncated domain.
pub fn total_energy(state: &SimState, profile: &DensityProfile, grid: &Grid, params: &PhysParams) -> f64 {
    let rho = &profile.rho0;
    let c_v = params.c_v();
    trapezoid_by(0..=grid.cells(), grid.h(), |i| {
        rho[i] * (0.5 * state.v[i] * state.v[i] + c_v * state.theta[i])
    })
}

/// Conductive heat entering through the two ends per unit time,
/// `kappa (theta_y / J)|_{+L} - kappa (theta_y / J)|_{-L}`, evaluated with the
/// end-face differences of the implicit conduction operator. On the truncated
/// domain `d/dt E_total` equals this rate; viscous and pressure work vanish at
/// the ends because `v = 0` there.
pub fn boundary_heat_rate(state: &SimState, grid: &Grid, params: &PhysParams) -> f64 {
    let n = state.len();
    let h = grid.h();
    let (th, j) = (&state.theta, &state.j);
    let right = 2.0 / (j[n - 1] + j[n - 2]) * (th[n - 1] - th[n - 2]) / h;
    let left = 2.0 / (j[0] + j[1]) * (th[1] - th[0]) / h;
    params.kappa() * (right - left)
}

/// `int rho0 dy` over the truncated domain.
pub fn mass(profile: &DensityProfile, grid: &Grid) -> f64 {
    trapezoid_by(0..=grid.cells(), grid.h(), |i| profile.rho0[i])
}
