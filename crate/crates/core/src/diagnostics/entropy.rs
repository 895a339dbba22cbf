use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::params::PhysParams;
use crate::profiles::DensityProfile;
use crate::state::SimState;

/// Temperatures at or below this are masked out of log evaluations.
pub const THETA_FLOOR: f64 = 1e-300;

#[derive(Debug, Clone, PartialEq)]
pub struct EntropyField {
    /// `NaN` where `theta <= THETA_FLOOR`.
    pub s: Vec<f64>,
    /// Extrema over the buffer-excluded region, masked nodes skipped.
    pub s_min: f64,
    pub s_max: f64,
    /// Masked nodes inside the buffer-excluded region.
    pub masked: usize,
}

/// `s = c_v (log(R/A) + (gamma-1) log J + log theta - (gamma-1) log rho0)`.
pub fn entropy_field(state: &SimState, profile: &DensityProfile, grid: &Grid, params: &PhysParams) -> Result<EntropyField> {
    let c_v = params.c_v();
    let gm1 = params.gamma() - 1.0;
    let base = (params.r() / params.a()).ln();
    let s: Vec<f64> = (0..state.len())
        .map(|i| {
            let th = state.theta[i];
            if th <= THETA_FLOOR {
                f64::NAN
            } else {
                c_v * (base + gm1 * state.j[i].ln() + th.ln() - gm1 * profile.rho0[i].ln())
            }
        })
        .collect();
    let mut masked = 0;
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in grid.interior() {
        if s[i].is_nan() {
            masked += 1;
        } else {
            lo = lo.min(s[i]);
            hi = hi.max(s[i]);
        }
    }
    if lo > hi {
        return Err(Error::EmptyRegion);
    }
    Ok(EntropyField {
        s,
        s_min: lo,
        s_max: hi,
        masked,
    })
}

/// Largest relative gap between `A e^{s/c_v} rho^gamma` and `R rho theta`,
/// `rho = rho0 / J`, over unmasked nodes.
pub fn pressure_mismatch(state: &SimState, field: &EntropyField, profile: &DensityProfile, params: &PhysParams) -> f64 {
    (0..state.len())
        .filter(|&i| !field.s[i].is_nan())
        .map(|i| {
            let rho = profile.rho0[i] / state.j[i];
            let p_entropy = params.a() * (field.s[i] / params.c_v()).exp() * rho.powf(params.gamma());
            let p_state = params.r() * rho * state.theta[i];
            (p_entropy - p_state).abs() / p_state
        })
        .fold(0.0, f64::max)
}

/// `S_eps = log(theta + eps) - (gamma-1) log(rho0 + eps^(1/(gamma-1)))` and
/// its drifted version `s_eps = S_eps + M_lower t`.
#[derive(Debug, Clone, PartialEq)]
pub struct RegularizedEntropy {
    pub epsilon: f64,
    pub t: f64,
    pub s_eps_base: Vec<f64>,
    pub s_eps: Vec<f64>,
}

pub fn regularized_entropy(
    state: &SimState,
    profile: &DensityProfile,
    params: &PhysParams,
    epsilon: f64,
    m_lower: f64,
) -> Result<RegularizedEntropy> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(crate::error::param("epsilon", format!("must be > 0, got {epsilon}")));
    }
    let gm1 = params.gamma() - 1.0;
    let rho_shift = epsilon.powf(1.0 / gm1);
    let base: Vec<f64> = (0..state.len())
        .map(|i| (state.theta[i] + epsilon).ln() - gm1 * (profile.rho0[i] + rho_shift).ln())
        .collect();
    let drift = m_lower * state.t;
    let s_eps = base.iter().map(|s| s + drift).collect();
    Ok(RegularizedEntropy {
        epsilon,
        t: state.t,
        s_eps_base: base,
        s_eps,
    })
}
