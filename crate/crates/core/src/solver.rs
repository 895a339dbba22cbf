//! Semi-implicit, positivity-preserving finite-difference integrator.
//!
//! One step runs three stages in order:
//!
//! 1. momentum with implicit viscosity and explicit pressure,
//! 2. the Jacobian from the new velocity,
//! 3. temperature with implicit conduction and implicit linear reaction
//!    `-(R rho0 v_y / J) theta`, and explicit nonnegative heating `mu v_y^2 / J`.
//!
//! Diffusion uses the flux form with interface coefficient `2 / (J_i + J_{i+1})`,
//! the harmonic mean of `1/J`. With `c_v rho0 / dt + R rho0 v_y / J > 0` at
//! every node the temperature matrix is an M-matrix, so `theta >= 0` is
//! preserved. Velocity is held at zero and temperature at its initial value
//! at both ends.

use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};
use crate::grid::Grid;
use crate::params::PhysParams;
use crate::profiles::DensityProfile;
use crate::state::SimState;
use crate::tridiag::solve_tridiagonal;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StepControl {
    pub dt_init: f64,
    pub dt_min: f64,
    /// Hard cap on the step; `f64::INFINITY` leaves it to the stability limits.
    pub dt_max: f64,
    /// Fraction of the stability limit actually used, in `(0, 1]`.
    pub safety: f64,
    /// Halvings allowed per step.
    pub max_retries: u32,
    /// Bound on `dt * max |R v_y / (c_v J)|`.
    pub reaction_cap: f64,
    /// Growth factor on the previous accepted step.
    pub growth: f64,
}

impl Default for StepControl {
    fn default() -> Self {
        Self {
            dt_init: 1e-3,
            dt_min: 1e-12,
            dt_max: f64::INFINITY,
            safety: 0.5,
            max_retries: 20,
            reaction_cap: 0.9,
            growth: 1.2,
        }
    }
}

impl StepControl {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt_min > 0.0) {
            return Err(param("dt_min", "must be > 0"));
        }
        if !(self.dt_init >= self.dt_min) {
            return Err(param("dt_init", "must be >= dt_min"));
        }
        if !(self.dt_max >= self.dt_min) {
            return Err(param("dt_max", "must be >= dt_min"));
        }
        if !(self.safety > 0.0 && self.safety <= 1.0) {
            return Err(param("safety", "must lie in (0, 1]"));
        }
        if !(self.reaction_cap > 0.0 && self.reaction_cap < 1.0) {
            return Err(param("reaction_cap", "must lie in (0, 1)"));
        }
        if !(self.growth >= 1.0 && self.growth.is_finite()) {
            return Err(param("growth", "must be finite and >= 1"));
        }
        Ok(())
    }
}

/// Why a step was refused; the driver halves `dt` and retries.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Rejection {
    NonPositiveJacobian { index: usize },
    NegativeTemperature { index: usize },
    LostDominance { index: usize },
}

impl std::fmt::Display for Rejection {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Rejection::NonPositiveJacobian { index } => write!(f, "J <= 0 at node {index}"),
            Rejection::NegativeTemperature { index } => write!(f, "theta < 0 at node {index}"),
            Rejection::LostDominance { index } => {
                write!(f, "temperature matrix not dominant at node {index}")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum StepOutcome {
    Accepted(SimState),
    Rejected(Rejection),
}

/// The discretized system on a fixed grid and density.
#[derive(Debug, Clone)]
pub struct Solver<'a> {
    pub params: PhysParams,
    pub profile: &'a DensityProfile,
    pub grid: &'a Grid,
    /// Dirichlet temperatures at `-L` and `+L`.
    pub theta_ends: (f64, f64),
}

/// Centered first difference at interior nodes, one-sided second order at ends.
pub fn d1(values: &[f64], h: f64) -> Vec<f64> {
    crate::quadrature::derivative(values, h)
}

/// Interface coefficients `2 / (J_i + J_{i+1})` for `i = 0..N`.
fn face_coefficients(j: &[f64]) -> Vec<f64> {
    j.windows(2).map(|w| 2.0 / (w[0] + w[1])).collect()
}

impl<'a> Solver<'a> {
    /// Holds the end temperatures at `theta0(+-L)`.
    pub fn new(params: PhysParams, profile: &'a DensityProfile, grid: &'a Grid, theta0: &[f64]) -> Result<Self> {
        if profile.len() != grid.len() || theta0.len() != grid.len() {
            return Err(Error::Usage("profile, theta0 and grid sizes differ".into()));
        }
        Ok(Self {
            params,
            profile,
            grid,
            theta_ends: (theta0[0], theta0[theta0.len() - 1]),
        })
    }

    /// Stage 1: `rho0 (v* - v^n) / dt = mu D_h(v*_y / J^n) - R D1(rho0 theta^n / J^n)`.
    pub fn momentum_stage(&self, state: &SimState, dt: f64) -> Result<Vec<f64>> {
        let n = self.grid.len();
        let h = self.grid.h();
        let rho = &self.profile.rho0;
        let mu = self.params.mu();
        let c = face_coefficients(&state.j);
        let p: Vec<f64> = (0..n).map(|i| rho[i] * state.theta[i] / state.j[i]).collect();

        let mut lower = vec![0.0; n];
        let mut diag = vec![1.0; n];
        let mut upper = vec![0.0; n];
        let mut rhs = vec![0.0; n];
        let k = mu / (h * h);
        for i in 1..n - 1 {
            let (cm, cp) = (c[i - 1], c[i]);
            lower[i] = -k * cm;
            upper[i] = -k * cp;
            diag[i] = rho[i] / dt + k * (cm + cp);
            rhs[i] = rho[i] / dt * state.v[i] - self.params.r() * (p[i + 1] - p[i - 1]) / (2.0 * h);
        }
        solve_tridiagonal(&lower, &diag, &upper, &rhs)
    }

    /// Advances one step of size `dt`.
    pub fn step(&self, state: &SimState, dt: f64) -> Result<StepOutcome> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(param("dt", format!("must be finite and > 0, got {dt}")));
        }
        let n = self.grid.len();
        let h = self.grid.h();
        let rho = &self.profile.rho0;
        let (mu, kappa, r, c_v) = (self.params.mu(), self.params.kappa(), self.params.r(), self.params.c_v());

        let v = self.momentum_stage(state, dt)?;
        if let Some(index) = v.iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFinite { field: "v", index });
        }

        let vy = d1(&v, h);
        let j: Vec<f64> = state.j.iter().zip(&vy).map(|(j, d)| j + dt * d).collect();
        if let Some(index) = j.iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFinite { field: "J", index });
        }
        if let Some(index) = j.iter().position(|&x| x <= 0.0) {
            return Ok(StepOutcome::Rejected(Rejection::NonPositiveJacobian { index }));
        }

        let c = face_coefficients(&j);
        let mut lower = vec![0.0; n];
        let mut diag = vec![1.0; n];
        let mut upper = vec![0.0; n];
        let mut rhs = vec![0.0; n];
        rhs[0] = self.theta_ends.0;
        rhs[n - 1] = self.theta_ends.1;
        let k = kappa / (h * h);
        for i in 1..n - 1 {
            let (cm, cp) = (c[i - 1], c[i]);
            let excess = c_v * rho[i] / dt + r * rho[i] * vy[i] / j[i];
            if !(excess > 0.0) {
                return Ok(StepOutcome::Rejected(Rejection::LostDominance { index: i }));
            }
            lower[i] = -k * cm;
            upper[i] = -k * cp;
            diag[i] = excess + k * (cm + cp);
            rhs[i] = c_v * rho[i] / dt * state.theta[i] + mu * vy[i] * vy[i] / j[i];
        }
        let theta = match solve_tridiagonal(&lower, &diag, &upper, &rhs) {
            Ok(t) => t,
            Err(Error::NotDiagonallyDominant { index }) | Err(Error::ZeroPivot { index }) => {
                return Ok(StepOutcome::Rejected(Rejection::LostDominance { index }))
            }
            Err(e) => return Err(e),
        };
        if let Some(index) = theta.iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFinite { field: "theta", index });
        }
        if let Some(index) = theta.iter().position(|&x| x < 0.0) {
            return Ok(StepOutcome::Rejected(Rejection::NegativeTemperature { index }));
        }

        Ok(StepOutcome::Accepted(SimState {
            t: state.t + dt,
            j,
            v,
            theta,
        }))
    }

    /// Largest stable step from the current state, before the safety factor:
    /// the reaction bound `reaction_cap / max |R v_y / (c_v J)|` and the
    /// acoustic bound `min h J / sqrt(gamma R theta)` of the explicit pressure.
    pub fn stability_limit(&self, state: &SimState, reaction_cap: f64) -> f64 {
        let h = self.grid.h();
        let vy = d1(&state.v, h);
        let r = self.params.r();
        let rate = vy
            .iter()
            .zip(&state.j)
            .map(|(d, j)| (r * d / (self.params.c_v() * j)).abs())
            .fold(0.0, f64::max);
        let reaction = if rate > 0.0 { reaction_cap / rate } else { f64::INFINITY };
        let gr = self.params.gamma() * r;
        let acoustic = state
            .j
            .iter()
            .zip(&state.theta)
            .filter(|(_, th)| **th > 0.0)
            .map(|(j, th)| h * j / (gr * th).sqrt())
            .fold(f64::INFINITY, f64::min);
        reaction.min(acoustic)
    }

    /// Conservation check for stage 1: with `v* = 0` at both ends,
    /// `h sum_i rho0 (v* - v^n)` over interior nodes equals `dt` times the
    /// viscous and pressure fluxes through the two end interfaces. Returns
    /// `(lhs, rhs)`.
    pub fn momentum_balance(&self, state: &SimState, v_star: &[f64], dt: f64) -> (f64, f64) {
        let n = self.grid.len();
        let h = self.grid.h();
        let rho = &self.profile.rho0;
        let c = face_coefficients(&state.j);
        let lhs: f64 = (1..n - 1).map(|i| h * rho[i] * (v_star[i] - state.v[i])).sum();
        let p: Vec<f64> = (0..n).map(|i| rho[i] * state.theta[i] / state.j[i]).collect();
        let visc_right = c[n - 2] * (v_star[n - 1] - v_star[n - 2]) / h;
        let visc_left = c[0] * (v_star[1] - v_star[0]) / h;
        let pressure = 0.5 * (p[n - 1] + p[n - 2] - p[1] - p[0]);
        let rhs = dt * (self.params.mu() * (visc_right - visc_left) - self.params.r() * pressure);
        (lhs, rhs)
    }
}

/// Called by the driver with the initial state and after every accepted step.
pub trait Observer {
    fn start(&mut self, _state: &SimState) -> Result<()> {
        Ok(())
    }
    fn accepted(&mut self, state: &SimState, dt: f64) -> Result<()>;
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    /// Snapshots at `t = 0` and at every requested output time.
    pub states: Vec<SimState>,
    pub accepted_dts: Vec<f64>,
    pub retries: u32,
}

impl Trajectory {
    pub fn last(&self) -> &SimState {
        self.states.last().expect("trajectory always holds the initial state")
    }
}

/// Integrates from `initial` to `horizon`, landing exactly on every output time.
///
/// The proposed step is `min(safety * stability_limit, growth * previous,
/// dt_max)`, truncated at the next output time; each rejection halves it.
pub fn run_simulation(
    solver: &Solver<'_>,
    initial: SimState,
    control: &StepControl,
    horizon: f64,
    output_times: &[f64],
    observers: &mut [&mut dyn Observer],
) -> Result<Trajectory> {
    control.validate()?;
    initial.validate()?;
    if !(horizon >= 0.0 && horizon.is_finite()) {
        return Err(param("T", format!("must be finite and >= 0, got {horizon}")));
    }
    let mut targets: Vec<f64> = output_times
        .iter()
        .copied()
        .filter(|&t| t > initial.t && t < horizon)
        .collect();
    targets.push(horizon);
    targets.sort_by(f64::total_cmp);
    targets.dedup();

    for o in observers.iter_mut() {
        o.start(&initial)?;
    }
    let mut traj = Trajectory {
        states: vec![initial.clone()],
        accepted_dts: Vec::new(),
        retries: 0,
    };
    if horizon <= initial.t {
        return Ok(traj);
    }

    let mut state = initial;
    let mut prev_dt: Option<f64> = None;
    for &target in &targets {
        while state.t < target {
            let remaining = target - state.t;
            let limit = control.safety * solver.stability_limit(&state, control.reaction_cap);
            let mut dt = limit
                .min(prev_dt.map_or(control.dt_init, |p| control.growth * p))
                .min(control.dt_max);
            // land on the target instead of leaving a sliver; the relative
            // slack absorbs round-off accumulated in `t` by fixed steps
            let lands = dt >= remaining - 1e-9 * dt;
            if lands {
                dt = remaining;
            }
            let mut retries = 0;
            let next = loop {
                if dt < control.dt_min {
                    return Err(Error::Aborted {
                        t: state.t,
                        dt,
                        reason: "step size fell below dt_min".into(),
                        state: Box::new(state),
                    });
                }
                match solver.step(&state, dt)? {
                    StepOutcome::Accepted(mut s) => {
                        if dt == remaining {
                            s.t = target;
                        }
                        break s;
                    }
                    StepOutcome::Rejected(why) => {
                        retries += 1;
                        traj.retries += 1;
                        if retries > control.max_retries {
                            return Err(Error::Aborted {
                                t: state.t,
                                dt,
                                reason: format!("{} halvings exhausted, last rejection: {why}", control.max_retries),
                                state: Box::new(state),
                            });
                        }
                        dt *= 0.5;
                    }
                }
            };
            // a step truncated by the output time does not shrink the next proposal
            if dt < remaining || prev_dt.is_none() {
                prev_dt = Some(dt);
            }
            traj.accepted_dts.push(dt);
            for o in observers.iter_mut() {
                o.accepted(&next, dt)?;
            }
            state = next;
        }
        traj.states.push(state.clone());
    }
    Ok(traj)
}
