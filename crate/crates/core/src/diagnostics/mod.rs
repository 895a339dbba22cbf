//! Quantities monitored along a run: energy, effective viscous flux, the
//! Jacobian representation, entropy, weighted norms and level-set energies.
//! Everything is either a pure function of a state or an accumulator that is
//! advanced once per accepted step.

pub mod energy;
pub mod entropy;
pub mod flux;
pub mod jident;
pub mod ladder;
pub mod norms;

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::params::PhysParams;
use crate::profiles::{DensityProfile, EntropyLevelParams, InitialData};
use crate::solver::Observer;
use crate::state::SimState;
use serde::{Deserialize, Serialize};

pub use energy::{boundary_heat_rate, mass, total_energy};
pub use entropy::{entropy_field, regularized_entropy, EntropyField, RegularizedEntropy};
pub use flux::{flux_equation_residual, flux_identity_residual, viscous_flux};
pub use jident::{b_bracket_exponent, j_identity, JIdentity, JIdentityAccumulator};
pub use ladder::LevelSetLadder;
pub use norms::WeightedNorms;

/// Default regularization of the entropy in the level-set energies.
pub const DEFAULT_EPSILON: f64 = 1e-10;

/// Full per-instant diagnostics including nodal fields.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagnosticsRecord {
    pub t: f64,
    pub e_total: f64,
    pub g: Vec<f64>,
    pub b: Vec<f64>,
    pub j_residual: f64,
    /// `NaN` when every node of the buffer-excluded region is masked.
    pub s_min: f64,
    pub s_max: f64,
    /// `sup theta rho0^{1-gamma}`.
    pub theta_max_weighted: f64,
}

/// Scalar summary written once per accepted step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsRow {
    pub t: f64,
    pub dt: f64,
    pub e_total: f64,
    /// Heat that has entered through the two ends since `t = 0`.
    pub boundary_heat: f64,
    /// `(E_total - E_0 - boundary_heat) / E_0`: the conservation defect of
    /// the discrete scheme once the physical end flux is accounted for.
    pub energy_defect: f64,
    pub j_residual: f64,
    pub s_min: f64,
    pub s_max: f64,
    pub z_j: f64,
    pub z_theta: f64,
    pub z_g: f64,
    pub theta_max_weighted: f64,
    pub b_min: f64,
    pub b_max: f64,
    pub j_min: f64,
    pub j_max: f64,
    pub flux_identity: f64,
    /// Zero on the initial row.
    pub flux_equation: f64,
    pub masked: usize,
    pub tail_bound: Option<f64>,
}

pub fn theta_max_weighted(state: &SimState, profile: &DensityProfile, params: &PhysParams) -> f64 {
    let gm1 = params.gamma() - 1.0;
    state
        .theta
        .iter()
        .zip(&profile.rho0)
        .map(|(t, r)| t / r.powf(gm1))
        .fold(0.0, f64::max)
}

fn entropy_extrema(state: &SimState, profile: &DensityProfile, grid: &Grid, params: &PhysParams) -> Result<(f64, f64, usize)> {
    match entropy_field(state, profile, grid, params) {
        Ok(f) => Ok((f.s_min, f.s_max, f.masked)),
        Err(Error::EmptyRegion) => {
            let r = grid.interior();
            Ok((f64::NAN, f64::NAN, r.end() - r.start() + 1))
        }
        Err(e) => Err(e),
    }
}

pub fn diagnostics_record(
    state: &SimState,
    initial: &InitialData,
    profile: &DensityProfile,
    grid: &Grid,
    params: &PhysParams,
    acc: &JIdentityAccumulator,
) -> Result<DiagnosticsRecord> {
    let ji = j_identity(state, initial, profile, grid, params, acc)?;
    let (s_min, s_max, _) = entropy_extrema(state, profile, grid, params)?;
    Ok(DiagnosticsRecord {
        t: state.t,
        e_total: total_energy(state, profile, grid, params),
        g: viscous_flux(state, profile, grid, params),
        b: ji.b,
        j_residual: ji.residual,
        s_min,
        s_max,
        theta_max_weighted: theta_max_weighted(state, profile, params),
    })
}

/// Level-set ladders together with the level parameters that drive them.
#[derive(Debug, Clone, PartialEq)]
pub struct LadderTracker {
    pub ladder: LevelSetLadder,
    pub levels: EntropyLevelParams,
    pub epsilon: f64,
}

impl LadderTracker {
    fn update(&mut self, state: &SimState, profile: &DensityProfile, grid: &Grid, params: &PhysParams, dt: f64) -> Result<()> {
        let reg = regularized_entropy(state, profile, params, self.epsilon, self.levels.m_lower)?;
        self.ladder
            .update(&reg, state, profile, grid, params, self.levels.m_upper, dt);
        Ok(())
    }
}

/// Observer that advances every accumulator and keeps one row per step.
pub struct DiagnosticsObserver<'a> {
    profile: &'a DensityProfile,
    grid: &'a Grid,
    params: PhysParams,
    initial: &'a InitialData,
    j_acc: Option<JIdentityAccumulator>,
    pub norms: WeightedNorms,
    pub ladder: Option<LadderTracker>,
    prev: Option<SimState>,
    boundary_heat: f64,
    pub rows: Vec<DiagnosticsRow>,
    /// Extremes of `J` seen over the run, all nodes.
    pub j_range: (f64, f64),
}

impl<'a> DiagnosticsObserver<'a> {
    pub fn new(profile: &'a DensityProfile, grid: &'a Grid, params: PhysParams, initial: &'a InitialData) -> Self {
        Self {
            profile,
            grid,
            params,
            initial,
            j_acc: None,
            norms: WeightedNorms::default(),
            ladder: None,
            prev: None,
            boundary_heat: 0.0,
            rows: Vec::new(),
            j_range: (f64::INFINITY, f64::NEG_INFINITY),
        }
    }

    pub fn with_ladder(mut self, ladder: LevelSetLadder, levels: EntropyLevelParams, epsilon: f64) -> Self {
        self.ladder = Some(LadderTracker { ladder, levels, epsilon });
        self
    }

    pub fn last_state(&self) -> Option<&SimState> {
        self.prev.as_ref()
    }

    pub fn j_accumulator(&self) -> Option<&JIdentityAccumulator> {
        self.j_acc.as_ref()
    }

    /// Full record at the most recent instant.
    pub fn record(&self) -> Result<DiagnosticsRecord> {
        match (&self.prev, &self.j_acc) {
            (Some(s), Some(acc)) => diagnostics_record(s, self.initial, self.profile, self.grid, &self.params, acc),
            _ => Err(Error::Usage("no state has been observed yet".into())),
        }
    }

    fn observe(&mut self, state: &SimState, dt: f64) -> Result<()> {
        let (profile, grid, params) = (self.profile, self.grid, &self.params);
        match &mut self.j_acc {
            Some(acc) => acc.update(state, &self.initial.v0, profile, grid, params),
            None => self.j_acc = Some(JIdentityAccumulator::new(state, &self.initial.v0, profile, grid, params)),
        }
        let acc = self.j_acc.as_ref().expect("accumulator set above");
        let ji = j_identity(state, self.initial, profile, grid, params, acc)?;
        let g = viscous_flux(state, profile, grid, params);
        self.norms.update(state, &g, profile, grid, params, dt);
        if let Some(tracker) = &mut self.ladder {
            tracker.update(state, profile, grid, params, dt)?;
        }
        let (s_min, s_max, masked) = entropy_extrema(state, profile, grid, params)?;
        let flux_equation = match &self.prev {
            Some(prev) => flux_equation_residual(prev, state, profile, grid, params),
            None => 0.0,
        };
        let fold = |(lo, hi): (f64, f64), x: &f64| (lo.min(*x), hi.max(*x));
        let (b_min, b_max) = ji.b.iter().fold((f64::INFINITY, f64::NEG_INFINITY), fold);
        let (j_min, j_max) = state.j.iter().fold((f64::INFINITY, f64::NEG_INFINITY), fold);
        self.j_range = (self.j_range.0.min(j_min), self.j_range.1.max(j_max));
        // the conduction stage is implicit, so the end flux is taken at the new state
        if self.prev.is_some() {
            self.boundary_heat += dt * boundary_heat_rate(state, grid, params);
        }
        let e_total = total_energy(state, profile, grid, params);
        let e0 = self.rows.first().map_or(e_total, |r| r.e_total);
        self.rows.push(DiagnosticsRow {
            t: state.t,
            dt,
            e_total,
            boundary_heat: self.boundary_heat,
            energy_defect: if e0 > 0.0 { (e_total - e0 - self.boundary_heat) / e0 } else { 0.0 },
            j_residual: ji.residual,
            s_min,
            s_max,
            z_j: self.norms.z_j(),
            z_theta: self.norms.z_theta(),
            z_g: self.norms.z_g(),
            theta_max_weighted: theta_max_weighted(state, profile, params),
            b_min,
            b_max,
            j_min,
            j_max,
            flux_identity: flux_identity_residual(state, &g, profile, grid, params),
            flux_equation,
            masked,
            tail_bound: ji.tail_bound,
        });
        self.prev = Some(state.clone());
        Ok(())
    }
}

impl Observer for DiagnosticsObserver<'_> {
    fn start(&mut self, state: &SimState) -> Result<()> {
        self.observe(state, 0.0)
    }

    fn accepted(&mut self, state: &SimState, dt: f64) -> Result<()> {
        self.observe(state, dt)
    }
}
