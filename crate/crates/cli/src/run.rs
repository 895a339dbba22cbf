//! Single runs: build the initial data, check the assumptions, integrate with
//! every diagnostic attached, and write the artifacts.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use nsvac::degiorgi::{vanishing_level, LadderSide, ZERO_TOL};
use nsvac::diagnostics::{DiagnosticsObserver, DiagnosticsRow, LevelSetLadder};
use nsvac::grid::Grid;
use nsvac::profiles::{
    bump_velocity, check_assumptions, decay_constants, density_power_law, entropy_level_params, AssumptionReport,
    DensityProfile, EntropyLevelParams, InitialData, ProfileTable, Status,
};
use nsvac::solver::{run_simulation, Observer, Solver, StepControl};
use nsvac::{PhysParams, SimState};
use serde::{Deserialize, Serialize};

use crate::config::{EntropySpec, LoadedConfig, ProfileSpec, SnapshotFormat, VelocitySpec};
use crate::error::{CliError, Result};
use crate::format::{fmt_f64, opt_f64, Table};

/// Everything a run needs, built from a config.
pub struct Prepared {
    pub params: PhysParams,
    pub grid: Grid,
    pub profile: DensityProfile,
    pub init: InitialData,
    pub control: StepControl,
}

pub fn prepare(loaded: &LoadedConfig) -> Result<Prepared> {
    let cfg = &loaded.config;
    let params = cfg.physics;
    let grid = cfg.grid.build()?;
    let (profile, table) = match &cfg.profile {
        ProfileSpec::PowerLaw { k_rho, ell_rho } => (density_power_law(*k_rho, *ell_rho, &grid)?, None),
        ProfileSpec::Table { path } => {
            let table = ProfileTable::read(&loaded.resolve(path))?;
            (DensityProfile::from_table(&table, &grid)?, Some(table))
        }
    };
    let v0 = match &cfg.initial.velocity {
        VelocitySpec::Bump { amplitude, width } => bump_velocity(*amplitude, *width, &grid)?,
        VelocitySpec::Zero => vec![0.0; grid.len()],
        VelocitySpec::Table => table
            .as_ref()
            .and_then(|t| t.interpolate_velocity(&grid).transpose())
            .ok_or_else(|| CliError::Config("the density table has no v0 column".into()))??,
    };
    let s0 = match &cfg.initial.entropy {
        EntropySpec::Constant { value } => vec![*value; grid.len()],
        EntropySpec::Table { path } => {
            let full = loaded.resolve(path);
            let text = fs::read_to_string(&full).map_err(|e| CliError::Config(format!("{}: {e}", full.display())))?;
            interpolate_entropy(&text, &grid)?
        }
    };
    let init = InitialData::from_entropy(&profile, &params, cfg.initial.j0, v0, s0)?;
    let control = cfg.control.resolve(grid.h())?;
    Ok(Prepared {
        params,
        grid,
        profile,
        init,
        control,
    })
}

/// Two columns `y, s0` (comma or whitespace separated, `#` comments),
/// strictly increasing `y` covering the grid, linearly interpolated.
pub fn interpolate_entropy(text: &str, grid: &Grid) -> Result<Vec<f64>> {
    let mut ys = Vec::new();
    let mut ss = Vec::new();
    for (k, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|s| !s.is_empty())
            .collect();
        let parsed: Vec<f64> = fields.iter().filter_map(|f| f.parse().ok()).collect();
        if fields.len() != 2 || parsed.len() != 2 || parsed.iter().any(|x| !x.is_finite()) {
            return Err(CliError::Config(format!("entropy table line {}: expected two finite numbers", k + 1)));
        }
        if ys.last().is_some_and(|&y| parsed[0] <= y) {
            return Err(CliError::Config(format!("entropy table line {}: y is not strictly increasing", k + 1)));
        }
        ys.push(parsed[0]);
        ss.push(parsed[1]);
    }
    let l = grid.half_width();
    if ys.len() < 2 || ys[0] > -l || ys[ys.len() - 1] < l {
        return Err(CliError::Config(format!("entropy table must cover [{}, {l}] with at least two rows", -l)));
    }
    Ok(grid
        .nodes()
        .iter()
        .map(|&y| {
            let k = ys.partition_point(|&x| x <= y).clamp(1, ys.len() - 1);
            let w = (y - ys[k - 1]) / (ys[k] - ys[k - 1]);
            (1.0 - w) * ss[k - 1] + w * ss[k]
        })
        .collect())
}

/// Both ladders as they stood at one output time.
#[derive(Debug, Clone, PartialEq)]
pub struct LadderSnapshot {
    pub t: f64,
    pub levels_lower: Vec<f64>,
    pub q: Vec<f64>,
    pub levels_upper: Vec<f64>,
    pub big_q: Vec<f64>,
}

/// Diagnostics observer that also captures the ladders at the output times.
struct Recorder<'a> {
    inner: DiagnosticsObserver<'a>,
    targets: Vec<f64>,
    ladders: Vec<LadderSnapshot>,
}

impl Observer for Recorder<'_> {
    fn start(&mut self, state: &SimState) -> nsvac::Result<()> {
        self.inner.start(state)
    }

    fn accepted(&mut self, state: &SimState, dt: f64) -> nsvac::Result<()> {
        self.inner.accepted(state, dt)?;
        // the driver lands exactly on every target
        if self.targets.contains(&state.t) {
            if let Some(tr) = &self.inner.ladder {
                self.ladders.push(LadderSnapshot {
                    t: state.t,
                    levels_lower: tr.ladder.levels_lower.clone(),
                    q: tr.ladder.q(),
                    levels_upper: tr.ladder.levels_upper.clone(),
                    big_q: tr.ladder.big_q(),
                });
            }
        }
        Ok(())
    }
}

/// Scalar results of a run, written as `summary.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub config_hash: String,
    pub t_final: f64,
    pub steps: usize,
    pub retries: u32,
    pub e_initial: f64,
    pub e_final: f64,
    /// `(E_T - E_0) / E_0`.
    pub energy_drift: f64,
    pub boundary_heat: f64,
    pub energy_defect: f64,
    pub j_residual_max: f64,
    pub j_residual_final: f64,
    pub flux_identity_max: f64,
    pub flux_equation_max: f64,
    /// Buffer-excluded entropy extrema at `T`.
    pub s_min: f64,
    pub s_max: f64,
    pub z_j: f64,
    pub z_theta: f64,
    pub z_g: f64,
    pub j_min: f64,
    pub j_max: f64,
    /// Level parameters from the run's `J` range; absent without ladders.
    pub levels: Option<EntropyLevelParams>,
    pub vanishing_lower: Option<f64>,
    pub vanishing_upper: Option<f64>,
    /// False when a ladder was not monotone in the level at `T`.
    pub ladder_monotone: Option<bool>,
    pub assumptions: BTreeMap<String, Status>,
    pub slow_decay_holds: bool,
    pub remark_admissible: Option<bool>,
}

pub struct RunOutcome {
    pub summary: Summary,
    pub rows: Vec<DiagnosticsRow>,
    /// Initial state followed by one state per output time.
    pub states: Vec<SimState>,
    pub ladders: Vec<LadderSnapshot>,
    pub assumptions: AssumptionReport,
    pub grid: Grid,
}

/// Runs a config without writing anything.
pub fn execute(loaded: &LoadedConfig, config_hash: &str) -> Result<RunOutcome> {
    let cfg = &loaded.config;
    let p = prepare(loaded)?;
    let report = check_assumptions(&p.profile, &p.init, &p.grid, &p.params, cfg.assumptions)?;
    report.hard_reject()?;
    let solver = Solver::new(p.params, &p.profile, &p.grid, &p.init.theta0)?;
    let observer = || DiagnosticsObserver::new(&p.profile, &p.grid, p.params, &p.init);

    let mut first = observer();
    let traj = run_simulation(&solver, p.init.to_state(), &p.control, cfg.horizon, &cfg.output_times, &mut [&mut first])?;

    // the level parameters need the J range of the whole run, so the
    // ladders ride along on a replay of the same (deterministic) run
    let (rows, ladders, levels, tracker) = if cfg.ladder.enabled {
        let decay = decay_constants(&p.profile, &p.grid)?;
        let levels = entropy_level_params(&p.init, &decay, first.j_range, &p.params, cfg.horizon)?;
        let ladder = LevelSetLadder::spanning(&levels, cfg.ladder.levels)?;
        let mut targets = cfg.output_times.clone();
        targets.push(cfg.horizon);
        let mut rec = Recorder {
            inner: observer().with_ladder(ladder, levels, cfg.epsilon),
            targets,
            ladders: Vec::new(),
        };
        run_simulation(&solver, p.init.to_state(), &p.control, cfg.horizon, &cfg.output_times, &mut [&mut rec])?;
        let tracker = rec.inner.ladder.take();
        (rec.inner.rows, rec.ladders, Some(levels), tracker)
    } else {
        (first.rows, Vec::new(), None, None)
    };

    let bad = |r: &DiagnosticsRow| !(r.e_total.is_finite() && r.j_residual.is_finite() && r.z_g.is_finite());
    if let Some(r) = rows.iter().find(|r| bad(r)) {
        return Err(CliError::Numerical(format!("non-finite diagnostics at t = {}", r.t)));
    }

    let (vanishing_lower, vanishing_upper, ladder_monotone) = match &tracker {
        Some(tr) => {
            let lower = vanishing_level(&tr.ladder.lower_pairs(), LadderSide::Lower, ZERO_TOL);
            let upper = vanishing_level(&tr.ladder.upper_pairs(), LadderSide::Upper, ZERO_TOL);
            let monotone = lower.is_ok() && upper.is_ok();
            (lower.ok().flatten(), upper.ok().flatten(), Some(monotone))
        }
        None => (None, None, None),
    };

    let first_row = &rows[0];
    let last = rows.last().expect("the initial row is always recorded");
    let max = |f: fn(&DiagnosticsRow) -> f64| rows.iter().map(f).fold(0.0, f64::max);
    let mut assumptions = BTreeMap::new();
    for e in &report.entries {
        if let Some(s) = report.status(&e.assumption) {
            assumptions.insert(e.assumption.clone(), s);
        }
    }
    let summary = Summary {
        config_hash: config_hash.to_string(),
        t_final: last.t,
        steps: traj.accepted_dts.len(),
        retries: traj.retries,
        e_initial: first_row.e_total,
        e_final: last.e_total,
        energy_drift: (last.e_total - first_row.e_total) / first_row.e_total,
        boundary_heat: last.boundary_heat,
        energy_defect: last.energy_defect,
        j_residual_max: max(|r| r.j_residual),
        j_residual_final: last.j_residual,
        flux_identity_max: max(|r| r.flux_identity),
        flux_equation_max: max(|r| r.flux_equation),
        s_min: last.s_min,
        s_max: last.s_max,
        z_j: last.z_j,
        z_theta: last.z_theta,
        z_g: last.z_g,
        j_min: rows.iter().map(|r| r.j_min).fold(f64::INFINITY, f64::min),
        j_max: max(|r| r.j_max),
        levels,
        vanishing_lower,
        vanishing_upper,
        ladder_monotone,
        assumptions,
        slow_decay_holds: report.slow_decay_holds(),
        remark_admissible: report.remark_admissible,
    };
    Ok(RunOutcome {
        summary,
        rows,
        states: traj.states,
        ladders,
        assumptions: report,
        grid: p.grid,
    })
}

pub const DIAGNOSTICS_HEADER: [&str; 20] = [
    "t",
    "dt",
    "E_total",
    "J_residual",
    "s_min",
    "s_max",
    "ZJ",
    "Ztheta",
    "ZG",
    "boundary_heat",
    "energy_defect",
    "theta_max_weighted",
    "B_min",
    "B_max",
    "J_min",
    "J_max",
    "flux_identity",
    "flux_equation",
    "masked",
    "tail_bound",
];

pub fn diagnostics_csv(rows: &[DiagnosticsRow], hash: &str) -> String {
    let mut t = Table::new(&[format!("config_hash={hash}")], &DIAGNOSTICS_HEADER);
    for r in rows {
        t.row(&[
            fmt_f64(r.t),
            fmt_f64(r.dt),
            fmt_f64(r.e_total),
            fmt_f64(r.j_residual),
            fmt_f64(r.s_min),
            fmt_f64(r.s_max),
            fmt_f64(r.z_j),
            fmt_f64(r.z_theta),
            fmt_f64(r.z_g),
            fmt_f64(r.boundary_heat),
            fmt_f64(r.energy_defect),
            fmt_f64(r.theta_max_weighted),
            fmt_f64(r.b_min),
            fmt_f64(r.b_max),
            fmt_f64(r.j_min),
            fmt_f64(r.j_max),
            fmt_f64(r.flux_identity),
            fmt_f64(r.flux_equation),
            r.masked.to_string(),
            opt_f64(r.tail_bound),
        ]);
    }
    t.into_string()
}

fn ladder_csv(t: f64, hash: &str, levels: &[f64], values: &[f64], name: &str) -> String {
    let mut table = Table::new(&[format!("t={} config_hash={hash}", fmt_f64(t))], &["level", name]);
    for (l, v) in levels.iter().zip(values) {
        table.row(&[fmt_f64(*l), fmt_f64(*v)]);
    }
    table.into_string()
}

pub fn snapshot_csv(state: &SimState, grid: &Grid, hash: &str) -> String {
    let mut table = Table::new(&[format!("t={} config_hash={hash}", fmt_f64(state.t))], &["y", "J", "v", "theta"]);
    for (i, y) in grid.nodes().iter().enumerate() {
        table.row(&[fmt_f64(*y), fmt_f64(state.j[i]), fmt_f64(state.v[i]), fmt_f64(state.theta[i])]);
    }
    table.into_string()
}

pub const SNAPSHOT_MAGIC: &[u8; 4] = b"NSVS";
pub const SNAPSHOT_VERSION: u32 = 1;

/// Little-endian: magic, version `u32`, `t` `f64`, 64-byte hex config hash,
/// node count `u64`, then the columns `y, J, v, theta` as `f64` arrays.
pub fn snapshot_binary(state: &SimState, grid: &Grid, hash: &str) -> Vec<u8> {
    let n = grid.len();
    let mut out = Vec::with_capacity(84 + 32 * n);
    out.extend_from_slice(SNAPSHOT_MAGIC);
    out.extend_from_slice(&SNAPSHOT_VERSION.to_le_bytes());
    out.extend_from_slice(&state.t.to_le_bytes());
    let mut h = [b'0'; 64];
    for (d, s) in h.iter_mut().zip(hash.bytes()) {
        *d = s;
    }
    out.extend_from_slice(&h);
    out.extend_from_slice(&(n as u64).to_le_bytes());
    for col in [grid.nodes(), &state.j, &state.v, &state.theta] {
        for x in col {
            out.extend_from_slice(&x.to_le_bytes());
        }
    }
    out
}

/// Inverse of [`snapshot_binary`]: `(t, hash, [y, J, v, theta])`.
pub fn read_snapshot_binary(bytes: &[u8]) -> Option<(f64, String, [Vec<f64>; 4])> {
    let f64_at = |k: usize| bytes.get(k..k + 8).map(|b| f64::from_le_bytes(b.try_into().unwrap()));
    if bytes.get(..4)? != SNAPSHOT_MAGIC || u32::from_le_bytes(bytes.get(4..8)?.try_into().ok()?) != SNAPSHOT_VERSION {
        return None;
    }
    let t = f64_at(8)?;
    let hash = String::from_utf8(bytes.get(16..80)?.to_vec()).ok()?;
    let n = u64::from_le_bytes(bytes.get(80..88)?.try_into().ok()?) as usize;
    if bytes.len() != 88 + 32 * n {
        return None;
    }
    let col = |c: usize| (0..n).map(|i| f64_at(88 + 8 * (c * n + i)).unwrap()).collect();
    Some((t, hash, [col(0), col(1), col(2), col(3)]))
}

pub fn assumptions_csv(report: &AssumptionReport, hash: &str) -> String {
    let mut t = Table::new(
        &[format!("config_hash={hash}")],
        &["assumption", "quantity", "kind", "value", "growth", "status"],
    );
    for e in &report.entries {
        let status = match e.status {
            Status::Pass => "pass",
            Status::Diverging => "diverging",
            Status::Fail => "fail",
        };
        t.row(&[
            e.assumption.clone(),
            format!("\"{}\"", e.quantity.replace('"', "\"\"")),
            e.kind.clone(),
            fmt_f64(e.value),
            fmt_f64(e.growth),
            status.to_string(),
        ]);
    }
    t.into_string()
}

pub fn write_file(path: &Path, contents: impl AsRef<[u8]>) -> Result<()> {
    fs::write(path, contents).map_err(|e| CliError::io(path, e))
}

/// Writes every artifact of `outcome` into `out`.
pub fn write_artifacts(out: &Path, loaded: &LoadedConfig, outcome: &RunOutcome) -> Result<()> {
    fs::create_dir_all(out).map_err(|e| CliError::io(out, e))?;
    let hash = &outcome.summary.config_hash;
    let mut canonical = loaded.config.clone();
    canonical.output.dir = None;
    write_file(&out.join("config.toml"), canonical.to_toml())?;
    write_file(&out.join("diagnostics.csv"), diagnostics_csv(&outcome.rows, hash))?;
    write_file(&out.join("assumptions.csv"), assumptions_csv(&outcome.assumptions, hash))?;
    for (k, state) in outcome.states.iter().enumerate() {
        match loaded.config.output.snapshot_format {
            SnapshotFormat::Csv => write_file(
                &out.join(format!("snapshot_{k:03}.csv")),
                snapshot_csv(state, &outcome.grid, hash),
            )?,
            SnapshotFormat::Binary => write_file(
                &out.join(format!("snapshot_{k:03}.bin")),
                snapshot_binary(state, &outcome.grid, hash),
            )?,
        }
    }
    // ladder k pairs with snapshot k; snapshot 0 is the initial state
    for (k, l) in outcome.ladders.iter().enumerate() {
        let k = k + 1;
        write_file(
            &out.join(format!("ladder_lower_{k:03}.csv")),
            ladder_csv(l.t, hash, &l.levels_lower, &l.q, "q"),
        )?;
        write_file(
            &out.join(format!("ladder_upper_{k:03}.csv")),
            ladder_csv(l.t, hash, &l.levels_upper, &l.big_q, "Q"),
        )?;
    }
    let mut json = serde_json::to_string_pretty(&outcome.summary).expect("summary serializes");
    json.push('\n');
    write_file(&out.join("summary.json"), json)
}

/// The `run` subcommand: execute and write artifacts.
pub fn run_cmd(loaded: &LoadedConfig, out: &Path) -> Result<Summary> {
    let hash = loaded.hash()?;
    let outcome = execute(loaded, &hash)?;
    write_artifacts(out, loaded, &outcome)?;
    Ok(outcome.summary)
}
