//! Parameter sweeps and the N-doubling convergence preset.

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::config::{Axis, LoadedConfig};
use crate::error::{CliError, Result};
use crate::format::{fmt_f64, opt_f64, Table};
use crate::run::{run_cmd, write_file, Summary};

/// One sweep cell: its axis value, directory and result. A failed cell keeps
/// its exit code and message.
#[derive(Debug)]
pub struct Cell {
    pub value: f64,
    pub dir: PathBuf,
    pub result: std::result::Result<Summary, (u8, String)>,
}

pub fn cell_dir(out: &Path, axis: Axis, value: f64) -> PathBuf {
    out.join(format!("{}={}", axis.name(), fmt_f64(value)))
}

fn run_cell(base: &LoadedConfig, axis: Axis, value: f64, out: &Path) -> Cell {
    let dir = cell_dir(out, axis, value);
    let result = axis
        .apply(&base.config, value)
        .and_then(|config| {
            let cell = LoadedConfig {
                config,
                base_dir: base.base_dir.clone(),
            };
            run_cmd(&cell, &dir)
        })
        .map_err(|e| {
            let _ = fs::create_dir_all(&dir).and_then(|_| fs::write(dir.join("error.txt"), format!("{e}\n")));
            (e.exit_code(), e.to_string())
        });
    Cell { value, dir, result }
}

/// Runs every value as an independent cell, `workers` at a time, and writes
/// the combined table `sweep.csv`.
pub fn sweep_cmd(base: &LoadedConfig, axis: Axis, values: &[f64], out: &Path, workers: usize) -> Result<Vec<Cell>> {
    if values.is_empty() {
        return Err(CliError::Config("sweep needs at least one value".into()));
    }
    if let Some(v) = values.iter().find(|v| !v.is_finite()) {
        return Err(CliError::Config(format!("sweep value {v} is not finite")));
    }
    let base_hash = base.hash()?;
    fs::create_dir_all(out).map_err(|e| CliError::io(out, e))?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| CliError::Config(format!("cannot start {workers} workers: {e}")))?;
    let cells: Vec<Cell> = pool.install(|| values.par_iter().map(|&v| run_cell(base, axis, v, out)).collect());
    write_file(&out.join("sweep.csv"), sweep_csv(axis, &cells, &base_hash))?;
    Ok(cells)
}

pub fn sweep_csv(axis: Axis, cells: &[Cell], base_hash: &str) -> String {
    let header = [
        axis.name(),
        "status",
        "exit_code",
        "config_hash",
        "steps",
        "energy_drift",
        "energy_defect",
        "J_residual_max",
        "flux_equation_max",
        "s_min",
        "s_max",
        "s_range",
        "ZJ",
        "Ztheta",
        "ZG",
        "vanishing_lower",
        "vanishing_upper",
    ];
    let mut t = Table::new(&[format!("base_config_hash={base_hash}")], &header);
    for c in cells {
        let mut row = vec![fmt_f64(c.value)];
        match &c.result {
            Ok(s) => row.extend([
                "ok".to_string(),
                "0".to_string(),
                s.config_hash.clone(),
                s.steps.to_string(),
                fmt_f64(s.energy_drift),
                fmt_f64(s.energy_defect),
                fmt_f64(s.j_residual_max),
                fmt_f64(s.flux_equation_max),
                fmt_f64(s.s_min),
                fmt_f64(s.s_max),
                fmt_f64(s.s_max - s.s_min),
                fmt_f64(s.z_j),
                fmt_f64(s.z_theta),
                fmt_f64(s.z_g),
                opt_f64(s.vanishing_lower),
                opt_f64(s.vanishing_upper),
            ]),
            Err((code, _)) => {
                row.extend(["failed".to_string(), code.to_string()]);
                row.resize(header.len(), String::new());
            }
        }
        t.row(&row);
    }
    t.into_string()
}

/// Observed order `log2(e_coarse / e_fine)`; absent unless both are positive.
pub fn observed_order(coarse: f64, fine: f64) -> Option<f64> {
    (coarse > 0.0 && fine > 0.0).then(|| (coarse / fine).log2())
}

/// `levels` runs at `N, 2N, 4N, ...` plus `convergence.csv` with observed
/// orders of the J-identity residual, the flux-equation residual and the
/// energy conservation defect.
pub fn convergence_cmd(base: &LoadedConfig, levels: usize, out: &Path, workers: usize) -> Result<String> {
    if levels < 2 {
        return Err(CliError::Config("convergence needs at least 2 levels".into()));
    }
    let n0 = base.config.grid.cells as f64;
    let values: Vec<f64> = (0..levels).map(|k| n0 * 2f64.powi(k as i32)).collect();
    let cells = sweep_cmd(base, Axis::Cells, &values, out, workers)?;
    let mut t = Table::new(
        &[format!("base_config_hash={}", base.hash()?)],
        &[
            "N",
            "J_residual_max",
            "order_J",
            "flux_equation_max",
            "order_flux",
            "energy_defect",
            "order_energy",
        ],
    );
    let metrics: Vec<Option<[f64; 3]>> = cells
        .iter()
        .map(|c| {
            c.result
                .as_ref()
                .ok()
                .map(|s| [s.j_residual_max, s.flux_equation_max, s.energy_defect.abs()])
        })
        .collect();
    for (k, c) in cells.iter().enumerate() {
        let mut row = vec![fmt_f64(c.value)];
        for m in 0..3 {
            let here = metrics[k].map(|x| x[m]);
            let order = match (k.checked_sub(1).and_then(|j| metrics[j]), here) {
                (Some(prev), Some(h)) => observed_order(prev[m], h),
                _ => None,
            };
            row.push(opt_f64(here));
            row.push(opt_f64(order));
        }
        t.row(&row);
    }
    let text = t.into_string();
    write_file(&out.join("convergence.csv"), &text)?;
    Ok(text)
}
