//! Run configuration: a TOML document with fixed sections. Unknown keys are
//! errors. See `configs/reference.toml` for a complete example.

use std::fs;
use std::path::{Path, PathBuf};

use nsvac::grid::GridSpec;
use nsvac::profiles::AssumptionOptions;
use nsvac::solver::StepControl;
use nsvac::PhysParams;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Seed for the randomized verification suites; runs are deterministic.
    #[serde(default)]
    pub seed: u64,
    /// Final time.
    #[serde(rename = "T")]
    pub horizon: f64,
    /// Regularization of the entropy in the level-set ladders.
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    /// Snapshot times in `(0, T)`; the final time is always written.
    #[serde(default)]
    pub output_times: Vec<f64>,
    pub physics: PhysParams,
    pub profile: ProfileSpec,
    pub initial: InitialSpec,
    pub grid: GridSpec,
    #[serde(default)]
    pub control: ControlSpec,
    #[serde(default)]
    pub ladder: LadderSpec,
    #[serde(default)]
    pub assumptions: AssumptionOptions,
    #[serde(default)]
    pub output: OutputSpec,
}

fn default_epsilon() -> f64 {
    nsvac::diagnostics::DEFAULT_EPSILON
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProfileSpec {
    /// `k_rho (1 + y^2)^(-ell_rho / 2)`.
    PowerLaw { k_rho: f64, ell_rho: f64 },
    /// Columns `y, rho0[, v0]`; relative paths resolve against the config file.
    Table { path: PathBuf },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialSpec {
    #[serde(default = "one")]
    pub j0: f64,
    pub velocity: VelocitySpec,
    #[serde(default)]
    pub entropy: EntropySpec,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum VelocitySpec {
    /// `amplitude * exp(1 / ((y / width)^2 - 1))` on `|y| < width`, zero outside.
    Bump { amplitude: f64, width: f64 },
    Zero,
    /// Third column of the density table.
    Table,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum EntropySpec {
    Constant { value: f64 },
    /// Columns `y, s0`, linearly interpolated onto the grid.
    Table { path: PathBuf },
}

impl Default for EntropySpec {
    fn default() -> Self {
        EntropySpec::Constant { value: 0.0 }
    }
}

/// Step control; `dt_max_per_h`, when set, additionally caps the step at
/// `dt_max_per_h * h` so that the time step refines with the grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ControlSpec {
    pub dt_init: f64,
    pub dt_min: f64,
    pub dt_max: f64,
    pub dt_max_per_h: Option<f64>,
    pub safety: f64,
    pub max_retries: u32,
    pub reaction_cap: f64,
    pub growth: f64,
}

impl Default for ControlSpec {
    fn default() -> Self {
        let c = StepControl::default();
        Self {
            dt_init: c.dt_init,
            dt_min: c.dt_min,
            dt_max: c.dt_max,
            dt_max_per_h: None,
            safety: c.safety,
            max_retries: c.max_retries,
            reaction_cap: c.reaction_cap,
            growth: c.growth,
        }
    }
}

impl ControlSpec {
    pub fn resolve(&self, h: f64) -> Result<StepControl> {
        let dt_max = match self.dt_max_per_h {
            Some(k) if !(k > 0.0 && k.is_finite()) => {
                return Err(CliError::Config(format!("control.dt_max_per_h must be finite and > 0, got {k}")))
            }
            Some(k) => self.dt_max.min(k * h),
            None => self.dt_max,
        };
        let c = StepControl {
            dt_init: self.dt_init.min(dt_max),
            dt_min: self.dt_min,
            dt_max,
            safety: self.safety,
            max_retries: self.max_retries,
            reaction_cap: self.reaction_cap,
            growth: self.growth,
        };
        c.validate()?;
        Ok(c)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LadderSpec {
    /// Replays the run with the De Giorgi ladders attached.
    pub enabled: bool,
    /// Levels per side.
    pub levels: usize,
}

impl Default for LadderSpec {
    fn default() -> Self {
        Self {
            enabled: true,
            levels: nsvac::diagnostics::ladder::DEFAULT_LEVELS,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SnapshotFormat {
    #[default]
    Csv,
    Binary,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSpec {
    /// Artifact directory; `--out` takes precedence. Not part of the hash.
    pub dir: Option<PathBuf>,
    pub snapshot_format: SnapshotFormat,
}

/// A parsed configuration together with the directory its relative paths
/// resolve against.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadedConfig {
    pub config: RunConfig,
    pub base_dir: PathBuf,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let config: RunConfig = toml::from_str(text).map_err(|e| CliError::Config(e.message().to_string()))?;
        config.validate()?;
        Ok(config)
    }

    /// Canonical TOML: what `parse` reads back to an identical value.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("every config value is representable in TOML")
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.horizon.is_finite() && self.horizon >= 0.0) {
            return Err(CliError::Config(format!("T must be finite and >= 0, got {}", self.horizon)));
        }
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(CliError::Config(format!("epsilon must be finite and > 0, got {}", self.epsilon)));
        }
        if let Some(t) = self.output_times.iter().find(|&&t| !(t > 0.0 && t < self.horizon)) {
            return Err(CliError::Config(format!("output time {t} lies outside (0, T)")));
        }
        if self.output_times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(CliError::Config("output_times must be strictly increasing".into()));
        }
        if self.ladder.levels < 2 {
            return Err(CliError::Config("ladder.levels must be at least 2".into()));
        }
        if matches!(self.initial.velocity, VelocitySpec::Table) && !matches!(self.profile, ProfileSpec::Table { .. }) {
            return Err(CliError::Config(
                "initial.velocity family `table` needs a tabulated profile".into(),
            ));
        }
        Ok(())
    }

    /// Paths of every external table the run reads, in a fixed order.
    pub fn table_paths(&self) -> Vec<&Path> {
        let mut paths = Vec::new();
        if let ProfileSpec::Table { path } = &self.profile {
            paths.push(path.as_path());
        }
        if let EntropySpec::Table { path } = &self.initial.entropy {
            paths.push(path.as_path());
        }
        paths
    }
}

impl LoadedConfig {
    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let config = RunConfig::parse(&text).map_err(|e| match e {
            CliError::Config(msg) => CliError::Config(format!("{}: {msg}", path.display())),
            other => other,
        })?;
        let base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(Self { config, base_dir })
    }

    pub fn resolve(&self, path: &Path) -> PathBuf {
        if path.is_absolute() {
            path.to_path_buf()
        } else {
            self.base_dir.join(path)
        }
    }

    /// SHA-256 over the canonical config (output directory cleared) followed
    /// by the bytes of every referenced table.
    pub fn hash(&self) -> Result<String> {
        let mut canonical = self.config.clone();
        canonical.output.dir = None;
        let mut hasher = Sha256::new();
        hasher.update(canonical.to_toml().as_bytes());
        for p in self.config.table_paths() {
            let full = self.resolve(p);
            let bytes = fs::read(&full).map_err(|e| CliError::Config(format!("{}: {e}", full.display())))?;
            hasher.update(&bytes);
        }
        Ok(hex::encode(hasher.finalize()))
    }
}

/// Scalars a sweep may vary.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    EllRho,
    HalfWidth,
    Cells,
    Gamma,
    Horizon,
    Epsilon,
}

impl Axis {
    pub fn parse(name: &str) -> Result<Self> {
        Ok(match name {
            "ell_rho" => Axis::EllRho,
            "L" => Axis::HalfWidth,
            "N" => Axis::Cells,
            "gamma" => Axis::Gamma,
            "T" => Axis::Horizon,
            "epsilon" => Axis::Epsilon,
            _ => {
                return Err(CliError::Config(format!(
                    "unknown sweep axis `{name}`; expected one of ell_rho, L, N, gamma, T, epsilon"
                )))
            }
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Axis::EllRho => "ell_rho",
            Axis::HalfWidth => "L",
            Axis::Cells => "N",
            Axis::Gamma => "gamma",
            Axis::Horizon => "T",
            Axis::Epsilon => "epsilon",
        }
    }

    /// `base` with this axis set to `value`.
    ///
    /// `gamma` keeps `R` and adjusts `c_v = R / (gamma - 1)`.
    pub fn apply(self, base: &RunConfig, value: f64) -> Result<RunConfig> {
        let mut c = base.clone();
        match self {
            Axis::EllRho => match &mut c.profile {
                ProfileSpec::PowerLaw { ell_rho, .. } => *ell_rho = value,
                ProfileSpec::Table { .. } => {
                    return Err(CliError::Config("axis ell_rho needs a power-law profile".into()))
                }
            },
            Axis::HalfWidth => c.grid.half_width = value,
            Axis::Cells => {
                if !(value >= 1.0 && value.fract() == 0.0 && value <= u32::MAX as f64) {
                    return Err(CliError::Config(format!("N must be a positive integer, got {value}")));
                }
                c.grid.cells = value as usize;
            }
            Axis::Gamma => {
                if !(value > 1.0 && value.is_finite()) {
                    return Err(CliError::Config(format!("gamma must be finite and > 1, got {value}")));
                }
                let p = &c.physics;
                c.physics = PhysParams::new(p.mu(), p.kappa(), p.r(), p.r() / (value - 1.0), p.a())?;
            }
            Axis::Horizon => {
                c.horizon = value;
                c.output_times.retain(|&t| t < value);
            }
            Axis::Epsilon => c.epsilon = value,
        }
        c.validate()?;
        Ok(c)
    }
}
