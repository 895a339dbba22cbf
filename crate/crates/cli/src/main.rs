use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use nsvac::profiles::{check_assumptions, Status};
use nsvac_cli::format::fmt_f64;
use nsvac_cli::run::{assumptions_csv, prepare, run_cmd, write_file};
use nsvac_cli::sweep::{convergence_cmd, sweep_cmd};
use nsvac_cli::verify::{verify, Suite};
use nsvac_cli::{Axis, CliError, LoadedConfig, Result};

/// Heat-conductive compressible Navier-Stokes with far-field vacuum:
/// simulation and verification diagnostics.
///
/// Exit status: 0 success, 1 verification violation or i/o failure,
/// 2 config error, 3 assumption hard-reject (interior vacuum),
/// 4 solver abort, 5 numerical failure.
#[derive(Parser)]
#[command(name = "nsvac", version)]
struct Cli {
    /// Run configuration (TOML).
    #[arg(long, global = true, env = "NSVAC_CONFIG")]
    config: Option<PathBuf>,
    /// Artifact directory; overrides `output.dir` of the config.
    #[arg(long, global = true, env = "NSVAC_OUT")]
    out: Option<PathBuf>,
    /// Concurrent sweep cells.
    #[arg(long, global = true, env = "NSVAC_WORKERS", default_value_t = 1)]
    workers: usize,
    /// Overrides the config seed; seeds the verification suites.
    #[arg(long, global = true, env = "NSVAC_SEED")]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Single run: diagnostics, ladders, snapshots and a JSON summary.
    Run,
    /// Independent runs over one axis plus a combined `sweep.csv`.
    Sweep {
        /// One of ell_rho, L, N, gamma, T, epsilon.
        #[arg(long)]
        axis: String,
        /// Comma-separated axis values.
        #[arg(long, value_delimiter = ',')]
        values: Vec<f64>,
    },
    /// Runs a seeded property suite; exit 0 iff it finds no violation.
    Verify {
        suite: Suite,
        /// Instances (default depends on the suite).
        #[arg(long)]
        count: Option<usize>,
    },
    /// Evaluates the assumptions on the initial data without running.
    CheckProfile,
    /// N-doubling preset: runs at N, 2N, ... and a `convergence.csv`.
    Convergence {
        /// Number of resolutions.
        #[arg(long, default_value_t = 3)]
        levels: usize,
    },
}

fn load(cli: &Cli) -> Result<LoadedConfig> {
    let path = cli
        .config
        .as_deref()
        .ok_or_else(|| CliError::Config("--config (or NSVAC_CONFIG) is required".into()))?;
    let mut loaded = LoadedConfig::read(path)?;
    if let Some(seed) = cli.seed {
        loaded.config.seed = seed;
    }
    Ok(loaded)
}

fn out_dir(cli: &Cli, loaded: Option<&LoadedConfig>) -> PathBuf {
    cli.out
        .clone()
        .or_else(|| loaded.and_then(|l| l.config.output.dir.as_ref().map(|d| l.resolve(d))))
        .unwrap_or_else(|| PathBuf::from("out"))
}

fn execute(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Run => {
            let loaded = load(cli)?;
            let out = out_dir(cli, Some(&loaded));
            let s = run_cmd(&loaded, &out)?;
            println!("config_hash {}", s.config_hash);
            println!("steps {} (retries {}) to t = {}", s.steps, s.retries, fmt_f64(s.t_final));
            println!(
                "energy drift {}, defect {}; max J residual {}",
                fmt_f64(s.energy_drift),
                fmt_f64(s.energy_defect),
                fmt_f64(s.j_residual_max)
            );
            println!("entropy range [{}, {}]", fmt_f64(s.s_min), fmt_f64(s.s_max));
            println!("artifacts in {}", out.display());
        }
        Command::Sweep { axis, values } => {
            let loaded = load(cli)?;
            let axis = Axis::parse(axis)?;
            let out = out_dir(cli, Some(&loaded));
            let cells = sweep_cmd(&loaded, axis, values, &out, cli.workers)?;
            for c in &cells {
                match &c.result {
                    Ok(_) => println!("{}={} ok", axis.name(), fmt_f64(c.value)),
                    Err((code, msg)) => println!("{}={} failed ({code}): {msg}", axis.name(), fmt_f64(c.value)),
                }
            }
            println!("combined table {}", out.join("sweep.csv").display());
        }
        Command::Verify { suite, count } => {
            let seed = match (cli.seed, &cli.config) {
                (Some(s), _) => s,
                (None, Some(_)) => load(cli)?.config.seed,
                (None, None) => 0,
            };
            let report = verify(*suite, seed, *count)?;
            let mut json = serde_json::to_string_pretty(&report).expect("report serializes");
            json.push('\n');
            print!("{json}");
            if let Some(out) = &cli.out {
                std::fs::create_dir_all(out).map_err(|e| CliError::io(out, e))?;
                write_file(&out.join(format!("verify_{}.json", suite.name())), &json)?;
            }
            if report.violations > 0 {
                return Err(CliError::Violation(format!(
                    "{} of {} checks in {} failed; first: {}",
                    report.violations,
                    report.instances,
                    suite.name(),
                    report.failures[0]
                )));
            }
        }
        Command::CheckProfile => {
            let loaded = load(cli)?;
            let p = prepare(&loaded)?;
            let report = check_assumptions(&p.profile, &p.init, &p.grid, &p.params, loaded.config.assumptions)?;
            for e in &report.entries {
                let status = match e.status {
                    Status::Pass => "pass",
                    Status::Diverging => "DIVERGING",
                    Status::Fail => "FAIL",
                };
                println!(
                    "{:<8} {:<48} {:>24} growth {:<8.4} {status}",
                    e.assumption,
                    e.quantity,
                    fmt_f64(e.value),
                    e.growth
                );
            }
            println!(
                "slow-decay assumptions {}",
                if report.slow_decay_holds() { "hold" } else { "do not hold" }
            );
            if let Some(out) = &cli.out {
                std::fs::create_dir_all(out).map_err(|e| CliError::io(out, e))?;
                write_file(&out.join("assumptions.csv"), assumptions_csv(&report, &loaded.hash()?))?;
            }
            report.hard_reject()?;
        }
        Command::Convergence { levels } => {
            let loaded = load(cli)?;
            let out = out_dir(cli, Some(&loaded));
            print!("{}", convergence_cmd(&loaded, *levels, &out, cli.workers)?);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("nsvac: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

