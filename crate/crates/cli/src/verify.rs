//! Seeded verification suites with a pass/fail verdict.

use std::collections::BTreeMap;

use clap::ValueEnum;
use nsvac::degiorgi::family_suite;
use nsvac::diagnostics::DiagnosticsObserver;
use nsvac::grid::make_grid;
use nsvac::inequalities::{family_max, gn_suite, interpolation_suite};
use nsvac::profiles::{bump_velocity, density_power_law, InitialData};
use nsvac::solver::{run_simulation, Solver, StepControl};
use nsvac::tridiag::solve_tridiagonal;
use nsvac::PhysParams;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    /// Iteration lemma on synthetic hypothesis-verified families.
    LemmaIteration,
    /// Square-root-weight interpolation bound on random instances.
    LemmaInterp,
    /// Weighted Gagliardo–Nirenberg ratio, stable under grid refinement.
    LemmaGn,
    /// Tridiagonal solves, the uniform fixed point and a short reference run.
    SolverUnits,
}

impl Suite {
    pub fn name(self) -> &'static str {
        match self {
            Suite::LemmaIteration => "lemma-iteration",
            Suite::LemmaInterp => "lemma-interp",
            Suite::LemmaGn => "lemma-gn",
            Suite::SolverUnits => "solver-units",
        }
    }

    pub fn default_count(self) -> usize {
        match self {
            Suite::LemmaIteration | Suite::LemmaGn => 200,
            Suite::LemmaInterp => 1000,
            Suite::SolverUnits => 100,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub suite: String,
    pub seed: u64,
    pub instances: usize,
    pub violations: usize,
    /// One line per violation naming the failing seed or instance.
    pub failures: Vec<String>,
    pub metrics: BTreeMap<String, f64>,
}

impl VerifyReport {
    fn new(suite: Suite, seed: u64, instances: usize) -> Self {
        Self {
            suite: suite.name().into(),
            seed,
            instances,
            violations: 0,
            failures: Vec::new(),
            metrics: BTreeMap::new(),
        }
    }

    fn fail(&mut self, what: String) {
        self.violations += 1;
        self.failures.push(what);
    }

    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        if !ok {
            self.fail(what());
        }
    }
}

/// Grid resolution of the inequality suites; `lemma-gn` compares it with
/// twice as many cells.
pub const SUITE_CELLS: usize = 4096;
/// Allowed relative change of the Gagliardo–Nirenberg family maximum.
pub const GN_STABILITY: f64 = 0.1;

pub fn verify(suite: Suite, seed: u64, count: Option<usize>) -> Result<VerifyReport> {
    let count = count.unwrap_or(suite.default_count());
    let mut r = VerifyReport::new(suite, seed, count);
    match suite {
        Suite::LemmaIteration => {
            let reports = family_suite(seed, count)?;
            for f in &reports {
                r.check(f.hypothesis_holds && f.conclusion_holds, || {
                    format!(
                        "family seed {}: hypothesis {}, conclusion {}",
                        f.seed, f.hypothesis_holds, f.conclusion_holds
                    )
                });
            }
            let worst = reports.iter().map(|f| f.worst_ratio).fold(0.0, f64::max);
            r.metrics.insert("worst_hypothesis_ratio".into(), worst);
        }
        Suite::LemmaInterp => {
            let entries = interpolation_suite(seed, count, 2 * SUITE_CELLS)?;
            for e in &entries {
                r.check(e.pass, || format!("instance seed {}: lhs {} > rhs {}", e.seed, e.lhs, e.rhs));
            }
            let tightest = entries
                .iter()
                .filter(|e| e.rhs > 0.0)
                .map(|e| e.lhs / e.rhs)
                .fold(0.0, f64::max);
            r.metrics.insert("max_lhs_over_rhs".into(), tightest);
        }
        Suite::LemmaGn => {
            let gamma = 5.0 / 3.0;
            let coarse = gn_suite(seed, count, SUITE_CELLS, gamma)?;
            let fine = gn_suite(seed, count, 2 * SUITE_CELLS, gamma)?;
            for e in coarse.iter().chain(&fine) {
                r.check(e.ratio.is_finite(), || {
                    format!("instance seed {} (sigma {}, q {}): ratio {}", e.seed, e.sigma, e.q, e.ratio)
                });
            }
            let (mc, mf) = (family_max(&coarse), family_max(&fine));
            let change = (mf / mc - 1.0).abs();
            r.check(change <= GN_STABILITY, || {
                format!("family maximum moved by {change} between N = {SUITE_CELLS} and {}", 2 * SUITE_CELLS)
            });
            r.metrics.insert("family_max_coarse".into(), mc);
            r.metrics.insert("family_max_fine".into(), mf);
        }
        Suite::SolverUnits => solver_units(&mut r, seed, count)?,
    }
    Ok(r)
}

fn solver_units(r: &mut VerifyReport, seed: u64, count: usize) -> Result<()> {
    // random strictly dominant tridiagonal systems against a residual check
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for k in 0..count {
        let n = rng.gen_range(2..64);
        let lower: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let upper: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let diag: Vec<f64> = (0..n)
            .map(|i| (lower[i].abs() + upper[i].abs() + rng.gen_range(0.1..1.0)) * if rng.gen() { 1.0 } else { -1.0 })
            .collect();
        let rhs: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let x = solve_tridiagonal(&lower, &diag, &upper, &rhs)?;
        let residual = (0..n)
            .map(|i| {
                let mut ax = diag[i] * x[i];
                if i > 0 {
                    ax += lower[i] * x[i - 1];
                }
                if i + 1 < n {
                    ax += upper[i] * x[i + 1];
                }
                (ax - rhs[i]).abs()
            })
            .fold(0.0, f64::max);
        worst = worst.max(residual);
        r.check(residual <= 1e-12, || format!("tridiagonal system {k} (n = {n}): residual {residual}"));
    }
    r.metrics.insert("tridiagonal_residual".into(), worst);

    let params = PhysParams::new(1.0, 1.0, 2.0 / 3.0, 1.0, 1.0)?;

    // the uniform state is a fixed point of the scheme
    let grid = make_grid(10.0, 256, 0.125)?;
    let flat = density_power_law(1.0, 0.0, &grid)?;
    let n = grid.len();
    let init = InitialData::new(vec![1.0; n], vec![0.0; n], vec![1.0; n], None)?;
    let solver = Solver::new(params, &flat, &grid, &init.theta0)?;
    let control = StepControl {
        dt_init: 1e-3,
        dt_max: 1e-3,
        ..StepControl::default()
    };
    let traj = run_simulation(&solver, init.to_state(), &control, 0.1, &[], &mut [])?;
    let drift = traj.last().max_abs_diff(&init.to_state());
    r.check(drift <= 1e-12, || format!("uniform state moved by {drift} in 100 steps"));
    r.metrics.insert("uniform_drift".into(), drift);

    // short reference run: positivity, algebraic flux identity, monotone norms
    let profile = density_power_law(1.0, 2.0, &grid)?;
    let v0 = bump_velocity(0.5, 5.0, &grid)?;
    let init = InitialData::from_entropy(&profile, &params, 1.0, v0, vec![0.0; n])?;
    let solver = Solver::new(params, &profile, &grid, &init.theta0)?;
    let control = StepControl {
        dt_max: grid.h() / 50.0,
        ..StepControl::default()
    };
    let mut obs = DiagnosticsObserver::new(&profile, &grid, params, &init);
    let traj = run_simulation(&solver, init.to_state(), &control, 0.05, &[0.025], &mut [&mut obs])?;
    for s in &traj.states {
        r.check(s.theta.iter().all(|&t| t >= 0.0) && s.j.iter().all(|&j| j > 0.0), || {
            format!("positivity lost at t = {}", s.t)
        });
    }
    r.check(obs.rows[0].j_residual == 0.0, || "J-identity residual nonzero at t = 0".into());
    for (k, w) in obs.rows.windows(2).enumerate() {
        let (a, b) = (&w[0], &w[1]);
        r.check(b.j_min > 0.0, || format!("J not positive after step {}", k + 1));
        r.check(b.flux_identity <= 1e-12, || {
            format!("flux identity defect {} after step {}", b.flux_identity, k + 1)
        });
        r.check(b.z_j >= a.z_j && b.z_theta >= a.z_theta && b.z_g >= a.z_g, || {
            format!("weighted norm decreased at step {}", k + 1)
        });
    }
    r.metrics.insert("reference_steps".into(), traj.accepted_dts.len() as f64);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_suites_pass() {
        for suite in [Suite::LemmaIteration, Suite::SolverUnits] {
            let r = verify(suite, 7, Some(10)).unwrap();
            assert_eq!(r.violations, 0, "{:?}", r.failures);
            assert_eq!(r.instances, 10);
        }
    }

    #[test]
    fn names_match_the_command_line() {
        for s in Suite::value_variants() {
            assert_eq!(s.to_possible_value().unwrap().get_name(), s.name());
        }
    }
}
