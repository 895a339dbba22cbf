//! Grid witnesses for the whole-line assumptions on the initial data.
//!
//! A truncated grid can only show divergence, never prove boundedness:
//! every functional is evaluated on `|y| <= L` and on `|y| <= L/2`, and a
//! ratio above [`GROWTH_TOLERANCE`] marks it as diverging.

use serde::{Deserialize, Serialize};

use super::{growth_ratio, DensityProfile, InitialData};
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::params::PhysParams;
use crate::quadrature::derivative;

/// Largest full-to-half-domain ratio still read as "bounded".
pub const GROWTH_TOLERANCE: f64 = 1.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Diverging,
    Fail,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssumptionEntry {
    /// Assumption tag: `H0`, `H1`, `H2`, `HS`, `finitemass`, `HSLOW`, `HSLOW2`, `sandwich`.
    pub assumption: String,
    pub quantity: String,
    /// `sup` or `L1` or `L2sq` (squared L2 norm).
    pub kind: String,
    pub value: f64,
    pub growth: f64,
    pub status: Status,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AssumptionOptions {
    /// Accept the two-sided power-law sandwich of the density in place of the
    /// pointwise slow-decay conditions (H1)/(H2).
    pub accept_sandwich: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssumptionReport {
    pub entries: Vec<AssumptionEntry>,
    /// Node where the density vanishes, if any. This is the only hard reject.
    pub interior_vacuum: Option<(f64, f64)>,
    pub remark_admissible: Option<bool>,
    pub approximate_derivatives: bool,
    pub options: AssumptionOptions,
}

impl AssumptionReport {
    /// Worst status among the entries tagged `assumption`.
    pub fn status(&self, assumption: &str) -> Option<Status> {
        self.entries
            .iter()
            .filter(|e| e.assumption == assumption)
            .map(|e| e.status)
            .max_by_key(|s| match s {
                Status::Pass => 0,
                Status::Diverging => 1,
                Status::Fail => 2,
            })
    }

    pub fn passes(&self, assumption: &str) -> bool {
        self.status(assumption) == Some(Status::Pass)
    }

    /// (H1) and (H2), or the sandwich when it is accepted.
    pub fn slow_decay_holds(&self) -> bool {
        let pointwise = self.passes("H1") && self.passes("H2");
        pointwise || (self.options.accept_sandwich && self.passes("sandwich"))
    }

    pub fn hard_reject(&self) -> Result<()> {
        match self.interior_vacuum {
            Some((y, value)) => Err(Error::InteriorVacuum { y, value }),
            None => Ok(()),
        }
    }
}

struct Builder<'a> {
    grid: &'a Grid,
    entries: Vec<AssumptionEntry>,
}

impl Builder<'_> {
    fn push(&mut self, assumption: &str, quantity: &str, kind: &str, full: f64, half: f64, hard_ok: bool) {
        let growth = growth_ratio(full, half);
        let status = if !hard_ok || !full.is_finite() {
            Status::Fail
        } else if growth > GROWTH_TOLERANCE {
            Status::Diverging
        } else {
            Status::Pass
        };
        self.entries.push(AssumptionEntry {
            assumption: assumption.into(),
            quantity: quantity.into(),
            kind: kind.into(),
            value: full,
            growth,
            status,
        });
    }

    fn sup(&mut self, assumption: &str, quantity: &str, f: impl Fn(usize) -> f64) {
        let l = self.grid.half_width();
        let s = |r: f64| self.grid.within(r).map(|i| f(i).abs()).fold(0.0, f64::max);
        let (full, half) = (s(l), s(0.5 * l));
        self.push(assumption, quantity, "sup", full, half, true);
    }

    fn integral(&mut self, assumption: &str, quantity: &str, kind: &str, f: impl Fn(usize) -> f64) {
        let l = self.grid.half_width();
        let h = self.grid.h();
        let n = self.grid.cells();
        let range = |r: f64| {
            let idx: Vec<usize> = self.grid.within(r).collect();
            idx[0]..=idx[idx.len() - 1]
        };
        let full = crate::quadrature::trapezoid_by(0..=n, h, &f);
        let half = crate::quadrature::trapezoid_by(range(0.5 * l), h, &f);
        self.push(assumption, quantity, kind, full, half, true);
    }
}

/// Evaluates every assumption functional on the grid.
///
/// `G0 = (mu v0' - R rho0 theta0) / J0`, with `v0'` from centered differences.
pub fn check_assumptions(
    profile: &DensityProfile,
    initial: &InitialData,
    grid: &Grid,
    params: &PhysParams,
    options: AssumptionOptions,
) -> Result<AssumptionReport> {
    let n = grid.len();
    if profile.len() != n || initial.j0.len() != n {
        return Err(Error::Usage("profile, initial data and grid sizes differ".into()));
    }
    let rho = &profile.rho0;
    let d1 = &profile.drho0;
    let d2 = &profile.d2rho0;
    let h = grid.h();
    let gamma = params.gamma();

    let interior_vacuum = rho
        .iter()
        .position(|&r| r <= 0.0)
        .map(|i| (grid.nodes()[i], rho[i]));
    if let Some((y, value)) = interior_vacuum {
        return Ok(AssumptionReport {
            entries: vec![AssumptionEntry {
                assumption: "H0".into(),
                quantity: format!("rho0 > 0 (vanishes at y = {y})"),
                kind: "inf".into(),
                value,
                growth: 1.0,
                status: Status::Fail,
            }],
            interior_vacuum,
            remark_admissible: profile.remark_admissible(gamma),
            approximate_derivatives: profile.approximate_derivatives,
            options,
        });
    }

    let dv0 = derivative(&initial.v0, h);
    let dtheta0 = derivative(&initial.theta0, h);
    let dj0 = derivative(&initial.j0, h);
    let g0: Vec<f64> = (0..n)
        .map(|i| (params.mu() * dv0[i] - params.r() * rho[i] * initial.theta0[i]) / initial.j0[i])
        .collect();

    let mut b = Builder {
        grid,
        entries: Vec::new(),
    };

    // (H0)
    let min_rho = rho.iter().copied().fold(f64::INFINITY, f64::min);
    b.push("H0", "inf rho0", "inf", min_rho, min_rho, min_rho > 0.0);
    b.sup("H0", "rho0 + |rho0'| (W1,inf)", |i| rho[i].abs() + d1[i].abs());
    b.push(
        "H0",
        "J0 bounds (lower, upper recorded in value/growth)",
        "inf",
        initial.j_lower,
        1.0,
        initial.j_lower > 0.0 && initial.j_upper.is_finite(),
    );
    let min_theta = initial.theta0.iter().copied().fold(f64::INFINITY, f64::min);
    b.push("H0", "inf theta0", "inf", min_theta, min_theta, min_theta >= 0.0);
    b.integral("H0", "sqrt(rho0) v0", "L2sq", |i| rho[i] * initial.v0[i].powi(2));
    b.integral("H0", "sqrt(rho0) v0^2", "L2sq", |i| rho[i] * initial.v0[i].powi(4));
    b.integral("H0", "sqrt(rho0) theta0", "L2sq", |i| rho[i] * initial.theta0[i].powi(2));
    b.integral("H0", "sqrt(rho0) J0'", "L2sq", |i| rho[i] * dj0[i].powi(2));
    b.integral("H0", "v0'", "L2sq", |i| dv0[i].powi(2));
    b.integral("H0", "rho0^(3/2) theta0'", "L2sq", |i| rho[i].powi(3) * dtheta0[i].powi(2));

    // (H1)
    b.sup("H1", "(1/sqrt(rho0))'", |i| -0.5 * d1[i] / rho[i].powf(1.5));
    b.integral("H1", "sqrt(rho0) theta0'", "L2sq", |i| rho[i] * dtheta0[i].powi(2));

    // (H2)
    b.sup("H2", "(1/rho0)''", |i| {
        (2.0 * d1[i] * d1[i] - rho[i] * d2[i]) / rho[i].powi(3)
    });

    // finite mass and companions
    b.integral("finitemass", "rho0", "L1", |i| rho[i]);
    b.integral("finitemass", "J0' / sqrt(rho0)", "L2sq", |i| dj0[i].powi(2) / rho[i]);

    // (HS)
    b.integral("HS", "rho0^((1-gamma)/2) v0", "L2sq", |i| {
        rho[i].powf(1.0 - gamma) * initial.v0[i].powi(2)
    });
    b.integral("HS", "rho0^(1-gamma/2) theta0", "L2sq", |i| {
        rho[i].powf(2.0 - gamma) * initial.theta0[i].powi(2)
    });
    b.integral("HS", "rho0^(-gamma/2) G0", "L2sq", |i| rho[i].powf(-gamma) * g0[i].powi(2));

    // (HSLOW), (HSLOW2)
    b.sup("HSLOW", "|rho0'| / rho0^(3/2)  (K1)", |i| d1[i] / rho[i].powf(1.5));
    b.sup("HSLOW2", "|rho0''| / rho0^2  (K2)", |i| d2[i] / (rho[i] * rho[i]));

    // two-sided sandwich K_lo <y>^-2 <= rho0 <= K_hi: witnessed by a
    // non-shrinking inf of rho0 <y>^2 and bounded sup of rho0
    {
        let l = grid.half_width();
        let inf_weighted = |r: f64| {
            grid.within(r)
                .map(|i| rho[i] * (1.0 + grid.nodes()[i].powi(2)))
                .fold(f64::INFINITY, f64::min)
        };
        let (full, half) = (inf_weighted(l), inf_weighted(0.5 * l));
        // growth of 1/inf: how much smaller the floor gets on the full domain
        b.push("sandwich", "1 / inf rho0 <y>^2", "sup", 1.0 / full, 1.0 / half, full > 0.0);
        b.sup("sandwich", "rho0", |i| rho[i]);
    }

    Ok(AssumptionReport {
        entries: b.entries,
        interior_vacuum: None,
        remark_admissible: profile.remark_admissible(gamma),
        approximate_derivatives: profile.approximate_derivatives,
        options,
    })
}
