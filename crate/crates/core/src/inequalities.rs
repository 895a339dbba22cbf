//! Numerical checkers for two functional inequalities.
//!
//! Interpolation bound (explicit constants, checked strictly): for
//! `omega, eta >= 0` bounded with `|omega'| <= K omega`, `eta > 0`, `f >= 0`,
//!
//! ```text
//! ||sqrt(omega) f||_inf^2 <= 2K ||sqrt(omega) f||_2^2
//!     + 8 ||omega||_inf^{1/3} ||omega f||_1^{2/3} ||f'/sqrt(eta)||_2^{4/3} ||eta||_inf^{2/3}.
//! ```
//!
//! Weighted Gagliardo–Nirenberg bound (generic constant `C`, checked as a
//! ratio that must stay bounded over a family):
//!
//! ```text
//! ||rho0^s f||_q <= C ||rho0||_inf^{1/4 - 1/(2q)}
//!     (||rho0^s f||_2 + ||rho0^s f||_2^{1/2 + 1/q} ||rho0^{s - 1/2} f'||_2^{1/2 - 1/q}).
//! ```

use crate::error::{param, Error, Result};
use crate::grid::{make_grid, Grid};
use crate::profiles::power_law_at;
use crate::quadrature::trapezoid;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Relative quadrature allowance of the strict check.
pub const QUADRATURE_TOL: f64 = 1e-6;

/// Nodal data of one interpolation instance; `df` is the derivative of `f`
/// and `domega` that of `omega`, both supplied analytically when possible.
#[derive(Debug, Clone, PartialEq)]
pub struct InterpolationInstance {
    pub omega: Vec<f64>,
    pub domega: Vec<f64>,
    pub eta: Vec<f64>,
    pub f: Vec<f64>,
    pub df: Vec<f64>,
    pub k: f64,
    /// Exact suprema of `omega` and `eta` on the whole line when known;
    /// grid maxima are used otherwise.
    pub omega_sup: Option<f64>,
    pub eta_sup: Option<f64>,
}

impl InterpolationInstance {
    pub fn validate(&self) -> Result<()> {
        let n = self.f.len();
        if [self.omega.len(), self.domega.len(), self.eta.len(), self.df.len()]
            .iter()
            .any(|&m| m != n)
        {
            return Err(Error::Usage("instance arrays differ in length".into()));
        }
        if !(self.k >= 0.0 && self.k.is_finite()) {
            return Err(param("K", "must be finite and >= 0"));
        }
        if self.omega.iter().any(|w| !(*w >= 0.0)) {
            return Err(param("omega", "must be nonnegative"));
        }
        if self.eta.iter().any(|e| !(*e > 0.0)) {
            return Err(param("eta", "must be positive"));
        }
        if self.f.iter().any(|x| !(*x >= 0.0)) {
            return Err(param("f", "must be nonnegative"));
        }
        if let Some(i) = (0..n).find(|&i| self.domega[i].abs() > self.k * self.omega[i] * (1.0 + 1e-12)) {
            return Err(param("K", format!("|omega'| <= K omega fails at node {i}")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlackReport {
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    pub pass: bool,
}

pub fn check_sqrt_weight_bound(inst: &InterpolationInstance, grid: &Grid) -> Result<SlackReport> {
    inst.validate()?;
    if inst.f.len() != grid.len() {
        return Err(Error::Usage("instance and grid sizes differ".into()));
    }
    let h = grid.h();
    let n = inst.f.len();
    let sup = |v: &[f64]| v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let lhs = (0..n).map(|i| inst.omega[i] * inst.f[i] * inst.f[i]).fold(0.0, f64::max);
    let l2w = trapezoid(&(0..n).map(|i| inst.omega[i] * inst.f[i] * inst.f[i]).collect::<Vec<_>>(), h);
    let l1 = trapezoid(&(0..n).map(|i| inst.omega[i] * inst.f[i]).collect::<Vec<_>>(), h);
    let grad = trapezoid(&(0..n).map(|i| inst.df[i] * inst.df[i] / inst.eta[i]).collect::<Vec<_>>(), h);
    let omega_sup = inst.omega_sup.unwrap_or_else(|| sup(&inst.omega));
    let eta_sup = inst.eta_sup.unwrap_or_else(|| sup(&inst.eta));
    let rhs = 2.0 * inst.k * l2w
        + 8.0 * omega_sup.cbrt() * l1.powf(2.0 / 3.0) * grad.powf(2.0 / 3.0) * eta_sup.powf(2.0 / 3.0);
    let slack = rhs - lhs;
    Ok(SlackReport {
        lhs,
        rhs,
        slack,
        pass: slack >= -QUADRATURE_TOL * rhs,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GnReport {
    pub lhs: f64,
    /// Right-hand side without the generic constant.
    pub bracket: f64,
    pub ratio: f64,
}

/// `q = f64::INFINITY` selects the sup norm.
pub fn check_weighted_gn(rho0: &[f64], f: &[f64], df: &[f64], sigma: f64, q: f64, grid: &Grid) -> Result<GnReport> {
    if sigma == 0.0 || !sigma.is_finite() {
        return Err(param("sigma", "must be finite and nonzero"));
    }
    if !(q >= 2.0) {
        return Err(param("q", format!("must lie in [2, inf], got {q}")));
    }
    let n = grid.len();
    if rho0.len() != n || f.len() != n || df.len() != n {
        return Err(Error::Usage("profile, f and f' must match the grid".into()));
    }
    if rho0.iter().any(|r| !(*r > 0.0)) {
        return Err(param("rho0", "must be positive on the grid"));
    }
    let h = grid.h();
    let g: Vec<f64> = (0..n).map(|i| rho0[i].powf(sigma) * f[i]).collect();
    let lhs = if q.is_infinite() {
        g.iter().fold(0.0f64, |m, x| m.max(x.abs()))
    } else {
        trapezoid(&g.iter().map(|x| x.abs().powf(q)).collect::<Vec<_>>(), h).powf(1.0 / q)
    };
    let l2 = trapezoid(&g.iter().map(|x| x * x).collect::<Vec<_>>(), h).sqrt();
    let grad = trapezoid(
        &(0..n).map(|i| (rho0[i].powf(sigma - 0.5) * df[i]).powi(2)).collect::<Vec<_>>(),
        h,
    )
    .sqrt();
    let inv_q = if q.is_infinite() { 0.0 } else { 1.0 / q };
    let rho_sup = rho0.iter().fold(0.0f64, |m, r| m.max(*r));
    let bracket = rho_sup.powf(0.25 - 0.5 * inv_q) * (l2 + l2.powf(0.5 + inv_q) * grad.powf(0.5 - inv_q));
    let ratio = if bracket > 0.0 { lhs / bracket } else { 0.0 };
    Ok(GnReport { lhs, bracket, ratio })
}

/// Positive Gaussian mixture with closed-form derivative.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianMixture {
    /// `(amplitude, centre, width)` triples.
    pub terms: Vec<(f64, f64, f64)>,
}

impl GaussianMixture {
    pub fn random(rng: &mut ChaCha8Rng, centre_span: f64) -> Self {
        let count = rng.gen_range(1..=4);
        Self {
            terms: (0..count)
                .map(|_| {
                    (
                        rng.gen_range(0.1..3.0),
                        rng.gen_range(-centre_span..centre_span),
                        rng.gen_range(0.3..3.0),
                    )
                })
                .collect(),
        }
    }

    pub fn value(&self, y: f64) -> f64 {
        self.terms
            .iter()
            .map(|&(a, c, s)| a * (-(y - c) * (y - c) / (2.0 * s * s)).exp())
            .sum()
    }

    pub fn derivative(&self, y: f64) -> f64 {
        self.terms
            .iter()
            .map(|&(a, c, s)| -a * (y - c) / (s * s) * (-(y - c) * (y - c) / (2.0 * s * s)).exp())
            .sum()
    }
}

/// Half-width of the truncated line used by the suites; the Gaussian tails
/// beyond it are below double precision.
pub const SUITE_HALF_WIDTH: f64 = 40.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SuiteEntry {
    pub seed: u64,
    pub lhs: f64,
    pub rhs: f64,
    pub pass: bool,
}

/// Seeded instance: `omega = c (1+y^2)^{-a/2}` with `K = a/2`, `eta = e0 + e1 sin^2(k y + phi)`,
/// `f` a positive Gaussian mixture.
pub fn random_interpolation_instance(seed: u64, grid: &Grid) -> InterpolationInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let c = rng.gen_range(0.1..5.0);
    let a = rng.gen_range(0.0..4.0);
    let (e0, e1) = (rng.gen_range(0.1..2.0), rng.gen_range(0.0..2.0));
    let (kw, phase) = (rng.gen_range(0.1..2.0), rng.gen_range(0.0..std::f64::consts::PI));
    let mix = GaussianMixture::random(&mut rng, 8.0);
    let y = grid.nodes();
    let (omega, domega): (Vec<f64>, Vec<f64>) = y.iter().map(|&y| {
        let (w, dw, _) = power_law_at(c, a, y);
        (w, dw)
    }).unzip();
    InterpolationInstance {
        omega,
        domega,
        eta: y.iter().map(|&y| e0 + e1 * (kw * y + phase).sin().powi(2)).collect(),
        f: y.iter().map(|&y| mix.value(y)).collect(),
        df: y.iter().map(|&y| mix.derivative(y)).collect(),
        k: 0.5 * a,
        omega_sup: Some(c),
        eta_sup: Some(e0 + e1),
    }
}

/// `count` seeded instances starting at `seed`, on `cells` cells.
pub fn interpolation_suite(seed: u64, count: usize, cells: usize) -> Result<Vec<SuiteEntry>> {
    let grid = make_grid(SUITE_HALF_WIDTH, cells, 0.0)?;
    (0..count as u64)
        .map(|k| {
            let s = seed.wrapping_add(k);
            let r = check_sqrt_weight_bound(&random_interpolation_instance(s, &grid), &grid)?;
            Ok(SuiteEntry {
                seed: s,
                lhs: r.lhs,
                rhs: r.rhs,
                pass: r.pass,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GnEntry {
    pub seed: u64,
    pub sigma: f64,
    pub q: f64,
    pub ratio: f64,
}

/// Seeded Gagliardo–Nirenberg family for adiabatic exponent `gamma`:
/// `rho0 = K (1+y^2)^{-l/2}` with `1/gamma < l <= 2`,
/// `sigma in {-gamma/2, 1-gamma/2, 1-gamma}`, `q in {4, 6, 8, inf}`.
pub fn gn_suite(seed: u64, count: usize, cells: usize, gamma: f64) -> Result<Vec<GnEntry>> {
    let grid = make_grid(SUITE_HALF_WIDTH, cells, 0.0)?;
    let sigmas = [-0.5 * gamma, 1.0 - 0.5 * gamma, 1.0 - gamma];
    let qs = [4.0, 6.0, 8.0, f64::INFINITY];
    (0..count as u64)
        .map(|k| {
            let s = seed.wrapping_add(k);
            let mut rng = ChaCha8Rng::seed_from_u64(s);
            let kr = rng.gen_range(0.5..2.0);
            let ell = rng.gen_range(1.0 / gamma + 1e-3..=2.0);
            let sigma = sigmas[rng.gen_range(0..sigmas.len())];
            let q = qs[rng.gen_range(0..qs.len())];
            let mix = GaussianMixture::random(&mut rng, 8.0);
            let y = grid.nodes();
            let rho: Vec<f64> = y.iter().map(|&y| power_law_at(kr, ell, y).0).collect();
            let f: Vec<f64> = y.iter().map(|&y| mix.value(y)).collect();
            let df: Vec<f64> = y.iter().map(|&y| mix.derivative(y)).collect();
            let r = check_weighted_gn(&rho, &f, &df, sigma, q, &grid)?;
            Ok(GnEntry {
                seed: s,
                sigma,
                q,
                ratio: r.ratio,
            })
        })
        .collect()
}

pub fn family_max(entries: &[GnEntry]) -> f64 {
    entries.iter().map(|e| e.ratio).fold(0.0, f64::max)
}
