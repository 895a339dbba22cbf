//! Admissible initial data: density profiles, their decay constants, the
//! initial velocity and temperature, and the entropy level parameters that
//! feed the De Giorgi ladders.

mod assumptions;
mod table;

pub use assumptions::{check_assumptions, AssumptionEntry, AssumptionOptions, AssumptionReport, Status, GROWTH_TOLERANCE};
pub use table::ProfileTable;

use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};
use crate::grid::Grid;
use crate::params::PhysParams;
use crate::quadrature;

/// How the density samples were produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ProfileFamily {
    /// `K_rho (1 + y^2)^(-ell_rho / 2)` with closed-form derivatives.
    PowerLaw { k_rho: f64, ell_rho: f64 },
    /// Interpolated from a table; derivatives are fourth-order differences.
    Tabulated,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensityProfile {
    pub family: ProfileFamily,
    pub rho0: Vec<f64>,
    pub drho0: Vec<f64>,
    pub d2rho0: Vec<f64>,
    /// True when the derivatives come from finite differences.
    pub approximate_derivatives: bool,
}

/// `rho0 = K <y>^(-ell)` sampled on the grid, with exact derivatives.
pub fn density_power_law(k_rho: f64, ell_rho: f64, grid: &Grid) -> Result<DensityProfile> {
    if !(k_rho.is_finite() && k_rho > 0.0) {
        return Err(param("K_rho", format!("must be > 0, got {k_rho}")));
    }
    if !(ell_rho.is_finite() && ell_rho >= 0.0) {
        return Err(param("ell_rho", format!("must be >= 0, got {ell_rho}")));
    }
    let n = grid.len();
    let mut rho0 = Vec::with_capacity(n);
    let mut drho0 = Vec::with_capacity(n);
    let mut d2rho0 = Vec::with_capacity(n);
    for &y in grid.nodes() {
        let (r, d1, d2) = power_law_at(k_rho, ell_rho, y);
        rho0.push(r);
        drho0.push(d1);
        d2rho0.push(d2);
    }
    Ok(DensityProfile {
        family: ProfileFamily::PowerLaw { k_rho, ell_rho },
        rho0,
        drho0,
        d2rho0,
        approximate_derivatives: false,
    })
}

/// Value, first and second derivative of `K (1 + y^2)^(-ell/2)`.
pub fn power_law_at(k: f64, ell: f64, y: f64) -> (f64, f64, f64) {
    let s = 1.0 + y * y;
    let rho = k * s.powf(-0.5 * ell);
    if ell == 0.0 {
        return (rho, 0.0, 0.0);
    }
    let d1 = -ell * y * rho / s;
    let d2 = ell * rho * ((ell + 1.0) * y * y - 1.0) / (s * s);
    (rho, d1, d2)
}

impl DensityProfile {
    /// Profile from tabulated samples interpolated onto `grid`.
    pub fn from_table(table: &ProfileTable, grid: &Grid) -> Result<Self> {
        let rho0 = table.interpolate_density(grid)?;
        if let Some(i) = rho0.iter().position(|&r| r <= 0.0) {
            return Err(Error::InteriorVacuum {
                y: grid.nodes()[i],
                value: rho0[i],
            });
        }
        let (drho0, d2rho0) = quadrature::derivatives_fourth_order(&rho0, grid.h());
        Ok(Self {
            family: ProfileFamily::Tabulated,
            rho0,
            drho0,
            d2rho0,
            approximate_derivatives: true,
        })
    }

    pub fn len(&self) -> usize {
        self.rho0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rho0.is_empty()
    }

    pub fn max_density(&self) -> f64 {
        self.rho0.iter().copied().fold(0.0, f64::max)
    }

    /// Whether the power-law exponent lies in the range `1/gamma < ell <= 2`
    /// for which the whole theorem set applies. `None` for tabulated data.
    pub fn remark_admissible(&self, gamma: f64) -> Option<bool> {
        match self.family {
            ProfileFamily::PowerLaw { ell_rho, .. } => Some(1.0 / gamma < ell_rho && ell_rho <= 2.0),
            ProfileFamily::Tabulated => None,
        }
    }

    /// Upper bound on the density mass outside `[-L, L]`, when known.
    ///
    /// For the power law, `(1 + y^2)^(-ell/2) <= |y|^(-ell)` gives
    /// `2 K L^(1 - ell) / (ell - 1)` for `ell > 1`.
    pub fn tail_mass_bound(&self, grid: &Grid) -> Option<f64> {
        match self.family {
            ProfileFamily::PowerLaw { k_rho, ell_rho } if ell_rho > 1.0 => {
                let l = grid.half_width();
                Some(2.0 * k_rho * l.powf(1.0 - ell_rho) / (ell_rho - 1.0))
            }
            _ => None,
        }
    }

    fn check_grid(&self, grid: &Grid) -> Result<()> {
        if self.len() != grid.len() {
            return Err(Error::Usage(format!(
                "profile has {} nodes but grid has {}",
                self.len(),
                grid.len()
            )));
        }
        Ok(())
    }
}

/// Grid suprema of `|rho0'| / rho0^(3/2)` and `|rho0''| / rho0^2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayConstants {
    pub k1: f64,
    pub k2: f64,
    /// Supremum over `|y| <= L` divided by the supremum over `|y| <= L/2`.
    pub k1_growth: f64,
    pub k2_growth: f64,
}

pub(crate) fn growth_ratio(full: f64, half: f64) -> f64 {
    if half > 0.0 {
        full / half
    } else if full > 0.0 {
        f64::INFINITY
    } else {
        1.0
    }
}

pub fn decay_constants(profile: &DensityProfile, grid: &Grid) -> Result<DecayConstants> {
    profile.check_grid(grid)?;
    let r1 = |i: usize| profile.drho0[i].abs() / profile.rho0[i].powf(1.5);
    let r2 = |i: usize| profile.d2rho0[i].abs() / (profile.rho0[i] * profile.rho0[i]);
    let sup = |f: &dyn Fn(usize) -> f64, radius: f64| grid.within(radius).map(f).fold(0.0, f64::max);
    let l = grid.half_width();
    let (k1, k1_half) = (sup(&r1, l), sup(&r1, 0.5 * l));
    let (k2, k2_half) = (sup(&r2, l), sup(&r2, 0.5 * l));
    Ok(DecayConstants {
        k1,
        k2,
        k1_growth: growth_ratio(k1, k1_half),
        k2_growth: growth_ratio(k2, k2_half),
    })
}

/// `amplitude * exp(1 / ((y/width)^2 - 1))` on `|y| < width`, zero outside.
pub fn bump_velocity(amplitude: f64, width: f64, grid: &Grid) -> Result<Vec<f64>> {
    if !(width.is_finite() && width > 0.0) {
        return Err(param("v0_width", format!("must be > 0, got {width}")));
    }
    if !amplitude.is_finite() {
        return Err(param("v0_amplitude", "must be finite"));
    }
    Ok(grid
        .nodes()
        .iter()
        .map(|&y| {
            let x = y / width;
            if x.abs() < 1.0 {
                amplitude * (1.0 / (x * x - 1.0)).exp()
            } else {
                0.0
            }
        })
        .collect())
}

/// `theta0 = (A/R) exp(s0 / c_v) rho0^(gamma - 1)` nodewise.
pub fn theta_from_entropy(s0: &[f64], profile: &DensityProfile, params: &PhysParams) -> Result<Vec<f64>> {
    if s0.len() != profile.len() {
        return Err(Error::Usage(format!(
            "s0 has {} nodes but profile has {}",
            s0.len(),
            profile.len()
        )));
    }
    if let Some(index) = s0.iter().position(|x| !x.is_finite()) {
        return Err(Error::NonFinite { field: "s0", index });
    }
    let coef = params.a() / params.r();
    let gm1 = params.gamma() - 1.0;
    Ok(s0
        .iter()
        .zip(&profile.rho0)
        .map(|(s, r)| coef * (s / params.c_v()).exp() * r.powf(gm1))
        .collect())
}

/// Initial `(J0, v0, theta0)` with the recorded bounds of `J0`.
#[derive(Debug, Clone, PartialEq)]
pub struct InitialData {
    pub j0: Vec<f64>,
    pub v0: Vec<f64>,
    pub theta0: Vec<f64>,
    /// Initial entropy, present when `theta0` was built from it.
    pub s0: Option<Vec<f64>>,
    pub j_lower: f64,
    pub j_upper: f64,
}

impl InitialData {
    pub fn new(j0: Vec<f64>, v0: Vec<f64>, theta0: Vec<f64>, s0: Option<Vec<f64>>) -> Result<Self> {
        let n = j0.len();
        if v0.len() != n || theta0.len() != n || s0.as_ref().is_some_and(|s| s.len() != n) {
            return Err(Error::Usage("initial data arrays have mismatched lengths".into()));
        }
        for (field, arr) in [("J0", &j0), ("v0", &v0), ("theta0", &theta0)] {
            if let Some(index) = arr.iter().position(|x| !x.is_finite()) {
                return Err(Error::NonFinite { field, index });
            }
        }
        let j_lower = j0.iter().copied().fold(f64::INFINITY, f64::min);
        let j_upper = j0.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if !(j_lower > 0.0) {
            return Err(param("J0", format!("needs a positive lower bound, min = {j_lower}")));
        }
        if let Some(i) = theta0.iter().position(|&x| x < 0.0) {
            return Err(param("theta0", format!("must be >= 0, theta0[{i}] = {}", theta0[i])));
        }
        Ok(Self {
            j0,
            v0,
            theta0,
            s0,
            j_lower,
            j_upper,
        })
    }

    /// `J0` constant, `theta0` from the entropy `s0`.
    pub fn from_entropy(
        profile: &DensityProfile,
        params: &PhysParams,
        j0: f64,
        v0: Vec<f64>,
        s0: Vec<f64>,
    ) -> Result<Self> {
        let theta0 = theta_from_entropy(&s0, profile, params)?;
        Self::new(vec![j0; profile.len()], v0, theta0, Some(s0))
    }

    pub fn to_state(&self) -> crate::SimState {
        crate::SimState {
            t: 0.0,
            j: self.j0.clone(),
            v: self.v0.clone(),
            theta: self.theta0.clone(),
        }
    }

    pub fn s0_bounds(&self) -> Option<(f64, f64)> {
        self.s0.as_ref().map(|s| {
            s.iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)))
        })
    }
}

/// Base levels and drift rates of the two De Giorgi iterations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EntropyLevelParams {
    pub s_lower0: f64,
    pub s_upper0: f64,
    pub ell_lower0: f64,
    pub ell_upper0: f64,
    pub m_lower: f64,
    pub m_upper: f64,
    pub j_lower_t: f64,
    pub j_upper_t: f64,
    pub horizon: f64,
}

pub fn entropy_level_params(
    initial: &InitialData,
    decay: &DecayConstants,
    j_range: (f64, f64),
    params: &PhysParams,
    horizon: f64,
) -> Result<EntropyLevelParams> {
    let (s_lower0, s_upper0) = initial
        .s0_bounds()
        .ok_or_else(|| param("s0", "initial entropy is required for the level parameters"))?;
    let (j_lower_t, j_upper_t) = j_range;
    if !(j_lower_t > 0.0 && j_lower_t <= j_upper_t) {
        return Err(param(
            "J_range",
            format!("need 0 < J_lower <= J_upper, got ({j_lower_t}, {j_upper_t})"),
        ));
    }
    let gamma = params.gamma();
    let a_over_r = params.a() / params.r();
    let ell_lower0 = ((1.0f64).min(a_over_r * (s_lower0 / params.c_v()).exp())
        / (1.0f64).max(2f64.powf(gamma - 2.0)))
    .ln();
    let ell_upper0 = a_over_r * (s_upper0 / params.c_v()).exp();
    let rate = params.kappa() * (gamma - 1.0) / (params.c_v() * j_lower_t);
    let k1sq = decay.k1 * decay.k1;
    Ok(EntropyLevelParams {
        s_lower0,
        s_upper0,
        ell_lower0,
        ell_upper0,
        m_lower: rate * (k1sq + decay.k2),
        m_upper: rate * ((gamma - 2.0).abs() * k1sq + decay.k2),
        j_lower_t,
        j_upper_t,
        horizon,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;

    #[test]
    fn constant_profile() {
        let g = make_grid(10.0, 16, 0.125).unwrap();
        let p = density_power_law(1.0, 0.0, &g).unwrap();
        assert!(p.rho0.iter().all(|&r| r == 1.0));
        assert!(p.drho0.iter().chain(&p.d2rho0).all(|&d| d == 0.0));
        let d = decay_constants(&p, &g).unwrap();
        assert_eq!((d.k1, d.k2), (0.0, 0.0));
        assert_eq!((d.k1_growth, d.k2_growth), (1.0, 1.0));
    }

    #[test]
    fn inverse_square_at_origin() {
        let g = make_grid(4.0, 8, 0.0).unwrap();
        let p = density_power_law(1.0, 2.0, &g).unwrap();
        assert_eq!(p.rho0[4], 1.0);
        assert_eq!(p.drho0[4], 0.0);
        assert_eq!(p.d2rho0[4], -2.0);
        assert!(density_power_law(0.0, 2.0, &g).is_err());
        assert!(density_power_law(1.0, -1.0, &g).is_err());
    }

    #[test]
    fn admissibility_window() {
        let g = make_grid(4.0, 8, 0.0).unwrap();
        let gamma = 5.0 / 3.0;
        let at = |ell| density_power_law(1.0, ell, &g).unwrap().remark_admissible(gamma);
        assert_eq!(at(2.0), Some(true));
        assert_eq!(at(0.6), Some(false));
        assert_eq!(at(0.61), Some(true));
        assert_eq!(at(4.0), Some(false));
    }

    /// Closed-form derivatives against second-order differences of rho0.
    #[test]
    fn derivatives_match_differences_at_order_two() {
        let err_at = |n: usize| {
            let g = make_grid(5.0, n, 0.0).unwrap();
            let p = density_power_law(2.0, 1.5, &g).unwrap();
            let h = g.h();
            let mut e1 = 0.0f64;
            let mut e2 = 0.0f64;
            for i in 1..n {
                let fd1 = (p.rho0[i + 1] - p.rho0[i - 1]) / (2.0 * h);
                let fd2 = (p.rho0[i + 1] - 2.0 * p.rho0[i] + p.rho0[i - 1]) / (h * h);
                e1 = e1.max((fd1 - p.drho0[i]).abs());
                e2 = e2.max((fd2 - p.d2rho0[i]).abs());
            }
            (e1, e2)
        };
        let (a1, a2) = err_at(64);
        let (b1, b2) = err_at(128);
        let (o1, o2) = ((a1 / b1).log2(), (a2 / b2).log2());
        assert!((o1 - 2.0).abs() < 0.1, "order {o1}");
        assert!((o2 - 2.0).abs() < 0.1, "order {o2}");
    }

    #[test]
    fn inverse_square_decay_constants_approach_limits() {
        // closed forms: 2|y|/<y> -> 2 and |6y^2 - 2|/<y>^2 -> 6
        let g = make_grid(1000.0, 20000, 0.125).unwrap();
        let p = density_power_law(1.0, 2.0, &g).unwrap();
        let d = decay_constants(&p, &g).unwrap();
        let l: f64 = 1000.0;
        let k1_exact = 2.0 * l / (1.0 + l * l).sqrt();
        let k2_exact = (6.0 * l * l - 2.0) / (1.0 + l * l);
        assert!((d.k1 - k1_exact).abs() < 1e-12);
        assert!((d.k2 - k2_exact).abs() < 1e-12);
        assert!((d.k1 - 2.0).abs() < 1e-5 && (d.k2 - 6.0).abs() < 1e-5);
        assert!((d.k1_growth - 1.0).abs() < 1e-5);
    }

    #[test]
    fn fast_decay_k1_grows() {
        for (ell, expected) in [(4.0, 2.0), (3.0, 2f64.sqrt()), (6.0, 4.0)] {
            let g = make_grid(200.0, 4000, 0.125).unwrap();
            let p = density_power_law(1.0, ell, &g).unwrap();
            let d = decay_constants(&p, &g).unwrap();
            assert!((d.k1_growth - expected).abs() < 0.01 * expected, "ell={ell}: {}", d.k1_growth);
        }
    }

    fn unit_params(gamma: f64) -> PhysParams {
        PhysParams::with_gamma(1.0, 1.0, gamma, 1.0, gamma - 1.0).unwrap()
    }

    #[test]
    fn theta_from_zero_entropy() {
        let g = make_grid(10.0, 64, 0.125).unwrap();
        let params = unit_params(5.0 / 3.0); // A = R
        let p = density_power_law(1.0, 2.0, &g).unwrap();
        let th = theta_from_entropy(&vec![0.0; g.len()], &p, &params).unwrap();
        for (t, r) in th.iter().zip(&p.rho0) {
            assert!((t - r.powf(2.0 / 3.0)).abs() <= 1e-15 * t);
        }
        let params2 = unit_params(2.0);
        let th2 = theta_from_entropy(&vec![0.0; g.len()], &p, &params2).unwrap();
        for (t, y) in th2.iter().zip(g.nodes()) {
            assert!((t - 1.0 / (1.0 + y * y)).abs() <= 1e-15);
        }
    }

    #[test]
    fn entropy_shift_doubles_theta() {
        let g = make_grid(10.0, 64, 0.125).unwrap();
        let params = PhysParams::new(1.0, 1.0, 0.4, 1.3, 2.0).unwrap();
        let p = density_power_law(1.5, 1.2, &g).unwrap();
        let s0: Vec<f64> = g.nodes().iter().map(|y| (0.3 * y).sin()).collect();
        let shifted: Vec<f64> = s0.iter().map(|s| s + params.c_v() * 2f64.ln()).collect();
        let a = theta_from_entropy(&s0, &p, &params).unwrap();
        let b = theta_from_entropy(&shifted, &p, &params).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((y / x - 2.0).abs() < 1e-14);
        }
    }

    #[test]
    fn level_params_examples() {
        let g = make_grid(10.0, 16, 0.125).unwrap();
        let params = unit_params(2.0);
        let p = density_power_law(1.0, 2.0, &g).unwrap();
        let init = InitialData::from_entropy(&p, &params, 1.0, vec![0.0; g.len()], vec![0.0; g.len()]).unwrap();
        let decay = DecayConstants {
            k1: 2.0,
            k2: 6.0,
            k1_growth: 1.0,
            k2_growth: 1.0,
        };
        let lp = entropy_level_params(&init, &decay, (1.0, 1.0), &params, 1.0).unwrap();
        assert_eq!(lp.ell_lower0, 0.0);
        assert_eq!(lp.ell_upper0, 1.0);
        assert_eq!(lp.m_lower, 10.0);
        assert_eq!(lp.m_upper, 6.0);

        let no_s0 = InitialData::new(vec![1.0; g.len()], vec![0.0; g.len()], vec![1.0; g.len()], None).unwrap();
        assert!(matches!(
            entropy_level_params(&no_s0, &decay, (1.0, 1.0), &params, 1.0),
            Err(Error::Parameter { field: "s0", .. })
        ));
        assert!(entropy_level_params(&init, &decay, (0.0, 1.0), &params, 1.0).is_err());
    }

    #[test]
    fn level_params_lower_formula() {
        // gamma = 3 gives max{1, 2^(gamma-2)} = 2; negative s0 makes the min pick the exponential
        let g = make_grid(10.0, 16, 0.125).unwrap();
        let params = PhysParams::with_gamma(1.0, 1.0, 3.0, 1.0, 1.0).unwrap();
        let p = density_power_law(1.0, 1.0, &g).unwrap();
        let s0: Vec<f64> = (0..g.len()).map(|i| -(i as f64) / 10.0).collect();
        let init = InitialData::from_entropy(&p, &params, 1.0, vec![0.0; g.len()], s0).unwrap();
        let decay = DecayConstants {
            k1: 1.0,
            k2: 1.0,
            k1_growth: 1.0,
            k2_growth: 1.0,
        };
        let lp = entropy_level_params(&init, &decay, (0.5, 2.0), &params, 1.0).unwrap();
        let expected = ((0.5f64 * (-1.6f64).exp()) / 2.0).ln();
        assert!((lp.ell_lower0 - expected).abs() < 1e-14);
        assert!((lp.ell_upper0 - 0.5).abs() < 1e-15);
        // kappa (gamma-1) / (c_v J) = 4
        assert_eq!(lp.m_lower, 8.0);
        assert_eq!(lp.m_upper, 8.0);
    }

    #[test]
    fn bump_is_compactly_supported() {
        let g = make_grid(10.0, 200, 0.125).unwrap();
        let v = bump_velocity(0.5, 5.0, &g).unwrap();
        for (y, v) in g.nodes().iter().zip(&v) {
            if y.abs() >= 5.0 {
                assert_eq!(*v, 0.0);
            } else {
                assert!(*v > 0.0);
            }
        }
        assert!((v[100] - 0.5 * (-1f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn tail_bound_covers_exact_tail() {
        let g = make_grid(50.0, 100, 0.125).unwrap();
        let p = density_power_law(1.0, 2.0, &g).unwrap();
        let exact = 2.0 * (std::f64::consts::FRAC_PI_2 - 50f64.atan());
        let bound = p.tail_mass_bound(&g).unwrap();
        assert!(bound >= exact && bound < 1.01 * exact);
    }
}
