//! Level-set truncation energies of the two De Giorgi iterations:
//!
//! ```text
//! q_l = sup_t ||(s_eps - l)_-||^2 + int_0^t ||d_y (s_eps - l)_- / sqrt(rho0)||^2
//! Q_l = sup_t ||rho0^{1-gamma} (theta_l)_+||^2 + int_0^t ||rho0^{1/2-gamma} d_y (theta_l)_+||^2
//! theta_l = theta - l rho0^{gamma-1} e^{M_upper t}
//! ```
//!
//! `(x)_- = max(-x, 0)` and `(x)_+ = max(x, 0)`; both are nonnegative.

use super::entropy::RegularizedEntropy;
use crate::error::{param, Result};
use crate::grid::Grid;
use crate::params::PhysParams;
use crate::profiles::{DensityProfile, EntropyLevelParams};
use crate::quadrature::{derivative, trapezoid};
use crate::state::SimState;
use serde::{Deserialize, Serialize};

/// Number of levels on each default ladder.
pub const DEFAULT_LEVELS: usize = 33;

/// Sup-in-time and integral-in-time parts of one energy per level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct Accumulator {
    sup: Vec<f64>,
    int: Vec<f64>,
    last_rate: Option<Vec<f64>>,
}

impl Accumulator {
    fn new(n: usize) -> Self {
        Self {
            sup: vec![0.0; n],
            int: vec![0.0; n],
            last_rate: None,
        }
    }

    fn fold(&mut self, sup: Vec<f64>, rate: Vec<f64>, dt: f64) {
        if let Some(prev) = &self.last_rate {
            for ((acc, a), b) in self.int.iter_mut().zip(prev).zip(&rate) {
                *acc += 0.5 * dt * (a + b);
            }
        }
        for (acc, s) in self.sup.iter_mut().zip(sup) {
            *acc = acc.max(s);
        }
        self.last_rate = Some(rate);
    }

    fn values(&self) -> Vec<f64> {
        self.sup.iter().zip(&self.int).map(|(s, i)| s + i).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelSetLadder {
    pub levels_lower: Vec<f64>,
    pub levels_upper: Vec<f64>,
    lower: Accumulator,
    upper: Accumulator,
}

/// `n` evenly spaced points from `a` to `b` inclusive.
pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![a],
        _ => (0..n).map(|k| a + (b - a) * k as f64 / (n - 1) as f64).collect(),
    }
}

impl LevelSetLadder {
    pub fn new(levels_lower: Vec<f64>, levels_upper: Vec<f64>) -> Result<Self> {
        for (name, levels) in [("levels_lower", &levels_lower), ("levels_upper", &levels_upper)] {
            if levels.iter().any(|l| !l.is_finite()) {
                return Err(param(name, "levels must be finite"));
            }
            if levels.windows(2).any(|w| w[1] <= w[0]) {
                return Err(param(name, "levels must be strictly increasing"));
            }
        }
        let (nl, nu) = (levels_lower.len(), levels_upper.len());
        Ok(Self {
            levels_lower,
            levels_upper,
            lower: Accumulator::new(nl),
            upper: Accumulator::new(nu),
        })
    }

    /// `DEFAULT_LEVELS` levels on `[l_lower0 - 20, l_lower0]` and on
    /// `[l_upper0, l_upper0 + 20 (1 + l_upper0)]`.
    pub fn default_for(levels: &EntropyLevelParams) -> Self {
        Self::spanning(levels, DEFAULT_LEVELS).expect("default ladders are increasing")
    }

    /// `count >= 2` levels per side over the same spans as [`Self::default_for`].
    pub fn spanning(levels: &EntropyLevelParams, count: usize) -> Result<Self> {
        if count < 2 {
            return Err(param("levels", format!("need at least 2 levels per side, got {count}")));
        }
        let lo = levels.ell_lower0;
        let up = levels.ell_upper0;
        Self::new(
            linspace(lo - 20.0, lo, count),
            linspace(up, up + 20.0 * (1.0 + up), count),
        )
    }

    /// Folds in one instant. The first call records the initial instant and
    /// ignores `dt`.
    #[allow(clippy::too_many_arguments)]
    pub fn update(
        &mut self,
        reg: &RegularizedEntropy,
        state: &SimState,
        profile: &DensityProfile,
        grid: &Grid,
        params: &PhysParams,
        m_upper: f64,
        dt: f64,
    ) {
        let h = grid.h();
        let rho = &profile.rho0;
        let n = state.len();
        let inv_rho: Vec<f64> = rho.iter().map(|r| 1.0 / r).collect();

        let mut sup = Vec::with_capacity(self.levels_lower.len());
        let mut rate = Vec::with_capacity(self.levels_lower.len());
        let mut trunc = vec![0.0; n];
        let mut sq = vec![0.0; n];
        for &level in &self.levels_lower {
            for i in 0..n {
                trunc[i] = (level - reg.s_eps[i]).max(0.0);
                sq[i] = trunc[i] * trunc[i];
            }
            sup.push(trapezoid(&sq, h));
            let d = derivative(&trunc, h);
            for i in 0..n {
                sq[i] = d[i] * d[i] * inv_rho[i];
            }
            rate.push(trapezoid(&sq, h));
        }
        self.lower.fold(sup, rate, dt);

        let gm1 = params.gamma() - 1.0;
        let growth = (m_upper * state.t).exp();
        let base: Vec<f64> = rho.iter().map(|r| r.powf(gm1) * growth).collect();
        let w_sup: Vec<f64> = rho.iter().map(|r| r.powf(-2.0 * gm1)).collect();
        let w_rate: Vec<f64> = rho.iter().map(|r| r.powf(1.0 - 2.0 * params.gamma())).collect();
        let mut sup = Vec::with_capacity(self.levels_upper.len());
        let mut rate = Vec::with_capacity(self.levels_upper.len());
        for &level in &self.levels_upper {
            for i in 0..n {
                trunc[i] = (state.theta[i] - level * base[i]).max(0.0);
                sq[i] = w_sup[i] * trunc[i] * trunc[i];
            }
            sup.push(trapezoid(&sq, h));
            let d = derivative(&trunc, h);
            for i in 0..n {
                sq[i] = w_rate[i] * d[i] * d[i];
            }
            rate.push(trapezoid(&sq, h));
        }
        self.upper.fold(sup, rate, dt);
    }

    /// `q_l` per entry of `levels_lower`.
    pub fn q(&self) -> Vec<f64> {
        self.lower.values()
    }

    /// `Q_l` per entry of `levels_upper`.
    pub fn big_q(&self) -> Vec<f64> {
        self.upper.values()
    }

    pub fn lower_pairs(&self) -> Vec<(f64, f64)> {
        self.levels_lower.iter().copied().zip(self.q()).collect()
    }

    pub fn upper_pairs(&self) -> Vec<(f64, f64)> {
        self.levels_upper.iter().copied().zip(self.big_q()).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagnostics::entropy::regularized_entropy;
    use crate::grid::make_grid;
    use crate::profiles::{density_power_law, theta_from_entropy};
    use proptest::prelude::*;

    fn params() -> PhysParams {
        PhysParams::new(1.0, 1.0, 2.0 / 3.0, 1.0, 1.0).unwrap()
    }

    #[test]
    fn rejects_bad_levels() {
        assert!(LevelSetLadder::new(vec![1.0, 1.0], vec![]).is_err());
        assert!(LevelSetLadder::new(vec![], vec![f64::NAN]).is_err());
        assert_eq!(linspace(0.0, 1.0, 3), vec![0.0, 0.5, 1.0]);
    }

    #[test]
    fn empty_level_sets_give_zero() {
        let g = make_grid(10.0, 64, 0.125).unwrap();
        let p = density_power_law(1.0, 2.0, &g).unwrap();
        let s0: Vec<f64> = g.nodes().iter().map(|y| 0.3 * y.sin()).collect();
        let th = theta_from_entropy(&s0, &p, &params()).unwrap();
        let state = SimState::new(0.0, vec![1.0; 65], vec![0.0; 65], th.clone()).unwrap();
        let reg = regularized_entropy(&state, &p, &params(), 1e-10, 0.0).unwrap();
        let s_min = reg.s_eps.iter().cloned().fold(f64::INFINITY, f64::min);
        let top = 1.0 + 1e-12;
        let top = top * th
            .iter()
            .zip(&p.rho0)
            .map(|(t, r)| t / r.powf(2.0 / 3.0))
            .fold(0.0, f64::max);
        let mut ladder = LevelSetLadder::new(vec![s_min - 1.0, s_min - 1e-9, s_min + 0.5], vec![top * 0.5, top, top * 2.0]).unwrap();
        ladder.update(&reg, &state, &p, &g, &params(), 0.0, 0.0);
        let q = ladder.q();
        assert_eq!(&q[..2], &[0.0, 0.0]);
        assert!(q[2] > 0.0);
        let big_q = ladder.big_q();
        assert!(big_q[0] > 0.0);
        assert_eq!(&big_q[1..], &[0.0, 0.0]);
    }

    #[test]
    fn default_ladders_span_the_base_levels() {
        let lp = EntropyLevelParams {
            s_lower0: 0.0,
            s_upper0: 0.0,
            ell_lower0: -0.5,
            ell_upper0: 1.5,
            m_lower: 0.0,
            m_upper: 0.0,
            j_lower_t: 1.0,
            j_upper_t: 1.0,
            horizon: 1.0,
        };
        let l = LevelSetLadder::default_for(&lp);
        assert_eq!(l.levels_lower.len(), DEFAULT_LEVELS);
        assert_eq!(l.levels_lower[0], -20.5);
        assert_eq!(*l.levels_lower.last().unwrap(), -0.5);
        assert_eq!(l.levels_upper[0], 1.5);
        assert_eq!(*l.levels_upper.last().unwrap(), 51.5);
        let five = LevelSetLadder::spanning(&lp, 5).unwrap();
        assert_eq!(five.levels_lower, vec![-20.5, -15.5, -10.5, -5.5, -0.5]);
        assert!(LevelSetLadder::spanning(&lp, 1).is_err());
    }

    proptest! {
        #[test]
        fn monotone_in_level_and_time(seed in 0u64..100) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let g = make_grid(6.0, 32, 0.125).unwrap();
            let p = density_power_law(1.0, rng.gen_range(0.0..2.5), &g).unwrap();
            let mut ladder = LevelSetLadder::new(linspace(-4.0, 1.0, 9), linspace(0.2, 4.0, 9)).unwrap();
            let mut prev_q = vec![0.0; 9];
            let mut prev_big = vec![0.0; 9];
            for step in 0..4 {
                let th: Vec<f64> = (0..33).map(|_| rng.gen_range(0.0..3.0)).collect();
                let state = SimState::new(0.05 * step as f64, vec![1.0; 33], vec![0.0; 33], th).unwrap();
                let reg = regularized_entropy(&state, &p, &params(), 1e-10, 0.5).unwrap();
                ladder.update(&reg, &state, &p, &g, &params(), 0.0, 0.05);
                let q = ladder.q();
                let big = ladder.big_q();
                prop_assert!(q.windows(2).all(|w| w[0] <= w[1]));
                for k in 0..9 {
                    prop_assert!(q[k] >= prev_q[k] && big[k] >= prev_big[k]);
                    prop_assert!(q[k] >= 0.0 && big[k] >= 0.0);
                }
                prev_q = q;
                prev_big = big;
            }
        }
    }
}
