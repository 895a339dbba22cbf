//! The iteration lemma behind both entropy bounds, and the empirical
//! vanishing analysis of measured level-set ladders.
//!
//! A nonnegative non-increasing `f` on `[m0, inf)` with
//!
//! ```text
//! f(l) <= M0 (l+1)^alpha / (l-m)^beta * f(m)^sigma    for all l > m >= m0
//! ```
//!
//! vanishes at `m0 + d`,
//!
//! ```text
//! d = [2 f(m0)^sigma (m0 + M0 + 2)^E]^{1/(beta-alpha)} + 2,
//! E = (2 alpha + 2 beta + 1)/(sigma-1) + beta/(sigma-1)^2 + 2 alpha + beta + 1.
//! ```

use crate::error::{param, Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Default relative threshold below which a ladder value counts as zero.
pub const ZERO_TOL: f64 = 1e-12;

/// Relative slack allowed against the monotone direction of a ladder before
/// it is reported as a data error.
pub const MONOTONE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IterationHypothesis {
    pub m0_const: f64,
    pub alpha: f64,
    pub beta: f64,
    pub sigma: f64,
    pub m0: f64,
    pub f0: f64,
}

impl IterationHypothesis {
    pub fn validate(&self) -> Result<()> {
        let finite = [self.m0_const, self.alpha, self.beta, self.sigma, self.m0, self.f0]
            .iter()
            .all(|x| x.is_finite());
        if !finite {
            return Err(param("hypothesis", "all fields must be finite"));
        }
        if self.m0_const < 0.0 {
            return Err(param("M0", "must be >= 0"));
        }
        if !(self.alpha >= 0.0 && self.alpha < self.beta) {
            return Err(param("alpha", format!("need 0 <= alpha < beta, got alpha = {}, beta = {}", self.alpha, self.beta)));
        }
        if !(self.sigma > 1.0) {
            return Err(param("sigma", format!("must be > 1, got {}", self.sigma)));
        }
        if self.m0 < 0.0 {
            return Err(param("m0", "must be >= 0"));
        }
        if self.f0 < 0.0 {
            return Err(param("f0", "must be >= 0"));
        }
        Ok(())
    }

    /// The exponent `E` of `m0 + M0 + 2` in the gap.
    pub fn gap_exponent(&self) -> f64 {
        let s1 = self.sigma - 1.0;
        (2.0 * self.alpha + 2.0 * self.beta + 1.0) / s1 + self.beta / (s1 * s1) + 2.0 * self.alpha + self.beta + 1.0
    }
}

/// The gap `d`, evaluated in log space so large exponents do not overflow
/// before the final root.
pub fn iteration_gap(h: &IterationHypothesis) -> Result<f64> {
    h.validate()?;
    if h.f0 == 0.0 {
        return Ok(2.0);
    }
    let log_inner = 2f64.ln() + h.sigma * h.f0.ln() + h.gap_exponent() * (h.m0 + h.m0_const + 2.0).ln();
    Ok((log_inner / (h.beta - h.alpha)).exp() + 2.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HypothesisCheck {
    pub holds: bool,
    /// Largest `f(l) / (M0 (l+1)^alpha (l-m)^-beta f(m)^sigma)` over sampled pairs.
    pub worst_ratio: f64,
    /// `(l, m)` attaining the worst ratio.
    pub worst_pair: Option<(f64, f64)>,
}

/// Brute-force check of the hypothesis over every sampled pair `l > m >= m0`.
pub fn verify_hypothesis(levels: &[f64], values: &[f64], h: &IterationHypothesis) -> Result<HypothesisCheck> {
    h.validate()?;
    if levels.len() != values.len() {
        return Err(Error::Usage("levels and values differ in length".into()));
    }
    if levels.windows(2).any(|w| w[1] <= w[0]) {
        return Err(param("levels", "must be strictly increasing"));
    }
    if values.iter().any(|v| !(*v >= 0.0)) {
        return Err(param("values", "must be nonnegative"));
    }
    let mut worst = 0.0f64;
    let mut pair = None;
    for (im, (&m, &fm)) in levels.iter().zip(values).enumerate() {
        if m < h.m0 {
            continue;
        }
        for (&l, &fl) in levels[im + 1..].iter().zip(&values[im + 1..]) {
            if fl == 0.0 {
                continue;
            }
            let rhs = h.m0_const * (l + 1.0).powf(h.alpha) * fm.powf(h.sigma) / (l - m).powf(h.beta);
            let ratio = if rhs > 0.0 { fl / rhs } else { f64::INFINITY };
            if ratio > worst || pair.is_none() {
                worst = ratio;
                pair = Some((l, m));
            }
        }
    }
    Ok(HypothesisCheck {
        holds: worst <= 1.0 + 1e-12,
        worst_ratio: worst,
        worst_pair: pair,
    })
}

/// Which way a ladder is monotone.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LadderSide {
    /// Nondecreasing in the level and vanishing at low levels (`q_l`).
    Lower,
    /// Nonincreasing in the level and vanishing at high levels (`Q_l`).
    Upper,
}

/// The extremal sampled level at which a monotone ladder vanishes: the largest
/// such level on the lower side, the smallest on the upper side. A value
/// counts as zero when `<= zero_tol * (1 + max value)`. Returns `None` when no
/// entry qualifies.
pub fn vanishing_level(pairs: &[(f64, f64)], side: LadderSide, zero_tol: f64) -> Result<Option<f64>> {
    if pairs.windows(2).any(|w| w[1].0 <= w[0].0) {
        return Err(param("levels", "must be strictly increasing"));
    }
    let max = pairs.iter().map(|p| p.1).fold(0.0, f64::max);
    let slack = MONOTONE_TOL * (1.0 + max);
    for w in pairs.windows(2) {
        let ((_, v0), (l1, v1)) = (w[0], w[1]);
        let broken = match side {
            LadderSide::Lower => v1 < v0 - slack,
            LadderSide::Upper => v1 > v0 + slack,
        };
        if broken {
            return Err(Error::NonMonotoneLadder {
                level: l1,
                value: v1,
                neighbour: v0,
            });
        }
    }
    let thresh = zero_tol * (1.0 + max);
    let zero = |p: &&(f64, f64)| p.1 <= thresh;
    Ok(match side {
        LadderSide::Lower => pairs.iter().take_while(zero).last().map(|p| p.0),
        LadderSide::Upper => pairs.iter().rev().take_while(zero).last().map(|p| p.0),
    })
}

/// Largest `C` with `f(l) <= C (l+1)^alpha (l-m)^-beta f(m)^sigma` over the
/// sampled pairs of an upper ladder, where `f(m) > 0`. Exploratory only: it
/// is an empirical fit, not a certified constant.
pub fn fitted_recursion_constant(pairs: &[(f64, f64)], alpha: f64, beta: f64, sigma: f64) -> f64 {
    let mut c = 0.0f64;
    for (i, &(m, fm)) in pairs.iter().enumerate() {
        if fm <= 0.0 {
            continue;
        }
        for &(l, fl) in &pairs[i + 1..] {
            c = c.max(fl * (l - m).powf(beta) / ((l + 1.0).powf(alpha) * fm.powf(sigma)));
        }
    }
    c
}

/// A piecewise-constant finitely supported test function: `eps` on
/// `[m0, l_star)` and zero beyond, sampled on `levels`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticFamily {
    pub seed: u64,
    pub hypothesis: IterationHypothesis,
    pub l_star: f64,
    pub levels: Vec<f64>,
    pub values: Vec<f64>,
}

/// `eps = factor * ((l_star - m0)^beta / M0)^{1/(sigma-1)}`; `factor >= 1`
/// satisfies the hypothesis for every pair, `factor < 1` breaks it near the
/// widest pair.
pub fn step_family(hypothesis: IterationHypothesis, l_star: f64, factor: f64, samples: usize) -> Result<(f64, Vec<f64>, Vec<f64>)> {
    let width = l_star - hypothesis.m0;
    if !(width > 0.0) {
        return Err(param("l_star", "must exceed m0"));
    }
    if !(hypothesis.m0_const > 0.0) {
        return Err(param("M0", "must be > 0 for a step family"));
    }
    let eps = factor * (width.powf(hypothesis.beta) / hypothesis.m0_const).powf(1.0 / (hypothesis.sigma - 1.0));
    let h = IterationHypothesis { f0: eps, ..hypothesis };
    let d = iteration_gap(&h)?;
    // `samples` levels inside the support, then beyond the predicted zero
    let mut levels: Vec<f64> = (0..samples)
        .map(|k| hypothesis.m0 + width * k as f64 / samples as f64)
        .collect();
    levels.push(l_star);
    let far = (hypothesis.m0 + d).max(l_star);
    for k in 1..=4 {
        levels.push(far * (1.0 + 0.25 * k as f64) + k as f64);
    }
    levels.sort_by(f64::total_cmp);
    levels.dedup();
    let values = levels.iter().map(|&l| if l < l_star { eps } else { 0.0 }).collect();
    Ok((eps, levels, values))
}

/// One seeded member of the lemma's test suite; the hypothesis fields are
/// drawn at random and `eps` sits at or above the threshold.
pub fn random_family(seed: u64) -> SyntheticFamily {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let alpha = rng.gen_range(0.0..2.0);
    let hypothesis = IterationHypothesis {
        m0_const: rng.gen_range(0.1..10.0),
        alpha,
        beta: alpha + rng.gen_range(0.5..5.0),
        sigma: rng.gen_range(1.1..3.0),
        m0: rng.gen_range(0.0..5.0),
        f0: 0.0,
    };
    let l_star = hypothesis.m0 + rng.gen_range(0.1..10.0);
    let factor = 1.0 + rng.gen_range(0.0..1.0);
    let samples = rng.gen_range(8..48);
    let (eps, levels, values) = step_family(hypothesis, l_star, factor, samples).expect("generated fields are valid");
    SyntheticFamily {
        seed,
        hypothesis: IterationHypothesis { f0: eps, ..hypothesis },
        l_star,
        levels,
        values,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyReport {
    pub seed: u64,
    pub hypothesis: IterationHypothesis,
    pub d: f64,
    pub hypothesis_holds: bool,
    pub worst_ratio: f64,
    /// `f = 0` at every sampled level `>= m0 + d`.
    pub conclusion_holds: bool,
}

/// Re-verifies the hypothesis by brute force and then checks the conclusion.
pub fn check_family(family: &SyntheticFamily) -> Result<FamilyReport> {
    let h = family.hypothesis;
    let d = iteration_gap(&h)?;
    let check = verify_hypothesis(&family.levels, &family.values, &h)?;
    let conclusion_holds = family
        .levels
        .iter()
        .zip(&family.values)
        .filter(|(l, _)| **l >= h.m0 + d)
        .all(|(_, v)| *v == 0.0);
    Ok(FamilyReport {
        seed: family.seed,
        hypothesis: h,
        d,
        hypothesis_holds: check.holds,
        worst_ratio: check.worst_ratio,
        conclusion_holds,
    })
}

/// Runs `count` seeded families starting at `seed`.
pub fn family_suite(seed: u64, count: usize) -> Result<Vec<FamilyReport>> {
    (0..count as u64)
        .map(|k| check_family(&random_family(seed.wrapping_add(k))))
        .collect()
}

/// Vanishing analysis of one run's ladders, for the JSON report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VanishingReport {
    pub lower_level: Option<f64>,
    pub upper_level: Option<f64>,
    pub ell_lower0: f64,
    pub ell_upper0: f64,
    /// Non-certified fit of `C` in `Q_l <= C (l - m)^-beta Q_m^sigma`.
    pub fitted_upper_constant: f64,
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn base() -> IterationHypothesis {
        IterationHypothesis {
            m0_const: 1.0,
            alpha: 0.0,
            beta: 4.0,
            sigma: 2.0,
            m0: 0.0,
            f0: 1.0,
        }
    }

    #[test]
    fn closed_form_example() {
        let h = base();
        assert_eq!(h.gap_exponent(), 18.0);
        let want = (2.0 * 3f64.powi(18)).powf(0.25) + 2.0;
        let got = iteration_gap(&h).unwrap();
        assert!((got - want).abs() <= 1e-12 * want, "{got} vs {want}");
        assert!((got - 168.841_138_656).abs() < 1e-8);
    }

    #[test]
    fn zero_base_value_gives_two() {
        assert_eq!(iteration_gap(&IterationHypothesis { f0: 0.0, ..base() }).unwrap(), 2.0);
    }

    #[test]
    fn rejects_bad_exponents() {
        assert!(iteration_gap(&IterationHypothesis { alpha: 4.0, ..base() }).is_err());
        assert!(iteration_gap(&IterationHypothesis { sigma: 1.0, ..base() }).is_err());
        assert!(iteration_gap(&IterationHypothesis { m0: -1.0, ..base() }).is_err());
    }

    #[test]
    fn zero_function_satisfies_hypothesis() {
        let levels = [0.0, 1.0, 2.0, 3.0];
        let c = verify_hypothesis(&levels, &[0.0; 4], &base()).unwrap();
        assert!(c.holds);
        assert_eq!(c.worst_ratio, 0.0);
    }

    #[test]
    fn step_family_threshold() {
        let h = IterationHypothesis { m0_const: 2.0, m0: 1.0, ..base() };
        let (_, levels, values) = step_family(h, 4.0, 1.0, 32).unwrap();
        assert!(verify_hypothesis(&levels, &values, &h).unwrap().holds);
        let (_, levels, values) = step_family(h, 4.0, 0.5, 32).unwrap();
        let c = verify_hypothesis(&levels, &values, &h).unwrap();
        assert!(!c.holds);
        let (l, m) = c.worst_pair.unwrap();
        // widest pair inside the support
        assert_eq!(m, 1.0);
        assert!(l < 4.0 && l > 3.8);
    }

    #[test]
    fn suite_conclusion_holds() {
        let reports = family_suite(7, 200).unwrap();
        assert!(reports.iter().all(|r| r.hypothesis_holds && r.conclusion_holds));
    }

    #[test]
    fn vanishing_levels() {
        let zeros = [(0.0, 0.0), (1.0, 0.0), (2.0, 0.0)];
        assert_eq!(vanishing_level(&zeros, LadderSide::Lower, ZERO_TOL).unwrap(), Some(2.0));
        assert_eq!(vanishing_level(&zeros, LadderSide::Upper, ZERO_TOL).unwrap(), Some(0.0));

        let q = [(-3.0, 0.0), (-2.0, 0.0), (-1.0, 0.5), (0.0, 2.0)];
        assert_eq!(vanishing_level(&q, LadderSide::Lower, ZERO_TOL).unwrap(), Some(-2.0));
        let big_q = [(1.0, 3.0), (2.0, 1.0), (3.0, 0.0), (4.0, 0.0)];
        assert_eq!(vanishing_level(&big_q, LadderSide::Upper, ZERO_TOL).unwrap(), Some(3.0));
        assert_eq!(vanishing_level(&[(0.0, 1.0), (1.0, 2.0)], LadderSide::Lower, ZERO_TOL).unwrap(), None);

        let bad = [(0.0, 1.0), (1.0, 0.5)];
        assert!(matches!(
            vanishing_level(&bad, LadderSide::Lower, ZERO_TOL),
            Err(Error::NonMonotoneLadder { .. })
        ));
    }

    #[test]
    fn fitted_constant_of_geometric_ladder() {
        // Q_l = 2^-l: Q_l (l - m)^1 / Q_m^1 is largest for the widest pair
        let pairs: Vec<(f64, f64)> = (0..5).map(|k| (k as f64, 0.5f64.powi(k))).collect();
        let c = fitted_recursion_constant(&pairs, 0.0, 1.0, 1.0);
        assert!((c - 0.5).abs() < 1e-15);
    }

    #[test]
    fn report_serializes() {
        let r = check_family(&random_family(3)).unwrap();
        let json = serde_json::to_string(&r).unwrap();
        assert!(json.contains("\"hypothesis\""));
        assert_eq!(serde_json::from_str::<FamilyReport>(&json).unwrap(), r);
    }

    proptest! {
        #[test]
        fn gap_is_at_least_two_and_monotone(f0 in 0.0f64..10.0, df in 0.0f64..5.0, m in 0.0f64..10.0, dm in 0.0f64..5.0) {
            let h = IterationHypothesis { f0, m0_const: m, ..base() };
            let d = iteration_gap(&h).unwrap();
            prop_assert!(d >= 2.0);
            let more_f0 = IterationHypothesis { f0: f0 + df, ..h };
            let more_m0 = IterationHypothesis { m0_const: m + dm, ..h };
            prop_assert!(iteration_gap(&more_f0).unwrap() >= d);
            prop_assert!(iteration_gap(&more_m0).unwrap() >= d);
        }

        #[test]
        fn conclusion_on_verified_families(seed in 0u64..10_000) {
            let r = check_family(&random_family(seed)).unwrap();
            if r.hypothesis_holds {
                prop_assert!(r.conclusion_holds);
            }
        }
    }
}
