use serde::{Deserialize, Serialize};

use crate::error::{param, Result};

/// Gas and transport constants of a polytropic, heat-conductive gas.
///
/// The adiabatic exponent is always derived as `1 + R / c_v`; it cannot be
/// set independently.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawParams", into = "RawParams")]
pub struct PhysParams {
    mu: f64,
    kappa: f64,
    r: f64,
    c_v: f64,
    a: f64,
    gamma: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawParams {
    mu: f64,
    kappa: f64,
    r: f64,
    c_v: f64,
    a: f64,
}

impl TryFrom<RawParams> for PhysParams {
    type Error = crate::Error;
    fn try_from(raw: RawParams) -> Result<Self> {
        PhysParams::new(raw.mu, raw.kappa, raw.r, raw.c_v, raw.a)
    }
}

impl From<PhysParams> for RawParams {
    fn from(p: PhysParams) -> Self {
        RawParams {
            mu: p.mu,
            kappa: p.kappa,
            r: p.r,
            c_v: p.c_v,
            a: p.a,
        }
    }
}

fn positive(field: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(param(field, format!("must be finite and > 0, got {value}")))
    }
}

impl PhysParams {
    pub fn new(mu: f64, kappa: f64, r: f64, c_v: f64, a: f64) -> Result<Self> {
        positive("mu", mu)?;
        positive("kappa", kappa)?;
        positive("R", r)?;
        positive("c_v", c_v)?;
        positive("A", a)?;
        let gamma = Self::gamma_of(r, c_v);
        if gamma <= 1.0 {
            // R/c_v underflowed relative to 1
            return Err(param("R", "R / c_v too small: gamma rounds to 1"));
        }
        Ok(Self {
            mu,
            kappa,
            r,
            c_v,
            a,
            gamma,
        })
    }

    /// Parameters with a prescribed adiabatic exponent: `R = (gamma - 1) c_v`.
    pub fn with_gamma(mu: f64, kappa: f64, gamma: f64, c_v: f64, a: f64) -> Result<Self> {
        if !(gamma.is_finite() && gamma > 1.0) {
            return Err(param("gamma", format!("must be > 1, got {gamma}")));
        }
        Self::new(mu, kappa, (gamma - 1.0) * c_v, c_v, a)
    }

    #[inline]
    fn gamma_of(r: f64, c_v: f64) -> f64 {
        1.0 + r / c_v
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }
    pub fn kappa(&self) -> f64 {
        self.kappa
    }
    pub fn r(&self) -> f64 {
        self.r
    }
    pub fn c_v(&self) -> f64 {
        self.c_v
    }
    pub fn a(&self) -> f64 {
        self.a
    }
    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// `gamma` as recomputed from `R` and `c_v`.
    pub fn recomputed_gamma(&self) -> f64 {
        Self::gamma_of(self.r, self.c_v)
    }
}
