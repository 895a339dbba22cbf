use crate::error::{Error, Result};

/// Nodal unknowns `(J, v, theta)` at time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct SimState {
    pub t: f64,
    pub j: Vec<f64>,
    pub v: Vec<f64>,
    pub theta: Vec<f64>,
}

impl SimState {
    pub fn new(t: f64, j: Vec<f64>, v: Vec<f64>, theta: Vec<f64>) -> Result<Self> {
        let s = Self { t, j, v, theta };
        s.validate()?;
        Ok(s)
    }

    pub fn len(&self) -> usize {
        self.j.len()
    }

    pub fn is_empty(&self) -> bool {
        self.j.is_empty()
    }

    /// Checks `J > 0`, `theta >= 0`, finiteness and consistent lengths.
    pub fn validate(&self) -> Result<()> {
        let n = self.j.len();
        if self.v.len() != n || self.theta.len() != n {
            return Err(Error::Usage(format!(
                "state arrays have lengths J={}, v={}, theta={}",
                n,
                self.v.len(),
                self.theta.len()
            )));
        }
        self.check_finite()?;
        if let Some(i) = self.j.iter().position(|&x| x <= 0.0) {
            return Err(crate::error::param(
                "J",
                format!("must be > 0, J[{i}] = {}", self.j[i]),
            ));
        }
        if let Some(i) = self.theta.iter().position(|&x| x < 0.0) {
            return Err(crate::error::param(
                "theta",
                format!("must be >= 0, theta[{i}] = {}", self.theta[i]),
            ));
        }
        Ok(())
    }

    pub fn check_finite(&self) -> Result<()> {
        for (field, arr) in [("J", &self.j), ("v", &self.v), ("theta", &self.theta)] {
            if let Some(index) = arr.iter().position(|x| !x.is_finite()) {
                return Err(Error::NonFinite { field, index });
            }
        }
        if !self.t.is_finite() {
            return Err(Error::NonFinite { field: "t", index: 0 });
        }
        Ok(())
    }

    /// Largest nodewise difference over the three fields.
    pub fn max_abs_diff(&self, other: &SimState) -> f64 {
        let d = |a: &[f64], b: &[f64]| {
            a.iter()
                .zip(b)
                .map(|(x, y)| (x - y).abs())
                .fold(0.0, f64::max)
        };
        d(&self.j, &other.j)
            .max(d(&self.v, &other.v))
            .max(d(&self.theta, &other.theta))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn invariants() {
        assert!(SimState::new(0.0, vec![1.0; 3], vec![0.0; 3], vec![0.0; 3]).is_ok());
        assert!(SimState::new(0.0, vec![1.0, 0.0, 1.0], vec![0.0; 3], vec![0.0; 3]).is_err());
        assert!(SimState::new(0.0, vec![1.0; 3], vec![0.0; 3], vec![0.0, -1e-300, 0.0]).is_err());
        assert!(matches!(
            SimState::new(0.0, vec![1.0; 3], vec![f64::NAN; 3], vec![0.0; 3]),
            Err(Error::NonFinite { field: "v", index: 0 })
        ));
        assert!(SimState::new(0.0, vec![1.0; 3], vec![0.0; 2], vec![0.0; 3]).is_err());
    }
}
