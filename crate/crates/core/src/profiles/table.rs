use std::path::Path;

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::tridiag::solve_tridiagonal;

/// Tabulated initial data: columns `y, rho0[, v0]`, strictly increasing `y`.
///
/// Blank lines and lines starting with `#` are skipped; columns may be
/// separated by commas or whitespace.
#[derive(Debug, Clone, PartialEq)]
pub struct ProfileTable {
    pub y: Vec<f64>,
    pub rho0: Vec<f64>,
    pub v0: Option<Vec<f64>>,
}

impl ProfileTable {
    pub fn parse(text: &str) -> Result<Self> {
        let mut y = Vec::new();
        let mut rho0 = Vec::new();
        let mut v0 = Vec::new();
        let mut columns = None;
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<f64> = line
                .split(|c: char| c == ',' || c.is_whitespace())
                .filter(|s| !s.is_empty())
                .map(|s| {
                    s.parse::<f64>()
                        .map_err(|e| Error::Table(format!("line {}: `{s}`: {e}", lineno + 1)))
                })
                .collect::<Result<_>>()?;
            if !(2..=3).contains(&fields.len()) {
                return Err(Error::Table(format!(
                    "line {}: expected 2 or 3 columns, found {}",
                    lineno + 1,
                    fields.len()
                )));
            }
            match columns {
                None => columns = Some(fields.len()),
                Some(c) if c != fields.len() => {
                    return Err(Error::Table(format!(
                        "line {}: column count changed from {c} to {}",
                        lineno + 1,
                        fields.len()
                    )))
                }
                _ => {}
            }
            if let Some(i) = fields.iter().position(|x| !x.is_finite()) {
                return Err(Error::Table(format!("line {}: column {} is not finite", lineno + 1, i + 1)));
            }
            if let Some(&last) = y.last() {
                if fields[0] <= last {
                    return Err(Error::Table(format!("line {}: y is not strictly increasing", lineno + 1)));
                }
            }
            y.push(fields[0]);
            rho0.push(fields[1]);
            if fields.len() == 3 {
                v0.push(fields[2]);
            }
        }
        if y.len() < 4 {
            return Err(Error::Table(format!("need at least 4 rows, found {}", y.len())));
        }
        if let Some(i) = rho0.iter().position(|&r| r <= 0.0) {
            return Err(Error::InteriorVacuum { y: y[i], value: rho0[i] });
        }
        let v0 = (columns == Some(3)).then_some(v0);
        Ok(Self { y, rho0, v0 })
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Table(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn interpolate_density(&self, grid: &Grid) -> Result<Vec<f64>> {
        self.check_range(grid)?;
        let spline = NaturalSpline::new(&self.y, &self.rho0)?;
        Ok(grid.nodes().iter().map(|&x| spline.eval(x)).collect())
    }

    pub fn interpolate_velocity(&self, grid: &Grid) -> Result<Option<Vec<f64>>> {
        let Some(v0) = &self.v0 else { return Ok(None) };
        self.check_range(grid)?;
        let spline = NaturalSpline::new(&self.y, v0)?;
        Ok(Some(grid.nodes().iter().map(|&x| spline.eval(x)).collect()))
    }

    fn check_range(&self, grid: &Grid) -> Result<()> {
        let (lo, hi) = (self.y[0], self.y[self.y.len() - 1]);
        let l = grid.half_width();
        if lo > -l || hi < l {
            return Err(Error::Table(format!(
                "table covers [{lo}, {hi}] but the grid needs [{}, {l}]",
                -l
            )));
        }
        Ok(())
    }
}

/// Natural cubic spline through `(x_k, f_k)`.
struct NaturalSpline<'a> {
    x: &'a [f64],
    f: &'a [f64],
    m: Vec<f64>,
}

impl<'a> NaturalSpline<'a> {
    fn new(x: &'a [f64], f: &'a [f64]) -> Result<Self> {
        let n = x.len();
        let mut lower = vec![0.0; n];
        let mut diag = vec![1.0; n];
        let mut upper = vec![0.0; n];
        let mut rhs = vec![0.0; n];
        for i in 1..n - 1 {
            let (h0, h1) = (x[i] - x[i - 1], x[i + 1] - x[i]);
            lower[i] = h0;
            diag[i] = 2.0 * (h0 + h1);
            upper[i] = h1;
            rhs[i] = 6.0 * ((f[i + 1] - f[i]) / h1 - (f[i] - f[i - 1]) / h0);
        }
        let m = solve_tridiagonal(&lower, &diag, &upper, &rhs)?;
        Ok(Self { x, f, m })
    }

    fn eval(&self, t: f64) -> f64 {
        let n = self.x.len();
        let k = match self.x.partition_point(|&xi| xi <= t) {
            0 => 0,
            p if p >= n => n - 2,
            p => p - 1,
        };
        let (x0, x1) = (self.x[k], self.x[k + 1]);
        let h = x1 - x0;
        let a = (x1 - t) / h;
        let b = (t - x0) / h;
        a * self.f[k]
            + b * self.f[k + 1]
            + ((a * a * a - a) * self.m[k] + (b * b * b - b) * self.m[k + 1]) * h * h / 6.0
    }
}
