//! Thomas algorithm for the implicit diffusion solves.

use crate::error::{Error, Result};

/// Solves `T x = rhs` for the tridiagonal `T` with sub-diagonal `lower`,
/// main diagonal `diag` and super-diagonal `upper`, all of length `n`.
///
/// `lower[0]` and `upper[n - 1]` lie outside the matrix and are ignored.
/// Every row must satisfy `|diag_i| >= |lower_i| + |upper_i|`; the first
/// offending row is reported otherwise. Weakly dominant systems that are
/// singular surface as a zero pivot.
pub fn solve_tridiagonal(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &[f64]) -> Result<Vec<f64>> {
    let n = diag.len();
    if lower.len() != n || upper.len() != n || rhs.len() != n {
        return Err(Error::Usage(format!(
            "tridiagonal bands have lengths lower={}, diag={n}, upper={}, rhs={}",
            lower.len(),
            upper.len(),
            rhs.len()
        )));
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    for i in 0..n {
        let lo = if i > 0 { lower[i].abs() } else { 0.0 };
        let up = if i + 1 < n { upper[i].abs() } else { 0.0 };
        // the negated comparison also catches NaN coefficients
        if !(diag[i].abs() >= lo + up) || diag[i] == 0.0 {
            return Err(Error::NotDiagonallyDominant { index: i });
        }
    }

    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    let mut pivot = diag[0];
    if pivot == 0.0 {
        return Err(Error::ZeroPivot { index: 0 });
    }
    c[0] = if n > 1 { upper[0] / pivot } else { 0.0 };
    d[0] = rhs[0] / pivot;
    for i in 1..n {
        pivot = diag[i] - lower[i] * c[i - 1];
        if pivot == 0.0 || !pivot.is_finite() {
            return Err(Error::ZeroPivot { index: i });
        }
        if i + 1 < n {
            c[i] = upper[i] / pivot;
        }
        d[i] = (rhs[i] - lower[i] * d[i - 1]) / pivot;
    }

    let mut x = d;
    for i in (0..n - 1).rev() {
        x[i] -= c[i] * x[i + 1];
    }
    Ok(x)
}

/// `T x` for a tridiagonal `T` in the same band layout.
pub fn tridiagonal_apply(lower: &[f64], diag: &[f64], upper: &[f64], x: &[f64]) -> Vec<f64> {
    let n = diag.len();
    (0..n)
        .map(|i| {
            let mut s = diag[i] * x[i];
            if i > 0 {
                s += lower[i] * x[i - 1];
            }
            if i + 1 < n {
                s += upper[i] * x[i + 1];
            }
            s
        })
        .collect()
}
