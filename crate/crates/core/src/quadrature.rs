//! Composite trapezoid rules and finite-difference helpers on uniform grids.

/// Composite trapezoid of nodal samples with spacing `h`.
pub fn trapezoid(values: &[f64], h: f64) -> f64 {
    match values.len() {
        0 | 1 => 0.0,
        n => {
            let inner: f64 = values[1..n - 1].iter().sum();
            h * (inner + 0.5 * (values[0] + values[n - 1]))
        }
    }
}

/// Trapezoid of `f(i)` over the node indices `range` (inclusive ends).
pub fn trapezoid_by<F: Fn(usize) -> f64>(range: std::ops::RangeInclusive<usize>, h: f64, f: F) -> f64 {
    let (a, b) = (*range.start(), *range.end());
    if b <= a {
        return 0.0;
    }
    let inner: f64 = (a + 1..b).map(&f).sum();
    h * (inner + 0.5 * (f(a) + f(b)))
}

/// Running trapezoid: `out[i] = int_{x_0}^{x_i} f`.
pub fn cumulative_trapezoid(values: &[f64], h: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(values.len());
    let mut acc = 0.0;
    for (i, v) in values.iter().enumerate() {
        if i > 0 {
            acc += 0.5 * h * (values[i - 1] + v);
        }
        out.push(acc);
    }
    out
}

/// Centered first difference, second-order one-sided at both ends.
pub fn derivative(values: &[f64], h: f64) -> Vec<f64> {
    let n = values.len();
    let mut d = vec![0.0; n];
    if n < 3 {
        if n == 2 {
            let s = (values[1] - values[0]) / h;
            d[0] = s;
            d[1] = s;
        }
        return d;
    }
    d[0] = (-3.0 * values[0] + 4.0 * values[1] - values[2]) / (2.0 * h);
    for i in 1..n - 1 {
        d[i] = (values[i + 1] - values[i - 1]) / (2.0 * h);
    }
    d[n - 1] = (3.0 * values[n - 1] - 4.0 * values[n - 2] + values[n - 3]) / (2.0 * h);
    d
}

/// Fourth-order centered first and second differences; the two nodes nearest
/// each end fall back to second-order one-sided formulas.
pub fn derivatives_fourth_order(values: &[f64], h: f64) -> (Vec<f64>, Vec<f64>) {
    let n = values.len();
    let mut d1 = derivative(values, h);
    let mut d2 = vec![0.0; n];
    if n >= 4 {
        d2[0] = (2.0 * values[0] - 5.0 * values[1] + 4.0 * values[2] - values[3]) / (h * h);
        d2[n - 1] = (2.0 * values[n - 1] - 5.0 * values[n - 2] + 4.0 * values[n - 3] - values[n - 4]) / (h * h);
    }
    for i in 1..n.saturating_sub(1) {
        d2[i] = (values[i + 1] - 2.0 * values[i] + values[i - 1]) / (h * h);
    }
    for i in 2..n.saturating_sub(2) {
        let (m2, m1, c, p1, p2) = (values[i - 2], values[i - 1], values[i], values[i + 1], values[i + 2]);
        d1[i] = (m2 - 8.0 * m1 + 8.0 * p1 - p2) / (12.0 * h);
        d2[i] = (-m2 + 16.0 * m1 - 30.0 * c + 16.0 * p1 - p2) / (12.0 * h * h);
    }
    (d1, d2)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trapezoid_exact_on_linear() {
        let h = 0.1;
        let v: Vec<f64> = (0..=10).map(|i| 2.0 * i as f64 * h + 1.0).collect();
        assert!((trapezoid(&v, h) - 2.0).abs() < 1e-14);
        assert!((trapezoid_by(0..=10, h, |i| v[i]) - 2.0).abs() < 1e-14);
        let c = cumulative_trapezoid(&v, h);
        assert!((c[10] - 2.0).abs() < 1e-14);
        assert_eq!(c[0], 0.0);
    }

    #[test]
    fn derivative_exact_on_quadratic() {
        let h = 0.25;
        let v: Vec<f64> = (0..9).map(|i| (i as f64 * h).powi(2)).collect();
        for (i, d) in derivative(&v, h).iter().enumerate() {
            assert!((d - 2.0 * i as f64 * h).abs() < 1e-12);
        }
    }

    #[test]
    fn fourth_order_on_quartic() {
        let h = 0.1;
        let y = |i: usize| i as f64 * h;
        let v: Vec<f64> = (0..20).map(|i| y(i).powi(4)).collect();
        let (d1, d2) = derivatives_fourth_order(&v, h);
        for i in 2..18 {
            assert!((d1[i] - 4.0 * y(i).powi(3)).abs() < 1e-10);
            assert!((d2[i] - 12.0 * y(i).powi(2)).abs() < 1e-9);
        }
    }
}
