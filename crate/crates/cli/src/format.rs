//! Bit-stable text output: shortest round-trip floats, LF line endings.

use std::fmt::Write as _;

/// Shortest representation that parses back to the same `f64`.
///
/// Plain notation in `[1e-5, 1e16)`, scientific outside it, so that tiny
/// residuals stay short. `NaN` and infinities use Rust's spelling.
pub fn fmt_f64(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || !x.is_finite() || (1e-5..1e16).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

/// Comma-separated table with optional leading `#` comment lines.
pub struct Table {
    text: String,
    columns: usize,
}

impl Table {
    pub fn new(comments: &[String], header: &[&str]) -> Self {
        let mut text = String::new();
        for c in comments {
            let _ = writeln!(text, "# {c}");
        }
        text.push_str(&header.join(","));
        text.push('\n');
        Self {
            text,
            columns: header.len(),
        }
    }

    /// Appends one row; every cell is already rendered.
    pub fn row(&mut self, cells: &[String]) {
        assert_eq!(cells.len(), self.columns, "row width must match the header");
        self.text.push_str(&cells.join(","));
        self.text.push('\n');
    }

    pub fn into_string(self) -> String {
        self.text
    }
}

pub fn opt_f64(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}
