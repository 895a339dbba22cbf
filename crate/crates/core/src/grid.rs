use serde::{Deserialize, Serialize};

use crate::error::{param, Result};

/// Uniform collocated grid on the truncated domain `[-L, L]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    half_width: f64,
    cells: usize,
    h: f64,
    nodes: Vec<f64>,
    buffer_fraction: f64,
}

/// Constructor inputs for a [`Grid`], as they appear in configuration files.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    #[serde(rename = "L")]
    pub half_width: f64,
    #[serde(rename = "N")]
    pub cells: usize,
    #[serde(default = "default_buffer")]
    pub buffer_fraction: f64,
}

fn default_buffer() -> f64 {
    0.125
}

impl GridSpec {
    pub fn build(&self) -> Result<Grid> {
        make_grid(self.half_width, self.cells, self.buffer_fraction)
    }
}

/// Builds the grid `y_i = -L + i h`, `h = 2L/N`, `i = 0..=N`.
pub fn make_grid(half_width: f64, cells: usize, buffer_fraction: f64) -> Result<Grid> {
    if !(half_width.is_finite() && half_width > 0.0) {
        return Err(param("L", format!("must be > 0, got {half_width}")));
    }
    if cells < 8 {
        return Err(param("N", format!("must be >= 8, got {cells}")));
    }
    if !cells.is_multiple_of(2) {
        return Err(param("N", format!("must be even, got {cells}")));
    }
    if !(0.0..0.5).contains(&buffer_fraction) {
        return Err(param(
            "buffer_fraction",
            format!("must lie in [0, 1/2), got {buffer_fraction}"),
        ));
    }
    let h = 2.0 * half_width / cells as f64;
    let mut nodes: Vec<f64> = (0..=cells).map(|i| -half_width + i as f64 * h).collect();
    nodes[0] = -half_width;
    nodes[cells] = half_width;
    Ok(Grid {
        half_width,
        cells,
        h,
        nodes,
        buffer_fraction,
    })
}

impl Grid {
    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    /// Number of cells `N`; there are `N + 1` nodes.
    pub fn cells(&self) -> usize {
        self.cells
    }

    pub fn len(&self) -> usize {
        self.cells + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn buffer_fraction(&self) -> f64 {
        self.buffer_fraction
    }

    /// Index range kept by the entropy diagnostics: a strip of width
    /// `buffer_fraction * 2L` is dropped at each end.
    pub fn interior(&self) -> std::ops::RangeInclusive<usize> {
        let skip = (self.buffer_fraction * self.cells as f64).ceil() as usize;
        let skip = skip.min(self.cells / 2);
        skip..=self.cells - skip
    }

    /// Node indices with `|y| <= radius`.
    pub fn within(&self, radius: f64) -> impl Iterator<Item = usize> + '_ {
        // tolerance keeps y = +-L/2 inside on every grid
        let tol = 1e-12 * self.half_width;
        self.nodes
            .iter()
            .enumerate()
            .filter(move |(_, y)| y.abs() <= radius + tol)
            .map(|(i, _)| i)
    }

    pub fn spec(&self) -> GridSpec {
        GridSpec {
            half_width: self.half_width,
            cells: self.cells,
            buffer_fraction: self.buffer_fraction,
        }
    }
}
