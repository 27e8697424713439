use crate::error::{Error, Result};
use crate::model::GridSpec;

/// Grid values `u_j`, `j = 0..n_cells`, at one time level.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    values: Vec<f64>,
    grid: GridSpec,
    time: f64,
}

impl Field {
    pub fn new(values: Vec<f64>, grid: GridSpec, time: f64) -> Result<Self> {
        if values.len() != grid.n_cells() {
            return Err(Error::LengthMismatch {
                expected: grid.n_cells(),
                got: values.len(),
            });
        }
        if let Some(j) = values.iter().position(|v| !v.is_finite()) {
            return Err(crate::error::invalid(
                "field",
                format!("value at index {j} is not finite"),
            ));
        }
        Ok(Self { values, grid, time })
    }

    pub fn zeros(grid: GridSpec) -> Self {
        Self {
            values: vec![0.0; grid.n_cells()],
            grid,
            time: 0.0,
        }
    }

    pub fn from_fn(grid: GridSpec, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values = (0..grid.n_cells()).map(|j| f(grid.x(j))).collect();
        Self::new(values, grid, 0.0)
    }

    // Internal constructor for arithmetic results; finiteness is checked by callers.
    pub(crate) fn from_parts(values: Vec<f64>, grid: GridSpec, time: f64) -> Self {
        debug_assert_eq!(values.len(), grid.n_cells());
        Self { values, grid, time }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Discrete H¹ seminorm `(Σ (u_{j+1} - u_j)² / dx)^{1/2}`.
    pub fn h1_seminorm(&self) -> f64 {
        let dx = self.grid.dx();
        let s: f64 = self
            .values
            .windows(2)
            .map(|w| (w[1] - w[0]) * (w[1] - w[0]))
            .sum();
        (s / dx).sqrt()
    }
}
