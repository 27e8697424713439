//! Grid refinement study on the `E₁` distance between successive grids.

use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::field::Field;
use crate::model::{GridSpec, PhysicalParams};
use crate::nonlocal::{Boundary, ConvolutionMethod, DiscretizationKind, TruncationPolicy};
use crate::schemes::{make_initial_bump, FluxKind, SchemeConfig, Stepper};

use super::fit_log_slope;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bump {
    pub center: f64,
    pub width: f64,
    pub height: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceConfig {
    pub kind: DiscretizationKind,
    pub flux: FluxKind,
    pub params: PhysicalParams,
    pub domain_length: f64,
    pub t_final: f64,
    pub bump: Bump,
    /// Base steps `δx`; each is compared through `δx/2` and `δx/4`.
    pub dx_values: Vec<f64>,
    /// `δt ≈ dt_scale h²` on a grid of step `h`, rounded down to divide `T`.
    pub dt_scale: f64,
    /// Memory length; `None` keeps the whole domain.
    pub memory: Option<f64>,
    pub boundary: Boundary,
    pub method: ConvolutionMethod,
}

impl ConvergenceConfig {
    /// Defaults used for the refinement study: linear scheme, `dx ∈ {0.1, 0.05, 0.025, 0.0125}`.
    pub fn standard(kind: DiscretizationKind) -> Self {
        Self {
            kind,
            flux: FluxKind::LinearUpwind,
            params: PhysicalParams::new(1.0, 0.5, 1.0).expect("valid parameters"),
            domain_length: 4.0,
            t_final: 0.2,
            bump: Bump {
                center: 1.0,
                width: 1.0,
                height: 1.0,
            },
            dx_values: vec![0.1, 0.05, 0.025, 0.0125],
            dt_scale: 0.4,
            memory: None,
            boundary: Boundary::Causal,
            method: ConvolutionMethod::Auto,
        }
    }

    /// Set `dt_scale` so that `Df = 2 ε δt / δx²` stays at `df`.
    pub fn with_df(mut self, df: f64) -> Result<Self> {
        if !(self.params.epsilon > 0.0) {
            return Err(invalid("df", "fixing Df needs epsilon > 0"));
        }
        self.dt_scale = df / (2.0 * self.params.epsilon);
        Ok(self)
    }

    fn validate(&self) -> Result<()> {
        if self.dx_values.len() < 3 {
            return Err(invalid("dx_values", "need at least 3 refinement levels"));
        }
        if self.dx_values.windows(2).any(|w| !(w[1] < w[0])) {
            return Err(invalid("dx_values", "must be strictly decreasing"));
        }
        if self.dx_values.iter().any(|&d| !(d > 0.0 && d.is_finite())) {
            return Err(invalid("dx_values", "must be positive"));
        }
        if !(self.dt_scale > 0.0 && self.dt_scale.is_finite()) {
            return Err(invalid("dt_scale", "must be > 0"));
        }
        if !(self.t_final > 0.0 && self.t_final.is_finite()) {
            return Err(invalid("t_final", "must be > 0"));
        }
        Ok(())
    }

    /// Number of cells for step `h`.
    fn cells(&self, h: f64) -> Result<usize> {
        let n = self.domain_length / h;
        let r = n.round();
        if (n - r).abs() > 1e-6 * n.max(1.0) || r < 2.0 {
            return Err(invalid(
                "dx_values",
                format!("step {h} does not divide the domain {}", self.domain_length),
            ));
        }
        Ok(r as usize)
    }

    /// The scheme configuration on an `n`-cell grid.
    pub fn scheme(&self, n: usize) -> Result<SchemeConfig> {
        let h = self.domain_length / n as f64;
        let steps = (self.t_final / (self.dt_scale * h * h)).ceil().max(1.0);
        let grid = GridSpec::new(h, self.t_final / steps, n, self.t_final)?;
        Ok(SchemeConfig {
            kind: self.kind,
            flux: self.flux,
            params: self.params,
            grid,
            truncation: TruncationPolicy::Memory(self.memory.unwrap_or(self.domain_length)),
            boundary: self.boundary,
            method: self.method,
        })
    }

    /// Solution at `T` on an `n`-cell grid.
    pub fn solve(&self, n: usize) -> Result<Field> {
        let config = self.scheme(n)?;
        let u0 = make_initial_bump(
            &config.grid,
            self.bump.center,
            self.bump.width,
            self.bump.height,
        )?;
        let traj = Stepper::new(config)?.integrate(&u0, 0)?;
        if let Some(b) = traj.blow_up {
            return Err(Error::Study(format!(
                "run with dx = {} blew up at step {} (t = {})",
                config.grid.dx(),
                b.step,
                b.time
            )));
        }
        traj.into_final()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceResult {
    pub dx_values: Vec<f64>,
    pub e1_values: Vec<f64>,
    /// Least-squares slope of `log E₁` against `log δx`.
    pub fitted_slope: f64,
}

/// `E₁` between a coarse solution and a fine one with twice the cells, at
/// the coarse nodes.
pub fn e1_distance(coarse: &[f64], fine: &[f64]) -> Result<f64> {
    if fine.len() != 2 * coarse.len() {
        return Err(Error::LengthMismatch {
            expected: 2 * coarse.len(),
            got: fine.len(),
        });
    }
    let sum: f64 = coarse
        .iter()
        .zip(fine.iter().step_by(2))
        .map(|(a, b)| (a - b).abs())
        .sum();
    Ok(sum / coarse.len() as f64)
}

pub fn convergence_study(config: &ConvergenceConfig) -> Result<ConvergenceResult> {
    config.validate()?;
    let mut pairs = Vec::with_capacity(config.dx_values.len());
    let mut needed = BTreeMap::new();
    for &dx in &config.dx_values {
        let n2 = config.cells(dx / 2.0)?;
        let n4 = config.cells(dx / 4.0)?;
        if n4 != 2 * n2 {
            return Err(invalid(
                "dx_values",
                format!("dx/4 grid for {dx} is not a refinement of dx/2"),
            ));
        }
        needed.insert(n2, ());
        needed.insert(n4, ());
        pairs.push((n2, n4));
    }
    let cells: Vec<usize> = needed.into_keys().collect();
    let solved: Vec<Field> = cells
        .par_iter()
        .map(|&n| config.solve(n))
        .collect::<Result<_>>()?;
    let by_cells: BTreeMap<usize, &Field> = cells.iter().copied().zip(solved.iter()).collect();
    let e1_values = pairs
        .iter()
        .map(|(n2, n4)| e1_distance(by_cells[n2].values(), by_cells[n4].values()))
        .collect::<Result<Vec<_>>>()?;
    let fitted_slope = fit_log_slope(&config.dx_values, &e1_values);
    Ok(ConvergenceResult {
        dx_values: config.dx_values.clone(),
        e1_values,
        fitted_slope,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_scheme_gives_zero_distance() {
        let mut c = ConvergenceConfig::standard(DiscretizationKind::I1);
        c.params = PhysicalParams::new(0.0, 0.0, 0.0).unwrap();
        c.dx_values = vec![0.4, 0.2, 0.1];
        c.bump.width = 1.2;
        c.t_final = 0.05;
        let r = convergence_study(&c).unwrap();
        assert!(r.e1_values.iter().all(|&e| e == 0.0), "{:?}", r.e1_values);
    }

    #[test]
    fn rejects_bad_refinement() {
        let mut c = ConvergenceConfig::standard(DiscretizationKind::I2);
        c.dx_values = vec![0.1, 0.05];
        assert!(convergence_study(&c).is_err());
        c.dx_values = vec![0.1, 0.2, 0.05];
        assert!(convergence_study(&c).is_err());
        c.dx_values = vec![0.3, 0.2, 0.1];
        assert!(convergence_study(&c).is_err());
    }

    #[test]
    fn e1_uses_coincident_nodes() {
        let coarse = [1.0, 2.0, 3.0];
        let fine = [1.0, 9.0, 2.5, 9.0, 3.0, 9.0];
        assert_eq!(e1_distance(&coarse, &fine).unwrap(), 0.5 / 3.0);
        assert!(e1_distance(&coarse, &fine[..4]).is_err());
    }
}
