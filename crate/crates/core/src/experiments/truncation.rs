//! Local error of the linear scheme on a smooth function.

use rayon::prelude::*;

use crate::error::{invalid, Result};
use crate::model::PhysicalParams;
use crate::nonlocal::{
    continuous_nonlocal_reference, CoefficientTable, DiscretizationKind, Gaussian, TestFunction,
    TruncationPolicy,
};

use super::fit_log_slope;

/// Local error study for `φ(t, x) = e^{λ t} ψ(x)` at `(0, x0)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncationConfig {
    pub kind: DiscretizationKind,
    pub params: PhysicalParams,
    pub x0: f64,
    pub dx_values: Vec<f64>,
    /// `δt = dt_scale δx²`.
    pub dt_scale: f64,
    /// Memory length of the discrete operator.
    pub memory: f64,
    /// Time rate `λ`.
    pub rate: f64,
    pub quadrature_tolerance: f64,
}

impl TruncationConfig {
    pub fn standard(kind: DiscretizationKind) -> Self {
        Self {
            kind,
            params: PhysicalParams::new(1.0, 0.5, 1.0).expect("valid parameters"),
            x0: 0.0,
            dx_values: vec![0.1, 0.05, 0.025, 0.0125, 0.00625],
            dt_scale: 0.4,
            memory: 40.0,
            rate: 1.0,
            quadrature_tolerance: 1e-12,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.dx_values.len() < 2 {
            return Err(invalid("dx_values", "need at least 2 steps"));
        }
        if self.dx_values.iter().any(|&d| !(d > 0.0 && d.is_finite())) {
            return Err(invalid("dx_values", "must be positive"));
        }
        if !(self.dt_scale > 0.0 && self.memory > 0.0) {
            return Err(invalid("dt_scale", "dt_scale and memory must be > 0"));
        }
        Ok(())
    }
}

/// The local error and its parts at one `δx`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalError {
    pub dx: f64,
    pub dt: f64,
    pub terms: usize,
    pub time: f64,
    pub advection: f64,
    pub diffusion: f64,
    pub nonlocal: f64,
    /// `|Pφ - P_{δt,δx}φ|`
    pub total: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TruncationStudyResult {
    pub dx_values: Vec<f64>,
    pub error_values: Vec<LocalError>,
    /// Least-squares slope of `log |E|` against `log δx`.
    pub fitted_order: f64,
}

/// Exact `ℐ[ψ](x0)` by quadrature.
pub fn exact_nonlocal(phi: &dyn TestFunction, x0: f64, tol: f64) -> Result<f64> {
    Ok(continuous_nonlocal_reference(phi, x0, tol)?.value)
}

/// `ℐ_δx[ψ](x0)` with a given table.
pub fn discrete_nonlocal(table: &CoefficientTable, phi: &dyn TestFunction, x0: f64) -> f64 {
    let dx = table.dx();
    table.apply_at(|k| phi.value(x0 + k as f64 * dx))
}

/// Signed parts of `Pφ - P_{δt,δx}φ` at `(0, x0)`; `exact` is `ℐ[ψ](x0)`.
pub fn local_error(
    config: &TruncationConfig,
    phi: &dyn TestFunction,
    exact: f64,
    dx: f64,
    policy: TruncationPolicy,
) -> Result<LocalError> {
    let table = CoefficientTable::build(config.kind, policy, dx)?;
    let p = &config.params;
    let dt = config.dt_scale * dx * dx;
    let x0 = config.x0;
    let (l, c, r) = (phi.value(x0 - dx), phi.value(x0), phi.value(x0 + dx));
    let lambda = config.rate;
    let time = lambda * c - (lambda * dt).exp_m1() / dt * c;
    let advection = p.v * (phi.d1(x0) - (c - l) / dx);
    let diffusion = -p.epsilon * (phi.d2(x0) - (r - 2.0 * c + l) / (dx * dx));
    let nonlocal = p.eta * (exact - discrete_nonlocal(&table, phi, x0));
    Ok(LocalError {
        dx,
        dt,
        terms: table.truncation_count(),
        time,
        advection,
        diffusion,
        nonlocal,
        total: (time + advection + diffusion + nonlocal).abs(),
    })
}

/// Local error against `δx` at fixed memory, on a Gaussian test function.
pub fn truncation_order_study(config: &TruncationConfig) -> Result<TruncationStudyResult> {
    let phi = Gaussian {
        center: config.x0,
        width: 1.0,
        height: 1.0,
    };
    truncation_order_study_with(config, &phi)
}

pub fn truncation_order_study_with(
    config: &TruncationConfig,
    phi: &dyn TestFunction,
) -> Result<TruncationStudyResult> {
    config.validate()?;
    let exact = exact_nonlocal(phi, config.x0, config.quadrature_tolerance)?;
    let error_values = config
        .dx_values
        .par_iter()
        .map(|&dx| {
            local_error(
                config,
                phi,
                exact,
                dx,
                TruncationPolicy::Memory(config.memory),
            )
        })
        .collect::<Result<Vec<_>>>()?;
    let totals: Vec<f64> = error_values.iter().map(|e| e.total).collect();
    Ok(TruncationStudyResult {
        dx_values: config.dx_values.clone(),
        fitted_order: fit_log_slope(&config.dx_values, &totals),
        error_values,
    })
}

/// One memory length of a sweep at fixed `δx`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MemoryPoint {
    pub memory: f64,
    pub error: LocalError,
    /// `η |ℐ_δx,A[ψ] - ℐ_δx[ψ]|` against the untruncated table: the part of
    /// the local error due to the finite memory.
    pub memory_effect: f64,
}

/// Local error at fixed `δx` for each memory length.
pub fn memory_sweep(
    config: &TruncationConfig,
    phi: &dyn TestFunction,
    dx: f64,
    memories: &[f64],
) -> Result<Vec<MemoryPoint>> {
    config.validate()?;
    let exact = exact_nonlocal(phi, config.x0, config.quadrature_tolerance)?;
    let full = local_error(config, phi, exact, dx, TruncationPolicy::default())?;
    memories
        .par_iter()
        .map(|&memory| {
            let error = local_error(config, phi, exact, dx, TruncationPolicy::Memory(memory))?;
            Ok(MemoryPoint {
                memory,
                error,
                memory_effect: (error.nonlocal - full.nonlocal).abs(),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nonlocal::Affine;

    #[test]
    fn affine_has_no_nonlocal_error() {
        let c = TruncationConfig::standard(DiscretizationKind::I1);
        let phi = Affine {
            slope: 0.7,
            intercept: -0.2,
        };
        // a Grünwald table truncated by memory keeps a nonzero tail mass
        for kind in [DiscretizationKind::I1, DiscretizationKind::I2] {
            let c = TruncationConfig { kind, ..c.clone() };
            let r = truncation_order_study_with(&c, &phi).unwrap();
            for e in &r.error_values {
                assert!(e.nonlocal.abs() < 1e-9, "{kind} {}: {}", e.dx, e.nonlocal);
                assert!(e.advection.abs() < 1e-9 && e.diffusion.abs() < 1e-6);
            }
        }
    }

    #[test]
    fn memory_effect_vanishes_for_long_memory() {
        let c = TruncationConfig::standard(DiscretizationKind::I3);
        let phi = Gaussian {
            center: 0.0,
            width: 1.0,
            height: 1.0,
        };
        let m = memory_sweep(&c, &phi, 0.05, &[1.0, 2.0, 30.0]).unwrap();
        assert!(m[0].memory_effect > m[1].memory_effect);
        assert!(m[2].memory_effect < 1e-8, "{}", m[2].memory_effect);
    }

    #[test]
    fn gaussian_error_shrinks_with_dx() {
        let r =
            truncation_order_study(&TruncationConfig::standard(DiscretizationKind::I1)).unwrap();
        let t: Vec<f64> = r.error_values.iter().map(|e| e.total).collect();
        assert!(t.windows(2).all(|w| w[1] < w[0]), "{t:?}");
    }
}
