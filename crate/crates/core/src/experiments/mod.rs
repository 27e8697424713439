//! Reproduction of the tables, the refinement studies and the mode oracle.

pub mod convergence;
pub mod mode;
pub mod tables;
pub mod truncation;

pub use convergence::{convergence_study, e1_distance, Bump, ConvergenceConfig, ConvergenceResult};
pub use mode::{mode_oracle, ModeDeviation, ModeOracle};
pub use tables::{
    compare_table, reproduce_table, Angle, CellComparison, Column, TableLayout, TableRow,
};
pub use truncation::{
    memory_sweep, truncation_order_study, LocalError, MemoryPoint, TruncationConfig,
    TruncationStudyResult,
};

/// Least-squares slope of `log y` against `log x`.
pub fn fit_log_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len().min(y.len()) as f64;
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slope_of_power_law() {
        let x = [0.1, 0.05, 0.025];
        let y: Vec<f64> = x.iter().map(|v: &f64| 3.0 * v.powf(2.0 / 3.0)).collect();
        assert!((fit_log_slope(&x, &y) - 2.0 / 3.0).abs() < 1e-12);
    }
}
