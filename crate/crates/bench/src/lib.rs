//! Shared fixtures for the benchmarks.

use fowler_core::nonlocal::{
    Boundary, CoefficientTable, ConvolutionMethod, DiscretizationKind, NonlocalOperator,
    TruncationPolicy,
};

/// A smooth deterministic field of `n` values.
pub fn field(n: usize) -> Vec<f64> {
    (0..n)
        .map(|j| (0.37 * j as f64).sin() + 0.1 * (1.9 * j as f64).cos())
        .collect()
}

/// Operator with a stencil spanning the whole grid.
pub fn operator(kind: DiscretizationKind, n: usize, method: ConvolutionMethod) -> NonlocalOperator {
    let table =
        CoefficientTable::build(kind, TruncationPolicy::Terms(n), 1.0 / n as f64).expect("table");
    NonlocalOperator::new(&table, n, Boundary::Causal, method).expect("operator")
}
