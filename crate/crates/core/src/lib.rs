// negated comparisons double as NaN rejection
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod experiments;
pub mod field;
pub mod io;
pub mod model;
pub mod nonlocal;
pub mod schemes;
pub mod spectral;

pub use error::{Error, Result};
pub use field::Field;
pub use model::{
    derive_groups, evaluate_constants, Constants, DimensionlessGroups, GridSpec, PhysicalParams,
};
pub use nonlocal::{
    apply_nonlocal_fft, apply_nonlocal_naive, build_coefficients, Boundary, CoefficientTable,
    ConvolutionMethod, DiscretizationKind, NonlocalOperator, TruncationPolicy,
};
