//! Electromagnetically induced chirality and negative refraction in a
//! four-level atomic medium.
//!
//! The numerical kernels are generic over [`Real`] (`f32`, `f64`). The
//! sweep engine and reports work in `f64`; the aliases below name the `f64`
//! instantiations.

// Negated comparisons make NaN fail every guard.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytic;
pub mod electro;
pub mod error;
pub mod linalg;
pub mod model;
pub mod oracle;
pub mod pipeline;
pub mod report;
pub mod scalar;
pub mod sweep;

pub use analytic::FormulaMode;
pub use electro::{BranchPolicy, Handedness};
pub use error::{Error, Result};
pub use model::{DipoleMode, ScaledConfig};
pub use oracle::EquationMode;
pub use pipeline::{evaluate_point, PipelineModes};
pub use scalar::{Cplx, Real};

pub type Complex = Cplx<f64>;
pub type Params = model::AtomicParams<f64>;
pub type Denominators = analytic::DenominatorSet<f64>;
pub type Coefficients = analytic::ResponseCoefficients<f64>;
pub type Alphas = analytic::Polarizabilities<f64>;
pub type Constitutive = electro::ConstitutiveParams<f64>;
pub type Index = electro::IndexResult<f64>;
pub type Evaluation = pipeline::PointEvaluation<f64>;
pub type Numeric = oracle::NumericResponse<f64>;
