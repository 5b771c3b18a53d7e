//! Numerical and symbolic toolkit for the linear canonical Dunkl transform.
//!
//! Everything up to [`operators`] and [`sobolev`] is generic over the scalar
//! type through [`Real`]. The estimators in [`paleywiener`] work in `f64`.

pub mod error;
pub mod scalar;
pub mod specfun;

pub use error::{Error, Result};
pub use scalar::Real;
pub mod quadrature;
pub mod symfun;
pub mod transform;
pub mod corpus;
pub mod operators;
pub mod sobolev;
pub mod paleywiener;

pub type Matrix = specfun::CanonicalMatrix<f64>;
pub type Param = specfun::DunklParameter<f64>;
pub type Rule = quadrature::QuadratureRule<f64>;
pub type Function = quadrature::SampledFunction<f64>;
pub type Spectrum = transform::Spectrum<f64>;
pub type Plan = transform::LcdtPlan<f64>;
pub type Pipeline = operators::SpectralPipeline<f64>;
pub type Expr = symfun::SymExpr<f64>;

pub type Matrix32 = specfun::CanonicalMatrix<f32>;
pub type Param32 = specfun::DunklParameter<f32>;
pub type Function32 = quadrature::SampledFunction<f32>;
pub type Spectrum32 = transform::Spectrum<f32>;
pub type Plan32 = transform::LcdtPlan<f32>;
