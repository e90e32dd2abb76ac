//! Higher-order stochastic dominance and rank-dependent utility toolkit.
//!
//! Every numeric type is generic over [`Scalar`] (`f32` or `f64`); the
//! aliases at the crate root fix the scalar to `f64`, which is what the
//! command-line front end uses.
// NaN must fail every validity check, hence `!(x >= 0)` over `x < 0`.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod distributions;
pub mod dominance;
pub mod error;
pub mod indices;
pub mod lab;
pub mod numerics;
pub mod rdu;
pub mod scalar;
pub mod utility;
pub mod weighting;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type Domain = distributions::Domain<f64>;
pub type Distribution = distributions::DiscreteDistribution<f64>;
pub type Polynomial = numerics::Polynomial<f64>;
pub type PiecewisePolynomial = numerics::PiecewisePolynomial<f64>;
pub type DominanceVerdict = dominance::DominanceVerdict<f64>;
pub type UtilityFunction = utility::UtilityFunction<f64>;
pub type WeightingFunction = weighting::WeightingFunction<f64>;
pub type RduModel = rdu::RduModel<f64>;
