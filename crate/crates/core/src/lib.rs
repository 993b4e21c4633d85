//! Recursive fractional spectral Tau method for systems of Abel-Volterra
//! integral equations on `[0, 1]`.

pub mod basis;
pub mod canonical;
pub mod config;
pub mod dd;
pub mod error;
pub mod examples;
pub mod expr;
pub mod fracpoly;
pub mod operator;
pub mod problem;
pub mod quadrature;
pub mod series;
pub mod special;
pub mod tau;

pub use error::{Error, Result};
pub use fracpoly::{FracBivar, FracPoly, FracPolyVec};
pub use operator::LambdaSet;
pub use problem::{ComponentFn, Forcing, Problem, Rational};
pub use series::SeriesSolution;
