//! Templated financial contracts compiled to payoff expressions, flattened
//! kernels and Monte Carlo prices.

pub mod codegen;
pub mod compiler;
pub mod contract;
pub mod error;
pub mod instruments;
pub mod json;
pub mod payoff;
pub mod pricing;
pub mod syntax;

pub use error::{Error, ErrorKind, Result};
