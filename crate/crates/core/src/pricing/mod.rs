//! Monte Carlo pricing of kernels under correlated geometric Brownian
//! motion.

pub mod bs;
pub mod mc;
pub mod model;

pub use bs::black_scholes_call;
pub use mc::{
    price_across_time, price_by_reduction, price_mc, reduction_path_value, KernelPricer, PriceResult,
};
pub use model::{cholesky, LabelSpec, ModelSpec, Simulator};
