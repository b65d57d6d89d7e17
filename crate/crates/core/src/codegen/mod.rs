//! Executable payoff artifacts: reindexed kernels, their source text, and a
//! functional rendering of payoff expressions.

pub mod functional;
pub mod kernel;
pub mod source;

pub use functional::emit_functional_source;
pub use kernel::{eval_kernel, reindex, KExpr, KTime, Kernel, KernelInput};
pub use source::{emit_kernel_source, interpret_kernel_source, parse_kernel_source, Program};
