//! The contract language: syntax, typing, trace semantics, templates and
//! reduction.

pub mod ast;
pub mod env;
pub mod reduce;
pub mod semantics;
pub mod template;
pub mod trace;
pub mod typing;

pub use ast::{Asset, Contr, Exp, Op, Party, TExpr};
pub use env::{ExtEnv, Generator, Series, TEnv, Value};
pub use reduce::{advance, reduce_step};
pub use semantics::{contract_trace, eval_exp, t_sem, VarEnv};
pub use template::{horizon, instantiate, is_template_closed, template_vars};
pub use trace::{Flow, Trace, Trans};
pub use typing::{check_contract, type_of_exp, Type, TypeCtx};
