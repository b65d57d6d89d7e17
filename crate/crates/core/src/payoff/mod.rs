//! The payoff intermediate language.

pub mod ast;
pub mod cut;
pub mod discount;
pub mod eval;
pub mod print;

pub use ast::{BinOp, ILExpr, ILTExpr, ILTExprZ, UnOp};
pub use cut::cut_payoff;
pub use discount::{Discount, DiscountSpec};
pub use eval::{eval_at, il_sem, texpr_sem, texpr_z_sem, EvalArgs, ILVal, View};
