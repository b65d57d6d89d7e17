//! Functional-style rendering of payoff expressions: environments as keyed
//! maps, `loopif` as a higher-order function. Meant for reading, not for
//! execution.

use std::fmt::Write as _;

use crate::contract::TExpr;
use crate::payoff::{ILExpr, ILTExpr, ILTExprZ, UnOp};

fn texpr(t: &TExpr) -> String {
    match t {
        TExpr::Num { value } => value.to_string(),
        TExpr::Var { name } => format!("(tenv Map.! {name:?})"),
    }
}

fn ilt(t: &ILTExpr) -> String {
    match t {
        ILTExpr::Texpr { t } => texpr(t),
        ILTExpr::Tplus { left, right } => format!("{} + {}", ilt(left), ilt(right)),
    }
}

fn iltz(t: &ILTExprZ) -> String {
    match t {
        ILTExprZ::TnumZ { value } if *value < 0 => format!("({value})"),
        ILTExprZ::TnumZ { value } => value.to_string(),
        ILTExprZ::TexprZ { t } => ilt(t),
        ILTExprZ::TplusZ { left, right } => format!("{} + {}", iltz(left), iltz(right)),
    }
}

fn float(v: f64) -> String {
    if v.is_sign_negative() {
        format!("(-{:?})", -v)
    } else {
        format!("{v:?}")
    }
}

struct Out {
    s: String,
}

impl Out {
    fn nl(&mut self, indent: usize) {
        self.s.push('\n');
        self.s.extend(std::iter::repeat_n(' ', indent));
    }

    fn expr(&mut self, il: &ILExpr, indent: usize) {
        match il {
            ILExpr::Float { value } => self.s.push_str(&float(*value)),
            ILExpr::Nat { value } => write!(self.s, "{value}").unwrap(),
            ILExpr::Bool { value } => self.s.push_str(if *value { "True" } else { "False" }),
            ILExpr::Now => self.s.push_str("t_now"),
            ILExpr::Texpr { t } => write!(self.s, "({} + t0)", ilt(t)).unwrap(),
            ILExpr::Model { label, time } => {
                write!(self.s, "(ext Map.! ({label:?}, {} + t0))", iltz(time)).unwrap()
            }
            ILExpr::Payoff { time, from, to } => {
                let (a, b) = (format!("{:?}", from.as_str()), format!("{:?}", to.as_str()));
                write!(
                    self.s,
                    "((disc Map.! ({} + t0)) * (if ({a} == p1 && {b} == p2) then 1 else if ({a} == p2 && {b} == p1) then -1 else 0))",
                    ilt(time)
                )
                .unwrap()
            }
            ILExpr::Unop { op, arg } => {
                self.s.push_str(match op {
                    UnOp::Neg => "(negate ",
                    UnOp::Not => "(not ",
                });
                self.expr(arg, indent);
                self.s.push(')');
            }
            ILExpr::Binop { op, left, right } => {
                self.s.push('(');
                self.expr(left, indent);
                write!(self.s, " {} ", op.symbol()).unwrap();
                self.expr(right, indent);
                self.s.push(')');
            }
            ILExpr::If { cond, then, els } => self.cond(cond, then, els, indent),
            ILExpr::Loopif { cond, then, els, window } if window.as_num() == Some(0) => {
                self.cond(cond, then, els, indent)
            }
            ILExpr::Loopif { cond, then, els, window } => {
                write!(self.s, "(loopif {} t0", texpr(window)).unwrap();
                for part in [cond, then, els] {
                    self.nl(indent + 2);
                    self.s.push_str("(\\t0 -> ");
                    self.expr(part, indent + 4);
                    self.s.push(')');
                }
                self.s.push(')');
            }
        }
    }

    fn cond(&mut self, cond: &ILExpr, then: &ILExpr, els: &ILExpr, indent: usize) {
        self.s.push_str("(if ");
        self.expr(cond, indent + 4);
        self.nl(indent + 2);
        self.s.push_str("then ");
        self.expr(then, indent + 4);
        self.nl(indent + 2);
        self.s.push_str("else ");
        self.expr(els, indent + 4);
        self.s.push(')');
    }
}

/// Module text defining `payoff ext tenv disc t_now p1 p2`.
pub fn emit_functional_source(il: &ILExpr) -> String {
    let mut o = Out { s: String::new() };
    o.s.push_str("module Payoff where\n\nimport qualified Data.Map as Map\n\n");
    o.s.push_str("loopif :: Int -> Int -> (Int -> Bool) -> (Int -> a) -> (Int -> a) -> a\n");
    o.s.push_str(
        "loopif n t0 b e1 e2 =\n  if b t0 then e1 t0\n  else if n > 0 then loopif (n - 1) (t0 + 1) b e1 e2\n  else e2 t0\n\n",
    );
    o.s.push_str("payoffInternal ext tenv disc t0 t_now p1 p2 =");
    o.nl(2);
    o.expr(il, 2);
    o.s.push_str("\n\npayoff ext tenv disc t_now p1 p2 = payoffInternal ext tenv disc 0 t_now p1 p2\n");
    o.s
}
