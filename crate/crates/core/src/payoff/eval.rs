//! Evaluation of payoff expressions.

use std::fmt;

use serde::Serialize;

use super::ast::{BinOp, ILExpr, ILTExpr, ILTExprZ, UnOp};
use super::discount::Discount;
use crate::contract::{t_sem, ExtEnv, Party, TEnv};
use crate::error::{Error, Result};

/// Payoff values: day numbers, reals and booleans.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(untagged)]
pub enum ILVal {
    Nat(u64),
    Real(f64),
    Bool(bool),
}

impl fmt::Display for ILVal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ILVal::Nat(n) => write!(f, "{n}"),
            ILVal::Real(r) => write!(f, "{r:?}"),
            ILVal::Bool(b) => write!(f, "{b}"),
        }
    }
}

pub fn texpr_sem(t: &ILTExpr, tenv: &TEnv) -> Result<u64> {
    match t {
        ILTExpr::Texpr { t } => t_sem(t, tenv),
        ILTExpr::Tplus { left, right } => Ok(texpr_sem(left, tenv)? + texpr_sem(right, tenv)?),
    }
}

pub fn texpr_z_sem(t: &ILTExprZ, tenv: &TEnv) -> Result<i64> {
    match t {
        ILTExprZ::TnumZ { value } => Ok(*value),
        ILTExprZ::TexprZ { t } => Ok(texpr_sem(t, tenv)? as i64),
        ILTExprZ::TplusZ { left, right } => Ok(texpr_z_sem(left, tenv)? + texpr_z_sem(right, tenv)?),
    }
}

/// Which cashflows count, and with which sign.
#[derive(Debug, Clone, PartialEq)]
pub enum View {
    /// Flows from the first party to the second are positive, the reverse negative.
    Pair(Party, Party),
    /// Flows into the party are positive, flows out of it negative.
    Bilateral(Party),
}

impl View {
    fn sign(&self, from: &Party, to: &Party) -> f64 {
        match self {
            View::Pair(p1, p2) => {
                if from == p1 && to == p2 {
                    1.0
                } else if from == p2 && to == p1 {
                    -1.0
                } else {
                    0.0
                }
            }
            View::Bilateral(p) => {
                if to == p {
                    1.0
                } else if from == p {
                    -1.0
                } else {
                    0.0
                }
            }
        }
    }
}

/// Evaluation arguments except the accumulated shift, which is threaded
/// through evaluation.
#[derive(Debug, Clone)]
pub struct EvalArgs<'a> {
    pub env: &'a ExtEnv,
    pub tenv: &'a TEnv,
    pub now: u64,
    pub disc: &'a Discount,
    pub view: View,
}

impl<'a> EvalArgs<'a> {
    pub fn new(env: &'a ExtEnv, tenv: &'a TEnv, disc: &'a Discount, p1: Party, p2: Party) -> Self {
        EvalArgs { env, tenv, now: 0, disc, view: View::Pair(p1, p2) }
    }

    pub fn at(mut self, now: u64) -> Self {
        self.now = now;
        self
    }
}

fn mismatch(what: &str, a: ILVal, b: Option<ILVal>) -> Error {
    match b {
        Some(b) => Error::ValueType(format!("{what} applied to {a:?} and {b:?}")),
        None => Error::ValueType(format!("{what} applied to {a:?}")),
    }
}

pub(crate) fn apply_binop(op: BinOp, a: ILVal, b: ILVal) -> Result<ILVal> {
    use ILVal::*;
    Ok(match (op, a, b) {
        (BinOp::Add, Real(x), Real(y)) => Real(x + y),
        (BinOp::Sub, Real(x), Real(y)) => Real(x - y),
        (BinOp::Mult, Real(x), Real(y)) => Real(x * y),
        (BinOp::Div, Real(x), Real(y)) => {
            if y == 0.0 {
                return Err(Error::DivisionByZero);
            }
            Real(x / y)
        }
        (BinOp::Lt, Real(x), Real(y)) => Bool(x < y),
        (BinOp::Lt, Nat(x), Nat(y)) => Bool(x < y),
        (BinOp::Leq, Real(x), Real(y)) => Bool(x <= y),
        (BinOp::Leq, Nat(x), Nat(y)) => Bool(x <= y),
        (BinOp::Eq, Real(x), Real(y)) => Bool(x == y),
        (BinOp::Eq, Nat(x), Nat(y)) => Bool(x == y),
        (BinOp::And, Bool(x), Bool(y)) => Bool(x && y),
        (BinOp::Or, Bool(x), Bool(y)) => Bool(x || y),
        (op, a, b) => return Err(mismatch(op.symbol(), a, Some(b))),
    })
}

pub(crate) fn apply_unop(op: UnOp, a: ILVal) -> Result<ILVal> {
    match (op, a) {
        (UnOp::Neg, ILVal::Real(x)) => Ok(ILVal::Real(-x)),
        (UnOp::Not, ILVal::Bool(x)) => Ok(ILVal::Bool(!x)),
        (UnOp::Neg, a) => Err(mismatch("neg", a, None)),
        (UnOp::Not, a) => Err(mismatch("not", a, None)),
    }
}

fn scrutinee(v: ILVal) -> Result<bool> {
    match v {
        ILVal::Bool(b) => Ok(b),
        other => Err(mismatch("if", other, None)),
    }
}

/// `⟦il⟧(ρ, δ, t0, t, d, p1, p2)`.
pub fn il_sem(il: &ILExpr, args: &EvalArgs<'_>, t0: u64) -> Result<ILVal> {
    match il {
        ILExpr::Float { value } => Ok(ILVal::Real(*value)),
        ILExpr::Nat { value } => Ok(ILVal::Nat(*value)),
        ILExpr::Bool { value } => Ok(ILVal::Bool(*value)),
        ILExpr::Texpr { t } => Ok(ILVal::Nat(texpr_sem(t, args.tenv)? + t0)),
        ILExpr::Now => Ok(ILVal::Nat(args.now)),
        ILExpr::Model { label, time } => {
            let day = texpr_z_sem(time, args.tenv)? + t0 as i64;
            let v = args.env.lookup(label, day)?;
            Ok(match v {
                crate::contract::Value::Real(r) => ILVal::Real(r),
                crate::contract::Value::Bool(b) => ILVal::Bool(b),
            })
        }
        ILExpr::Unop { op, arg } => apply_unop(*op, il_sem(arg, args, t0)?),
        ILExpr::Binop { op, left, right } => {
            let a = il_sem(left, args, t0)?;
            let b = il_sem(right, args, t0)?;
            apply_binop(*op, a, b)
        }
        ILExpr::If { cond, then, els } => {
            if scrutinee(il_sem(cond, args, t0)?)? {
                il_sem(then, args, t0)
            } else {
                il_sem(els, args, t0)
            }
        }
        ILExpr::Loopif { cond, then, els, window } => {
            let mut remaining = t_sem(window, args.tenv)?;
            let mut shift = t0;
            loop {
                if scrutinee(il_sem(cond, args, shift)?)? {
                    return il_sem(then, args, shift);
                }
                if remaining == 0 {
                    return il_sem(els, args, shift);
                }
                remaining -= 1;
                shift += 1;
            }
        }
        ILExpr::Payoff { time, from, to } => {
            let sign = args.view.sign(from, to);
            if sign == 0.0 {
                return Ok(ILVal::Real(0.0));
            }
            let day = texpr_sem(time, args.tenv)? + t0;
            Ok(ILVal::Real(sign * args.disc.factor(day as i64)?))
        }
    }
}

/// `evalAt_t`: evaluation at current time `now` with no accumulated shift,
/// projected to a real.
pub fn eval_at(
    now: u64,
    il: &ILExpr,
    env: &ExtEnv,
    tenv: &TEnv,
    disc: &Discount,
    p1: &Party,
    p2: &Party,
) -> Result<f64> {
    let args = EvalArgs::new(env, tenv, disc, p1.clone(), p2.clone()).at(now);
    match il_sem(il, &args, 0)? {
        ILVal::Real(r) => Ok(r),
        _ => Err(Error::NonRealResult),
    }
}
