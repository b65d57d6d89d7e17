//! Contracts to payoff expressions, accumulating time shifts into template
//! expressions.

use std::cell::Cell;

use crate::contract::{Contr, Exp, Op, TExpr};
use crate::error::{Error, Result};
use crate::payoff::{BinOp, ILExpr, ILTExpr, ILTExprZ, UnOp};

thread_local! {
    static FROM_CONTR_CALLS: Cell<u64> = const { Cell::new(0) };
}

/// Number of top-level [`from_contr`] invocations made on this thread.
pub fn from_contr_calls() -> u64 {
    FROM_CONTR_CALLS.with(Cell::get)
}

/// Adds two natural template expressions, folding numerals.
pub fn tplus_smart(a: ILTExpr, b: ILTExpr) -> ILTExpr {
    match (a.as_num(), b.as_num()) {
        (Some(x), Some(y)) => ILTExpr::num(x + y),
        _ => ILTExpr::tplus(a, b),
    }
}

/// Adds two integer template expressions, folding numerals (including
/// lifted natural numerals).
pub fn tplus_smart_z(a: ILTExprZ, b: ILTExprZ) -> ILTExprZ {
    match (a.as_num(), b.as_num()) {
        (Some(x), Some(y)) => ILTExprZ::num(x + y),
        _ => ILTExprZ::tplus(a, b),
    }
}

fn unsupported(construct: &'static str, path: &[&'static str]) -> Error {
    Error::Unsupported {
        construct,
        path: if path.is_empty() { "<root>".into() } else { path.join("/") },
    }
}

/// Compiles an expression observed at time `t0`.
pub fn from_exp(e: &Exp, t0: &ILTExprZ) -> Result<ILExpr> {
    exp(e, t0, &mut Vec::new())
}

fn exp(e: &Exp, t0: &ILTExprZ, path: &mut Vec<&'static str>) -> Result<ILExpr> {
    match e {
        Exp::Real { value } => Ok(ILExpr::float(*value)),
        Exp::Bool { value } => Ok(ILExpr::Bool { value: *value }),
        Exp::Obs { label, offset } => Ok(ILExpr::model(
            label.clone(),
            tplus_smart_z(t0.clone(), ILTExprZ::num(*offset)),
        )),
        Exp::Var { .. } => Err(unsupported("var", path)),
        Exp::Acc { .. } => Err(unsupported("acc", path)),
        Exp::Op { op, args } => {
            if args.len() != op.arity() {
                return Err(Error::Type {
                    path: path.join("/"),
                    msg: format!("{} expects {} arguments", op.name(), op.arity()),
                });
            }
            path.push(op.name());
            let mut sub = Vec::with_capacity(args.len());
            for a in args {
                sub.push(exp(a, t0, path)?);
            }
            path.pop();
            let mut sub = sub.into_iter();
            let mut next = || sub.next().expect("arity checked");
            Ok(match op {
                Op::Neg => ILExpr::unop(UnOp::Neg, next()),
                Op::Not => ILExpr::unop(UnOp::Not, next()),
                Op::Cond => {
                    let (c, a, b) = (next(), next(), next());
                    ILExpr::if_(c, a, b)
                }
                other => {
                    let op = match other {
                        Op::Add => BinOp::Add,
                        Op::Sub => BinOp::Sub,
                        Op::Mult => BinOp::Mult,
                        Op::Div => BinOp::Div,
                        Op::Lt => BinOp::Lt,
                        Op::Leq => BinOp::Leq,
                        Op::Eq => BinOp::Eq,
                        Op::And => BinOp::And,
                        Op::Or => BinOp::Or,
                        Op::Neg | Op::Not | Op::Cond => unreachable!(),
                    };
                    let (l, r) = (next(), next());
                    ILExpr::binop(op, l, r)
                }
            })
        }
    }
}

/// Compiles a contract starting at time `t0`.
pub fn from_contr(c: &Contr, t0: &ILTExpr) -> Result<ILExpr> {
    FROM_CONTR_CALLS.with(|n| n.set(n.get() + 1));
    contr(c, t0, &mut Vec::new())
}

/// `⟦c⟧0`.
pub fn compile(c: &Contr) -> Result<ILExpr> {
    from_contr(c, &ILTExpr::num(0))
}

fn contr(c: &Contr, t0: &ILTExpr, path: &mut Vec<&'static str>) -> Result<ILExpr> {
    let z0 = || ILTExprZ::lift(t0.clone());
    match c {
        Contr::Zero => Ok(ILExpr::float(0.0)),
        Contr::Transfer { from, to, .. } => Ok(ILExpr::Payoff {
            time: t0.clone(),
            from: from.clone(),
            to: to.clone(),
        }),
        Contr::Let { .. } => Err(unsupported("let", path)),
        Contr::Scale { factor, body } => {
            path.push("scale");
            let f = exp(factor, &z0(), path)?;
            let b = contr(body, t0, path)?;
            path.pop();
            Ok(ILExpr::binop(BinOp::Mult, f, b))
        }
        Contr::Translate { shift, body } => {
            path.push("translate");
            let t = tplus_smart(t0.clone(), ILTExpr::Texpr { t: shift.clone() });
            let out = contr(body, &t, path)?;
            path.pop();
            Ok(out)
        }
        Contr::Both { left, right } => {
            path.push("both");
            let l = contr(left, t0, path)?;
            let r = contr(right, t0, path)?;
            path.pop();
            Ok(ILExpr::binop(BinOp::Add, l, r))
        }
        Contr::IfWithin { cond, window, then, els } => {
            path.push("if");
            let e = exp(cond, &z0(), path)?;
            let a = contr(then, t0, path)?;
            let b = contr(els, t0, path)?;
            path.pop();
            Ok(ILExpr::loopif(e, a, b, window.clone()))
        }
    }
}

/// Left-nested sum of template variables and numerals, e.g. `0+t0+t1`.
pub fn texpr_chain(parts: &[TExpr]) -> ILTExpr {
    let mut it = parts.iter().cloned();
    let first = ILTExpr::Texpr { t: it.next().unwrap_or(TExpr::num(0)) };
    it.fold(first, |acc, t| tplus_smart(acc, ILTExpr::Texpr { t }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smart_plus_folds_numerals() {
        assert_eq!(tplus_smart_z(ILTExprZ::num(2), ILTExprZ::num(3)), ILTExprZ::num(5));
        let v = ILTExprZ::lift(ILTExpr::var("t0"));
        assert_eq!(
            tplus_smart_z(ILTExprZ::num(0), v.clone()),
            ILTExprZ::tplus(ILTExprZ::num(0), v.clone())
        );
        assert_eq!(
            tplus_smart_z(v.clone(), ILTExprZ::num(90)),
            ILTExprZ::tplus(v, ILTExprZ::num(90))
        );
        assert_eq!(tplus_smart(ILTExpr::num(4), ILTExpr::num(6)), ILTExpr::num(10));
    }

    #[test]
    fn observable_at_origin() {
        let il = from_exp(&Exp::obs("AAPL", 0), &ILTExprZ::num(0)).unwrap();
        assert_eq!(il, ILExpr::model("AAPL", ILTExprZ::num(0)));
    }

    #[test]
    fn strike_difference() {
        let t0 = ILTExprZ::lift(ILTExpr::var("t0"));
        let il = from_exp(&Exp::sub(Exp::obs("AAPL", 0), Exp::real(100.0)), &t0).unwrap();
        assert_eq!(
            il,
            ILExpr::binop(
                BinOp::Sub,
                ILExpr::model("AAPL", ILTExprZ::tplus(t0, ILTExprZ::num(0))),
                ILExpr::float(100.0)
            )
        );
    }

    #[test]
    fn acc_and_let_are_unsupported() {
        let acc = Exp::acc("x", Exp::var("x"), 2, Exp::real(0.0));
        assert!(matches!(
            from_exp(&acc, &ILTExprZ::num(0)),
            Err(Error::Unsupported { construct: "acc", .. })
        ));
        let c = Contr::both(Contr::Zero, Contr::let_in("x", Exp::real(1.0), Contr::Zero));
        match compile(&c) {
            Err(Error::Unsupported { construct, path }) => {
                assert_eq!(construct, "let");
                assert_eq!(path, "both");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn zero_compiles_to_literal() {
        assert_eq!(compile(&Contr::Zero).unwrap(), ILExpr::float(0.0));
    }

    #[test]
    fn counter_counts_top_level_calls_only() {
        let before = from_contr_calls();
        let c = Contr::both(Contr::transfer("a", "b", "c"), Contr::translate(TExpr::num(2), Contr::Zero));
        compile(&c).unwrap();
        assert_eq!(from_contr_calls() - before, 1);
    }

    #[test]
    fn nested_numeral_translates_fold() {
        let inner = Contr::transfer("a", "b", "c");
        let c = Contr::translate(TExpr::num(2), Contr::translate(TExpr::num(3), inner.clone()));
        let flat = Contr::translate(TExpr::num(5), inner);
        assert_eq!(compile(&c).unwrap(), compile(&flat).unwrap());
    }
}
