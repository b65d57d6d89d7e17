//! Infix rendering of payoff expressions, e.g.
//! `100.0 * payoff(0+t0, you, me) + if(100.0 < model(AAPL, 0+t0+t1+0), …)`.

use std::fmt;

use super::ast::{ILExpr, ILTExpr, ILTExprZ, UnOp};

impl fmt::Display for ILTExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ILTExpr::Texpr { t } => write!(f, "{t}"),
            ILTExpr::Tplus { left, right } => write!(f, "{left}+{right}"),
        }
    }
}

impl fmt::Display for ILTExprZ {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ILTExprZ::TnumZ { value } => write!(f, "{value}"),
            ILTExprZ::TexprZ { t } => write!(f, "{t}"),
            ILTExprZ::TplusZ { left, right } => match **right {
                ILTExprZ::TnumZ { value } if value < 0 => write!(f, "{left}{value}"),
                _ => write!(f, "{left}+{right}"),
            },
        }
    }
}

const ATOM: u8 = 10;

fn precedence(il: &ILExpr) -> u8 {
    match il {
        ILExpr::Binop { op, .. } => op.precedence(),
        ILExpr::Unop { .. } => 6,
        _ => ATOM,
    }
}

fn write_prec(f: &mut fmt::Formatter<'_>, il: &ILExpr, min: u8) -> fmt::Result {
    if precedence(il) < min {
        write!(f, "({il})")
    } else {
        write!(f, "{il}")
    }
}

impl fmt::Display for ILExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ILExpr::Float { value } => write!(f, "{value:?}"),
            ILExpr::Nat { value } => write!(f, "{value}"),
            ILExpr::Bool { value } => write!(f, "{value}"),
            ILExpr::Texpr { t } => write!(f, "{t}"),
            ILExpr::Now => f.write_str("now"),
            ILExpr::Model { label, time } => write!(f, "model({label}, {time})"),
            ILExpr::Payoff { time, from, to } => write!(f, "payoff({time}, {from}, {to})"),
            ILExpr::Unop { op, arg } => {
                f.write_str(match op {
                    UnOp::Neg => "-",
                    UnOp::Not => "!",
                })?;
                write_prec(f, arg, ATOM)
            }
            ILExpr::Binop { op, left, right } => {
                let p = op.precedence();
                write_prec(f, left, p)?;
                write!(f, " {} ", op.symbol())?;
                write_prec(f, right, p + 1)
            }
            ILExpr::If { cond, then, els } => write!(f, "if({cond}, {then}, {els})"),
            ILExpr::Loopif { cond, then, els, window } => {
                write!(f, "loopif({cond}, {then}, {els}, {window})")
            }
        }
    }
}
