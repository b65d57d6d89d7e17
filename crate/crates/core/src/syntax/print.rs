use std::fmt;

use super::parser::is_keyword;
use crate::contract::{Contr, Exp, Op};

fn name(f: &mut fmt::Formatter<'_>, s: &str) -> fmt::Result {
    let plain = s.chars().next().is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
        && s.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
        && !is_keyword(s);
    if plain {
        f.write_str(s)
    } else {
        write!(f, "\"{s}\"")
    }
}

fn precedence(e: &Exp) -> u8 {
    match e {
        Exp::Op { op, .. } => match op {
            Op::Or => 1,
            Op::And => 2,
            Op::Lt | Op::Leq | Op::Eq => 3,
            Op::Add | Op::Sub => 4,
            Op::Mult | Op::Div => 5,
            Op::Neg | Op::Not => 6,
            Op::Cond => 10,
        },
        // a negative literal behaves like a prefix operator
        Exp::Real { value } if value.is_sign_negative() => 6,
        _ => 10,
    }
}

fn sub(f: &mut fmt::Formatter<'_>, e: &Exp, min: u8) -> fmt::Result {
    if precedence(e) < min {
        write!(f, "({e})")
    } else {
        write!(f, "{e}")
    }
}

impl fmt::Display for Exp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Exp::Real { value } => write!(f, "{value:?}"),
            Exp::Bool { value } => write!(f, "{value}"),
            Exp::Var { name } => f.write_str(name),
            Exp::Obs { label, offset } => {
                f.write_str("obs(")?;
                name(f, label)?;
                write!(f, ", {offset})")
            }
            Exp::Acc { var, body, days, init } => write!(f, "acc({var}. {body}, {days}, {init})"),
            Exp::Op { op, args } => match (op, args.as_slice()) {
                (Op::Neg, [a]) => match a {
                    Exp::Real { .. } => write!(f, "-({a})"),
                    _ if precedence(a) >= 6 => write!(f, "-{a}"),
                    _ => write!(f, "-({a})"),
                },
                (Op::Not, [a]) => {
                    f.write_str("!")?;
                    sub(f, a, 6)
                }
                (Op::Cond, [b, x, y]) => write!(f, "cond({b}, {x}, {y})"),
                (op, [l, r]) => {
                    let p = precedence(self);
                    let sym = match op {
                        Op::Or => "|",
                        Op::And => "&",
                        Op::Lt => "<",
                        Op::Leq => "<=",
                        Op::Eq => "==",
                        Op::Add => "+",
                        Op::Sub => "-",
                        Op::Mult => "*",
                        Op::Div => "/",
                        _ => unreachable!("binary operator"),
                    };
                    // comparisons do not chain, so both sides bind tighter
                    let lp = if p == 3 { 4 } else { p };
                    sub(f, l, lp)?;
                    write!(f, " {sym} ")?;
                    sub(f, r, p + 1)
                }
                (op, args) => {
                    write!(f, "{}(", op.name())?;
                    for (i, a) in args.iter().enumerate() {
                        if i > 0 {
                            f.write_str(", ")?;
                        }
                        write!(f, "{a}")?;
                    }
                    f.write_str(")")
                }
            },
        }
    }
}

impl fmt::Display for Contr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Contr::Zero => f.write_str("zero"),
            Contr::Transfer { from, to, asset } => {
                f.write_str("transfer(")?;
                name(f, from.as_str())?;
                f.write_str(", ")?;
                name(f, to.as_str())?;
                f.write_str(", ")?;
                name(f, asset.as_str())?;
                f.write_str(")")
            }
            Contr::Scale { factor, body } => write!(f, "scale({factor}, {body})"),
            Contr::Translate { shift, body } => write!(f, "translate({shift}, {body})"),
            Contr::Both { left, right } => write!(f, "both({left}, {right})"),
            Contr::IfWithin { cond, window, then, els } => {
                if window.as_num() == Some(0) {
                    write!(f, "if({cond}, {then}, {els})")
                } else {
                    write!(f, "if({cond}, {window}, {then}, {els})")
                }
            }
            Contr::Let { var, bound, body } => write!(f, "let {var} = {bound} in {body}"),
        }
    }
}

/// Multi-line rendering with two-space indentation.
pub fn pretty(c: &Contr) -> String {
    let mut out = String::new();
    pretty_into(c, 0, &mut out);
    out
}

fn pretty_into(c: &Contr, indent: usize, out: &mut String) {
    let flat = c.to_string();
    if flat.len() + indent <= 80 {
        out.push_str(&flat);
        return;
    }
    let pad = " ".repeat(indent + 2);
    let args = |head: String, kids: &[&Contr], out: &mut String| {
        out.push_str(&head);
        for (i, k) in kids.iter().enumerate() {
            if i > 0 || !head.ends_with('(') {
                out.push(',');
            }
            out.push('\n');
            out.push_str(&pad);
            pretty_into(k, indent + 2, out);
        }
        out.push(')');
    };
    match c {
        Contr::Scale { factor, body } => args(format!("scale({factor}"), &[body], out),
        Contr::Translate { shift, body } => args(format!("translate({shift}"), &[body], out),
        Contr::Both { left, right } => args("both(".into(), &[left, right], out),
        Contr::IfWithin { cond, window, then, els } => {
            let head = if window.as_num() == Some(0) {
                format!("if({cond}")
            } else {
                format!("if({cond}, {window}")
            };
            args(head, &[then, els], out)
        }
        Contr::Let { var, bound, body } => {
            out.push_str(&format!("let {var} = {bound} in\n{pad}"));
            pretty_into(body, indent + 2, out);
        }
        Contr::Zero | Contr::Transfer { .. } => out.push_str(&flat),
    }
}
