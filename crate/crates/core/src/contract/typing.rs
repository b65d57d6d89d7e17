//! Simple Real/Bool typing for expressions and contracts.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::ast::{Contr, Exp, Op};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Type {
    Real,
    Bool,
}

impl fmt::Display for Type {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Type::Real => "Real",
            Type::Bool => "Bool",
        })
    }
}

/// Typing context: declared observable kinds and bound variable types.
///
/// Observables not declared in `labels` are Real.
#[derive(Debug, Clone, Default)]
pub struct TypeCtx {
    labels: BTreeMap<String, Type>,
    vars: Vec<(String, Type)>,
}

impl TypeCtx {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_label(mut self, label: impl Into<String>, ty: Type) -> Self {
        self.labels.insert(label.into(), ty);
        self
    }

    pub fn label_type(&self, label: &str) -> Type {
        self.labels.get(label).copied().unwrap_or(Type::Real)
    }

    fn var_type(&self, name: &str) -> Option<Type> {
        self.vars.iter().rev().find(|(n, _)| n == name).map(|(_, t)| *t)
    }

    fn bind<T>(&mut self, name: &str, ty: Type, f: impl FnOnce(&mut Self) -> T) -> T {
        self.vars.push((name.to_string(), ty));
        let out = f(self);
        self.vars.pop();
        out
    }
}

fn type_error(path: &[String], msg: impl Into<String>) -> Error {
    Error::Type {
        path: if path.is_empty() { "<root>".into() } else { path.join("/") },
        msg: msg.into(),
    }
}

pub fn type_of_exp(ctx: &TypeCtx, e: &Exp) -> Result<Type> {
    let mut ctx = ctx.clone();
    exp_type(&mut ctx, e, &mut Vec::new())
}

fn exp_type(ctx: &mut TypeCtx, e: &Exp, path: &mut Vec<String>) -> Result<Type> {
    match e {
        Exp::Real { .. } => Ok(Type::Real),
        Exp::Bool { .. } => Ok(Type::Bool),
        Exp::Obs { label, .. } => Ok(ctx.label_type(label)),
        Exp::Var { name } => ctx
            .var_type(name)
            .ok_or_else(|| type_error(path, format!("unbound variable `{name}`"))),
        Exp::Acc { var, body, init, .. } => {
            path.push("acc.init".into());
            let init_ty = exp_type(ctx, init, path)?;
            path.pop();
            path.push("acc.body".into());
            let body_ty = ctx.bind(var, init_ty, |ctx| exp_type(ctx, body, path))?;
            if body_ty != init_ty {
                return Err(type_error(
                    path,
                    format!("accumulator body has type {body_ty}, initial value {init_ty}"),
                ));
            }
            path.pop();
            Ok(init_ty)
        }
        Exp::Op { op, args } => {
            if args.len() != op.arity() {
                return Err(type_error(
                    path,
                    format!("{} expects {} arguments, got {}", op.name(), op.arity(), args.len()),
                ));
            }
            let mut tys = Vec::with_capacity(args.len());
            for (i, a) in args.iter().enumerate() {
                path.push(format!("{}.{i}", op.name()));
                tys.push(exp_type(ctx, a, path)?);
                path.pop();
            }
            let expect = |want: Type, tys: &[Type]| -> Result<()> {
                match tys.iter().position(|t| *t != want) {
                    Some(i) => Err(type_error(
                        path,
                        format!("argument {i} of {} must be {want}, found {}", op.name(), tys[i]),
                    )),
                    None => Ok(()),
                }
            };
            match op {
                Op::Add | Op::Sub | Op::Mult | Op::Div | Op::Neg => {
                    expect(Type::Real, &tys)?;
                    Ok(Type::Real)
                }
                Op::Lt | Op::Leq | Op::Eq => {
                    expect(Type::Real, &tys)?;
                    Ok(Type::Bool)
                }
                Op::And | Op::Or | Op::Not => {
                    expect(Type::Bool, &tys)?;
                    Ok(Type::Bool)
                }
                Op::Cond => {
                    if tys[0] != Type::Bool {
                        return Err(type_error(path, "condition of cond must be Bool"));
                    }
                    if tys[1] != tys[2] {
                        return Err(type_error(
                            path,
                            format!("cond branches differ: {} vs {}", tys[1], tys[2]),
                        ));
                    }
                    Ok(tys[1])
                }
            }
        }
    }
}

/// Succeeds iff every scale factor is Real, every `if` condition is Bool and
/// every `let` binding is well-typed.
pub fn check_contract(ctx: &TypeCtx, c: &Contr) -> Result<()> {
    let mut ctx = ctx.clone();
    contr_check(&mut ctx, c, &mut Vec::new())
}

fn contr_check(ctx: &mut TypeCtx, c: &Contr, path: &mut Vec<String>) -> Result<()> {
    match c {
        Contr::Zero | Contr::Transfer { .. } => Ok(()),
        Contr::Let { var, bound, body } => {
            path.push("let.bound".into());
            let ty = exp_type(ctx, bound, path)?;
            path.pop();
            path.push("let.body".into());
            ctx.bind(var, ty, |ctx| contr_check(ctx, body, path))?;
            path.pop();
            Ok(())
        }
        Contr::Scale { factor, body } => {
            path.push("scale.factor".into());
            let ty = exp_type(ctx, factor, path)?;
            if ty != Type::Real {
                return Err(type_error(path, format!("scale factor must be Real, found {ty}")));
            }
            path.pop();
            path.push("scale.body".into());
            contr_check(ctx, body, path)?;
            path.pop();
            Ok(())
        }
        Contr::Translate { body, .. } => {
            path.push("translate".into());
            contr_check(ctx, body, path)?;
            path.pop();
            Ok(())
        }
        Contr::Both { left, right } => {
            path.push("both.0".into());
            contr_check(ctx, left, path)?;
            path.pop();
            path.push("both.1".into());
            contr_check(ctx, right, path)?;
            path.pop();
            Ok(())
        }
        Contr::IfWithin { cond, then, els, .. } => {
            path.push("if.cond".into());
            let ty = exp_type(ctx, cond, path)?;
            if ty != Type::Bool {
                return Err(type_error(path, format!("if condition must be Bool, found {ty}")));
            }
            path.pop();
            path.push("if.then".into());
            contr_check(ctx, then, path)?;
            path.pop();
            path.push("if.else".into());
            contr_check(ctx, els, path)?;
            path.pop();
            Ok(())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contract::ast::TExpr;

    #[test]
    fn comparison_is_bool() {
        let e = Exp::gt(Exp::obs("AAPL", 0), Exp::real(100.0));
        assert_eq!(type_of_exp(&TypeCtx::new(), &e).unwrap(), Type::Bool);
    }

    #[test]
    fn cond_branch_mismatch() {
        let e = Exp::cond(Exp::bool(true), Exp::real(1.0), Exp::bool(false));
        assert!(matches!(type_of_exp(&TypeCtx::new(), &e), Err(Error::Type { .. })));
    }

    #[test]
    fn strike_difference_is_real() {
        let e = Exp::sub(Exp::obs("AAPL", 0), Exp::real(100.0));
        assert_eq!(type_of_exp(&TypeCtx::new(), &e).unwrap(), Type::Real);
    }

    #[test]
    fn bool_scale_factor_rejected_with_path() {
        let c = Contr::translate(TExpr::num(3), Contr::scale(Exp::bool(true), Contr::Zero));
        match check_contract(&TypeCtx::new(), &c) {
            Err(Error::Type { path, .. }) => assert_eq!(path, "translate/scale.factor"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn declared_bool_observable() {
        let ctx = TypeCtx::new().with_label("KO", Type::Bool);
        let c = Contr::if_within(Exp::obs("KO", 0), TExpr::num(2), Contr::Zero, Contr::Zero);
        assert!(check_contract(&ctx, &c).is_ok());
        assert!(check_contract(&TypeCtx::new(), &c).is_err());
    }

    #[test]
    fn let_and_acc_scoping() {
        let c = Contr::let_in("x", Exp::real(2.0), Contr::scale(Exp::var("x"), Contr::Zero));
        assert!(check_contract(&TypeCtx::new(), &c).is_ok());
        let bad = Contr::scale(Exp::var("x"), Contr::Zero);
        assert!(check_contract(&TypeCtx::new(), &bad).is_err());
        let acc = Exp::acc("x", Exp::add(Exp::var("x"), Exp::real(1.0)), 3, Exp::real(0.0));
        assert_eq!(type_of_exp(&TypeCtx::new(), &acc).unwrap(), Type::Real);
    }
}
