//! One-day reduction of template-closed contracts.

use super::ast::{Contr, Exp, TExpr};
use super::env::{ExtEnv, Value};
use super::semantics::{eval_exp, VarEnv};
use super::trace::Trans;
use crate::error::{Error, Result};

/// Advances `c` by one day under `env`, returning the residual contract
/// and the transfers due today.
///
/// The residual contract is to be read under `env.shifted(1)`.
pub fn reduce_step(c: &Contr, env: &ExtEnv) -> Result<(Contr, Trans)> {
    step(c, &mut VarEnv::new(), env)
}

fn literal(v: Value) -> Exp {
    match v {
        Value::Real(value) => Exp::Real { value },
        Value::Bool(value) => Exp::Bool { value },
    }
}

fn window(t: &TExpr) -> Result<u64> {
    t.as_num().ok_or(Error::NotTemplateClosed)
}

fn step(c: &Contr, vars: &mut VarEnv, env: &ExtEnv) -> Result<(Contr, Trans)> {
    match c {
        Contr::Zero => Ok((Contr::Zero, Trans::zero())),
        Contr::Transfer { from, to, asset } => Ok((Contr::Zero, Trans::unit(from, to, asset))),
        Contr::Scale { factor, body } => {
            let k = eval_exp(factor, vars, env)?;
            let r = k
                .as_real()
                .ok_or_else(|| Error::ValueType("scale expects a real factor".into()))?;
            let (rest, t) = step(body, vars, env)?;
            Ok((Contr::scale(Exp::real(r), rest), t.scaled(r)))
        }
        Contr::Let { var, bound, body } => {
            let v = eval_exp(bound, vars, env)?;
            let mut inner = vars.clone().with(var.clone(), v);
            let (rest, t) = step(body, &mut inner, env)?;
            Ok((Contr::let_in(var.clone(), literal(v), rest), t))
        }
        Contr::Translate { shift, body } => match window(shift)? {
            0 => step(body, vars, env),
            n => Ok((Contr::translate(TExpr::num(n - 1), (**body).clone()), Trans::zero())),
        },
        Contr::Both { left, right } => {
            let (l, tl) = step(left, vars, env)?;
            let (r, tr) = step(right, vars, env)?;
            Ok((Contr::both(l, r), tl.plus(&tr)))
        }
        Contr::IfWithin { cond, window: w, then, els } => {
            let n = window(w)?;
            let b = eval_exp(cond, vars, env)?
                .as_bool()
                .ok_or_else(|| Error::ValueType("if expects a boolean condition".into()))?;
            if b {
                step(then, vars, env)
            } else if n == 0 {
                step(els, vars, env)
            } else {
                Ok((
                    Contr::if_within(cond.clone(), TExpr::num(n - 1), (**then).clone(), (**els).clone()),
                    Trans::zero(),
                ))
            }
        }
    }
}

/// `n` reduction steps; day `k` is reduced under `env.shifted(k)`.
///
/// The residual contract is to be read under `env.shifted(n)`.
pub fn advance(c: &Contr, env: &ExtEnv, n: u64) -> Result<(Contr, Vec<Trans>)> {
    let mut cur = c.clone();
    let mut out = Vec::with_capacity(n as usize);
    for k in 0..n {
        let (next, t) = reduce_step(&cur, &env.shifted(k as i64))?;
        cur = next;
        out.push(t);
    }
    Ok((cur, out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contract::ast::{Asset, Party};

    #[test]
    fn transfer_pays_and_vanishes() {
        let (c, t) = reduce_step(&Contr::transfer("p", "q", "a"), &ExtEnv::empty()).unwrap();
        assert_eq!(c, Contr::Zero);
        assert_eq!(t, Trans::unit(&Party::new("p"), &Party::new("q"), &Asset::new("a")));
    }

    #[test]
    fn translate_counts_down() {
        let body = Contr::transfer("p", "q", "a");
        let (c, t) = reduce_step(&Contr::translate(TExpr::num(90), body.clone()), &ExtEnv::empty()).unwrap();
        assert_eq!(c, Contr::translate(TExpr::num(89), body));
        assert!(t.is_zero());
    }

    #[test]
    fn advance_zero_steps_is_identity() {
        let c = Contr::translate(TExpr::num(3), Contr::Zero);
        assert_eq!(advance(&c, &ExtEnv::empty(), 0).unwrap(), (c, vec![]));
    }

    #[test]
    fn advance_then_pay() {
        let c = Contr::translate(TExpr::num(2), Contr::transfer("p", "q", "a"));
        let (rest, ts) = advance(&c, &ExtEnv::empty(), 2).unwrap();
        assert_eq!(rest, Contr::translate(TExpr::num(0), Contr::transfer("p", "q", "a")));
        assert!(ts.iter().all(Trans::is_zero));
        let (_, t) = reduce_step(&rest, &ExtEnv::empty()).unwrap();
        assert!(!t.is_zero());
    }

    #[test]
    fn templated_contract_is_rejected() {
        let c = Contr::translate(TExpr::var("T"), Contr::Zero);
        assert_eq!(reduce_step(&c, &ExtEnv::empty()), Err(Error::NotTemplateClosed));
    }

    #[test]
    fn scale_freezes_factor() {
        let env = ExtEnv::from_points([("S", 0, Value::Real(4.0))]);
        let c = Contr::scale(Exp::obs("S", 0), Contr::translate(TExpr::num(1), Contr::transfer("p", "q", "a")));
        let (rest, t) = reduce_step(&c, &env).unwrap();
        assert!(t.is_zero());
        assert_eq!(
            rest,
            Contr::scale(Exp::real(4.0), Contr::translate(TExpr::num(0), Contr::transfer("p", "q", "a")))
        );
    }
}
