//! Denotational semantics: expression values and contract traces.

use super::ast::{Contr, Exp, Op, TExpr};
use super::env::{ExtEnv, TEnv, Value};
use super::template::horizon;
use super::trace::{Trace, Trans};
use crate::error::{Error, Result};

/// Values of bound expression variables, innermost binding last.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct VarEnv {
    bindings: Vec<(String, Value)>,
}

impl VarEnv {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, name: impl Into<String>, v: Value) -> Self {
        self.bindings.push((name.into(), v));
        self
    }

    pub fn lookup(&self, name: &str) -> Result<Value> {
        self.bindings
            .iter()
            .rev()
            .find(|(n, _)| n == name)
            .map(|(_, v)| *v)
            .ok_or_else(|| Error::UnboundVar(name.to_string()))
    }

    fn push(&mut self, name: &str, v: Value) {
        self.bindings.push((name.to_string(), v));
    }

    fn pop(&mut self) {
        self.bindings.pop();
    }
}

/// `⟦t⟧δ`.
pub fn t_sem(t: &TExpr, tenv: &TEnv) -> Result<u64> {
    match t {
        TExpr::Num { value } => Ok(*value),
        TExpr::Var { name } => tenv.get(name),
    }
}

fn real(v: Value, what: &str) -> Result<f64> {
    v.as_real()
        .ok_or_else(|| Error::ValueType(format!("{what} expects a real argument")))
}

fn boolean(v: Value, what: &str) -> Result<bool> {
    v.as_bool()
        .ok_or_else(|| Error::ValueType(format!("{what} expects a boolean argument")))
}

/// Applies an operator to already-evaluated arguments (all but `cond`).
pub(crate) fn apply_op(op: Op, args: &[Value]) -> Result<Value> {
    let name = op.name();
    let r = |i: usize| real(args[i], name);
    let b = |i: usize| boolean(args[i], name);
    Ok(match op {
        Op::Add => Value::Real(r(0)? + r(1)?),
        Op::Sub => Value::Real(r(0)? - r(1)?),
        Op::Mult => Value::Real(r(0)? * r(1)?),
        Op::Div => {
            let den = r(1)?;
            if den == 0.0 {
                return Err(Error::DivisionByZero);
            }
            Value::Real(r(0)? / den)
        }
        Op::Neg => Value::Real(-r(0)?),
        Op::Lt => Value::Bool(r(0)? < r(1)?),
        Op::Leq => Value::Bool(r(0)? <= r(1)?),
        Op::Eq => Value::Bool(r(0)? == r(1)?),
        Op::And => Value::Bool(b(0)? && b(1)?),
        Op::Or => Value::Bool(b(0)? || b(1)?),
        Op::Not => Value::Bool(!b(0)?),
        Op::Cond => {
            if b(0)? {
                args[1]
            } else {
                args[2]
            }
        }
    })
}

/// `⟦e⟧γ,ρ` with strict evaluation.
pub fn eval_exp(e: &Exp, vars: &VarEnv, env: &ExtEnv) -> Result<Value> {
    let mut vars = vars.clone();
    eval(e, &mut vars, env)
}

fn eval(e: &Exp, vars: &mut VarEnv, env: &ExtEnv) -> Result<Value> {
    match e {
        Exp::Real { value } => Ok(Value::Real(*value)),
        Exp::Bool { value } => Ok(Value::Bool(*value)),
        Exp::Obs { label, offset } => env.lookup(label, *offset),
        Exp::Var { name } => vars.lookup(name),
        Exp::Op { op, args } => {
            if args.len() != op.arity() {
                return Err(Error::ValueType(format!("arity mismatch for {}", op.name())));
            }
            let vals = args
                .iter()
                .map(|a| eval(a, vars, env))
                .collect::<Result<Vec<_>>>()?;
            apply_op(*op, &vals)
        }
        Exp::Acc { var, body, days, init } => {
            let d = *days as i64;
            let mut acc = eval(init, vars, &env.shifted(-d))?;
            for k in (0..d).rev() {
                vars.push(var, acc);
                let next = eval(body, vars, &env.shifted(-k));
                vars.pop();
                acc = next?;
            }
            Ok(acc)
        }
    }
}

/// `⟦c⟧γ,ρ,δ`, padded with zero days up to the horizon.
pub fn contract_trace(c: &Contr, vars: &VarEnv, env: &ExtEnv, tenv: &TEnv) -> Result<Trace> {
    let mut vars = vars.clone();
    let tr = trace(c, &mut vars, env, tenv)?;
    let hor = horizon(c, tenv)? as usize;
    Ok(tr.padded(hor + 1))
}

fn trace(c: &Contr, vars: &mut VarEnv, env: &ExtEnv, tenv: &TEnv) -> Result<Trace> {
    match c {
        Contr::Zero => Ok(Trace::zero()),
        Contr::Transfer { from, to, asset } => Ok(Trace::singleton(Trans::unit(from, to, asset))),
        Contr::Scale { factor, body } => {
            let k = real(eval(factor, vars, env)?, "scale")?;
            Ok(trace(body, vars, env, tenv)?.scaled(k))
        }
        Contr::Let { var, bound, body } => {
            let v = eval(bound, vars, env)?;
            vars.push(var, v);
            let out = trace(body, vars, env, tenv);
            vars.pop();
            out
        }
        Contr::Translate { shift, body } => {
            let n = t_sem(shift, tenv)?;
            let sub = trace(body, vars, &env.shifted(n as i64), tenv)?;
            Ok(sub.delay(n as usize))
        }
        Contr::Both { left, right } => {
            let l = trace(left, vars, env, tenv)?;
            let r = trace(right, vars, env, tenv)?;
            Ok(l.plus(&r))
        }
        Contr::IfWithin { cond, window, then, els } => {
            let w = t_sem(window, tenv)?;
            for k in 0..=w {
                let here = env.shifted(k as i64);
                let b = boolean(eval(cond, vars, &here)?, "if")?;
                if b {
                    return Ok(trace(then, vars, &here, tenv)?.delay(k as usize));
                }
                if k == w {
                    return Ok(trace(els, vars, &here, tenv)?.delay(k as usize));
                }
            }
            unreachable!("window loop always returns")
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contract::ast::{Asset, Party};
    use crate::contract::env::Generator;

    #[test]
    fn observable_lookup() {
        let env = ExtEnv::from_points([("AAPL", 0, Value::Real(110.0))]);
        let v = eval_exp(&Exp::obs("AAPL", 0), &VarEnv::new(), &env).unwrap();
        assert_eq!(v, Value::Real(110.0));
        let b = eval_exp(&Exp::gt(Exp::obs("AAPL", 0), Exp::real(100.0)), &VarEnv::new(), &env);
        assert_eq!(b.unwrap(), Value::Bool(true));
    }

    #[test]
    fn accumulator_counts_days() {
        let e = Exp::acc("x", Exp::add(Exp::var("x"), Exp::real(1.0)), 3, Exp::real(0.0));
        let v = eval_exp(&e, &VarEnv::new(), &ExtEnv::empty()).unwrap();
        assert_eq!(v, Value::Real(3.0));
    }

    #[test]
    fn accumulator_reads_history() {
        // sum of the last three days' observations: A(-2) + A(-1) + A(0), init A(-3)
        let env = ExtEnv::from_points((-3..=0).map(|d| ("A", d, Value::Real(10f64.powi((d + 3) as i32)))));
        let e = Exp::acc("x", Exp::add(Exp::var("x"), Exp::obs("A", 0)), 3, Exp::obs("A", 0));
        let v = eval_exp(&e, &VarEnv::new(), &env).unwrap();
        assert_eq!(v, Value::Real(1111.0));
    }

    #[test]
    fn missing_observable_is_reported() {
        let e = eval_exp(&Exp::obs("X", 2), &VarEnv::new(), &ExtEnv::empty());
        assert_eq!(e, Err(Error::MissingObservable { label: "X".into(), day: 2 }));
    }

    #[test]
    fn division_by_zero_errors() {
        let e = Exp::bin(Op::Div, Exp::real(1.0), Exp::real(0.0));
        assert_eq!(eval_exp(&e, &VarEnv::new(), &ExtEnv::empty()), Err(Error::DivisionByZero));
    }

    #[test]
    fn zero_and_cancelling_contracts() {
        let env = ExtEnv::empty();
        let tr = contract_trace(&Contr::Zero, &VarEnv::new(), &env, &TEnv::new()).unwrap();
        assert_eq!(tr.support(), 0);
        let c = Contr::both(Contr::transfer("p", "q", "USD"), Contr::transfer("q", "p", "USD"));
        let tr = contract_trace(&c, &VarEnv::new(), &env, &TEnv::new()).unwrap();
        assert!(tr.at(0).is_zero());
    }

    #[test]
    fn window_waits_for_condition() {
        // condition first true on day 2 of a 5-day window
        let env = ExtEnv::from_points((0..=5).map(|d| ("A", d, Value::Real(d as f64))));
        let c = Contr::if_within(
            Exp::lt(Exp::real(1.5), Exp::obs("A", 0)),
            TExpr::num(5),
            Contr::scale(Exp::obs("A", 0), Contr::transfer("x", "y", "USD")),
            Contr::Zero,
        );
        let tr = contract_trace(&c, &VarEnv::new(), &env, &TEnv::new()).unwrap();
        let usd = Asset::new("USD");
        assert_eq!(tr.at(2).amount(&Party::new("x"), &Party::new("y"), &usd), 2.0);
        assert_eq!(tr.support(), 3);
    }

    #[test]
    fn window_falls_through_to_else_at_end() {
        let env = ExtEnv::generated(Generator::new(1));
        let c = Contr::if_within(Exp::bool(false), TExpr::num(4), Contr::Zero, Contr::transfer("x", "y", "A"));
        let tr = contract_trace(&c, &VarEnv::new(), &env, &TEnv::new()).unwrap();
        assert_eq!(tr.support(), 5);
        assert!(!tr.at(4).is_zero());
    }

    #[test]
    fn unbound_template_var() {
        let c = Contr::translate(TExpr::var("T"), Contr::Zero);
        let r = contract_trace(&c, &VarEnv::new(), &ExtEnv::empty(), &TEnv::new());
        assert_eq!(r, Err(Error::UnboundTemplateVar("T".into())));
    }
}
