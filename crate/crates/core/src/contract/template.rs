//! Template instantiation, the template-closed predicate and horizons.

use std::collections::BTreeSet;

use super::ast::{Contr, TExpr};
use super::env::TEnv;
use super::semantics::t_sem;
use crate::error::Result;

/// Replaces every template variable with its value in `tenv`.
///
/// `scale` and `let` nodes are kept and instantiated recursively.
pub fn instantiate(c: &Contr, tenv: &TEnv) -> Result<Contr> {
    Ok(match c {
        Contr::Zero => Contr::Zero,
        Contr::Transfer { .. } => c.clone(),
        Contr::Let { var, bound, body } => Contr::Let {
            var: var.clone(),
            bound: bound.clone(),
            body: Box::new(instantiate(body, tenv)?),
        },
        Contr::Scale { factor, body } => Contr::scale(factor.clone(), instantiate(body, tenv)?),
        Contr::Translate { shift, body } => {
            Contr::translate(TExpr::num(t_sem(shift, tenv)?), instantiate(body, tenv)?)
        }
        Contr::Both { left, right } => Contr::both(instantiate(left, tenv)?, instantiate(right, tenv)?),
        Contr::IfWithin { cond, window, then, els } => Contr::if_within(
            cond.clone(),
            TExpr::num(t_sem(window, tenv)?),
            instantiate(then, tenv)?,
            instantiate(els, tenv)?,
        ),
    })
}

/// True iff every `translate` shift and `if` window is a numeral.
pub fn is_template_closed(c: &Contr) -> bool {
    match c {
        Contr::Zero | Contr::Transfer { .. } => true,
        Contr::Let { body, .. } | Contr::Scale { body, .. } => is_template_closed(body),
        Contr::Translate { shift, body } => shift.as_num().is_some() && is_template_closed(body),
        Contr::Both { left, right } => is_template_closed(left) && is_template_closed(right),
        Contr::IfWithin { window, then, els, .. } => {
            window.as_num().is_some() && is_template_closed(then) && is_template_closed(els)
        }
    }
}

/// Template variables occurring in `c`, sorted.
pub fn template_vars(c: &Contr) -> BTreeSet<String> {
    fn go(c: &Contr, out: &mut BTreeSet<String>) {
        let mut note = |t: &TExpr| {
            if let TExpr::Var { name } = t {
                out.insert(name.clone());
            }
        };
        match c {
            Contr::Zero | Contr::Transfer { .. } => {}
            Contr::Let { body, .. } | Contr::Scale { body, .. } => go(body, out),
            Contr::Translate { shift, body } => {
                note(shift);
                go(body, out);
            }
            Contr::Both { left, right } => {
                go(left, out);
                go(right, out);
            }
            Contr::IfWithin { window, then, els, .. } => {
                note(window);
                go(then, out);
                go(els, out);
            }
        }
    }
    let mut out = BTreeSet::new();
    go(c, &mut out);
    out
}

/// Conservative bound `H` such that the trace is zero on every day `>= H`.
pub fn horizon(c: &Contr, tenv: &TEnv) -> Result<u64> {
    Ok(match c {
        Contr::Zero => 0,
        Contr::Transfer { .. } => 1,
        Contr::Scale { body, .. } | Contr::Let { body, .. } => horizon(body, tenv)?,
        Contr::Translate { shift, body } => {
            let h = horizon(body, tenv)?;
            if h == 0 {
                0
            } else {
                t_sem(shift, tenv)? + h
            }
        }
        Contr::Both { left, right } => horizon(left, tenv)?.max(horizon(right, tenv)?),
        Contr::IfWithin { window, then, els, .. } => {
            let h = horizon(then, tenv)?.max(horizon(els, tenv)?);
            if h == 0 {
                0
            } else {
                t_sem(window, tenv)? + h
            }
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contract::ast::Exp;
    use crate::error::Error;

    #[test]
    fn substitutes_translate_shift() {
        let c = Contr::translate(TExpr::var("T"), Contr::transfer("p", "q", "a"));
        let d = TEnv::new().with("T", 90);
        assert_eq!(
            instantiate(&c, &d).unwrap(),
            Contr::translate(TExpr::num(90), Contr::transfer("p", "q", "a"))
        );
        assert!(!is_template_closed(&c));
        assert!(is_template_closed(&instantiate(&c, &d).unwrap()));
    }

    #[test]
    fn zero_is_fixed() {
        assert_eq!(instantiate(&Contr::Zero, &TEnv::new()).unwrap(), Contr::Zero);
        assert!(is_template_closed(&Contr::Zero));
        assert_eq!(horizon(&Contr::Zero, &TEnv::new()).unwrap(), 0);
    }

    #[test]
    fn scale_survives_instantiation() {
        let c = Contr::scale(Exp::real(2.0), Contr::translate(TExpr::var("T"), Contr::Zero));
        let i = instantiate(&c, &TEnv::new().with("T", 1)).unwrap();
        assert!(matches!(i, Contr::Scale { .. }));
    }

    #[test]
    fn missing_binding_is_error() {
        let c = Contr::if_within(Exp::bool(true), TExpr::var("W"), Contr::Zero, Contr::Zero);
        assert_eq!(instantiate(&c, &TEnv::new()), Err(Error::UnboundTemplateVar("W".into())));
        assert_eq!(horizon(&c, &TEnv::new()), Ok(0));
        let c = Contr::if_within(Exp::bool(true), TExpr::var("W"), Contr::transfer("a", "b", "c"), Contr::Zero);
        assert_eq!(horizon(&c, &TEnv::new()), Err(Error::UnboundTemplateVar("W".into())));
        assert_eq!(horizon(&c, &TEnv::new().with("W", 4)), Ok(5));
    }

    #[test]
    fn collects_template_vars() {
        let c = Contr::translate(
            TExpr::var("t0"),
            Contr::if_within(Exp::bool(true), TExpr::var("t1"), Contr::Zero, Contr::Zero),
        );
        let vars: Vec<_> = template_vars(&c).into_iter().collect();
        assert_eq!(vars, ["t0", "t1"]);
    }
}
