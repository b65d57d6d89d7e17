use super::ast::{BinOp, ILExpr};

/// Guards every payoff with `if(time < now, 0, payoff)` so the expression
/// can be evaluated at later current times without recompiling.
///
/// Applying it twice double-guards; the result is semantically the same.
pub fn cut_payoff(il: &ILExpr) -> ILExpr {
    match il {
        ILExpr::Payoff { time, .. } => ILExpr::if_(
            ILExpr::binop(BinOp::Lt, ILExpr::Texpr { t: time.clone() }, ILExpr::Now),
            ILExpr::float(0.0),
            il.clone(),
        ),
        ILExpr::Float { .. }
        | ILExpr::Nat { .. }
        | ILExpr::Bool { .. }
        | ILExpr::Texpr { .. }
        | ILExpr::Now
        | ILExpr::Model { .. } => il.clone(),
        ILExpr::Unop { op, arg } => ILExpr::unop(*op, cut_payoff(arg)),
        ILExpr::Binop { op, left, right } => ILExpr::binop(*op, cut_payoff(left), cut_payoff(right)),
        ILExpr::If { cond, then, els } => ILExpr::if_(cut_payoff(cond), cut_payoff(then), cut_payoff(els)),
        ILExpr::Loopif { cond, then, els, window } => {
            ILExpr::loopif(cut_payoff(cond), cut_payoff(then), cut_payoff(els), window.clone())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contract::{ExtEnv, Party, TEnv};
    use crate::payoff::{eval_at, Discount, ILTExpr};

    #[test]
    fn guards_payoff() {
        let p = ILExpr::payoff(ILTExpr::var("t"), "p", "q");
        assert_eq!(
            cut_payoff(&p),
            ILExpr::if_(
                ILExpr::binop(BinOp::Lt, ILExpr::Texpr { t: ILTExpr::var("t") }, ILExpr::Now),
                ILExpr::float(0.0),
                p.clone()
            )
        );
        assert_eq!(cut_payoff(&ILExpr::Now), ILExpr::Now);
    }

    #[test]
    fn strict_boundary() {
        let il = cut_payoff(&ILExpr::payoff(ILTExpr::num(0), "p", "q"));
        let (env, tenv, d) = (ExtEnv::empty(), TEnv::new(), Discount::flat());
        let (p, q) = (Party::new("p"), Party::new("q"));
        assert_eq!(eval_at(1, &il, &env, &tenv, &d, &p, &q).unwrap(), 0.0);
        assert_eq!(eval_at(0, &il, &env, &tenv, &d, &p, &q).unwrap(), 1.0);
    }
}
