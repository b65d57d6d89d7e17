//! Executable forms of the correctness theorems, compared numerically.

use serde::Serialize;

use super::compile::{compile, from_contr_calls};
use super::gen::{gen_contract, gen_discount, gen_env, gen_tenv, rng, GenConfig};
use crate::contract::{
    advance, contract_trace, horizon, Contr, ExtEnv, Party, TEnv, Trace, VarEnv,
};
use crate::error::Result;
use crate::payoff::{cut_payoff, eval_at, il_sem, Discount, EvalArgs, ILExpr, ILVal};

pub const ABS_TOL: f64 = 1e-12;
pub const REL_TOL: f64 = 1e-9;

pub fn close(a: f64, b: f64) -> bool {
    let diff = (a - b).abs();
    diff <= ABS_TOL || diff <= REL_TOL * a.abs().max(b.abs())
}

/// One side-by-side comparison.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Comparison {
    pub lhs: f64,
    pub rhs: f64,
    pub absdiff: f64,
    pub pass: bool,
}

impl Comparison {
    pub fn new(lhs: f64, rhs: f64) -> Self {
        Comparison { lhs, rhs, absdiff: (lhs - rhs).abs(), pass: close(lhs, rhs) }
    }
}

/// `Σ_{t=from}^{len-1} d(t) · tr(t)(p1, p2)`, summed over assets.
pub fn discounted_sum(tr: &Trace, disc: &Discount, p1: &Party, p2: &Party, from: usize) -> Result<f64> {
    let mut acc = 0.0;
    for (t, day) in tr.days().iter().enumerate().skip(from) {
        let a = day.amount_all_assets(p1, p2);
        if a != 0.0 {
            acc += disc.factor(t as i64)? * a;
        }
    }
    Ok(acc)
}

/// Trace semantics against compiled payoff at `t0 = 0`, `now = 0`.
pub fn check_compile_soundness(
    c: &Contr,
    env: &ExtEnv,
    tenv: &TEnv,
    disc: &Discount,
    p1: &Party,
    p2: &Party,
) -> Result<Comparison> {
    let tr = contract_trace(c, &VarEnv::new(), env, tenv)?;
    let lhs = discounted_sum(&tr, disc, p1, p2, 0)?;
    let rhs = eval_at(0, &compile(c)?, env, tenv, disc, p1, p2)?;
    Ok(Comparison::new(lhs, rhs))
}

/// Tail of the discounted trace from day `n` against the cut payoff
/// evaluated at `now = n`.
pub fn check_cut_payoff_n_step(
    c: &Contr,
    env: &ExtEnv,
    disc: &Discount,
    n: u64,
    p1: &Party,
    p2: &Party,
) -> Result<Comparison> {
    let tenv = TEnv::new();
    let tr = contract_trace(c, &VarEnv::new(), env, &tenv)?;
    let lhs = discounted_sum(&tr, disc, p1, p2, n as usize)?;
    let rhs = eval_at(n, &cut_payoff(&compile(c)?), env, &tenv, disc, p1, p2)?;
    Ok(Comparison::new(lhs, rhs))
}

/// Cut payoff of the original contract at `now = n` against the compiled
/// residual contract after `n` reduction steps, under shifted
/// environment and discount.
pub fn check_commuting_diagram(
    c: &Contr,
    env: &ExtEnv,
    disc: &Discount,
    n: u64,
    p1: &Party,
    p2: &Party,
) -> Result<Comparison> {
    let cut = cut_payoff(&compile(c)?);
    commuting_rhs(&cut, c, env, disc, n, p1, p2)
}

fn commuting_rhs(
    cut: &ILExpr,
    c: &Contr,
    env: &ExtEnv,
    disc: &Discount,
    n: u64,
    p1: &Party,
    p2: &Party,
) -> Result<Comparison> {
    let tenv = TEnv::new();
    let lhs = eval_at(n, cut, env, &tenv, disc, p1, p2)?;
    let (rest, _) = advance(c, env, n)?;
    let shift = n as i64;
    let rhs = eval_at(0, &compile(&rest)?, &env.shifted(shift), &tenv, &disc.shifted(shift), p1, p2)?;
    Ok(Comparison::new(lhs, rhs))
}

/// Commuting-diagram comparisons for several `n`, plus the number of
/// compilations spent on the cut-payoff side (always one).
pub fn check_commuting_diagram_many(
    c: &Contr,
    env: &ExtEnv,
    disc: &Discount,
    ns: &[u64],
    p1: &Party,
    p2: &Party,
) -> Result<(Vec<Comparison>, u64)> {
    let before = from_contr_calls();
    let cut = cut_payoff(&compile(c)?);
    let cut_compiles = from_contr_calls() - before;
    let mut out = Vec::with_capacity(ns.len());
    for &n in ns {
        out.push(commuting_rhs(&cut, c, env, disc, n, p1, p2)?);
    }
    Ok((out, cut_compiles))
}

/// Evaluates the compiled contract under each accumulated shift and
/// returns the real results; fails on the first non-real value.
pub fn check_totality(
    c: &Contr,
    env: &ExtEnv,
    tenv: &TEnv,
    disc: &Discount,
    p1: &Party,
    p2: &Party,
    shifts: &[u64],
) -> Result<Vec<f64>> {
    let il = compile(c)?;
    let args = EvalArgs::new(env, tenv, disc, p1.clone(), p2.clone());
    let mut out = Vec::with_capacity(shifts.len());
    for &t0 in shifts {
        match il_sem(&il, &args, t0)? {
            ILVal::Real(r) => out.push(r),
            _ => return Err(crate::Error::NonRealResult),
        }
    }
    Ok(out)
}

/// Which property a verification run exercises.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Theorem {
    CompileSoundness,
    Totality,
    CommutingDiagram,
    CutPayoff,
}

impl Theorem {
    pub fn from_number(n: u32) -> Option<Self> {
        match n {
            1 => Some(Theorem::CompileSoundness),
            2 => Some(Theorem::Totality),
            4 => Some(Theorem::CommutingDiagram),
            5 => Some(Theorem::CutPayoff),
            _ => None,
        }
    }
}

/// One line of a verification report.
#[derive(Debug, Clone, Serialize)]
pub struct CaseReport {
    pub seed: u64,
    pub contract: String,
    pub n: u64,
    pub lhs: f64,
    pub rhs: f64,
    pub absdiff: f64,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl CaseReport {
    fn from_result(seed: u64, c: &Contr, n: u64, r: Result<Comparison>) -> Self {
        match r {
            Ok(cmp) => CaseReport {
                seed,
                contract: c.to_string(),
                n,
                lhs: cmp.lhs,
                rhs: cmp.rhs,
                absdiff: cmp.absdiff,
                pass: cmp.pass,
                error: None,
            },
            Err(e) => CaseReport {
                seed,
                contract: c.to_string(),
                n,
                lhs: f64::NAN,
                rhs: f64::NAN,
                absdiff: f64::NAN,
                pass: false,
                error: Some(e.to_string()),
            },
        }
    }
}

pub const DISCOUNT_DAYS: usize = 256;

/// Runs `cases` random instances of `theorem`; case `i` uses seed
/// `seed + i` for contract, environment, discount and `n`.
pub fn run_cases(theorem: Theorem, cases: u64, seed: u64) -> Vec<CaseReport> {
    let p1 = Party::new("X");
    let p2 = Party::new("Y");
    (0..cases)
        .map(|i| {
            let s = seed.wrapping_add(i);
            let mut r = rng(s);
            let cfg = match theorem {
                Theorem::CompileSoundness | Theorem::Totality => GenConfig::templated(),
                _ => GenConfig::default(),
            };
            let c = gen_contract(&mut r, &cfg);
            let tenv = gen_tenv(&mut r, &cfg);
            let disc = gen_discount(&mut r, DISCOUNT_DAYS);
            let env = gen_env(s);
            match theorem {
                Theorem::CompileSoundness => {
                    let res = check_compile_soundness(&c, &env, &tenv, &disc, &p1, &p2);
                    CaseReport::from_result(s, &c, 0, res)
                }
                Theorem::Totality => {
                    use rand::Rng;
                    let t0 = r.random_range(0..=32);
                    let res = check_totality(&c, &env, &tenv, &disc, &p1, &p2, &[t0])
                        .map(|v| Comparison::new(v[0], v[0]));
                    CaseReport::from_result(s, &c, t0, res)
                }
                Theorem::CommutingDiagram | Theorem::CutPayoff => {
                    use rand::Rng;
                    let h = horizon(&c, &tenv).unwrap_or(0);
                    let n = r.random_range(0..=h + 1);
                    let res = if theorem == Theorem::CutPayoff {
                        check_cut_payoff_n_step(&c, &env, &disc, n, &p1, &p2)
                    } else {
                        check_commuting_diagram(&c, &env, &disc, n, &p1, &p2)
                    };
                    CaseReport::from_result(s, &c, n, res)
                }
            }
        })
        .collect()
}
