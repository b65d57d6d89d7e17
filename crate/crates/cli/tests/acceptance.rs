//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
//! criterion fails.

use std::process::Command;
use std::time::{Duration, Instant};

use clc_core::codegen::{reindex, KExpr};
use clc_core::compiler::check::{
    check_commuting_diagram_many, check_compile_soundness, check_cut_payoff_n_step, check_totality, Comparison,
    DISCOUNT_DAYS,
};
use clc_core::compiler::gen::rng;
use clc_core::compiler::{compile, gen_contract, gen_discount, gen_env, gen_tenv, GenConfig};
use clc_core::contract::{
    check_contract, contract_trace, horizon, instantiate, is_template_closed, Contr, Party, TEnv, TExpr, TypeCtx,
    VarEnv,
};
use clc_core::instruments::{self, DEFERRED_OPTION};
use clc_core::payoff::{cut_payoff, BinOp, Discount, ILExpr, ILTExpr, ILTExprZ};
use clc_core::pricing::{
    black_scholes_call, price_by_reduction, price_mc, reduction_path_value, KernelPricer, ModelSpec, Simulator,
};
use clc_core::syntax::parse_contract;

/// Black–Scholes call, S0 = K = 100, sigma = 0.2, T = 90/365, computed
/// independently of this crate (closed form cross-checked by quadrature).
const BS_R0: f64 = 3.960376146988459;
const BS_R5: f64 = 4.579032085233791;

const REL: f64 = 1e-9;
const SEED: u64 = 20_240_601;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

/// Relative agreement at the pinned tolerance; exact agreement when both
/// sides are zero.
fn rel_ok(c: &Comparison) -> bool {
    c.absdiff <= REL * c.lhs.abs().max(c.rhs.abs())
}

fn xy() -> (Party, Party) {
    (Party::new("X"), Party::new("Y"))
}

/// Counts evaluation errors seen by suites 1 to 3, for criterion 4.
#[derive(Default)]
struct Totality {
    evaluations: u64,
    errors: Vec<String>,
}

impl Totality {
    fn record<T>(&mut self, what: &str, r: clc_core::Result<T>) -> Option<T> {
        self.evaluations += 1;
        match r {
            Ok(v) => Some(v),
            Err(e) => {
                self.errors.push(format!("{what}: {e}"));
                None
            }
        }
    }
}

fn closed_case(seed: u64) -> (Contr, clc_core::contract::ExtEnv, Discount) {
    let mut r = rng(seed);
    let c = gen_contract(&mut r, &GenConfig::default());
    let disc = gen_discount(&mut r, DISCOUNT_DAYS);
    (c, gen_env(seed), disc)
}

fn criterion_1(tot: &mut Totality) -> Outcome {
    let start = Instant::now();
    let (p1, p2) = xy();
    let mut bad = Vec::new();
    let mut nonzero = 0;
    for i in 0..1000 {
        let seed = SEED + i;
        let (c, env, disc) = closed_case(seed);
        if check_contract(&TypeCtx::new(), &c).is_err() || !is_template_closed(&c) {
            bad.push(format!("seed {seed}: generator produced an invalid contract"));
            continue;
        }
        if let Some(cmp) = tot.record("soundness", check_compile_soundness(&c, &env, &TEnv::new(), &disc, &p1, &p2)) {
            nonzero += (cmp.lhs != 0.0) as u32;
            if !rel_ok(&cmp) {
                bad.push(format!("seed {seed}: {cmp:?}"));
            }
        }
        tot.record(
            "il semantics",
            check_totality(&c, &env, &TEnv::new(), &disc, &p1, &p2, &[0, 1, 5]),
        );
    }
    let secs = start.elapsed();
    let pass = bad.is_empty() && tot.errors.is_empty() && secs < Duration::from_secs(60);
    outcome(
        pass,
        format!("1000 contracts, {nonzero} with nonzero value, {} mismatches, {secs:.2?}", bad.len())
            + &first(&bad),
    )
}

fn criterion_2(tot: &mut Totality) -> Outcome {
    let (p1, p2) = xy();
    let mut bad = Vec::new();
    let mut checks = 0;
    let mut boundary = 0;
    for i in 0..500 {
        let seed = SEED + 10_000 + i;
        let (c, env, disc) = closed_case(seed);
        let h = horizon(&c, &TEnv::new()).unwrap_or(0);
        let tr = contract_trace(&c, &VarEnv::new(), &env, &TEnv::new()).ok();
        for n in 0..=h + 1 {
            // a day carrying a transfer is the boundary of the strict guard
            if tr.as_ref().is_some_and(|t| !t.at(n as usize).is_zero()) {
                boundary += 1;
            }
            checks += 1;
            if let Some(cmp) = tot.record("cut payoff", check_cut_payoff_n_step(&c, &env, &disc, n, &p1, &p2)) {
                if !rel_ok(&cmp) {
                    bad.push(format!("seed {seed}, n {n}: {cmp:?}"));
                }
            }
        }
    }
    outcome(
        bad.is_empty() && boundary > 0,
        format!("500 contracts, {checks} (contract, n) pairs, {boundary} on payment days, {} mismatches", bad.len())
            + &first(&bad),
    )
}

fn criterion_3(tot: &mut Totality) -> Outcome {
    let (p1, p2) = xy();
    let mut bad = Vec::new();
    let mut compiles_ok = true;
    for i in 0..500 {
        let seed = SEED + 20_000 + i;
        let (c, env, disc) = closed_case(seed);
        let h = horizon(&c, &TEnv::new()).unwrap_or(0);
        let ns = [1, 2, h];
        if let Some((cmps, cut_compiles)) =
            tot.record("commuting diagram", check_commuting_diagram_many(&c, &env, &disc, &ns, &p1, &p2))
        {
            if cut_compiles != 1 {
                compiles_ok = false;
                bad.push(format!("seed {seed}: cut path compiled {cut_compiles} times"));
            }
            for (n, cmp) in ns.iter().zip(cmps) {
                if !rel_ok(&cmp) {
                    bad.push(format!("seed {seed}, n {n}: {cmp:?}"));
                }
            }
        }
    }
    outcome(
        bad.is_empty(),
        format!(
            "500 contracts, n in {{1, 2, horizon}}, {} mismatches, one compile per cut path: {compiles_ok}",
            bad.len()
        ) + &first(&bad),
    )
}

fn criterion_4(tot: &Totality) -> Outcome {
    outcome(
        tot.errors.is_empty() && tot.evaluations > 0,
        format!("{} evaluations across suites 1-3, {} errors", tot.evaluations, tot.errors.len()) + &first(&tot.errors),
    )
}

fn criterion_5() -> Outcome {
    let cfg = GenConfig { with_let: true, ..GenConfig::templated() };
    let mut bad = Vec::new();
    for i in 0..500 {
        let seed = SEED + 30_000 + i;
        let mut r = rng(seed);
        let c = gen_contract(&mut r, &cfg);
        let env = gen_env(seed);
        for _ in 0..2 {
            let tenv = gen_tenv(&mut r, &cfg);
            let res = instantiate(&c, &tenv).and_then(|inst| {
                let a = contract_trace(&c, &VarEnv::new(), &env, &tenv)?;
                let b = contract_trace(&inst, &VarEnv::new(), &env, &TEnv::new())?;
                Ok((is_template_closed(&inst), a, b))
            });
            match res {
                Ok((closed, a, b)) => {
                    let n = a.len().max(b.len());
                    if !closed || a.padded(n) != b.padded(n) {
                        bad.push(format!("seed {seed}: closed {closed}, traces differ"));
                    }
                }
                Err(e) => bad.push(format!("seed {seed}: {e}")),
            }
        }
    }
    outcome(bad.is_empty(), format!("500 templated contracts x 2 template environments, {} failures", bad.len()) + &first(&bad))
}

fn deferred_il() -> ILExpr {
    let t0 = ILTExpr::tplus(ILTExpr::num(0), ILTExpr::var("t0"));
    let t01 = ILTExpr::tplus(t0.clone(), ILTExpr::var("t1"));
    let aapl = || ILExpr::model("AAPL", ILTExprZ::tplus(ILTExprZ::lift(t01.clone()), ILTExprZ::num(0)));
    ILExpr::binop(
        BinOp::Add,
        ILExpr::binop(BinOp::Mult, ILExpr::float(100.0), ILExpr::payoff(t0, "you", "me")),
        ILExpr::loopif(
            ILExpr::binop(BinOp::Lt, ILExpr::float(100.0), aapl()),
            ILExpr::binop(BinOp::Mult, ILExpr::binop(BinOp::Sub, aapl(), ILExpr::float(100.0)), ILExpr::payoff(t01, "you", "me")),
            ILExpr::float(0.0),
            TExpr::num(0),
        ),
    )
}

fn criterion_6() -> Outcome {
    let mut notes = Vec::new();
    let compiled = parse_contract(DEFERRED_OPTION).and_then(|c| compile(&c));
    let compile_ok = compiled.as_ref().is_ok_and(|il| *il == deferred_il());
    if !compile_ok {
        notes.push(format!("compile: {compiled:?}"));
    }

    let guard = |t: ILTExpr| {
        ILExpr::if_(
            ILExpr::binop(BinOp::Lt, ILExpr::Texpr { t: t.clone() }, ILExpr::Now),
            ILExpr::float(0.0),
            ILExpr::payoff(t, "you", "me"),
        )
    };
    let t0 = ILTExpr::tplus(ILTExpr::num(0), ILTExpr::var("t0"));
    let t01 = ILTExpr::tplus(t0.clone(), ILTExpr::var("t1"));
    let aapl = || ILExpr::model("AAPL", ILTExprZ::tplus(ILTExprZ::lift(t01.clone()), ILTExprZ::num(0)));
    let want_cut = ILExpr::binop(
        BinOp::Add,
        ILExpr::binop(BinOp::Mult, ILExpr::float(100.0), guard(t0)),
        ILExpr::loopif(
            ILExpr::binop(BinOp::Lt, ILExpr::float(100.0), aapl()),
            ILExpr::binop(BinOp::Mult, ILExpr::binop(BinOp::Sub, aapl(), ILExpr::float(100.0)), guard(t01.clone())),
            ILExpr::float(0.0),
            TExpr::num(0),
        ),
    );
    let cut_ok = cut_payoff(&deferred_il()) == want_cut;
    if !cut_ok {
        notes.push("cut payoff differs".into());
    }

    let il = ILExpr::binop(BinOp::Add, ILExpr::payoff(ILTExpr::num(100), "X", "Y"), ILExpr::payoff(ILTExpr::num(200), "X", "Y"));
    let reindex_ok = match reindex(&il, &TEnv::new()) {
        Ok(k) => {
            let rows = |e: &KExpr| match e {
                KExpr::Payoff { row, .. } => Some(*row),
                _ => None,
            };
            match &k.body {
                KExpr::Binop { left, right, .. } => {
                    k.rows == vec![100, 200] && rows(left) == Some(0) && rows(right) == Some(1)
                }
                _ => false,
            }
        }
        Err(_) => false,
    };
    if !reindex_ok {
        notes.push("reindex (100, 200) did not map to rows (0, 1)".into());
    }
    outcome(
        compile_ok && cut_ok && reindex_ok,
        format!("compile golden {compile_ok}, cut golden {cut_ok}, reindex golden {reindex_ok}") + &first(&notes),
    )
}

fn criterion_7() -> Outcome {
    let start = Instant::now();
    let inst = instruments::vanilla();
    let (p1, p2) = xy();
    let t = 90.0 / 365.0;
    let mut parts = Vec::new();
    let mut pass = true;
    for (r, oracle) in [(0.0, BS_R0), (0.05, BS_R5)] {
        let bs = match black_scholes_call(100.0, 100.0, r, 0.2, t) {
            Ok(v) => v,
            Err(e) => return outcome(false, format!("closed form failed: {e}")),
        };
        let k = reindex(&cut_payoff(&compile(&inst.contract).unwrap()), &inst.tenv).unwrap();
        let sim = Simulator::new(ModelSpec::single("AAPL", 100.0, 0.2, r)).unwrap();
        // the payoff flows from X to Y, valued with p1 = X, p2 = Y
        let res = price_mc(&k, &sim, &Discount::rate(r), 0, 100_000, SEED, &p1, &p2, 8);
        let Ok(res) = res else {
            return outcome(false, format!("pricing failed: {res:?}"));
        };
        let ok = (bs - oracle).abs() <= 1e-12
            && (res.price - bs).abs() <= 3.0 * res.std_error
            && res.std_error <= 0.15;
        pass &= ok;
        parts.push(format!(
            "r={r}: mc {:.4} bs {:.4} diff {:.4} se {:.4}",
            res.price,
            bs,
            (res.price - bs).abs(),
            res.std_error
        ));
    }
    let secs = start.elapsed();
    pass &= secs < Duration::from_secs(30);
    outcome(pass, format!("{}; {secs:.2?}", parts.join("; ")))
}

fn criterion_8() -> Outcome {
    const PATHS: u64 = 4096;
    let (p1, p2) = xy();
    let mut parts = Vec::new();
    let mut pass = true;
    for inst in [instruments::barrier(), instruments::double()] {
        let closed = instantiate(&inst.contract, &inst.tenv).unwrap();
        let rate = inst.model.labels.values().next().unwrap().rate;
        let disc = Discount::rate(rate);
        let k = reindex(&cut_payoff(&compile(&inst.contract).unwrap()), &inst.tenv).unwrap();
        let sim = Simulator::new(inst.model.clone()).unwrap();
        let pricer = KernelPricer::new(&k, &sim, &disc).unwrap();
        let times = [0, 10, 30];
        let mut path_mismatch = 0;
        for path in 0..PATHS {
            let cut = pricer.path_values(path, SEED, &times, &p1, &p2).unwrap();
            for (&t, a) in times.iter().zip(&cut) {
                let b = reduction_path_value(&closed, &pricer, &disc, t, path, SEED, &p1, &p2).unwrap();
                if a.to_bits() != b.to_bits() {
                    path_mismatch += 1;
                }
            }
        }
        let mut prices = Vec::new();
        for t in times {
            let a = price_mc(&k, &sim, &disc, t, PATHS, SEED, &p1, &p2, 4).unwrap();
            let b = price_by_reduction(&closed, &k, &sim, &disc, t, PATHS, SEED, &p1, &p2, 4).unwrap();
            pass &= a.price.to_bits() == b.price.to_bits() && a == b;
            prices.push(format!("t={t} {:.4}", a.price));
        }
        pass &= path_mismatch == 0;
        parts.push(format!("{}: {path_mismatch} path mismatches, {}", inst.name, prices.join(" ")));
    }
    outcome(pass, format!("{PATHS} shared paths; {}", parts.join("; ")))
}

fn price_json(args: &[&str]) -> Result<Vec<u8>, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_clc"))
        .arg("price")
        .args(args)
        .output()
        .map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(String::from_utf8_lossy(&out.stderr).into_owned());
    }
    Ok(out.stdout)
}

fn criterion_9() -> Outcome {
    let mut notes = Vec::new();
    let mut pass = true;
    for inst in ["@vanilla", "@barrier", "@double"] {
        let base = [inst, "--paths", "20000", "--seed", "17", "--at", "0,10,30"];
        let run = |w: &str| price_json(&[&base[..], &["--workers", w]].concat());
        match (run("1"), run("1"), run("8")) {
            (Ok(a), Ok(b), Ok(c)) => {
                let same = a == b && a == c && !a.is_empty();
                pass &= same;
                notes.push(format!("{inst} identical: {same}"));
            }
            (a, b, c) => {
                pass = false;
                notes.push(format!("{inst} failed: {:?}", [a.err(), b.err(), c.err()]));
            }
        }
    }
    outcome(pass, format!("same seed twice and 1 vs 8 workers; {}", notes.join(", ")))
}

fn first(items: &[String]) -> String {
    items.first().map(|s| format!("; first: {s}")).unwrap_or_default()
}

fn main() {
    // the harness passes filter arguments; this target always runs everything
    let mut failed = 0;
    let mut report = |n: u32, name: &str, o: Outcome| {
        let tag = if o.pass { "PASS" } else { "FAIL" };
        failed += (!o.pass) as u32;
        println!("{tag} criterion {n} ({name}): {}", o.detail);
    };
    let mut tot = Totality::default();
    report(1, "compile soundness", criterion_1(&mut tot));
    report(2, "cut payoff at every step", criterion_2(&mut tot));
    report(3, "cut payoff commutes with reduction", criterion_3(&mut tot));
    report(4, "totality", criterion_4(&tot));
    report(5, "template instantiation", criterion_5());
    report(6, "golden payoffs and reindexing", criterion_6());
    report(7, "Monte Carlo against closed form", criterion_7());
    report(8, "cut kernel against reduction pricing", criterion_8());
    report(9, "deterministic price output", criterion_9());
    println!(
        "N/A  criterion 10 (accelerator timings): not reproducible without the original GPU setup; \
         criteria 3 and 8 cover the no-recompilation behaviour"
    );
    if failed > 0 {
        println!("{failed} criterion(s) failed");
        std::process::exit(1);
    }
}
