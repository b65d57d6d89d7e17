//! `clc`: command-line front end for parsing, compiling, evaluating,
//! emitting and pricing contracts.
//!
//! Exit statuses:
//!
//! | code | meaning |
//! |------|---------|
//! | 0 | success |
//! | 1 | usage, I/O or other failure |
//! | 2 | parse error (contract text or JSON input) |
//! | 3 | type error |
//! | 4 | unsupported construct |
//! | 5 | evaluation or environment error |
//! | 6 | verification failure |

use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use clc_core::codegen::{emit_functional_source, emit_kernel_source, reindex};
use clc_core::compiler::check::{run_cases, Theorem};
use clc_core::compiler::compile;
use clc_core::contract::{
    advance, check_contract, instantiate, template_vars, Contr, ExtEnv, Generator, Party, TEnv, Type, TypeCtx,
};
use clc_core::instruments::{self, Instrument};
use clc_core::json::canonical;
use clc_core::payoff::{cut_payoff, eval_at, Discount, DiscountSpec, ILExpr};
use clc_core::pricing::{price_across_time, ModelSpec, Simulator};
use clc_core::syntax::{parse_contract, pretty};
use clc_core::{Error, ErrorKind};

#[derive(Parser)]
#[command(name = "clc", version, about = "Compile, evaluate and price financial contracts")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Typecheck a contract and report its template variables.
    Check {
        #[command(flatten)]
        src: Source,
        /// Labels whose observations are booleans.
        #[arg(long = "bool-label", value_name = "LABEL")]
        bool_labels: Vec<String>,
    },
    /// Substitute template variables and print the closed contract.
    Inst {
        #[command(flatten)]
        src: Source,
        #[command(flatten)]
        tenv: TenvArgs,
    },
    /// Compile to a payoff expression.
    Compile {
        #[command(flatten)]
        src: Source,
        /// Guard every payoff so transfers before the pricing time vanish.
        #[arg(long)]
        cut: bool,
        #[arg(long, value_enum, default_value_t = CompileFormat::Json)]
        format: CompileFormat,
    },
    /// Evaluate a contract (or a compiled payoff JSON file) at time `--t`.
    Eval {
        #[command(flatten)]
        src: Source,
        #[command(flatten)]
        env: EnvArgs,
        #[command(flatten)]
        tenv: TenvArgs,
        #[command(flatten)]
        disc: DiscArgs,
        #[command(flatten)]
        parties: PartyArgs,
        /// Pricing time in days.
        #[arg(long, default_value_t = 0)]
        t: u64,
        /// Apply the payoff cut before evaluating (contract input only).
        #[arg(long)]
        cut: bool,
    },
    /// Reduce a contract by a number of days and print what remains.
    Advance {
        #[command(flatten)]
        src: Source,
        #[command(flatten)]
        env: EnvArgs,
        #[command(flatten)]
        tenv: TenvArgs,
        #[arg(long, default_value_t = 1)]
        steps: u64,
    },
    /// Emit kernel or functional source for the (cut) payoff.
    Emit {
        #[command(flatten)]
        src: Source,
        #[command(flatten)]
        tenv: TenvArgs,
        #[arg(long, value_enum, default_value_t = EmitFormat::Kernel)]
        format: EmitFormat,
        /// Emit the compiled payoff without the cut.
        #[arg(long)]
        no_cut: bool,
        /// Print the kernel as JSON instead of source text.
        #[arg(long)]
        json: bool,
    },
    /// Monte Carlo price under correlated geometric Brownian motion.
    Price {
        #[command(flatten)]
        src: Source,
        #[command(flatten)]
        tenv: TenvArgs,
        #[command(flatten)]
        disc: DiscArgs,
        #[command(flatten)]
        parties: PartyArgs,
        /// Model JSON file; built-in instruments carry a default.
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long, default_value_t = 100_000)]
        paths: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Pricing times in days; several give a JSON array.
        #[arg(long, value_delimiter = ',', default_value = "0")]
        at: Vec<u64>,
        /// Worker threads; results do not depend on it.
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Run the randomized correctness harness and print a JSONL report.
    Verify {
        /// 1 compile soundness, 2 totality, 4 commuting diagram, 5 cut payoff.
        #[arg(long)]
        theorem: u32,
        #[arg(long, default_value_t = 1000)]
        cases: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write the report here instead of stdout.
        #[arg(long)]
        report: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum CompileFormat {
    Json,
    Text,
}

#[derive(Clone, Copy, ValueEnum)]
enum EmitFormat {
    Kernel,
    Functional,
}

#[derive(Args)]
struct Source {
    /// Contract file, `-` for stdin, or `@NAME` for a built-in
    /// (vanilla, barrier, double, european, fxswap, deferred).
    contract: String,
}

#[derive(Args)]
struct TenvArgs {
    /// Template variable binding `NAME=DAYS`; repeatable.
    #[arg(short = 't', long = "tvar", value_name = "NAME=DAYS", value_parser = parse_binding)]
    bindings: Vec<(String, u64)>,
    /// JSON object mapping template variables to days.
    #[arg(long)]
    tenv: Option<PathBuf>,
}

#[derive(Args)]
struct EnvArgs {
    /// Observation environment JSON file.
    #[arg(long, conflicts_with = "env_seed")]
    env: Option<PathBuf>,
    /// Use a generated total environment with this seed.
    #[arg(long)]
    env_seed: Option<u64>,
}

#[derive(Args)]
struct DiscArgs {
    /// Continuously compounded annual rate, `d(t) = exp(-rate t / 365)`.
    #[arg(long, conflicts_with = "disc")]
    rate: Option<f64>,
    /// Discount JSON file: `{"rate": r}` or `{"factors": [...]}`.
    #[arg(long)]
    disc: Option<PathBuf>,
}

#[derive(Args)]
struct PartyArgs {
    #[arg(long, default_value = "X")]
    p1: String,
    #[arg(long, default_value = "Y")]
    p2: String,
}

fn parse_binding(s: &str) -> Result<(String, u64), String> {
    let (k, v) = s.split_once('=').ok_or_else(|| format!("expected NAME=DAYS, got `{s}`"))?;
    let v = v.trim().parse().map_err(|e| format!("`{v}`: {e}"))?;
    Ok((k.trim().to_owned(), v))
}

enum Failure {
    Core(Error),
    Other(String),
    Verify(usize),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Other(e.to_string())
    }
}

type Res<T> = std::result::Result<T, Failure>;

fn read_text(path: &Path) -> Res<String> {
    if path.as_os_str() == "-" {
        let mut s = String::new();
        io::stdin().read_to_string(&mut s)?;
        Ok(s)
    } else {
        fs::read_to_string(path).map_err(|e| Failure::Other(format!("{}: {e}", path.display())))
    }
}

enum Input {
    Contract(Contr, Option<Box<Instrument>>),
    Payoff(ILExpr),
}

fn builtin(name: &str) -> Option<(Contr, Option<Box<Instrument>>)> {
    if let Some(inst) = instruments::by_name(name) {
        return Some((inst.contract.clone(), Some(Box::new(inst))));
    }
    let src = match name {
        "european" => instruments::EUROPEAN_OPTION,
        "fxswap" => instruments::FX_SWAP,
        "deferred" => instruments::DEFERRED_OPTION,
        _ => return None,
    };
    Some((parse_contract(src).ok()?, None))
}

impl Source {
    fn load(&self) -> Res<Input> {
        if let Some(name) = self.contract.strip_prefix('@') {
            let (c, inst) = builtin(name).ok_or_else(|| Failure::Other(format!("no built-in contract `{name}`")))?;
            return Ok(Input::Contract(c, inst));
        }
        let text = read_text(Path::new(&self.contract))?;
        if text.trim_start().starts_with('{') {
            return Ok(Input::Payoff(ILExpr::from_json(&text)?));
        }
        Ok(Input::Contract(parse_contract(&text)?, None))
    }

    /// Loads and typechecks a contract; payoff JSON is rejected.
    fn contract(&self) -> Res<(Contr, Option<Box<Instrument>>)> {
        match self.load()? {
            Input::Contract(c, inst) => {
                check_contract(&TypeCtx::new(), &c)?;
                Ok((c, inst))
            }
            Input::Payoff(_) => Err(Failure::Other("expected contract text, got a payoff JSON file".into())),
        }
    }
}

impl TenvArgs {
    fn resolve(&self, defaults: Option<&TEnv>) -> Res<TEnv> {
        let mut tenv = defaults.cloned().unwrap_or_default();
        if let Some(p) = &self.tenv {
            let file: TEnv = serde_json::from_str(&read_text(p)?).map_err(Error::from)?;
            for (k, v) in file.iter() {
                tenv.insert(k, v);
            }
        }
        for (k, v) in &self.bindings {
            tenv.insert(k.clone(), *v);
        }
        Ok(tenv)
    }
}

impl EnvArgs {
    fn resolve(&self) -> Res<ExtEnv> {
        match (&self.env, self.env_seed) {
            (Some(p), _) => Ok(ExtEnv::from_json(&read_text(p)?)?),
            (None, Some(s)) => Ok(ExtEnv::generated(Generator::new(s))),
            (None, None) => Ok(ExtEnv::empty()),
        }
    }
}

impl DiscArgs {
    fn resolve(&self, default_rate: f64) -> Res<Discount> {
        match (&self.disc, self.rate) {
            (Some(p), _) => {
                let spec: DiscountSpec = serde_json::from_str(&read_text(p)?).map_err(Error::from)?;
                Ok(Discount::from_spec(spec))
            }
            (None, Some(r)) => Ok(Discount::rate(r)),
            (None, None) => Ok(Discount::rate(default_rate)),
        }
    }
}

impl PartyArgs {
    fn parties(&self) -> (Party, Party) {
        (Party::new(&self.p1), Party::new(&self.p2))
    }
}

/// Rate shared by every label of a built-in model, used as its default
/// discount rate.
fn instrument_rate(inst: Option<&Instrument>) -> f64 {
    inst.and_then(|i| i.model.labels.values().next()).map_or(0.0, |l| l.rate)
}

fn run(cmd: Cmd, out: &mut impl Write) -> Res<()> {
    match cmd {
        Cmd::Check { src, bool_labels } => {
            let c = match src.load()? {
                Input::Contract(c, _) => c,
                Input::Payoff(_) => return Err(Failure::Other("expected contract text".into())),
            };
            let ctx = bool_labels.into_iter().fold(TypeCtx::new(), |ctx, l| ctx.with_label(l, Type::Bool));
            check_contract(&ctx, &c)?;
            let vars: Vec<String> = template_vars(&c).into_iter().collect();
            if vars.is_empty() {
                writeln!(out, "ok")?;
            } else {
                writeln!(out, "ok (template variables: {})", vars.join(", "))?;
            }
        }
        Cmd::Inst { src, tenv } => {
            let (c, inst) = src.contract()?;
            let tenv = tenv.resolve(inst.as_ref().map(|i| &i.tenv))?;
            writeln!(out, "{}", pretty(&instantiate(&c, &tenv)?))?;
        }
        Cmd::Compile { src, cut, format } => {
            let (c, _) = src.contract()?;
            let mut il = compile(&c)?;
            if cut {
                il = cut_payoff(&il);
            }
            match format {
                CompileFormat::Json => writeln!(out, "{}", il.to_canonical_json())?,
                CompileFormat::Text => writeln!(out, "{il}")?,
            }
        }
        Cmd::Eval { src, env, tenv, disc, parties, t, cut } => {
            let (il, inst) = match src.load()? {
                Input::Contract(c, inst) => {
                    check_contract(&TypeCtx::new(), &c)?;
                    let il = compile(&c)?;
                    (if cut { cut_payoff(&il) } else { il }, inst)
                }
                Input::Payoff(il) => (il, None),
            };
            let tenv = tenv.resolve(inst.as_ref().map(|i| &i.tenv))?;
            let disc = disc.resolve(instrument_rate(inst.as_deref()))?;
            let (p1, p2) = parties.parties();
            let v = eval_at(t, &il, &env.resolve()?, &tenv, &disc, &p1, &p2)?;
            writeln!(out, "{}", serde_json::to_string(&v).map_err(Error::from)?)?;
        }
        Cmd::Advance { src, env, tenv, steps } => {
            let (c, inst) = src.contract()?;
            let tenv = tenv.resolve(inst.as_ref().map(|i| &i.tenv))?;
            let c = instantiate(&c, &tenv)?;
            let (rest, emitted) = advance(&c, &env.resolve()?, steps)?;
            let transfers: Vec<_> = emitted
                .iter()
                .enumerate()
                .map(|(day, t)| serde_json::json!({ "day": day, "flows": t.flows().collect::<Vec<_>>() }))
                .collect();
            let doc = serde_json::json!({ "residual": rest.to_string(), "transfers": transfers });
            writeln!(out, "{}", canonical(&doc)?)?;
        }
        Cmd::Emit { src, tenv, format, no_cut, json } => {
            let (c, inst) = src.contract()?;
            let il = compile(&c)?;
            let il = if no_cut { il } else { cut_payoff(&il) };
            match format {
                EmitFormat::Functional => write!(out, "{}", emit_functional_source(&il))?,
                EmitFormat::Kernel => {
                    let k = reindex(&il, &tenv.resolve(inst.as_ref().map(|i| &i.tenv))?)?;
                    if json {
                        writeln!(out, "{}", canonical(&k)?)?;
                    } else {
                        write!(out, "{}", emit_kernel_source(&k))?;
                    }
                }
            }
        }
        Cmd::Price { src, tenv, disc, parties, model, paths, seed, at, workers } => {
            let (c, inst) = src.contract()?;
            let tenv = tenv.resolve(inst.as_ref().map(|i| &i.tenv))?;
            let spec = match (&model, &inst) {
                (Some(p), _) => ModelSpec::from_json(&read_text(p)?)?,
                (None, Some(i)) => i.model.clone(),
                (None, None) => return Err(Failure::Other("--model is required for this contract".into())),
            };
            let disc = disc.resolve(if model.is_some() { 0.0 } else { instrument_rate(inst.as_deref()) })?;
            let k = reindex(&cut_payoff(&compile(&c)?), &tenv)?;
            let sim = Simulator::new(spec)?;
            let (p1, p2) = parties.parties();
            let workers = workers.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
            let results = price_across_time(&k, &sim, &disc, &at, paths, seed, &p1, &p2, workers)?;
            let text = if results.len() == 1 { canonical(&results[0])? } else { canonical(&results)? };
            writeln!(out, "{text}")?;
        }
        Cmd::Verify { theorem, cases, seed, report } => {
            let th = Theorem::from_number(theorem)
                .ok_or_else(|| Failure::Other(format!("unknown theorem {theorem}; expected 1, 2, 4 or 5")))?;
            let reports = run_cases(th, cases, seed);
            let mut text = String::new();
            for r in &reports {
                text.push_str(&canonical(r)?);
                text.push('\n');
            }
            match report {
                Some(p) => fs::write(&p, text).map_err(|e| Failure::Other(format!("{}: {e}", p.display())))?,
                None => out.write_all(text.as_bytes())?,
            }
            let failed = reports.iter().filter(|r| !r.pass).count();
            eprintln!("theorem {theorem}: {} of {cases} cases passed", cases as usize - failed);
            if failed > 0 {
                return Err(Failure::Verify(failed));
            }
        }
    }
    Ok(())
}

fn exit_code(f: &Failure) -> u8 {
    match f {
        Failure::Other(_) => 1,
        Failure::Core(e) => match e.kind() {
            ErrorKind::Parse => 2,
            ErrorKind::Type => 3,
            ErrorKind::Unsupported => 4,
            ErrorKind::Eval => 5,
        },
        Failure::Verify(_) => 6,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let stdout = io::stdout();
    let mut out = stdout.lock();
    match run(cli.cmd, &mut out) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            let code = exit_code(&f);
            match &f {
                Failure::Core(e) => eprintln!("error: {e}"),
                Failure::Other(m) => eprintln!("error: {m}"),
                Failure::Verify(n) => eprintln!("error: {n} case(s) failed"),
            }
            ExitCode::from(code)
        }
    }
}
