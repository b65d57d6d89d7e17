//! Example contracts and the three pricing instruments, with default
//! template values and models.

use indexmap::IndexMap;

use crate::contract::{Contr, TEnv};
use crate::pricing::{LabelSpec, ModelSpec};
use crate::syntax::parse_contract;

/// European call on AAPL, 90 days, strike 100.
pub const EUROPEAN_OPTION: &str = "\
translate(90,
  if(obs(AAPL,0) > 100.0,
     scale(obs(AAPL,0) - 100.0, transfer(you, me, USD)),
     zero))";

/// Three-month FX swap with a settled schedule.
pub const FX_SWAP: &str = "\
scale(1.000.000,
  both(
    all[translate(22, transfer(me, you, EUR)),
        translate(52, transfer(me, you, EUR)),
        translate(83, transfer(me, you, EUR))],
    scale(7.21,
      all[translate(22, transfer(you, me, DKK)),
          translate(52, transfer(you, me, DKK)),
          translate(83, transfer(you, me, DKK))])))";

/// Fixed payment after `t0` days and a call on AAPL `t1` days later.
pub const DEFERRED_OPTION: &str = "\
translate(t0,
  both(scale(100.0, transfer(you, me, USD)),
       translate(t1,
         if(obs(AAPL,0) > 100.0,
            scale(obs(AAPL,0) - 100.0, transfer(you, me, USD)),
            zero))))";

/// European call maturing after `T` days; X writes, Y holds.
pub const VANILLA: &str = "\
translate(T,
  if(obs(AAPL, 0) > 100.0,
     scale(obs(AAPL, 0) - 100.0, transfer(X, Y, USD)),
     zero))";

/// Pays 1000 as soon as any of three indices falls to its barrier within
/// `T` days, otherwise 1100 at day `T`.
pub const BARRIER: &str = "\
if(obs(DJ, 0) <= 2800.0 | obs(NIK, 0) <= 17000.0 | obs(SP, 0) <= 1900.0, T,
   scale(1000.0, transfer(X, Y, EUR)),
   scale(1100.0, transfer(X, Y, EUR)))";

/// Two European calls on different underlyings, maturing after `T1` and
/// `T2` days.
pub const DOUBLE: &str = "\
both(
  translate(T1,
    if(obs(AAPL, 0) > 150.0,
       scale(obs(AAPL, 0) - 150.0, transfer(X, Y, USD)),
       zero)),
  translate(T2,
    if(obs(MSFT, 0) > 250.0,
       scale(obs(MSFT, 0) - 250.0, transfer(X, Y, USD)),
       zero)))";

fn parse(src: &str) -> Contr {
    parse_contract(src).expect("built-in contracts parse")
}

/// A pricing instrument: template contract, default template values and
/// a model covering its observables.
#[derive(Debug, Clone)]
pub struct Instrument {
    pub name: &'static str,
    pub contract: Contr,
    pub tenv: TEnv,
    pub model: ModelSpec,
}

fn model(labels: &[(&str, f64, f64)], rate: f64, corr: Option<Vec<Vec<f64>>>) -> ModelSpec {
    let mut m = IndexMap::new();
    for &(name, spot, vol) in labels {
        m.insert(name.to_owned(), LabelSpec { spot, vol, rate });
    }
    ModelSpec { labels: m, corr, day_count: 365.0 }
}

pub fn vanilla() -> Instrument {
    Instrument {
        name: "vanilla",
        contract: parse(VANILLA),
        tenv: TEnv::new().with("T", 90),
        model: model(&[("AAPL", 100.0, 0.2)], 0.0, None),
    }
}

pub fn barrier() -> Instrument {
    Instrument {
        name: "barrier",
        contract: parse(BARRIER),
        tenv: TEnv::new().with("T", 60),
        model: model(
            &[("DJ", 3000.0, 0.2), ("NIK", 18000.0, 0.25), ("SP", 2000.0, 0.2)],
            0.01,
            Some(vec![vec![1.0, 0.6, 0.7], vec![0.6, 1.0, 0.5], vec![0.7, 0.5, 1.0]]),
        ),
    }
}

pub fn double() -> Instrument {
    Instrument {
        name: "double",
        contract: parse(DOUBLE),
        tenv: TEnv::new().with("T1", 45).with("T2", 90),
        model: model(
            &[("AAPL", 150.0, 0.25), ("MSFT", 250.0, 0.2)],
            0.02,
            Some(vec![vec![1.0, 0.4], vec![0.4, 1.0]]),
        ),
    }
}

pub fn by_name(name: &str) -> Option<Instrument> {
    match name {
        "vanilla" => Some(vanilla()),
        "barrier" => Some(barrier()),
        "double" => Some(double()),
        _ => None,
    }
}
