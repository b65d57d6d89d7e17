//! Random contracts, environments and discount tables for differential
//! testing.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::contract::{Contr, Exp, ExtEnv, Generator, Op, TEnv, TExpr};
use crate::payoff::Discount;

#[derive(Debug, Clone)]
pub struct GenConfig {
    pub max_depth: u32,
    pub max_window: u64,
    pub labels: Vec<String>,
    pub parties: Vec<String>,
    pub assets: Vec<String>,
    /// Template variables that windows and shifts may refer to. Empty means
    /// template-closed output.
    pub template_vars: Vec<String>,
    /// Emit `let` bindings and variable references.
    pub with_let: bool,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            max_depth: 6,
            max_window: 10,
            labels: vec!["A".into(), "B".into(), "C".into()],
            parties: vec!["X".into(), "Y".into(), "Z".into()],
            assets: vec!["USD".into()],
            template_vars: Vec::new(),
            with_let: false,
        }
    }
}

impl GenConfig {
    pub fn templated() -> Self {
        GenConfig {
            template_vars: vec!["T1".into(), "T2".into(), "T3".into()],
            ..Self::default()
        }
    }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn pick<'a, R: Rng>(rng: &mut R, xs: &'a [String]) -> &'a str {
    &xs[rng.random_range(0..xs.len())]
}

struct Gen<'c, R> {
    rng: R,
    cfg: &'c GenConfig,
    bound: Vec<String>,
    fresh: usize,
}

impl<R: Rng> Gen<'_, R> {
    fn texpr(&mut self) -> TExpr {
        if !self.cfg.template_vars.is_empty() && self.rng.random_bool(0.4) {
            TExpr::var(pick(&mut self.rng, &self.cfg.template_vars))
        } else if self.rng.random_bool(0.3) {
            TExpr::num(0)
        } else {
            TExpr::num(self.rng.random_range(0..=self.cfg.max_window))
        }
    }

    fn literal(&mut self) -> f64 {
        (self.rng.random_range(-200..=200) as f64) / 100.0
    }

    fn obs(&mut self) -> Exp {
        let label = pick(&mut self.rng, &self.cfg.labels).to_owned();
        Exp::obs(label, self.rng.random_range(-2..=2))
    }

    fn real(&mut self, depth: u32) -> Exp {
        let leaf = depth == 0 || self.rng.random_bool(0.35);
        if leaf {
            return match self.rng.random_range(0..10) {
                0..=4 => self.obs(),
                5 if !self.bound.is_empty() => {
                    Exp::var(self.bound[self.rng.random_range(0..self.bound.len())].clone())
                }
                _ => Exp::real(self.literal()),
            };
        }
        let d = depth - 1;
        match self.rng.random_range(0..7) {
            0 => Exp::add(self.real(d), self.real(d)),
            1 => Exp::sub(self.real(d), self.real(d)),
            2 => Exp::mult(self.real(d), self.real(d)),
            3 => Exp::op(Op::Neg, vec![self.real(d)]),
            4 => {
                // divide only by something that cannot be zero
                let den = if self.rng.random_bool(0.7) {
                    self.obs()
                } else {
                    let mut k = self.literal();
                    if k == 0.0 {
                        k = 1.0;
                    }
                    Exp::real(k)
                };
                Exp::bin(Op::Div, self.real(d), den)
            }
            5 => Exp::cond(self.boolean(d), self.real(d), self.real(d)),
            _ => self.obs(),
        }
    }

    fn boolean(&mut self, depth: u32) -> Exp {
        if depth == 0 || self.rng.random_bool(0.3) {
            return match self.rng.random_range(0..6) {
                0 => Exp::bool(self.rng.random_bool(0.5)),
                1 => Exp::bin(Op::Leq, self.obs(), Exp::real(self.rng.random_range(0.5..2.0))),
                _ => Exp::lt(self.obs(), Exp::real(self.rng.random_range(0.5..2.0))),
            };
        }
        let d = depth - 1;
        match self.rng.random_range(0..6) {
            0 => Exp::bin(Op::And, self.boolean(d), self.boolean(d)),
            1 => Exp::bin(Op::Or, self.boolean(d), self.boolean(d)),
            2 => Exp::op(Op::Not, vec![self.boolean(d)]),
            3 => Exp::bin(Op::Leq, self.real(d), self.real(d)),
            _ => Exp::lt(self.real(d), self.real(d)),
        }
    }

    fn transfer(&mut self) -> Contr {
        let cfg = self.cfg;
        // mostly between the first two parties, so most cases carry value
        let (from, to) = if cfg.parties.len() >= 2 && self.rng.random_bool(0.85) {
            let (a, b) = (cfg.parties[0].clone(), cfg.parties[1].clone());
            if self.rng.random_bool(0.5) { (a, b) } else { (b, a) }
        } else {
            (pick(&mut self.rng, &cfg.parties).to_owned(), pick(&mut self.rng, &cfg.parties).to_owned())
        };
        let asset = pick(&mut self.rng, &cfg.assets).to_owned();
        Contr::transfer(&from, &to, &asset)
    }

    fn contr(&mut self, depth: u32) -> Contr {
        if depth == 0 {
            return if self.rng.random_bool(0.1) { Contr::Zero } else { self.transfer() };
        }
        let d = depth - 1;
        let choices = if self.cfg.with_let { 8 } else { 7 };
        match self.rng.random_range(0..choices) {
            0 => self.transfer(),
            1 => Contr::scale(self.real(2), self.contr(d)),
            2 => Contr::translate(self.texpr(), self.contr(d)),
            3 | 4 => Contr::both(self.contr(d), self.contr(d)),
            5 | 6 => {
                let w = self.texpr();
                Contr::if_within(self.boolean(2), w, self.contr(d), self.contr(d))
            }
            _ => {
                let bound = self.real(1);
                let name = format!("v{}", self.fresh);
                self.fresh += 1;
                self.bound.push(name.clone());
                let body = self.contr(d);
                self.bound.pop();
                Contr::let_in(name, bound, body)
            }
        }
    }
}

/// A random contract; depth never exceeds `cfg.max_depth`.
pub fn gen_contract<R: Rng>(rng: &mut R, cfg: &GenConfig) -> Contr {
    let mut g = Gen { rng, cfg, bound: Vec::new(), fresh: 0 };
    g.contr(cfg.max_depth)
}

/// A random real expression over the configured labels.
pub fn gen_real_exp<R: Rng>(rng: &mut R, cfg: &GenConfig, depth: u32) -> Exp {
    let mut g = Gen { rng, cfg, bound: Vec::new(), fresh: 0 };
    g.real(depth)
}

/// A random boolean expression over the configured labels.
pub fn gen_bool_exp<R: Rng>(rng: &mut R, cfg: &GenConfig, depth: u32) -> Exp {
    let mut g = Gen { rng, cfg, bound: Vec::new(), fresh: 0 };
    g.boolean(depth)
}

/// Total environment with real values in `[0.5, 2.0)`.
pub fn gen_env(seed: u64) -> ExtEnv {
    ExtEnv::generated(Generator::new(seed))
}

/// Strictly decreasing discount factors in `(0.5, 1]`, starting at 1.
pub fn gen_discount<R: Rng>(rng: &mut R, len: usize) -> Discount {
    let mut f = Vec::with_capacity(len);
    let mut cur = 1.0f64;
    let step = 0.5 / len as f64;
    for _ in 0..len {
        f.push(cur);
        cur -= step * rng.random_range(0.05..1.0);
    }
    Discount::table(f)
}

/// Values for every template variable in `cfg`.
pub fn gen_tenv<R: Rng>(rng: &mut R, cfg: &GenConfig) -> TEnv {
    cfg.template_vars
        .iter()
        .map(|v| (v.clone(), rng.random_range(0..=cfg.max_window)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contract::{check_contract, is_template_closed, TypeCtx};

    fn depth(c: &Contr) -> u32 {
        match c {
            Contr::Zero | Contr::Transfer { .. } => 0,
            Contr::Scale { body, .. } | Contr::Translate { body, .. } | Contr::Let { body, .. } => {
                1 + depth(body)
            }
            Contr::Both { left, right } => 1 + depth(left).max(depth(right)),
            Contr::IfWithin { then, els, .. } => 1 + depth(then).max(depth(els)),
        }
    }

    #[test]
    fn generated_contracts_are_well_typed_and_bounded() {
        let cfg = GenConfig { with_let: true, ..GenConfig::default() };
        let mut r = rng(7);
        for _ in 0..200 {
            let c = gen_contract(&mut r, &cfg);
            assert!(depth(&c) <= 6);
            assert!(is_template_closed(&c));
            check_contract(&TypeCtx::new(), &c).unwrap();
        }
    }

    #[test]
    fn same_seed_same_contract() {
        let cfg = GenConfig::templated();
        assert_eq!(gen_contract(&mut rng(3), &cfg), gen_contract(&mut rng(3), &cfg));
    }

    #[test]
    fn discount_is_decreasing() {
        let d = gen_discount(&mut rng(1), 256);
        let mut prev = 2.0;
        for t in 0..256 {
            let f = d.factor(t).unwrap();
            assert!(f > 0.5 && f <= 1.0 && f < prev);
            prev = f;
        }
    }
}
