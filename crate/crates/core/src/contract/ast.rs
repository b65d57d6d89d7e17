//! Abstract syntax of the contract language.

use std::fmt;

use serde::{Deserialize, Serialize};

/// A contract party, e.g. `me` or `you`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Party(pub String);

/// An asset symbol, e.g. `USD`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Asset(pub String);

impl Party {
    pub fn new(name: impl Into<String>) -> Self {
        Party(name.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl Asset {
    pub fn new(name: impl Into<String>) -> Self {
        Asset(name.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Party {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Display for Asset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// A temporal template expression: a day count literal or a template variable.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TExpr {
    Num { value: u64 },
    Var { name: String },
}

impl TExpr {
    pub fn num(value: u64) -> Self {
        TExpr::Num { value }
    }

    pub fn var(name: impl Into<String>) -> Self {
        TExpr::Var { name: name.into() }
    }

    pub fn as_num(&self) -> Option<u64> {
        match self {
            TExpr::Num { value } => Some(*value),
            TExpr::Var { .. } => None,
        }
    }
}

impl fmt::Display for TExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TExpr::Num { value } => write!(f, "{value}"),
            TExpr::Var { name } => f.write_str(name),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Op {
    Add,
    Sub,
    Mult,
    Div,
    Lt,
    Leq,
    Eq,
    And,
    Or,
    Not,
    Neg,
    Cond,
}

impl Op {
    pub fn arity(self) -> usize {
        match self {
            Op::Not | Op::Neg => 1,
            Op::Cond => 3,
            _ => 2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Op::Add => "add",
            Op::Sub => "sub",
            Op::Mult => "mult",
            Op::Div => "div",
            Op::Lt => "lt",
            Op::Leq => "leq",
            Op::Eq => "eq",
            Op::And => "and",
            Op::Or => "or",
            Op::Not => "not",
            Op::Neg => "neg",
            Op::Cond => "cond",
        }
    }
}

/// Contract expressions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Exp {
    Op { op: Op, args: Vec<Exp> },
    /// Observable `label` read `offset` days from the current day.
    Obs { label: String, offset: i64 },
    Real { value: f64 },
    Bool { value: bool },
    Var { name: String },
    /// `acc(var. body, days, init)`: folds `body` over the last `days` days,
    /// starting from `init` evaluated `days` days ago.
    Acc {
        var: String,
        body: Box<Exp>,
        days: u64,
        init: Box<Exp>,
    },
}

impl Exp {
    pub fn op(op: Op, args: Vec<Exp>) -> Self {
        Exp::Op { op, args }
    }

    pub fn obs(label: impl Into<String>, offset: i64) -> Self {
        Exp::Obs { label: label.into(), offset }
    }

    pub fn real(value: f64) -> Self {
        Exp::Real { value }
    }

    pub fn bool(value: bool) -> Self {
        Exp::Bool { value }
    }

    pub fn var(name: impl Into<String>) -> Self {
        Exp::Var { name: name.into() }
    }

    pub fn acc(var: impl Into<String>, body: Exp, days: u64, init: Exp) -> Self {
        Exp::Acc {
            var: var.into(),
            body: Box::new(body),
            days,
            init: Box::new(init),
        }
    }

    pub fn bin(op: Op, lhs: Exp, rhs: Exp) -> Self {
        Exp::Op { op, args: vec![lhs, rhs] }
    }

    #[allow(clippy::should_implement_trait)]
    pub fn add(lhs: Exp, rhs: Exp) -> Self {
        Exp::bin(Op::Add, lhs, rhs)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn sub(lhs: Exp, rhs: Exp) -> Self {
        Exp::bin(Op::Sub, lhs, rhs)
    }

    pub fn mult(lhs: Exp, rhs: Exp) -> Self {
        Exp::bin(Op::Mult, lhs, rhs)
    }

    pub fn lt(lhs: Exp, rhs: Exp) -> Self {
        Exp::bin(Op::Lt, lhs, rhs)
    }

    /// `lhs > rhs`, represented as `rhs < lhs`.
    pub fn gt(lhs: Exp, rhs: Exp) -> Self {
        Exp::bin(Op::Lt, rhs, lhs)
    }

    pub fn cond(b: Exp, then: Exp, els: Exp) -> Self {
        Exp::Op { op: Op::Cond, args: vec![b, then, els] }
    }
}

/// Contracts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Contr {
    Zero,
    Let {
        var: String,
        bound: Exp,
        body: Box<Contr>,
    },
    Transfer {
        from: Party,
        to: Party,
        asset: Asset,
    },
    Scale {
        factor: Exp,
        body: Box<Contr>,
    },
    Translate {
        shift: TExpr,
        body: Box<Contr>,
    },
    Both {
        left: Box<Contr>,
        right: Box<Contr>,
    },
    IfWithin {
        cond: Exp,
        window: TExpr,
        then: Box<Contr>,
        #[serde(rename = "else")]
        els: Box<Contr>,
    },
}

impl Contr {
    pub fn transfer(from: &str, to: &str, asset: &str) -> Self {
        Contr::Transfer {
            from: Party::new(from),
            to: Party::new(to),
            asset: Asset::new(asset),
        }
    }

    pub fn scale(factor: Exp, body: Contr) -> Self {
        Contr::Scale { factor, body: Box::new(body) }
    }

    pub fn translate(shift: TExpr, body: Contr) -> Self {
        Contr::Translate { shift, body: Box::new(body) }
    }

    pub fn both(left: Contr, right: Contr) -> Self {
        Contr::Both { left: Box::new(left), right: Box::new(right) }
    }

    pub fn if_within(cond: Exp, window: TExpr, then: Contr, els: Contr) -> Self {
        Contr::IfWithin {
            cond,
            window,
            then: Box::new(then),
            els: Box::new(els),
        }
    }

    pub fn let_in(var: impl Into<String>, bound: Exp, body: Contr) -> Self {
        Contr::Let { var: var.into(), bound, body: Box::new(body) }
    }

    /// `all[c1, ..., cn]` as right-nested `both`; the empty list is `zero`.
    pub fn all(mut parts: Vec<Contr>) -> Self {
        let Some(mut acc) = parts.pop() else {
            return Contr::Zero;
        };
        while let Some(c) = parts.pop() {
            acc = Contr::both(c, acc);
        }
        acc
    }

    /// Number of nodes, counting expression nodes as one each.
    pub fn size(&self) -> usize {
        match self {
            Contr::Zero | Contr::Transfer { .. } => 1,
            Contr::Let { body, .. }
            | Contr::Scale { body, .. }
            | Contr::Translate { body, .. } => 1 + body.size(),
            Contr::Both { left, right } => 1 + left.size() + right.size(),
            Contr::IfWithin { then, els, .. } => 1 + then.size() + els.size(),
        }
    }
}
