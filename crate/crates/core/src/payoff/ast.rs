use serde::{Deserialize, Serialize};

use crate::contract::{Party, TExpr};

/// Natural-valued template expression with syntactic addition.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ILTExpr {
    Tplus { left: Box<ILTExpr>, right: Box<ILTExpr> },
    Texpr { t: TExpr },
}

/// Integer-valued template expression, used for observable times which
/// may point into the past.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ILTExprZ {
    TplusZ { left: Box<ILTExprZ>, right: Box<ILTExprZ> },
    TexprZ { t: ILTExpr },
    TnumZ { value: i64 },
}

impl ILTExpr {
    pub fn num(n: u64) -> Self {
        ILTExpr::Texpr { t: TExpr::num(n) }
    }

    pub fn var(name: impl Into<String>) -> Self {
        ILTExpr::Texpr { t: TExpr::var(name) }
    }

    pub fn tplus(left: ILTExpr, right: ILTExpr) -> Self {
        ILTExpr::Tplus { left: Box::new(left), right: Box::new(right) }
    }

    pub fn as_num(&self) -> Option<u64> {
        match self {
            ILTExpr::Texpr { t } => t.as_num(),
            ILTExpr::Tplus { .. } => None,
        }
    }
}

impl ILTExprZ {
    pub fn num(z: i64) -> Self {
        ILTExprZ::TnumZ { value: z }
    }

    pub fn lift(t: ILTExpr) -> Self {
        ILTExprZ::TexprZ { t }
    }

    pub fn tplus(left: ILTExprZ, right: ILTExprZ) -> Self {
        ILTExprZ::TplusZ { left: Box::new(left), right: Box::new(right) }
    }

    /// Numeral value, looking through a lifted natural numeral.
    pub fn as_num(&self) -> Option<i64> {
        match self {
            ILTExprZ::TnumZ { value } => Some(*value),
            ILTExprZ::TexprZ { t } => t.as_num().and_then(|n| i64::try_from(n).ok()),
            ILTExprZ::TplusZ { .. } => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UnOp {
    Neg,
    Not,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BinOp {
    Add,
    Sub,
    Mult,
    Div,
    Lt,
    Leq,
    Eq,
    And,
    Or,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mult => "*",
            BinOp::Div => "/",
            BinOp::Lt => "<",
            BinOp::Leq => "<=",
            BinOp::Eq => "==",
            BinOp::And => "&&",
            BinOp::Or => "||",
        }
    }

    /// Binding strength for infix printing; higher binds tighter.
    pub fn precedence(self) -> u8 {
        match self {
            BinOp::Or => 1,
            BinOp::And => 2,
            BinOp::Lt | BinOp::Leq | BinOp::Eq => 3,
            BinOp::Add | BinOp::Sub => 4,
            BinOp::Mult | BinOp::Div => 5,
        }
    }
}

/// Payoff expressions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ILExpr {
    If {
        cond: Box<ILExpr>,
        then: Box<ILExpr>,
        #[serde(rename = "else")]
        els: Box<ILExpr>,
    },
    Float { value: f64 },
    Nat { value: u64 },
    Bool { value: bool },
    /// A template expression used as a value (a day number).
    Texpr { t: ILTExpr },
    Now,
    Model { label: String, time: ILTExprZ },
    Unop { op: UnOp, arg: Box<ILExpr> },
    Binop { op: BinOp, left: Box<ILExpr>, right: Box<ILExpr> },
    Loopif {
        cond: Box<ILExpr>,
        then: Box<ILExpr>,
        #[serde(rename = "else")]
        els: Box<ILExpr>,
        window: TExpr,
    },
    Payoff { time: ILTExpr, from: Party, to: Party },
}

impl ILExpr {
    pub fn float(value: f64) -> Self {
        ILExpr::Float { value }
    }

    pub fn if_(cond: ILExpr, then: ILExpr, els: ILExpr) -> Self {
        ILExpr::If { cond: Box::new(cond), then: Box::new(then), els: Box::new(els) }
    }

    pub fn loopif(cond: ILExpr, then: ILExpr, els: ILExpr, window: TExpr) -> Self {
        ILExpr::Loopif {
            cond: Box::new(cond),
            then: Box::new(then),
            els: Box::new(els),
            window,
        }
    }

    pub fn binop(op: BinOp, left: ILExpr, right: ILExpr) -> Self {
        ILExpr::Binop { op, left: Box::new(left), right: Box::new(right) }
    }

    pub fn unop(op: UnOp, arg: ILExpr) -> Self {
        ILExpr::Unop { op, arg: Box::new(arg) }
    }

    pub fn model(label: impl Into<String>, time: ILTExprZ) -> Self {
        ILExpr::Model { label: label.into(), time }
    }

    pub fn payoff(time: ILTExpr, from: &str, to: &str) -> Self {
        ILExpr::Payoff { time, from: Party::new(from), to: Party::new(to) }
    }

    /// Number of nodes.
    pub fn size(&self) -> usize {
        match self {
            ILExpr::Float { .. }
            | ILExpr::Nat { .. }
            | ILExpr::Bool { .. }
            | ILExpr::Texpr { .. }
            | ILExpr::Now
            | ILExpr::Model { .. }
            | ILExpr::Payoff { .. } => 1,
            ILExpr::Unop { arg, .. } => 1 + arg.size(),
            ILExpr::Binop { left, right, .. } => 1 + left.size() + right.size(),
            ILExpr::If { cond, then, els } | ILExpr::Loopif { cond, then, els, .. } => {
                1 + cond.size() + then.size() + els.size()
            }
        }
    }

    /// Canonical JSON: sorted keys, shortest round-trip floats.
    pub fn to_canonical_json(&self) -> String {
        crate::json::canonical(self).expect("payoff expressions always serialize")
    }

    pub fn from_json(text: &str) -> crate::Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}
