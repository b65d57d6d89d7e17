//! Flattened payoff kernels: observation and payoff days reindexed to dense
//! rows.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::contract::{ExtEnv, Party, TEnv, TExpr};
use crate::error::{Error, Result};
use crate::payoff::eval::{apply_binop, apply_unop};
use crate::payoff::{texpr_sem, texpr_z_sem, BinOp, Discount, ILExpr, ILTExpr, ILTExprZ, ILVal, UnOp};

/// `konst + Σ tenv[i]`, a flattened natural template expression.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KTime {
    pub konst: u64,
    pub tenv: Vec<usize>,
}

impl KTime {
    pub fn value(&self, tenv: &[u64]) -> Result<u64> {
        let mut v = self.konst;
        for &i in &self.tenv {
            v += *tenv
                .get(i)
                .ok_or_else(|| Error::IndexOutOfRange(format!("tenv[{i}]")))?;
        }
        Ok(v)
    }
}

/// Kernel body. Row references are relative to the innermost loop counter,
/// which starts at 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum KExpr {
    Float { value: f64 },
    Nat { value: u64 },
    Bool { value: bool },
    /// Day number `time + counter`.
    Time { time: KTime },
    Now,
    /// `ext[counter + row, col]`.
    Ext { row: usize, col: usize },
    /// `sign(from, to) * disc[counter + row]`.
    Payoff { row: usize, from: Party, to: Party },
    Unop { op: UnOp, arg: Box<KExpr> },
    Binop { op: BinOp, left: Box<KExpr>, right: Box<KExpr> },
    If {
        cond: Box<KExpr>,
        then: Box<KExpr>,
        #[serde(rename = "else")]
        els: Box<KExpr>,
    },
    Loop {
        cond: Box<KExpr>,
        then: Box<KExpr>,
        #[serde(rename = "else")]
        els: Box<KExpr>,
        window: KTime,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Kernel {
    pub body: KExpr,
    /// Absolute day of each row.
    pub rows: Vec<i64>,
    /// Observable label of each column.
    pub cols: Vec<String>,
    /// Template variables, indexed by `tenv[i]`.
    pub tenv_names: Vec<String>,
    /// The template environment the row layout was computed under.
    pub tenv_values: Vec<u64>,
    /// `needed[row * cols + col]`: cell read by some lookup.
    pub needed: Vec<bool>,
    /// Parties appearing in payoffs, in first-occurrence order.
    pub parties: Vec<Party>,
}

fn collect_tvars(il: &ILExpr, out: &mut BTreeSet<String>) {
    fn t(x: &ILTExpr, out: &mut BTreeSet<String>) {
        match x {
            ILTExpr::Texpr { t: TExpr::Var { name } } => {
                out.insert(name.clone());
            }
            ILTExpr::Texpr { .. } => {}
            ILTExpr::Tplus { left, right } => {
                t(left, out);
                t(right, out);
            }
        }
    }
    fn tz(x: &ILTExprZ, out: &mut BTreeSet<String>) {
        match x {
            ILTExprZ::TnumZ { .. } => {}
            ILTExprZ::TexprZ { t: inner } => t(inner, out),
            ILTExprZ::TplusZ { left, right } => {
                tz(left, out);
                tz(right, out);
            }
        }
    }
    match il {
        ILExpr::Float { .. } | ILExpr::Nat { .. } | ILExpr::Bool { .. } | ILExpr::Now => {}
        ILExpr::Texpr { t: x } | ILExpr::Payoff { time: x, .. } => t(x, out),
        ILExpr::Model { time, .. } => tz(time, out),
        ILExpr::Unop { arg, .. } => collect_tvars(arg, out),
        ILExpr::Binop { left, right, .. } => {
            collect_tvars(left, out);
            collect_tvars(right, out);
        }
        ILExpr::If { cond, then, els } => {
            collect_tvars(cond, out);
            collect_tvars(then, out);
            collect_tvars(els, out);
        }
        ILExpr::Loopif { cond, then, els, window } => {
            if let TExpr::Var { name } = window {
                out.insert(name.clone());
            }
            collect_tvars(cond, out);
            collect_tvars(then, out);
            collect_tvars(els, out);
        }
    }
}

/// A lookup of `day .. day + reach` (reach = sum of enclosing windows).
struct Block {
    day: i64,
    reach: u64,
    col: Option<usize>,
}

struct Builder<'a> {
    tenv: &'a TEnv,
    names: Vec<String>,
    blocks: Vec<Block>,
    cols: Vec<String>,
    parties: Vec<Party>,
}

impl Builder<'_> {
    fn flatten(&self, t: &ILTExpr, out: &mut KTime) -> Result<()> {
        match t {
            ILTExpr::Texpr { t: TExpr::Num { value } } => out.konst += value,
            ILTExpr::Texpr { t: TExpr::Var { name } } => {
                let i = self.names.binary_search(name).expect("collected");
                out.tenv.push(i);
            }
            ILTExpr::Tplus { left, right } => {
                self.flatten(left, out)?;
                self.flatten(right, out)?;
            }
        }
        Ok(())
    }

    fn ktime(&self, t: &ILTExpr) -> Result<KTime> {
        let mut k = KTime { konst: 0, tenv: Vec::new() };
        self.flatten(t, &mut k)?;
        Ok(k)
    }

    fn col(&mut self, label: &str) -> usize {
        match self.cols.iter().position(|c| c == label) {
            Some(i) => i,
            None => {
                self.cols.push(label.to_owned());
                self.cols.len() - 1
            }
        }
    }

    fn party(&mut self, p: &Party) {
        if !self.parties.contains(p) {
            self.parties.push(p.clone());
        }
    }

    /// First pass: records blocks, left to right. Returns the body with
    /// row fields holding block indices, patched later.
    fn walk(&mut self, il: &ILExpr, reach: u64) -> Result<KExpr> {
        Ok(match il {
            ILExpr::Float { value } => KExpr::Float { value: *value },
            ILExpr::Nat { value } => KExpr::Nat { value: *value },
            ILExpr::Bool { value } => KExpr::Bool { value: *value },
            ILExpr::Now => KExpr::Now,
            ILExpr::Texpr { t } => KExpr::Time { time: self.ktime(t)? },
            ILExpr::Model { label, time } => {
                let day = texpr_z_sem(time, self.tenv)?;
                let col = self.col(label);
                self.blocks.push(Block { day, reach, col: Some(col) });
                KExpr::Ext { row: self.blocks.len() - 1, col }
            }
            ILExpr::Payoff { time, from, to } => {
                let day = texpr_sem(time, self.tenv)? as i64;
                self.party(from);
                self.party(to);
                self.blocks.push(Block { day, reach, col: None });
                KExpr::Payoff { row: self.blocks.len() - 1, from: from.clone(), to: to.clone() }
            }
            ILExpr::Unop { op, arg } => KExpr::Unop { op: *op, arg: Box::new(self.walk(arg, reach)?) },
            ILExpr::Binop { op, left, right } => KExpr::Binop {
                op: *op,
                left: Box::new(self.walk(left, reach)?),
                right: Box::new(self.walk(right, reach)?),
            },
            ILExpr::If { cond, then, els } => KExpr::If {
                cond: Box::new(self.walk(cond, reach)?),
                then: Box::new(self.walk(then, reach)?),
                els: Box::new(self.walk(els, reach)?),
            },
            ILExpr::Loopif { cond, then, els, window } => {
                let w = crate::contract::t_sem(window, self.tenv)?;
                let inner = reach + w;
                let window = self.ktime(&ILTExpr::Texpr { t: window.clone() })?;
                KExpr::Loop {
                    cond: Box::new(self.walk(cond, inner)?),
                    then: Box::new(self.walk(then, inner)?),
                    els: Box::new(self.walk(els, inner)?),
                    window,
                }
            }
        })
    }
}

fn patch(k: &mut KExpr, block_row: &[usize]) {
    match k {
        KExpr::Ext { row, .. } | KExpr::Payoff { row, .. } => *row = block_row[*row],
        KExpr::Unop { arg, .. } => patch(arg, block_row),
        KExpr::Binop { left, right, .. } => {
            patch(left, block_row);
            patch(right, block_row);
        }
        KExpr::If { cond, then, els } | KExpr::Loop { cond, then, els, .. } => {
            patch(cond, block_row);
            patch(then, block_row);
            patch(els, block_row);
        }
        _ => {}
    }
}

/// Reindexes `il` under `tenv` into a kernel.
///
/// Each lookup at day `d` inside loops with total window `w` claims days
/// `d..=d+w`. Overlapping claims merge into intervals; each interval becomes
/// a run of consecutive rows, and runs are ordered by first occurrence.
pub fn reindex(il: &ILExpr, tenv: &TEnv) -> Result<Kernel> {
    let mut vars = BTreeSet::new();
    collect_tvars(il, &mut vars);
    let names: Vec<String> = vars.into_iter().collect();
    let values = names.iter().map(|n| tenv.get(n)).collect::<Result<Vec<_>>>()?;

    let mut b = Builder { tenv, names, blocks: Vec::new(), cols: Vec::new(), parties: Vec::new() };
    let mut body = b.walk(il, 0)?;

    // merge overlapping blocks
    let mut order: Vec<usize> = (0..b.blocks.len()).collect();
    order.sort_by_key(|&i| (b.blocks[i].day, i));
    struct Interval {
        start: i64,
        end: i64,
        first: usize,
    }
    let mut intervals: Vec<Interval> = Vec::new();
    let mut block_interval = vec![0usize; b.blocks.len()];
    for i in order {
        let blk = &b.blocks[i];
        let end = blk.day + blk.reach as i64;
        match intervals.last_mut() {
            Some(iv) if blk.day <= iv.end => {
                iv.end = iv.end.max(end);
                iv.first = iv.first.min(i);
            }
            _ => intervals.push(Interval { start: blk.day, end, first: i }),
        }
        block_interval[i] = intervals.len() - 1;
    }
    let mut by_first: Vec<usize> = (0..intervals.len()).collect();
    by_first.sort_by_key(|&j| intervals[j].first);
    let mut base = vec![0usize; intervals.len()];
    let mut rows = Vec::new();
    for &j in &by_first {
        base[j] = rows.len();
        rows.extend(intervals[j].start..=intervals[j].end);
    }
    let block_row: Vec<usize> = (0..b.blocks.len())
        .map(|i| {
            let j = block_interval[i];
            base[j] + (b.blocks[i].day - intervals[j].start) as usize
        })
        .collect();
    patch(&mut body, &block_row);

    let ncols = b.cols.len();
    let mut needed = vec![false; rows.len() * ncols];
    for (i, blk) in b.blocks.iter().enumerate() {
        if let Some(col) = blk.col {
            for r in block_row[i]..=block_row[i] + blk.reach as usize {
                needed[r * ncols + col] = true;
            }
        }
    }

    Ok(Kernel {
        body,
        rows,
        cols: b.cols,
        tenv_names: b.names,
        tenv_values: values,
        needed,
        parties: b.parties,
    })
}

/// Dense inputs for a kernel.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelInput {
    /// Row-major `rows × cols`.
    pub ext: Vec<f64>,
    pub cols: usize,
    pub tenv: Vec<u64>,
    /// Discount factor per row.
    pub disc: Vec<f64>,
    pub t_now: u64,
}

impl KernelInput {
    /// Samples `env` and `disc` at the kernel's rows; cells no lookup reads
    /// are NaN.
    pub fn from_env(k: &Kernel, env: &ExtEnv, disc: &Discount, t_now: u64) -> Result<Self> {
        let cols = k.cols.len();
        let mut ext = vec![f64::NAN; k.rows.len() * cols];
        for (r, &day) in k.rows.iter().enumerate() {
            for (c, label) in k.cols.iter().enumerate() {
                if k.needed[r * cols + c] {
                    ext[r * cols + c] = env.lookup_real(label, day)?;
                }
            }
        }
        Ok(KernelInput { ext, cols, tenv: k.tenv_values.clone(), disc: k.disc_factors(disc)?, t_now })
    }
}

impl Kernel {
    /// Discount factor for every row; rows before day 0 get NaN.
    pub fn disc_factors(&self, disc: &Discount) -> Result<Vec<f64>> {
        self.rows
            .iter()
            .map(|&day| if day < 0 { Ok(f64::NAN) } else { disc.factor(day) })
            .collect()
    }

    /// Distinct days that some lookup reads, ascending.
    pub fn observation_days(&self) -> Vec<i64> {
        let cols = self.cols.len();
        let mut days: Vec<i64> = self
            .rows
            .iter()
            .enumerate()
            .filter(|(r, _)| (0..cols).any(|c| self.needed[r * cols + c]))
            .map(|(_, &d)| d)
            .collect();
        days.sort_unstable();
        days.dedup();
        days
    }

    fn check_shape(&self, input: &KernelInput) -> Result<()> {
        if input.cols != self.cols.len()
            || input.ext.len() != self.rows.len() * self.cols.len()
            || input.disc.len() != self.rows.len()
            || input.tenv.len() != self.tenv_names.len()
        {
            return Err(Error::ShapeMismatch(format!(
                "kernel has {} rows, {} cols, {} template variables",
                self.rows.len(),
                self.cols.len(),
                self.tenv_names.len()
            )));
        }
        Ok(())
    }
}

fn sign(from: &Party, to: &Party, p1: &Party, p2: &Party) -> f64 {
    if from == p1 && to == p2 {
        1.0
    } else if from == p2 && to == p1 {
        -1.0
    } else {
        0.0
    }
}

struct Ctx<'a> {
    input: &'a KernelInput,
    p1: &'a Party,
    p2: &'a Party,
}

fn row_index(row: usize, counter: u64, limit: usize) -> Result<usize> {
    let r = row + counter as usize;
    if r >= limit {
        return Err(Error::IndexOutOfRange(format!("row {r} of {limit}")));
    }
    Ok(r)
}

fn eval(k: &KExpr, cx: &Ctx<'_>, counter: u64) -> Result<ILVal> {
    let input = cx.input;
    Ok(match k {
        KExpr::Float { value } => ILVal::Real(*value),
        KExpr::Nat { value } => ILVal::Nat(*value),
        KExpr::Bool { value } => ILVal::Bool(*value),
        KExpr::Now => ILVal::Nat(input.t_now),
        KExpr::Time { time } => ILVal::Nat(time.value(&input.tenv)? + counter),
        KExpr::Ext { row, col } => {
            let r = row_index(*row, counter, input.disc.len())?;
            if *col >= input.cols {
                return Err(Error::IndexOutOfRange(format!("column {col}")));
            }
            ILVal::Real(input.ext[r * input.cols + col])
        }
        KExpr::Payoff { row, from, to } => {
            let s = sign(from, to, cx.p1, cx.p2);
            if s == 0.0 {
                return Ok(ILVal::Real(0.0));
            }
            let r = row_index(*row, counter, input.disc.len())?;
            ILVal::Real(s * input.disc[r])
        }
        KExpr::Unop { op, arg } => apply_unop(*op, eval(arg, cx, counter)?)?,
        KExpr::Binop { op, left, right } => {
            apply_binop(*op, eval(left, cx, counter)?, eval(right, cx, counter)?)?
        }
        KExpr::If { cond, then, els } => match eval(cond, cx, counter)? {
            ILVal::Bool(true) => eval(then, cx, counter)?,
            ILVal::Bool(false) => eval(els, cx, counter)?,
            v => return Err(Error::ValueType(format!("if expects a boolean, got {v:?}"))),
        },
        KExpr::Loop { cond, then, els, window } => {
            let mut left = window.value(&input.tenv)?;
            let mut c = counter;
            loop {
                match eval(cond, cx, c)? {
                    ILVal::Bool(true) => break eval(then, cx, c)?,
                    ILVal::Bool(false) if left == 0 => break eval(els, cx, c)?,
                    ILVal::Bool(false) => {
                        left -= 1;
                        c += 1;
                    }
                    v => return Err(Error::ValueType(format!("loopif expects a boolean, got {v:?}"))),
                }
            }
        }
    })
}

/// Runs the kernel from counter 0.
pub fn eval_kernel(k: &Kernel, input: &KernelInput, p1: &Party, p2: &Party) -> Result<f64> {
    k.check_shape(input)?;
    match eval(&k.body, &Ctx { input, p1, p2 }, 0)? {
        ILVal::Real(r) => Ok(r),
        _ => Err(Error::NonRealResult),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contract::Value;
    use crate::payoff::{eval_at, ILTExpr};

    fn xy() -> (Party, Party) {
        (Party::new("X"), Party::new("Y"))
    }

    #[test]
    fn payoff_days_in_order() {
        let il = ILExpr::binop(
            BinOp::Add,
            ILExpr::payoff(ILTExpr::num(100), "X", "Y"),
            ILExpr::payoff(ILTExpr::num(200), "X", "Y"),
        );
        let k = reindex(&il, &TEnv::new()).unwrap();
        assert_eq!(k.rows, vec![100, 200]);
        match &k.body {
            KExpr::Binop { left, right, .. } => {
                assert!(matches!(**left, KExpr::Payoff { row: 0, .. }));
                assert!(matches!(**right, KExpr::Payoff { row: 1, .. }));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn first_occurrence_beats_day_order() {
        let il = ILExpr::binop(
            BinOp::Add,
            ILExpr::payoff(ILTExpr::num(200), "X", "Y"),
            ILExpr::payoff(ILTExpr::num(100), "X", "Y"),
        );
        assert_eq!(reindex(&il, &TEnv::new()).unwrap().rows, vec![200, 100]);
    }

    #[test]
    fn single_model() {
        let il = ILExpr::model("AAPL", ILTExprZ::num(0));
        let k = reindex(&il, &TEnv::new()).unwrap();
        assert_eq!(k.rows, vec![0]);
        assert_eq!(k.cols, vec!["AAPL".to_string()]);
        assert_eq!(k.body, KExpr::Ext { row: 0, col: 0 });
    }

    #[test]
    fn loop_rows_are_contiguous() {
        // loopif(model(A, 5) < 1.0, payoff(5), 0.0, 3) + model(A, 7)
        let il = ILExpr::binop(
            BinOp::Add,
            ILExpr::loopif(
                ILExpr::binop(BinOp::Lt, ILExpr::model("A", ILTExprZ::num(5)), ILExpr::float(1.0)),
                ILExpr::payoff(ILTExpr::num(5), "X", "Y"),
                ILExpr::float(0.0),
                TExpr::num(3),
            ),
            ILExpr::model("A", ILTExprZ::num(7)),
        );
        let k = reindex(&il, &TEnv::new()).unwrap();
        assert_eq!(k.rows, vec![5, 6, 7, 8]);
        let env = ExtEnv::from_points((5..9).map(|d| ("A", d, Value::Real(2.0 - d as f64 / 8.0))));
        let disc = Discount::rate(0.1);
        let (p1, p2) = xy();
        let input = KernelInput::from_env(&k, &env, &disc, 0).unwrap();
        let want = eval_at(0, &il, &env, &TEnv::new(), &disc, &p1, &p2).unwrap();
        assert_eq!(eval_kernel(&k, &input, &p1, &p2).unwrap(), want);
    }

    #[test]
    fn unbound_template_variable() {
        let il = ILExpr::payoff(ILTExpr::var("T"), "X", "Y");
        assert_eq!(reindex(&il, &TEnv::new()), Err(Error::UnboundTemplateVar("T".into())));
    }

    #[test]
    fn shape_checked() {
        let k = reindex(&ILExpr::float(1.0), &TEnv::new()).unwrap();
        let (p1, p2) = xy();
        let bad = KernelInput { ext: vec![1.0], cols: 1, tenv: vec![], disc: vec![], t_now: 0 };
        assert!(matches!(eval_kernel(&k, &bad, &p1, &p2), Err(Error::ShapeMismatch(_))));
        let ok = KernelInput { ext: vec![], cols: 0, tenv: vec![], disc: vec![], t_now: 0 };
        assert_eq!(eval_kernel(&k, &ok, &p1, &p2).unwrap(), 1.0);
    }
}
