//! Transfer maps and traces.

use std::collections::BTreeMap;

use serde::Serialize;

use super::ast::{Asset, Party};

/// Transfers due on a single day.
///
/// Stored in canonical orientation (`from < to`) so that antisymmetry,
/// `amount(p, q, a) = -amount(q, p, a)`, holds by construction, and
/// self-transfers vanish.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Trans {
    flows: BTreeMap<(Party, Party, Asset), f64>,
}

/// A single directed flow, used for reporting.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Flow {
    pub from: Party,
    pub to: Party,
    pub asset: Asset,
    pub amount: f64,
}

impl Trans {
    pub fn zero() -> Self {
        Self::default()
    }

    /// A transfer of one unit of `asset` from `from` to `to`.
    pub fn unit(from: &Party, to: &Party, asset: &Asset) -> Self {
        let mut t = Trans::zero();
        t.add_flow(from, to, asset, 1.0);
        t
    }

    pub fn add_flow(&mut self, from: &Party, to: &Party, asset: &Asset, amount: f64) {
        if from == to {
            return;
        }
        let (key, signed) = if from < to {
            ((from.clone(), to.clone(), asset.clone()), amount)
        } else {
            ((to.clone(), from.clone(), asset.clone()), -amount)
        };
        let slot = self.flows.entry(key.clone()).or_insert(0.0);
        *slot += signed;
        if *slot == 0.0 {
            self.flows.remove(&key);
        }
    }

    pub fn amount(&self, from: &Party, to: &Party, asset: &Asset) -> f64 {
        if from == to {
            return 0.0;
        }
        if from < to {
            self.flows
                .get(&(from.clone(), to.clone(), asset.clone()))
                .copied()
                .unwrap_or(0.0)
        } else {
            -self
                .flows
                .get(&(to.clone(), from.clone(), asset.clone()))
                .copied()
                .unwrap_or(0.0)
        }
    }

    /// Net amount from `from` to `to`, summed over all assets at face value.
    pub fn amount_all_assets(&self, from: &Party, to: &Party) -> f64 {
        if from == to {
            return 0.0;
        }
        let (lo, hi, sign) = if from < to { (from, to, 1.0) } else { (to, from, -1.0) };
        self.flows
            .iter()
            .filter(|((p, q, _), _)| p == lo && q == hi)
            .map(|(_, v)| sign * v)
            .sum()
    }

    pub fn scaled(&self, factor: f64) -> Trans {
        let flows = self
            .flows
            .iter()
            .map(|(k, v)| (k.clone(), v * factor))
            .filter(|(_, v)| *v != 0.0)
            .collect();
        Trans { flows }
    }

    pub fn plus(&self, other: &Trans) -> Trans {
        let mut out = self.clone();
        for ((p, q, a), v) in &other.flows {
            out.add_flow(p, q, a, *v);
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.flows.is_empty()
    }

    /// Flows oriented so every amount is positive.
    pub fn flows(&self) -> impl Iterator<Item = Flow> + '_ {
        self.flows.iter().map(|((p, q, a), &v)| {
            let (from, to) = if v < 0.0 { (q, p) } else { (p, q) };
            Flow { from: from.clone(), to: to.clone(), asset: a.clone(), amount: v.abs() }
        })
    }
}

/// Day-indexed transfers; every day past the stored prefix is the zero `Trans`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Trace {
    days: Vec<Trans>,
}

impl Trace {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn from_days(days: Vec<Trans>) -> Self {
        Trace { days }
    }

    pub fn singleton(t: Trans) -> Self {
        Trace { days: vec![t] }
    }

    pub fn len(&self) -> usize {
        self.days.len()
    }

    pub fn is_empty(&self) -> bool {
        self.days.is_empty()
    }

    pub fn at(&self, day: usize) -> Trans {
        self.days.get(day).cloned().unwrap_or_default()
    }

    pub fn get(&self, day: usize) -> Option<&Trans> {
        self.days.get(day)
    }

    pub fn days(&self) -> &[Trans] {
        &self.days
    }

    /// Shifts every transfer `n` days later.
    pub fn delay(&self, n: usize) -> Trace {
        if self.days.is_empty() {
            return Trace::zero();
        }
        let mut days = vec![Trans::zero(); n];
        days.extend(self.days.iter().cloned());
        Trace { days }
    }

    pub fn scaled(&self, factor: f64) -> Trace {
        Trace {
            days: self.days.iter().map(|t| t.scaled(factor)).collect(),
        }
    }

    pub fn plus(&self, other: &Trace) -> Trace {
        let n = self.days.len().max(other.days.len());
        let days = (0..n)
            .map(|i| match (self.days.get(i), other.days.get(i)) {
                (Some(a), Some(b)) => a.plus(b),
                (Some(a), None) => a.clone(),
                (None, Some(b)) => b.clone(),
                (None, None) => Trans::zero(),
            })
            .collect();
        Trace { days }
    }

    /// Extends with zero days up to `len`; never truncates.
    pub fn padded(mut self, len: usize) -> Trace {
        if self.days.len() < len {
            self.days.resize(len, Trans::zero());
        }
        self
    }

    /// Index of the last non-zero day plus one.
    pub fn support(&self) -> usize {
        self.days
            .iter()
            .rposition(|t| !t.is_zero())
            .map_or(0, |i| i + 1)
    }
}
