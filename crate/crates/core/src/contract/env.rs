//! Values, template environments and external (observable) environments.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Result of evaluating a contract expression.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Value {
    Real(f64),
    Bool(bool),
}

impl Value {
    pub fn as_real(self) -> Option<f64> {
        match self {
            Value::Real(r) => Some(r),
            Value::Bool(_) => None,
        }
    }

    pub fn as_bool(self) -> Option<bool> {
        match self {
            Value::Bool(b) => Some(b),
            Value::Real(_) => None,
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Real(r) => write!(f, "{r:?}"),
            Value::Bool(b) => write!(f, "{b}"),
        }
    }
}

/// Template environment: template variable name to day count.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TEnv(BTreeMap<String, u64>);

impl TEnv {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, var: impl Into<String>, value: u64) -> Self {
        self.0.insert(var.into(), value);
        self
    }

    pub fn insert(&mut self, var: impl Into<String>, value: u64) {
        self.0.insert(var.into(), value);
    }

    /// Unmapped variables are an error, never a default.
    pub fn get(&self, var: &str) -> Result<u64> {
        self.0
            .get(var)
            .copied()
            .ok_or_else(|| Error::UnboundTemplateVar(var.to_string()))
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, u64)> {
        self.0.iter().map(|(k, v)| (k.as_str(), *v))
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl FromIterator<(String, u64)> for TEnv {
    fn from_iter<I: IntoIterator<Item = (String, u64)>>(iter: I) -> Self {
        TEnv(iter.into_iter().collect())
    }
}

/// One label's data in the environment file format: `values[k]` is the
/// observation at day `base + k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Series {
    #[serde(default)]
    pub base: i64,
    pub values: Vec<Value>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
struct EnvFile {
    labels: BTreeMap<String, Series>,
}

/// Deterministic total environment: every `(label, day)` has a value
/// derived by hashing it with a seed.
#[derive(Debug, Clone, PartialEq)]
pub struct Generator {
    pub seed: u64,
    pub bool_labels: BTreeSet<String>,
    pub low: f64,
    pub high: f64,
}

impl Generator {
    pub fn new(seed: u64) -> Self {
        Generator {
            seed,
            bool_labels: BTreeSet::new(),
            low: 0.5,
            high: 2.0,
        }
    }

    pub fn with_range(mut self, low: f64, high: f64) -> Self {
        self.low = low;
        self.high = high;
        self
    }

    pub fn with_bool_label(mut self, label: impl Into<String>) -> Self {
        self.bool_labels.insert(label.into());
        self
    }

    fn value(&self, label: &str, day: i64) -> Value {
        let mut h = self.seed ^ 0x243f_6a88_85a3_08d3;
        for b in label.bytes() {
            h = splitmix64(h ^ u64::from(b));
        }
        h = splitmix64(h ^ day as u64);
        if self.bool_labels.contains(label) {
            Value::Bool(h & 1 == 1)
        } else {
            let u = (h >> 11) as f64 / (1u64 << 53) as f64;
            Value::Real(self.low + (self.high - self.low) * u)
        }
    }
}

pub(crate) fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[derive(Debug)]
enum Source {
    Table(BTreeMap<String, BTreeMap<i64, Value>>),
    Generated(Generator),
}

/// External environment mapping `(label, day)` to an observed value.
///
/// Cloning is cheap; `shifted(n)` returns the view `ρ/n` with
/// `(ρ/n)(l, i) = ρ(l, i + n)`.
#[derive(Debug, Clone)]
pub struct ExtEnv {
    source: Arc<Source>,
    shift: i64,
}

impl Default for ExtEnv {
    fn default() -> Self {
        Self::empty()
    }
}

impl ExtEnv {
    pub fn empty() -> Self {
        ExtEnv {
            source: Arc::new(Source::Table(BTreeMap::new())),
            shift: 0,
        }
    }

    /// Total generator-backed environment.
    pub fn generated(gen: Generator) -> Self {
        ExtEnv {
            source: Arc::new(Source::Generated(gen)),
            shift: 0,
        }
    }

    /// Partial table-backed environment built from individual points.
    pub fn from_points<I, S>(points: I) -> Self
    where
        I: IntoIterator<Item = (S, i64, Value)>,
        S: Into<String>,
    {
        let mut table: BTreeMap<String, BTreeMap<i64, Value>> = BTreeMap::new();
        for (label, day, v) in points {
            table.entry(label.into()).or_default().insert(day, v);
        }
        ExtEnv {
            source: Arc::new(Source::Table(table)),
            shift: 0,
        }
    }

    pub fn from_series(series: BTreeMap<String, Series>) -> Self {
        let table = series
            .into_iter()
            .map(|(label, s)| {
                let days = s
                    .values
                    .into_iter()
                    .enumerate()
                    .map(|(k, v)| (s.base + k as i64, v))
                    .collect();
                (label, days)
            })
            .collect();
        ExtEnv {
            source: Arc::new(Source::Table(table)),
            shift: 0,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: EnvFile = serde_json::from_str(text)?;
        Ok(Self::from_series(file.labels))
    }

    /// Serializes a table-backed environment, viewed through the current
    /// shift. Fails for generated environments and for gaps in a series.
    pub fn to_json(&self) -> Result<String> {
        let Source::Table(table) = &*self.source else {
            return Err(Error::Domain("generated environments have no file form".into()));
        };
        let mut labels = BTreeMap::new();
        for (label, days) in table {
            let Some((&first, _)) = days.iter().next() else {
                continue;
            };
            let mut values = Vec::with_capacity(days.len());
            for (k, (&day, &v)) in days.iter().enumerate() {
                if day != first + k as i64 {
                    return Err(Error::Domain(format!("series {label} has a gap at day {day}")));
                }
                values.push(v);
            }
            labels.insert(label.clone(), Series { base: first - self.shift, values });
        }
        Ok(serde_json::to_string(&EnvFile { labels })?)
    }

    pub fn is_total(&self) -> bool {
        matches!(&*self.source, Source::Generated(_))
    }

    pub fn shift(&self) -> i64 {
        self.shift
    }

    /// `ρ/n`.
    pub fn shifted(&self, n: i64) -> Self {
        ExtEnv {
            source: Arc::clone(&self.source),
            shift: self.shift + n,
        }
    }

    pub fn lookup(&self, label: &str, day: i64) -> Result<Value> {
        let abs = day + self.shift;
        match &*self.source {
            Source::Generated(g) => Ok(g.value(label, abs)),
            Source::Table(t) => t
                .get(label)
                .and_then(|days| days.get(&abs))
                .copied()
                .ok_or_else(|| Error::MissingObservable { label: label.to_string(), day }),
        }
    }

    pub fn lookup_real(&self, label: &str, day: i64) -> Result<f64> {
        self.lookup(label, day)?
            .as_real()
            .ok_or_else(|| Error::NonRealObservable { label: label.to_string(), day })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shifting_is_additive() {
        let env = ExtEnv::generated(Generator::new(7));
        let a = env.shifted(3).shifted(4);
        let b = env.shifted(7);
        for day in -5..5 {
            assert_eq!(a.lookup("A", day).unwrap(), b.lookup("A", day).unwrap());
            assert_eq!(a.lookup("A", day).unwrap(), env.lookup("A", day + 7).unwrap());
        }
    }

    #[test]
    fn partial_env_reports_misses() {
        let env = ExtEnv::from_points([("AAPL", 90, Value::Real(110.0))]);
        assert_eq!(env.lookup("AAPL", 90).unwrap(), Value::Real(110.0));
        assert_eq!(env.shifted(90).lookup("AAPL", 0).unwrap(), Value::Real(110.0));
        assert_eq!(
            env.lookup("AAPL", 89),
            Err(Error::MissingObservable { label: "AAPL".into(), day: 89 })
        );
    }

    #[test]
    fn file_format_roundtrip() {
        let text = r#"{"labels":{"AAPL":{"base":-2,"values":[99.5,100.0,101.25]},"FLAG":{"base":0,"values":[true]}}}"#;
        let env = ExtEnv::from_json(text).unwrap();
        assert_eq!(env.lookup("AAPL", -2).unwrap(), Value::Real(99.5));
        assert_eq!(env.lookup("AAPL", 0).unwrap(), Value::Real(101.25));
        assert_eq!(env.lookup("FLAG", 0).unwrap(), Value::Bool(true));
        assert_eq!(env.to_json().unwrap(), text);
    }

    #[test]
    fn generated_env_is_pure_and_in_range() {
        let g = Generator::new(11).with_bool_label("B");
        let env = ExtEnv::generated(g);
        for day in -10..10 {
            let v = env.lookup_real("A", day).unwrap();
            assert!((0.5..2.0).contains(&v));
            assert_eq!(env.lookup("A", day).unwrap(), Value::Real(v));
            assert!(env.lookup("B", day).unwrap().as_bool().is_some());
        }
    }

    #[test]
    fn missing_template_var_is_an_error() {
        let d = TEnv::new().with("T", 90);
        assert_eq!(d.get("T").unwrap(), 90);
        assert_eq!(d.get("S"), Err(Error::UnboundTemplateVar("S".into())));
    }
}
