use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Discount function `d : day -> factor`, optionally shifted (`d/n`).
#[derive(Debug, Clone, PartialEq)]
pub enum Discount {
    /// `d(t) = exp(-rate * t / 365)`.
    Rate { rate: f64, shift: i64 },
    /// Explicit per-day factors, `factors[t]` for day `t`.
    Table { factors: Arc<Vec<f64>>, shift: i64 },
}

/// File form of a discount function.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DiscountSpec {
    Rate { rate: f64 },
    Table { factors: Vec<f64> },
}

impl Discount {
    /// `d ≡ 1`.
    pub fn flat() -> Self {
        Discount::Rate { rate: 0.0, shift: 0 }
    }

    pub fn rate(rate: f64) -> Self {
        Discount::Rate { rate, shift: 0 }
    }

    pub fn table(factors: Vec<f64>) -> Self {
        Discount::Table { factors: Arc::new(factors), shift: 0 }
    }

    pub fn from_spec(spec: DiscountSpec) -> Self {
        match spec {
            DiscountSpec::Rate { rate } => Discount::rate(rate),
            DiscountSpec::Table { factors } => Discount::table(factors),
        }
    }

    /// `d/n = λt. d(t + n)`.
    pub fn shifted(&self, n: i64) -> Self {
        match self {
            Discount::Rate { rate, shift } => Discount::Rate { rate: *rate, shift: shift + n },
            Discount::Table { factors, shift } => Discount::Table {
                factors: Arc::clone(factors),
                shift: shift + n,
            },
        }
    }

    pub fn factor(&self, day: i64) -> Result<f64> {
        match self {
            Discount::Rate { rate, shift } => {
                let t = day + shift;
                if *rate == 0.0 {
                    Ok(1.0)
                } else {
                    Ok((-rate * t as f64 / 365.0).exp())
                }
            }
            Discount::Table { factors, shift } => {
                let t = day + shift;
                usize::try_from(t)
                    .ok()
                    .and_then(|i| factors.get(i))
                    .copied()
                    .ok_or(Error::MissingDiscount(t))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flat_is_one() {
        assert_eq!(Discount::flat().factor(123).unwrap(), 1.0);
    }

    #[test]
    fn rate_starts_at_one() {
        assert_eq!(Discount::rate(0.05).factor(0).unwrap(), 1.0);
        let d = Discount::rate(0.05);
        assert_eq!(d.shifted(10).factor(5).unwrap(), d.factor(15).unwrap());
    }

    #[test]
    fn table_bounds() {
        let d = Discount::table(vec![1.0, 0.9, 0.8]);
        assert_eq!(d.factor(2).unwrap(), 0.8);
        assert_eq!(d.shifted(1).factor(1).unwrap(), 0.8);
        assert_eq!(d.factor(3), Err(Error::MissingDiscount(3)));
        assert_eq!(d.factor(-1), Err(Error::MissingDiscount(-1)));
    }
}
