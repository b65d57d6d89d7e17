use indexmap::IndexMap;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelSpec {
    pub spot: f64,
    /// Annualized volatility.
    pub vol: f64,
    /// Annualized drift.
    pub rate: f64,
}

fn default_day_count() -> f64 {
    365.0
}

/// Correlated geometric Brownian motions, one per label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ModelSpec {
    pub labels: IndexMap<String, LabelSpec>,
    /// Correlation matrix in label order; identity when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub corr: Option<Vec<Vec<f64>>>,
    #[serde(default = "default_day_count")]
    pub day_count: f64,
}

impl ModelSpec {
    pub fn single(label: &str, spot: f64, vol: f64, rate: f64) -> Self {
        let mut labels = IndexMap::new();
        labels.insert(label.to_owned(), LabelSpec { spot, vol, rate });
        ModelSpec { labels, corr: None, day_count: 365.0 }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    #[allow(clippy::needless_range_loop)]
    fn correlation(&self) -> Result<Vec<Vec<f64>>> {
        let n = self.labels.len();
        match &self.corr {
            None => Ok((0..n).map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect()),
            Some(m) => {
                if m.len() != n || m.iter().any(|r| r.len() != n) {
                    return Err(Error::InvalidModel(format!("correlation matrix must be {n}x{n}")));
                }
                for i in 0..n {
                    if m[i][i] != 1.0 {
                        return Err(Error::InvalidModel("correlation diagonal must be 1".into()));
                    }
                    for j in 0..i {
                        if m[i][j] != m[j][i] {
                            return Err(Error::InvalidModel("correlation matrix must be symmetric".into()));
                        }
                        if !(-1.0..=1.0).contains(&m[i][j]) {
                            return Err(Error::InvalidModel("correlations must lie in [-1, 1]".into()));
                        }
                    }
                }
                Ok(m.clone())
            }
        }
    }
}

/// Lower-triangular `L` with `L Lᵀ = m`, allowing semidefinite input.
#[allow(clippy::needless_range_loop)]
pub fn cholesky(m: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    const EPS: f64 = 1e-12;
    let n = m.len();
    let mut l = vec![vec![0.0; n]; n];
    for j in 0..n {
        let mut d = m[j][j];
        for k in 0..j {
            d -= l[j][k] * l[j][k];
        }
        if d < -EPS {
            return Err(Error::CholeskyFailure);
        }
        let djj = if d <= EPS { 0.0 } else { d.sqrt() };
        l[j][j] = djj;
        for i in j + 1..n {
            let mut s = m[i][j];
            for k in 0..j {
                s -= l[i][k] * l[j][k];
            }
            if djj == 0.0 {
                if s.abs() > 1e-9 {
                    return Err(Error::CholeskyFailure);
                }
                l[i][j] = 0.0;
            } else {
                l[i][j] = s / djj;
            }
        }
    }
    Ok(l)
}

/// Validated model with its Cholesky factor.
#[derive(Debug, Clone)]
pub struct Simulator {
    spec: ModelSpec,
    chol: Vec<Vec<f64>>,
    normal: Normal,
}

impl Simulator {
    pub fn new(spec: ModelSpec) -> Result<Self> {
        if spec.day_count.is_nan() || spec.day_count <= 0.0 {
            return Err(Error::InvalidModel("dayCount must be positive".into()));
        }
        for (name, l) in &spec.labels {
            if !l.spot.is_finite() || l.spot <= 0.0 || !l.vol.is_finite() || l.vol < 0.0 || !l.rate.is_finite() {
                return Err(Error::InvalidModel(format!(
                    "label {name}: spot must be positive and vol non-negative"
                )));
            }
        }
        let chol = cholesky(&spec.correlation()?)?;
        Ok(Simulator { spec, chol, normal: Normal::standard() })
    }

    pub fn spec(&self) -> &ModelSpec {
        &self.spec
    }

    pub fn label_index(&self, label: &str) -> Option<usize> {
        self.spec.labels.get_index_of(label)
    }

    /// Values of every label at `days` (ascending, non-negative) for path
    /// `path_index`; `out[k][j]` is label `j` at `days[k]`.
    pub fn simulate_path(&self, days: &[i64], path_index: u64, seed: u64) -> Result<Vec<Vec<f64>>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(path_index);
        let n = self.spec.labels.len();
        let dc = self.spec.day_count;
        let mut w = vec![0.0; n];
        let mut indep = vec![0.0; n];
        let mut prev = 0i64;
        let mut out = Vec::with_capacity(days.len());
        for &day in days {
            if day < 0 {
                return Err(Error::NegativeTime(day));
            }
            if day < prev {
                return Err(Error::Domain("simulation days must be ascending".into()));
            }
            if day > prev {
                let sdt = ((day - prev) as f64 / dc).sqrt();
                for z in indep.iter_mut() {
                    let u = ((rng.next_u64() >> 11) as f64 + 0.5) / (1u64 << 53) as f64;
                    *z = self.normal.inverse_cdf(u);
                }
                for (i, wi) in w.iter_mut().enumerate() {
                    let zi: f64 = (0..=i).map(|k| self.chol[i][k] * indep[k]).sum();
                    *wi += sdt * zi;
                }
            }
            prev = day;
            let t = day as f64;
            let row = self
                .spec
                .labels
                .values()
                .zip(&w)
                .map(|(l, wi)| l.spot * ((l.rate - 0.5 * l.vol * l.vol) * t / dc + l.vol * wi).exp())
                .collect();
            out.push(row);
        }
        Ok(out)
    }
}
