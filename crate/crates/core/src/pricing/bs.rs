use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};

/// Black–Scholes price of a European call; `t` in years.
pub fn black_scholes_call(s0: f64, k: f64, r: f64, sigma: f64, t: f64) -> Result<f64> {
    if s0.is_nan() || k.is_nan() || s0 <= 0.0 || k <= 0.0 {
        return Err(Error::Domain("spot and strike must be positive".into()));
    }
    if sigma.is_nan() || t.is_nan() || sigma < 0.0 || t < 0.0 {
        return Err(Error::Domain("volatility and maturity must be non-negative".into()));
    }
    let df = (-r * t).exp();
    if sigma == 0.0 || t == 0.0 {
        return Ok((s0 - k * df).max(0.0));
    }
    let sd = sigma * t.sqrt();
    let d1 = ((s0 / k).ln() + (r + 0.5 * sigma * sigma) * t) / sd;
    let d2 = d1 - sd;
    let n = Normal::standard();
    Ok(s0 * n.cdf(d1) - k * df * n.cdf(d2))
}
