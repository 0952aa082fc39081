//! Augmented Dickey-Fuller unit-root test with a constant term.
//!
//! Regression: `dy_t = c + g*y_{t-1} + sum_{i=1..k} d_i*dy_{t-i} + e_t`.
//! The statistic is the t-value of `g`. When no lag is given, `k` is picked
//! by minimum OLS AIC over `0..=max_lag` on a common sample, then the
//! regression is re-run on the longest sample available for that `k`.

use serde::{Deserialize, Serialize};

use crate::diagnostics::mackinnon;
use crate::error::{Error, Result};
use crate::linalg::{ols, Ols};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticalValues {
    #[serde(rename = "1%")]
    pub one: f64,
    #[serde(rename = "5%")]
    pub five: f64,
    #[serde(rename = "10%")]
    pub ten: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdfResult {
    pub statistic: f64,
    pub p_value: f64,
    pub used_lags: usize,
    pub nobs: usize,
    pub critical_values: CriticalValues,
}

/// Schwert's rule `floor(12 * (n/100)^(1/4))`, capped so the regression keeps
/// at least half the sample.
pub fn default_max_lag(n: usize) -> usize {
    let schwert = (12.0 * (n as f64 / 100.0).powf(0.25)).floor() as usize;
    schwert.min((n / 2).saturating_sub(2))
}

fn regression(y: &[f64], max_lag: usize, lags: usize, nobs: usize) -> Result<Ols> {
    let n = y.len();
    let dy: Vec<f64> = y.windows(2).map(|w| w[1] - w[0]).collect();
    debug_assert!(nobs <= n - 1 - max_lag.max(lags));
    let first = dy.len() - nobs;
    let mut x = Vec::with_capacity(nobs);
    let mut target = Vec::with_capacity(nobs);
    for t in first..dy.len() {
        let mut row = Vec::with_capacity(lags + 2);
        row.push(1.0);
        row.push(y[t]);
        row.extend((1..=lags).map(|i| dy[t - i]));
        x.push(row);
        target.push(dy[t]);
    }
    ols(&target, &x)
}

/// Runs the test. `max_lag = None` selects the lag by AIC up to
/// [`default_max_lag`]; `Some(k)` uses exactly `k` lagged differences.
pub fn adf_test(y: &[f64], max_lag: Option<usize>) -> Result<AdfResult> {
    let n = y.len();
    let first = *y.first().ok_or(Error::Empty("adf input"))?;
    if y.iter().all(|&v| v == first) {
        return Err(Error::ConstantSeries);
    }
    let cap = max_lag.unwrap_or_else(|| default_max_lag(n));
    if n <= cap + 10 {
        return Err(Error::TooShort {
            needed: cap + 11,
            have: n,
        });
    }

    let used_lags = match max_lag {
        Some(k) => k,
        None => {
            let common = n - 1 - cap;
            let mut best: Option<(f64, usize)> = None;
            for k in 0..=cap {
                let aic = regression(y, cap, k, common)?.aic();
                if best.map_or(true, |(b, _)| aic < b) {
                    best = Some((aic, k));
                }
            }
            best.map(|(_, k)| k).unwrap_or(0)
        }
    };

    let nobs = n - 1 - used_lags;
    let fit = regression(y, used_lags, used_lags, nobs)?;
    let statistic = fit.t_value(1);
    if !statistic.is_finite() {
        return Err(Error::ConstantSeries);
    }
    let [one, five, ten] = mackinnon::critical_values(nobs);
    Ok(AdfResult {
        statistic,
        p_value: mackinnon::p_value(statistic),
        used_lags,
        nobs,
        critical_values: CriticalValues { one, five, ten },
    })
}
