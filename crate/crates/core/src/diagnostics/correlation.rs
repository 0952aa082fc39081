//! Sample autocorrelation and partial autocorrelation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Correlations at lags `0..=n_lags`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationSequence {
    pub values: Vec<f64>,
    /// Sample size the sequence was estimated from.
    pub nobs: usize,
}

impl CorrelationSequence {
    pub fn lag(&self, k: usize) -> f64 {
        self.values[k]
    }

    pub fn n_lags(&self) -> usize {
        self.values.len() - 1
    }

    /// Half-width of the approximate 95% white-noise band, `2/sqrt(n)`.
    pub fn band(&self) -> f64 {
        2.0 / (self.nobs as f64).sqrt()
    }
}

/// Biased (divisor `n`) sample autocovariances at lags `0..=n_lags`.
pub fn autocovariance(y: &[f64], n_lags: usize) -> Vec<f64> {
    let n = y.len();
    let mean = y.iter().sum::<f64>() / n as f64;
    let c: Vec<f64> = y.iter().map(|v| v - mean).collect();
    (0..=n_lags)
        .map(|k| c[..n - k].iter().zip(&c[k..]).map(|(a, b)| a * b).sum::<f64>() / n as f64)
        .collect()
}

pub fn acf(y: &[f64], n_lags: usize) -> Result<CorrelationSequence> {
    if n_lags >= y.len() {
        return Err(Error::TooShort {
            needed: n_lags + 1,
            have: y.len(),
        });
    }
    let cov = autocovariance(y, n_lags);
    if !(cov[0] > 0.0) {
        return Err(Error::ConstantSeries);
    }
    let mut values: Vec<f64> = cov.iter().map(|c| c / cov[0]).collect();
    values[0] = 1.0;
    Ok(CorrelationSequence {
        values,
        nobs: y.len(),
    })
}

/// Output of the Durbin-Levinson recursion.
#[derive(Debug, Clone)]
pub struct Levinson {
    /// AR coefficients of the highest order fitted.
    pub ar: Vec<f64>,
    /// Partial autocorrelations at lags `1..=order`.
    pub pacf: Vec<f64>,
    /// One-step prediction error variance of the final fit.
    pub sigma2: f64,
}

/// Durbin-Levinson recursion on autocovariances `gamma[0..=order]`.
pub fn durbin_levinson(gamma: &[f64], order: usize) -> Result<Levinson> {
    if gamma.len() <= order {
        return Err(Error::InvalidParameter("too few autocovariances".into()));
    }
    if !(gamma[0] > 0.0) {
        return Err(Error::ConstantSeries);
    }
    let mut phi: Vec<f64> = Vec::with_capacity(order);
    let mut pacf = Vec::with_capacity(order);
    let mut v = gamma[0];
    for k in 1..=order {
        let acc: f64 = phi.iter().enumerate().map(|(j, p)| p * gamma[k - 1 - j]).sum();
        let kappa = (gamma[k] - acc) / v;
        let prev = phi.clone();
        for j in 0..phi.len() {
            phi[j] = prev[j] - kappa * prev[prev.len() - 1 - j];
        }
        phi.push(kappa);
        pacf.push(kappa);
        v *= 1.0 - kappa * kappa;
        if !(v > 0.0) {
            // perfectly predictable; remaining partial correlations are zero
            pacf.resize(order, 0.0);
            phi.resize(order, 0.0);
            v = 0.0;
            break;
        }
    }
    Ok(Levinson { ar: phi, pacf, sigma2: v })
}

pub fn pacf(y: &[f64], n_lags: usize) -> Result<CorrelationSequence> {
    if 2 * n_lags >= y.len() {
        return Err(Error::TooShort {
            needed: 2 * n_lags + 1,
            have: y.len(),
        });
    }
    let r = acf(y, n_lags)?;
    let dl = durbin_levinson(&r.values, n_lags)?;
    let mut values = Vec::with_capacity(n_lags + 1);
    values.push(1.0);
    values.extend(dl.pacf);
    Ok(CorrelationSequence {
        values,
        nobs: y.len(),
    })
}

/// Lag in `min_lag..=max_lag` with the largest autocorrelation.
pub fn dominant_period(y: &[f64], min_lag: usize, max_lag: usize) -> Result<usize> {
    let max_lag = max_lag.min(y.len().saturating_sub(1));
    if min_lag < 2 || min_lag > max_lag {
        return Err(Error::InvalidParameter(format!("bad lag range {min_lag}..={max_lag}")));
    }
    let r = acf(y, max_lag)?;
    let mut best = min_lag;
    for k in min_lag..=max_lag {
        if r.values[k] > r.values[best] {
            best = k;
        }
    }
    Ok(best)
}
