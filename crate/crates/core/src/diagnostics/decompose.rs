//! Classical additive decomposition: centered moving-average trend,
//! per-phase mean seasonal, remainder residual.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Decomposition {
    pub period: usize,
    /// `None` within half a period of either end.
    pub trend: Vec<Option<f64>>,
    pub seasonal: Vec<f64>,
    pub residual: Vec<Option<f64>>,
}

/// Centered moving average; even windows use half weights on both ends.
pub fn centered_moving_average(y: &[f64], period: usize) -> Vec<Option<f64>> {
    let n = y.len();
    let half = period / 2;
    let mut out = vec![None; n];
    if n < 2 * half + 1 {
        return out;
    }
    for (t, slot) in out.iter_mut().enumerate().take(n - half).skip(half) {
        let window = &y[t - half..=t + half];
        let v = if period % 2 == 1 {
            window.iter().sum::<f64>() / period as f64
        } else {
            let inner: f64 = window[1..window.len() - 1].iter().sum();
            (inner + 0.5 * (window[0] + window[window.len() - 1])) / period as f64
        };
        *slot = Some(v);
    }
    out
}

pub fn decompose_additive(y: &[f64], period: usize) -> Result<Decomposition> {
    if period < 2 {
        return Err(Error::InvalidParameter("period must be at least 2".into()));
    }
    if y.len() < 2 * period {
        return Err(Error::TooShort {
            needed: 2 * period,
            have: y.len(),
        });
    }
    let trend = centered_moving_average(y, period);

    let mut sums = vec![0.0; period];
    let mut counts = vec![0usize; period];
    for (t, tr) in trend.iter().enumerate() {
        if let Some(tr) = tr {
            sums[t % period] += y[t] - tr;
            counts[t % period] += 1;
        }
    }
    let mut phase: Vec<f64> = sums.iter().zip(&counts).map(|(s, &c)| s / c as f64).collect();
    let center = phase.iter().sum::<f64>() / period as f64;
    phase.iter_mut().for_each(|s| *s -= center);

    let seasonal: Vec<f64> = (0..y.len()).map(|t| phase[t % period]).collect();
    let residual = trend
        .iter()
        .zip(y.iter().zip(&seasonal))
        .map(|(tr, (v, s))| tr.map(|tr| v - tr - s))
        .collect();
    Ok(Decomposition {
        period,
        trend,
        seasonal,
        residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_trend_has_no_seasonality() {
        let y: Vec<f64> = (0..40).map(|t| t as f64).collect();
        let d = decompose_additive(&y, 4).unwrap();
        assert!(d.seasonal.iter().all(|s| s.abs() < 1e-9));
        assert_eq!(d.trend[2], Some(2.0));
        assert_eq!(d.trend[1], None);
        assert_eq!(d.trend[38], None);
    }

    #[test]
    fn recovers_exact_pattern() {
        let pattern = [0.0, 1.0, 0.0, -1.0];
        let y: Vec<f64> = (0..32).map(|t| 10.0 + pattern[t % 4]).collect();
        let d = decompose_additive(&y, 4).unwrap();
        for t in 0..32 {
            assert!((d.seasonal[t] - pattern[t % 4]).abs() < 1e-9);
        }
        for tr in d.trend.iter().flatten() {
            assert!((tr - 10.0).abs() < 1e-12);
        }
    }

    #[test]
    fn additive_identity_and_periodicity() {
        let y: Vec<f64> = (0..61)
            .map(|t| 0.3 * t as f64 + [2.0, -1.0, 0.5, -0.25, 1.0][t % 5] + ((t * 7919) % 13) as f64 / 13.0)
            .collect();
        let d = decompose_additive(&y, 5).unwrap();
        for t in 0..y.len() {
            if let (Some(tr), Some(r)) = (d.trend[t], d.residual[t]) {
                assert!((tr + d.seasonal[t] + r - y[t]).abs() < 1e-9);
            }
            if t + 5 < y.len() {
                assert_eq!(d.seasonal[t], d.seasonal[t + 5]);
            }
        }
        assert!(d.seasonal[..5].iter().sum::<f64>().abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_period() {
        assert!(decompose_additive(&[1.0; 10], 1).is_err());
        assert!(matches!(decompose_additive(&[1.0; 10], 6), Err(Error::TooShort { .. })));
    }
}
