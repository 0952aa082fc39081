//! Seeded simulation of (seasonal) ARIMA processes.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::Result;

use super::{integrate, ModelOrder, SarimaxParams, SeasonalOrder};

const BURN_IN: usize = 500;

/// `n` draws of a zero-mean ARMA process with Gaussian innovations.
pub fn simulate_arma(ar: &[f64], ma: &[f64], sigma2: f64, n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, sigma2.sqrt()).expect("positive variance");
    let burn = BURN_IN + 10 * (ar.len() + ma.len());
    let total = n + burn;
    let e: Vec<f64> = (0..total).map(|_| normal.sample(&mut rng)).collect();
    let mut y = vec![0.0; total];
    for t in 0..total {
        let mut v = e[t];
        for (i, a) in ar.iter().enumerate() {
            if t > i {
                v += a * y[t - 1 - i];
            }
        }
        for (j, m) in ma.iter().enumerate() {
            if t > j {
                v += m * e[t - 1 - j];
            }
        }
        y[t] = v;
    }
    y.split_off(burn)
}

/// Simulates a SARIMA series; differenced orders integrate from zeros.
pub fn simulate_sarima(order: ModelOrder, seasonal: SeasonalOrder, params: &SarimaxParams, n: usize, seed: u64) -> Result<Vec<f64>> {
    let s = seasonal.period;
    let lost = order.d + seasonal.lost();
    let ar = params.expanded_ar(s)?;
    let ma = params.expanded_ma(s)?;
    let mu = params.mean.unwrap_or(0.0);
    let w: Vec<f64> = simulate_arma(&ar, &ma, params.sigma2, n.saturating_sub(lost), seed)
        .into_iter()
        .map(|v| v + mu)
        .collect();
    integrate(&w, &vec![0.0; lost], order.d, seasonal.d, s)
}
