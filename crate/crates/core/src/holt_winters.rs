//! Additive Holt-Winters (triple exponential smoothing).
//!
//! ```text
//! l_t = alpha (y_t - s_{t-m}) + (1 - alpha)(l_{t-1} + b_{t-1})
//! b_t = beta (l_t - l_{t-1}) + (1 - beta) b_{t-1}
//! s_t = gamma (y_t - l_{t-1} - b_{t-1}) + (1 - gamma) s_{t-m}
//! y_{t+h|t} = l_t + h b_t + s_{t+h-m(k+1)},  k = floor((h-1)/m)
//! ```

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::optim::{self, NelderMeadOptions};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HwParams {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub m: usize,
}

impl HwParams {
    pub fn new(alpha: f64, beta: f64, gamma: f64, m: usize) -> Result<Self> {
        let p = Self { alpha, beta, gamma, m };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("alpha", self.alpha), ("beta", self.beta), ("gamma", self.gamma)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::InvalidParameter(format!("{name} = {v} is outside [0, 1]")));
            }
        }
        if self.m < 2 {
            return Err(Error::InvalidParameter("seasonal period must be at least 2".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HwState {
    pub level: f64,
    pub trend: f64,
    /// `s_{t-m+1} .. s_t`, oldest first.
    pub seasonals: Vec<f64>,
    pub t: usize,
}

fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

/// Initial state from the first two seasons, positioned at the end of the
/// first season (`t = m`); smoothing continues from observation `m`.
///
/// The trend is the per-step change between the two season means. Seasonal
/// terms are first-season deviations from the linear trend through the first
/// season's mean, re-centered to sum to zero. The level is that trend line
/// evaluated at the last point of the first season.
pub fn initialize(y: &[f64], m: usize) -> Result<HwState> {
    if m < 2 {
        return Err(Error::InvalidParameter("seasonal period must be at least 2".into()));
    }
    if y.len() < 2 * m {
        return Err(Error::TooShort {
            needed: 2 * m,
            have: y.len(),
        });
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter("series contains non-finite values".into()));
    }
    let first = mean(&y[..m]);
    let second = mean(&y[m..2 * m]);
    let trend = (second - first) / m as f64;
    let center = (m as f64 - 1.0) / 2.0;
    let mut seasonals: Vec<f64> = (0..m).map(|i| y[i] - (first + (i as f64 - center) * trend)).collect();
    let offset = mean(&seasonals);
    seasonals.iter_mut().for_each(|s| *s -= offset);
    Ok(HwState {
        level: first + center * trend,
        trend,
        seasonals,
        t: m,
    })
}

pub fn smooth_step(state: &HwState, y: f64, params: &HwParams) -> Result<HwState> {
    if !y.is_finite() {
        return Err(Error::InvalidParameter("non-finite observation".into()));
    }
    let HwParams { alpha, beta, gamma, .. } = *params;
    let s_old = state.seasonals[0];
    let base = state.level + state.trend;
    let level = alpha * (y - s_old) + (1.0 - alpha) * base;
    let trend = beta * (level - state.level) + (1.0 - beta) * state.trend;
    let season = gamma * (y - base) + (1.0 - gamma) * s_old;
    let mut seasonals = Vec::with_capacity(state.seasonals.len());
    seasonals.extend_from_slice(&state.seasonals[1..]);
    seasonals.push(season);
    Ok(HwState {
        level,
        trend,
        seasonals,
        t: state.t + 1,
    })
}

pub fn forecast(state: &HwState, horizon: usize) -> Vec<f64> {
    let m = state.seasonals.len();
    (1..=horizon)
        .map(|h| state.level + h as f64 * state.trend + state.seasonals[(h - 1) % m])
        .collect()
}

/// Runs the recursions over `y[m..]` from the initial state and returns the
/// one-step squared-error sum with the terminal state.
pub fn one_step_sse(y: &[f64], params: &HwParams) -> Result<(f64, HwState)> {
    let mut state = initialize(y, params.m)?;
    let mut sse = 0.0;
    for &v in &y[params.m..] {
        let pred = state.level + state.trend + state.seasonals[0];
        sse += (v - pred) * (v - pred);
        state = smooth_step(&state, v, params)?;
    }
    Ok((sse, state))
}

/// State after smoothing all of `y` under fixed parameters.
pub fn smooth(y: &[f64], params: &HwParams) -> Result<HwState> {
    one_step_sse(y, params).map(|(_, s)| s)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HwFit {
    pub params: HwParams,
    pub state: HwState,
    pub sse: f64,
}

#[derive(Debug, Clone, Default)]
pub struct HwFitOptions {
    /// Skip the coarse grid and refine from these constants.
    pub warm_start: Option<HwParams>,
    pub max_evals: Option<usize>,
}

/// Minimizes the in-sample one-step SSE over `[0, 1]^3`: a 0.1 grid scan,
/// then simplex refinement of the best grid point.
pub fn fit(y: &[f64], m: usize, opts: &HwFitOptions) -> Result<HwFit> {
    if y.len() < 2 * m + 10 {
        return Err(Error::TooShort {
            needed: 2 * m + 10,
            have: y.len(),
        });
    }
    let sse_at = |a: f64, b: f64, g: f64| -> f64 {
        let p = HwParams {
            alpha: a,
            beta: b,
            gamma: g,
            m,
        };
        one_step_sse(y, &p).map(|(s, _)| s).unwrap_or(f64::INFINITY)
    };
    initialize(y, m)?;

    let start = match opts.warm_start {
        Some(p) => {
            p.validate()?;
            [p.alpha, p.beta, p.gamma]
        }
        None => {
            let mut best = ([0.0; 3], f64::INFINITY);
            for i in 0..=10 {
                for j in 0..=10 {
                    for k in 0..=10 {
                        let x = [i as f64 / 10.0, j as f64 / 10.0, k as f64 / 10.0];
                        let s = sse_at(x[0], x[1], x[2]);
                        if s < best.1 {
                            best = (x, s);
                        }
                    }
                }
            }
            best.0
        }
    };

    let clamp = |x: &[f64]| -> [f64; 3] { [x[0].clamp(0.0, 1.0), x[1].clamp(0.0, 1.0), x[2].clamp(0.0, 1.0)] };
    let nm = NelderMeadOptions {
        max_evals: opts.max_evals.unwrap_or(600),
        initial_step: vec![if opts.warm_start.is_some() { 0.02 } else { 0.05 }],
        restarts: 0,
        xatol: 1e-6,
        fatol: 1e-12,
        ..Default::default()
    };
    let min = optim::minimize(
        |x| {
            let c = clamp(x);
            sse_at(c[0], c[1], c[2])
        },
        &start,
        &nm,
    );
    let [alpha, beta, gamma] = clamp(&min.x);
    let params = HwParams { alpha, beta, gamma, m };
    let (sse, state) = one_step_sse(y, &params)?;
    Ok(HwFit { params, state, sse })
}
