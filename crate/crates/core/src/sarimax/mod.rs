//! Seasonal ARIMA with exogenous regressors.
//!
//! The model is a regression with SARIMA errors:
//!
//! ```text
//! y_t = x_t' beta + u_t,
//! phi(L) PHI(L^S) (1 - L)^d (1 - L^S)^D u_t = mu + theta(L) THETA(L^S) e_t
//! ```
//!
//! Differencing happens outside the Kalman filter; the likelihood is exact
//! for the differenced sample. `beta`, `mu` and `sigma2` are concentrated out
//! of the likelihood so the optimizer only searches over the ARMA parameters.

mod diff;
mod fit;
mod forecast;
mod poly;
mod simulate;
pub mod transform;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use diff::{difference, integrate};
pub use fit::{fit, loglik, FitOptions};
pub use forecast::{forecast, SarimaxPredictor};
pub use poly::{differencing_polynomial, expand_polynomials, Convention, LagPolynomial};
pub use simulate::{simulate_arma, simulate_sarima};

pub const MAX_ORDER: usize = 30;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ModelOrder {
    pub p: usize,
    pub d: usize,
    pub q: usize,
}

impl ModelOrder {
    pub fn new(p: usize, d: usize, q: usize) -> Result<Self> {
        if p > MAX_ORDER || q > MAX_ORDER {
            return Err(Error::InvalidParameter(format!("AR/MA orders must be at most {MAX_ORDER}")));
        }
        if d > 2 {
            return Err(Error::InvalidParameter("differencing order must be at most 2".into()));
        }
        Ok(Self { p, d, q })
    }
}

impl std::fmt::Display for ModelOrder {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({},{},{})", self.p, self.d, self.q)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize, Default)]
pub struct SeasonalOrder {
    #[serde(rename = "P")]
    pub p: usize,
    #[serde(rename = "D")]
    pub d: usize,
    #[serde(rename = "Q")]
    pub q: usize,
    #[serde(rename = "S")]
    pub period: usize,
}

impl SeasonalOrder {
    pub fn new(p: usize, d: usize, q: usize, period: usize) -> Result<Self> {
        let s = Self { p, d, q, period };
        s.validate()?;
        Ok(s)
    }

    pub fn none() -> Self {
        Self::default()
    }

    pub fn validate(&self) -> Result<()> {
        if self.period == 0 {
            if self.p + self.d + self.q != 0 {
                return Err(Error::InvalidParameter("seasonal orders need a period".into()));
            }
        } else if self.period < 2 {
            return Err(Error::InvalidParameter("seasonal period must be at least 2".into()));
        }
        if self.p > MAX_ORDER || self.q > MAX_ORDER || self.d > 2 {
            return Err(Error::InvalidParameter("seasonal order out of range".into()));
        }
        Ok(())
    }

    /// Observations consumed by seasonal differencing.
    pub fn lost(&self) -> usize {
        self.d * self.period
    }
}

impl std::fmt::Display for SeasonalOrder {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({},{},{},{})", self.p, self.d, self.q, self.period)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SarimaxParams {
    pub phi: Vec<f64>,
    pub theta: Vec<f64>,
    pub seasonal_phi: Vec<f64>,
    pub seasonal_theta: Vec<f64>,
    /// Exogenous coefficients, one per column.
    pub beta: Vec<f64>,
    /// Mean of the differenced error process, when included.
    pub mean: Option<f64>,
    pub sigma2: f64,
}

impl SarimaxParams {
    /// Expanded AR coefficients in the `y_t = sum c_i y_{t-i}` convention.
    pub fn expanded_ar(&self, period: usize) -> Result<Vec<f64>> {
        let e = expand_polynomials(&LagPolynomial::ar(&self.phi)?, &LagPolynomial::ar(&self.seasonal_phi)?, period)?;
        Ok(e.coefficients)
    }

    pub fn expanded_ma(&self, period: usize) -> Result<Vec<f64>> {
        let e = expand_polynomials(&LagPolynomial::ma(&self.theta)?, &LagPolynomial::ma(&self.seasonal_theta)?, period)?;
        Ok(e.coefficients)
    }

    pub fn is_stationary(&self) -> bool {
        transform::ar_to_pacf(&self.phi).is_some() && transform::ar_to_pacf(&self.seasonal_phi).is_some()
    }

    pub fn is_invertible(&self) -> bool {
        transform::is_invertible(&self.theta) && transform::is_invertible(&self.seasonal_theta)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FittedModel {
    pub order: ModelOrder,
    pub seasonal: SeasonalOrder,
    pub params: SarimaxParams,
    pub exog_names: Vec<String>,
    pub loglik: f64,
    pub aic: f64,
    pub n_obs_effective: usize,
    pub converged: bool,
    /// Objective evaluations spent by the optimizer.
    pub evaluations: usize,
    /// Optimizer stopped at its deadline.
    pub timed_out: bool,
}

impl FittedModel {
    /// Number of estimated parameters, `sigma2` and the mean included.
    pub fn n_params(&self) -> usize {
        let o = &self.order;
        let s = &self.seasonal;
        o.p + o.q + s.p + s.q + self.params.beta.len() + 1 + usize::from(self.params.mean.is_some())
    }

    /// Observations lost to differencing.
    pub fn lost(&self) -> usize {
        self.order.d + self.seasonal.lost()
    }

    pub fn has_exog(&self) -> bool {
        !self.params.beta.is_empty()
    }
}

pub fn aic(loglik: f64, k: usize) -> f64 {
    2.0 * k as f64 - 2.0 * loglik
}
