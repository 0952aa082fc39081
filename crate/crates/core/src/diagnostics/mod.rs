//! Stationarity and seasonality diagnostics.

mod adf;
mod correlation;
mod decompose;
pub mod mackinnon;

pub use adf::{adf_test, default_max_lag, AdfResult, CriticalValues};
pub use correlation::{
    acf, autocovariance, dominant_period, durbin_levinson, pacf, CorrelationSequence, Levinson,
};
pub use decompose::{centered_moving_average, decompose_additive, Decomposition};
