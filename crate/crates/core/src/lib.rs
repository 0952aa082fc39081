//! Forecasting of network traffic volume with seasonal ARIMA models and
//! additive Holt-Winters smoothing, compared under standard (train once,
//! forecast the horizon) and rolling (one step, then re-train) evaluation.

pub mod diagnostics;
pub mod error;
pub mod evaluation;
pub mod features;
pub mod holt_winters;
pub mod io;
pub mod linalg;
pub mod model_io;
pub mod optim;
pub mod sarimax;
pub mod selection;
pub mod series;
pub mod statespace;

pub use error::{Error, Result};
pub use features::ExogMatrix;
pub use series::TimeSeries;
