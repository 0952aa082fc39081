//! Standard versus rolling prediction, scored by MAPE.
//!
//! Standard prediction fits once on the training window and forecasts the
//! whole test horizon. Rolling prediction forecasts one step, then appends
//! the true observation and re-estimates the model before the next step.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::ExogMatrix;
use crate::holt_winters::{self, HwFit, HwFitOptions};
use crate::sarimax::{self, FitOptions, FittedModel, ModelOrder, SarimaxPredictor, SeasonalOrder};

/// Mean absolute percentage error, in percent.
pub fn mape(predicted: &[f64], observed: &[f64]) -> Result<f64> {
    if predicted.len() != observed.len() {
        return Err(Error::InvalidParameter(format!(
            "{} predictions for {} observations",
            predicted.len(),
            observed.len()
        )));
    }
    if observed.is_empty() {
        return Err(Error::Empty("observations"));
    }
    if let Some(i) = observed.iter().position(|o| *o == 0.0) {
        return Err(Error::InvalidParameter(format!("observation {i} is zero")));
    }
    let sum: f64 = predicted.iter().zip(observed).map(|(p, o)| (p - o).abs() / o.abs()).sum();
    Ok(sum / observed.len() as f64 * 100.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Arima,
    Sarima,
    Sarimax,
    HoltWinters,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictorSpec {
    pub name: String,
    pub kind: ModelKind,
    pub order: ModelOrder,
    #[serde(default)]
    pub seasonal: SeasonalOrder,
    #[serde(default)]
    pub include_mean: Option<bool>,
    /// Holt-Winters seasonal period.
    #[serde(default)]
    pub period: usize,
    #[serde(default)]
    pub exog: bool,
    pub refit_interval: usize,
    /// Rolling mode only updates the filter state, never the parameters.
    #[serde(default)]
    pub filter_only: bool,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub max_evals: Option<usize>,
}

impl PredictorSpec {
    pub fn arima(name: impl Into<String>, order: ModelOrder) -> Self {
        Self {
            name: name.into(),
            kind: ModelKind::Arima,
            order,
            seasonal: SeasonalOrder::none(),
            include_mean: None,
            period: 0,
            exog: false,
            refit_interval: 1,
            filter_only: false,
            seed: 0,
            max_evals: None,
        }
    }

    pub fn holt_winters(name: impl Into<String>, period: usize) -> Self {
        Self {
            kind: ModelKind::HoltWinters,
            period,
            ..Self::arima(name, ModelOrder { p: 0, d: 0, q: 0 })
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.refit_interval == 0 {
            return Err(Error::InvalidParameter("refit_interval must be at least 1".into()));
        }
        if self.exog && self.kind != ModelKind::Sarimax {
            return Err(Error::InvalidParameter(format!("{}: exogenous features need a sarimax model", self.name)));
        }
        match self.kind {
            ModelKind::Arima if self.seasonal != SeasonalOrder::none() => {
                Err(Error::InvalidParameter(format!("{}: arima takes no seasonal order", self.name)))
            }
            ModelKind::HoltWinters if self.period < 2 => {
                Err(Error::InvalidParameter(format!("{}: holt-winters period must be at least 2", self.name)))
            }
            _ => {
                ModelOrder::new(self.order.p, self.order.d, self.order.q)?;
                self.seasonal.validate()
            }
        }
    }

    fn fit_options(&self, warm: Option<&FittedModel>) -> FitOptions {
        FitOptions {
            include_mean: self.include_mean,
            seed: self.seed,
            max_evals: self.max_evals,
            warm_start: warm.map(|m| m.params.clone()),
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trace {
    pub predictions: Vec<f64>,
    pub warnings: Vec<String>,
}

/// Exogenous features split like the series.
#[derive(Debug, Clone, Copy)]
pub struct ExogSplit<'a> {
    pub train: &'a ExogMatrix,
    pub test: &'a ExogMatrix,
}

#[derive(Debug, Clone)]
pub enum Fitted {
    Sarimax(FittedModel),
    HoltWinters(HwFit),
}

fn exog_for<'a>(spec: &PredictorSpec, exog: Option<ExogSplit<'a>>) -> Result<Option<ExogSplit<'a>>> {
    match (spec.exog, exog) {
        (false, _) => Ok(None),
        (true, Some(x)) => Ok(Some(x)),
        (true, None) => Err(Error::ExogMismatch(format!("{} needs exogenous features", spec.name))),
    }
}

/// Fits the spec on the training window.
pub fn fit_spec(spec: &PredictorSpec, train: &[f64], exog: Option<ExogSplit<'_>>) -> Result<Fitted> {
    spec.validate()?;
    let exog = exog_for(spec, exog)?;
    let fitted = match spec.kind {
        ModelKind::HoltWinters => Fitted::HoltWinters(holt_winters::fit(train, spec.period, &HwFitOptions::default())?),
        _ => Fitted::Sarimax(sarimax::fit(train, spec.order, spec.seasonal, exog.map(|x| x.train), &spec.fit_options(None))?),
    };
    Ok(fitted)
}

fn check_lengths(test: &[f64], exog: Option<ExogSplit<'_>>, train_len: usize) -> Result<()> {
    if test.is_empty() {
        return Err(Error::Empty("test window"));
    }
    if let Some(x) = exog {
        if x.test.n_rows() != test.len() || x.train.n_rows() != train_len {
            return Err(Error::ExogMismatch("exogenous rows do not match the split".into()));
        }
    }
    Ok(())
}

/// Multi-step forecasts `h = 1..=len(test)` from a model fit on `train`.
pub fn standard_from(fitted: &Fitted, train: &[f64], test: &[f64], exog: Option<ExogSplit<'_>>) -> Result<Trace> {
    check_lengths(test, exog, train.len())?;
    let predictions = match fitted {
        Fitted::HoltWinters(hw) => holt_winters::forecast(&hw.state, test.len()),
        Fitted::Sarimax(m) => {
            let (hx, fx) = if m.has_exog() {
                let x = exog.ok_or_else(|| Error::ExogMismatch("missing exogenous features".into()))?;
                (Some(x.train), Some(x.test))
            } else {
                (None, None)
            };
            sarimax::forecast(m, train, test.len(), hx, fx)?
        }
    };
    Ok(Trace {
        predictions,
        warnings: Vec::new(),
    })
}

/// One-step-ahead rollout over the test window starting from `fitted`.
pub fn rolling_from(
    spec: &PredictorSpec,
    fitted: &Fitted,
    train: &[f64],
    test: &[f64],
    exog: Option<ExogSplit<'_>>,
) -> Result<Trace> {
    check_lengths(test, exog, train.len())?;
    match fitted {
        Fitted::HoltWinters(hw) => Ok(rolling_hw(spec, hw, train, test)),
        Fitted::Sarimax(m) => rolling_sarimax(spec, m, train, test, exog),
    }
}

fn refit_due(spec: &PredictorSpec, step: usize, n: usize) -> bool {
    !spec.filter_only && step % spec.refit_interval == 0 && step < n
}

fn rolling_hw(spec: &PredictorSpec, fit: &HwFit, train: &[f64], test: &[f64]) -> Trace {
    let mut params = fit.params;
    let mut state = fit.state.clone();
    let mut history = train.to_vec();
    let mut predictions = Vec::with_capacity(test.len());
    let mut warnings = Vec::new();
    for (i, &y) in test.iter().enumerate() {
        predictions.push(holt_winters::forecast(&state, 1)[0]);
        history.push(y);
        state = match holt_winters::smooth_step(&state, y, &params) {
            Ok(s) => s,
            Err(e) => {
                warnings.push(format!("step {i}: state update failed: {e}"));
                state
            }
        };
        if refit_due(spec, i + 1, test.len()) {
            let opts = HwFitOptions {
                warm_start: Some(params),
                max_evals: None,
            };
            match holt_winters::fit(&history, spec.period, &opts) {
                Ok(f) => {
                    params = f.params;
                    state = f.state;
                }
                Err(e) => warnings.push(format!("step {i}: refit failed, keeping previous parameters: {e}")),
            }
        }
    }
    Trace { predictions, warnings }
}

fn rolling_sarimax(
    spec: &PredictorSpec,
    model: &FittedModel,
    train: &[f64],
    test: &[f64],
    exog: Option<ExogSplit<'_>>,
) -> Result<Trace> {
    let exog = if model.has_exog() {
        Some(exog.ok_or_else(|| Error::ExogMismatch("missing exogenous features".into()))?)
    } else {
        None
    };
    let mut predictor = SarimaxPredictor::new(model, train, exog.map(|x| x.train))?;
    let mut history = train.to_vec();
    let mut history_x = exog.map(|x| x.train.clone());
    let mut predictions = Vec::with_capacity(test.len());
    let mut warnings = Vec::new();
    for (i, &y) in test.iter().enumerate() {
        let row = exog.map(|x| x.test.row(i));
        predictions.push(predictor.predict_next(row)?);
        history.push(y);
        if let (Some(hx), Some(r)) = (history_x.as_mut(), row) {
            hx.push_row(r.to_vec())?;
        }
        if let Err(e) = predictor.observe(y, row) {
            warnings.push(format!("step {i}: state update failed: {e}"));
        }
        if refit_due(spec, i + 1, test.len()) {
            let current = predictor.model().clone();
            let refit = sarimax::fit(&history, spec.order, spec.seasonal, history_x.as_ref(), &spec.fit_options(Some(&current)))
                .and_then(|m| {
                    if m.converged {
                        Ok(m)
                    } else {
                        Err(Error::InvalidParameter("optimizer did not converge".into()))
                    }
                })
                .and_then(|m| SarimaxPredictor::new(&m, &history, history_x.as_ref()));
            match refit {
                Ok(p) => predictor = p,
                Err(e) => warnings.push(format!("step {i}: refit failed, keeping previous parameters: {e}")),
            }
        }
    }
    Ok(Trace { predictions, warnings })
}

pub fn standard_prediction(spec: &PredictorSpec, train: &[f64], test: &[f64], exog: Option<ExogSplit<'_>>) -> Result<Trace> {
    let fitted = fit_spec(spec, train, exog).map_err(|e| e.in_model(&spec.name))?;
    standard_from(&fitted, train, test, exog_for(spec, exog)?).map_err(|e| e.in_model(&spec.name))
}

pub fn rolling_prediction(spec: &PredictorSpec, train: &[f64], test: &[f64], exog: Option<ExogSplit<'_>>) -> Result<Trace> {
    let fitted = fit_spec(spec, train, exog).map_err(|e| e.in_model(&spec.name))?;
    rolling_from(spec, &fitted, train, test, exog_for(spec, exog)?).map_err(|e| e.in_model(&spec.name))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelReport {
    pub name: String,
    pub mape_standard: Option<f64>,
    pub mape_rolling: Option<f64>,
    pub standard: Option<Trace>,
    pub rolling: Option<Trace>,
    pub error: Option<String>,
}

impl ModelReport {
    pub fn ok(&self) -> bool {
        self.error.is_none()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub rows: Vec<ModelReport>,
}

fn evaluate_one(spec: &PredictorSpec, train: &[f64], test: &[f64], exog: Option<ExogSplit<'_>>) -> Result<ModelReport> {
    let fitted = fit_spec(spec, train, exog)?;
    let exog = exog_for(spec, exog)?;
    let standard = standard_from(&fitted, train, test, exog)?;
    let rolling = rolling_from(spec, &fitted, train, test, exog)?;
    Ok(ModelReport {
        name: spec.name.clone(),
        mape_standard: Some(mape(&standard.predictions, test)?),
        mape_rolling: Some(mape(&rolling.predictions, test)?),
        standard: Some(standard),
        rolling: Some(rolling),
        error: None,
    })
}

/// Runs both modes for every model; a failing model is recorded in its row.
pub fn compare(specs: &[PredictorSpec], train: &[f64], test: &[f64], exog: Option<ExogSplit<'_>>) -> Result<EvalReport> {
    if specs.is_empty() {
        return Err(Error::Empty("model list"));
    }
    let rows = specs
        .par_iter()
        .map(|spec| {
            evaluate_one(spec, train, test, exog).unwrap_or_else(|e| ModelReport {
                name: spec.name.clone(),
                mape_standard: None,
                mape_rolling: None,
                standard: None,
                rolling: None,
                error: Some(e.in_model(&spec.name).to_string()),
            })
        })
        .collect();
    Ok(EvalReport { rows })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mape_examples() {
        assert_eq!(mape(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
        assert!((mape(&[1.1, 1.8], &[1.0, 2.0]).unwrap() - 10.0).abs() < 1e-12);
        assert_eq!(mape(&[5.0], &[4.0]).unwrap(), 25.0);
    }

    #[test]
    fn mape_rejects_zero_and_mismatch() {
        assert!(mape(&[1.0], &[0.0]).is_err());
        assert!(mape(&[1.0, 2.0], &[1.0]).is_err());
        assert!(mape(&[], &[]).is_err());
    }

    #[test]
    fn spec_validation() {
        let mut s = PredictorSpec::arima("a", ModelOrder::new(1, 1, 0).unwrap());
        assert!(s.validate().is_ok());
        s.exog = true;
        assert!(s.validate().is_err());
        s.exog = false;
        s.refit_interval = 0;
        assert!(s.validate().is_err());
        assert!(PredictorSpec::holt_winters("hw", 1).validate().is_err());
    }
}
