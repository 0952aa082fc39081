//! Forecasting on the original scale.

use crate::error::{Error, Result};
use crate::features::ExogMatrix;
use crate::statespace::{self, kalman_filter, kalman_forecast, FilterState, StateSpaceModel};

use super::{difference, differencing_polynomial, FittedModel};

/// A fitted model conditioned on a history, able to forecast and to absorb
/// new observations one at a time.
#[derive(Debug, Clone)]
pub struct SarimaxPredictor {
    model: FittedModel,
    ssm: StateSpaceModel,
    state: FilterState,
    /// `[1, delta_1, ..., delta_L]` of the differencing operator.
    delta: Vec<f64>,
    /// Last `L` regression errors `u = y - x'beta`, oldest first.
    tail: Vec<f64>,
}

fn dot(x: &[f64], beta: &[f64]) -> f64 {
    x.iter().zip(beta).map(|(a, b)| a * b).sum()
}

impl SarimaxPredictor {
    pub fn new(model: &FittedModel, history: &[f64], exog: Option<&ExogMatrix>) -> Result<Self> {
        let beta = &model.params.beta;
        let u: Vec<f64> = match (exog, beta.is_empty()) {
            (None, true) => history.to_vec(),
            (Some(x), false) => {
                if x.n_rows() != history.len() || x.n_cols() != beta.len() {
                    return Err(Error::ExogMismatch(format!(
                        "history exog is {}x{}, expected {}x{}",
                        x.n_rows(),
                        x.n_cols(),
                        history.len(),
                        beta.len()
                    )));
                }
                history.iter().enumerate().map(|(t, y)| y - dot(x.row(t), beta)).collect()
            }
            (None, false) => return Err(Error::ExogMismatch("model was fit with exogenous regressors".into())),
            (Some(_), true) => return Err(Error::ExogMismatch("model was fit without exogenous regressors".into())),
        };
        let s = model.seasonal.period;
        let mut e = difference(&u, model.order.d, model.seasonal.d, s)?;
        if let Some(mu) = model.params.mean {
            e.iter_mut().for_each(|v| *v -= mu);
        }
        let p = &model.params;
        let ssm = StateSpaceModel::arma(&p.expanded_ar(s)?, &p.expanded_ma(s)?, p.sigma2)?;
        let state = kalman_filter(&ssm, &e)?.state;
        let delta = differencing_polynomial(model.order.d, model.seasonal.d, s);
        let lags = delta.len() - 1;
        Ok(Self {
            model: model.clone(),
            ssm,
            state,
            delta,
            tail: u[u.len() - lags..].to_vec(),
        })
    }

    pub fn model(&self) -> &FittedModel {
        &self.model
    }

    pub fn state(&self) -> &FilterState {
        &self.state
    }

    fn check_row(&self, x: Option<&[f64]>) -> Result<f64> {
        let beta = &self.model.params.beta;
        match x {
            None if beta.is_empty() => Ok(0.0),
            Some(row) if row.len() == beta.len() => Ok(dot(row, beta)),
            _ => Err(Error::ExogMismatch(format!("expected {} exogenous values per step", beta.len()))),
        }
    }

    /// Integrates a differenced-scale value given the preceding errors.
    fn integrate_one(&self, w: f64, tail: &[f64]) -> f64 {
        let l = tail.len();
        let mut u = w;
        for j in 1..self.delta.len() {
            u -= self.delta[j] * tail[l - j];
        }
        u
    }

    fn error_path(&self, horizon: usize) -> Vec<f64> {
        let mu = self.model.params.mean.unwrap_or(0.0);
        let mut tail = self.tail.clone();
        let mut out = Vec::with_capacity(horizon);
        for f in kalman_forecast(&self.ssm, &self.state, horizon) {
            let u = self.integrate_one(f.mean + mu, &tail);
            if !tail.is_empty() {
                tail.remove(0);
                tail.push(u);
            }
            out.push(u);
        }
        out
    }

    /// Forecasts for `h = 1..=horizon`; `future_exog` must be present
    /// exactly when the model has exogenous regressors.
    pub fn forecast(&self, horizon: usize, future_exog: Option<&ExogMatrix>) -> Result<Vec<f64>> {
        if let Some(x) = future_exog {
            if x.n_rows() != horizon {
                return Err(Error::ExogMismatch(format!("{} future exog rows for horizon {horizon}", x.n_rows())));
            }
        }
        let path = self.error_path(horizon);
        path.into_iter()
            .enumerate()
            .map(|(h, u)| Ok(u + self.check_row(future_exog.map(|x| x.row(h)))?))
            .collect()
    }

    pub fn predict_next(&self, x: Option<&[f64]>) -> Result<f64> {
        let xb = self.check_row(x)?;
        Ok(self.error_path(1)[0] + xb)
    }

    /// The predictor after `steps` periods with no observations.
    pub fn advanced(&self, steps: usize) -> Self {
        let path = self.error_path(steps);
        let mut next = self.clone();
        next.state = statespace::advance(&self.ssm, &self.state, steps);
        let l = next.tail.len();
        if l > 0 {
            let mut all = std::mem::take(&mut next.tail);
            all.extend(path);
            next.tail = all[all.len() - l..].to_vec();
        }
        next
    }

    /// Conditions on the next observation.
    pub fn observe(&mut self, y: f64, x: Option<&[f64]>) -> Result<()> {
        let u = y - self.check_row(x)?;
        let l = self.tail.len();
        let mut w = u;
        for j in 1..self.delta.len() {
            w += self.delta[j] * self.tail[l - j];
        }
        self.state.step(&self.ssm, w - self.model.params.mean.unwrap_or(0.0))?;
        if l > 0 {
            self.tail.remove(0);
            self.tail.push(u);
        }
        Ok(())
    }
}

/// Forecasts `horizon` steps past the end of `history`.
pub fn forecast(
    model: &FittedModel,
    history: &[f64],
    horizon: usize,
    history_exog: Option<&ExogMatrix>,
    future_exog: Option<&ExogMatrix>,
) -> Result<Vec<f64>> {
    SarimaxPredictor::new(model, history, history_exog)?.forecast(horizon, future_exog)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sarimax::{ModelOrder, SarimaxParams, SeasonalOrder};

    fn model(order: ModelOrder, phi: Vec<f64>, beta: Vec<f64>) -> FittedModel {
        FittedModel {
            order,
            seasonal: SeasonalOrder::none(),
            params: SarimaxParams {
                phi,
                theta: vec![],
                seasonal_phi: vec![],
                seasonal_theta: vec![],
                beta,
                mean: None,
                sigma2: 1.0,
            },
            exog_names: vec![],
            loglik: 0.0,
            aic: 0.0,
            n_obs_effective: 0,
            converged: true,
            evaluations: 0,
            timed_out: false,
        }
    }

    #[test]
    fn random_walk_persists() {
        let m = model(ModelOrder::new(0, 1, 0).unwrap(), vec![], vec![]);
        let f = forecast(&m, &[4.0, 4.7, 5.2], 5, None, None).unwrap();
        assert_eq!(f, vec![5.2; 5]);
    }

    #[test]
    fn ar1_decays() {
        let m = model(ModelOrder::new(1, 0, 0).unwrap(), vec![0.5], vec![]);
        let f = forecast(&m, &[0.3, -1.0, 4.0], 3, None, None).unwrap();
        assert_eq!(f, vec![2.0, 1.0, 0.5]);
    }

    #[test]
    fn exog_is_linear() {
        let mut m = model(ModelOrder::new(1, 1, 0).unwrap(), vec![0.4], vec![2.0]);
        m.exog_names = vec!["x".into()];
        let hist = [1.0, 2.5, 2.0, 3.0, 4.5];
        let hx = ExogMatrix::new(vec!["x".into()], vec![vec![0.0], vec![1.0], vec![0.0], vec![0.0], vec![1.0]]).unwrap();
        let ones = ExogMatrix::new(vec!["x".into()], vec![vec![1.0]; 4]).unwrap();
        let zeros = ExogMatrix::new(vec!["x".into()], vec![vec![0.0]; 4]).unwrap();
        let a = forecast(&m, &hist, 4, Some(&hx), Some(&ones)).unwrap();
        let b = forecast(&m, &hist, 4, Some(&hx), Some(&zeros)).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y - 2.0).abs() < 1e-12);
        }
        assert!(forecast(&m, &hist, 4, Some(&hx), None).is_err());
        assert!(forecast(&m, &hist, 3, Some(&hx), Some(&ones)).is_err());
    }

    #[test]
    fn chaining_is_consistent() {
        let mut m = model(ModelOrder::new(2, 1, 0).unwrap(), vec![0.5, -0.2], vec![]);
        m.params.theta = vec![0.3];
        m.order.q = 1;
        let hist: Vec<f64> = (0..50).map(|t| (t as f64 * 0.3).sin() + 0.05 * t as f64).collect();
        let p = SarimaxPredictor::new(&m, &hist, None).unwrap();
        let full = p.forecast(12, None).unwrap();
        let tail = p.advanced(5).forecast(7, None).unwrap();
        for (a, b) in full[5..].iter().zip(&tail) {
            assert!((a - b).abs() < 1e-8);
        }
    }

    #[test]
    fn observe_matches_refilter() {
        let mut m = model(ModelOrder::new(1, 1, 1).unwrap(), vec![0.6], vec![]);
        m.params.theta = vec![-0.3];
        m.params.mean = Some(0.1);
        let hist: Vec<f64> = (0..40).map(|t| ((t * 13) % 7) as f64 + t as f64 * 0.2).collect();
        let mut p = SarimaxPredictor::new(&m, &hist[..30], None).unwrap();
        for &y in &hist[30..] {
            p.observe(y, None).unwrap();
        }
        let q = SarimaxPredictor::new(&m, &hist, None).unwrap();
        let (a, b) = (p.forecast(3, None).unwrap(), q.forecast(3, None).unwrap());
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-9);
        }
    }
}
