//! Maximum-likelihood estimation.

use std::time::Instant;

use crate::diagnostics::{autocovariance, durbin_levinson};
use crate::error::{Error, Result};
use crate::features::ExogMatrix;
use crate::linalg;
use crate::optim::{self, NelderMeadOptions, Termination};
use crate::statespace::{filter_columns, StateSpaceModel};

use super::transform::{constrain_ar, constrain_ma, unconstrain_ar, unconstrain_ma};
use super::{aic, difference, FittedModel, ModelOrder, SarimaxParams, SeasonalOrder};

const LN_2PI: f64 = 1.837_877_066_409_345_5;

/// Largest partial autocorrelation allowed in starting values.
const START_PACF_LIMIT: f64 = 0.95;

#[derive(Debug, Clone)]
pub struct FitOptions {
    /// Include a mean for the differenced process; defaults to `d + D == 0`.
    pub include_mean: Option<bool>,
    /// Objective evaluations per optimizer run; scales with dimension when unset.
    pub max_evals: Option<usize>,
    pub restarts: usize,
    pub seed: u64,
    pub deadline: Option<Instant>,
    /// Start from these coefficients instead of Hannan-Rissanen estimates.
    pub warm_start: Option<SarimaxParams>,
    /// Initial simplex size in the unconstrained space.
    pub initial_step: f64,
    pub warm_step: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            include_mean: None,
            max_evals: None,
            restarts: 3,
            seed: 0,
            deadline: None,
            warm_start: None,
            initial_step: 0.1,
            warm_step: 0.02,
        }
    }
}

/// ARMA parameters in unconstrained coordinates, laid out `[p | q | P | Q]`.
struct Layout {
    order: ModelOrder,
    seasonal: SeasonalOrder,
}

impl Layout {
    fn dim(&self) -> usize {
        self.order.p + self.order.q + self.seasonal.p + self.seasonal.q
    }

    fn split<'a>(&self, u: &'a [f64]) -> [&'a [f64]; 4] {
        let (p, q, sp) = (self.order.p, self.order.q, self.seasonal.p);
        [&u[..p], &u[p..p + q], &u[p + q..p + q + sp], &u[p + q + sp..]]
    }

    fn coefficients(&self, u: &[f64]) -> [Vec<f64>; 4] {
        let [a, b, c, d] = self.split(u);
        [constrain_ar(a), constrain_ma(b), constrain_ar(c), constrain_ma(d)]
    }

    fn unconstrain(&self, params: &SarimaxParams) -> Option<Vec<f64>> {
        if params.phi.len() != self.order.p
            || params.theta.len() != self.order.q
            || params.seasonal_phi.len() != self.seasonal.p
            || params.seasonal_theta.len() != self.seasonal.q
        {
            return None;
        }
        let mut u = unconstrain_ar(&params.phi)?;
        u.extend(unconstrain_ma(&params.theta)?);
        u.extend(unconstrain_ar(&params.seasonal_phi)?);
        u.extend(unconstrain_ma(&params.seasonal_theta)?);
        u.iter().all(|v| v.is_finite()).then_some(u)
    }
}

struct Profile {
    ll: f64,
    sigma2: f64,
    coef: Vec<f64>,
}

/// Concentrated log-likelihood over the regression coefficients and `sigma2`.
fn profile(layout: &Layout, u: &[f64], w: &[f64], regressors: &[Vec<f64>]) -> Option<Profile> {
    let [phi, theta, sphi, stheta] = layout.coefficients(u);
    let params = SarimaxParams {
        phi,
        theta,
        seasonal_phi: sphi,
        seasonal_theta: stheta,
        beta: Vec::new(),
        mean: None,
        sigma2: 1.0,
    };
    let s = layout.seasonal.period;
    let model = StateSpaceModel::arma(&params.expanded_ar(s).ok()?, &params.expanded_ma(s).ok()?, 1.0).ok()?;
    let mut columns: Vec<&[f64]> = Vec::with_capacity(regressors.len() + 1);
    columns.push(w);
    columns.extend(regressors.iter().map(|c| c.as_slice()));
    let inn = filter_columns(&model, &columns).ok()?;
    let n = w.len();
    let k = regressors.len();
    let f = &inn.variances;

    let coef = if k == 0 {
        Vec::new()
    } else {
        let mut a = vec![vec![0.0; k]; k];
        let mut b = vec![0.0; k];
        for t in 0..n {
            let inv = 1.0 / f[t];
            for i in 0..k {
                let vi = inn.errors[i + 1][t] * inv;
                b[i] += vi * inn.errors[0][t];
                for j in 0..=i {
                    a[i][j] += vi * inn.errors[j + 1][t];
                }
            }
        }
        for i in 0..k {
            for j in 0..i {
                a[j][i] = a[i][j];
            }
        }
        linalg::solve(&a, &b).ok()?
    };
    let mut ss = 0.0;
    let mut log_f = 0.0;
    for t in 0..n {
        let mut e = inn.errors[0][t];
        for (j, c) in coef.iter().enumerate() {
            e -= c * inn.errors[j + 1][t];
        }
        ss += e * e / f[t];
        log_f += f[t].ln();
    }
    let sigma2 = ss / n as f64;
    if !(sigma2 > 0.0) || !sigma2.is_finite() {
        return None;
    }
    let nf = n as f64;
    let ll = -0.5 * nf * (LN_2PI + sigma2.ln() + 1.0) - 0.5 * log_f;
    ll.is_finite().then_some(Profile { ll, sigma2, coef })
}

fn shrink_to_stationary(coef: &[f64], ma: bool) -> Vec<f64> {
    let mut c = coef.to_vec();
    for _ in 0..30 {
        let u = if ma { unconstrain_ma(&c) } else { unconstrain_ar(&c) };
        if let Some(u) = u {
            let limit = START_PACF_LIMIT / (1.0 - START_PACF_LIMIT * START_PACF_LIMIT).sqrt();
            return u.into_iter().map(|v| v.clamp(-limit, limit)).collect();
        }
        c.iter_mut().for_each(|v| *v *= 0.9);
    }
    vec![0.0; coef.len()]
}

/// Hannan-Rissanen starting values: a long autoregression supplies
/// innovation estimates, then one least-squares regression on lagged values
/// and lagged innovations.
fn hannan_rissanen(layout: &Layout, u: &[f64]) -> Vec<f64> {
    let (o, s) = (&layout.order, &layout.seasonal);
    let zeros = vec![0.0; layout.dim()];
    if layout.dim() == 0 {
        return zeros;
    }
    let n = u.len();
    let period = s.period;
    let ma_reach = o.q + s.q * period;
    let ar_reach = o.p + s.p * period;

    let mut resid = vec![0.0; n];
    let mut long = 0;
    if ma_reach > 0 {
        long = (2 * ma_reach).max(ar_reach).max(10).min(n / 3);
        let gamma = autocovariance(u, long);
        let Ok(dl) = durbin_levinson(&gamma, long) else {
            return zeros;
        };
        for t in long..n {
            resid[t] = u[t] - dl.ar.iter().enumerate().map(|(i, a)| a * u[t - 1 - i]).sum::<f64>();
        }
    }

    let mut lags: Vec<(bool, usize)> = Vec::new();
    lags.extend((1..=o.p).map(|i| (false, i)));
    lags.extend((1..=o.q).map(|i| (true, i)));
    lags.extend((1..=s.p).map(|j| (false, j * period)));
    lags.extend((1..=s.q).map(|j| (true, j * period)));
    let start = long + ar_reach.max(ma_reach);
    if n < start + lags.len() + 10 {
        return zeros;
    }
    let mean = u.iter().sum::<f64>() / n as f64;
    let rows: Vec<Vec<f64>> = (start..n)
        .map(|t| {
            lags.iter()
                .map(|&(is_ma, lag)| if is_ma { resid[t - lag] } else { u[t - lag] - mean })
                .collect()
        })
        .collect();
    let target: Vec<f64> = (start..n).map(|t| u[t] - mean).collect();
    let Ok(fit) = linalg::ols(&target, &rows) else {
        return zeros;
    };
    let c = &fit.coef;
    let (p, q, sp) = (o.p, o.q, s.p);
    let mut out = shrink_to_stationary(&c[..p], false);
    out.extend(shrink_to_stationary(&c[p..p + q], true));
    out.extend(shrink_to_stationary(&c[p + q..p + q + sp], false));
    out.extend(shrink_to_stationary(&c[p + q + sp..], true));
    out
}

pub(crate) struct Prepared {
    pub w: Vec<f64>,
    pub regressors: Vec<Vec<f64>>,
    pub include_mean: bool,
}

pub(crate) fn prepare(
    y: &[f64],
    order: ModelOrder,
    seasonal: SeasonalOrder,
    exog: Option<&ExogMatrix>,
    include_mean: Option<bool>,
) -> Result<Prepared> {
    ModelOrder::new(order.p, order.d, order.q)?;
    seasonal.validate()?;
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter("series contains non-finite values".into()));
    }
    let (d, sd, s) = (order.d, seasonal.d, seasonal.period);
    let w = difference(y, d, sd, s)?;
    let needed = 10 + order.p + order.q + (seasonal.p + seasonal.q) * s;
    if w.len() < needed {
        return Err(Error::TooShort {
            needed: needed + d + sd * s,
            have: y.len(),
        });
    }
    let mut regressors = Vec::new();
    if let Some(x) = exog {
        if x.n_rows() != y.len() {
            return Err(Error::ExogMismatch(format!("{} exog rows for {} observations", x.n_rows(), y.len())));
        }
        for (j, name) in x.column_names().iter().enumerate() {
            let col = difference(&x.column(j), d, sd, s)?;
            if col.iter().all(|v| *v == 0.0) {
                return Err(Error::DegenerateExog(name.clone()));
            }
            regressors.push(col);
        }
    }
    let include_mean = include_mean.unwrap_or(d + sd == 0);
    if include_mean {
        regressors.push(vec![1.0; w.len()]);
    }
    let first = w[0];
    if w.iter().all(|v| *v == first) {
        return Err(Error::ConstantSeries);
    }
    Ok(Prepared {
        w,
        regressors,
        include_mean,
    })
}

/// Fits the model by maximizing the exact likelihood of the differenced series.
///
/// Optimizer trouble is reported through `converged` rather than an error.
pub fn fit(
    y: &[f64],
    order: ModelOrder,
    seasonal: SeasonalOrder,
    exog: Option<&ExogMatrix>,
    opts: &FitOptions,
) -> Result<FittedModel> {
    let prep = prepare(y, order, seasonal, exog, opts.include_mean)?;
    let layout = Layout { order, seasonal };
    let dim = layout.dim();
    let n = prep.w.len();

    let warm = opts.warm_start.as_ref().and_then(|p| layout.unconstrain(p));
    let (x0, step) = match warm {
        Some(u) => (u, opts.warm_step),
        None => {
            let resid = if prep.regressors.is_empty() {
                prep.w.clone()
            } else {
                let rows: Vec<Vec<f64>> = (0..n).map(|t| prep.regressors.iter().map(|c| c[t]).collect()).collect();
                match linalg::ols(&prep.w, &rows) {
                    Ok(o) => (0..n)
                        .map(|t| prep.w[t] - rows[t].iter().zip(&o.coef).map(|(a, b)| a * b).sum::<f64>())
                        .collect(),
                    Err(_) => prep.w.clone(),
                }
            };
            (hannan_rissanen(&layout, &resid), opts.initial_step)
        }
    };

    let objective = |u: &[f64]| -> f64 {
        match profile(&layout, u, &prep.w, &prep.regressors) {
            Some(p) => -p.ll / n as f64,
            None => f64::INFINITY,
        }
    };
    let nm = NelderMeadOptions {
        max_evals: opts.max_evals.unwrap_or(1000 + 400 * dim),
        restarts: opts.restarts,
        seed: opts.seed,
        deadline: opts.deadline,
        initial_step: vec![step],
        ..Default::default()
    };
    let min = optim::minimize(objective, &x0, &nm);
    let best = profile(&layout, &min.x, &prep.w, &prep.regressors)
        .ok_or_else(|| Error::InvalidParameter(format!("likelihood of {order}x{seasonal} could not be evaluated")))?;

    let [phi, theta, seasonal_phi, seasonal_theta] = layout.coefficients(&min.x);
    let n_exog = exog.map_or(0, |x| x.n_cols());
    let beta = best.coef[..n_exog].to_vec();
    let mean = prep.include_mean.then(|| best.coef[n_exog]);
    let params = SarimaxParams {
        phi,
        theta,
        seasonal_phi,
        seasonal_theta,
        beta,
        mean,
        sigma2: best.sigma2,
    };
    let mut fitted = FittedModel {
        order,
        seasonal,
        params,
        exog_names: exog.map(|x| x.column_names().to_vec()).unwrap_or_default(),
        loglik: best.ll,
        aic: 0.0,
        n_obs_effective: n,
        converged: min.termination == Termination::Converged,
        evaluations: min.evals,
        timed_out: min.termination == Termination::Deadline,
    };
    fitted.aic = aic(fitted.loglik, fitted.n_params());
    Ok(fitted)
}

/// Exact log-likelihood of `y` under fixed parameters (differenced scale).
pub fn loglik(y: &[f64], model: &FittedModel, exog: Option<&ExogMatrix>) -> Result<f64> {
    let prep = prepare(y, model.order, model.seasonal, exog, Some(model.params.mean.is_some()))?;
    let p = &model.params;
    let s = model.seasonal.period;
    let ss = StateSpaceModel::arma(&p.expanded_ar(s)?, &p.expanded_ma(s)?, p.sigma2)?;
    let mut e = prep.w.clone();
    let coef: Vec<f64> = p.beta.iter().copied().chain(p.mean).collect();
    for (c, col) in coef.iter().zip(&prep.regressors) {
        for (ei, xi) in e.iter_mut().zip(col) {
            *ei -= c * xi;
        }
    }
    crate::statespace::kalman_loglik(&ss, &e)
}
