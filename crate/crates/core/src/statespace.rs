//! Linear-Gaussian state-space form of an ARMA process and its Kalman filter.
//!
//! Harvey's representation with state dimension `r = max(p, q + 1)`:
//!
//! ```text
//! x[t+1] = T x[t] + R e[t+1],   e ~ N(0, sigma2)
//! y[t]   = Z x[t],              Z = (1, 0, ..., 0)
//! ```
//!
//! `T` has the AR coefficients in its first column and ones on the
//! super-diagonal; `R = (1, theta_1, ..., theta_{r-1})`. The filter exploits
//! this companion structure so each step costs O(r^2).
//!
//! The filter starts from the stationary distribution: mean zero and the
//! covariance solving `P = T P T' + sigma2 R R'`. That covariance is built
//! exactly from the ARMA autocovariances and psi-weights rather than by an
//! iterative Lyapunov solve.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::sarimax::transform::ar_to_pacf;

const LN_2PI: f64 = 1.837_877_066_409_345_5;

/// Relative change in the filtered covariance below which the recursion is
/// treated as having reached its steady state.
const STEADY_TOL: f64 = 1e-13;

#[derive(Debug, Clone, PartialEq)]
pub struct StateSpaceModel {
    /// AR coefficients padded to length `r`.
    ar: Vec<f64>,
    /// MA coefficients padded to length `r - 1`.
    ma: Vec<f64>,
    sigma2: f64,
    r: usize,
    p: usize,
}

impl StateSpaceModel {
    /// Builds the Harvey-form model of `phi(L) y = theta(L) e`, where `ar`
    /// holds `phi_1..phi_p` (so `y_t = sum phi_i y_{t-i} + ...`) and `ma`
    /// holds `theta_1..theta_q`.
    pub fn arma(ar: &[f64], ma: &[f64], sigma2: f64) -> Result<Self> {
        if ar.iter().chain(ma).any(|c| !c.is_finite()) {
            return Err(Error::InvalidParameter("non-finite ARMA coefficient".into()));
        }
        if !(sigma2 > 0.0) || !sigma2.is_finite() {
            return Err(Error::InvalidParameter(format!("innovation variance {sigma2} must be positive")));
        }
        let r = ar.len().max(ma.len() + 1);
        let mut arp = ar.to_vec();
        arp.resize(r, 0.0);
        let mut map = ma.to_vec();
        map.resize(r - 1, 0.0);
        Ok(Self {
            ar: arp,
            ma: map,
            sigma2,
            r,
            p: ar.len(),
        })
    }

    pub fn state_dim(&self) -> usize {
        self.r
    }

    pub fn innovation_variance(&self) -> f64 {
        self.sigma2
    }

    pub fn ar(&self) -> &[f64] {
        &self.ar[..self.p]
    }

    /// Same dynamics, different innovation variance.
    pub fn with_sigma2(&self, sigma2: f64) -> Result<Self> {
        if !(sigma2 > 0.0) || !sigma2.is_finite() {
            return Err(Error::InvalidParameter(format!("innovation variance {sigma2} must be positive")));
        }
        Ok(Self { sigma2, ..self.clone() })
    }

    pub fn transition(&self) -> Vec<Vec<f64>> {
        let r = self.r;
        (0..r)
            .map(|i| {
                (0..r)
                    .map(|j| {
                        let first = if j == 0 { self.ar[i] } else { 0.0 };
                        let shift = if j == i + 1 { 1.0 } else { 0.0 };
                        first + shift
                    })
                    .collect()
            })
            .collect()
    }

    pub fn design(&self) -> Vec<f64> {
        let mut z = vec![0.0; self.r];
        z[0] = 1.0;
        z
    }

    pub fn state_loading(&self) -> Vec<f64> {
        std::iter::once(1.0).chain(self.ma.iter().copied()).collect()
    }

    pub fn is_stationary(&self) -> bool {
        ar_to_pacf(self.ar()).is_some()
    }

    /// Autocovariances `gamma(0..=max_lag)` of the modelled process.
    pub fn autocovariances(&self, max_lag: usize) -> Result<Vec<f64>> {
        if !self.is_stationary() {
            return Err(Error::NonStationary);
        }
        let (gamma, _) = arma_moments(self.ar(), &self.ma, max_lag)?;
        Ok(gamma.into_iter().map(|g| g * self.sigma2).collect())
    }

    /// Stationary state covariance (row-major `r x r`).
    pub fn stationary_covariance(&self) -> Result<Vec<f64>> {
        if !self.is_stationary() {
            return Err(Error::NonStationary);
        }
        let r = self.r;
        let (gamma, psi) = arma_moments(self.ar(), &self.ma, r)?;

        // state element i as sums over y_{t-a} and e_{t-b}
        let mut y_terms: Vec<Vec<(usize, f64)>> = vec![Vec::new(); r];
        let mut e_terms: Vec<Vec<(usize, f64)>> = vec![Vec::new(); r];
        y_terms[0].push((0, 1.0));
        for i in 1..r {
            for k in i..r {
                if self.ar[k] != 0.0 {
                    y_terms[i].push((k - i + 1, self.ar[k]));
                }
                if self.ma[k - 1] != 0.0 {
                    e_terms[i].push((k - i, self.ma[k - 1]));
                }
            }
        }
        let cross = |ys: &[(usize, f64)], es: &[(usize, f64)]| -> f64 {
            let mut s = 0.0;
            for &(a, c) in ys {
                for &(b, e) in es {
                    if b >= a {
                        s += c * e * psi[b - a];
                    }
                }
            }
            s
        };

        let mut cov = vec![0.0; r * r];
        for i in 0..r {
            for j in i..r {
                let mut s = 0.0;
                for &(a, ci) in &y_terms[i] {
                    for &(a2, cj) in &y_terms[j] {
                        s += ci * cj * gamma[a.abs_diff(a2)];
                    }
                }
                s += cross(&y_terms[i], &e_terms[j]);
                s += cross(&y_terms[j], &e_terms[i]);
                for &(b, ei) in &e_terms[i] {
                    for &(b2, ej) in &e_terms[j] {
                        if b == b2 {
                            s += ei * ej;
                        }
                    }
                }
                cov[i * r + j] = s * self.sigma2;
                cov[j * r + i] = s * self.sigma2;
            }
        }
        Ok(cov)
    }

    fn predict_mean(&self, a: &mut [f64]) {
        let r = self.r;
        let a0 = a[0];
        for i in 0..r {
            let next = if i + 1 < r { a[i + 1] } else { 0.0 };
            a[i] = self.ar[i] * a0 + next;
        }
    }

    /// `T P T' + sigma2 R R'` into `out`, using `scratch` for `T P`.
    fn predict_cov(&self, p: &[f64], scratch: &mut [f64], out: &mut [f64]) {
        let r = self.r;
        for i in 0..r {
            for j in 0..r {
                let below = if i + 1 < r { p[(i + 1) * r + j] } else { 0.0 };
                scratch[i * r + j] = self.ar[i] * p[j] + below;
            }
        }
        for i in 0..r {
            for j in 0..r {
                let right = if j + 1 < r { scratch[i * r + j + 1] } else { 0.0 };
                out[i * r + j] = scratch[i * r] * self.ar[j] + right;
            }
        }
        let load = |i: usize| if i == 0 { 1.0 } else { self.ma[i - 1] };
        for i in 0..r {
            for j in 0..r {
                out[i * r + j] += self.sigma2 * load(i) * load(j);
            }
        }
        symmetrize(out, r);
    }
}

/// ARMA autocovariances `gamma(0..=max_lag)` and psi-weights `psi(0..=max_lag)`
/// for unit innovation variance.
pub fn arma_moments(ar: &[f64], ma: &[f64], max_lag: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    let p = ar.len();
    let q = ma.len();
    let theta = |j: usize| -> f64 {
        match j {
            0 => 1.0,
            j if j <= q => ma[j - 1],
            _ => 0.0,
        }
    };
    let m = max_lag.max(p).max(q);
    let mut psi = vec![0.0; m + 1];
    for j in 0..=m {
        let mut v = theta(j);
        for i in 1..=j.min(p) {
            v += ar[i - 1] * psi[j - i];
        }
        psi[j] = v;
    }
    let rhs = |k: usize| -> f64 { (k..=q).map(|j| theta(j) * psi[j - k]).sum() };

    let mut gamma = vec![0.0; m + 1];
    if p == 0 {
        for (k, g) in gamma.iter_mut().enumerate() {
            *g = rhs(k);
        }
    } else {
        let mut a = vec![vec![0.0; p + 1]; p + 1];
        let mut b = vec![0.0; p + 1];
        for k in 0..=p {
            a[k][k] += 1.0;
            for i in 1..=p {
                a[k][k.abs_diff(i)] -= ar[i - 1];
            }
            b[k] = rhs(k);
        }
        let head = linalg::solve(&a, &b)?;
        gamma[..=p].copy_from_slice(&head);
        for k in p + 1..=m {
            let mut v = rhs(k);
            for i in 1..=p {
                v += ar[i - 1] * gamma[k - i];
            }
            gamma[k] = v;
        }
    }
    if !(gamma[0] > 0.0) || gamma.iter().any(|g| !g.is_finite()) {
        return Err(Error::Singular("ARMA autocovariance system"));
    }
    gamma.truncate(max_lag + 1);
    psi.truncate(max_lag + 1);
    Ok((gamma, psi))
}

fn symmetrize(m: &mut [f64], r: usize) {
    for i in 0..r {
        for j in i + 1..r {
            let avg = 0.5 * (m[i * r + j] + m[j * r + i]);
            m[i * r + j] = avg;
            m[j * r + i] = avg;
        }
    }
}

/// Filtered state after `t` observations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterState {
    mean: Vec<f64>,
    cov: Vec<f64>,
    loglik: f64,
    t: usize,
}

/// One-step prediction error and its variance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Innovation {
    pub error: f64,
    pub variance: f64,
}

impl FilterState {
    /// Stationary prior: mean zero, covariance solving the Lyapunov equation.
    pub fn initial(model: &StateSpaceModel) -> Result<Self> {
        Ok(Self {
            mean: vec![0.0; model.r],
            cov: model.stationary_covariance()?,
            loglik: 0.0,
            t: 0,
        })
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    /// Row-major covariance.
    pub fn cov(&self) -> &[f64] {
        &self.cov
    }

    pub fn loglik(&self) -> f64 {
        self.loglik
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    /// Mean and variance of the next observation.
    pub fn predict_observation(&self, model: &StateSpaceModel) -> (f64, f64) {
        let mut a = self.mean.clone();
        model.predict_mean(&mut a);
        let r = model.r;
        let mut scratch = vec![0.0; r * r];
        let mut p = vec![0.0; r * r];
        model.predict_cov(&self.cov, &mut scratch, &mut p);
        (a[0], p[0])
    }

    /// Predicts one step and conditions on observation `y`.
    pub fn step(&mut self, model: &StateSpaceModel, y: f64) -> Result<Innovation> {
        if !y.is_finite() {
            return Err(Error::InvalidParameter("non-finite observation".into()));
        }
        let r = model.r;
        let mut scratch = vec![0.0; r * r];
        let mut pred = vec![0.0; r * r];
        model.predict_mean(&mut self.mean);
        model.predict_cov(&self.cov, &mut scratch, &mut pred);
        let f = pred[0];
        if !(f > 0.0) || !f.is_finite() {
            return Err(Error::Singular("Kalman prediction variance"));
        }
        let gain: Vec<f64> = (0..r).map(|i| pred[i * r] / f).collect();
        let v = y - self.mean[0];
        for (a, k) in self.mean.iter_mut().zip(&gain) {
            *a += k * v;
        }
        joseph_update(&pred, &gain, &mut self.cov, &mut scratch, r);
        self.loglik += -0.5 * (LN_2PI + f.ln() + v * v / f);
        self.t += 1;
        Ok(Innovation {
            error: v,
            variance: f,
        })
    }
}

/// Joseph-form update `(I - K Z) P (I - K Z)'` for `Z = e_0` and no
/// measurement noise, written into `out`.
fn joseph_update(pred: &[f64], gain: &[f64], out: &mut [f64], scratch: &mut [f64], r: usize) {
    // A = P - K P[0, :]
    for i in 0..r {
        for j in 0..r {
            scratch[i * r + j] = pred[i * r + j] - gain[i] * pred[j];
        }
    }
    // A - A[:, 0] K'
    for i in 0..r {
        let ai0 = scratch[i * r];
        for j in 0..r {
            out[i * r + j] = scratch[i * r + j] - ai0 * gain[j];
        }
    }
    symmetrize(out, r);
}

/// Shared covariance recursion; the gain sequence does not depend on the data,
/// so several series can be filtered with one pass.
pub(crate) struct CovarianceRecursion<'m> {
    model: &'m StateSpaceModel,
    filtered: Vec<f64>,
    pred: Vec<f64>,
    scratch: Vec<f64>,
    gain: Vec<f64>,
    f: f64,
    steady: bool,
}

impl<'m> CovarianceRecursion<'m> {
    pub(crate) fn new(model: &'m StateSpaceModel, init_cov: Vec<f64>) -> Self {
        let r = model.r;
        Self {
            model,
            filtered: init_cov,
            pred: vec![0.0; r * r],
            scratch: vec![0.0; r * r],
            gain: vec![0.0; r],
            f: 0.0,
            steady: false,
        }
    }

    /// Advances one step; returns the prediction variance (the gain is in `self.gain`).
    pub(crate) fn advance(&mut self) -> Result<f64> {
        if self.steady {
            return Ok(self.f);
        }
        let r = self.model.r;
        self.model.predict_cov(&self.filtered, &mut self.scratch, &mut self.pred);
        let f = self.pred[0];
        if !(f > 0.0) || !f.is_finite() {
            return Err(Error::Singular("Kalman prediction variance"));
        }
        for i in 0..r {
            self.gain[i] = self.pred[i * r] / f;
        }
        let prev = std::mem::take(&mut self.filtered);
        let mut next = vec![0.0; r * r];
        joseph_update(&self.pred, &self.gain, &mut next, &mut self.scratch, r);
        let scale = next.iter().fold(1.0_f64, |m, v| m.max(v.abs()));
        let change = next.iter().zip(&prev).fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
        if self.f > 0.0 && change <= STEADY_TOL * scale && (f - self.f).abs() <= STEADY_TOL * f {
            self.steady = true;
        }
        self.filtered = next;
        self.f = f;
        Ok(f)
    }

    pub(crate) fn gain(&self) -> &[f64] {
        &self.gain
    }

    pub(crate) fn filtered_cov(&self) -> &[f64] {
        &self.filtered
    }
}

/// Innovations of several data columns under one model.
pub(crate) struct MultiInnovations {
    /// `errors[c][t]`
    pub errors: Vec<Vec<f64>>,
    pub variances: Vec<f64>,
}

pub(crate) fn filter_columns(model: &StateSpaceModel, columns: &[&[f64]]) -> Result<MultiInnovations> {
    let n = columns.first().map_or(0, |c| c.len());
    let r = model.r;
    let mut rec = CovarianceRecursion::new(model, model.stationary_covariance()?);
    let mut means = vec![vec![0.0; r]; columns.len()];
    let mut errors = vec![Vec::with_capacity(n); columns.len()];
    let mut variances = Vec::with_capacity(n);
    for t in 0..n {
        let f = rec.advance()?;
        variances.push(f);
        for (c, col) in columns.iter().enumerate() {
            let a = &mut means[c];
            model.predict_mean(a);
            let v = col[t] - a[0];
            for (ai, k) in a.iter_mut().zip(rec.gain()) {
                *ai += k * v;
            }
            errors[c].push(v);
        }
    }
    Ok(MultiInnovations { errors, variances })
}

/// Full filter pass from the stationary prior.
#[derive(Debug, Clone)]
pub struct FilterOutput {
    pub state: FilterState,
    pub errors: Vec<f64>,
    pub variances: Vec<f64>,
}

pub fn kalman_filter(model: &StateSpaceModel, data: &[f64]) -> Result<FilterOutput> {
    if data.is_empty() {
        return Err(Error::Empty("filter data"));
    }
    if data.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter("non-finite observation".into()));
    }
    let r = model.r;
    let mut rec = CovarianceRecursion::new(model, model.stationary_covariance()?);
    let mut a = vec![0.0; r];
    let mut errors = Vec::with_capacity(data.len());
    let mut variances = Vec::with_capacity(data.len());
    let mut loglik = 0.0;
    for &y in data {
        let f = rec.advance()?;
        model.predict_mean(&mut a);
        let v = y - a[0];
        for (ai, k) in a.iter_mut().zip(rec.gain()) {
            *ai += k * v;
        }
        loglik += -0.5 * (LN_2PI + f.ln() + v * v / f);
        errors.push(v);
        variances.push(f);
    }
    Ok(FilterOutput {
        state: FilterState {
            mean: a,
            cov: rec.filtered_cov().to_vec(),
            loglik,
            t: data.len(),
        },
        errors,
        variances,
    })
}

/// Exact Gaussian log-likelihood. Numerical breakdown of the filter yields
/// `-inf`; a non-stationary model is an error.
pub fn kalman_loglik(model: &StateSpaceModel, data: &[f64]) -> Result<f64> {
    if data.is_empty() {
        return Err(Error::Empty("filter data"));
    }
    if !model.is_stationary() {
        return Err(Error::NonStationary);
    }
    match kalman_filter(model, data) {
        Ok(out) if out.state.loglik.is_finite() => Ok(out.state.loglik),
        Ok(_) | Err(Error::Singular(_)) => Ok(f64::NEG_INFINITY),
        Err(e) => Err(e),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Forecast {
    pub mean: f64,
    pub variance: f64,
}

/// Propagates the state `steps` periods ahead without observations.
pub fn advance(model: &StateSpaceModel, state: &FilterState, steps: usize) -> FilterState {
    let r = model.r;
    let mut out = state.clone();
    let mut scratch = vec![0.0; r * r];
    let mut next = vec![0.0; r * r];
    for _ in 0..steps {
        model.predict_mean(&mut out.mean);
        model.predict_cov(&out.cov, &mut scratch, &mut next);
        std::mem::swap(&mut out.cov, &mut next);
    }
    out.t += steps;
    out
}

/// `h`-step-ahead predictive means and variances for `h = 1..=horizon`.
pub fn kalman_forecast(model: &StateSpaceModel, terminal: &FilterState, horizon: usize) -> Vec<Forecast> {
    let r = model.r;
    let mut a = terminal.mean.clone();
    let mut p = terminal.cov.clone();
    let mut scratch = vec![0.0; r * r];
    let mut next = vec![0.0; r * r];
    let mut out = Vec::with_capacity(horizon);
    for _ in 0..horizon {
        model.predict_mean(&mut a);
        model.predict_cov(&p, &mut scratch, &mut next);
        std::mem::swap(&mut p, &mut next);
        out.push(Forecast {
            mean: a[0],
            variance: p[0],
        });
    }
    out
}
