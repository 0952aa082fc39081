//! AIC grid search over ARIMA orders.

use std::cmp::Ordering;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::ExogMatrix;
use crate::sarimax::{fit, FitOptions, ModelOrder, SeasonalOrder};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub p_values: Vec<usize>,
    pub d: usize,
    pub q_values: Vec<usize>,
    #[serde(default)]
    pub seasonal: SeasonalOrder,
    #[serde(default)]
    pub include_mean: Option<bool>,
    pub timeout_per_candidate: Duration,
    /// Worker threads; `0` uses rayon's default.
    pub jobs: usize,
    pub seed: u64,
}

impl GridSpec {
    pub fn new(p_values: Vec<usize>, d: usize, q_values: Vec<usize>) -> Self {
        Self {
            p_values,
            d,
            q_values,
            seasonal: SeasonalOrder::none(),
            include_mean: None,
            timeout_per_candidate: Duration::from_secs(60),
            jobs: 0,
            seed: 0,
        }
    }

    /// Candidate orders in grid order (p outer, q inner).
    pub fn orders(&self) -> Result<Vec<ModelOrder>> {
        if self.p_values.is_empty() || self.q_values.is_empty() {
            return Err(Error::InvalidParameter("grid needs at least one p and one q".into()));
        }
        let mut out = Vec::with_capacity(self.p_values.len() * self.q_values.len());
        for &p in &self.p_values {
            for &q in &self.q_values {
                out.push(ModelOrder::new(p, self.d, q)?);
            }
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CandidateStatus {
    Converged,
    NotConverged,
    Timeout,
    Failed,
}

impl CandidateStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Converged => "converged",
            Self::NotConverged => "not_converged",
            Self::Timeout => "timeout",
            Self::Failed => "failed",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub order: ModelOrder,
    pub seasonal: SeasonalOrder,
    /// `NaN` when the fit failed.
    pub aic: f64,
    pub loglik: f64,
    pub status: CandidateStatus,
    pub seconds: f64,
    pub message: Option<String>,
}

impl Candidate {
    pub fn converged(&self) -> bool {
        self.status == CandidateStatus::Converged
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedCandidates {
    pub rows: Vec<Candidate>,
}

fn status_rank(s: CandidateStatus) -> u8 {
    match s {
        CandidateStatus::Converged => 0,
        CandidateStatus::NotConverged => 1,
        CandidateStatus::Timeout => 2,
        CandidateStatus::Failed => 3,
    }
}

fn tie_break(a: &ModelOrder, b: &ModelOrder) -> Ordering {
    (a.p + a.q, a.p, a.q).cmp(&(b.p + b.q, b.p, b.q))
}

fn rank_cmp(a: &Candidate, b: &Candidate) -> Ordering {
    status_rank(a.status)
        .cmp(&status_rank(b.status))
        .then_with(|| a.aic.total_cmp(&b.aic))
        .then_with(|| tie_break(&a.order, &b.order))
}

impl RankedCandidates {
    /// Sorts converged rows by AIC ahead of everything else.
    pub fn from_rows(mut rows: Vec<Candidate>) -> Self {
        rows.sort_by(rank_cmp);
        Self { rows }
    }

    pub fn top(&self, n: usize) -> &[Candidate] {
        &self.rows[..n.min(self.rows.len())]
    }

    pub fn converged(&self) -> impl Iterator<Item = &Candidate> {
        self.rows.iter().filter(|c| c.converged())
    }
}

/// Minimum-AIC converged order; ties go to smaller `p + q`, then smaller `p`.
pub fn best(ranked: &RankedCandidates) -> Result<ModelOrder> {
    ranked
        .converged()
        .min_by(|a, b| a.aic.total_cmp(&b.aic).then_with(|| tie_break(&a.order, &b.order)))
        .map(|c| c.order)
        .ok_or(Error::NoConvergedCandidate)
}

fn evaluate(y: &[f64], exog: Option<&ExogMatrix>, spec: &GridSpec, order: ModelOrder, index: usize) -> Candidate {
    let start = Instant::now();
    let opts = FitOptions {
        include_mean: spec.include_mean,
        seed: spec.seed.wrapping_add(index as u64),
        deadline: Some(start + spec.timeout_per_candidate),
        ..Default::default()
    };
    let result = fit(y, order, spec.seasonal, exog, &opts);
    let seconds = start.elapsed().as_secs_f64();
    match result {
        Ok(m) => {
            let status = if m.converged {
                CandidateStatus::Converged
            } else if m.timed_out {
                CandidateStatus::Timeout
            } else {
                CandidateStatus::NotConverged
            };
            Candidate {
                order,
                seasonal: spec.seasonal,
                aic: m.aic,
                loglik: m.loglik,
                status,
                seconds,
                message: None,
            }
        }
        Err(e) => Candidate {
            order,
            seasonal: spec.seasonal,
            aic: f64::NAN,
            loglik: f64::NAN,
            status: CandidateStatus::Failed,
            seconds,
            message: Some(e.to_string()),
        },
    }
}

/// Fits every order in the grid concurrently and ranks them by AIC.
///
/// Each candidate's optimizer seed is derived from the grid seed and the
/// candidate's grid position, so results do not depend on scheduling.
pub fn grid_search(y: &[f64], exog: Option<&ExogMatrix>, spec: &GridSpec) -> Result<RankedCandidates> {
    let orders = spec.orders()?;
    spec.seasonal.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(spec.jobs)
        .build()
        .map_err(|e| Error::InvalidParameter(format!("worker pool: {e}")))?;
    let rows: Vec<Candidate> = pool.install(|| {
        orders
            .par_iter()
            .enumerate()
            .map(|(i, &o)| evaluate(y, exog, spec, o, i))
            .collect()
    });
    if rows.iter().all(|c| c.status == CandidateStatus::Failed) {
        return Err(Error::AllCandidatesFailed(
            rows.iter()
                .map(|c| format!("{}: {}", c.order, c.message.as_deref().unwrap_or("failed")))
                .collect(),
        ));
    }
    Ok(RankedCandidates::from_rows(rows))
}
