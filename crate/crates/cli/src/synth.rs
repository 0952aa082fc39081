//! Seeded synthetic telemetry: daily traffic profile, SARIMA noise, an
//! optional level shift and randomly dropped samples.

use std::f64::consts::TAU;

use chrono::{DateTime, Datelike, Duration, Timelike, Utc, Weekday};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use trafficcast::io::{format_timestamp, parse_timestamp};
use trafficcast::sarimax::{simulate_sarima, ModelOrder, SarimaxParams, SeasonalOrder};

use crate::config::SynthConfig;
use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TelemetryRecord {
    pub timestamp: String,
    /// Bits per second; `None` for a dropped sample.
    pub value: Option<f64>,
}

/// Daily shape in `[-1, 1]`, lowest around 05:00 and highest around 21:00.
fn daily_shape(t: DateTime<Utc>) -> f64 {
    let hours = t.num_seconds_from_midnight() as f64 / 3600.0;
    let phase = TAU * (hours - 21.0) / 24.0;
    0.75 * phase.cos() + 0.25 * (2.0 * phase).cos()
}

fn noise(cfg: &SynthConfig, n: usize, seed: u64) -> CliResult<Vec<f64>> {
    let nc = &cfg.noise;
    let bad = |e: trafficcast::Error| CliError::Config(format!("synth.noise: {e}"));
    let order = ModelOrder::new(nc.ar.len(), 0, nc.ma.len()).map_err(bad)?;
    let seasonal = if nc.seasonal_ar.is_empty() && nc.seasonal_ma.is_empty() {
        SeasonalOrder::none()
    } else {
        SeasonalOrder::new(nc.seasonal_ar.len(), 0, nc.seasonal_ma.len(), nc.period).map_err(bad)?
    };
    if !(nc.sigma_gbps > 0.0 && nc.sigma_gbps.is_finite()) {
        return Err(CliError::Config("synth.noise.sigma_gbps must be positive".into()));
    }
    let params = SarimaxParams {
        phi: nc.ar.clone(),
        theta: nc.ma.clone(),
        seasonal_phi: nc.seasonal_ar.clone(),
        seasonal_theta: nc.seasonal_ma.clone(),
        beta: vec![],
        mean: None,
        sigma2: nc.sigma_gbps * nc.sigma_gbps,
    };
    if !params.is_stationary() {
        return Err(CliError::Config("synth.noise: AR part is not stationary".into()));
    }
    simulate_sarima(order, seasonal, &params, n, seed).map_err(bad)
}

pub fn generate(cfg: &SynthConfig, interval_seconds: u32, seed: u64) -> CliResult<Vec<TelemetryRecord>> {
    let start = parse_timestamp(&cfg.start).map_err(|e| CliError::Config(format!("synth.start: {e}")))?;
    if cfg.days == 0 {
        return Err(CliError::Config("synth.days must be positive".into()));
    }
    if !(0.0..1.0).contains(&cfg.missing_fraction) {
        return Err(CliError::Config("synth.missing_fraction must be in [0, 1)".into()));
    }
    let per_day = (86_400 / interval_seconds) as usize;
    let n = cfg.days * per_day;
    let e = noise(cfg, n, seed)?;
    let shift_at = match &cfg.level_shift {
        Some(ls) if (0.0..=1.0).contains(&ls.at_fraction) && ls.factor > 0.0 => (ls.at_fraction * n as f64) as usize,
        Some(_) => return Err(CliError::Config("synth.level_shift needs at_fraction in [0, 1] and a positive factor".into())),
        None => n,
    };
    let factor = cfg.level_shift.as_ref().map_or(1.0, |ls| ls.factor);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    let floor = 0.05 * cfg.base_gbps.abs();
    Ok((0..n)
        .map(|i| {
            let t = start + Duration::seconds(i as i64 * interval_seconds as i64);
            let weekend = matches!(t.weekday(), Weekday::Sat | Weekday::Sun);
            let mut gbps = cfg.base_gbps + cfg.daily_amplitude_gbps * daily_shape(t);
            if weekend {
                gbps *= cfg.weekend_factor;
            }
            gbps += e[i];
            if i >= shift_at {
                gbps *= factor;
            }
            let dropped = rng.gen::<f64>() < cfg.missing_fraction;
            TelemetryRecord {
                timestamp: format_timestamp(t),
                value: (!dropped).then(|| (gbps.max(floor) * 1e9).round()),
            }
        })
        .collect())
}

/// JSON array with one record per line.
pub fn to_json(records: &[TelemetryRecord]) -> String {
    let mut out = String::from("[\n");
    for (i, r) in records.iter().enumerate() {
        out.push_str("  ");
        out.push_str(&serde_json::to_string(r).expect("records serialise"));
        out.push_str(if i + 1 < records.len() { ",\n" } else { "\n" });
    }
    out.push_str("]\n");
    out
}
