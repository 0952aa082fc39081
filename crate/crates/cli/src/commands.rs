//! The eight subcommands. Each returns the items it processed; the caller
//! writes the manifest and maps the outcome to an exit code.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Duration;

use chrono::{DateTime, Utc};
use serde::Serialize;

use trafficcast::diagnostics::{acf, adf_test, decompose_additive, dominant_period, pacf, AdfResult};
use trafficcast::evaluation::{compare, fit_spec, ExogSplit, Fitted};
use trafficcast::features::{extract_features, ExogMatrix, DAY_PART_COLUMNS, WEEKEND_COLUMN};
use trafficcast::holt_winters;
use trafficcast::io::{format_sig, format_timestamp, parse_records, read_canonical_csv, write_canonical_csv};
use trafficcast::model_io::{ModelEnvelope, SavedModel};
use trafficcast::sarimax::{SarimaxPredictor, SeasonalOrder};
use trafficcast::selection::{grid_search, CandidateStatus, GridSpec};
use trafficcast::series::{impute_mean, ingest_raw, rescale_to_gbps, split, trim_incomplete_days, RawRecord, SplitSpec};
use trafficcast::{Error, TimeSeries};

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};
use crate::manifest::ItemStatus;
use crate::synth;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Synth,
    Ingest,
    Preprocess,
    Diagnose,
    Gridsearch,
    Fit,
    Forecast,
    Evaluate,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Synth => "synth",
            Self::Ingest => "ingest",
            Self::Preprocess => "preprocess",
            Self::Diagnose => "diagnose",
            Self::Gridsearch => "gridsearch",
            Self::Fit => "fit",
            Self::Forecast => "forecast",
            Self::Evaluate => "evaluate",
        }
    }
}

#[derive(Debug, Default)]
pub struct Outcome {
    pub items: Vec<ItemStatus>,
    pub outputs: Vec<PathBuf>,
    pub partial: bool,
}

impl Outcome {
    fn single(item: ItemStatus, outputs: Vec<PathBuf>) -> Self {
        Self {
            items: vec![item],
            outputs,
            partial: false,
        }
    }
}

pub fn execute(cmd: Command, cfg: &RunConfig) -> CliResult<Outcome> {
    fs::create_dir_all(&cfg.output_dir)
        .map_err(|e| CliError::io(format!("creating {}", cfg.output_dir.display()), e))?;
    match cmd {
        Command::Synth => cmd_synth(cfg),
        Command::Ingest => cmd_ingest(cfg),
        Command::Preprocess => cmd_preprocess(cfg),
        Command::Diagnose => cmd_diagnose(cfg),
        Command::Gridsearch => cmd_gridsearch(cfg),
        Command::Fit => cmd_fit(cfg),
        Command::Forecast => cmd_forecast(cfg),
        Command::Evaluate => cmd_evaluate(cfg),
    }
}

fn write_out(path: &Path, bytes: impl AsRef<[u8]>) -> CliResult<PathBuf> {
    fs::write(path, bytes).map_err(|e| CliError::io(format!("writing {}", path.display()), e))?;
    Ok(path.to_path_buf())
}

fn read_in(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| CliError::io(format!("reading {}", path.display()), e))
}

fn pool(cfg: &RunConfig) -> CliResult<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.jobs)
        .build()
        .map_err(|e| CliError::Config(format!("jobs: {e}")))
}

pub fn load_series(cfg: &RunConfig) -> CliResult<TimeSeries> {
    let path = cfg.series_path();
    let text = read_in(&path)?;
    read_canonical_csv(text.as_bytes(), cfg.interval_seconds)
        .map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))
}

fn split_series(cfg: &RunConfig, series: &TimeSeries) -> CliResult<(TimeSeries, TimeSeries)> {
    let spec = SplitSpec::from_days(cfg.split.train_days, cfg.split.test_days, cfg.samples_per_day());
    split(series, spec).map_err(|e| CliError::Validation(format!("split: {e}")))
}

/// Calendar regressors for `timestamps`, restricted to the enabled groups.
pub fn features(cfg: &RunConfig, timestamps: &[DateTime<Utc>]) -> CliResult<ExogMatrix> {
    let all = extract_features(timestamps);
    let keep: Vec<usize> = all
        .column_names()
        .iter()
        .enumerate()
        .filter(|(_, n)| {
            if n.as_str() == WEEKEND_COLUMN {
                cfg.features.weekend
            } else {
                cfg.features.day_parts && DAY_PART_COLUMNS.contains(&n.as_str())
            }
        })
        .map(|(j, _)| j)
        .collect();
    if keep.is_empty() {
        return Err(CliError::Config("features: exogenous model requested with every feature group disabled".into()));
    }
    let names = keep.iter().map(|&j| all.column_names()[j].clone()).collect();
    let rows = all.rows().iter().map(|r| keep.iter().map(|&j| r[j]).collect()).collect();
    Ok(ExogMatrix::new(names, rows)?)
}

fn future_timestamps(first: DateTime<Utc>, interval: u32, n: usize) -> Vec<DateTime<Utc>> {
    (0..n)
        .map(|k| first + chrono::Duration::seconds(k as i64 * interval as i64))
        .collect()
}

fn cmd_synth(cfg: &RunConfig) -> CliResult<Outcome> {
    let records = synth::generate(&cfg.synth, cfg.interval_seconds, cfg.seed)?;
    let missing = records.iter().filter(|r| r.value.is_none()).count();
    let path = write_out(&cfg.output_dir.join("telemetry.json"), synth::to_json(&records))?;
    let msg = format!("{} records, {missing} dropped", records.len());
    println!("wrote {} ({msg})", path.display());
    Ok(Outcome::single(ItemStatus::new("telemetry", "ok", Some(msg)), vec![path]))
}

/// Where record `index` sits in the source text.
fn locate(text: &str, index: usize) -> String {
    match text.trim_start().chars().next() {
        Some('[') => format!("record {}", index + 1),
        Some(c) => {
            // CSV has a header row; NDJSON does not
            let skip = usize::from(c != '{');
            let line = text
                .lines()
                .enumerate()
                .filter(|(_, l)| !l.trim().is_empty())
                .nth(index + skip)
                .map_or(index + skip + 1, |(i, _)| i + 1);
            format!("line {line}")
        }
        None => "input".into(),
    }
}

fn ordering_error(text: &str, records: &[RawRecord], ts: DateTime<Utc>, what: &str) -> CliError {
    let index = records
        .windows(2)
        .position(|w| w[1].timestamp == ts && w[1].timestamp <= w[0].timestamp)
        .map(|i| i + 1);
    let at = index.map_or_else(|| "input".to_string(), |i| locate(text, i));
    CliError::Validation(format!("{at}: {what} timestamp {}", format_timestamp(ts)))
}

fn cmd_ingest(cfg: &RunConfig) -> CliResult<Outcome> {
    let input = cfg
        .input
        .as_ref()
        .ok_or_else(|| CliError::Config("ingest needs an input file (`input` or --input)".into()))?;
    let text = read_in(input)?;
    let invalid = |e: Error| CliError::Validation(format!("{}: {e}", input.display()));
    let records = parse_records(&text).map_err(invalid)?;
    let raw = ingest_raw(&records, cfg.interval_seconds).map_err(|e| match e {
        Error::DuplicateTimestamp(ts) => ordering_error(&text, &records, ts, "duplicate"),
        Error::NonMonotone(ts) => ordering_error(&text, &records, ts, "out-of-order"),
        other => invalid(other),
    })?;
    let raw = if cfg.trim_incomplete_days {
        trim_incomplete_days(raw).map_err(invalid)?
    } else {
        raw
    };
    let missing = raw.missing();
    let series = rescale_to_gbps(impute_mean(raw).map_err(invalid)?).map_err(invalid)?;
    eprintln!("imputed {missing} missing values");
    let mut buf = Vec::new();
    write_canonical_csv(&series, &mut buf)?;
    let path = write_out(&cfg.output_dir.join("series.csv"), buf)?;
    let msg = format!("{} samples, {missing} imputed", series.len());
    Ok(Outcome::single(ItemStatus::new("series", "ok", Some(msg)), vec![path]))
}

fn cmd_preprocess(cfg: &RunConfig) -> CliResult<Outcome> {
    let series = load_series(cfg)?;
    let (train, test) = split_series(cfg, &series)?;
    let dir = &cfg.output_dir;
    let mut outputs = Vec::new();
    for (name, part) in [("train", &train), ("test", &test)] {
        let mut buf = Vec::new();
        write_canonical_csv(part, &mut buf)?;
        outputs.push(write_out(&dir.join(format!("{name}.csv")), buf)?);
        let mut buf = Vec::new();
        features(cfg, &part.timestamps())?.write_csv(&mut buf)?;
        outputs.push(write_out(&dir.join(format!("exog_{name}.csv")), buf)?);
    }
    let msg = format!("train {} samples, test {} samples", train.len(), test.len());
    println!("{msg}");
    Ok(Outcome {
        items: vec![ItemStatus::new("split", "ok", Some(msg))],
        outputs,
        partial: false,
    })
}

#[derive(Serialize)]
struct Correlations {
    level: Vec<f64>,
    first_difference: Vec<f64>,
}

#[derive(Serialize)]
struct Diagnostics {
    n: usize,
    adf: AdfPair,
    acf: Correlations,
    pacf: Correlations,
    /// Two-sided 95% band, `2 / sqrt(n)`.
    confidence_band: f64,
    dominant_period: Option<usize>,
    decomposition_period: usize,
}

#[derive(Serialize)]
struct AdfPair {
    level: AdfResult,
    first_difference: AdfResult,
}

fn cmd_diagnose(cfg: &RunConfig) -> CliResult<Outcome> {
    let series = load_series(cfg)?;
    let y = series.values();
    let dy: Vec<f64> = y.windows(2).map(|w| w[1] - w[0]).collect();
    let lags = cfg.diagnose.max_lags;
    let invalid = |e: Error| CliError::Validation(format!("diagnose: {e}"));
    let adf = AdfPair {
        level: adf_test(y, cfg.diagnose.adf_lag).map_err(invalid)?,
        first_difference: adf_test(&dy, cfg.diagnose.adf_lag).map_err(invalid)?,
    };
    let period = cfg.diagnose.period.unwrap_or_else(|| cfg.samples_per_day());
    let report = Diagnostics {
        n: y.len(),
        acf: Correlations {
            level: acf(y, lags).map_err(invalid)?.values,
            first_difference: acf(&dy, lags).map_err(invalid)?.values,
        },
        pacf: Correlations {
            level: pacf(y, lags).map_err(invalid)?.values,
            first_difference: pacf(&dy, lags).map_err(invalid)?.values,
        },
        confidence_band: 2.0 / (y.len() as f64).sqrt(),
        dominant_period: dominant_period(&dy, 2, lags).ok(),
        decomposition_period: period,
        adf,
    };
    let decomposition = decompose_additive(y, period).map_err(invalid)?;
    let mut csv = String::from("original,trend,seasonal,residual\n");
    let opt = |v: Option<f64>| v.map(|x| format_sig(x, 12)).unwrap_or_default();
    for t in 0..y.len() {
        let _ = writeln!(
            csv,
            "{},{},{},{}",
            format_sig(y[t], 12),
            opt(decomposition.trend[t]),
            format_sig(decomposition.seasonal[t], 12),
            opt(decomposition.residual[t])
        );
    }
    let mut json = serde_json::to_string_pretty(&report).map_err(Error::from)?;
    json.push('\n');
    let outputs = vec![
        write_out(&cfg.output_dir.join("diagnostics.json"), json)?,
        write_out(&cfg.output_dir.join("decomposition.csv"), csv)?,
    ];
    println!(
        "ADF level: stat {:.4}, p {:.4}; first difference: stat {:.4}, p {:.4}",
        report.adf.level.statistic, report.adf.level.p_value, report.adf.first_difference.statistic, report.adf.first_difference.p_value
    );
    Ok(Outcome {
        items: vec![ItemStatus::ok("adf"), ItemStatus::ok("correlations"), ItemStatus::ok("decomposition")],
        outputs,
        partial: false,
    })
}

fn optional_num(x: f64) -> String {
    if x.is_finite() {
        format_sig(x, 12)
    } else {
        String::new()
    }
}

fn cmd_gridsearch(cfg: &RunConfig) -> CliResult<Outcome> {
    let series = load_series(cfg)?;
    let (train, _) = split_series(cfg, &series)?;
    let g = &cfg.grid;
    if !(g.timeout_seconds >= 0.0 && g.timeout_seconds.is_finite()) {
        return Err(CliError::Config("grid.timeout_seconds must be non-negative".into()));
    }
    let spec = GridSpec {
        seasonal: if g.seasonal { cfg.seasonal.order()? } else { SeasonalOrder::none() },
        timeout_per_candidate: Duration::from_secs_f64(g.timeout_seconds),
        jobs: cfg.jobs,
        seed: cfg.seed,
        ..GridSpec::new(g.p.values(), g.d, g.q.values())
    };
    let exog = if g.exog { Some(features(cfg, &train.timestamps())?) } else { None };
    let ranked = grid_search(train.values(), exog.as_ref(), &spec)?;
    let mut csv = String::from("p,d,q,P,D,Q,S,aic,loglik,status,seconds\n");
    let mut items = Vec::with_capacity(ranked.rows.len());
    for c in &ranked.rows {
        let (o, s) = (c.order, c.seasonal);
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{},{},{},{},{},{:.3}",
            o.p,
            o.d,
            o.q,
            s.p,
            s.d,
            s.q,
            s.period,
            optional_num(c.aic),
            optional_num(c.loglik),
            c.status.as_str(),
            c.seconds
        );
        items.push(ItemStatus::new(format!("{o}{s}"), c.status.as_str(), c.message.clone()));
    }
    let path = write_out(&cfg.output_dir.join("gridsearch.csv"), csv)?;
    println!("{:>4} {:>12} {:>14} {:>14}  status", "rank", "order", "aic", "loglik");
    for (i, c) in ranked.top(cfg.top).iter().enumerate() {
        println!(
            "{:>4} {:>12} {:>14.6} {:>14.6}  {}",
            i + 1,
            c.order.to_string(),
            c.aic,
            c.loglik,
            c.status.as_str()
        );
    }
    let partial = ranked.rows.iter().any(|c| c.status != CandidateStatus::Converged);
    Ok(Outcome {
        items,
        outputs: vec![path],
        partial,
    })
}

fn model_path(cfg: &RunConfig, name: &str) -> PathBuf {
    cfg.output_dir.join(format!("model_{name}.json"))
}

fn cmd_fit(cfg: &RunConfig) -> CliResult<Outcome> {
    let model = cfg.fit_model()?;
    let spec = cfg.predictor(model)?;
    let series = load_series(cfg)?;
    let (train, test) = split_series(cfg, &series)?;
    let xs = if spec.exog {
        Some((features(cfg, &train.timestamps())?, features(cfg, &test.timestamps())?))
    } else {
        None
    };
    let split = xs.as_ref().map(|(a, b)| ExogSplit { train: a, test: b });
    let fitted = pool(cfg)?.install(|| fit_spec(&spec, train.values(), split)).map_err(|e| e.in_model(&spec.name))?;
    let (saved, item) = match fitted {
        Fitted::Sarimax(m) => {
            let status = if m.timed_out {
                "timeout"
            } else if m.converged {
                "converged"
            } else {
                "not_converged"
            };
            println!("{}: {}{} loglik {:.6} aic {:.6} ({status})", spec.name, m.order, m.seasonal, m.loglik, m.aic);
            let item = ItemStatus::new(&spec.name, status, None);
            (SavedModel::Sarimax(m), item)
        }
        Fitted::HoltWinters(f) => {
            println!(
                "{}: alpha {:.6} beta {:.6} gamma {:.6} sse {:.6}",
                spec.name, f.params.alpha, f.params.beta, f.params.gamma, f.sse
            );
            (SavedModel::HoltWinters(f), ItemStatus::new(&spec.name, "converged", None))
        }
    };
    let mut buf = Vec::new();
    ModelEnvelope::new(saved).write(&mut buf)?;
    buf.push(b'\n');
    let path = write_out(&model_path(cfg, &spec.name), buf)?;
    let partial = item.status != "converged";
    Ok(Outcome {
        items: vec![item],
        outputs: vec![path],
        partial,
    })
}

fn cmd_forecast(cfg: &RunConfig) -> CliResult<Outcome> {
    let name = cfg.fit_model()?.name.clone();
    let path = model_path(cfg, &name);
    let text = read_in(&path)?;
    let env = ModelEnvelope::read(text.as_bytes()).map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
    let series = load_series(cfg)?;
    let (train, test) = split_series(cfg, &series)?;
    let horizon = cfg.forecast.horizon.unwrap_or(test.len());
    if horizon == 0 {
        return Err(CliError::Config("forecast.horizon must be positive".into()));
    }
    let future = future_timestamps(train.end(), cfg.interval_seconds, horizon);
    let predictions = match &env.model {
        SavedModel::HoltWinters(f) => holt_winters::forecast(&f.state, horizon),
        SavedModel::Sarimax(m) => {
            let (hist_x, fut_x) = if m.has_exog() {
                let (a, b) = (features(cfg, &train.timestamps())?, features(cfg, &future)?);
                if a.column_names() != m.exog_names.as_slice() {
                    return Err(CliError::Validation(format!(
                        "{}: model was fit with features {:?}, config yields {:?}",
                        path.display(),
                        m.exog_names,
                        a.column_names()
                    )));
                }
                (Some(a), Some(b))
            } else {
                (None, None)
            };
            SarimaxPredictor::new(m, train.values(), hist_x.as_ref())?.forecast(horizon, fut_x.as_ref())?
        }
    };
    let actual = test.values();
    let mut csv = String::from("timestamp,actual_gbps,predicted_gbps\n");
    for (i, (t, p)) in future.iter().zip(&predictions).enumerate() {
        let a = actual.get(i).map(|v| format_sig(*v, 12)).unwrap_or_default();
        let _ = writeln!(csv, "{},{a},{}", format_timestamp(*t), format_sig(*p, 12));
    }
    let out = write_out(&cfg.output_dir.join(format!("forecast_{name}.csv")), csv)?;
    println!("{name}: {horizon} steps written to {}", out.display());
    Ok(Outcome::single(ItemStatus::ok(name), vec![out]))
}

fn trace_csv(test: &TimeSeries, predictions: &[f64]) -> String {
    let mut csv = String::from("timestamp,actual_gbps,predicted_gbps\n");
    for (i, (a, p)) in test.values().iter().zip(predictions).enumerate() {
        let _ = writeln!(csv, "{},{},{}", format_timestamp(test.timestamp(i)), format_sig(*a, 12), format_sig(*p, 12));
    }
    csv
}

fn pct(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.6}")).unwrap_or_default()
}

fn cmd_evaluate(cfg: &RunConfig) -> CliResult<Outcome> {
    let specs = cfg
        .models
        .iter()
        .map(|m| cfg.predictor(m))
        .collect::<CliResult<Vec<_>>>()?;
    let series = load_series(cfg)?;
    let (train, test) = split_series(cfg, &series)?;
    let xs = if specs.iter().any(|s| s.exog) {
        Some((features(cfg, &train.timestamps())?, features(cfg, &test.timestamps())?))
    } else {
        None
    };
    let split = xs.as_ref().map(|(a, b)| ExogSplit { train: a, test: b });
    let report = pool(cfg)?.install(|| compare(&specs, train.values(), test.values(), split))?;

    let mut csv = String::from("model,mape_standard_pct,mape_rolling_pct\n");
    let mut outputs = Vec::new();
    let mut items = Vec::new();
    println!("{:<16} {:>14} {:>14}", "model", "standard %", "rolling %");
    for row in &report.rows {
        let _ = writeln!(csv, "{},{},{}", row.name, pct(row.mape_standard), pct(row.mape_rolling));
        println!("{:<16} {:>14} {:>14}", row.name, pct(row.mape_standard), pct(row.mape_rolling));
        for (mode, trace) in [("standard", &row.standard), ("rolling", &row.rolling)] {
            if let Some(t) = trace {
                let path = cfg.output_dir.join(format!("trace_{}_{mode}.csv", row.name));
                outputs.push(write_out(&path, trace_csv(&test, &t.predictions))?);
            }
        }
        let item = match &row.error {
            Some(e) => ItemStatus::new(&row.name, "failed", Some(e.clone())),
            None => {
                let warnings: Vec<&str> = row.rolling.iter().flat_map(|t| t.warnings.iter().map(String::as_str)).collect();
                let msg = (!warnings.is_empty()).then(|| warnings.join("; "));
                ItemStatus::new(&row.name, "ok", msg)
            }
        };
        items.push(item);
    }
    outputs.insert(0, write_out(&cfg.output_dir.join("report.csv"), csv)?);
    let partial = report.rows.iter().any(|r| !r.ok());
    Ok(Outcome { items, outputs, partial })
}
