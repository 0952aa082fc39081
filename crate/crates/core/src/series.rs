//! Traffic time-series data model: ingestion onto a uniform sampling grid,
//! incomplete-day trimming, mean imputation, unit rescaling and splitting.

use chrono::{DateTime, Duration, Timelike, Utc};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const SECONDS_PER_DAY: u32 = 86_400;

/// Maximum distance, in milliseconds, a timestamp may sit from its grid slot.
const GRID_SLACK_MS: i64 = 1_000;

/// One raw telemetry sample: GMT timestamp and traffic rate in bits per second.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RawRecord {
    pub timestamp: DateTime<Utc>,
    pub value: Option<f64>,
}

impl RawRecord {
    pub fn new(timestamp: DateTime<Utc>, value: Option<f64>) -> Self {
        Self { timestamp, value }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Unit {
    Bps,
    Gbps,
}

/// Samples projected onto a uniform grid; gaps are `None`.
#[derive(Debug, Clone, PartialEq)]
pub struct RawSeries {
    start: DateTime<Utc>,
    interval_seconds: u32,
    values: Vec<Option<f64>>,
    imputed: usize,
}

impl RawSeries {
    pub fn new(start: DateTime<Utc>, interval_seconds: u32, values: Vec<Option<f64>>) -> Result<Self> {
        check_interval(interval_seconds)?;
        if values.is_empty() {
            return Err(Error::Empty("raw series"));
        }
        Ok(Self {
            start,
            interval_seconds,
            values,
            imputed: 0,
        })
    }

    pub fn start(&self) -> DateTime<Utc> {
        self.start
    }

    pub fn interval_seconds(&self) -> u32 {
        self.interval_seconds
    }

    pub fn values(&self) -> &[Option<f64>] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn samples_per_day(&self) -> usize {
        (SECONDS_PER_DAY / self.interval_seconds) as usize
    }

    pub fn missing(&self) -> usize {
        self.values.iter().filter(|v| v.is_none()).count()
    }

    /// Number of entries filled by imputation so far.
    pub fn imputed(&self) -> usize {
        self.imputed
    }
}

/// Uniformly sampled, gap-free series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries {
    start: DateTime<Utc>,
    interval_seconds: u32,
    values: Vec<f64>,
    unit: Unit,
    imputed: usize,
}

impl TimeSeries {
    pub fn new(start: DateTime<Utc>, interval_seconds: u32, values: Vec<f64>, unit: Unit) -> Result<Self> {
        check_interval(interval_seconds)?;
        if values.is_empty() {
            return Err(Error::Empty("time series"));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(format!("non-finite value at index {i}")));
        }
        Ok(Self {
            start,
            interval_seconds,
            values,
            unit,
            imputed: 0,
        })
    }

    /// Convenience constructor for unit-less numeric work: 5-minute grid from the Unix epoch.
    pub fn from_values(values: Vec<f64>) -> Result<Self> {
        Self::new(DateTime::<Utc>::UNIX_EPOCH, 300, values, Unit::Gbps)
    }

    pub fn start(&self) -> DateTime<Utc> {
        self.start
    }

    pub fn interval_seconds(&self) -> u32 {
        self.interval_seconds
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn unit(&self) -> Unit {
        self.unit
    }

    pub fn imputed(&self) -> usize {
        self.imputed
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn samples_per_day(&self) -> usize {
        (SECONDS_PER_DAY / self.interval_seconds) as usize
    }

    pub fn timestamp(&self, i: usize) -> DateTime<Utc> {
        self.start + Duration::seconds(i as i64 * self.interval_seconds as i64)
    }

    pub fn timestamps(&self) -> Vec<DateTime<Utc>> {
        (0..self.len()).map(|i| self.timestamp(i)).collect()
    }

    /// Timestamp of the sample following the last one.
    pub fn end(&self) -> DateTime<Utc> {
        self.timestamp(self.len())
    }

    /// Same grid and metadata, different values.
    pub fn with_values(&self, values: Vec<f64>) -> Result<Self> {
        let mut out = Self::new(self.start, self.interval_seconds, values, self.unit)?;
        out.imputed = self.imputed;
        Ok(out)
    }

    /// Appends one observation at the next grid slot.
    pub fn push(&mut self, value: f64) -> Result<()> {
        if !value.is_finite() {
            return Err(Error::InvalidParameter("non-finite observation".into()));
        }
        self.values.push(value);
        Ok(())
    }
}

/// Train/test lengths, in samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub train_len: usize,
    pub test_len: usize,
}

impl SplitSpec {
    pub fn new(train_len: usize, test_len: usize) -> Self {
        Self { train_len, test_len }
    }

    pub fn from_days(train_days: usize, test_days: usize, samples_per_day: usize) -> Self {
        Self::new(train_days * samples_per_day, test_days * samples_per_day)
    }
}

fn check_interval(interval_seconds: u32) -> Result<()> {
    if interval_seconds == 0 || SECONDS_PER_DAY % interval_seconds != 0 {
        return Err(Error::InvalidParameter(format!(
            "interval {interval_seconds}s must be positive and divide a day"
        )));
    }
    Ok(())
}

/// Places records on the `interval_seconds` grid anchored at the Unix epoch.
///
/// Records must be strictly increasing and sit within one second of a grid
/// slot; slots without a record become missing entries.
pub fn ingest_raw(records: &[RawRecord], interval_seconds: u32) -> Result<RawSeries> {
    check_interval(interval_seconds)?;
    let first = records.first().ok_or(Error::Empty("records"))?;
    let step_ms = interval_seconds as i64 * 1000;

    let slot_of = |ts: DateTime<Utc>| -> Result<i64> {
        let ms = ts.timestamp_millis();
        let slot = (ms as f64 / step_ms as f64).round() as i64;
        if (ms - slot * step_ms).abs() > GRID_SLACK_MS {
            return Err(Error::OffGrid(ts, interval_seconds));
        }
        Ok(slot)
    };

    let first_slot = slot_of(first.timestamp)?;
    let mut values: Vec<Option<f64>> = Vec::with_capacity(records.len());
    let mut prev: Option<(DateTime<Utc>, i64)> = None;

    for rec in records {
        let slot = slot_of(rec.timestamp)?;
        if let Some((prev_ts, prev_slot)) = prev {
            if rec.timestamp == prev_ts || slot == prev_slot {
                return Err(Error::DuplicateTimestamp(rec.timestamp));
            }
            if rec.timestamp < prev_ts {
                return Err(Error::NonMonotone(rec.timestamp));
            }
        }
        if let Some(v) = rec.value {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::InvalidValue {
                    at: rec.timestamp,
                    value: v,
                });
            }
        }
        let idx = (slot - first_slot) as usize;
        values.resize(idx, None);
        values.push(rec.value);
        prev = Some((rec.timestamp, slot));
    }

    let start = DateTime::<Utc>::from_timestamp_millis(first_slot * step_ms)
        .ok_or_else(|| Error::InvalidParameter("timestamp out of range".into()))?;
    RawSeries::new(start, interval_seconds, values)
}

/// Drops a trailing partial day. The series must start at midnight GMT.
pub fn trim_incomplete_days(series: RawSeries) -> Result<RawSeries> {
    let start = series.start;
    if start.num_seconds_from_midnight() != 0 || start.nanosecond() != 0 {
        return Err(Error::NotDayAligned(start));
    }
    let per_day = series.samples_per_day();
    if series.len() < per_day {
        return Err(Error::TooShort {
            needed: per_day,
            have: series.len(),
        });
    }
    let keep = series.len() / per_day * per_day;
    let mut out = series;
    out.values.truncate(keep);
    Ok(out)
}

/// Fills every missing entry with the global mean of the observed entries.
pub fn impute_mean(series: RawSeries) -> Result<RawSeries> {
    let observed: Vec<f64> = series.values.iter().flatten().copied().collect();
    if observed.is_empty() {
        return Err(Error::AllMissing);
    }
    let mean = observed.iter().sum::<f64>() / observed.len() as f64;
    let missing = series.missing();
    let mut out = series;
    for v in out.values.iter_mut().filter(|v| v.is_none()) {
        *v = Some(mean);
    }
    out.imputed += missing;
    Ok(out)
}

/// Converts bits per second to gigabits per second.
pub fn rescale_to_gbps(series: RawSeries) -> Result<TimeSeries> {
    let values = series
        .values
        .iter()
        .map(|v| v.map(|x| x / 1e9).ok_or(Error::HasMissing))
        .collect::<Result<Vec<_>>>()?;
    let mut out = TimeSeries::new(series.start, series.interval_seconds, values, Unit::Gbps)?;
    out.imputed = series.imputed;
    Ok(out)
}

/// Splits off the first `train_len` samples and the `test_len` samples after them.
pub fn split(series: &TimeSeries, spec: SplitSpec) -> Result<(TimeSeries, TimeSeries)> {
    if spec.train_len == 0 || spec.test_len == 0 {
        return Err(Error::InvalidParameter("train and test lengths must be positive".into()));
    }
    let needed = spec.train_len + spec.test_len;
    if needed > series.len() {
        return Err(Error::TooShort {
            needed,
            have: series.len(),
        });
    }
    let mut train = TimeSeries::new(
        series.start,
        series.interval_seconds,
        series.values[..spec.train_len].to_vec(),
        series.unit,
    )?;
    train.imputed = series.imputed;
    let test = TimeSeries::new(
        series.timestamp(spec.train_len),
        series.interval_seconds,
        series.values[spec.train_len..needed].to_vec(),
        series.unit,
    )?;
    Ok((train, test))
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::TimeZone;

    fn t0() -> DateTime<Utc> {
        Utc.with_ymd_and_hms(2022, 3, 1, 0, 0, 0).unwrap()
    }

    fn rec(min: i64, v: f64) -> RawRecord {
        RawRecord::new(t0() + Duration::minutes(min), Some(v))
    }

    #[test]
    fn two_records_make_length_two() {
        let s = ingest_raw(&[rec(0, 1.0), rec(5, 2.0)], 300).unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s.interval_seconds(), 300);
    }

    #[test]
    fn gap_becomes_missing() {
        let s = ingest_raw(&[rec(0, 1.0), rec(10, 2.0)], 300).unwrap();
        assert_eq!(s.values(), &[Some(1.0), None, Some(2.0)]);
    }

    #[test]
    fn thirty_day_shape() {
        let n = 29 * 288 + 211;
        let records: Vec<_> = (0..n).map(|i| rec(5 * i as i64, 1e9)).collect();
        let s = ingest_raw(&records, 300).unwrap();
        assert_eq!(s.len(), 8563);
        let trimmed = trim_incomplete_days(s).unwrap();
        assert_eq!(trimmed.len(), 8352);
    }

    #[test]
    fn duplicate_rejected_with_instant() {
        let err = ingest_raw(&[rec(0, 1.0), rec(5, 2.0), rec(5, 3.0)], 300).unwrap_err();
        match err {
            Error::DuplicateTimestamp(ts) => assert_eq!(ts, t0() + Duration::minutes(5)),
            other => panic!("unexpected {other:?}"),
        }
        assert!(err_string(&[rec(0, 1.0), rec(0, 1.0)]).contains("2022-03-01 00:00:00"));
    }

    fn err_string(r: &[RawRecord]) -> String {
        ingest_raw(r, 300).unwrap_err().to_string()
    }

    #[test]
    fn non_monotone_rejected() {
        let err = ingest_raw(&[rec(0, 1.0), rec(10, 2.0), rec(5, 3.0)], 300).unwrap_err();
        assert!(matches!(err, Error::NonMonotone(_)));
    }

    #[test]
    fn off_grid_rejected_but_subsecond_jitter_snaps() {
        let jitter = RawRecord::new(t0() + Duration::minutes(5) + Duration::milliseconds(800), Some(1.0));
        let s = ingest_raw(&[rec(0, 1.0), jitter], 300).unwrap();
        assert_eq!(s.len(), 2);
        let off = RawRecord::new(t0() + Duration::seconds(302), Some(1.0));
        assert!(matches!(ingest_raw(&[rec(0, 1.0), off], 300), Err(Error::OffGrid(..))));
    }

    #[test]
    fn negative_value_rejected() {
        assert!(matches!(
            ingest_raw(&[rec(0, -1.0)], 300),
            Err(Error::InvalidValue { .. })
        ));
    }

    #[test]
    fn trim_cases() {
        let make = |n: usize| RawSeries::new(t0(), 300, vec![Some(1.0); n]).unwrap();
        assert_eq!(trim_incomplete_days(make(2 * 288)).unwrap().len(), 576);
        assert_eq!(trim_incomplete_days(make(289)).unwrap().len(), 288);
        assert!(matches!(trim_incomplete_days(make(287)), Err(Error::TooShort { .. })));
        let shifted = RawSeries::new(t0() + Duration::minutes(5), 300, vec![Some(1.0); 300]).unwrap();
        assert!(matches!(trim_incomplete_days(shifted), Err(Error::NotDayAligned(_))));
    }

    #[test]
    fn impute_cases() {
        let s = RawSeries::new(t0(), 300, vec![Some(2.0), None, Some(4.0)]).unwrap();
        let out = impute_mean(s).unwrap();
        assert_eq!(out.values(), &[Some(2.0), Some(3.0), Some(4.0)]);
        assert_eq!(out.imputed(), 1);

        let s = RawSeries::new(t0(), 300, vec![Some(1.0), None, None, Some(7.0)]).unwrap();
        assert_eq!(impute_mean(s).unwrap().values(), &[Some(1.0), Some(4.0), Some(4.0), Some(7.0)]);

        let full = RawSeries::new(t0(), 300, vec![Some(1.0), Some(5.0)]).unwrap();
        assert_eq!(impute_mean(full.clone()).unwrap(), full);

        let none = RawSeries::new(t0(), 300, vec![None, None]).unwrap();
        assert!(matches!(impute_mean(none), Err(Error::AllMissing)));
    }

    #[test]
    fn rescale_cases() {
        let s = RawSeries::new(t0(), 300, vec![Some(2.0e9), Some(0.0), Some(1.5e8), Some(3.3e9)]).unwrap();
        let ts = rescale_to_gbps(s).unwrap();
        assert_eq!(ts.values(), &[2.0, 0.0, 0.15, 3.3]);
        assert_eq!(ts.unit(), Unit::Gbps);

        let gap = RawSeries::new(t0(), 300, vec![Some(1.0), None]).unwrap();
        assert!(matches!(rescale_to_gbps(gap), Err(Error::HasMissing)));
    }

    #[test]
    fn split_cases() {
        let ts = TimeSeries::new(t0(), 300, vec![0.5; 29 * 288], Unit::Gbps).unwrap();
        let (train, test) = split(&ts, SplitSpec::from_days(21, 8, 288)).unwrap();
        assert_eq!(train.len(), 6048);
        assert_eq!(test.len(), 2304);
        assert_eq!(test.start(), t0() + Duration::days(21));

        let two = TimeSeries::new(t0(), 300, vec![1.0, 2.0], Unit::Gbps).unwrap();
        let (a, b) = split(&two, SplitSpec::new(1, 1)).unwrap();
        assert_eq!(a.values(), &[1.0]);
        assert_eq!(b.values(), &[2.0]);
        assert!(split(&two, SplitSpec::new(2, 1)).is_err());
    }
}
