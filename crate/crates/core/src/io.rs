//! Telemetry readers and canonical CSV writers.
//!
//! Raw input is either JSON (an array of records or one record per line)
//! with `timestamp` and `value` fields, or a `timestamp,value` CSV with a
//! header row. Extra JSON fields are ignored. Timestamps are ISO-8601 and
//! interpreted as GMT when they carry no offset.

use std::io::{Read, Write};

use chrono::{DateTime, NaiveDateTime, Utc};
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::series::{RawRecord, TimeSeries, Unit};

#[derive(Deserialize)]
struct JsonRecord {
    timestamp: String,
    value: Option<f64>,
}

pub fn parse_timestamp(s: &str) -> std::result::Result<DateTime<Utc>, String> {
    let s = s.trim();
    if let Ok(t) = DateTime::parse_from_rfc3339(s) {
        return Ok(t.with_timezone(&Utc));
    }
    for fmt in ["%Y-%m-%dT%H:%M:%S%.f", "%Y-%m-%d %H:%M:%S%.f"] {
        if let Ok(t) = NaiveDateTime::parse_from_str(s, fmt) {
            return Ok(t.and_utc());
        }
    }
    Err(format!("invalid timestamp `{s}`"))
}

fn parse_err(at: String, msg: impl Into<String>) -> Error {
    Error::Parse { at, msg: msg.into() }
}

fn to_record(r: JsonRecord, at: impl Fn() -> String) -> Result<RawRecord> {
    let ts = parse_timestamp(&r.timestamp).map_err(|m| parse_err(at(), m))?;
    Ok(RawRecord::new(ts, r.value))
}

/// Parses raw telemetry, detecting JSON array, NDJSON or CSV from the content.
pub fn parse_records(text: &str) -> Result<Vec<RawRecord>> {
    match text.trim_start().chars().next() {
        Some('[') => parse_json_array(text),
        Some('{') => parse_ndjson(text),
        Some(_) => parse_csv_records(text.as_bytes()),
        None => Err(Error::Empty("telemetry input")),
    }
}

pub fn read_records(mut reader: impl Read) -> Result<Vec<RawRecord>> {
    let mut text = String::new();
    reader.read_to_string(&mut text)?;
    parse_records(&text)
}

fn parse_json_array(text: &str) -> Result<Vec<RawRecord>> {
    let raw: Vec<JsonRecord> = serde_json::from_str(text)
        .map_err(|e| parse_err(format!("line {}", e.line()), e.to_string()))?;
    raw.into_iter()
        .enumerate()
        .map(|(i, r)| to_record(r, || format!("record {}", i + 1)))
        .collect()
}

fn parse_ndjson(text: &str) -> Result<Vec<RawRecord>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let at = || format!("line {}", i + 1);
        let r: JsonRecord = serde_json::from_str(line).map_err(|e| parse_err(at(), e.to_string()))?;
        out.push(to_record(r, at)?);
    }
    Ok(out)
}

fn parse_csv_records(bytes: &[u8]) -> Result<Vec<RawRecord>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(bytes);
    let mut out = Vec::new();
    for (i, row) in rdr.records().enumerate() {
        // header is line 1
        let at = || format!("line {}", i + 2);
        let row = row.map_err(|e| parse_err(at(), e.to_string()))?;
        if row.len() < 2 {
            return Err(parse_err(at(), "expected `timestamp,value`"));
        }
        let ts = parse_timestamp(&row[0]).map_err(|m| parse_err(at(), m))?;
        let value = match row[1].trim() {
            "" | "null" | "NaN" | "nan" => None,
            v => Some(
                v.parse::<f64>()
                    .map_err(|_| parse_err(at(), format!("invalid value `{v}`")))?,
            ),
        };
        out.push(RawRecord::new(ts, value));
    }
    Ok(out)
}

/// Formats like C's `%.{sig}g`.
pub fn format_sig(x: f64, sig: usize) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sig = sig.max(1);
    let sci = format!("{:.*e}", sig - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -4 || exp >= sig as i32 {
        let m = strip_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{m}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (sig as i32 - 1 - exp).max(0) as usize;
        strip_zeros(&format!("{x:.decimals$}")).to_string()
    }
}

fn strip_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

pub fn format_timestamp(t: DateTime<Utc>) -> String {
    t.format("%Y-%m-%dT%H:%M:%SZ").to_string()
}

/// Writes `timestamp,value_gbps` with nine significant digits.
pub fn write_canonical_csv(series: &TimeSeries, mut w: impl Write) -> Result<()> {
    writeln!(w, "timestamp,value_gbps")?;
    for (i, v) in series.values().iter().enumerate() {
        writeln!(w, "{},{}", format_timestamp(series.timestamp(i)), format_sig(*v, 9))?;
    }
    Ok(())
}

/// Reads a canonical CSV back; rows must be spaced exactly `interval_seconds` apart.
pub fn read_canonical_csv(reader: impl Read, interval_seconds: u32) -> Result<TimeSeries> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let mut start = None;
    let mut values = Vec::new();
    for (i, row) in rdr.records().enumerate() {
        let at = || format!("line {}", i + 2);
        let row = row.map_err(|e| parse_err(at(), e.to_string()))?;
        if row.len() < 2 {
            return Err(parse_err(at(), "expected `timestamp,value_gbps`"));
        }
        let ts = parse_timestamp(&row[0]).map_err(|m| parse_err(at(), m))?;
        let v: f64 = row[1]
            .parse()
            .map_err(|_| parse_err(at(), format!("invalid value `{}`", &row[1])))?;
        let t0 = *start.get_or_insert(ts);
        let expected = t0 + chrono::Duration::seconds(i as i64 * interval_seconds as i64);
        if ts != expected {
            return Err(parse_err(at(), format!("expected timestamp {expected}, found {ts}")));
        }
        values.push(v);
    }
    let start = start.ok_or(Error::Empty("canonical csv"))?;
    TimeSeries::new(start, interval_seconds, values, Unit::Gbps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::ingest_raw;

    #[test]
    fn sig_formatting_matches_printf_g() {
        assert_eq!(format_sig(2.0, 9), "2");
        assert_eq!(format_sig(0.15, 9), "0.15");
        assert_eq!(format_sig(1.0 / 3.0, 9), "0.333333333");
        assert_eq!(format_sig(123456.7891234, 9), "123456.789");
        assert_eq!(format_sig(1.5e-7, 9), "1.5e-07");
        assert_eq!(format_sig(1.234e12, 9), "1.234e+12");
        assert_eq!(format_sig(-0.00012345678912, 9), "-0.000123456789");
        assert_eq!(format_sig(999999999.5, 9), "1e+09");
    }

    #[test]
    fn json_array_and_ndjson_agree() {
        let arr = r#"[{"timestamp":"2022-03-01T00:00:00Z","value":1e9,"iface":"xe-0"},
                      {"timestamp":"2022-03-01T00:05:00Z","value":null}]"#;
        let nd = "{\"timestamp\":\"2022-03-01T00:00:00Z\",\"value\":1e9}\n{\"timestamp\":\"2022-03-01T00:05:00\",\"value\":null}\n";
        let a = parse_records(arr).unwrap();
        let b = parse_records(nd).unwrap();
        assert_eq!(a, b);
        assert_eq!(a[1].value, None);
    }

    #[test]
    fn csv_records_with_missing() {
        let text = "timestamp,value\n2022-03-01T00:00:00Z,5\n2022-03-01T00:05:00Z,\n";
        let r = parse_records(text).unwrap();
        assert_eq!(r.len(), 2);
        assert_eq!(r[1].value, None);
    }

    #[test]
    fn bad_line_is_numbered() {
        let nd = "{\"timestamp\":\"2022-03-01T00:00:00Z\",\"value\":1}\n{\"timestamp\":\"garbage\",\"value\":1}\n";
        let msg = parse_records(nd).unwrap_err().to_string();
        assert!(msg.contains("line 2"), "{msg}");
        let csv = "timestamp,value\n2022-03-01T00:00:00Z,x\n";
        assert!(parse_records(csv).unwrap_err().to_string().contains("line 2"));
    }

    #[test]
    fn canonical_csv_round_trip() {
        let recs = parse_records("timestamp,value\n2022-03-01T00:00:00Z,1500000000\n2022-03-01T00:05:00Z,2.25e9\n").unwrap();
        let ts = crate::series::rescale_to_gbps(ingest_raw(&recs, 300).unwrap()).unwrap();
        let mut buf = Vec::new();
        write_canonical_csv(&ts, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert_eq!(text, "timestamp,value_gbps\n2022-03-01T00:00:00Z,1.5\n2022-03-01T00:05:00Z,2.25\n");
        let back = read_canonical_csv(buf.as_slice(), 300).unwrap();
        assert_eq!(back.values(), ts.values());
        assert_eq!(back.start(), ts.start());
        assert!(read_canonical_csv(buf.as_slice(), 600).is_err());
    }
}
