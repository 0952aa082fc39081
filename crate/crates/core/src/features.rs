//! Calendar indicator features used as SARIMAX regressors.
//!
//! A day is cut into eight 3-hour parts, left-closed. The first part
//! (00:00-03:00) is the reference category and gets no column, so the
//! remaining seven indicators are never collinear with an intercept.
//! A weekend flag (Saturday/Sunday GMT) completes the matrix.

use std::io::{Read, Write};

use chrono::{DateTime, Datelike, Timelike, Utc, Weekday};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Emitted day-part columns, in bucket order starting at 03:00.
pub const DAY_PART_COLUMNS: [&str; 7] = [
    "late_night",
    "early_morning",
    "morning",
    "afternoon",
    "late_afternoon",
    "evening",
    "night",
];

pub const WEEKEND_COLUMN: &str = "weekend";

/// Row-major regressor matrix with named columns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExogMatrix {
    column_names: Vec<String>,
    rows: Vec<Vec<f64>>,
}

impl ExogMatrix {
    pub fn new(column_names: Vec<String>, rows: Vec<Vec<f64>>) -> Result<Self> {
        let k = column_names.len();
        if let Some(i) = rows.iter().position(|r| r.len() != k) {
            return Err(Error::ExogMismatch(format!("row {i} has {} entries, expected {k}", rows[i].len())));
        }
        if rows.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::ExogMismatch("non-finite entry".into()));
        }
        Ok(Self { column_names, rows })
    }

    pub fn column_names(&self) -> &[String] {
        &self.column_names
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.rows[i]
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_cols(&self) -> usize {
        self.column_names.len()
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.rows.iter().map(|r| r[j]).collect()
    }

    /// Rows `range` as a new matrix with the same columns.
    pub fn slice(&self, range: std::ops::Range<usize>) -> Self {
        Self {
            column_names: self.column_names.clone(),
            rows: self.rows[range].to_vec(),
        }
    }

    pub fn push_row(&mut self, row: Vec<f64>) -> Result<()> {
        if row.len() != self.n_cols() {
            return Err(Error::ExogMismatch(format!(
                "row has {} entries, expected {}",
                row.len(),
                self.n_cols()
            )));
        }
        self.rows.push(row);
        Ok(())
    }

    /// Errors unless `other` carries the same columns in the same order.
    pub fn check_same_columns(&self, other: &ExogMatrix) -> Result<()> {
        if self.column_names != other.column_names {
            return Err(Error::ExogMismatch(format!(
                "columns {:?} vs {:?}",
                self.column_names, other.column_names
            )));
        }
        Ok(())
    }

    pub fn write_csv(&self, w: impl Write) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record(&self.column_names)?;
        for row in &self.rows {
            wtr.write_record(row.iter().map(|v| crate::io::format_sig(*v, 17)))?;
        }
        wtr.flush()?;
        Ok(())
    }

    pub fn read_csv(r: impl Read) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(r);
        let names: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
        let mut rows = Vec::new();
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let row = rec
                .iter()
                .map(|s| {
                    s.trim().parse::<f64>().map_err(|_| Error::Parse {
                        at: format!("line {}", i + 2),
                        msg: format!("invalid number `{s}`"),
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            rows.push(row);
        }
        Self::new(names, rows)
    }
}

/// Index of the 3-hour bucket (0 = 00:00-03:00, ..., 7 = 21:00-24:00).
pub fn day_part(t: DateTime<Utc>) -> usize {
    (t.hour() / 3) as usize
}

pub fn is_weekend(t: DateTime<Utc>) -> bool {
    matches!(t.weekday(), Weekday::Sat | Weekday::Sun)
}

pub fn feature_row(t: DateTime<Utc>) -> Vec<f64> {
    let mut row = vec![0.0; DAY_PART_COLUMNS.len() + 1];
    let part = day_part(t);
    if part > 0 {
        row[part - 1] = 1.0;
    }
    row[DAY_PART_COLUMNS.len()] = if is_weekend(t) { 1.0 } else { 0.0 };
    row
}

pub fn feature_names() -> Vec<String> {
    DAY_PART_COLUMNS
        .iter()
        .chain(std::iter::once(&WEEKEND_COLUMN))
        .map(|s| s.to_string())
        .collect()
}

pub fn extract_features(timestamps: &[DateTime<Utc>]) -> ExogMatrix {
    ExogMatrix {
        column_names: feature_names(),
        rows: timestamps.iter().map(|&t| feature_row(t)).collect(),
    }
}
