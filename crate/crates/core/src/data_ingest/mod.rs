//! Time-series containers plus CSV and FRED ingestion.
//!
//! A [`Panel`] is a set of series observed on one shared, strictly increasing
//! date grid with no missing values. Everything downstream (decomposition,
//! VAR estimation, rolling windows) consumes panels.

mod csv_io;
#[cfg(feature = "fred")]
mod fred;

pub use csv_io::{load_csv, read_csv, write_csv, write_csv_to, CsvLoad};
#[cfg(feature = "fred")]
pub use fred::{
    fetch_fred, DateRange, FetchError, FredClient, HttpResponse, Transport, UreqTransport,
    DEFAULT_CACHE_DIR,
};

use std::collections::BTreeSet;

use chrono::NaiveDate;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("unknown column `{0}`")]
    UnknownColumn(String),

    #[error("cannot parse date `{value}` on line {line}")]
    BadDate { value: String, line: usize },

    #[error("cannot parse value `{value}` in column `{column}` on line {line}")]
    BadValue {
        value: String,
        column: String,
        line: usize,
    },

    #[error("duplicate date {0}")]
    DuplicateDate(NaiveDate),

    #[error("no usable rows ({dropped} rows dropped for missing values)")]
    NoUsableRows { dropped: usize },

    #[error("dates must be strictly increasing (series `{series}` at {date})")]
    UnorderedDates { series: String, date: NaiveDate },

    #[error("non-finite value in series `{series}` at {date}")]
    NonFinite { series: String, date: NaiveDate },

    #[error("series `{series}` has {values} values for {dates} dates")]
    LengthMismatch {
        series: String,
        values: usize,
        dates: usize,
    },

    #[error("series is empty")]
    Empty,

    #[error("need at least {required} panels to align, got {actual}")]
    TooFewPanels { required: usize, actual: usize },

    #[error("panels share no common dates")]
    NoOverlap,

    #[error("non-positive value {value} in series `{series}` at {date}")]
    NonPositiveValue {
        series: String,
        date: NaiveDate,
        value: f64,
    },
}

/// One named series on its own date grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    name: String,
    dates: Vec<NaiveDate>,
    values: Vec<f64>,
}

impl Series {
    pub fn new(
        name: impl Into<String>,
        dates: Vec<NaiveDate>,
        values: Vec<f64>,
    ) -> Result<Self, IngestError> {
        let name = name.into();
        validate_column(&name, &dates, &values)?;
        Ok(Self {
            name,
            dates,
            values,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dates(&self) -> &[NaiveDate] {
        &self.dates
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn into_panel(self) -> Panel {
        Panel {
            dates: self.dates,
            names: vec![self.name],
            columns: vec![self.values],
        }
    }
}

fn validate_column(name: &str, dates: &[NaiveDate], values: &[f64]) -> Result<(), IngestError> {
    if values.is_empty() {
        return Err(IngestError::Empty);
    }
    if values.len() != dates.len() {
        return Err(IngestError::LengthMismatch {
            series: name.to_string(),
            values: values.len(),
            dates: dates.len(),
        });
    }
    for w in dates.windows(2) {
        if w[1] <= w[0] {
            return Err(IngestError::UnorderedDates {
                series: name.to_string(),
                date: w[1],
            });
        }
    }
    if let Some(k) = values.iter().position(|v| !v.is_finite()) {
        return Err(IngestError::NonFinite {
            series: name.to_string(),
            date: dates[k],
        });
    }
    Ok(())
}

/// Aligned multivariate panel: `m` named columns on one date grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Panel {
    dates: Vec<NaiveDate>,
    names: Vec<String>,
    columns: Vec<Vec<f64>>,
}

impl Panel {
    pub fn new(
        dates: Vec<NaiveDate>,
        names: Vec<String>,
        columns: Vec<Vec<f64>>,
    ) -> Result<Self, IngestError> {
        if columns.is_empty() || names.len() != columns.len() {
            return Err(IngestError::Empty);
        }
        for (name, col) in names.iter().zip(&columns) {
            validate_column(name, &dates, col)?;
        }
        Ok(Self {
            dates,
            names,
            columns,
        })
    }

    /// Builds a panel from series that already share identical dates.
    pub fn from_series(series: Vec<Series>) -> Result<Self, IngestError> {
        let first = series.first().ok_or(IngestError::Empty)?;
        let dates = first.dates.clone();
        let mut names = Vec::with_capacity(series.len());
        let mut columns = Vec::with_capacity(series.len());
        for s in series {
            if s.dates != dates {
                return Err(IngestError::LengthMismatch {
                    series: s.name,
                    values: s.values.len(),
                    dates: dates.len(),
                });
            }
            names.push(s.name);
            columns.push(s.values);
        }
        Ok(Self {
            dates,
            names,
            columns,
        })
    }

    pub fn dates(&self) -> &[NaiveDate] {
        &self.dates
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn column(&self, i: usize) -> &[f64] {
        &self.columns[i]
    }

    pub fn columns(&self) -> &[Vec<f64>] {
        &self.columns
    }

    /// Number of series.
    pub fn m(&self) -> usize {
        self.columns.len()
    }

    /// Number of observations.
    pub fn len(&self) -> usize {
        self.dates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dates.is_empty()
    }

    pub fn series(&self, i: usize) -> Series {
        Series {
            name: self.names[i].clone(),
            dates: self.dates.clone(),
            values: self.columns[i].clone(),
        }
    }

    /// Rows `start..end` of every column.
    pub fn slice(&self, start: usize, end: usize) -> Panel {
        Panel {
            dates: self.dates[start..end].to_vec(),
            names: self.names.clone(),
            columns: self.columns.iter().map(|c| c[start..end].to_vec()).collect(),
        }
    }

    /// Reorders columns: output column `k` is input column `order[k]`.
    pub fn permuted(&self, order: &[usize]) -> Panel {
        Panel {
            dates: self.dates.clone(),
            names: order.iter().map(|&i| self.names[i].clone()).collect(),
            columns: order.iter().map(|&i| self.columns[i].clone()).collect(),
        }
    }

    pub fn with_dates(&self, dates: Vec<NaiveDate>) -> Result<Panel, IngestError> {
        Panel::new(dates, self.names.clone(), self.columns.clone())
    }

    /// Row-major `len × m` copy of the data.
    pub fn to_matrix(&self) -> nalgebra::DMatrix<f64> {
        nalgebra::DMatrix::from_fn(self.len(), self.m(), |t, j| self.columns[j][t])
    }
}

/// Inner-joins panels on their dates.
pub fn align(panels: &[Panel]) -> Result<Panel, IngestError> {
    if panels.len() < 2 {
        return Err(IngestError::TooFewPanels {
            required: 2,
            actual: panels.len(),
        });
    }
    let mut common: BTreeSet<NaiveDate> = panels[0].dates.iter().copied().collect();
    for p in &panels[1..] {
        let other: BTreeSet<NaiveDate> = p.dates.iter().copied().collect();
        common = common.intersection(&other).copied().collect();
    }
    if common.is_empty() {
        return Err(IngestError::NoOverlap);
    }
    let dates: Vec<NaiveDate> = common.into_iter().collect();
    let mut names = Vec::new();
    let mut columns = Vec::new();
    for p in panels {
        // both date lists are sorted, so a merge walk picks the common rows
        let mut keep = Vec::with_capacity(dates.len());
        let mut k = 0;
        for (row, d) in p.dates.iter().enumerate() {
            if k < dates.len() && *d == dates[k] {
                keep.push(row);
                k += 1;
            }
        }
        for (name, col) in p.names.iter().zip(&p.columns) {
            names.push(name.clone());
            columns.push(keep.iter().map(|&r| col[r]).collect());
        }
    }
    Panel::new(dates, names, columns)
}

/// Natural log of every value, with `_log` appended to each name.
pub fn log_transform(panel: &Panel) -> Result<Panel, IngestError> {
    let mut columns = Vec::with_capacity(panel.m());
    for (name, col) in panel.names.iter().zip(&panel.columns) {
        let mut out = Vec::with_capacity(col.len());
        for (t, &v) in col.iter().enumerate() {
            if v <= 0.0 {
                return Err(IngestError::NonPositiveValue {
                    series: name.clone(),
                    date: panel.dates[t],
                    value: v,
                });
            }
            out.push(v.ln());
        }
        columns.push(out);
    }
    Ok(Panel {
        dates: panel.dates.clone(),
        names: panel.names.iter().map(|n| format!("{n}_log")).collect(),
        columns,
    })
}

/// Parses `YYYY-MM-DD` or `YYYY-MM` (normalized to the first of the month).
pub fn parse_date(s: &str) -> Option<NaiveDate> {
    let s = s.trim();
    if let Ok(d) = NaiveDate::parse_from_str(s, "%Y-%m-%d") {
        return Some(d);
    }
    NaiveDate::parse_from_str(&format!("{s}-01"), "%Y-%m-%d").ok()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn months(n: usize, start_year: i32) -> Vec<NaiveDate> {
        (0..n)
            .map(|k| {
                NaiveDate::from_ymd_opt(start_year + (k / 12) as i32, (k % 12) as u32 + 1, 1)
                    .unwrap()
            })
            .collect()
    }

    fn panel(name: &str, dates: Vec<NaiveDate>) -> Panel {
        let values = (0..dates.len()).map(|k| 1.0 + k as f64).collect();
        Panel::new(dates, vec![name.into()], vec![values]).unwrap()
    }

    #[test]
    fn align_keeps_common_dates() {
        let all = months(300, 1990);
        let a = panel("a", all[..].to_vec());
        let b = panel("b", all[50..].to_vec());
        let out = align(&[a, b]).unwrap();
        assert_eq!(out.len(), 250);
        assert_eq!(out.m(), 2);
        assert_eq!(out.column(0)[0], 51.0);
        assert_eq!(out.column(1)[0], 1.0);
    }

    #[test]
    fn align_identical_panels_concatenates() {
        let a = panel("a", months(24, 2000));
        let out = align(&[a.clone(), a.clone()]).unwrap();
        assert_eq!(out.dates(), a.dates());
        assert_eq!(out.column(0), a.column(0));
        assert_eq!(out.column(1), a.column(0));
    }

    #[test]
    fn align_disjoint_is_no_overlap() {
        let a = panel("a", months(12, 1990));
        let b = panel("b", months(12, 2000));
        assert!(matches!(align(&[a, b]), Err(IngestError::NoOverlap)));
    }

    #[test]
    fn align_needs_two_panels() {
        let a = panel("a", months(12, 1990));
        assert!(matches!(
            align(&[a]),
            Err(IngestError::TooFewPanels { .. })
        ));
    }

    #[test]
    fn log_of_e_and_one() {
        let p = Panel::new(
            months(2, 2000),
            vec!["x".into()],
            vec![vec![std::f64::consts::E, 1.0]],
        )
        .unwrap();
        let l = log_transform(&p).unwrap();
        assert!((l.column(0)[0] - 1.0).abs() < 1e-15);
        assert_eq!(l.column(0)[1], 0.0);
        assert_eq!(l.names()[0], "x_log");
    }

    #[test]
    fn log_rejects_non_positive() {
        let p = Panel::new(months(2, 2000), vec!["x".into()], vec![vec![1.0, 0.0]]).unwrap();
        match log_transform(&p) {
            Err(IngestError::NonPositiveValue { series, date, .. }) => {
                assert_eq!(series, "x");
                assert_eq!(date, NaiveDate::from_ymd_opt(2000, 2, 1).unwrap());
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn panel_rejects_unordered_dates() {
        let mut d = months(3, 2000);
        d.swap(1, 2);
        assert!(Panel::new(d, vec!["x".into()], vec![vec![1.0; 3]]).is_err());
    }

    #[test]
    fn month_dates_normalize_to_first() {
        assert_eq!(
            parse_date("2001-07"),
            NaiveDate::from_ymd_opt(2001, 7, 1)
        );
        assert_eq!(
            parse_date("2001-07-15"),
            NaiveDate::from_ymd_opt(2001, 7, 15)
        );
        assert_eq!(parse_date("July 2001"), None);
    }
}
