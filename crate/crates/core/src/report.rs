//! Text renderings of connectedness tables and SVG plots of index series.

use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use chrono::{Datelike, NaiveDate};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::connectedness::{ConnectednessError, ConnectednessTable};
use crate::rolling::{ShockSide, SpilloverSeries, WindowGap};

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("series is empty")]
    EmptySeries,

    #[error("cannot write {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed csv: {0}")]
    Parse(String),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Table(#[from] ConnectednessError),
}

pub const FROM_OTHERS: &str = "From Others";
pub const CONTRIBUTION_TO_OTHERS: &str = "Contribution to others";
pub const CONTRIBUTION_INCLUDING_OWN: &str = "Contribution including own";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TableFormat {
    Csv,
    Json,
    #[serde(alias = "md")]
    Markdown,
}

impl TableFormat {
    pub fn extension(&self) -> &'static str {
        match self {
            TableFormat::Csv => "csv",
            TableFormat::Json => "json",
            TableFormat::Markdown => "md",
        }
    }
}

impl FromStr for TableFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(TableFormat::Csv),
            "json" => Ok(TableFormat::Json),
            "md" | "markdown" => Ok(TableFormat::Markdown),
            other => Err(format!("unknown format `{other}` (csv|json|md)")),
        }
    }
}

pub fn render_table(table: &ConnectednessTable, format: TableFormat) -> Result<String, ReportError> {
    match format {
        TableFormat::Csv => table_csv(table),
        TableFormat::Json => Ok(serde_json::to_string_pretty(table)? + "\n"),
        TableFormat::Markdown => Ok(table_markdown(table)),
    }
}

/// Matrix rows with a `From Others` column, then the two contribution rows;
/// the bottom-right cell holds the spillover index. Full float precision.
fn table_csv(t: &ConnectednessTable) -> Result<String, ReportError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec![String::new()];
    header.extend(t.labels.iter().cloned());
    header.push(FROM_OTHERS.into());
    w.write_record(&header)?;
    for (i, row) in t.matrix.iter().enumerate() {
        let mut rec = vec![t.labels[i].clone()];
        rec.extend(row.iter().map(|v| v.to_string()));
        rec.push(t.from_others[i].to_string());
        w.write_record(&rec)?;
    }
    let mut rec = vec![CONTRIBUTION_TO_OTHERS.to_string()];
    rec.extend(t.to_others.iter().map(|v| v.to_string()));
    rec.push(t.to_others.iter().sum::<f64>().to_string());
    w.write_record(&rec)?;
    let mut rec = vec![CONTRIBUTION_INCLUDING_OWN.to_string()];
    rec.extend(t.including_own.iter().map(|v| v.to_string()));
    rec.push(t.total_spillover.to_string());
    w.write_record(&rec)?;
    let bytes = w.into_inner().map_err(|e| ReportError::Parse(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| ReportError::Parse(e.to_string()))
}

/// Reads a `date,index` rolling series; empty values come back as gaps.
pub fn parse_rolling_csv(text: &str, side: ShockSide) -> Result<SpilloverSeries, ReportError> {
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let mut series = SpilloverSeries {
        side,
        window_end_dates: Vec::new(),
        index_values: Vec::new(),
        gaps: Vec::new(),
    };
    for (position, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let (Some(d), Some(v)) = (rec.get(0), rec.get(1)) else {
            return Err(ReportError::Parse(format!("row {} needs date and index", position + 1)));
        };
        let date = crate::data_ingest::parse_date(d.trim())
            .ok_or_else(|| ReportError::Parse(format!("bad date `{d}`")))?;
        let value = match v.trim() {
            "" => {
                series.gaps.push(WindowGap {
                    position,
                    end_date: date,
                    reason: "missing in input".into(),
                });
                None
            }
            v => Some(
                v.parse::<f64>()
                    .map_err(|_| ReportError::Parse(format!("bad index `{v}`")))?,
            ),
        };
        series.window_end_dates.push(date);
        series.index_values.push(value);
    }
    if series.window_end_dates.is_empty() {
        return Err(ReportError::EmptySeries);
    }
    Ok(series)
}

/// Rebuilds a table from its CSV rendering (margins are recomputed).
pub fn parse_table_csv(text: &str) -> Result<ConnectednessTable, ReportError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(text.as_bytes());
    let header = rdr.headers()?.clone();
    if header.len() < 3 || header.get(header.len() - 1) != Some(FROM_OTHERS) {
        return Err(ReportError::Parse("unexpected header".into()));
    }
    let m = header.len() - 2;
    let labels: Vec<String> = header.iter().skip(1).take(m).map(String::from).collect();
    let mut matrix = Vec::with_capacity(m);
    for (i, rec) in rdr.records().take(m).enumerate() {
        let rec = rec?;
        if rec.get(0) != Some(labels[i].as_str()) {
            return Err(ReportError::Parse(format!("row {i} label mismatch")));
        }
        let row = (1..=m)
            .map(|j| {
                rec.get(j)
                    .and_then(|c| c.parse::<f64>().ok())
                    .ok_or_else(|| ReportError::Parse(format!("bad cell ({i}, {j})")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        matrix.push(row);
    }
    if matrix.len() != m {
        return Err(ReportError::Parse("missing matrix rows".into()));
    }
    Ok(ConnectednessTable::from_percent(labels, matrix)?)
}

fn table_markdown(t: &ConnectednessTable) -> String {
    let m = t.m();
    let mut rows: Vec<Vec<String>> = Vec::with_capacity(m + 3);
    let mut header = vec![String::new()];
    header.extend(t.labels.iter().cloned());
    header.push(FROM_OTHERS.into());
    rows.push(header);
    for i in 0..m {
        let mut r = vec![t.labels[i].clone()];
        r.extend(t.matrix[i].iter().map(|v| format!("{v:.1}")));
        r.push(format!("{:.1}", t.from_others[i]));
        rows.push(r);
    }
    let mut r = vec![CONTRIBUTION_TO_OTHERS.to_string()];
    r.extend(t.to_others.iter().map(|v| format!("{v:.1}")));
    r.push(format!("{:.1}", t.to_others.iter().sum::<f64>()));
    rows.push(r);
    let mut r = vec![CONTRIBUTION_INCLUDING_OWN.to_string()];
    r.extend(t.including_own.iter().map(|v| format!("{v:.1}")));
    r.push(format!("{:.1}%", t.total_spillover));
    rows.push(r);

    let cols = m + 2;
    let widths: Vec<usize> = (0..cols)
        .map(|c| rows.iter().map(|r| r[c].chars().count()).max().unwrap_or(0).max(3))
        .collect();
    let mut out = String::new();
    for (k, r) in rows.iter().enumerate() {
        out.push('|');
        for (c, cell) in r.iter().enumerate() {
            if c == 0 {
                let _ = write!(out, " {:<w$} |", cell, w = widths[c]);
            } else {
                let _ = write!(out, " {:>w$} |", cell, w = widths[c]);
            }
        }
        out.push('\n');
        if k == 0 {
            out.push('|');
            for (c, w) in widths.iter().enumerate() {
                if c == 0 {
                    let _ = write!(out, " :{} |", "-".repeat(w - 1));
                } else {
                    let _ = write!(out, " {}: |", "-".repeat(w - 1));
                }
            }
            out.push('\n');
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlotOptions {
    pub title: String,
    /// Y-axis range in percent.
    pub y_range: (f64, f64),
    pub width: u32,
    pub height: u32,
}

impl Default for PlotOptions {
    fn default() -> Self {
        Self {
            title: "Spillover (Connectedness) Index".into(),
            y_range: (0.0, 100.0),
            width: 800,
            height: 400,
        }
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

/// SVG line chart of the index against window end dates. Failed windows
/// break the line; nothing is interpolated.
pub fn render_plot(series: &SpilloverSeries, opts: &PlotOptions) -> Result<String, ReportError> {
    if series.is_empty() {
        return Err(ReportError::EmptySeries);
    }
    let (w, h) = (opts.width as f64, opts.height as f64);
    let (left, right, top, bottom) = (60.0, 20.0, 40.0, 50.0);
    let plot_w = w - left - right;
    let plot_h = h - top - bottom;
    let (y0, y1) = opts.y_range;
    let first = series.window_end_dates[0];
    let last = *series.window_end_dates.last().unwrap();
    let span = (last - first).num_days().max(1) as f64;
    let x_of = |d: NaiveDate| {
        if first == last {
            left + plot_w / 2.0
        } else {
            left + plot_w * (d - first).num_days() as f64 / span
        }
    };
    let y_of = |v: f64| top + plot_h * (1.0 - (v.clamp(y0, y1) - y0) / (y1 - y0));

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{}" height="{}" viewBox="0 0 {} {}" font-family="sans-serif" font-size="12">"#,
        opts.width, opts.height, opts.width, opts.height
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="20" text-anchor="middle" font-size="14">{}</text>"#,
        w / 2.0,
        escape(&opts.title)
    );

    // y grid every tenth of the range
    for k in 0..=10 {
        let v = y0 + (y1 - y0) * k as f64 / 10.0;
        let y = y_of(v);
        let _ = writeln!(
            s,
            r##"<line x1="{left:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#e0e0e0"/>"##,
            left + plot_w
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
            left - 6.0,
            y + 4.0,
            trim_number(v)
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="15" y="{:.2}" text-anchor="middle" transform="rotate(-90 15 {:.2})">Index (%)</text>"#,
        top + plot_h / 2.0,
        top + plot_h / 2.0
    );

    // x ticks on January of evenly spaced years
    let years = (last.year() - first.year()).max(0) as usize;
    let stride = (years / 8).max(1);
    for year in (first.year()..=last.year()).step_by(stride) {
        let d = NaiveDate::from_ymd_opt(year, 1, 1).unwrap();
        if d < first || d > last {
            continue;
        }
        let x = x_of(d);
        let _ = writeln!(
            s,
            r##"<line x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{:.2}" stroke="#888"/>"##,
            top + plot_h,
            top + plot_h + 5.0
        );
        let _ = writeln!(
            s,
            r#"<text x="{x:.2}" y="{:.2}" text-anchor="middle">{year}</text>"#,
            top + plot_h + 18.0
        );
    }
    let _ = writeln!(
        s,
        r##"<rect x="{left:.2}" y="{top:.2}" width="{plot_w:.2}" height="{plot_h:.2}" fill="none" stroke="#444"/>"##
    );

    let mut segments: Vec<Vec<(f64, f64)>> = vec![Vec::new()];
    for (d, v) in series.window_end_dates.iter().zip(&series.index_values) {
        match v {
            Some(v) => segments.last_mut().unwrap().push((x_of(*d), y_of(*v))),
            None => {
                if !segments.last().unwrap().is_empty() {
                    segments.push(Vec::new());
                }
            }
        }
    }
    for seg in segments.iter().filter(|s| !s.is_empty()) {
        if seg.len() == 1 {
            let _ = writeln!(
                s,
                r##"<circle cx="{:.2}" cy="{:.2}" r="2.5" fill="#1f5fa8"/>"##,
                seg[0].0, seg[0].1
            );
            continue;
        }
        let pts: Vec<String> = seg.iter().map(|(x, y)| format!("{x:.2},{y:.2}")).collect();
        let _ = writeln!(
            s,
            r##"<polyline fill="none" stroke="#1f5fa8" stroke-width="1.5" points="{}"/>"##,
            pts.join(" ")
        );
    }
    s.push_str("</svg>\n");
    Ok(s)
}

fn trim_number(v: f64) -> String {
    if (v - v.round()).abs() < 1e-9 {
        format!("{}", v.round() as i64)
    } else {
        format!("{v:.1}")
    }
}

pub fn write_plot(
    series: &SpilloverSeries,
    opts: &PlotOptions,
    path: impl AsRef<Path>,
) -> Result<(), ReportError> {
    let svg = render_plot(series, opts)?;
    let path = path.as_ref();
    crate::fsutil::write_atomic(path, svg.as_bytes()).map_err(|source| ReportError::Io {
        path: path.display().to_string(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simulate::monthly_dates;

    fn published_negative_table() -> ConnectednessTable {
        ConnectednessTable::from_percent(
            vec!["China".into(), "Euro".into(), "US".into()],
            vec![
                vec![64.3, 18.5, 17.3],
                vec![5.3, 50.6, 44.1],
                vec![10.0, 38.4, 51.6],
            ],
        )
        .unwrap()
    }

    fn series(values: Vec<Option<f64>>) -> SpilloverSeries {
        SpilloverSeries {
            side: ShockSide::Negative,
            window_end_dates: monthly_dates(NaiveDate::from_ymd_opt(2015, 8, 1).unwrap(), values.len()),
            index_values: values,
            gaps: vec![],
        }
    }

    #[test]
    fn markdown_layout() {
        let md = render_table(&published_negative_table(), TableFormat::Markdown).unwrap();
        let lines: Vec<&str> = md.lines().collect();
        assert_eq!(lines.len(), 7);
        assert!(lines[0].contains("China") && lines[0].contains(FROM_OTHERS));
        assert!(lines[2].starts_with("| China"));
        assert!(lines[2].contains("64.3") && lines[2].contains("35.8"));
        assert!(lines[5].starts_with("| Contribution to others"));
        assert!(lines[5].contains("133.6"));
        assert!(lines[6].trim_end().ends_with("44.5% |"));
    }

    #[test]
    fn identity_table_index_cell() {
        let t = ConnectednessTable::from_percent(
            vec!["a".into(), "b".into()],
            vec![vec![100.0, 0.0], vec![0.0, 100.0]],
        )
        .unwrap();
        let md = render_table(&t, TableFormat::Markdown).unwrap();
        assert!(md.lines().last().unwrap().trim_end().ends_with(" 0.0% |"));
    }

    #[test]
    fn csv_round_trips_byte_identically() {
        let t = ConnectednessTable::from_percent(
            vec!["x, y".into(), "b".into(), "c".into()],
            vec![
                vec![100.0 / 3.0, 200.0 / 3.0, 0.0],
                vec![0.1 + 0.2, 99.7, 0.0],
                vec![1e-9, 50.0, 50.0 - 1e-9],
            ],
        )
        .unwrap();
        let a = render_table(&t, TableFormat::Csv).unwrap();
        let parsed = parse_table_csv(&a).unwrap();
        assert_eq!(parsed, t);
        assert_eq!(render_table(&parsed, TableFormat::Csv).unwrap(), a);
    }

    #[test]
    fn json_round_trips() {
        let t = published_negative_table();
        let j = render_table(&t, TableFormat::Json).unwrap();
        let back: ConnectednessTable = serde_json::from_str(&j).unwrap();
        assert_eq!(back, t);
    }

    #[test]
    fn plot_basics() {
        let values: Vec<Option<f64>> = (0..101).map(|k| Some(30.0 + (k % 7) as f64)).collect();
        let svg = render_plot(&series(values.clone()), &PlotOptions::default()).unwrap();
        assert!(svg.starts_with("<svg"));
        assert_eq!(svg.matches("<polyline").count(), 1);
        assert!(svg.contains(">100</text>") && svg.contains(">0</text>"));
        // deterministic
        assert_eq!(svg, render_plot(&series(values), &PlotOptions::default()).unwrap());
    }

    #[test]
    fn flat_series_draws_flat_line() {
        let opts = PlotOptions::default();
        let svg = render_plot(&series(vec![Some(44.5); 20]), &opts).unwrap();
        let line = svg.lines().find(|l| l.starts_with("<polyline")).unwrap();
        let pts = line.split("points=\"").nth(1).unwrap().trim_end_matches("\"/>");
        let ys: Vec<&str> = pts.split(' ').map(|p| p.split(',').nth(1).unwrap()).collect();
        assert!(ys.iter().all(|y| *y == ys[0]));
        let expect = 40.0 + 310.0 * (1.0 - 0.445);
        assert_eq!(ys[0], format!("{expect:.2}"));
    }

    #[test]
    fn gaps_split_the_line() {
        let svg = render_plot(
            &series(vec![Some(1.0), Some(2.0), None, Some(3.0), Some(4.0), None, Some(5.0)]),
            &PlotOptions::default(),
        )
        .unwrap();
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert_eq!(svg.matches("<circle").count(), 1);
    }

    #[test]
    fn empty_series_is_an_error() {
        assert!(matches!(
            render_plot(&series(vec![]), &PlotOptions::default()),
            Err(ReportError::EmptySeries)
        ));
    }

    #[test]
    fn rolling_csv_round_trip() {
        let s = series(vec![Some(12.5), None, Some(0.1 + 0.2)]);
        let back = parse_rolling_csv(&s.to_csv(), s.side).unwrap();
        assert_eq!(back.window_end_dates, s.window_end_dates);
        assert_eq!(back.index_values, s.index_values);
        assert_eq!(back.gaps.len(), 1);
        assert_eq!(back.gaps[0].position, 1);
    }
}
