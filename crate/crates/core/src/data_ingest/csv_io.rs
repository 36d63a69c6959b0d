use std::collections::HashSet;
use std::io::{Read, Write};
use std::path::Path;

use chrono::NaiveDate;

use super::{parse_date, IngestError, Panel};

/// Result of reading a CSV panel.
#[derive(Debug, Clone)]
pub struct CsvLoad {
    pub panel: Panel,
    /// Rows skipped because at least one selected value was missing.
    pub dropped_rows: usize,
}

/// Loads a panel from a CSV file.
///
/// An empty `value_columns` selects every column except the date column.
/// Empty cells and FRED's `.` placeholder count as missing; such rows are
/// dropped and counted.
pub fn load_csv(
    path: impl AsRef<Path>,
    date_column: &str,
    value_columns: &[String],
) -> Result<CsvLoad, IngestError> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|source| IngestError::Io {
        path: path.display().to_string(),
        source,
    })?;
    read_csv(file, date_column, value_columns)
}

pub fn read_csv<R: Read>(
    reader: R,
    date_column: &str,
    value_columns: &[String],
) -> Result<CsvLoad, IngestError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers()?.clone();
    let find = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| IngestError::UnknownColumn(name.to_string()))
    };
    let date_idx = find(date_column)?;
    let selected: Vec<String> = if value_columns.is_empty() {
        headers
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != date_idx)
            .map(|(_, h)| h.to_string())
            .collect()
    } else {
        value_columns.to_vec()
    };
    let idx: Vec<usize> = selected
        .iter()
        .map(|c| find(c))
        .collect::<Result<_, _>>()?;

    let mut rows: Vec<(NaiveDate, Vec<f64>)> = Vec::new();
    let mut dropped = 0;
    for (k, record) in rdr.records().enumerate() {
        let record = record?;
        let line = k + 2;
        let raw_date = record.get(date_idx).unwrap_or("");
        let date = parse_date(raw_date).ok_or_else(|| IngestError::BadDate {
            value: raw_date.to_string(),
            line,
        })?;
        let mut values = Vec::with_capacity(idx.len());
        let mut missing = false;
        for (&c, name) in idx.iter().zip(&selected) {
            let cell = record.get(c).unwrap_or("");
            if is_missing(cell) {
                missing = true;
                break;
            }
            let v: f64 = cell.parse().map_err(|_| IngestError::BadValue {
                value: cell.to_string(),
                column: name.clone(),
                line,
            })?;
            if !v.is_finite() {
                missing = true;
                break;
            }
            values.push(v);
        }
        if missing {
            dropped += 1;
        } else {
            rows.push((date, values));
        }
    }

    if rows.is_empty() {
        return Err(IngestError::NoUsableRows { dropped });
    }
    rows.sort_by_key(|(d, _)| *d);
    let mut seen = HashSet::with_capacity(rows.len());
    for (d, _) in &rows {
        if !seen.insert(*d) {
            return Err(IngestError::DuplicateDate(*d));
        }
    }

    let dates = rows.iter().map(|(d, _)| *d).collect();
    let columns = (0..idx.len())
        .map(|j| rows.iter().map(|(_, v)| v[j]).collect())
        .collect();
    Ok(CsvLoad {
        panel: Panel::new(dates, selected, columns)?,
        dropped_rows: dropped,
    })
}

fn is_missing(cell: &str) -> bool {
    matches!(cell, "" | "." | "NA" | "N/A" | "NaN" | "nan" | "#N/A")
}

/// Writes `date,<names...>` with shortest round-trip float formatting.
pub fn write_csv_to<W: Write>(panel: &Panel, writer: W) -> Result<(), IngestError> {
    let mut w = csv::Writer::from_writer(writer);
    let mut header = vec!["date".to_string()];
    header.extend(panel.names().iter().cloned());
    w.write_record(&header)?;
    for (t, d) in panel.dates().iter().enumerate() {
        let mut row = vec![d.format("%Y-%m-%d").to_string()];
        row.extend(panel.columns().iter().map(|c| c[t].to_string()));
        w.write_record(&row)?;
    }
    w.flush().map_err(|source| IngestError::Io {
        path: "<writer>".into(),
        source,
    })?;
    Ok(())
}

pub fn write_csv(panel: &Panel, path: impl AsRef<Path>) -> Result<(), IngestError> {
    let mut buf = Vec::new();
    write_csv_to(panel, &mut buf)?;
    let path = path.as_ref();
    crate::fsutil::write_atomic(path, &buf).map_err(|source| IngestError::Io {
        path: path.display().to_string(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cols(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn reads_complete_rows() {
        let mut text = String::from("date,a,b,c\n");
        for k in 0..300 {
            text.push_str(&format!(
                "{}-{:02}-01,{},{},{}\n",
                1990 + k / 12,
                k % 12 + 1,
                k,
                2 * k,
                3 * k
            ));
        }
        let load = read_csv(text.as_bytes(), "date", &cols(&["a", "c"])).unwrap();
        assert_eq!(load.panel.m(), 2);
        assert_eq!(load.panel.len(), 300);
        assert_eq!(load.dropped_rows, 0);
        assert_eq!(load.panel.column(1)[10], 30.0);
    }

    #[test]
    fn drops_rows_with_missing_values() {
        let text = "date,a,b\n2000-01,1,2\n2000-02,,3\n2000-03,2,4\n2000-04,3,.\n2000-05,4,5\n2000-06,5,6\n";
        // six rows, two incomplete
        let load = read_csv(text.as_bytes(), "date", &[]).unwrap();
        assert_eq!(load.panel.len(), 4);
        assert_eq!(load.dropped_rows, 2);

        let text = "date,a\n2000-01-01,1\n2000-02-01,\n2000-03-01,2\n2000-04-01,3\n2000-05-01,4\n";
        let load = read_csv(text.as_bytes(), "date", &[]).unwrap();
        assert_eq!(load.panel.len(), 4);
        assert_eq!(load.dropped_rows, 1);
    }

    #[test]
    fn sorts_by_date() {
        let text = "date,a\n2000-03-01,3\n2000-01-01,1\n2000-02-01,2\n";
        let load = read_csv(text.as_bytes(), "date", &[]).unwrap();
        assert_eq!(load.panel.column(0), &[1.0, 2.0, 3.0]);
    }

    #[test]
    fn duplicate_date_is_an_error() {
        let text = "date,a\n2000-01-01,1\n2000-01,2\n";
        assert!(matches!(
            read_csv(text.as_bytes(), "date", &[]),
            Err(IngestError::DuplicateDate(_))
        ));
    }

    #[test]
    fn unknown_column_and_empty() {
        let text = "date,a\n2000-01-01,1\n";
        assert!(matches!(
            read_csv(text.as_bytes(), "date", &cols(&["zz"])),
            Err(IngestError::UnknownColumn(c)) if c == "zz"
        ));
        assert!(matches!(
            read_csv(text.as_bytes(), "when", &[]),
            Err(IngestError::UnknownColumn(_))
        ));
        let text = "date,a\n2000-01-01,\n";
        assert!(matches!(
            read_csv(text.as_bytes(), "date", &[]),
            Err(IngestError::NoUsableRows { dropped: 1 })
        ));
    }

    #[test]
    fn missing_file() {
        assert!(matches!(
            load_csv("/nonexistent/x.csv", "date", &[]),
            Err(IngestError::Io { .. })
        ));
    }
}
