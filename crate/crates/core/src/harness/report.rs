//! CSV and JSON output of scan rows and other harness records.

use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::chain::Violation;
use super::fit::{Field, FitResult};
use super::scan::ScanRow;
use super::verify::VerifyReport;
use crate::error::{Error, Result};
use crate::geometry::ComplexVector;
use crate::metrics::{ext_real, MetricKind};
use crate::Complex64;

pub const CSV_HEADER: [&str; 9] = [
    "delta",
    "x_re",
    "x_im",
    "kind",
    "lower",
    "upper",
    "method",
    "margin",
    "wallclock_ms",
];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(Error::Parse {
                input: s.to_string(),
                key: other.to_string(),
            }),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LabeledFit {
    pub kind: MetricKind,
    pub field: Field,
    #[serde(flatten)]
    pub fit: FitResult,
}

/// Everything a report can hold. CSV output carries only `rows`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Report {
    #[serde(default)]
    pub rows: Vec<ScanRow>,
    #[serde(default)]
    pub fits: Vec<LabeledFit>,
    #[serde(default)]
    pub verifications: Vec<VerifyReport>,
    #[serde(default)]
    pub violations: Vec<Violation>,
}

fn join(values: impl Iterator<Item = f64>) -> String {
    values.map(ext_real::format).collect::<Vec<_>>().join(";")
}

fn csv_error(e: csv::Error) -> Error {
    Error::Serialization(e.to_string())
}

/// Rows as CSV text with the fixed header; vector components are `;`-joined.
pub fn rows_to_csv(rows: &[ScanRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_HEADER).map_err(csv_error)?;
    for r in rows {
        w.write_record([
            ext_real::format(r.delta),
            join(r.x.iter().map(|z| z.re)),
            join(r.x.iter().map(|z| z.im)),
            r.kind.name().to_string(),
            ext_real::format(r.lower),
            ext_real::format(r.upper),
            r.method.clone(),
            r.margin.map(ext_real::format).unwrap_or_default(),
            r.wallclock_ms.to_string(),
        ])
        .map_err(csv_error)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Serialization(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Serialization(e.to_string()))
}

pub fn rows_from_csv(text: &str) -> Result<Vec<ScanRow>> {
    let mut rd = csv::Reader::from_reader(text.as_bytes());
    let header: Vec<String> = rd.headers().map_err(csv_error)?.iter().map(str::to_string).collect();
    if header != CSV_HEADER {
        return Err(Error::Serialization(format!("unexpected CSV header {header:?}")));
    }
    let num = |s: &str, key: &str| {
        ext_real::parse(s).ok_or_else(|| Error::Parse {
            input: s.to_string(),
            key: key.to_string(),
        })
    };
    let list = |s: &str, key: &str| -> Result<Vec<f64>> {
        if s.is_empty() {
            return Ok(Vec::new());
        }
        s.split(';').map(|t| num(t, key)).collect()
    };
    let mut rows = Vec::new();
    for rec in rd.records() {
        let rec = rec.map_err(csv_error)?;
        let re = list(&rec[1], "x_re")?;
        let im = list(&rec[2], "x_im")?;
        if re.len() != im.len() {
            return Err(Error::Serialization("x_re and x_im lengths differ".into()));
        }
        rows.push(ScanRow {
            delta: num(&rec[0], "delta")?,
            x: ComplexVector::new(re.into_iter().zip(im).map(|(a, b)| Complex64::new(a, b)).collect()),
            kind: rec[3].parse()?,
            lower: num(&rec[4], "lower")?,
            upper: num(&rec[5], "upper")?,
            method: rec[6].to_string(),
            margin: if rec[7].is_empty() { None } else { Some(num(&rec[7], "margin")?) },
            wallclock_ms: rec[8].parse().map_err(|_| Error::Parse {
                input: rec[8].to_string(),
                key: "wallclock_ms".into(),
            })?,
        });
    }
    Ok(rows)
}

pub fn report_to_json(report: &Report) -> Result<String> {
    serde_json::to_string_pretty(report).map_err(|e| Error::Serialization(e.to_string()))
}

/// Writes `report` to `path`; CSV carries the rows only.
pub fn emit_report(report: &Report, format: Format, path: &Path) -> Result<()> {
    let text = match format {
        Format::Csv => rows_to_csv(&report.rows)?,
        Format::Json => report_to_json(report)?,
    };
    fs::write(path, text).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Reads rows from a CSV file, or a JSON report or row array.
pub fn read_rows(path: &Path) -> Result<Vec<ScanRow>> {
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let is_json = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"))
        || text.trim_start().starts_with(['{', '[']);
    if is_json {
        if let Ok(rows) = serde_json::from_str::<Vec<ScanRow>>(&text) {
            return Ok(rows);
        }
        let report: Report = serde_json::from_str(&text).map_err(|e| Error::Serialization(e.to_string()))?;
        Ok(report.rows)
    } else {
        rows_from_csv(&text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_rows() -> Vec<ScanRow> {
        vec![
            ScanRow {
                delta: 1e-3,
                x: ComplexVector::new(vec![Complex64::new(1.0, 0.5), Complex64::new(0.0, -2.0)]),
                kind: MetricKind::Kobayashi,
                lower: 0.25,
                upper: f64::INFINITY,
                method: "lemkob/none".into(),
                margin: None,
                wallclock_ms: 0,
            },
            ScanRow {
                delta: 1e-4,
                x: ComplexVector::from_re(&[1.0, 0.0]),
                kind: MetricKind::Caratheodory,
                lower: 1.0,
                upper: 2.5,
                method: "caratheodory/kob_upper".into(),
                margin: Some(1.5e-7),
                wallclock_ms: 12,
            },
        ]
    }

    #[test]
    fn header_only_for_empty() {
        let text = rows_to_csv(&[]).unwrap();
        assert_eq!(text.lines().count(), 1);
        assert_eq!(text.trim_end(), CSV_HEADER.join(","));
    }

    #[test]
    fn csv_round_trip() {
        let rows = sample_rows();
        let text = rows_to_csv(&rows).unwrap();
        assert_eq!(text.lines().count(), 3);
        assert!(text.contains("1;0,0.5;-2"), "{text}");
        assert_eq!(rows_from_csv(&text).unwrap(), rows);
    }

    #[test]
    fn files_and_json() {
        let dir = tempfile::tempdir().unwrap();
        let report = Report {
            rows: sample_rows(),
            ..Default::default()
        };
        let (a, b) = (dir.path().join("a.json"), dir.path().join("b.csv"));
        emit_report(&report, Format::Json, &a).unwrap();
        emit_report(&report, Format::Csv, &b).unwrap();
        assert_eq!(read_rows(&a).unwrap(), report.rows);
        assert_eq!(read_rows(&b).unwrap(), report.rows);
        let missing = dir.path().join("nope").join("x.csv");
        match emit_report(&report, Format::Csv, &missing) {
            Err(Error::Io { path, .. }) => assert_eq!(path, missing),
            other => panic!("{other:?}"),
        }
    }
}
