//! Timestamped scalar series and their CSV files.
//!
//! Series files carry the exact header `timestamp,value`; score files carry
//! `timestamp,value,anomaly_score`. Timestamps are ISO-8601 instants,
//! normalized to UTC on read and written as RFC 3339 with a `Z` suffix.

use std::io::Write;
use std::path::Path;

use chrono::{DateTime, NaiveDateTime, SecondsFormat, Utc};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const SERIES_HEADER: [&str; 2] = ["timestamp", "value"];
pub const SCORES_HEADER: [&str; 3] = ["timestamp", "value", "anomaly_score"];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub timestamp: DateTime<Utc>,
    pub value: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScoredRecord {
    pub timestamp: DateTime<Utc>,
    pub value: f64,
    pub anomaly_score: f64,
}

/// Parses an ISO-8601 instant. Inputs without an offset are taken as UTC.
pub fn parse_timestamp(text: &str) -> Option<DateTime<Utc>> {
    let text = text.trim();
    if let Ok(t) = DateTime::parse_from_rfc3339(text) {
        return Some(t.with_timezone(&Utc));
    }
    for fmt in ["%Y-%m-%dT%H:%M:%S%.f", "%Y-%m-%d %H:%M:%S%.f"] {
        if let Ok(t) = NaiveDateTime::parse_from_str(text, fmt) {
            return Some(t.and_utc());
        }
    }
    None
}

pub fn format_timestamp(t: &DateTime<Utc>) -> String {
    t.to_rfc3339_opts(SecondsFormat::AutoSi, true)
}

/// Seconds elapsed from `from` to `to`, with sub-second precision.
pub fn seconds_between(from: &DateTime<Utc>, to: &DateTime<Utc>) -> f64 {
    let d = *to - *from;
    d.num_seconds() as f64 + d.subsec_nanos() as f64 * 1e-9
}

fn reader(path: &Path) -> Result<csv::Reader<std::fs::File>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::ReaderBuilder::new().has_headers(false).trim(csv::Trim::All).from_reader(file))
}

fn parse_error(path: &Path, line: usize, message: impl Into<String>) -> Error {
    Error::Parse { path: path.to_path_buf(), line, message: message.into() }
}

/// Reads rows under an exact header, checking timestamp order.
fn read_rows(path: &Path, header: &[&str]) -> Result<Vec<(DateTime<Utc>, Vec<f64>)>> {
    let mut rdr = reader(path)?;
    let mut rows = Vec::new();
    let mut seen_header = false;
    let mut last: Option<DateTime<Utc>> = None;
    for result in rdr.records() {
        let rec = result.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            parse_error(path, line, e.to_string())
        })?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        if !seen_header {
            let got: Vec<&str> = rec.iter().collect();
            if got != header {
                return Err(parse_error(
                    path,
                    line,
                    format!("expected header `{}`, found `{}`", header.join(","), got.join(",")),
                ));
            }
            seen_header = true;
            continue;
        }
        if rec.len() != header.len() {
            return Err(parse_error(path, line, format!("expected {} fields, found {}", header.len(), rec.len())));
        }
        let ts = parse_timestamp(&rec[0])
            .ok_or_else(|| parse_error(path, line, format!("invalid timestamp `{}`", &rec[0])))?;
        let mut values = Vec::with_capacity(header.len() - 1);
        for field in rec.iter().skip(1) {
            if field.is_empty() {
                return Err(parse_error(path, line, "missing value"));
            }
            let v: f64 = field.parse().map_err(|_| parse_error(path, line, format!("invalid number `{field}`")))?;
            if !v.is_finite() {
                return Err(parse_error(path, line, format!("non-finite value `{field}`")));
            }
            values.push(v);
        }
        if let Some(prev) = last {
            if ts < prev {
                return Err(Error::Stream(format!(
                    "{}:{line}: timestamp {} precedes {}",
                    path.display(),
                    format_timestamp(&ts),
                    format_timestamp(&prev)
                )));
            }
        }
        last = Some(ts);
        rows.push((ts, values));
    }
    if !seen_header {
        return Err(parse_error(path, 1, "empty file, missing header"));
    }
    Ok(rows)
}

pub fn read_series(path: &Path) -> Result<Vec<Record>> {
    Ok(read_rows(path, &SERIES_HEADER)?.into_iter().map(|(timestamp, v)| Record { timestamp, value: v[0] }).collect())
}

pub fn read_scores(path: &Path) -> Result<Vec<ScoredRecord>> {
    Ok(read_rows(path, &SCORES_HEADER)?
        .into_iter()
        .map(|(timestamp, v)| ScoredRecord { timestamp, value: v[0], anomaly_score: v[1] })
        .collect())
}

fn create(path: &Path) -> Result<std::io::BufWriter<std::fs::File>> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    Ok(std::io::BufWriter::new(file))
}

pub fn write_series(path: &Path, records: &[Record]) -> Result<()> {
    let mut out = create(path)?;
    let io = |e| Error::io(path, e);
    writeln!(out, "{}", SERIES_HEADER.join(",")).map_err(io)?;
    for r in records {
        writeln!(out, "{},{}", format_timestamp(&r.timestamp), r.value).map_err(io)?;
    }
    out.flush().map_err(io)
}

pub fn write_scores(path: &Path, records: &[ScoredRecord]) -> Result<()> {
    let mut out = create(path)?;
    let io = |e| Error::io(path, e);
    writeln!(out, "{}", SCORES_HEADER.join(",")).map_err(io)?;
    for r in records {
        writeln!(out, "{},{},{}", format_timestamp(&r.timestamp), r.value, r.anomaly_score).map_err(io)?;
    }
    out.flush().map_err(io)
}
