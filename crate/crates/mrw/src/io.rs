//! CSV formats: long-format prices, calendar skips, series, news counts.

use std::collections::{BTreeMap, HashMap};
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::sync::Arc;

use chrono::{NaiveDate, NaiveDateTime};
use mrw_core::{NewsSeries, PriceSeries, Series, TradingCalendar};

use crate::error::{Error, Result};

const TIMESTAMP_FORMATS: &[&str] = &[
    "%Y-%m-%dT%H:%M",
    "%Y-%m-%dT%H:%M:%S",
    "%Y-%m-%d %H:%M",
    "%Y-%m-%d %H:%M:%S",
];

/// Parses an ISO-8601 minute timestamp (UTC, optional `Z`, seconds must be 0).
pub fn parse_timestamp(s: &str) -> Option<NaiveDateTime> {
    let s = s.trim();
    let s = s.strip_suffix('Z').unwrap_or(s);
    TIMESTAMP_FORMATS
        .iter()
        .find_map(|f| NaiveDateTime::parse_from_str(s, f).ok())
        .filter(|t| chrono::Timelike::second(t) == 0)
}

pub fn format_timestamp(t: NaiveDateTime) -> String {
    t.format("%Y-%m-%dT%H:%M").to_string()
}

pub fn parse_date(s: &str) -> Option<NaiveDate> {
    NaiveDate::parse_from_str(s.trim(), "%Y-%m-%d").ok()
}

fn open_csv(path: &Path) -> Result<csv::Reader<File>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(file))
}

fn column(headers: &csv::StringRecord, name: &str, path: &Path) -> Result<usize> {
    headers
        .iter()
        .position(|h| h.eq_ignore_ascii_case(name))
        .ok_or_else(|| Error::format(path, format!("missing column `{name}`")))
}

fn csv_err(path: &Path, e: csv::Error) -> Error {
    Error::format(path, e.to_string())
}

/// Result of reading a long-format price file.
#[derive(Debug, Clone)]
pub struct Ingested {
    pub calendar: Arc<TradingCalendar>,
    /// One series per issue, sorted by issue id.
    pub prices: Vec<PriceSeries>,
    /// One line per rejected or masked row.
    pub report: Vec<String>,
}

/// Reads `timestamp,issue,price` rows. Rows with a bad timestamp are skipped
/// and rows with a non-numeric or non-positive price are masked; both are
/// recorded in the report. Duplicate `(timestamp, issue)` pairs reject the
/// file. An optional `date,open_skip_minutes` file sets opening skips.
pub fn load_prices(path: &Path, calendar_path: Option<&Path>) -> Result<Ingested> {
    let mut reader = open_csv(path)?;
    let headers = reader.headers().map_err(|e| csv_err(path, e))?.clone();
    let (ti, ii, pi) = (
        column(&headers, "timestamp", path)?,
        column(&headers, "issue", path)?,
        column(&headers, "price", path)?,
    );

    let mut report = Vec::new();
    let mut cells: HashMap<(NaiveDateTime, String), (usize, Option<f64>)> = HashMap::new();
    let mut duplicates = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let row = i + 2;
        let record = record.map_err(|e| csv_err(path, e))?;
        let (Some(ts), Some(issue), Some(price)) = (record.get(ti), record.get(ii), record.get(pi))
        else {
            report.push(format!("row {row}: missing field"));
            continue;
        };
        let Some(ts) = parse_timestamp(ts) else {
            report.push(format!("row {row}: unparseable timestamp `{ts}`"));
            continue;
        };
        if issue.is_empty() {
            report.push(format!("row {row}: empty issue id"));
            continue;
        }
        let value = match price.parse::<f64>() {
            Ok(p) if p > 0.0 && p.is_finite() => Some(p),
            Ok(p) => {
                report.push(format!(
                    "row {row}: issue {issue} at {}: non-positive price {p}",
                    format_timestamp(ts)
                ));
                None
            }
            Err(_) => {
                report.push(format!(
                    "row {row}: issue {issue} at {}: non-numeric price `{price}`",
                    format_timestamp(ts)
                ));
                None
            }
        };
        let key = (ts, issue.to_string());
        if let Some((first, _)) = cells.get(&key) {
            duplicates.push(format!(
                "rows {first} and {row} ({} {issue})",
                format_timestamp(ts)
            ));
            continue;
        }
        cells.insert(key, (row, value));
    }
    if !duplicates.is_empty() {
        return Err(Error::Duplicates {
            path: path.to_path_buf(),
            rows: duplicates,
        });
    }
    if cells.values().all(|(_, v)| v.is_none()) {
        return Err(Error::format(path, "no parseable price rows"));
    }

    let mut timestamps: Vec<NaiveDateTime> = cells.keys().map(|k| k.0).collect();
    timestamps.sort();
    timestamps.dedup();
    let mut calendar = TradingCalendar::from_timestamps(timestamps)?;
    if let Some(cp) = calendar_path {
        calendar.set_open_skips(&load_open_skips(cp)?)?;
    }
    let calendar = Arc::new(calendar);

    let mut by_issue: BTreeMap<String, Vec<Option<f64>>> = BTreeMap::new();
    for ((ts, issue), (_, value)) in cells {
        let pos = calendar.position_of(ts).expect("timestamp in calendar");
        by_issue
            .entry(issue)
            .or_insert_with(|| vec![None; calendar.len()])[pos] = value;
    }
    let prices = by_issue
        .into_iter()
        .map(|(issue, values)| {
            PriceSeries::new(issue, Series::new(Arc::clone(&calendar), values)?)
                .map_err(Error::from)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Ingested {
        calendar,
        prices,
        report,
    })
}

/// Reads `date,open_skip_minutes`.
pub fn load_open_skips(path: &Path) -> Result<Vec<(NaiveDate, usize)>> {
    let mut reader = open_csv(path)?;
    let headers = reader.headers().map_err(|e| csv_err(path, e))?.clone();
    let (di, si) = (
        column(&headers, "date", path)?,
        column(&headers, "open_skip_minutes", path)?,
    );
    let mut out = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| csv_err(path, e))?;
        let date = record
            .get(di)
            .and_then(parse_date)
            .ok_or_else(|| Error::format(path, format!("row {}: bad date", i + 2)))?;
        let skip = record
            .get(si)
            .and_then(|s| s.parse::<usize>().ok())
            .ok_or_else(|| Error::format(path, format!("row {}: bad skip", i + 2)))?;
        out.push((date, skip));
    }
    Ok(out)
}

/// A value series read from CSV, with whether it carried timestamps.
#[derive(Debug, Clone)]
pub struct LoadedSeries {
    pub series: Series,
    pub timestamped: bool,
    pub column: String,
}

/// Reads one value column. A `timestamp` column defines the calendar
/// (sessions by date); otherwise rows are consecutive minutes of a single
/// session. Empty or non-numeric cells are masked. Without `column`, the
/// first column other than `timestamp`/`index` is used.
pub fn read_series(path: &Path, column_name: Option<&str>) -> Result<LoadedSeries> {
    let mut reader = open_csv(path)?;
    let headers = reader.headers().map_err(|e| csv_err(path, e))?.clone();
    let ts_col = headers
        .iter()
        .position(|h| h.eq_ignore_ascii_case("timestamp"));
    let value_col = match column_name {
        Some(name) => column(&headers, name, path)?,
        None => headers
            .iter()
            .position(|h| !h.eq_ignore_ascii_case("timestamp") && !h.eq_ignore_ascii_case("index"))
            .ok_or_else(|| Error::format(path, "no value column"))?,
    };
    let mut timestamps = Vec::new();
    let mut values = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| csv_err(path, e))?;
        if let Some(tc) = ts_col {
            let raw = record.get(tc).unwrap_or("");
            let ts = parse_timestamp(raw).ok_or_else(|| {
                Error::format(
                    path,
                    format!("row {}: unparseable timestamp `{raw}`", i + 2),
                )
            })?;
            timestamps.push(ts);
        }
        let v = record
            .get(value_col)
            .and_then(|s| s.parse::<f64>().ok())
            .filter(|v| v.is_finite());
        values.push(v);
    }
    if values.is_empty() {
        return Err(Error::format(path, "no data rows"));
    }
    let series = if ts_col.is_some() {
        let calendar = TradingCalendar::from_timestamps(timestamps)
            .map_err(|e| Error::format(path, e.to_string()))?;
        Series::new(Arc::new(calendar), values)?
    } else {
        Series::from_options(values)
    };
    Ok(LoadedSeries {
        series,
        timestamped: ts_col.is_some(),
        column: headers[value_col].to_string(),
    })
}

/// Reads `date,count`.
pub fn read_news(path: &Path) -> Result<NewsSeries> {
    let mut reader = open_csv(path)?;
    let headers = reader.headers().map_err(|e| csv_err(path, e))?.clone();
    let (di, ci) = (
        column(&headers, "date", path)?,
        column(&headers, "count", path)?,
    );
    let mut dates = Vec::new();
    let mut counts = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| csv_err(path, e))?;
        let row = i + 2;
        dates.push(
            record
                .get(di)
                .and_then(parse_date)
                .ok_or_else(|| Error::format(path, format!("row {row}: bad date")))?,
        );
        counts.push(
            record
                .get(ci)
                .and_then(|s| s.parse::<u64>().ok())
                .ok_or_else(|| Error::format(path, format!("row {row}: bad count")))?,
        );
    }
    Ok(NewsSeries::new(dates, counts)?)
}

/// Reads the `window_end` and `var_omega` columns of a window-scan table.
pub fn read_trajectory(path: &Path) -> Result<Vec<(NaiveDate, f64)>> {
    let mut reader = open_csv(path)?;
    let headers = reader.headers().map_err(|e| csv_err(path, e))?.clone();
    let (ei, vi) = (
        column(&headers, "window_end", path)?,
        column(&headers, "var_omega", path)?,
    );
    let mut out = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| csv_err(path, e))?;
        let row = i + 2;
        let raw = record.get(ei).unwrap_or("");
        let date = parse_timestamp(raw)
            .map(|t| t.date())
            .or_else(|| parse_date(raw))
            .ok_or_else(|| {
                Error::format(
                    path,
                    format!("row {row}: window_end `{raw}` is not a timestamp"),
                )
            })?;
        let var = record
            .get(vi)
            .and_then(|s| s.parse::<f64>().ok())
            .ok_or_else(|| Error::format(path, format!("row {row}: bad var_omega")))?;
        out.push((date, var));
    }
    Ok(out)
}

/// Buffered text writer that reports the path on failure.
pub struct TextWriter {
    path: std::path::PathBuf,
    inner: BufWriter<File>,
}

impl TextWriter {
    pub fn create(path: &Path) -> Result<Self> {
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        Ok(Self {
            path: path.to_path_buf(),
            inner: BufWriter::new(file),
        })
    }

    pub fn line(&mut self, line: impl AsRef<str>) -> Result<()> {
        let path = &self.path;
        self.inner
            .write_all(line.as_ref().as_bytes())
            .and_then(|_| self.inner.write_all(b"\n"))
            .map_err(|e| Error::io(path, e))
    }

    pub fn finish(mut self) -> Result<()> {
        self.inner.flush().map_err(|e| Error::io(&self.path, e))
    }
}

/// Writes `key=value` lines.
pub fn write_report(path: &Path, pairs: &[(&str, String)]) -> Result<()> {
    let mut w = TextWriter::create(path)?;
    for (k, v) in pairs {
        w.line(format!("{k}={v}"))?;
    }
    w.finish()
}

/// Empty string for missing values, shortest round-trip form otherwise.
pub fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(String::new, |v| v.to_string())
}
