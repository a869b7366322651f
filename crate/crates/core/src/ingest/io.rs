//! Delimited-text readers and writers for the four input schemas.

use std::collections::HashMap;
use std::io::{Read, Write};
use std::ops::RangeInclusive;

use chrono::{DateTime, NaiveDateTime, SecondsFormat, Utc};
use indexmap::IndexMap;

use super::domain::normalize_domain;
use super::records::{DemographicRecord, Gender, RawEvent, SessionRecord, TransactionRecord};
use crate::error::{Error, Result};

pub const SESSION_COLUMNS: &[&str] = &[
    "user_id",
    "start_time",
    "duration_s",
    "location",
    "domain",
    "isp",
    "http_requests",
    "service_class",
    "bytes",
];
pub const DEMOGRAPHIC_COLUMNS: &[&str] = &["user_id", "gender", "birth_year", "enrol_year", "degree_type"];
pub const TRANSACTION_COLUMNS: &[&str] = &["user_id", "timestamp", "amount"];
pub const EVENT_COLUMNS: &[&str] = &["user_id", "timestamp", "domain", "bytes", "http_requests"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ErrorPolicy {
    /// Record malformed rows in the report and keep going.
    #[default]
    SkipAndCount,
    /// Abort on the first malformed row.
    FailFast,
}

#[derive(Debug, Clone)]
pub struct ParseOptions {
    pub delimiter: u8,
    pub policy: ErrorPolicy,
    /// Accepted birth years.
    pub birth_years: RangeInclusive<i32>,
    /// Cut domains down to their registrable part (`img.sinaimg.cn` -> `sinaimg.cn`).
    pub truncate_registrable: bool,
}

impl Default for ParseOptions {
    fn default() -> Self {
        Self {
            delimiter: b',',
            policy: ErrorPolicy::SkipAndCount,
            birth_years: 1900..=2100,
            truncate_registrable: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RowError {
    /// 1-based line number in the source, header included.
    pub line: u64,
    pub message: String,
}

/// Records parsed from one source together with the rows that were rejected.
#[derive(Debug, Clone)]
pub struct Parsed<T> {
    pub records: Vec<T>,
    pub errors: Vec<RowError>,
    pub warnings: Vec<String>,
}

impl<T> Default for Parsed<T> {
    fn default() -> Self {
        Self {
            records: Vec::new(),
            errors: Vec::new(),
            warnings: Vec::new(),
        }
    }
}

struct Row<'a> {
    record: &'a csv::StringRecord,
    columns: &'a HashMap<&'static str, usize>,
}

impl Row<'_> {
    fn get(&self, name: &str) -> &str {
        self.record.get(self.columns[name]).unwrap_or("").trim()
    }

    fn opt(&self, name: &str) -> Option<String> {
        let v = self.get(name);
        (!v.is_empty()).then(|| v.to_string())
    }

    fn user_id(&self) -> Result<String, String> {
        let v = self.get("user_id");
        if v.is_empty() {
            Err("empty user_id".into())
        } else {
            Ok(v.to_string())
        }
    }

    fn count(&self, name: &str) -> Result<u64, String> {
        let v = self.get(name);
        let n: i64 = v.parse().map_err(|_| format!("{name}: `{v}` is not an integer"))?;
        u64::try_from(n).map_err(|_| format!("{name} must be non-negative, got {n}"))
    }

    fn year(&self, name: &str) -> Result<Option<i32>, String> {
        let v = self.get(name);
        if v.is_empty() {
            return Ok(None);
        }
        v.parse()
            .map(Some)
            .map_err(|_| format!("{name}: `{v}` is not a year"))
    }

    fn timestamp(&self, name: &str) -> Result<DateTime<Utc>, String> {
        let v = self.get(name);
        parse_timestamp(v).ok_or_else(|| format!("{name}: `{v}` is not an ISO-8601 UTC timestamp"))
    }

    fn domain(&self, truncate: bool) -> Result<String, String> {
        let v = self.get("domain");
        normalize_domain(v, truncate).ok_or_else(|| format!("domain: `{v}` is not a domain name"))
    }
}

/// Accepts RFC 3339 (`2014-09-01T08:00:00Z`, offsets converted to UTC) and
/// offset-less `YYYY-MM-DD[T ]HH:MM:SS`, read as UTC.
pub fn parse_timestamp(s: &str) -> Option<DateTime<Utc>> {
    if let Ok(t) = DateTime::parse_from_rfc3339(s) {
        return Some(t.with_timezone(&Utc));
    }
    ["%Y-%m-%dT%H:%M:%S", "%Y-%m-%d %H:%M:%S"]
        .iter()
        .find_map(|f| NaiveDateTime::parse_from_str(s, f).ok())
        .map(|t| t.and_utc())
}

pub fn format_timestamp(t: &DateTime<Utc>) -> String {
    t.to_rfc3339_opts(SecondsFormat::Secs, true)
}

fn read_rows<R, T, F>(source: R, opts: &ParseOptions, what: &str, schema: &'static [&'static str], mut convert: F) -> Result<Parsed<T>>
where
    R: Read,
    F: FnMut(&Row<'_>) -> Result<T, String>,
{
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(opts.delimiter)
        .has_headers(false)
        .flexible(true)
        .from_reader(source);
    let mut out = Parsed::default();
    let mut record = csv::StringRecord::new();
    if !reader.read_record(&mut record)? {
        return Ok(out);
    }
    let header: HashMap<&str, usize> = record.iter().enumerate().map(|(i, h)| (h.trim(), i)).collect();
    let mut columns = HashMap::new();
    for &name in schema {
        match header.get(name) {
            Some(&i) => {
                columns.insert(name, i);
            }
            None => return Err(Error::format(what, format!("header is missing column `{name}`"))),
        }
    }
    let width = record.len();
    loop {
        match reader.read_record(&mut record) {
            Ok(false) => break,
            Ok(true) => {}
            Err(e) => {
                let line = e.position().map_or(0, |p| p.line());
                let message = e.to_string();
                if opts.policy == ErrorPolicy::FailFast {
                    return Err(Error::Row { line, message });
                }
                out.errors.push(RowError { line, message });
                continue;
            }
        }
        let line = record.position().map_or(0, |p| p.line());
        if record.len() == 1 && record[0].trim().is_empty() {
            continue;
        }
        let converted = if record.len() != width {
            Err(format!("expected {width} fields, found {}", record.len()))
        } else {
            convert(&Row { record: &record, columns: &columns })
        };
        match converted {
            Ok(r) => out.records.push(r),
            Err(message) if opts.policy == ErrorPolicy::FailFast => return Err(Error::Row { line, message }),
            Err(message) => out.errors.push(RowError { line, message }),
        }
    }
    if !out.errors.is_empty() {
        log::warn!("{what}: skipped {} malformed rows", out.errors.len());
    }
    Ok(out)
}

/// Reads a session file with columns
/// `user_id,start_time,duration_s,location,domain,isp,http_requests,service_class,bytes`.
pub fn parse_sessions<R: Read>(source: R, opts: &ParseOptions) -> Result<Parsed<SessionRecord>> {
    read_rows(source, opts, "session file", SESSION_COLUMNS, |row| {
        Ok(SessionRecord {
            user_id: row.user_id()?,
            start_time: row.timestamp("start_time")?,
            duration: row.count("duration_s")?,
            location: row.get("location").to_string(),
            domain: row.domain(opts.truncate_registrable)?,
            isp: row.opt("isp"),
            http_requests: row.count("http_requests")?,
            service_class: row.opt("service_class"),
            bytes: row.count("bytes")?,
        })
    })
}

/// Reads `user_id,gender,birth_year,enrol_year,degree_type`. A repeated
/// user_id replaces the earlier row and adds a warning.
pub fn parse_demographics<R: Read>(source: R, opts: &ParseOptions) -> Result<Parsed<DemographicRecord>> {
    let parsed = read_rows(source, opts, "demographics file", DEMOGRAPHIC_COLUMNS, |row| {
        let gender_raw = row.get("gender");
        let gender = Gender::parse(gender_raw).ok_or_else(|| format!("gender: `{gender_raw}` is not male/female/unknown"))?;
        let birth_year = row.year("birth_year")?;
        if let Some(y) = birth_year {
            if !opts.birth_years.contains(&y) {
                return Err(format!(
                    "birth_year {y} outside plausible range {}-{}",
                    opts.birth_years.start(),
                    opts.birth_years.end()
                ));
            }
        }
        Ok(DemographicRecord {
            user_id: row.user_id()?,
            gender,
            birth_year,
            enrol_year: row.year("enrol_year")?,
            degree_type: row.opt("degree_type"),
        })
    })?;
    let mut by_user: IndexMap<String, DemographicRecord> = IndexMap::with_capacity(parsed.records.len());
    let mut warnings = parsed.warnings;
    for rec in parsed.records {
        if let Some(old) = by_user.insert(rec.user_id.clone(), rec) {
            let msg = format!("duplicate demographics for user `{}`; keeping the last row", old.user_id);
            log::warn!("{msg}");
            warnings.push(msg);
        }
    }
    Ok(Parsed {
        records: by_user.into_values().collect(),
        errors: parsed.errors,
        warnings,
    })
}

/// Reads `user_id,timestamp,amount`.
pub fn parse_transactions<R: Read>(source: R, opts: &ParseOptions) -> Result<Parsed<TransactionRecord>> {
    read_rows(source, opts, "transactions file", TRANSACTION_COLUMNS, |row| {
        let raw = row.get("amount");
        let amount: f64 = raw.parse().map_err(|_| format!("amount: `{raw}` is not a number"))?;
        if !amount.is_finite() || amount < 0.0 {
            return Err(format!("amount must be a non-negative number, got {raw}"));
        }
        Ok(TransactionRecord {
            user_id: row.user_id()?,
            timestamp: row.timestamp("timestamp")?,
            amount,
        })
    })
}

/// Reads `user_id,timestamp,domain,bytes,http_requests`.
pub fn parse_events<R: Read>(source: R, opts: &ParseOptions) -> Result<Parsed<RawEvent>> {
    read_rows(source, opts, "event file", EVENT_COLUMNS, |row| {
        Ok(RawEvent {
            user_id: row.user_id()?,
            timestamp: row.timestamp("timestamp")?,
            domain: row.domain(opts.truncate_registrable)?,
            bytes: row.count("bytes")?,
            http_requests: row.count("http_requests")?,
        })
    })
}

fn writer<W: Write>(sink: W, delimiter: u8) -> csv::Writer<W> {
    csv::WriterBuilder::new().delimiter(delimiter).from_writer(sink)
}

pub fn write_sessions<W: Write>(sink: W, delimiter: u8, sessions: &[SessionRecord]) -> Result<()> {
    let mut w = writer(sink, delimiter);
    w.write_record(SESSION_COLUMNS)?;
    for s in sessions {
        w.write_record([
            s.user_id.as_str(),
            &format_timestamp(&s.start_time),
            &s.duration.to_string(),
            &s.location,
            &s.domain,
            s.isp.as_deref().unwrap_or(""),
            &s.http_requests.to_string(),
            s.service_class.as_deref().unwrap_or(""),
            &s.bytes.to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io("<sessions>", e))
}

pub fn write_demographics<W: Write>(sink: W, delimiter: u8, records: &[DemographicRecord]) -> Result<()> {
    let year = |y: Option<i32>| y.map(|y| y.to_string()).unwrap_or_default();
    let mut w = writer(sink, delimiter);
    w.write_record(DEMOGRAPHIC_COLUMNS)?;
    for r in records {
        w.write_record([
            r.user_id.as_str(),
            r.gender.as_str(),
            &year(r.birth_year),
            &year(r.enrol_year),
            r.degree_type.as_deref().unwrap_or(""),
        ])?;
    }
    w.flush().map_err(|e| Error::io("<demographics>", e))
}

pub fn write_transactions<W: Write>(sink: W, delimiter: u8, records: &[TransactionRecord]) -> Result<()> {
    let mut w = writer(sink, delimiter);
    w.write_record(TRANSACTION_COLUMNS)?;
    for r in records {
        w.write_record([r.user_id.as_str(), &format_timestamp(&r.timestamp), &format!("{}", r.amount)])?;
    }
    w.flush().map_err(|e| Error::io("<transactions>", e))
}

pub fn write_events<W: Write>(sink: W, delimiter: u8, events: &[RawEvent]) -> Result<()> {
    let mut w = writer(sink, delimiter);
    w.write_record(EVENT_COLUMNS)?;
    for e in events {
        w.write_record([
            e.user_id.as_str(),
            &format_timestamp(&e.timestamp),
            &e.domain,
            &e.bytes.to_string(),
            &e.http_requests.to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io("<events>", e))
}
