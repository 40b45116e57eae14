//! JSON Lines and CSV readers/writers for trajectory logs.
//!
//! Both formats carry the same fields: `account_id`, `group`, `step`, `kind`,
//! `video_id`, `category`, `is_political`, `issue`, `ideology`. Missing labels
//! are `null` in JSON and an empty field in CSV.

use std::collections::{BTreeMap, HashSet};
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{AccountProfile, Dataset, ExposureRecord, Group, Ideology, Issue, Kind, DEFAULT_T_MAX};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LogFormat {
    JsonLines,
    Csv,
}

impl LogFormat {
    /// Guesses from the file extension; anything but `.csv` is JSON Lines.
    pub fn from_path(path: &Path) -> LogFormat {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("csv") => LogFormat::Csv,
            _ => LogFormat::JsonLines,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ParseOptions {
    /// Largest admissible step.
    pub t_max: u32,
}

impl Default for ParseOptions {
    fn default() -> Self {
        ParseOptions {
            t_max: DEFAULT_T_MAX,
        }
    }
}

#[derive(Debug, Deserialize)]
struct RawRecord {
    account_id: String,
    group: String,
    step: i64,
    kind: String,
    video_id: String,
    category: String,
    is_political: bool,
    #[serde(default)]
    issue: Option<String>,
    #[serde(default)]
    ideology: Option<String>,
}

#[derive(Serialize)]
struct OutRecord<'a> {
    account_id: &'a str,
    group: &'static str,
    step: u32,
    kind: &'static str,
    video_id: &'a str,
    category: &'a str,
    is_political: bool,
    issue: Option<&'static str>,
    ideology: Option<&'static str>,
}

fn token<T: FromStr<Err = String>>(line: usize, field: &'static str, s: &str) -> Result<T> {
    s.parse().map_err(|token| Error::Vocabulary { line, field, token })
}

impl RawRecord {
    fn validate(self, line: usize, opts: &ParseOptions) -> Result<(ExposureRecord, Group)> {
        let parse_err = |reason: String| Error::Parse { line, reason };
        if self.account_id.is_empty() {
            return Err(parse_err("empty account_id".into()));
        }
        if self.video_id.is_empty() {
            return Err(parse_err("empty video_id".into()));
        }
        if self.step < 1 || self.step > i64::from(opts.t_max) {
            return Err(parse_err(format!(
                "step {} outside 1..={}",
                self.step, opts.t_max
            )));
        }
        let group: Group = token(line, "group", &self.group)?;
        let kind: Kind = token(line, "kind", &self.kind)?;
        let issue = match self.issue.as_deref() {
            None | Some("") => None,
            Some(s) => Some(token::<Issue>(line, "issue", s)?),
        };
        let ideology = match self.ideology.as_deref() {
            None | Some("") => None,
            Some(s) => Some(token::<Ideology>(line, "ideology", s)?),
        };
        if !self.is_political && (issue.is_some() || ideology.is_some()) {
            return Err(parse_err(
                "issue/ideology labels on a non-political record".into(),
            ));
        }
        Ok((
            ExposureRecord {
                account_id: self.account_id,
                step: self.step as u32,
                kind,
                video_id: self.video_id,
                category: self.category,
                is_political: self.is_political,
                issue,
                ideology,
            },
            group,
        ))
    }
}

/// Accumulates validated records and enforces dataset-level invariants.
#[derive(Default)]
struct Collector {
    groups: BTreeMap<String, Group>,
    seen: HashSet<(String, u32, String, Kind)>,
    records: Vec<ExposureRecord>,
}

impl Collector {
    fn push(&mut self, line: usize, rec: ExposureRecord, group: Group) -> Result<()> {
        match self.groups.get(&rec.account_id) {
            Some(g) if *g != group => {
                return Err(Error::Parse {
                    line,
                    reason: format!(
                        "account {} listed as both {} and {}",
                        rec.account_id, g, group
                    ),
                })
            }
            Some(_) => {}
            None => {
                self.groups.insert(rec.account_id.clone(), group);
            }
        }
        let key = (rec.account_id.clone(), rec.step, rec.video_id.clone(), rec.kind);
        if !self.seen.insert(key) {
            return Err(Error::DuplicateRecord {
                line,
                account_id: rec.account_id,
                step: rec.step,
                video_id: rec.video_id,
                kind: rec.kind.as_str(),
            });
        }
        self.records.push(rec);
        Ok(())
    }

    fn finish(self) -> Dataset {
        let profiles = self
            .groups
            .into_iter()
            .map(|(account_id, group)| AccountProfile { account_id, group })
            .collect();
        Dataset::new(profiles, self.records)
    }
}

/// Parses a log held in memory.
pub fn parse_str(text: &str, format: LogFormat, opts: &ParseOptions) -> Result<Dataset> {
    let mut out = Collector::default();
    match format {
        LogFormat::JsonLines => {
            for (idx, raw_line) in text.lines().enumerate() {
                let line = idx + 1;
                let trimmed = raw_line.trim();
                if trimmed.is_empty() {
                    continue;
                }
                let raw: RawRecord = serde_json::from_str(trimmed).map_err(|e| Error::Parse {
                    line,
                    reason: e.to_string(),
                })?;
                let (rec, group) = raw.validate(line, opts)?;
                out.push(line, rec, group)?;
            }
        }
        LogFormat::Csv => {
            let mut reader = csv::ReaderBuilder::new()
                .has_headers(true)
                .from_reader(text.as_bytes());
            let headers = reader
                .headers()
                .map_err(|e| Error::Parse {
                    line: 1,
                    reason: e.to_string(),
                })?
                .clone();
            for row in reader.records() {
                let row = row.map_err(|e| Error::Parse {
                    line: e.position().map_or(0, |p| p.line() as usize),
                    reason: e.to_string(),
                })?;
                let line = row.position().map_or(0, |p| p.line() as usize);
                let raw: RawRecord = row.deserialize(Some(&headers)).map_err(|e| Error::Parse {
                    line,
                    reason: e.to_string(),
                })?;
                let (rec, group) = raw.validate(line, opts)?;
                out.push(line, rec, group)?;
            }
        }
    }
    Ok(out.finish())
}

pub fn parse_log(path: &Path, format: LogFormat) -> Result<Dataset> {
    parse_log_with(path, format, &ParseOptions::default())
}

pub fn parse_log_with(path: &Path, format: LogFormat, opts: &ParseOptions) -> Result<Dataset> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_str(&text, format, opts)
}

fn out_records<'a>(dataset: &'a Dataset) -> impl Iterator<Item = Result<OutRecord<'a>>> + 'a {
    let groups = dataset.groups();
    dataset.records.iter().map(move |r| {
        let group = groups.get(&r.account_id).ok_or_else(|| {
            Error::InvalidArgument(format!("no profile for account {}", r.account_id))
        })?;
        Ok(OutRecord {
            account_id: &r.account_id,
            group: group.as_str(),
            step: r.step,
            kind: r.kind.as_str(),
            video_id: &r.video_id,
            category: &r.category,
            is_political: r.is_political,
            issue: r.issue.map(Issue::as_str),
            ideology: r.ideology.map(Ideology::as_str),
        })
    })
}

fn io_err(e: impl Into<std::io::Error>) -> Error {
    Error::Io {
        path: "<writer>".into(),
        source: e.into(),
    }
}

pub fn write_jsonl<W: Write>(dataset: &Dataset, mut w: W) -> Result<()> {
    for rec in out_records(dataset) {
        let line = serde_json::to_string(&rec?).map_err(io_err)?;
        writeln!(w, "{line}").map_err(io_err)?;
    }
    w.flush().map_err(io_err)
}

pub fn write_csv<W: Write>(dataset: &Dataset, w: W) -> Result<()> {
    let mut writer = csv::Writer::from_writer(w);
    let mut wrote_any = false;
    for rec in out_records(dataset) {
        writer.serialize(rec?).map_err(io_err)?;
        wrote_any = true;
    }
    if !wrote_any {
        writer
            .write_record([
                "account_id",
                "group",
                "step",
                "kind",
                "video_id",
                "category",
                "is_political",
                "issue",
                "ideology",
            ])
            .map_err(io_err)?;
    }
    writer.flush().map_err(io_err)
}

pub fn write_log<W: Write>(dataset: &Dataset, format: LogFormat, w: W) -> Result<()> {
    match format {
        LogFormat::JsonLines => write_jsonl(dataset, w),
        LogFormat::Csv => write_csv(dataset, w),
    }
}
