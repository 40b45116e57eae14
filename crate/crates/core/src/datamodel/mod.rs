//! Trajectory-log schema shared by every analysis: account profiles, exposure
//! and click records, label vocabularies, analysis windows and issue vectors.

mod io;
mod vocab;
mod window;

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use io::{
    parse_log, parse_log_with, parse_str, write_csv, write_jsonl, write_log, LogFormat,
    ParseOptions,
};
pub use vocab::{Group, Ideology, Issue, Kind, ISSUE_COUNT};
pub use window::{slice_window, AnalysisWindow};

/// Platform category that marks news and political content.
pub const NEWS_AND_POLITICS: &str = "News & Politics";

/// Steps per trajectory in the reference protocol.
pub const DEFAULT_T_MAX: u32 = 150;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct AccountProfile {
    pub account_id: String,
    pub group: Group,
}

/// One exposure or click event.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ExposureRecord {
    pub account_id: String,
    pub step: u32,
    pub kind: Kind,
    pub video_id: String,
    pub category: String,
    pub is_political: bool,
    pub issue: Option<Issue>,
    pub ideology: Option<Ideology>,
}

impl ExposureRecord {
    /// Whether the record contributes to an issue vector: political, labeled,
    /// and not `Other`.
    pub fn has_core_issue(&self) -> Option<Issue> {
        match self.issue {
            Some(issue) if self.is_political && issue != Issue::Other => Some(issue),
            _ => None,
        }
    }
}

/// A validated log: deduplicated profiles plus records sorted by
/// `(account_id, step, kind)`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Dataset {
    pub profiles: Vec<AccountProfile>,
    pub records: Vec<ExposureRecord>,
}

impl Dataset {
    /// Builds a dataset from already-validated parts, sorting both.
    pub fn new(mut profiles: Vec<AccountProfile>, mut records: Vec<ExposureRecord>) -> Self {
        profiles.sort();
        profiles.dedup();
        sort_records(&mut records);
        Dataset { profiles, records }
    }

    pub fn groups(&self) -> BTreeMap<String, Group> {
        self.profiles
            .iter()
            .map(|p| (p.account_id.clone(), p.group))
            .collect()
    }

    pub fn accounts(&self) -> Vec<String> {
        self.profiles.iter().map(|p| p.account_id.clone()).collect()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Largest step present, or 0 for an empty dataset.
    pub fn max_step(&self) -> u32 {
        self.records.iter().map(|r| r.step).max().unwrap_or(0)
    }

    pub fn by_account(&self) -> BTreeMap<String, Vec<ExposureRecord>> {
        group_by_account(&self.records)
    }
}

/// Stable sort by `(account_id, step, kind)`.
pub fn sort_records(records: &mut [ExposureRecord]) {
    records.sort_by(|a, b| {
        a.account_id
            .cmp(&b.account_id)
            .then(a.step.cmp(&b.step))
            .then(a.kind.cmp(&b.kind))
    });
}

pub fn group_by_account(records: &[ExposureRecord]) -> BTreeMap<String, Vec<ExposureRecord>> {
    let mut out: BTreeMap<String, Vec<ExposureRecord>> = BTreeMap::new();
    for r in records {
        out.entry(r.account_id.clone()).or_default().push(r.clone());
    }
    out
}

/// 21-dimensional issue distribution, indexed in canonical topic order.
///
/// Either all-zero (no evidence) or summing to one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IssueVector([f64; ISSUE_COUNT]);

impl Default for IssueVector {
    fn default() -> Self {
        IssueVector::zero()
    }
}

impl IssueVector {
    pub const fn zero() -> Self {
        IssueVector([0.0; ISSUE_COUNT])
    }

    /// Normalizes nonnegative weights. An all-zero input gives the zero vector.
    pub fn from_weights(weights: [f64; ISSUE_COUNT]) -> Result<Self> {
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::InvalidArgument(
                "issue weights must be finite and nonnegative".into(),
            ));
        }
        let total: f64 = weights.iter().sum();
        if total == 0.0 {
            return Ok(IssueVector::zero());
        }
        Ok(IssueVector(weights.map(|w| w / total)))
    }

    /// Unit mass on one issue. Panics on `Issue::Other`.
    pub fn one_hot(issue: Issue) -> Self {
        let idx = issue.index().expect("Other has no vector slot");
        let mut w = [0.0; ISSUE_COUNT];
        w[idx] = 1.0;
        IssueVector(w)
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|w| *w == 0.0)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn weights(&self) -> &[f64; ISSUE_COUNT] {
        &self.0
    }

    pub fn get(&self, issue: Issue) -> f64 {
        issue.index().map_or(0.0, |i| self.0[i])
    }

    /// Arithmetic mean of nonzero vectors; `None` when there are none.
    pub fn mean<'a>(vectors: impl IntoIterator<Item = &'a IssueVector>) -> Option<IssueVector> {
        let mut acc = [0.0; ISSUE_COUNT];
        let mut n = 0usize;
        for v in vectors.into_iter().filter(|v| !v.is_zero()) {
            for (a, w) in acc.iter_mut().zip(v.0.iter()) {
                *a += w;
            }
            n += 1;
        }
        (n > 0).then(|| IssueVector(acc.map(|a| a / n as f64)))
    }
}

/// Issue distribution over one account's records of the given kind.
///
/// Only political records carrying one of the 21 core issues are counted.
pub fn build_issue_vector<'a>(
    records: impl IntoIterator<Item = &'a ExposureRecord>,
    kind_filter: Kind,
) -> IssueVector {
    let mut counts = [0u64; ISSUE_COUNT];
    for r in records.into_iter().filter(|r| r.kind == kind_filter) {
        if let Some(idx) = r.has_core_issue().and_then(Issue::index) {
            counts[idx] += 1;
        }
    }
    let total: u64 = counts.iter().sum();
    if total == 0 {
        return IssueVector::zero();
    }
    IssueVector(counts.map(|c| c as f64 / total as f64))
}

/// Shares of the three structural classes: interest, news & politics, other.
///
/// A record whose category is `News & Politics` is always in the second
/// class, even if that category also appears in `interest_categories`.
pub fn regroup_structural<'a>(
    records: impl IntoIterator<Item = &'a ExposureRecord>,
    interest_categories: &BTreeSet<String>,
) -> Result<[f64; 3]> {
    if interest_categories.is_empty() {
        return Err(Error::InvalidArgument(
            "interest category set is empty".into(),
        ));
    }
    let mut counts = [0u64; 3];
    for r in records {
        let class = if r.category == NEWS_AND_POLITICS {
            1
        } else if interest_categories.contains(&r.category) {
            0
        } else {
            2
        };
        counts[class] += 1;
    }
    let total: u64 = counts.iter().sum();
    if total == 0 {
        return Err(Error::Empty("no records to regroup".into()));
    }
    Ok(counts.map(|c| c as f64 / total as f64))
}

/// Share of records that are political. `None` for an empty slice.
pub fn political_share<'a>(records: impl IntoIterator<Item = &'a ExposureRecord>) -> Option<f64> {
    let (mut pol, mut n) = (0usize, 0usize);
    for r in records {
        n += 1;
        pol += r.is_political as usize;
    }
    (n > 0).then(|| pol as f64 / n as f64)
}

/// Counts per platform category, in category-name order.
pub fn category_counts<'a>(
    records: impl IntoIterator<Item = &'a ExposureRecord>,
) -> BTreeMap<String, u64> {
    let mut out = BTreeMap::new();
    for r in records {
        *out.entry(r.category.clone()).or_insert(0) += 1;
    }
    out
}

/// Left / least-biased / right shares among ideology-labeled political records.
pub fn ideology_shares<'a>(
    records: impl IntoIterator<Item = &'a ExposureRecord>,
) -> Option<[f64; 3]> {
    let mut counts = [0u64; 3];
    for r in records {
        if let (true, Some(ideo)) = (r.is_political, r.ideology) {
            counts[ideo.index()] += 1;
        }
    }
    let total: u64 = counts.iter().sum();
    (total > 0).then(|| counts.map(|c| c as f64 / total as f64))
}
