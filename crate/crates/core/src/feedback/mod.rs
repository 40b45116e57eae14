//! Exposure → click → re-exposure feedback analysis.
//!
//! Trajectories are cut into consecutive stages. For every account and stage
//! the issue vector of its exposures (or clicks) is compared with four
//! reference structures built from the previous stage: the account itself,
//! the rest of its community, the rest of its group outside that community,
//! and the other group.

mod pipeline;
mod regression;

use std::collections::BTreeMap;
use std::ops::RangeInclusive;

use serde::Serialize;

use crate::datamodel::{build_issue_vector, ExposureRecord, Group, IssueVector, Kind};
use crate::diversity::cosine;
use crate::error::{Error, Result};
use crate::stats::{mean, paired_ttest};

pub use pipeline::{
    feedback_communities, run_feedback, FeedbackModel, FeedbackOptions, FeedbackReport,
    TransitionComparison,
};
pub use regression::{
    lagged_design, ols_fe_clustered, Coefficient, Design, LevelSet, RegressionResult, RowKey,
};

/// Consecutive, disjoint, exhaustive step ranges over `1..=t_max`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StagePartition {
    bounds: Vec<(u32, u32)>,
}

impl StagePartition {
    /// `n_stages` near-equal stages; stage `s` ends at `floor((s+1)·t_max/n)`.
    pub fn equal(n_stages: usize, t_max: u32) -> Result<Self> {
        if n_stages < 2 || n_stages as u64 > u64::from(t_max) {
            return Err(Error::InvalidArgument(format!(
                "cannot cut {t_max} steps into {n_stages} stages"
            )));
        }
        let n = n_stages as u64;
        let t = u64::from(t_max);
        let bounds = (0..n)
            .map(|s| ((s * t / n + 1) as u32, ((s + 1) * t / n) as u32))
            .collect();
        Ok(StagePartition { bounds })
    }

    pub fn from_bounds(bounds: Vec<(u32, u32)>, t_max: u32) -> Result<Self> {
        if bounds.len() < 2 {
            return Err(Error::InvalidArgument("need at least two stages".into()));
        }
        let mut expected = 1;
        for &(lo, hi) in &bounds {
            if lo != expected || hi < lo {
                return Err(Error::InvalidArgument(format!(
                    "stage {lo}-{hi} breaks contiguity (expected start {expected})"
                )));
            }
            expected = hi + 1;
        }
        if expected != t_max + 1 {
            return Err(Error::InvalidArgument(format!(
                "stages end at {} instead of {t_max}",
                expected - 1
            )));
        }
        Ok(StagePartition { bounds })
    }

    pub fn n_stages(&self) -> usize {
        self.bounds.len()
    }

    pub fn bounds(&self) -> &[(u32, u32)] {
        &self.bounds
    }

    pub fn ranges(&self) -> impl Iterator<Item = RangeInclusive<u32>> + '_ {
        self.bounds.iter().map(|&(lo, hi)| lo..=hi)
    }

    pub fn stage_of(&self, step: u32) -> Option<usize> {
        self.bounds
            .iter()
            .position(|&(lo, hi)| (lo..=hi).contains(&step))
    }
}

/// Records grouped by stage, input order kept within each stage.
pub fn stage_split(records: &[ExposureRecord], partition: &StagePartition) -> Vec<Vec<ExposureRecord>> {
    let mut out = vec![Vec::new(); partition.n_stages()];
    for r in records {
        if let Some(s) = partition.stage_of(r.step) {
            out[s].push(r.clone());
        }
    }
    out
}

/// Per-account exposure and click issue vectors for one stage.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct StageVectors {
    pub exposure: BTreeMap<String, IssueVector>,
    pub click: BTreeMap<String, IssueVector>,
}

impl StageVectors {
    pub fn of(&self, kind: Kind) -> &BTreeMap<String, IssueVector> {
        match kind {
            Kind::Exposure => &self.exposure,
            Kind::Click => &self.click,
        }
    }
}

pub fn stage_vectors(
    records_by_account: &BTreeMap<String, Vec<ExposureRecord>>,
    partition: &StagePartition,
) -> Vec<StageVectors> {
    let mut out = vec![StageVectors::default(); partition.n_stages()];
    for (account, recs) in records_by_account {
        for (s, stage) in stage_split(recs, partition).iter().enumerate() {
            out[s]
                .exposure
                .insert(account.clone(), build_issue_vector(stage, Kind::Exposure));
            out[s]
                .click
                .insert(account.clone(), build_issue_vector(stage, Kind::Click));
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Level {
    Own,
    Community,
    InGroupOutCommunity,
    OutGroup,
}

impl Level {
    pub const ALL: [Level; 4] = [
        Level::Own,
        Level::Community,
        Level::InGroupOutCommunity,
        Level::OutGroup,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Level::Own => "self",
            Level::Community => "community",
            Level::InGroupOutCommunity => "in-group / out-community",
            Level::OutGroup => "out-group",
        }
    }

    /// Short column-safe name.
    pub fn key(self) -> &'static str {
        match self {
            Level::Own => "self",
            Level::Community => "community",
            Level::InGroupOutCommunity => "in_out",
            Level::OutGroup => "out_group",
        }
    }
}

/// Four reference vectors for one account at one stage.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct References {
    pub levels: [IssueVector; 4],
    /// True where the reference set had no account with evidence (the
    /// vector is then all-zero).
    pub empty: [bool; 4],
}

impl References {
    pub fn get(&self, level: Level) -> &IssueVector {
        &self.levels[level as usize]
    }
}

/// Reference structures for every account in `vectors`.
///
/// Non-self references average the issue vectors of the other accounts in
/// the set, never the focal account. Accounts without evidence (zero
/// vectors) do not enter any average. An account absent from `communities`
/// forms a community of its own.
pub fn build_reference_vectors(
    vectors: &BTreeMap<String, IssueVector>,
    communities: &BTreeMap<String, usize>,
    groups: &BTreeMap<String, Group>,
) -> BTreeMap<String, References> {
    let mut out = BTreeMap::new();
    for (focal, own) in vectors {
        let Some(&g) = groups.get(focal) else {
            continue;
        };
        let comm = communities.get(focal);
        let mut sets: [Vec<&IssueVector>; 3] = Default::default();
        for (other, v) in vectors {
            if other == focal || v.is_zero() {
                continue;
            }
            let Some(&og) = groups.get(other) else {
                continue;
            };
            let same_comm = comm.is_some() && communities.get(other) == comm;
            let slot = if og != g {
                2
            } else if same_comm {
                0
            } else {
                1
            };
            sets[slot].push(v);
        }
        let mut levels = [*own, IssueVector::zero(), IssueVector::zero(), IssueVector::zero()];
        let mut empty = [own.is_zero(), false, false, false];
        for (k, set) in sets.iter().enumerate() {
            match IssueVector::mean(set.iter().copied()) {
                Some(m) => levels[k + 1] = m,
                None => empty[k + 1] = true,
            }
        }
        out.insert(focal.clone(), References { levels, empty });
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Direction {
    /// Stage-t exposures predicting stage-(t+1) clicks.
    ExposureToClick,
    /// Stage-t clicks predicting stage-(t+1) exposures.
    ClickToExposure,
}

impl Direction {
    pub const BOTH: [Direction; 2] = [Direction::ExposureToClick, Direction::ClickToExposure];

    pub fn predictor_kind(self) -> Kind {
        match self {
            Direction::ExposureToClick => Kind::Exposure,
            Direction::ClickToExposure => Kind::Click,
        }
    }

    pub fn outcome_kind(self) -> Kind {
        match self {
            Direction::ExposureToClick => Kind::Click,
            Direction::ClickToExposure => Kind::Exposure,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Direction::ExposureToClick => "exposure->click",
            Direction::ClickToExposure => "click->exposure",
        }
    }

    /// Ordered `(higher, lower)` level comparisons tested for this direction.
    pub fn comparisons(self) -> [(Level, Level); 4] {
        let first = match self {
            Direction::ExposureToClick => (Level::Own, Level::Community),
            Direction::ClickToExposure => (Level::Community, Level::Own),
        };
        [
            first,
            (Level::Community, Level::InGroupOutCommunity),
            (Level::Community, Level::OutGroup),
            (Level::InGroupOutCommunity, Level::OutGroup),
        ]
    }
}

impl std::str::FromStr for Direction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exposure->click" | "exposure-to-click" | "e2c" => Ok(Direction::ExposureToClick),
            "click->exposure" | "click-to-exposure" | "c2e" => Ok(Direction::ClickToExposure),
            _ => Err(Error::InvalidArgument(format!("unknown direction {s:?}"))),
        }
    }
}

/// Holm step-down adjustment, returned in input order.
pub fn holm_adjust(p_values: &[f64]) -> Vec<f64> {
    let m = p_values.len();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| p_values[a].total_cmp(&p_values[b]));
    let mut out = vec![0.0; m];
    let mut running = 0.0f64;
    for (rank, &i) in order.iter().enumerate() {
        let adj = (p_values[i] * (m - rank) as f64).min(1.0);
        running = running.max(adj);
        out[i] = running;
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LevelComparisonRow {
    pub comparison: String,
    pub n: usize,
    pub mean_difference: f64,
    pub t: f64,
    pub p_raw: f64,
    pub p_holm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LevelComparison {
    pub direction: Direction,
    pub n: usize,
    pub excluded: usize,
    /// Mean cosine similarity to each level, in `Level::ALL` order.
    pub level_means: [f64; 4],
    pub rows: Vec<LevelComparisonRow>,
}

/// Compares outcome vectors at t+1 with the four stage-t references.
///
/// Accounts with a zero outcome or any zero reference are excluded and
/// counted. Each ordered comparison is a paired two-tailed t-test on the
/// per-account similarity differences, Holm-adjusted over the four.
pub fn level_similarity_comparison(
    references: &BTreeMap<String, References>,
    outcomes: &BTreeMap<String, IssueVector>,
    direction: Direction,
) -> Result<LevelComparison> {
    let mut sims: [Vec<f64>; 4] = Default::default();
    let mut excluded = 0;
    for (account, refs) in references {
        let Some(outcome) = outcomes.get(account).filter(|v| !v.is_zero()) else {
            excluded += 1;
            continue;
        };
        if refs.levels.iter().any(IssueVector::is_zero) {
            excluded += 1;
            continue;
        }
        for (k, level) in refs.levels.iter().enumerate() {
            sims[k].push(cosine(outcome.as_slice(), level.as_slice()).expect("nonzero"));
        }
    }
    let n = sims[0].len();
    if n < 2 {
        return Err(Error::Empty(format!(
            "{n} account(s) with complete vectors; need at least 2"
        )));
    }
    let mut rows = Vec::with_capacity(4);
    for (hi, lo) in direction.comparisons() {
        let test = paired_ttest(&sims[hi as usize], &sims[lo as usize])?;
        rows.push(LevelComparisonRow {
            comparison: format!("{} > {}", hi.label(), lo.label()),
            n,
            mean_difference: test.mean_difference,
            t: test.t,
            p_raw: test.p_value,
            p_holm: 0.0,
        });
    }
    let raw: Vec<f64> = rows.iter().map(|r| r.p_raw).collect();
    for (row, adj) in rows.iter_mut().zip(holm_adjust(&raw)) {
        row.p_holm = adj;
    }
    Ok(LevelComparison {
        direction,
        n,
        excluded,
        level_means: [0, 1, 2, 3].map(|k| mean(&sims[k])),
        rows,
    })
}
