//! Content-level allocation measures: entropies, issue-vector similarity,
//! set overlap, within/between group similarity and group comparisons.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::hash::Hash;

use serde::Serialize;

use crate::datamodel::{
    build_issue_vector, category_counts, political_share, regroup_structural, slice_window,
    AnalysisWindow, ExposureRecord, Group, Issue, IssueVector, Kind,
};
use crate::error::{Error, Result};
use crate::feedback::StagePartition;
use crate::stats::{mean, sample_sd, t_two_tailed_p};

/// Probabilities below this are treated as zero.
const ENTROPY_FLOOR: f64 = 1e-15;

/// Shannon entropy in bits. The input is normalized first.
pub fn shannon_entropy(distribution: &[f64]) -> Result<f64> {
    if distribution.iter().any(|p| !p.is_finite() || *p < 0.0) {
        return Err(Error::InvalidArgument(
            "entropy needs finite nonnegative weights".into(),
        ));
    }
    let total: f64 = distribution.iter().sum();
    if total <= 0.0 {
        return Err(Error::Undefined("entropy of an all-zero distribution".into()));
    }
    let h = distribution
        .iter()
        .map(|w| w / total)
        .filter(|p| *p >= ENTROPY_FLOOR)
        .map(|p| -p * p.log2())
        .sum::<f64>();
    Ok(h.max(0.0))
}

/// Entropy over the interest / news & politics / other classes.
pub fn structural_entropy(three_class: &[f64; 3]) -> Result<f64> {
    shannon_entropy(three_class)
}

/// Cosine of two nonnegative slices; `None` if either has zero norm.
pub fn cosine(x: &[f64], y: &[f64]) -> Option<f64> {
    let (mut dot, mut nx, mut ny) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        dot += a * b;
        nx += a * a;
        ny += b * b;
    }
    if nx == 0.0 || ny == 0.0 {
        return None;
    }
    Some((dot / (nx * ny).sqrt()).min(1.0))
}

pub fn cosine_similarity(x: &IssueVector, y: &IssueVector) -> Result<f64> {
    cosine(x.as_slice(), y.as_slice())
        .ok_or_else(|| Error::Undefined("cosine similarity with a zero issue vector".into()))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jaccard {
    pub value: f64,
    /// Set when both inputs were empty and the value was defined as 0.
    pub both_empty: bool,
}

pub fn jaccard<T: Eq + Hash>(a: &HashSet<T>, b: &HashSet<T>) -> Jaccard {
    let inter = a.iter().filter(|x| b.contains(x)).count();
    let union = a.len() + b.len() - inter;
    if union == 0 {
        return Jaccard {
            value: 0.0,
            both_empty: true,
        };
    }
    Jaccard {
        value: inter as f64 / union as f64,
        both_empty: false,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SimilarityMode {
    WithinA,
    WithinB,
    Between,
}

impl SimilarityMode {
    pub fn label(self) -> &'static str {
        match self {
            SimilarityMode::WithinA => "within_male",
            SimilarityMode::WithinB => "within_female",
            SimilarityMode::Between => "between",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SimilaritySummary {
    pub mean: f64,
    pub sd: f64,
    pub n_pairs: usize,
    /// Accounts skipped for having an all-zero vector.
    pub excluded: usize,
}

/// Mean cosine similarity over unordered account pairs. Group A is the
/// male-coded group. Pairs are enumerated in sorted account order.
pub fn pairwise_group_similarity(
    vectors: &BTreeMap<String, IssueVector>,
    groups: &BTreeMap<String, Group>,
    mode: SimilarityMode,
) -> Result<SimilaritySummary> {
    let mut a = Vec::new();
    let mut b = Vec::new();
    let mut excluded = 0;
    for (account, v) in vectors {
        let Some(g) = groups.get(account) else {
            continue;
        };
        let wanted = match mode {
            SimilarityMode::WithinA => *g == Group::MaleCoded,
            SimilarityMode::WithinB => *g == Group::FemaleCoded,
            SimilarityMode::Between => true,
        };
        if !wanted {
            continue;
        }
        if v.is_zero() {
            excluded += 1;
            continue;
        }
        match g {
            Group::MaleCoded => a.push(v),
            Group::FemaleCoded => b.push(v),
        }
    }
    let mut sims = Vec::new();
    let mut within = |side: &[&IssueVector]| {
        for i in 0..side.len() {
            for j in i + 1..side.len() {
                sims.push(cosine(side[i].as_slice(), side[j].as_slice()).expect("nonzero"));
            }
        }
    };
    match mode {
        SimilarityMode::WithinA => within(&a),
        SimilarityMode::WithinB => within(&b),
        SimilarityMode::Between => {
            for x in &a {
                for y in &b {
                    sims.push(cosine(x.as_slice(), y.as_slice()).expect("nonzero"));
                }
            }
        }
    }
    if sims.is_empty() {
        return Err(Error::Empty(format!(
            "no qualifying pairs for {} similarity",
            mode.label()
        )));
    }
    Ok(SimilaritySummary {
        mean: mean(&sims),
        sd: sample_sd(&sims),
        n_pairs: sims.len(),
        excluded,
    })
}

/// Two-sample comparison; group A is male-coded, group B female-coded.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroupComparison {
    pub metric_name: String,
    pub mean_a: f64,
    pub sd_a: f64,
    pub mean_b: f64,
    pub sd_b: f64,
    pub n_a: usize,
    pub n_b: usize,
    pub t_stat: f64,
    pub df: f64,
    pub p_value: f64,
    pub two_tailed: bool,
}

impl GroupComparison {
    pub fn named(mut self, name: impl Into<String>) -> Self {
        self.metric_name = name.into();
        self
    }

    pub fn difference(&self) -> f64 {
        self.mean_a - self.mean_b
    }
}

/// Welch's unequal-variance t-test, two-tailed.
pub fn welch_ttest(sample_a: &[f64], sample_b: &[f64]) -> Result<GroupComparison> {
    let (n_a, n_b) = (sample_a.len(), sample_b.len());
    if n_a < 2 || n_b < 2 {
        return Err(Error::InvalidArgument(format!(
            "t-test needs at least two observations per group (got {n_a} and {n_b})"
        )));
    }
    if sample_a.iter().chain(sample_b).any(|x| !x.is_finite()) {
        return Err(Error::InvalidArgument("non-finite observation".into()));
    }
    let (mean_a, mean_b) = (mean(sample_a), mean(sample_b));
    let (sd_a, sd_b) = (sample_sd(sample_a), sample_sd(sample_b));
    let va = sd_a * sd_a / n_a as f64;
    let vb = sd_b * sd_b / n_b as f64;
    let se2 = va + vb;
    let diff = mean_a - mean_b;
    let (t_stat, df, p_value) = if se2 == 0.0 {
        let df = (n_a + n_b - 2) as f64;
        if diff == 0.0 {
            (0.0, df, 1.0)
        } else {
            (diff.signum() * f64::INFINITY, df, 0.0)
        }
    } else {
        let t = diff / se2.sqrt();
        let df = se2 * se2
            / (va * va / (n_a - 1) as f64 + vb * vb / (n_b - 1) as f64);
        (t, df, t_two_tailed_p(t, df))
    };
    Ok(GroupComparison {
        metric_name: String::new(),
        mean_a,
        sd_a,
        mean_b,
        sd_b,
        n_a,
        n_b,
        t_stat,
        df,
        p_value,
        two_tailed: true,
    })
}

/// Splits per-account values into (male, female) samples.
pub fn split_by_group(
    values: &BTreeMap<String, f64>,
    groups: &BTreeMap<String, Group>,
) -> (Vec<f64>, Vec<f64>) {
    let mut a = Vec::new();
    let mut b = Vec::new();
    for (account, v) in values {
        match groups.get(account) {
            Some(Group::MaleCoded) => a.push(*v),
            Some(Group::FemaleCoded) => b.push(*v),
            None => {}
        }
    }
    (a, b)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IssueShareRow {
    pub issue: Issue,
    pub comparison: GroupComparison,
    /// Male mean minus female mean.
    pub difference: f64,
}

/// Per-issue exposure shares compared between groups within a window.
///
/// Each account's shares come from its political exposures in the window;
/// accounts without any core-issue exposure are left out. Rows are ordered
/// by difference, largest first.
pub fn issue_share_comparison(
    records_by_account: &BTreeMap<String, Vec<ExposureRecord>>,
    groups: &BTreeMap<String, Group>,
    window: AnalysisWindow,
    t_max: u32,
) -> Result<Vec<IssueShareRow>> {
    let mut vectors = BTreeMap::new();
    for (account, recs) in records_by_account {
        let in_window = slice_window(recs, window, t_max)?;
        let v = build_issue_vector(&in_window, Kind::Exposure);
        if !v.is_zero() {
            vectors.insert(account.clone(), v);
        }
    }
    let mut rows = Vec::with_capacity(Issue::CORE.len());
    for issue in Issue::CORE {
        let shares: BTreeMap<String, f64> = vectors
            .iter()
            .map(|(k, v)| (k.clone(), v.get(issue)))
            .collect();
        let (a, b) = split_by_group(&shares, groups);
        let comparison = welch_ttest(&a, &b)?.named(issue.as_str());
        rows.push(IssueShareRow {
            issue,
            difference: comparison.difference(),
            comparison,
        });
    }
    // stable sort keeps canonical order among ties
    rows.sort_by(|x, y| y.difference.total_cmp(&x.difference));
    Ok(rows)
}

/// Exposure-based diversity measures of one account within one window.
/// A measure is `None` when the account has no evidence for it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AccountDiversity {
    pub account_id: String,
    pub group: Group,
    pub n_exposures: usize,
    pub category_entropy: Option<f64>,
    pub political_share: Option<f64>,
    /// Needs a set of interest categories.
    pub structural_entropy: Option<f64>,
    pub interest_share: Option<f64>,
    /// Entropy of the political issue distribution.
    pub issue_entropy: Option<f64>,
}

impl AccountDiversity {
    pub const METRICS: [&'static str; 5] = [
        "category_entropy",
        "political_share",
        "structural_entropy",
        "interest_share",
        "issue_entropy",
    ];

    pub fn metric(&self, name: &str) -> Option<f64> {
        match name {
            "category_entropy" => self.category_entropy,
            "political_share" => self.political_share,
            "structural_entropy" => self.structural_entropy,
            "interest_share" => self.interest_share,
            "issue_entropy" => self.issue_entropy,
            _ => None,
        }
    }
}

/// Per-account diversity over the exposures inside `window`. Structural
/// measures are computed only when `interest` is given and non-empty.
pub fn account_diversity(
    records_by_account: &BTreeMap<String, Vec<ExposureRecord>>,
    groups: &BTreeMap<String, Group>,
    window: AnalysisWindow,
    t_max: u32,
    interest: Option<&BTreeSet<String>>,
) -> Result<Vec<AccountDiversity>> {
    let interest = interest.filter(|s| !s.is_empty());
    let mut out = Vec::new();
    for (account, recs) in records_by_account {
        let Some(&group) = groups.get(account) else {
            continue;
        };
        let exposures: Vec<ExposureRecord> = slice_window(recs, window, t_max)?
            .into_iter()
            .filter(|r| r.kind == Kind::Exposure)
            .collect();
        let counts: Vec<f64> = category_counts(&exposures).into_values().map(|c| c as f64).collect();
        let structural = match interest {
            Some(set) if !exposures.is_empty() => Some(regroup_structural(&exposures, set)?),
            _ => None,
        };
        let issues = build_issue_vector(&exposures, Kind::Exposure);
        out.push(AccountDiversity {
            account_id: account.clone(),
            group,
            n_exposures: exposures.len(),
            category_entropy: shannon_entropy(&counts).ok(),
            political_share: political_share(&exposures),
            structural_entropy: structural.map(|s| structural_entropy(&s)).transpose()?,
            interest_share: structural.map(|s| s[0]),
            issue_entropy: shannon_entropy(issues.as_slice()).ok(),
        });
    }
    Ok(out)
}

/// Welch comparison of each diversity measure between the groups. Measures
/// with fewer than two observations in either group are skipped.
pub fn diversity_comparisons(rows: &[AccountDiversity]) -> Vec<GroupComparison> {
    let mut out = Vec::new();
    for name in AccountDiversity::METRICS {
        let (mut a, mut b) = (Vec::new(), Vec::new());
        for r in rows {
            if let Some(v) = r.metric(name) {
                match r.group {
                    Group::MaleCoded => a.push(v),
                    Group::FemaleCoded => b.push(v),
                }
            }
        }
        if let Ok(c) = welch_ttest(&a, &b) {
            out.push(c.named(name));
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StageSimilarity {
    pub stage: usize,
    pub mode: &'static str,
    pub summary: SimilaritySummary,
}

/// Within- and between-group similarity of per-account issue vectors for
/// each stage. Modes without a qualifying pair are omitted.
pub fn similarity_by_stage(
    records_by_account: &BTreeMap<String, Vec<ExposureRecord>>,
    groups: &BTreeMap<String, Group>,
    stages: &StagePartition,
    kind: Kind,
) -> Vec<StageSimilarity> {
    let mut out = Vec::new();
    for (s, range) in stages.ranges().enumerate() {
        let vectors: BTreeMap<String, IssueVector> = records_by_account
            .iter()
            .map(|(k, recs)| {
                let v = build_issue_vector(recs.iter().filter(|r| range.contains(&r.step)), kind);
                (k.clone(), v)
            })
            .collect();
        for mode in [
            SimilarityMode::WithinA,
            SimilarityMode::WithinB,
            SimilarityMode::Between,
        ] {
            if let Ok(summary) = pairwise_group_similarity(&vectors, groups, mode) {
                out.push(StageSimilarity {
                    stage: s + 1,
                    mode: mode.label(),
                    summary,
                });
            }
        }
    }
    out
}
