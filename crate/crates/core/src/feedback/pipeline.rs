use std::collections::BTreeMap;

use serde::Serialize;

use super::{
    build_reference_vectors, lagged_design, level_similarity_comparison, ols_fe_clustered,
    stage_vectors, Direction, LevelComparison, LevelSet, References, RegressionResult, StagePartition,
};
use crate::conet::{build_coexposure, louvain_partition, CoExposureOptions};
use crate::datamodel::{Dataset, Group};
use crate::error::{Error, Result};
use crate::seed;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeedbackOptions {
    pub n_stages: usize,
    pub t_max: u32,
    /// Network used to detect the communities behind the community-level
    /// references; built per group.
    pub network: CoExposureOptions,
    pub resolution: f64,
    pub seed: u64,
}

impl Default for FeedbackOptions {
    fn default() -> Self {
        FeedbackOptions {
            n_stages: 3,
            t_max: crate::datamodel::DEFAULT_T_MAX,
            network: CoExposureOptions::default(),
            resolution: 1.0,
            seed: 0,
        }
    }
}

/// Community of every account: Louvain on each group's co-exposure network,
/// with ids made unique across groups. Accounts absent from their group's
/// network, or in an edgeless network, get a community of their own.
pub fn feedback_communities(
    dataset: &Dataset,
    opts: &FeedbackOptions,
) -> Result<BTreeMap<String, usize>> {
    let groups = dataset.groups();
    let mut out = BTreeMap::new();
    let mut next = 0usize;
    for g in Group::ALL {
        let records: Vec<_> = dataset
            .records
            .iter()
            .filter(|r| groups.get(&r.account_id) == Some(&g))
            .cloned()
            .collect();
        let net_opts = CoExposureOptions {
            t_max: opts.t_max,
            ..opts.network
        };
        let net = match build_coexposure(&records, &net_opts) {
            Ok(net) => Some(net),
            Err(Error::Empty(_) | Error::InvalidArgument(_)) => None,
            Err(e) => return Err(e),
        };
        let seed = seed::derive(opts.seed, seed::stream_id(g.as_str()));
        if let Some(net) = net.filter(|n| n.edge_count() > 0) {
            let part = louvain_partition(&net, opts.resolution, seed)?;
            for (node, label) in part.assignment() {
                out.insert(node, next + label);
            }
            next += part.n_communities();
        }
        for (account, ag) in &groups {
            if *ag == g && !out.contains_key(account) {
                out.insert(account.clone(), next);
                next += 1;
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FeedbackModel {
    pub direction: Direction,
    /// `None` for the pooled model.
    pub subgroup: Option<Group>,
    pub levels: LevelSet,
    pub dropped: usize,
    /// `None` when the model could not be fitted; see `skipped`.
    pub result: Option<RegressionResult>,
    pub skipped: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransitionComparison {
    pub direction: Direction,
    /// `None` when all accounts are pooled.
    pub group: Option<Group>,
    /// 1-based stage index of the predictor side.
    pub from_stage: usize,
    pub comparison: Option<LevelComparison>,
    pub skipped: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FeedbackReport {
    pub communities: BTreeMap<String, usize>,
    pub stages: Vec<(u32, u32)>,
    pub models: Vec<FeedbackModel>,
    pub comparisons: Vec<TransitionComparison>,
}

impl FeedbackReport {
    pub fn pooled(&self, direction: Direction) -> Option<&RegressionResult> {
        self.models
            .iter()
            .find(|m| m.direction == direction && m.subgroup.is_none())
            .and_then(|m| m.result.as_ref())
    }
}

/// Data conditions under which one model or comparison is reported as
/// skipped rather than failing the whole analysis, e.g. a group forming a
/// single community leaves its in-group/out-community reference empty.
fn degenerate(e: &Error) -> bool {
    matches!(
        e,
        Error::RankDeficient(_) | Error::Undefined(_) | Error::Empty(_) | Error::InvalidArgument(_)
    )
}

/// Both directions: pooled four-level models, three-level models per group,
/// and level-similarity comparisons for every stage transition. Models and
/// comparisons the data cannot support are kept with the reason in
/// `skipped`.
pub fn run_feedback(dataset: &Dataset, opts: &FeedbackOptions) -> Result<FeedbackReport> {
    if dataset.is_empty() {
        return Err(Error::Empty("dataset has no records".into()));
    }
    let partition = StagePartition::equal(opts.n_stages, opts.t_max)?;
    let groups = dataset.groups();
    let communities = feedback_communities(dataset, opts)?;
    let stages = stage_vectors(&dataset.by_account(), &partition);

    let mut models = Vec::new();
    let mut comparisons = Vec::new();
    for direction in Direction::BOTH {
        let variants = [(None, LevelSet::Four)]
            .into_iter()
            .chain(Group::ALL.map(|g| (Some(g), LevelSet::Three)));
        for (subgroup, levels) in variants {
            let fitted = lagged_design(&stages, &communities, &groups, direction, levels, subgroup)
                .and_then(|d| Ok((d.dropped, ols_fe_clustered(&d)?)));
            let (dropped, result, skipped) = match fitted {
                Ok((dropped, r)) => (dropped, Some(r), None),
                Err(e) if degenerate(&e) => (0, None, Some(e.to_string())),
                Err(e) => return Err(e),
            };
            models.push(FeedbackModel {
                direction,
                subgroup,
                levels,
                dropped,
                result,
                skipped,
            });
        }
        for t in 0..stages.len() - 1 {
            let refs = build_reference_vectors(
                stages[t].of(direction.predictor_kind()),
                &communities,
                &groups,
            );
            for group in [None, Some(Group::MaleCoded), Some(Group::FemaleCoded)] {
                let subset: BTreeMap<String, References> = refs
                    .iter()
                    .filter(|(a, _)| group.is_none() || groups.get(*a) == group.as_ref())
                    .map(|(a, r)| (a.clone(), r.clone()))
                    .collect();
                let outcomes = stages[t + 1].of(direction.outcome_kind());
                let (comparison, skipped) =
                    match level_similarity_comparison(&subset, outcomes, direction) {
                        Ok(c) => (Some(c), None),
                        Err(e) if degenerate(&e) => (None, Some(e.to_string())),
                        Err(e) => return Err(e),
                    };
                comparisons.push(TransitionComparison {
                    direction,
                    group,
                    from_stage: t + 1,
                    comparison,
                    skipped,
                });
            }
        }
    }
    Ok(FeedbackReport {
        communities,
        stages: partition.bounds().to_vec(),
        models,
        comparisons,
    })
}
