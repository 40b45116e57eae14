//! Lagged fixed-effects regressions with standardized coefficients and
//! account-clustered (CR1) standard errors.

use std::collections::{BTreeMap, BTreeSet};

use nalgebra::{DMatrix, DVector};
use serde::Serialize;
use statrs::distribution::{ContinuousCDF, StudentsT};

use super::{build_reference_vectors, Direction, Level, StageVectors};
use crate::datamodel::{Group, Issue, ISSUE_COUNT};
use crate::error::{Error, Result};
use crate::stats::{mean, sample_sd, t_two_tailed_p};

/// Relative residual norm below which a column counts as collinear.
const RANK_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum LevelSet {
    /// self, community, in-group/out-community, out-group
    Four,
    /// self, community, in-group/out-community
    Three,
}

impl LevelSet {
    pub fn levels(self) -> &'static [Level] {
        match self {
            LevelSet::Four => &Level::ALL,
            LevelSet::Three => &Level::ALL[..3],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RowKey {
    pub account: String,
    /// Index `t` of the `t → t+1` transition.
    pub transition: usize,
    pub issue: Issue,
}

/// Long-format design: an outcome, predictor columns that get standardized,
/// and 0/1 fixed-effect columns that do not.
#[derive(Debug, Clone, PartialEq)]
pub struct Design {
    pub outcome: Vec<f64>,
    pub predictors: Vec<(String, Vec<f64>)>,
    pub fixed_effects: Vec<(String, Vec<f64>)>,
    pub clusters: Vec<String>,
    /// Row provenance; empty for hand-built designs.
    pub row_keys: Vec<RowKey>,
    /// Account-transitions dropped for an empty outcome vector.
    pub dropped: usize,
}

impl Design {
    pub fn new(
        outcome: Vec<f64>,
        predictors: Vec<(String, Vec<f64>)>,
        fixed_effects: Vec<(String, Vec<f64>)>,
        clusters: Vec<String>,
    ) -> Result<Self> {
        let n = outcome.len();
        let bad = predictors
            .iter()
            .chain(&fixed_effects)
            .find(|(_, c)| c.len() != n);
        if let Some((name, col)) = bad {
            return Err(Error::InvalidArgument(format!(
                "column {name} has {} rows, outcome has {n}",
                col.len()
            )));
        }
        if clusters.len() != n {
            return Err(Error::InvalidArgument("one cluster key per row".into()));
        }
        Ok(Design {
            outcome,
            predictors,
            fixed_effects,
            clusters,
            row_keys: Vec::new(),
            dropped: 0,
        })
    }

    pub fn n_obs(&self) -> usize {
        self.outcome.len()
    }

    pub fn n_params(&self) -> usize {
        self.predictors.len() + self.fixed_effects.len()
    }

    pub fn column_names(&self) -> Vec<&str> {
        self.predictors
            .iter()
            .chain(&self.fixed_effects)
            .map(|(n, _)| n.as_str())
            .collect()
    }
}

/// Builds the lagged design for one direction.
///
/// One row per (account, transition t→t+1, issue). The outcome is the
/// account's issue share at t+1; predictors are the issue's share in the
/// stage-t reference structures. Accounts whose outcome vector is empty are
/// dropped. Fixed effects: every issue dummy, stage dummies for transitions
/// after the first, and a female dummy when both groups are present. No
/// global intercept column is added; the full issue set spans it.
///
/// References are always built from all accounts; `subgroup` only limits
/// which accounts contribute rows.
pub fn lagged_design(
    stages: &[StageVectors],
    communities: &BTreeMap<String, usize>,
    groups: &BTreeMap<String, Group>,
    direction: Direction,
    levels: LevelSet,
    subgroup: Option<Group>,
) -> Result<Design> {
    if stages.len() < 2 {
        return Err(Error::InvalidArgument(
            "lagged design needs at least two stages".into(),
        ));
    }
    let lv = levels.levels();
    let mut outcome = Vec::new();
    let mut preds: Vec<Vec<f64>> = vec![Vec::new(); lv.len()];
    let mut clusters = Vec::new();
    let mut keys = Vec::new();
    let mut row_group = Vec::new();
    let mut dropped = 0;

    for t in 0..stages.len() - 1 {
        let refs = build_reference_vectors(
            stages[t].of(direction.predictor_kind()),
            communities,
            groups,
        );
        let outcomes = stages[t + 1].of(direction.outcome_kind());
        for (account, r) in &refs {
            let g = groups[account];
            if subgroup.is_some_and(|sg| sg != g) {
                continue;
            }
            let Some(out) = outcomes.get(account).filter(|v| !v.is_zero()) else {
                dropped += 1;
                continue;
            };
            for issue in Issue::CORE {
                outcome.push(out.get(issue));
                for (col, level) in preds.iter_mut().zip(lv) {
                    col.push(r.get(*level).get(issue));
                }
                clusters.push(account.clone());
                keys.push(RowKey {
                    account: account.clone(),
                    transition: t,
                    issue,
                });
                row_group.push(g);
            }
        }
    }
    if outcome.is_empty() {
        return Err(Error::Empty("no rows with a nonempty outcome vector".into()));
    }

    let mut fixed_effects = Vec::new();
    for issue in Issue::CORE {
        let col = keys.iter().map(|k| f64::from(u8::from(k.issue == issue))).collect();
        fixed_effects.push((format!("issue:{}", issue.as_str()), col));
    }
    let transitions: BTreeSet<usize> = keys.iter().map(|k| k.transition).collect();
    for &t in transitions.iter().skip(1) {
        let col = keys.iter().map(|k| f64::from(u8::from(k.transition == t))).collect();
        fixed_effects.push((format!("stage:{}->{}", t + 1, t + 2), col));
    }
    let present: BTreeSet<Group> = row_group.iter().copied().collect();
    if present.len() == 2 {
        let col = row_group
            .iter()
            .map(|g| f64::from(u8::from(*g == Group::FemaleCoded)))
            .collect();
        fixed_effects.push(("group:female".to_string(), col));
    }

    let predictors = lv.iter().map(|l| l.key().to_string()).zip(preds).collect();
    let mut design = Design::new(outcome, predictors, fixed_effects, clusters)?;
    design.row_keys = keys;
    design.dropped = dropped;
    debug_assert_eq!(design.n_obs() % ISSUE_COUNT, 0);
    Ok(design)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Coefficient {
    /// Standardized coefficient.
    pub beta: f64,
    /// Cluster-robust standard error.
    pub se: f64,
    /// Two-tailed p from t with (clusters − 1) df.
    pub p_value: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub se_classical: f64,
    pub p_classical: f64,
    /// Coefficient on the original (unstandardized) scale.
    pub beta_raw: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegressionResult {
    /// Predictor coefficients keyed by name.
    pub coefficients: BTreeMap<String, Coefficient>,
    pub predictor_order: Vec<String>,
    pub fixed_effects: Vec<String>,
    pub n_obs: usize,
    pub n_clusters: usize,
    pub r_squared: f64,
    /// Largest |residual · column| over all regressors.
    pub max_orthogonality_error: f64,
}

impl RegressionResult {
    pub fn beta(&self, name: &str) -> Option<f64> {
        self.coefficients.get(name).map(|c| c.beta)
    }
}

fn standardize(xs: &[f64]) -> Option<(Vec<f64>, f64)> {
    let m = mean(xs);
    let sd = sample_sd(xs);
    if !(sd > 0.0) || !sd.is_finite() {
        return None;
    }
    Some((xs.iter().map(|x| (x - m) / sd).collect(), sd))
}

/// Names of columns that are (numerically) linear combinations of earlier
/// ones, via modified Gram–Schmidt.
fn collinear_columns(names: &[&str], cols: &[Vec<f64>]) -> Vec<String> {
    let mut basis: Vec<Vec<f64>> = Vec::new();
    let mut bad = Vec::new();
    for (name, col) in names.iter().zip(cols) {
        let norm0 = col.iter().map(|x| x * x).sum::<f64>().sqrt();
        let mut v = col.clone();
        for q in &basis {
            let d: f64 = v.iter().zip(q).map(|(a, b)| a * b).sum();
            for (x, y) in v.iter_mut().zip(q) {
                *x -= d * y;
            }
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm0 == 0.0 || norm <= RANK_TOL * norm0 {
            bad.push(name.to_string());
        } else {
            basis.push(v.into_iter().map(|x| x / norm).collect());
        }
    }
    bad
}

/// OLS on z-standardized outcome and predictors with CR1 standard errors
/// clustered on the design's cluster keys.
pub fn ols_fe_clustered(design: &Design) -> Result<RegressionResult> {
    let n = design.n_obs();
    let p = design.n_params();
    if n <= p {
        return Err(Error::InvalidArgument(format!(
            "{n} observations for {p} parameters"
        )));
    }
    let cluster_ids: BTreeMap<&str, usize> = {
        let keys: BTreeSet<&str> = design.clusters.iter().map(|s| s.as_str()).collect();
        keys.into_iter().enumerate().map(|(i, k)| (k, i)).collect()
    };
    let g = cluster_ids.len();
    if g < 2 {
        return Err(Error::InvalidArgument(
            "clustered errors need at least two clusters".into(),
        ));
    }

    let (y, sd_y) = standardize(&design.outcome)
        .ok_or_else(|| Error::Undefined("outcome has no variance".into()))?;
    let mut cols: Vec<Vec<f64>> = Vec::with_capacity(p);
    let mut sds = Vec::with_capacity(design.predictors.len());
    let mut flat_names = Vec::new();
    for (name, col) in &design.predictors {
        match standardize(col) {
            Some((z, sd)) => {
                cols.push(z);
                sds.push(sd);
            }
            None => flat_names.push(name.clone()),
        }
    }
    if !flat_names.is_empty() {
        return Err(Error::RankDeficient(flat_names));
    }
    cols.extend(design.fixed_effects.iter().map(|(_, c)| c.clone()));
    let names = design.column_names();
    let bad = collinear_columns(&names, &cols);
    if !bad.is_empty() {
        return Err(Error::RankDeficient(bad));
    }

    let x = DMatrix::from_fn(n, p, |r, c| cols[c][r]);
    let yv = DVector::from_vec(y);
    let xtx = x.transpose() * &x;
    let bread = xtx
        .clone()
        .cholesky()
        .ok_or_else(|| Error::RankDeficient(names.iter().map(|s| s.to_string()).collect()))?
        .inverse();
    let beta = &bread * (x.transpose() * &yv);
    let resid = &yv - &x * &beta;

    let ssr = resid.dot(&resid);
    let sst = yv.dot(&yv);
    let sigma2 = ssr / (n - p) as f64;

    let mut scores = DMatrix::<f64>::zeros(g, p);
    for r in 0..n {
        let c = cluster_ids[design.clusters[r].as_str()];
        for k in 0..p {
            scores[(c, k)] += x[(r, k)] * resid[r];
        }
    }
    let meat = scores.transpose() * &scores;
    let scale = (g as f64 / (g - 1) as f64) * ((n - 1) as f64 / (n - p) as f64);
    let vcov = (&bread * meat * &bread) * scale;

    let max_orth = (x.transpose() * &resid).amax();

    let df_cluster = (g - 1) as f64;
    let df_classical = (n - p) as f64;
    let t_crit = StudentsT::new(0.0, 1.0, df_cluster)
        .map(|d| d.inverse_cdf(0.975))
        .unwrap_or(f64::NAN);
    let p_of = |b: f64, se: f64, df: f64| {
        if se > 0.0 {
            t_two_tailed_p(b / se, df)
        } else if b == 0.0 {
            1.0
        } else {
            0.0
        }
    };

    let mut coefficients = BTreeMap::new();
    let mut order = Vec::new();
    for (k, (name, _)) in design.predictors.iter().enumerate() {
        let b = beta[k];
        let se = vcov[(k, k)].max(0.0).sqrt();
        let se_c = (sigma2 * bread[(k, k)]).max(0.0).sqrt();
        coefficients.insert(
            name.clone(),
            Coefficient {
                beta: b,
                se,
                p_value: p_of(b, se, df_cluster),
                ci_low: b - t_crit * se,
                ci_high: b + t_crit * se,
                se_classical: se_c,
                p_classical: p_of(b, se_c, df_classical),
                beta_raw: b * sd_y / sds[k],
            },
        );
        order.push(name.clone());
    }

    Ok(RegressionResult {
        coefficients,
        predictor_order: order,
        fixed_effects: design.fixed_effects.iter().map(|(n, _)| n.clone()).collect(),
        n_obs: n,
        n_clusters: g,
        r_squared: if sst > 0.0 { 1.0 - ssr / sst } else { f64::NAN },
        max_orthogonality_error: max_orth,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn clusters(n: usize, per: usize) -> Vec<String> {
        (0..n).map(|i| format!("c{}", i / per)).collect()
    }

    #[test]
    fn noise_free_planted_model() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let n = 60;
        let x1: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let x2: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..3.0)).collect();
        let y: Vec<f64> = x1.iter().zip(&x2).map(|(a, b)| 2.0 * a + 0.5 * b + 1.0).collect();
        let ones = vec![1.0; n];
        let d = Design::new(
            y.clone(),
            vec![("x1".into(), x1.clone()), ("x2".into(), x2.clone())],
            vec![("const".into(), ones)],
            clusters(n, 6),
        )
        .unwrap();
        let res = ols_fe_clustered(&d).unwrap();
        let sd_y = sample_sd(&y);
        assert!((res.beta("x1").unwrap() - 2.0 * sample_sd(&x1) / sd_y).abs() < 1e-8);
        assert!((res.beta("x2").unwrap() - 0.5 * sample_sd(&x2) / sd_y).abs() < 1e-8);
        assert!((res.coefficients["x1"].beta_raw - 2.0).abs() < 1e-8);
        assert!((res.r_squared - 1.0).abs() < 1e-10);
    }

    #[test]
    fn collinear_columns_are_named() {
        let n = 20;
        let x: Vec<f64> = (0..n).map(|i| i as f64).collect();
        let x2: Vec<f64> = x.iter().map(|v| 3.0 * v).collect();
        let y: Vec<f64> = (0..n).map(|i| ((i * 7) % 5) as f64).collect();
        let d = Design::new(
            y.clone(),
            vec![("x".into(), x.clone()), ("x_times_3".into(), x2)],
            vec![("const".into(), vec![1.0; n])],
            clusters(n, 2),
        )
        .unwrap();
        match ols_fe_clustered(&d).unwrap_err() {
            Error::RankDeficient(cols) => assert_eq!(cols, vec!["x_times_3".to_string()]),
            e => panic!("unexpected {e}"),
        }
        let flat = Design::new(y, vec![("flat".into(), vec![2.0; n])], vec![], clusters(n, 2)).unwrap();
        assert!(matches!(ols_fe_clustered(&flat), Err(Error::RankDeficient(c)) if c == ["flat"]));
    }

    #[test]
    fn single_cluster_rejected() {
        let n = 10;
        let x: Vec<f64> = (0..n).map(|i| i as f64).collect();
        let y: Vec<f64> = (0..n).map(|i| (i % 3) as f64).collect();
        let d = Design::new(y, vec![("x".into(), x)], vec![], vec!["only".into(); n]).unwrap();
        assert!(ols_fe_clustered(&d).is_err());
    }

    #[test]
    fn residuals_orthogonal() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = 200;
        let x: Vec<f64> = (0..n).map(|_| rng.gen()).collect();
        let z: Vec<f64> = (0..n).map(|_| rng.gen()).collect();
        let y: Vec<f64> = x.iter().zip(&z).map(|(a, b)| a - b + rng.gen::<f64>()).collect();
        let fe: Vec<f64> = (0..n).map(|i| f64::from(u8::from(i % 2 == 0))).collect();
        let fe2: Vec<f64> = fe.iter().map(|v| 1.0 - v).collect();
        let d = Design::new(
            y,
            vec![("x".into(), x), ("z".into(), z)],
            vec![("even".into(), fe), ("odd".into(), fe2)],
            clusters(n, 10),
        )
        .unwrap();
        let res = ols_fe_clustered(&d).unwrap();
        assert!(res.max_orthogonality_error < 1e-8);
        assert!(res.coefficients["x"].p_value < 0.05);
        assert!(res.coefficients["x"].beta > 0.0 && res.coefficients["z"].beta < 0.0);
    }
}
