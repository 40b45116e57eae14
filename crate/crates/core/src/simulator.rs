//! Agent-based collaborative-filtering model.
//!
//! Each agent holds a nonnegative issue-salience vector with unit L1 norm and
//! a group label. At every step the system scores every other agent by
//! cosine similarity plus a same-group bonus `beta`, turns the scores into
//! recommendation probabilities with a softmax at temperature `tau`, and each
//! agent reinforces its own vector elementwise by what it is shown:
//!
//! ```text
//! x_i <- Norm(x_i + alpha * sum_j P_ij (x_j ⊙ x_i))
//! ```
//!
//! All agents update synchronously from the state at `t`.

use std::collections::BTreeSet;

use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::datamodel::{
    AccountProfile, Dataset, ExposureRecord, Group, Issue, Kind, ISSUE_COUNT, NEWS_AND_POLITICS,
};
use crate::diversity::cosine;
use crate::error::{Error, Result};
use crate::seed;
use crate::stats::{mean, sample_sd};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum UpdateMode {
    /// Probability-weighted sum over every other agent.
    #[default]
    Expected,
    /// Average over the sampled recommendation set only.
    Sampled,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    pub n_agents: usize,
    pub n_issues: usize,
    pub n_steps: usize,
    pub beta: f64,
    pub tau: f64,
    pub alpha: f64,
    pub recs_per_step: usize,
    pub seed: u64,
    pub update_mode: UpdateMode,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            n_agents: 160,
            n_issues: ISSUE_COUNT,
            n_steps: 150,
            beta: 0.1,
            tau: 0.1,
            alpha: 0.1,
            recs_per_step: 10,
            seed: 0,
            update_mode: UpdateMode::Expected,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |m: &str| Err(Error::InvalidArgument(m.to_string()));
        if self.n_agents < 4 || self.n_agents % 2 != 0 {
            return fail("n_agents must be even and at least 4");
        }
        if self.n_issues < 2 {
            return fail("n_issues must be at least 2");
        }
        if !(self.tau > 0.0) || !self.tau.is_finite() {
            return fail("tau must be positive");
        }
        if !(self.alpha > 0.0) || !self.alpha.is_finite() {
            return fail("alpha must be positive");
        }
        if !(self.beta >= 0.0) || !self.beta.is_finite() {
            return fail("beta must be nonnegative");
        }
        if self.recs_per_step == 0 {
            return fail("recs_per_step must be at least 1");
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: SimConfig = serde_json::from_str(text).map_err(|e| Error::Parse {
            line: e.line(),
            reason: e.to_string(),
        })?;
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Agent states at one instant. The first half of the agents is male-coded,
/// the second half female-coded.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Population {
    pub groups: Vec<Group>,
    pub vectors: Vec<Vec<f64>>,
}

impl Population {
    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    /// Mean vector of the agents in `members`.
    pub fn center_of(&self, members: impl IntoIterator<Item = usize>) -> Vec<f64> {
        let k = self.vectors.first().map_or(0, Vec::len);
        let mut c = vec![0.0; k];
        let mut n = 0usize;
        for i in members {
            for (a, b) in c.iter_mut().zip(&self.vectors[i]) {
                *a += b;
            }
            n += 1;
        }
        if n > 0 {
            c.iter_mut().for_each(|a| *a /= n as f64);
        }
        c
    }

    pub fn members(&self, group: Group) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.groups[i] == group).collect()
    }

    pub fn group_center(&self, group: Group) -> Vec<f64> {
        self.center_of(self.members(group))
    }

    /// Male-coded center minus female-coded center, per issue.
    pub fn center_difference(&self) -> Vec<f64> {
        let m = self.group_center(Group::MaleCoded);
        let f = self.group_center(Group::FemaleCoded);
        m.iter().zip(&f).map(|(a, b)| a - b).collect()
    }
}

fn l1_normalize(v: &mut [f64]) {
    let s: f64 = v.iter().sum();
    v.iter_mut().for_each(|x| *x /= s);
}

/// Uniform draws per coordinate, L1-normalized; first half male-coded.
pub fn init_population(config: &SimConfig) -> Result<Population> {
    config.validate()?;
    let mut rng = seed::rng(config.seed, seed::stream_id("sim-init"));
    let n = config.n_agents;
    let vectors = (0..n)
        .map(|_| {
            let mut v: Vec<f64> = (0..config.n_issues).map(|_| rng.gen::<f64>()).collect();
            l1_normalize(&mut v);
            v
        })
        .collect();
    let groups = (0..n)
        .map(|i| if i < n / 2 { Group::MaleCoded } else { Group::FemaleCoded })
        .collect();
    Ok(Population { groups, vectors })
}

/// Pairwise cosine matrix, row-major `n × n` with a unit diagonal.
fn cosine_matrix(pop: &Population) -> Result<Vec<f64>> {
    let n = pop.len();
    let norms: Vec<f64> = pop
        .vectors
        .iter()
        .map(|v| v.iter().map(|x| x * x).sum::<f64>().sqrt())
        .collect();
    if let Some(i) = norms.iter().position(|&x| !(x > 0.0)) {
        return Err(Error::Undefined(format!("agent {i} has a zero vector")));
    }
    let mut c = vec![1.0; n * n];
    for i in 0..n {
        for j in i + 1..n {
            let dot: f64 = pop.vectors[i].iter().zip(&pop.vectors[j]).map(|(a, b)| a * b).sum();
            let v = (dot / (norms[i] * norms[j])).min(1.0);
            c[i * n + j] = v;
            c[j * n + i] = v;
        }
    }
    Ok(c)
}

/// `S_ij = cos(x_i, x_j) + beta·[g_i = g_j]`, row-major `n × n`. The
/// diagonal is `1 + beta` and unused.
pub fn similarity_matrix(pop: &Population, beta: f64) -> Result<Vec<f64>> {
    let n = pop.len();
    let mut s = cosine_matrix(pop)?;
    for i in 0..n {
        for j in 0..n {
            if pop.groups[i] == pop.groups[j] {
                s[i * n + j] += beta;
            }
        }
    }
    Ok(s)
}

/// Softmax of `scores / tau` with max-shift. `scores` holds the candidates
/// only (the focal agent already removed).
pub fn recommendation_probs(scores: &[f64], tau: f64) -> Vec<f64> {
    let top = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut p: Vec<f64> = scores.iter().map(|s| ((s - top) / tau).exp()).collect();
    let z: f64 = p.iter().sum();
    p.iter_mut().for_each(|x| *x /= z);
    p
}

/// `m` independent draws with replacement from `probs`, as candidate indices.
pub fn sample_recommendations(probs: &[f64], m: usize, rng: &mut impl Rng) -> Result<Vec<usize>> {
    let dist = WeightedIndex::new(probs)
        .map_err(|e| Error::InvalidArgument(format!("bad recommendation weights: {e}")))?;
    Ok((0..m).map(|_| dist.sample(rng)).collect())
}

/// `Norm(x + alpha · (signal ⊙ x))` where `signal` is the recommended mix.
pub fn update_state(x: &[f64], signal: &[f64], alpha: f64) -> Vec<f64> {
    let mut out: Vec<f64> = x.iter().zip(signal).map(|(xi, s)| xi + alpha * s * xi).collect();
    l1_normalize(&mut out);
    out
}

/// Probability-weighted mix of the other agents' vectors.
pub fn expected_signal(pop: &Population, focal: usize, probs: &[f64]) -> Vec<f64> {
    let k = pop.vectors[focal].len();
    let mut sig = vec![0.0; k];
    for (j, p) in candidates(pop.len(), focal).zip(probs) {
        for (s, x) in sig.iter_mut().zip(&pop.vectors[j]) {
            *s += p * x;
        }
    }
    sig
}

fn candidates(n: usize, focal: usize) -> impl Iterator<Item = usize> {
    (0..n).filter(move |&j| j != focal)
}

/// Summary statistics of one snapshot.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SeriesPoint {
    pub step: usize,
    /// Cosine between the two group centers.
    pub between_cosine: f64,
    /// `1 − between_cosine`.
    pub divergence: f64,
    /// Divergence between the centers of two gender-balanced halves of the
    /// population; the exchangeable reference for `divergence`.
    pub baseline_divergence: f64,
    pub within_male: f64,
    pub within_female: f64,
}

/// Worst-case deviations from the model's conservation laws over a run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Default)]
pub struct InvariantLog {
    pub max_l1_error: f64,
    pub min_entry: f64,
    pub max_softmax_error: f64,
}

impl InvariantLog {
    fn check(&mut self, pop: &Population) {
        for v in &pop.vectors {
            let s: f64 = v.iter().sum();
            self.max_l1_error = self.max_l1_error.max((s - 1.0).abs());
            self.min_entry = v.iter().copied().fold(self.min_entry, f64::min);
        }
    }

    pub fn holds(&self) -> bool {
        self.max_l1_error <= 1e-9 && self.min_entry >= 0.0 && self.max_softmax_error <= 1e-12
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimTrajectory {
    pub config: SimConfig,
    /// `n_steps + 1` states, starting at `t = 0`.
    pub snapshots: Vec<Population>,
    /// `omega[t][i]` holds the agents recommended to `i` on the transition
    /// `t → t+1`.
    pub omega: Vec<Vec<Vec<u32>>>,
    pub series: Vec<SeriesPoint>,
    pub invariants: InvariantLog,
}

impl SimTrajectory {
    pub fn final_point(&self) -> SeriesPoint {
        *self.series.last().expect("series includes t = 0")
    }
}

fn mean_pairwise(cos: &[f64], n: usize, members: &[usize]) -> f64 {
    let mut sum = 0.0;
    let mut count = 0usize;
    for (a, &i) in members.iter().enumerate() {
        for &j in &members[a + 1..] {
            sum += cos[i * n + j];
            count += 1;
        }
    }
    sum / count as f64
}

fn series_point(step: usize, pop: &Population, cos: &[f64]) -> SeriesPoint {
    let n = pop.len();
    let m = pop.members(Group::MaleCoded);
    let f = pop.members(Group::FemaleCoded);
    let between = cosine(&pop.center_of(m.iter().copied()), &pop.center_of(f.iter().copied()))
        .unwrap_or(f64::NAN);
    let (hm, hf) = (m.len() / 2, f.len() / 2);
    let half_a = m[..hm].iter().chain(&f[..hf]).copied();
    let half_b = m[hm..].iter().chain(&f[hf..]).copied();
    let baseline = cosine(&pop.center_of(half_a), &pop.center_of(half_b)).unwrap_or(f64::NAN);
    SeriesPoint {
        step,
        between_cosine: between,
        divergence: 1.0 - between,
        baseline_divergence: 1.0 - baseline,
        within_male: mean_pairwise(cos, n, &m),
        within_female: mean_pairwise(cos, n, &f),
    }
}

/// One synchronous step. Returns the next state and the sampled sets.
fn step(
    pop: &Population,
    cos: &[f64],
    config: &SimConfig,
    rng: &mut ChaCha8Rng,
    log: &mut InvariantLog,
) -> Result<(Population, Vec<Vec<u32>>)> {
    let n = pop.len();
    let mut next = Vec::with_capacity(n);
    let mut omega = Vec::with_capacity(n);
    let mut scores = Vec::with_capacity(n - 1);
    for i in 0..n {
        scores.clear();
        scores.extend(candidates(n, i).map(|j| {
            let bonus = if pop.groups[i] == pop.groups[j] { config.beta } else { 0.0 };
            cos[i * n + j] + bonus
        }));
        let probs = recommendation_probs(&scores, config.tau);
        let total: f64 = probs.iter().sum();
        log.max_softmax_error = log.max_softmax_error.max((total - 1.0).abs());

        let drawn = sample_recommendations(&probs, config.recs_per_step, rng)?;
        let sources: Vec<u32> = drawn
            .iter()
            .map(|&c| (if c >= i { c + 1 } else { c }) as u32)
            .collect();
        let signal = match config.update_mode {
            UpdateMode::Expected => expected_signal(pop, i, &probs),
            UpdateMode::Sampled => {
                let k = pop.vectors[i].len();
                let mut sig = vec![0.0; k];
                for &j in &sources {
                    for (s, x) in sig.iter_mut().zip(&pop.vectors[j as usize]) {
                        *s += x;
                    }
                }
                sig.iter_mut().for_each(|s| *s /= sources.len() as f64);
                sig
            }
        };
        next.push(update_state(&pop.vectors[i], &signal, config.alpha));
        omega.push(sources);
    }
    Ok((
        Population {
            groups: pop.groups.clone(),
            vectors: next,
        },
        omega,
    ))
}

fn simulate(config: &SimConfig, keep_states: bool) -> Result<SimTrajectory> {
    let mut pop = init_population(config)?;
    let mut rng = seed::rng(config.seed, seed::stream_id("sim-recommend"));
    let mut log = InvariantLog {
        min_entry: f64::INFINITY,
        ..Default::default()
    };
    log.check(&pop);
    let mut snapshots = Vec::new();
    let mut omegas = Vec::new();
    let mut series = Vec::with_capacity(config.n_steps + 1);
    for t in 0..config.n_steps {
        let cos = cosine_matrix(&pop)?;
        series.push(series_point(t, &pop, &cos));
        let (next, omega) = step(&pop, &cos, config, &mut rng, &mut log)?;
        log.check(&next);
        if keep_states {
            snapshots.push(std::mem::replace(&mut pop, next));
            omegas.push(omega);
        } else {
            pop = next;
        }
    }
    let cos = cosine_matrix(&pop)?;
    series.push(series_point(config.n_steps, &pop, &cos));
    snapshots.push(pop);
    Ok(SimTrajectory {
        config: config.clone(),
        snapshots,
        omega: omegas,
        series,
        invariants: log,
    })
}

/// Runs the model, keeping every snapshot and sampled set.
pub fn run_simulation(config: &SimConfig) -> Result<SimTrajectory> {
    simulate(config, true)
}

/// Runs the model keeping only the summary series and final state.
pub fn run_summary(config: &SimConfig) -> Result<SimTrajectory> {
    simulate(config, false)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepRow {
    pub beta: f64,
    pub tau: f64,
    pub seed: u64,
    pub final_divergence: f64,
    pub final_between_cosine: f64,
    pub final_baseline_divergence: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepCell {
    pub beta: f64,
    pub tau: f64,
    pub n_seeds: usize,
    pub mean_divergence: f64,
    pub mean_between_cosine: f64,
    /// 95% t-interval of the mean between-center cosine.
    pub ci_low: f64,
    pub ci_high: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
    pub cells: Vec<SweepCell>,
    pub invariants: InvariantLog,
}

impl SweepResult {
    pub fn cell(&self, beta: f64, tau: f64) -> Option<&SweepCell> {
        self.cells.iter().find(|c| c.beta == beta && c.tau == tau)
    }
}

/// Runs every `(beta, tau, seed)` cell. A cell's seed drives its initial
/// population, so cells sharing a seed start from the same state.
pub fn sweep(betas: &[f64], taus: &[f64], seeds: &[u64], base: &SimConfig) -> Result<SweepResult> {
    if betas.is_empty() || taus.is_empty() || seeds.is_empty() {
        return Err(Error::InvalidArgument("sweep grids must be non-empty".into()));
    }
    let mut jobs = Vec::new();
    for &beta in betas {
        for &tau in taus {
            for &s in seeds {
                jobs.push(SimConfig {
                    beta,
                    tau,
                    seed: s,
                    ..base.clone()
                });
            }
        }
    }
    jobs.iter().try_for_each(SimConfig::validate)?;
    let runs: Vec<(SweepRow, InvariantLog)> = jobs
        .par_iter()
        .map(|cfg| {
            let traj = run_summary(cfg)?;
            let last = traj.final_point();
            Ok((
                SweepRow {
                    beta: cfg.beta,
                    tau: cfg.tau,
                    seed: cfg.seed,
                    final_divergence: last.divergence,
                    final_between_cosine: last.between_cosine,
                    final_baseline_divergence: last.baseline_divergence,
                },
                traj.invariants,
            ))
        })
        .collect::<Result<_>>()?;

    let mut invariants = InvariantLog {
        min_entry: f64::INFINITY,
        ..Default::default()
    };
    for (_, log) in &runs {
        invariants.max_l1_error = invariants.max_l1_error.max(log.max_l1_error);
        invariants.min_entry = invariants.min_entry.min(log.min_entry);
        invariants.max_softmax_error = invariants.max_softmax_error.max(log.max_softmax_error);
    }
    let rows: Vec<SweepRow> = runs.into_iter().map(|(r, _)| r).collect();
    let cells = rows
        .chunks(seeds.len())
        .map(|chunk| {
            let div: Vec<f64> = chunk.iter().map(|r| r.final_divergence).collect();
            let cos: Vec<f64> = chunk.iter().map(|r| r.final_between_cosine).collect();
            let half = if cos.len() > 1 {
                let t = StudentsT::new(0.0, 1.0, (cos.len() - 1) as f64)
                    .expect("positive df")
                    .inverse_cdf(0.975);
                t * sample_sd(&cos) / (cos.len() as f64).sqrt()
            } else {
                f64::NAN
            };
            let mc = mean(&cos);
            SweepCell {
                beta: chunk[0].beta,
                tau: chunk[0].tau,
                n_seeds: chunk.len(),
                mean_divergence: mean(&div),
                mean_between_cosine: mc,
                ci_low: mc - half,
                ci_high: mc + half,
            }
        })
        .collect();
    Ok(SweepResult {
        rows,
        cells,
        invariants,
    })
}

pub const DEFAULT_BETA_GRID: [f64; 6] = [0.0, 0.05, 0.1, 0.2, 0.3, 0.5];
pub const DEFAULT_TAU_GRID: [f64; 6] = [0.02, 0.05, 0.1, 0.2, 0.5, 1.0];

/// Agent `i` as an account id.
pub fn agent_id(i: usize) -> String {
    format!("agent{i:03}")
}

/// Steps for which one source's content on one issue stays the same item in
/// exported logs.
pub const ITEM_LIFETIME: usize = 5;

/// Converts a full trajectory into a trajectory log.
///
/// Step `t + 1` of agent `i` holds one exposure per distinct item drawn for
/// the transition `t → t+1`: each recommended source `j` contributes an item
/// whose issue is drawn from `x_j(t)`. An item is identified by source,
/// issue and the `ITEM_LIFETIME`-step block it falls in, so accounts shown
/// the same source on the same issue at nearby steps share the item.
/// Repeated draws of one item within a step collapse into a single exposure.
/// One click per step is then drawn from the exposures, weighted by the
/// focal agent's salience for each item's issue.
pub fn export_synthetic_log(trajectory: &SimTrajectory, issue_labels: &[Issue]) -> Result<Dataset> {
    let cfg = &trajectory.config;
    if issue_labels.len() != cfg.n_issues {
        return Err(Error::InvalidArgument(format!(
            "{} issue labels for {} issues",
            issue_labels.len(),
            cfg.n_issues
        )));
    }
    if trajectory.omega.len() != cfg.n_steps || trajectory.snapshots.len() != cfg.n_steps + 1 {
        return Err(Error::InvalidArgument(
            "trajectory was run without recording states".into(),
        ));
    }
    let mut rng = seed::rng(cfg.seed, seed::stream_id("sim-export"));
    let groups = &trajectory.snapshots[0].groups;
    let profiles = groups
        .iter()
        .enumerate()
        .map(|(i, g)| AccountProfile {
            account_id: agent_id(i),
            group: *g,
        })
        .collect();
    let record = |account: &str, step: usize, kind: Kind, src: u32, issue: usize| ExposureRecord {
        account_id: account.to_string(),
        step: step as u32,
        kind,
        video_id: format!("w{}-src{src}-i{issue}", (step - 1) / ITEM_LIFETIME),
        category: NEWS_AND_POLITICS.to_string(),
        is_political: true,
        issue: Some(issue_labels[issue]),
        ideology: None,
    };

    let mut records = Vec::new();
    for (t, omega) in trajectory.omega.iter().enumerate() {
        let state = &trajectory.snapshots[t];
        for (i, sources) in omega.iter().enumerate() {
            let account = agent_id(i);
            let mut items = BTreeSet::new();
            let mut order = Vec::new();
            for &j in sources {
                let dist = WeightedIndex::new(&state.vectors[j as usize])
                    .map_err(|e| Error::Undefined(format!("agent {j} state: {e}")))?;
                let issue = dist.sample(&mut rng);
                if items.insert((j, issue)) {
                    order.push((j, issue));
                }
            }
            for &(j, issue) in &order {
                records.push(record(&account, t + 1, Kind::Exposure, j, issue));
            }
            let weights: Vec<f64> = order.iter().map(|&(_, l)| state.vectors[i][l]).collect();
            let pick = match WeightedIndex::new(&weights) {
                Ok(d) => d.sample(&mut rng),
                // every exposed issue has zero salience for the focal agent
                Err(_) => rng.gen_range(0..order.len()),
            };
            let (j, issue) = order[pick];
            records.push(record(&account, t + 1, Kind::Click, j, issue));
        }
    }
    Ok(Dataset::new(profiles, records))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(n_steps: usize) -> SimConfig {
        SimConfig {
            n_agents: 20,
            n_steps,
            recs_per_step: 4,
            seed: 3,
            ..SimConfig::default()
        }
    }

    #[test]
    fn init_is_normalized_and_seeded() {
        let cfg = small(0);
        let a = init_population(&cfg).unwrap();
        let b = init_population(&cfg).unwrap();
        assert_eq!(a, b);
        for v in &a.vectors {
            assert!((v.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            assert_eq!(v.len(), 21);
        }
        assert_eq!(a.members(Group::MaleCoded), (0..10).collect::<Vec<_>>());
    }

    #[test]
    fn softmax_examples() {
        assert_eq!(recommendation_probs(&[0.3, 0.3], 0.1), vec![0.5, 0.5]);
        let p = recommendation_probs(&[1.0, 0.0], 0.5);
        assert!((p[0] - 0.8807970779778823).abs() < 1e-12);
        let cold = recommendation_probs(&[1.0, 0.0], 1e-4);
        assert_eq!(cold, vec![1.0, 0.0]);
    }

    #[test]
    fn similarity_adds_bonus_within_group() {
        let pop = Population {
            groups: vec![Group::MaleCoded, Group::MaleCoded, Group::FemaleCoded],
            vectors: vec![vec![0.5, 0.5]; 3],
        };
        let s = similarity_matrix(&pop, 0.5).unwrap();
        assert!((s[1] - 1.5).abs() < 1e-15);
        assert!((s[2] - 1.0).abs() < 1e-15);
        let zero = Population {
            groups: pop.groups.clone(),
            vectors: vec![vec![0.5, 0.5], vec![0.0, 0.0], vec![1.0, 0.0]],
        };
        assert!(similarity_matrix(&zero, 0.0).is_err());
    }

    #[test]
    fn degenerate_probs_repeat_source() {
        let mut rng = seed::rng(0, 0);
        let draws = sample_recommendations(&[0.0, 1.0, 0.0], 7, &mut rng).unwrap();
        assert_eq!(draws, vec![1; 7]);
    }

    #[test]
    fn update_fixed_points() {
        let x = vec![0.2, 0.3, 0.5];
        assert_eq!(update_state(&x, &[0.9, 0.05, 0.05], 0.0), x);
        let u = vec![0.25; 4];
        let out = update_state(&u, &[0.25; 4], 0.1);
        for v in out {
            assert!((v - 0.25).abs() < 1e-15);
        }
    }

    #[test]
    fn zero_steps_is_initial_snapshot() {
        let t = run_simulation(&small(0)).unwrap();
        assert_eq!(t.snapshots.len(), 1);
        assert_eq!(t.series.len(), 1);
        assert!(t.omega.is_empty());
    }

    #[test]
    fn deterministic_and_conservative() {
        let cfg = small(15);
        let a = run_simulation(&cfg).unwrap();
        let b = run_simulation(&cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.snapshots.len(), 16);
        assert!(a.invariants.holds(), "{:?}", a.invariants);
        let sampled = run_simulation(&SimConfig {
            update_mode: UpdateMode::Sampled,
            ..cfg
        })
        .unwrap();
        assert!(sampled.invariants.holds());
    }

    #[test]
    fn summary_matches_full_run() {
        let cfg = small(10);
        let full = run_simulation(&cfg).unwrap();
        let light = run_summary(&cfg).unwrap();
        assert_eq!(full.series, light.series);
        assert_eq!(full.snapshots.last(), light.snapshots.last());
    }

    #[test]
    fn config_json_rejects_unknown_and_invalid() {
        let cfg = SimConfig::from_json(r#"{"beta": 0.3, "tau": 0.05}"#).unwrap();
        assert_eq!(cfg.beta, 0.3);
        assert_eq!(cfg.n_agents, 160);
        assert!(SimConfig::from_json(r#"{"betta": 0.3}"#).is_err());
        assert!(SimConfig::from_json(r#"{"tau": 0}"#).is_err());
        assert!(SimConfig::from_json(r#"{"n_agents": 7}"#).is_err());
    }

    #[test]
    fn export_shapes() {
        let traj = run_simulation(&small(5)).unwrap();
        let ds = export_synthetic_log(&traj, &Issue::CORE).unwrap();
        assert_eq!(ds.profiles.len(), 20);
        let clicks = ds.records.iter().filter(|r| r.kind == Kind::Click).count();
        assert_eq!(clicks, 20 * 5);
        assert!(ds.records.iter().all(|r| r.is_political && r.step >= 1 && r.step <= 5));
        assert!(export_synthetic_log(&run_summary(&small(5)).unwrap(), &Issue::CORE).is_err());
    }
}
