//! A log generator with known feedback structure.
//!
//! Each group splits into communities that share a private item pool, so
//! the co-exposure network of a group is a union of dense blocks. Latent
//! issue mixes evolve by stage:
//!
//! - clicks at stage s+1 follow the account's own exposures at s, plus a
//!   smaller pull toward its community's exposures;
//! - exposures at s+1 follow the community's clicks at s, plus a smaller
//!   pull toward the account's own clicks, and are pushed away from what
//!   other communities of the same group and the other group clicked.

use rand::Rng;
use recaudit::datamodel::{
    AccountProfile, Dataset, ExposureRecord, Group, Issue, Kind, ISSUE_COUNT, NEWS_AND_POLITICS,
};

#[derive(Debug, Clone, Copy)]
pub struct Planted {
    pub group_size: usize,
    pub communities_per_group: usize,
    pub n_stages: usize,
    pub steps_per_stage: usize,
    pub exposures_per_step: usize,
    pub clicks_per_step: usize,
}

impl Default for Planted {
    fn default() -> Self {
        Planted {
            group_size: 40,
            communities_per_group: 4,
            n_stages: 3,
            steps_per_stage: 50,
            exposures_per_step: 8,
            clicks_per_step: 2,
        }
    }
}

type Mix = [f64; ISSUE_COUNT];

fn normalized(mut v: Mix) -> Mix {
    v.iter_mut().for_each(|x| *x = x.max(0.0));
    let s: f64 = v.iter().sum();
    v.iter_mut().for_each(|x| *x /= s);
    v
}

fn sparse_mix(rng: &mut impl Rng) -> Mix {
    let mut v = [0.0; ISSUE_COUNT];
    v.iter_mut().for_each(|x| *x = rng.gen::<f64>().powi(4));
    normalized(v)
}

fn blend(parts: &[(f64, &Mix)]) -> Mix {
    let mut v = [0.0; ISSUE_COUNT];
    for (w, m) in parts {
        for (a, b) in v.iter_mut().zip(m.iter()) {
            *a += w * b;
        }
    }
    v
}

/// Mean of `mixes[j]` over accounts `j != i` matching `keep`.
fn mean_where(mixes: &[Mix], i: usize, keep: impl Fn(usize) -> bool) -> Mix {
    let mut v = [0.0; ISSUE_COUNT];
    let mut n = 0.0;
    for (j, m) in mixes.iter().enumerate() {
        if j != i && keep(j) {
            for (a, b) in v.iter_mut().zip(m) {
                *a += b;
            }
            n += 1.0;
        }
    }
    v.iter_mut().for_each(|a| *a /= n);
    v
}

fn draw(rng: &mut impl Rng, mix: &Mix) -> usize {
    let mut u = rng.gen::<f64>();
    for (k, p) in mix.iter().enumerate() {
        if u < *p {
            return k;
        }
        u -= p;
    }
    ISSUE_COUNT - 1
}

impl Planted {
    pub fn n_accounts(&self) -> usize {
        2 * self.group_size
    }

    pub fn t_max(&self) -> u32 {
        (self.n_stages * self.steps_per_stage) as u32
    }

    fn group_of(&self, i: usize) -> usize {
        i / self.group_size
    }

    fn community_of(&self, i: usize) -> usize {
        let per = self.group_size / self.communities_per_group;
        self.group_of(i) * self.communities_per_group + (i % self.group_size) / per
    }

    pub fn generate(&self, rng: &mut impl Rng) -> Dataset {
        let n = self.n_accounts();
        let themes: Vec<Mix> = (0..2 * self.communities_per_group).map(|_| sparse_mix(rng)).collect();
        let mut exposure: Vec<Mix> = (0..n)
            .map(|i| normalized(blend(&[(0.6, &themes[self.community_of(i)]), (0.4, &sparse_mix(rng))])))
            .collect();
        let mut click: Vec<Mix> = (0..n)
            .map(|i| normalized(blend(&[(0.7, &exposure[i]), (0.3, &sparse_mix(rng))])))
            .collect();

        let mut profiles = Vec::new();
        let mut records = Vec::new();
        let groups = [Group::MaleCoded, Group::FemaleCoded];
        for i in 0..n {
            profiles.push(AccountProfile {
                account_id: format!("acct{i:03}"),
                group: groups[self.group_of(i)],
            });
        }
        for s in 0..self.n_stages {
            if s > 0 {
                let (e_prev, c_prev) = (exposure.clone(), click.clone());
                for i in 0..n {
                    let (g, c) = (self.group_of(i), self.community_of(i));
                    let comm_e = mean_where(&e_prev, i, |j| self.community_of(j) == c);
                    click[i] = normalized(blend(&[
                        (0.65, &e_prev[i]),
                        (0.2, &comm_e),
                        (0.15, &sparse_mix(rng)),
                    ]));
                    let comm_c = mean_where(&c_prev, i, |j| self.community_of(j) == c);
                    let in_out = mean_where(&c_prev, i, |j| self.group_of(j) == g && self.community_of(j) != c);
                    let out_group = mean_where(&c_prev, i, |j| self.group_of(j) != g);
                    exposure[i] = normalized(blend(&[
                        (0.6, &comm_c),
                        (0.15, &c_prev[i]),
                        (0.25, &sparse_mix(rng)),
                        (-0.15, &in_out),
                        (-0.15, &out_group),
                    ]));
                }
            }
            for step in s * self.steps_per_stage + 1..=(s + 1) * self.steps_per_stage {
                let block = (step - 1) / 5;
                for i in 0..n {
                    let account = format!("acct{i:03}");
                    let mut seen = std::collections::BTreeSet::new();
                    for _ in 0..self.exposures_per_step {
                        let issue = draw(rng, &exposure[i]);
                        let video = format!("c{}-b{block}-i{issue}", self.community_of(i));
                        if seen.insert(video.clone()) {
                            records.push(record(&account, step, Kind::Exposure, video, issue));
                        }
                    }
                    for k in 0..self.clicks_per_step {
                        let issue = draw(rng, &click[i]);
                        let video = format!("{account}-s{step}-k{k}");
                        records.push(record(&account, step, Kind::Click, video, issue));
                    }
                }
            }
        }
        Dataset::new(profiles, records)
    }
}

fn record(account: &str, step: usize, kind: Kind, video_id: String, issue: usize) -> ExposureRecord {
    ExposureRecord {
        account_id: account.to_string(),
        step: step as u32,
        kind,
        video_id,
        category: NEWS_AND_POLITICS.to_string(),
        is_political: true,
        issue: Issue::from_index(issue),
        ideology: None,
    }
}
