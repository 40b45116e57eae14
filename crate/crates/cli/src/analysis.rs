//! Log analyses: ingest summary, diversity, networks and feedback.

use std::collections::BTreeSet;
use std::path::Path;

use anyhow::{bail, Context, Result};
use recaudit::conet::{
    analyze_networks, community_profile, weighted_clustering, CoExposureOptions, NetworkOptions,
    NetworkReport,
};
use recaudit::datamodel::{Dataset, Group, Issue, Kind};
use recaudit::diversity::{
    account_diversity, diversity_comparisons, issue_share_comparison, similarity_by_stage,
};
use recaudit::feedback::{run_feedback, Direction, FeedbackOptions, StagePartition};
use recaudit::seed;
use serde_json::json;

use crate::config::AnalysisConfig;
use crate::table::{f, opt, s, write_json, Table};

fn group_label(g: Option<Group>) -> &'static str {
    g.map_or("all", Group::as_str)
}

pub fn ingest(dataset: &Dataset, out: &Path) -> Result<()> {
    let mut file = std::fs::File::create(out.join("records.jsonl"))?;
    recaudit::datamodel::write_jsonl(dataset, &mut file)?;
    let groups = dataset.groups();
    let mut t = Table::new(&[
        "account_id", "group", "exposures", "clicks", "political_exposures", "first_step", "last_step",
    ]);
    for (account, recs) in dataset.by_account() {
        let exposures = recs.iter().filter(|r| r.kind == Kind::Exposure).count();
        let political = recs
            .iter()
            .filter(|r| r.kind == Kind::Exposure && r.is_political)
            .count();
        t.push(vec![
            account.clone(),
            s(groups[&account].as_str()),
            s(exposures),
            s(recs.len() - exposures),
            s(political),
            s(recs.first().map_or(0, |r| r.step)),
            s(recs.last().map_or(0, |r| r.step)),
        ]);
    }
    t.write(&out.join("accounts.csv"))?;
    write_json(
        &out.join("summary.json"),
        &json!({
            "accounts": dataset.profiles.len(),
            "records": dataset.records.len(),
            "male_accounts": groups.values().filter(|g| **g == Group::MaleCoded).count(),
            "female_accounts": groups.values().filter(|g| **g == Group::FemaleCoded).count(),
            "max_step": dataset.max_step(),
        }),
    )
}

pub fn diversity(dataset: &Dataset, cfg: &AnalysisConfig, out: &Path) -> Result<()> {
    let groups = dataset.groups();
    let by_account = dataset.by_account();
    let interest: BTreeSet<String> = cfg.interest_categories.iter().cloned().collect();

    let mut accounts = Table::new(&[
        "window", "account_id", "group", "n_exposures", "category_entropy", "political_share",
        "structural_entropy", "interest_share", "issue_entropy",
    ]);
    let mut comparisons = Table::new(&[
        "metric", "window", "mean_m", "sd_m", "n_m", "mean_f", "sd_f", "n_f", "t", "df", "p",
    ]);
    let mut windows = cfg.diversity_windows()?;
    let main = cfg.main_window()?;
    if !windows.contains(&main) {
        windows.push(main);
    }
    for w in &windows {
        let rows = account_diversity(&by_account, &groups, *w, cfg.t_max, Some(&interest))?;
        for r in &rows {
            accounts.push(vec![
                w.to_string(),
                r.account_id.clone(),
                s(r.group.as_str()),
                s(r.n_exposures),
                opt(r.category_entropy),
                opt(r.political_share),
                opt(r.structural_entropy),
                opt(r.interest_share),
                opt(r.issue_entropy),
            ]);
        }
        for c in diversity_comparisons(&rows) {
            comparisons.push(vec![
                c.metric_name.clone(),
                w.to_string(),
                f(c.mean_a),
                f(c.sd_a),
                s(c.n_a),
                f(c.mean_b),
                f(c.sd_b),
                s(c.n_b),
                f(c.t_stat),
                f(c.df),
                f(c.p_value),
            ]);
        }
    }
    accounts.write(&out.join("account_diversity.csv"))?;
    comparisons.write(&out.join("group_comparisons.csv"))?;

    let mut issues = Table::new(&[
        "issue", "window", "mean_m", "sd_m", "n_m", "mean_f", "sd_f", "n_f", "difference", "t",
        "df", "p",
    ]);
    for row in issue_share_comparison(&by_account, &groups, main, cfg.t_max)
        .context("issue share comparison")?
    {
        let c = &row.comparison;
        issues.push(vec![
            s(row.issue.as_str()),
            main.to_string(),
            f(c.mean_a),
            f(c.sd_a),
            s(c.n_a),
            f(c.mean_b),
            f(c.sd_b),
            s(c.n_b),
            f(row.difference),
            f(c.t_stat),
            f(c.df),
            f(c.p_value),
        ]);
    }
    issues.write(&out.join("issue_shares.csv"))?;

    let stages = StagePartition::equal(cfg.stages, cfg.t_max)?;
    let mut sim = Table::new(&[
        "kind", "stage", "first_step", "last_step", "mode", "mean", "sd", "n_pairs", "excluded",
    ]);
    for kind in [Kind::Exposure, Kind::Click] {
        for row in similarity_by_stage(&by_account, &groups, &stages, kind) {
            let (lo, hi) = stages.bounds()[row.stage - 1];
            sim.push(vec![
                s(kind.as_str()),
                s(row.stage),
                s(lo),
                s(hi),
                s(row.mode),
                f(row.summary.mean),
                f(row.summary.sd),
                s(row.summary.n_pairs),
                s(row.summary.excluded),
            ]);
        }
    }
    sim.write(&out.join("similarity_stages.csv"))?;
    Ok(())
}

fn network_options(cfg: &AnalysisConfig, theta: u32, master_seed: u64) -> Result<NetworkOptions> {
    Ok(NetworkOptions {
        coexposure: CoExposureOptions {
            political_only: true,
            window: cfg.main_window()?,
            t_max: cfg.t_max,
            threshold: theta,
            retain_all: cfg.retain_all,
        },
        early_window: cfg.early()?,
        resolution: cfg.gamma,
        n_permutations: cfg.permutations,
        seed: seed::derive(master_seed, seed::stream_id("network")),
    })
}

fn write_network_report(report: &NetworkReport, dataset: &Dataset, out: &Path) -> Result<()> {
    let mut edges = Table::new(&["group", "source", "target", "weight"]);
    let mut nodes = Table::new(&["group", "account_id", "degree", "strength", "clustering"]);
    let mut comms = Table::new(&["group", "account_id", "community"]);
    let mut profiles_header = vec!["group", "community", "members", "with_evidence"];
    profiles_header.extend(Issue::CORE.iter().map(|i| i.as_str()));
    profiles_header.extend(["left", "neutral", "right"]);
    let mut profiles = Table::new(&profiles_header);

    let by_account = dataset.by_account();
    for (g, net) in &report.networks {
        let clustering = weighted_clustering(net);
        for (i, node) in net.nodes().iter().enumerate() {
            nodes.push(vec![
                s(g.as_str()),
                node.clone(),
                s(net.degree(i)),
                f(net.strength(i)),
                f(clustering.per_node[i]),
            ]);
        }
        for (i, j, w) in net.edges() {
            edges.push(vec![
                s(g.as_str()),
                net.nodes()[i].clone(),
                net.nodes()[j].clone(),
                s(w),
            ]);
        }
    }
    for (g, part) in &report.partitions {
        for (node, c) in part.nodes().iter().zip(part.labels()) {
            comms.push(vec![s(g.as_str()), node.clone(), s(c)]);
        }
        let profs = community_profile(part, &by_account)?;
        for p in &profs.profiles {
            let mut row = vec![s(g.as_str()), s(p.community), s(p.members), s(p.with_evidence)];
            row.extend(p.issue.as_slice().iter().map(|x| f(*x)));
            match p.ideology {
                Some(ideo) => row.extend(ideo.iter().map(|x| f(*x))),
                None => row.extend([String::new(), String::new(), String::new()]),
            }
            profiles.push(row);
        }
    }
    edges.write(&out.join("edges.csv"))?;
    nodes.write(&out.join("nodes.csv"))?;
    comms.write(&out.join("communities.csv"))?;
    profiles.write(&out.join("community_profiles.csv"))?;

    let groups: serde_json::Map<String, serde_json::Value> = report
        .groups
        .iter()
        .map(|g| (g.group.as_str().to_string(), serde_json::to_value(g).unwrap()))
        .collect();
    let tests: serde_json::Map<String, serde_json::Value> = report
        .tests
        .iter()
        .map(|t| (t.metric.to_string(), serde_json::to_value(t.outcome).unwrap()))
        .collect();
    write_json(
        &out.join("metrics.json"),
        &json!({
            "threshold": report.options.coexposure.threshold,
            "window": report.options.coexposure.window.to_string(),
            "early_window": report.options.early_window.to_string(),
            "resolution": report.options.resolution,
            "groups": groups,
            "permutation_tests": tests,
        }),
    )
}

pub fn network(dataset: &Dataset, cfg: &AnalysisConfig, master_seed: u64, out: &Path) -> Result<()> {
    let report = analyze_networks(dataset, &network_options(cfg, cfg.theta, master_seed)?)
        .context("network analysis")?;
    write_network_report(&report, dataset, out)?;

    if cfg.thetas.is_empty() {
        return Ok(());
    }
    let mut sweep = Table::new(&[
        "theta", "nodes_m", "nodes_f", "edges_m", "edges_f", "density_m", "density_f",
        "clustering_m", "clustering_f", "modularity_m", "modularity_f", "continuity_m",
        "continuity_f", "p_density", "p_clustering", "p_modularity",
    ]);
    for &theta in &cfg.thetas {
        let r = if theta == cfg.theta {
            report.clone()
        } else {
            analyze_networks(dataset, &network_options(cfg, theta, master_seed)?)
                .with_context(|| format!("network analysis at theta {theta}"))?
        };
        let (m, fm) = (&r.groups[0], &r.groups[1]);
        let p = |name: &str| {
            r.tests
                .iter()
                .find(|t| t.metric == name)
                .map(|t| t.outcome.p_value)
        };
        sweep.push(vec![
            s(theta),
            s(m.nodes),
            s(fm.nodes),
            s(m.edges),
            s(fm.edges),
            opt(m.density),
            opt(fm.density),
            f(m.clustering),
            f(fm.clustering),
            opt(m.modularity),
            opt(fm.modularity),
            opt(m.continuity),
            opt(fm.continuity),
            opt(p("density")),
            opt(p("clustering")),
            opt(p("modularity")),
        ]);
    }
    sweep.write(&out.join("theta_sweep.csv"))
}

fn directions(cfg: &AnalysisConfig) -> Result<Vec<Direction>> {
    match cfg.direction.as_str() {
        "both" => Ok(Direction::BOTH.to_vec()),
        other => Ok(vec![other.parse::<Direction>()?]),
    }
}

pub fn feedback(dataset: &Dataset, cfg: &AnalysisConfig, master_seed: u64, out: &Path) -> Result<()> {
    let wanted = directions(cfg)?;
    let opts = FeedbackOptions {
        n_stages: cfg.stages,
        t_max: cfg.t_max,
        network: CoExposureOptions {
            political_only: true,
            window: cfg.main_window()?,
            t_max: cfg.t_max,
            threshold: cfg.theta,
            retain_all: false,
        },
        resolution: cfg.gamma,
        seed: seed::derive(master_seed, seed::stream_id("feedback")),
    };
    if cfg.stages < 2 {
        bail!("feedback needs at least two stages");
    }
    let report = run_feedback(dataset, &opts).context("feedback analysis")?;

    let mut coef = Table::new(&[
        "direction", "subgroup", "levels", "predictor", "beta", "se", "p", "ci_low", "ci_high",
        "se_classical", "p_classical", "beta_raw", "n_obs", "n_clusters", "r_squared", "dropped",
    ]);
    let mut plot = Table::new(&["direction", "subgroup", "predictor", "beta", "ci_low", "ci_high"]);
    let mut skipped = Table::new(&["part", "direction", "group", "transition", "reason"]);
    for m in report.models.iter().filter(|m| wanted.contains(&m.direction)) {
        let Some(r) = &m.result else {
            skipped.push(vec![
                s("model"),
                s(m.direction.label()),
                s(group_label(m.subgroup)),
                String::new(),
                m.skipped.clone().unwrap_or_default(),
            ]);
            continue;
        };
        for name in &r.predictor_order {
            let c = &r.coefficients[name];
            coef.push(vec![
                s(m.direction.label()),
                s(group_label(m.subgroup)),
                s(r.predictor_order.len()),
                name.clone(),
                f(c.beta),
                f(c.se),
                f(c.p_value),
                f(c.ci_low),
                f(c.ci_high),
                f(c.se_classical),
                f(c.p_classical),
                f(c.beta_raw),
                s(r.n_obs),
                s(r.n_clusters),
                f(r.r_squared),
                s(m.dropped),
            ]);
            plot.push(vec![
                s(m.direction.label()),
                s(group_label(m.subgroup)),
                name.clone(),
                f(c.beta),
                f(c.ci_low),
                f(c.ci_high),
            ]);
        }
    }
    coef.write(&out.join("coefficients.csv"))?;
    plot.write(&out.join("coefficient_plot.csv"))?;

    let mut levels = Table::new(&[
        "direction", "group", "transition", "comparison", "n", "mean_difference", "t", "p",
        "holm_p",
    ]);
    for tc in report.comparisons.iter().filter(|c| wanted.contains(&c.direction)) {
        let transition = format!("{}->{}", tc.from_stage, tc.from_stage + 1);
        let Some(comparison) = &tc.comparison else {
            skipped.push(vec![
                s("level_similarity"),
                s(tc.direction.label()),
                s(group_label(tc.group)),
                transition,
                tc.skipped.clone().unwrap_or_default(),
            ]);
            continue;
        };
        for row in &comparison.rows {
            levels.push(vec![
                s(tc.direction.label()),
                s(group_label(tc.group)),
                transition.clone(),
                row.comparison.clone(),
                s(row.n),
                f(row.mean_difference),
                f(row.t),
                f(row.p_raw),
                f(row.p_holm),
            ]);
        }
    }
    levels.write(&out.join("level_similarity.csv"))?;
    skipped.write(&out.join("skipped.csv"))?;

    let mut comms = Table::new(&["account_id", "community"]);
    for (a, c) in &report.communities {
        comms.push(vec![a.clone(), s(c)]);
    }
    comms.write(&out.join("communities.csv"))
}
