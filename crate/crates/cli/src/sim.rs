use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

use anyhow::Result;
use recaudit::datamodel::{write_jsonl, Group, Issue};
use recaudit::simulator::{export_synthetic_log, run_simulation, run_summary, sweep, SimConfig};

use crate::table::{f, s, write_json, Table};

pub const EXPORT_FILE: &str = "synthetic.jsonl";

pub fn simulate(cfg: &SimConfig, export: bool, out: &Path) -> Result<()> {
    let traj = if export {
        run_simulation(cfg)?
    } else {
        run_summary(cfg)?
    };
    let mut t = Table::new(&[
        "step", "between_cosine", "divergence", "baseline_divergence", "within_male",
        "within_female",
    ]);
    for p in &traj.series {
        t.push(vec![
            s(p.step),
            f(p.between_cosine),
            f(p.divergence),
            f(p.baseline_divergence),
            f(p.within_male),
            f(p.within_female),
        ]);
    }
    t.write(&out.join("trajectory.csv"))?;

    let last = traj.snapshots.last().expect("final state is always kept");
    let male = last.group_center(Group::MaleCoded);
    let female = last.group_center(Group::FemaleCoded);
    let mut c = Table::new(&["issue", "male_center", "female_center", "male_minus_female"]);
    for k in 0..cfg.n_issues {
        let label = Issue::from_index(k).map_or_else(|| format!("issue{k}"), |i| i.as_str().to_string());
        c.push(vec![label, f(male[k]), f(female[k]), f(male[k] - female[k])]);
    }
    c.write(&out.join("center_difference.csv"))?;
    write_json(&out.join("invariants.json"), &traj.invariants)?;

    if export {
        let labels: Vec<Issue> = (0..cfg.n_issues).filter_map(Issue::from_index).collect();
        let dataset = export_synthetic_log(&traj, &labels)?;
        let mut w = BufWriter::new(File::create(out.join(EXPORT_FILE))?);
        write_jsonl(&dataset, &mut w)?;
    }
    Ok(())
}

pub fn run_sweep(base: &SimConfig, betas: &[f64], taus: &[f64], seeds: &[u64], out: &Path) -> Result<()> {
    let result = sweep(betas, taus, seeds, base)?;
    let mut rows = Table::new(&[
        "beta", "tau", "seed", "final_divergence", "final_between_cosine",
        "final_baseline_divergence",
    ]);
    for r in &result.rows {
        rows.push(vec![
            f(r.beta),
            f(r.tau),
            s(r.seed),
            f(r.final_divergence),
            f(r.final_between_cosine),
            f(r.final_baseline_divergence),
        ]);
    }
    rows.write(&out.join("sweep.csv"))?;
    let mut cells = Table::new(&[
        "beta", "tau", "n_seeds", "mean_divergence", "mean_between_cosine", "ci_low", "ci_high",
    ]);
    for c in &result.cells {
        cells.push(vec![
            f(c.beta),
            f(c.tau),
            s(c.n_seeds),
            f(c.mean_divergence),
            f(c.mean_between_cosine),
            f(c.ci_low),
            f(c.ci_high),
        ]);
    }
    cells.write(&out.join("surface.csv"))?;
    write_json(&out.join("invariants.json"), &result.invariants)
}
