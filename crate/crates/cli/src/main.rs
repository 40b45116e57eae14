mod analysis;
mod config;
mod manifest;
mod sim;
mod table;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, CommandFactory, Parser, Subcommand};
use recaudit::datamodel::{parse_log_with, Dataset, LogFormat, ParseOptions};
use recaudit::simulator::{SimConfig, UpdateMode, DEFAULT_BETA_GRID, DEFAULT_TAU_GRID};

use config::AnalysisConfig;
use manifest::RunManifest;

/// Audit analytics for recommendation trajectory logs, and a simulated
/// collaborative-filtering recommender.
#[derive(Parser)]
#[command(name = "recaudit", version)]
struct Cli {
    /// Input trajectory log (.jsonl or .csv).
    #[arg(long = "in", global = true, value_name = "PATH")]
    input: Option<PathBuf>,
    /// Output directory; created if missing.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Master seed.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// JSON file with parameters; flags override it.
    #[arg(long, global = true, value_name = "JSON")]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Validate a log and write a normalized copy with per-account counts.
    Ingest(LogArgs),
    /// Entropies, political shares, issue-share tests and similarity series.
    Diversity(DiversityArgs),
    /// Co-exposure networks, communities and permutation tests.
    Network(NetworkArgs),
    /// Lagged reference-structure regressions and level comparisons.
    Feedback(FeedbackArgs),
    /// One run of the agent-based recommender model.
    Simulate(SimulateArgs),
    /// Beta × tau grid of model runs over several seeds.
    Sweep(SweepArgs),
    /// Diversity, network (with threshold sweep) and feedback in one bundle.
    Report(ReportArgs),
}

#[derive(Args, Clone)]
struct LogArgs {
    /// Steps per trajectory.
    #[arg(long)]
    t_max: Option<u32>,
    /// Log format; inferred from the extension when omitted.
    #[arg(long, value_parser = ["jsonl", "csv"])]
    format: Option<String>,
}

#[derive(Args, Clone)]
struct DiversityArgs {
    #[command(flatten)]
    log: LogArgs,
    /// Main window, e.g. last:50, first:50 or range:51-100.
    #[arg(long)]
    window: Option<String>,
    /// Comma-separated robustness windows.
    #[arg(long, value_delimiter = ',')]
    windows: Option<Vec<String>>,
    /// Interest categories for structural entropy (repeatable).
    #[arg(long = "interest")]
    interest: Vec<String>,
    /// Stages for the similarity series.
    #[arg(long)]
    stages: Option<usize>,
}

#[derive(Args, Clone)]
struct NetworkArgs {
    #[command(flatten)]
    log: LogArgs,
    /// Edges need more than this many shared videos.
    #[arg(long)]
    theta: Option<u32>,
    /// Comma-separated thresholds for a sweep table.
    #[arg(long, value_delimiter = ',')]
    thetas: Option<Vec<u32>>,
    /// Modularity resolution.
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    window: Option<String>,
    /// Window compared with --window for community continuity.
    #[arg(long)]
    early_window: Option<String>,
    /// Label reshuffles per test; 0 skips the tests.
    #[arg(long)]
    permutations: Option<usize>,
    /// Keep accounts without in-window political exposure as nodes.
    #[arg(long)]
    retain_all: bool,
}

#[derive(Args, Clone)]
struct FeedbackArgs {
    #[command(flatten)]
    log: LogArgs,
    #[arg(long)]
    stages: Option<usize>,
    /// both, e2c (exposure->click) or c2e (click->exposure).
    #[arg(long)]
    direction: Option<String>,
    /// Threshold of the networks behind community references.
    #[arg(long)]
    theta: Option<u32>,
    #[arg(long)]
    gamma: Option<f64>,
}

#[derive(Args, Clone)]
struct ReportArgs {
    #[command(flatten)]
    log: LogArgs,
    #[arg(long)]
    permutations: Option<usize>,
    #[arg(long = "interest")]
    interest: Vec<String>,
}

#[derive(Args, Clone)]
struct ModelArgs {
    #[arg(long)]
    agents: Option<usize>,
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    tau: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    /// Recommendations sampled per agent and step.
    #[arg(long)]
    recs: Option<usize>,
    /// Update from the sampled recommendations instead of the expectation.
    #[arg(long)]
    sampled_update: bool,
}

#[derive(Args, Clone)]
struct SimulateArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Also write the run as a trajectory log.
    #[arg(long)]
    export: bool,
}

#[derive(Args, Clone)]
struct SweepArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long, value_delimiter = ',')]
    betas: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    taus: Option<Vec<f64>>,
    /// Seeds per cell, counting up from --seed.
    #[arg(long, default_value_t = 20)]
    n_seeds: u64,
}

fn usage_error(message: &str) -> ! {
    Cli::command()
        .error(clap::error::ErrorKind::MissingRequiredArgument, message)
        .exit()
}

fn analysis_config(cli: &Cli, log: &LogArgs) -> Result<AnalysisConfig> {
    let mut cfg: AnalysisConfig = config::load(cli.config.as_deref())?;
    if let Some(t) = log.t_max {
        cfg.t_max = t;
    }
    Ok(cfg)
}

fn load_dataset(path: &Path, log: &LogArgs, t_max: u32) -> Result<Dataset> {
    let format = match log.format.as_deref() {
        Some("csv") => LogFormat::Csv,
        Some(_) => LogFormat::JsonLines,
        None => LogFormat::from_path(path),
    };
    let dataset = parse_log_with(path, format, &ParseOptions { t_max })?;
    if dataset.is_empty() {
        bail!("{} contains no records", path.display());
    }
    Ok(dataset)
}

fn sim_config(cli: &Cli, m: &ModelArgs) -> Result<SimConfig> {
    let mut cfg: SimConfig = config::load(cli.config.as_deref())?;
    cfg.seed = cli.seed;
    if let Some(v) = m.agents {
        cfg.n_agents = v;
    }
    if let Some(v) = m.steps {
        cfg.n_steps = v;
    }
    if let Some(v) = m.beta {
        cfg.beta = v;
    }
    if let Some(v) = m.tau {
        cfg.tau = v;
    }
    if let Some(v) = m.alpha {
        cfg.alpha = v;
    }
    if let Some(v) = m.recs {
        cfg.recs_per_step = v;
    }
    if m.sampled_update {
        cfg.update_mode = UpdateMode::Sampled;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: &Cli) -> Result<()> {
    let Some(out) = cli.out.as_deref() else {
        usage_error("--out <DIR> is required");
    };
    let input = || -> &Path {
        cli.input
            .as_deref()
            .unwrap_or_else(|| usage_error("--in <PATH> is required for this subcommand"))
    };
    fs::create_dir_all(out).with_context(|| format!("cannot create {}", out.display()))?;

    match &cli.command {
        Command::Ingest(log) => {
            let cfg = analysis_config(cli, log)?;
            let dataset = load_dataset(input(), log, cfg.t_max)?;
            analysis::ingest(&dataset, out)?;
            let mut m = RunManifest::new("ingest", &cfg, cli.seed)?;
            m.add_input(input())?;
            m.write(out)?;
        }
        Command::Diversity(a) => {
            let mut cfg = analysis_config(cli, &a.log)?;
            if let Some(w) = &a.window {
                cfg.window = w.clone();
            }
            if let Some(ws) = &a.windows {
                cfg.windows = ws.clone();
            }
            if !a.interest.is_empty() {
                cfg.interest_categories = a.interest.clone();
            }
            if let Some(st) = a.stages {
                cfg.stages = st;
            }
            let dataset = load_dataset(input(), &a.log, cfg.t_max)?;
            analysis::diversity(&dataset, &cfg, out)?;
            let mut m = RunManifest::new("diversity", &cfg, cli.seed)?;
            m.add_input(input())?;
            m.write(out)?;
        }
        Command::Network(a) => {
            let mut cfg = analysis_config(cli, &a.log)?;
            if let Some(v) = a.theta {
                cfg.theta = v;
            }
            if let Some(v) = &a.thetas {
                cfg.thetas = v.clone();
            }
            if let Some(v) = a.gamma {
                cfg.gamma = v;
            }
            if let Some(v) = &a.window {
                cfg.window = v.clone();
            }
            if let Some(v) = &a.early_window {
                cfg.early_window = v.clone();
            }
            if let Some(v) = a.permutations {
                cfg.permutations = v;
            }
            cfg.retain_all |= a.retain_all;
            let dataset = load_dataset(input(), &a.log, cfg.t_max)?;
            analysis::network(&dataset, &cfg, cli.seed, out)?;
            let mut m = RunManifest::new("network", &cfg, cli.seed)?;
            m.add_input(input())?;
            m.write(out)?;
        }
        Command::Feedback(a) => {
            let mut cfg = analysis_config(cli, &a.log)?;
            if let Some(v) = a.stages {
                cfg.stages = v;
            }
            if let Some(v) = &a.direction {
                cfg.direction = v.clone();
            }
            if let Some(v) = a.theta {
                cfg.theta = v;
            }
            if let Some(v) = a.gamma {
                cfg.gamma = v;
            }
            let dataset = load_dataset(input(), &a.log, cfg.t_max)?;
            analysis::feedback(&dataset, &cfg, cli.seed, out)?;
            let mut m = RunManifest::new("feedback", &cfg, cli.seed)?;
            m.add_input(input())?;
            m.write(out)?;
        }
        Command::Report(a) => {
            let mut cfg = analysis_config(cli, &a.log)?;
            if cfg.thetas.is_empty() {
                cfg.thetas = vec![10, 15, 20, 25, 30];
            }
            if let Some(v) = a.permutations {
                cfg.permutations = v;
            }
            if !a.interest.is_empty() {
                cfg.interest_categories = a.interest.clone();
            }
            let dataset =
                load_dataset(input(), &a.log, cfg.t_max).context("report stage parse")?;
            let stage_dir = |name: &str| -> Result<PathBuf> {
                let dir = out.join(name);
                fs::create_dir_all(&dir)?;
                Ok(dir)
            };
            analysis::diversity(&dataset, &cfg, &stage_dir("diversity")?)
                .context("report stage diversity")?;
            analysis::network(&dataset, &cfg, cli.seed, &stage_dir("network")?)
                .context("report stage network")?;
            analysis::feedback(&dataset, &cfg, cli.seed, &stage_dir("feedback")?)
                .context("report stage feedback")?;
            let mut m = RunManifest::new("report", &cfg, cli.seed)?;
            m.add_input(input())?;
            m.write(out)?;
        }
        Command::Simulate(a) => {
            let cfg = sim_config(cli, &a.model)?;
            sim::simulate(&cfg, a.export, out)?;
            RunManifest::new("simulate", &cfg, cli.seed)?.write(out)?;
        }
        Command::Sweep(a) => {
            let cfg = sim_config(cli, &a.model)?;
            let betas = a.betas.clone().unwrap_or_else(|| DEFAULT_BETA_GRID.to_vec());
            let taus = a.taus.clone().unwrap_or_else(|| DEFAULT_TAU_GRID.to_vec());
            if a.n_seeds == 0 {
                return Err(anyhow!("--n-seeds must be at least 1"));
            }
            let seeds: Vec<u64> = (0..a.n_seeds).map(|k| cli.seed.wrapping_add(k)).collect();
            sim::run_sweep(&cfg, &betas, &taus, &seeds, out)?;
            let resolved = serde_json::json!({
                "base": cfg,
                "betas": betas,
                "taus": taus,
                "seeds": seeds,
            });
            RunManifest::new("sweep", &resolved, cli.seed)?.write(out)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
