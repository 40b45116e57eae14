use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use recaudit::datamodel::AnalysisWindow;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

/// Parameters of the log analyses. Every field can come from `--config`
/// and be overridden by a flag.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalysisConfig {
    pub t_max: u32,
    /// Main analysis window.
    pub window: String,
    /// Windows for the diversity robustness tables.
    pub windows: Vec<String>,
    /// Window compared with `window` for community continuity.
    pub early_window: String,
    pub theta: u32,
    /// Thresholds for the network sweep table; empty skips it.
    pub thetas: Vec<u32>,
    pub gamma: f64,
    pub permutations: usize,
    pub stages: usize,
    /// `both`, `e2c` or `c2e`.
    pub direction: String,
    /// Categories counted as an account's interest content.
    pub interest_categories: Vec<String>,
    /// Keep accounts without in-window political exposure as isolated nodes.
    pub retain_all: bool,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        AnalysisConfig {
            t_max: 150,
            window: "last:50".into(),
            windows: [30, 40, 50, 60, 70].map(|k| format!("last:{k}")).to_vec(),
            early_window: "first:50".into(),
            theta: 20,
            thetas: Vec::new(),
            gamma: 1.0,
            permutations: 1000,
            stages: 3,
            direction: "both".into(),
            interest_categories: Vec::new(),
            retain_all: false,
        }
    }
}

impl AnalysisConfig {
    pub fn main_window(&self) -> Result<AnalysisWindow> {
        parse_window(&self.window)
    }

    pub fn early(&self) -> Result<AnalysisWindow> {
        parse_window(&self.early_window)
    }

    pub fn diversity_windows(&self) -> Result<Vec<AnalysisWindow>> {
        self.windows.iter().map(|w| parse_window(w)).collect()
    }
}

pub fn parse_window(text: &str) -> Result<AnalysisWindow> {
    text.parse::<AnalysisWindow>()
        .map_err(anyhow::Error::from)
        .with_context(|| format!("invalid window {text:?}"))
}

pub fn load<T: DeserializeOwned + Default>(path: Option<&Path>) -> Result<T> {
    let Some(path) = path else {
        return Ok(T::default());
    };
    let text = fs::read_to_string(path)
        .with_context(|| format!("cannot read config {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("invalid config {}", path.display()))
}
