use std::fmt;
use std::ops::RangeInclusive;
use std::str::FromStr;

use crate::datamodel::ExposureRecord;
use crate::error::{Error, Result};

/// A contiguous step range, resolved against the trajectory length.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AnalysisWindow {
    /// Final `k` steps.
    LastK(u32),
    /// First `k` steps.
    FirstK(u32),
    /// Inclusive step bounds.
    StepRange(u32, u32),
}

impl AnalysisWindow {
    pub fn resolve(&self, t_max: u32) -> Result<RangeInclusive<u32>> {
        if t_max == 0 {
            return Err(Error::Window("t_max must be at least 1".into()));
        }
        let (lo, hi) = match *self {
            AnalysisWindow::LastK(k) | AnalysisWindow::FirstK(k) if k == 0 || k > t_max => {
                return Err(Error::Window(format!("k = {k} outside 1..={t_max}")));
            }
            AnalysisWindow::LastK(k) => (t_max - k + 1, t_max),
            AnalysisWindow::FirstK(k) => (1, k),
            AnalysisWindow::StepRange(lo, hi) => {
                if lo == 0 || lo > hi || hi > t_max {
                    return Err(Error::Window(format!(
                        "range {lo}-{hi} is not a non-empty subrange of 1..={t_max}"
                    )));
                }
                (lo, hi)
            }
        };
        Ok(lo..=hi)
    }
}

impl fmt::Display for AnalysisWindow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AnalysisWindow::LastK(k) => write!(f, "last:{k}"),
            AnalysisWindow::FirstK(k) => write!(f, "first:{k}"),
            AnalysisWindow::StepRange(lo, hi) => write!(f, "range:{lo}-{hi}"),
        }
    }
}

/// Accepts `last:K`, `first:K` and `range:LO-HI`.
impl FromStr for AnalysisWindow {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Window(format!("cannot parse window {s:?}"));
        let (kind, arg) = s.trim().split_once(':').ok_or_else(bad)?;
        let num = |t: &str| t.trim().parse::<u32>().map_err(|_| bad());
        match kind.trim() {
            "last" => Ok(AnalysisWindow::LastK(num(arg)?)),
            "first" => Ok(AnalysisWindow::FirstK(num(arg)?)),
            "range" => {
                let (lo, hi) = arg.split_once('-').ok_or_else(bad)?;
                Ok(AnalysisWindow::StepRange(num(lo)?, num(hi)?))
            }
            _ => Err(bad()),
        }
    }
}

/// Records whose step lies in the resolved window, in input order.
pub fn slice_window(
    records: &[ExposureRecord],
    window: AnalysisWindow,
    t_max: u32,
) -> Result<Vec<ExposureRecord>> {
    let range = window.resolve(t_max)?;
    Ok(records
        .iter()
        .filter(|r| range.contains(&r.step))
        .cloned()
        .collect())
}
