//! Audit analytics for recommendation trajectory logs: diversity and
//! similarity metrics, co-exposure networks with community detection,
//! lagged feedback regressions, and an agent-based recommender model that
//! produces synthetic logs in the same schema.

pub mod conet;
pub mod datamodel;
pub mod diversity;
mod error;
pub mod feedback;
pub mod seed;
pub mod simulator;
pub mod stats;

pub use error::{Error, Result};
