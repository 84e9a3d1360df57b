//! Core engine for a multi-agent behavioral arena.
//!
//! The crate runs mixed cooperative and competitive social games between
//! scripted and model-driven agents under a three-stage round protocol
//! (communicate, predict, act), records complete gameplay traces, and
//! analyzes them: pairwise-comparison skill ratings with bootstrap
//! uncertainty, socio-cognitive behavioral metrics, and outcome
//! prediction from those metrics.

pub mod agents;
pub mod config;
pub mod error;
pub mod games;
pub mod metrics;
pub mod predictor;
pub mod protocol;
pub mod ratings;
pub mod report;
pub mod runner;
pub mod seeds;
pub mod trace;
pub mod types;

pub use config::{load_config, ArenaConfig};
pub use error::{ArenaError, Result};
pub use types::{AgentId, GameKind, MatchRecord, MatchSpec};
