//! Shared error type for the arena.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum ArenaError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("validation error: {0}")]
    Validation(String),

    #[error("trace error: {0}")]
    Trace(String),

    #[error("schema version {found} not supported (reader supports <= {supported})")]
    SchemaVersion { found: u32, supported: u32 },

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("comparison graph is disconnected: components {0:?}")]
    DisconnectedGraph(Vec<Vec<String>>),

    #[error("correlation undefined: {0}")]
    UndefinedCorrelation(String),

    #[error("ROC-AUC undefined: both classes must be present")]
    SingleClass,

    #[error("llm request failed: {0}")]
    Llm(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, ArenaError>;
