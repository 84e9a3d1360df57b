//! Campaign configuration: the JSON schema, defaults, and validation.
//!
//! Unknown keys are rejected so typos fail loudly instead of silently
//! running a different campaign. Validation errors name the offending
//! key and value.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{ArenaError, Result};
use crate::types::{Framing, GameKind};

/// The scripted roster members available to campaigns.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BotKind {
    Silent,
    Random,
    Greedy,
    Cooperator,
    Mirror,
    KLevel,
    NoisyOracle,
}

/// A scripted bot with its resolved parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BotSpec {
    pub kind: BotKind,
    /// Reasoning depth for `KLevel`.
    pub k: u32,
    /// Probability of the skilled move for `NoisyOracle`, in [0, 1].
    pub skill: f64,
}

/// How to reach a chat-completions endpoint.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LlmBinding {
    pub base_url: String,
    pub model: String,
    /// Name of the environment variable holding the API key. The key
    /// itself never appears in configs or traces.
    pub api_key_env: String,
    #[serde(default = "default_temperature")]
    pub temperature: f64,
    #[serde(default = "default_timeout_s")]
    pub timeout_s: u64,
    #[serde(default = "default_max_retries")]
    pub max_retries: u32,
}

fn default_temperature() -> f64 {
    0.7
}

fn default_timeout_s() -> u64 {
    60
}

fn default_max_retries() -> u32 {
    3
}

/// One registered agent: a stable name plus how to run it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AgentConfig {
    pub name: String,
    pub kind: AgentKind,
    /// Scripted only: which bot to run.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bot: Option<BotKind>,
    /// KLevel only: reasoning depth. Defaults to 1.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<u32>,
    /// NoisyOracle only: probability of the skilled move.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub skill: Option<f64>,
    /// Llm only: model override for this agent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<String>,
    /// Llm only: sampling temperature override for this agent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub temperature: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AgentKind {
    Scripted,
    Llm,
}

impl AgentConfig {
    /// The validated bot parameters of a scripted agent.
    pub fn bot_spec(&self) -> Option<BotSpec> {
        match (self.kind, self.bot) {
            (AgentKind::Scripted, Some(kind)) => Some(BotSpec {
                kind,
                k: self.k.unwrap_or(1),
                skill: self.skill.unwrap_or(1.0),
            }),
            _ => None,
        }
    }
}

/// A fully validated campaign configuration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArenaConfig {
    pub agents: Vec<AgentConfig>,
    #[serde(default = "default_games")]
    pub games: Vec<GameKind>,
    #[serde(default = "default_sizes")]
    pub sizes: Vec<usize>,
    #[serde(default = "default_framings")]
    pub framings: Vec<Framing>,
    #[serde(default = "default_communication")]
    pub communication: bool,
    #[serde(default = "default_max_rounds")]
    pub max_rounds: u32,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_coverage")]
    pub coverage_fraction: f64,
    /// How many seeded repetitions of each enumerated match to run.
    #[serde(default = "default_repeats")]
    pub repeats: u32,
    /// Worker threads for campaign execution.
    #[serde(default = "default_parallelism")]
    pub parallelism: usize,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub llm: Option<LlmBinding>,
}

fn default_games() -> Vec<GameKind> {
    GameKind::ALL.to_vec()
}

fn default_sizes() -> Vec<usize> {
    vec![2, 3, 4, 5]
}

fn default_framings() -> Vec<Framing> {
    Framing::ALL.to_vec()
}

fn default_communication() -> bool {
    true
}

fn default_max_rounds() -> u32 {
    10
}

fn default_coverage() -> f64 {
    1.0
}

fn default_repeats() -> u32 {
    1
}

fn default_parallelism() -> usize {
    4
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("arena-out")
}

impl ArenaConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(ArenaError::Config(msg));

        if self.agents.is_empty() {
            return fail("agents: at least one agent is required".into());
        }
        let mut seen = BTreeSet::new();
        for agent in &self.agents {
            if agent.name.trim().is_empty() {
                return fail("agents[].name: names cannot be empty".into());
            }
            if !seen.insert(agent.name.as_str()) {
                return fail(format!("agents[].name: duplicate name {:?}", agent.name));
            }
            match agent.kind {
                AgentKind::Scripted => {
                    let Some(bot) = agent.bot else {
                        return fail(format!(
                            "agents[{:?}].bot: required for scripted agents",
                            agent.name
                        ));
                    };
                    if agent.model.is_some() || agent.temperature.is_some() {
                        return fail(format!(
                            "agents[{:?}]: model/temperature only apply to llm agents",
                            agent.name
                        ));
                    }
                    if bot == BotKind::NoisyOracle {
                        let Some(skill) = agent.skill else {
                            return fail(format!(
                                "agents[{:?}].skill: required for noisy_oracle bots",
                                agent.name
                            ));
                        };
                        if !(0.0..=1.0).contains(&skill) {
                            return fail(format!(
                                "agents[{:?}].skill: {skill} out of range [0, 1]",
                                agent.name
                            ));
                        }
                    } else if agent.skill.is_some() {
                        return fail(format!(
                            "agents[{:?}].skill: only applies to noisy_oracle bots",
                            agent.name
                        ));
                    }
                    if bot != BotKind::KLevel && agent.k.is_some() {
                        return fail(format!(
                            "agents[{:?}].k: only applies to k_level bots",
                            agent.name
                        ));
                    }
                }
                AgentKind::Llm => {
                    if agent.bot.is_some() || agent.k.is_some() || agent.skill.is_some() {
                        return fail(format!(
                            "agents[{:?}]: bot/k/skill only apply to scripted agents",
                            agent.name
                        ));
                    }
                    if self.llm.is_none() {
                        return fail(format!(
                            "llm: section required because agent {:?} has kind llm",
                            agent.name
                        ));
                    }
                }
            }
        }

        if self.games.is_empty() {
            return fail("games: at least one game is required".into());
        }
        let unique: BTreeSet<_> = self.games.iter().collect();
        if unique.len() != self.games.len() {
            return fail("games: duplicate entries".into());
        }

        if self.sizes.is_empty() {
            return fail("sizes: at least one size is required".into());
        }
        for size in &self.sizes {
            if !(2..=5).contains(size) {
                return fail(format!("sizes: {size} out of range [2, 5]"));
            }
        }
        let unique: BTreeSet<_> = self.sizes.iter().collect();
        if unique.len() != self.sizes.len() {
            return fail("sizes: duplicate entries".into());
        }

        if self.framings.is_empty() {
            return fail("framings: at least one framing is required".into());
        }
        let unique: BTreeSet<_> = self.framings.iter().collect();
        if unique.len() != self.framings.len() {
            return fail("framings: duplicate entries".into());
        }

        if self.max_rounds == 0 {
            return fail("max_rounds: must be at least 1".into());
        }
        if !(self.coverage_fraction > 0.0 && self.coverage_fraction <= 1.0) {
            return fail(format!(
                "coverage_fraction: {} out of range (0, 1]",
                self.coverage_fraction
            ));
        }
        if self.repeats == 0 {
            return fail("repeats: must be at least 1".into());
        }
        if self.parallelism == 0 {
            return fail("parallelism: must be at least 1".into());
        }
        if let Some(llm) = &self.llm {
            if llm.base_url.trim().is_empty() {
                return fail("llm.base_url: cannot be empty".into());
            }
            if llm.api_key_env.trim().is_empty() {
                return fail("llm.api_key_env: cannot be empty".into());
            }
            if llm.temperature < 0.0 {
                return fail(format!("llm.temperature: {} cannot be negative", llm.temperature));
            }
        }
        Ok(())
    }

    pub fn agent(&self, name: &str) -> Option<&AgentConfig> {
        self.agents.iter().find(|a| a.name == name)
    }
}

/// Loads and validates a configuration file.
pub fn load_config(path: &Path) -> Result<ArenaConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        ArenaError::Config(format!("cannot read {}: {e}", path.display()))
    })?;
    let config: ArenaConfig = serde_json::from_str(&text)
        .map_err(|e| ArenaError::Config(format!("{}: {e}", path.display())))?;
    config.validate()?;
    Ok(config)
}
