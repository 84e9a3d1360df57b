//! Agent implementations and the per-match seat factory.

pub mod grammar;
pub mod llm;
pub mod prompts;
pub mod scripted;

use std::collections::BTreeMap;
use std::sync::Arc;

pub use llm::{ChatCompleter, ChatMessage, HttpChatClient, LlmAgent};
pub use scripted::{scripted_agent, ScriptedAgent};

use crate::config::{AgentKind, ArenaConfig};
use crate::error::{ArenaError, Result};
use crate::protocol::AgentHandle;
use crate::types::MatchSpec;

/// Builds one shared chat client per model-driven agent in the config.
/// Done once per campaign so API keys are read and HTTP clients built
/// a single time.
pub fn build_completers(
    config: &ArenaConfig,
) -> Result<BTreeMap<String, Arc<dyn ChatCompleter>>> {
    let mut completers: BTreeMap<String, Arc<dyn ChatCompleter>> = BTreeMap::new();
    if let Some(binding) = &config.llm {
        for agent in config.agents.iter().filter(|a| a.kind == AgentKind::Llm) {
            let model = agent.model.as_deref().unwrap_or(&binding.model);
            let client = HttpChatClient::new(binding, model)?;
            completers.insert(agent.name.clone(), Arc::new(client));
        }
    }
    Ok(completers)
}

/// Builds fresh handles for every seat of a match, keyed by display
/// name as [`crate::protocol::run_match`] expects. Scripted seats get
/// their own RNG stream; model seats share the campaign completers.
pub fn build_agents(
    config: &ArenaConfig,
    spec: &MatchSpec,
    completers: &BTreeMap<String, Arc<dyn ChatCompleter>>,
) -> Result<BTreeMap<String, Box<dyn AgentHandle>>> {
    let mut handles: BTreeMap<String, Box<dyn AgentHandle>> = BTreeMap::new();
    for (seat, id) in spec.roster.iter().enumerate() {
        let agent_config = config.agent(&id.model_key).ok_or_else(|| {
            ArenaError::Config(format!("agent {:?} is not registered", id.model_key))
        })?;
        let handle: Box<dyn AgentHandle> = match agent_config.kind {
            AgentKind::Scripted => {
                let bot = agent_config.bot_spec().ok_or_else(|| {
                    ArenaError::Config(format!(
                        "agent {:?} has no bot configured",
                        agent_config.name
                    ))
                })?;
                Box::new(scripted_agent(bot, spec.seed, seat))
            }
            AgentKind::Llm => {
                let completer = completers
                    .get(&agent_config.name)
                    .ok_or_else(|| {
                        ArenaError::Config(format!(
                            "no chat client built for agent {:?}",
                            agent_config.name
                        ))
                    })?
                    .clone();
                let temperature = agent_config
                    .temperature
                    .or_else(|| config.llm.as_ref().map(|l| l.temperature))
                    .unwrap_or(0.7);
                Box::new(LlmAgent::new(completer, temperature))
            }
        };
        handles.insert(id.name.clone(), handle);
    }
    Ok(handles)
}
