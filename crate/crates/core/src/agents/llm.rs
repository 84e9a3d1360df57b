//! Model-driven seats speaking the chat-completions wire protocol.
//!
//! [`HttpChatClient`] is a blocking client for any endpoint exposing
//! `POST {base_url}/chat/completions` with bearer authentication. The
//! API key is read from the environment variable named in the binding
//! at construction time and held only in the client; it is never
//! serialized, logged, or traced. Transient failures (HTTP 429, 5xx,
//! transport errors) retry with exponential backoff.
//!
//! [`LlmAgent`] drives one seat: it renders stage prompts, sends them
//! through a shared [`ChatCompleter`], and parses fenced submissions
//! back into game moves. An invalid action earns exactly one correction
//! prompt before the agent gives up and reports the game default.

use std::sync::Arc;
use std::time::Duration;

use serde::Serialize;

use crate::agents::{grammar, prompts};
use crate::config::LlmBinding;
use crate::error::{ArenaError, Result};
use crate::games::{GameAction, PredictionPayload};
use crate::protocol::{AgentHandle, AgentTurn, GameView, StageContext};
use crate::types::ConversationMessage;

/// One chat turn on the wire.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ChatMessage {
    pub role: String,
    pub content: String,
}

impl ChatMessage {
    pub fn system(content: impl Into<String>) -> Self {
        ChatMessage { role: "system".into(), content: content.into() }
    }

    pub fn user(content: impl Into<String>) -> Self {
        ChatMessage { role: "user".into(), content: content.into() }
    }

    pub fn assistant(content: impl Into<String>) -> Self {
        ChatMessage { role: "assistant".into(), content: content.into() }
    }
}

/// Anything that can answer a chat prompt. Shared across seats and
/// worker threads.
pub trait ChatCompleter: Send + Sync {
    fn complete(
        &self,
        messages: &[ChatMessage],
        temperature: f64,
    ) -> std::result::Result<String, String>;
}

/// Blocking chat-completions client with retry.
pub struct HttpChatClient {
    http: reqwest::blocking::Client,
    base_url: String,
    model: String,
    api_key: String,
    max_retries: u32,
    backoff: Duration,
}

impl HttpChatClient {
    /// Builds a client for the binding, using `model` in requests. The
    /// key comes from the environment variable the binding names.
    pub fn new(binding: &LlmBinding, model: &str) -> Result<Self> {
        Self::with_backoff(binding, model, Duration::from_secs(1))
    }

    /// Like [`HttpChatClient::new`] with a custom initial backoff,
    /// so tests can retry instantly.
    pub fn with_backoff(binding: &LlmBinding, model: &str, backoff: Duration) -> Result<Self> {
        let api_key = std::env::var(&binding.api_key_env).map_err(|_| {
            ArenaError::Config(format!(
                "llm.api_key_env: environment variable {} is not set",
                binding.api_key_env
            ))
        })?;
        let http = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs(binding.timeout_s))
            .build()
            .map_err(|e| ArenaError::Llm(e.to_string()))?;
        Ok(HttpChatClient {
            http,
            base_url: binding.base_url.trim_end_matches('/').to_string(),
            model: model.to_string(),
            api_key,
            max_retries: binding.max_retries,
            backoff,
        })
    }

    fn request_once(
        &self,
        messages: &[ChatMessage],
        temperature: f64,
    ) -> std::result::Result<String, (bool, String)> {
        let body = serde_json::json!({
            "model": self.model,
            "messages": messages,
            "temperature": temperature,
        });
        let response = self
            .http
            .post(format!("{}/chat/completions", self.base_url))
            .bearer_auth(&self.api_key)
            .json(&body)
            .send()
            .map_err(|e| (true, format!("transport error: {e}")))?;

        let status = response.status();
        if status.as_u16() == 429 || status.is_server_error() {
            return Err((true, format!("retryable status {status}")));
        }
        if !status.is_success() {
            return Err((false, format!("status {status}")));
        }
        let value: serde_json::Value = response
            .json()
            .map_err(|e| (false, format!("malformed response body: {e}")))?;
        value["choices"][0]["message"]["content"]
            .as_str()
            .map(str::to_string)
            .ok_or_else(|| (false, "response has no choices[0].message.content".into()))
    }
}

impl ChatCompleter for HttpChatClient {
    fn complete(
        &self,
        messages: &[ChatMessage],
        temperature: f64,
    ) -> std::result::Result<String, String> {
        let mut last_error = String::new();
        for attempt in 0..=self.max_retries {
            if attempt > 0 {
                std::thread::sleep(self.backoff * 2u32.pow(attempt - 1));
            }
            match self.request_once(messages, temperature) {
                Ok(text) => return Ok(text),
                Err((retryable, error)) => {
                    last_error = error;
                    if !retryable {
                        break;
                    }
                }
            }
        }
        Err(last_error)
    }
}

/// Sanity checks an action against the agent's own view, catching moves
/// the engine would reject before they are submitted.
fn check_against_view(ctx: &StageContext, action: &GameAction) -> std::result::Result<(), String> {
    match (action, &ctx.view) {
        (GameAction::Attack(spend), GameView::Survivor { own_ammo, alive, .. }) => {
            let mut total = 0u64;
            for (target, ammo) in spend {
                if target == &ctx.agent {
                    return Err("you cannot attack yourself".into());
                }
                if !alive.contains(target) {
                    return Err(format!("{target} is not a living participant"));
                }
                total += u64::from(*ammo);
            }
            if total > u64::from(*own_ammo) {
                return Err(format!(
                    "total spend {total} exceeds your remaining ammo {own_ammo}"
                ));
            }
            Ok(())
        }
        (GameAction::Extract(amount), GameView::Tragedy { .. }) => {
            if amount.is_finite() && *amount >= 0.0 {
                Ok(())
            } else {
                Err(format!("extraction {amount} must be a non-negative number"))
            }
        }
        (GameAction::Propose(spec), GameView::Coalition { prize, .. }) => {
            if spec.split.is_empty() {
                return Err("a proposal needs at least one member".into());
            }
            for (name, share) in &spec.split {
                if !ctx.roster.contains(name) {
                    return Err(format!("{name} is not a participant"));
                }
                if !share.is_finite() || *share < 0.0 {
                    return Err(format!("share {share} for {name} is not valid"));
                }
            }
            let total: f64 = spec.split.values().sum();
            if (total - prize).abs() > 1e-6 {
                return Err(format!("shares sum to {total}, not the prize {prize}"));
            }
            Ok(())
        }
        (GameAction::Accept(id), GameView::Coalition { standing, .. }) => {
            if standing.iter().any(|p| p.id == *id) {
                Ok(())
            } else {
                Err(format!("there is no standing proposal with id {id}"))
            }
        }
        (GameAction::Pass, GameView::Coalition { .. }) => Ok(()),
        (GameAction::Choose(option), GameView::Scheduler { n_options, .. }) => {
            if option < n_options {
                Ok(())
            } else {
                Err(format!("option {option} is out of range 0..{n_options}"))
            }
        }
        (GameAction::Bid(bid), GameView::Hupi { max_bid, .. }) => {
            if (1..=*max_bid).contains(bid) {
                Ok(())
            } else {
                Err(format!("bid {bid} is out of range 1..={max_bid}"))
            }
        }
        _ => Err("that command does not belong to this game".into()),
    }
}

/// One model-driven seat.
pub struct LlmAgent {
    completer: Arc<dyn ChatCompleter>,
    temperature: f64,
}

impl LlmAgent {
    pub fn new(completer: Arc<dyn ChatCompleter>, temperature: f64) -> Self {
        LlmAgent { completer, temperature }
    }
}

impl AgentHandle for LlmAgent {
    fn converse(
        &mut self,
        ctx: &StageContext,
        partner: &str,
        transcript: &[ConversationMessage],
    ) -> std::result::Result<String, String> {
        let messages = vec![
            ChatMessage::system(prompts::system_prompt(ctx)),
            ChatMessage::user(prompts::converse_prompt(ctx, partner, transcript)),
        ];
        self.completer.complete(&messages, self.temperature)
    }

    fn predict(
        &mut self,
        ctx: &StageContext,
        target: &str,
    ) -> std::result::Result<PredictionPayload, String> {
        let messages = vec![
            ChatMessage::system(prompts::system_prompt(ctx)),
            ChatMessage::user(prompts::predict_prompt(ctx, target)),
        ];
        let reply = self.completer.complete(&messages, self.temperature)?;
        grammar::parse_prediction_block(ctx.game, &reply)
    }

    fn act(&mut self, ctx: &StageContext) -> std::result::Result<AgentTurn, String> {
        let mut messages = vec![
            ChatMessage::system(prompts::system_prompt(ctx)),
            ChatMessage::user(prompts::act_prompt(ctx)),
        ];
        let first_reply = self.completer.complete(&messages, self.temperature)?;

        let first_error = match grammar::parse_action_block(ctx.game, &first_reply)
            .and_then(|action| check_against_view(ctx, &action).map(|()| action))
        {
            Ok(action) => {
                return Ok(AgentTurn { reasoning: first_reply, action, defaulted: false })
            }
            Err(error) => error,
        };

        messages.push(ChatMessage::assistant(first_reply.clone()));
        messages.push(ChatMessage::user(prompts::invalid_action_reprompt(ctx, &first_error)));
        let outcome = self
            .completer
            .complete(&messages, self.temperature)
            .and_then(|second_reply| {
                grammar::parse_action_block(ctx.game, &second_reply)
                    .and_then(|action| check_against_view(ctx, &action).map(|()| action))
                    .map(|action| (second_reply, action))
            });

        match outcome {
            Ok((second_reply, action)) => Ok(AgentTurn {
                reasoning: format!("{first_reply}\n\n{second_reply}"),
                action,
                defaulted: false,
            }),
            Err(_) => Ok(AgentTurn {
                reasoning: first_reply,
                action: crate::agents::scripted::ctx_default_action(ctx),
                defaulted: true,
            }),
        }
    }
}
