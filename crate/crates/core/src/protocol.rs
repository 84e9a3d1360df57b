//! The round protocol: communicate, predict, act.
//!
//! Every round runs three stages in order. First each unordered pair of
//! living agents holds a private two-message-each conversation; then every
//! agent predicts every other agent's upcoming action; then all agents
//! submit reasoning and an action simultaneously and the rule engine
//! resolves them. Each agent sees the world only through a
//! [`StageContext`] built for it: public state, public round history, and
//! its own conversations, predictions, and past reasoning. Nothing
//! belonging to another agent's private view ever enters a context, which
//! is what makes the recorded prediction accuracies meaningful.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{ArenaError, Result};
use crate::games::{
    self, FormedCoalition, GameAction, GameState, PredictionPayload, Proposal, RoundOutcome,
    StateDetail,
};
use crate::trace::{self, TraceLine, TraceSink};
use crate::types::{
    ConversationMessage, ConversationRecord, Framing, GameKind, MatchRecord, MatchSpec,
    MatchStatus, PredictionRecord, RoundRecord, TurnRecord, SCHEMA_VERSION,
};

/// Messages each participant gets per conversation.
pub const MESSAGES_PER_AGENT: usize = 2;

/// Hard cap on message length, in characters.
pub const MESSAGE_CHAR_CAP: usize = 500;

const PROTOCOL_STREAM_SALT: u64 = 0x9e37_79b9_7f4a_7c15;

/// Which stage a context was built for.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StageKind {
    Communicate,
    Predict,
    Act,
}

/// Public summary of a closed round.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PublicRound {
    pub round: u32,
    pub outcome: RoundOutcome,
}

/// What one agent may know about the game state: everything public plus
/// its own private resources, never another agent's.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "game", rename_all = "snake_case")]
pub enum GameView {
    Survivor {
        own_lives: i32,
        own_ammo: u32,
        alive: Vec<String>,
        eliminated: Vec<(String, u32)>,
    },
    Tragedy {
        stock: f64,
        hauls: BTreeMap<String, f64>,
    },
    Coalition {
        prize: f64,
        standing: Vec<Proposal>,
        formed: Option<FormedCoalition>,
    },
    Scheduler {
        n_options: usize,
        /// This seat's private valuation of each option.
        own_preferences: Vec<u32>,
    },
    Hupi {
        max_bid: u32,
        wins: BTreeMap<String, u32>,
    },
}

/// Builds the game view visible to `agent`.
pub fn build_view(state: &GameState, agent: &str) -> GameView {
    match &state.detail {
        StateDetail::Survivor(s) => {
            let me = &s.players[agent];
            GameView::Survivor {
                own_lives: me.lives,
                own_ammo: me.ammo,
                alive: state.living(),
                eliminated: s.eliminated.clone(),
            }
        }
        StateDetail::Tragedy(s) => GameView::Tragedy {
            stock: s.stock,
            hauls: s.hauls.clone(),
        },
        StateDetail::Coalition(s) => GameView::Coalition {
            prize: s.prize,
            standing: s.standing.clone(),
            formed: s.formed.clone(),
        },
        StateDetail::Scheduler(_) => {
            let n = state.roster.len();
            let seat = state.seat_of(agent).unwrap_or(0);
            GameView::Scheduler {
                n_options: n,
                own_preferences: (0..n).map(|j| games::preference(n, seat, j)).collect(),
            }
        }
        StateDetail::Hupi(s) => GameView::Hupi {
            max_bid: s.max_bid,
            wins: s.wins.clone(),
        },
    }
}

/// One agent's complete view when asked to speak, predict, or act.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageContext {
    pub match_id: String,
    pub game: GameKind,
    pub framing: Framing,
    pub stage: StageKind,
    pub round: u32,
    pub max_rounds: u32,
    pub communication: bool,
    /// Whose view this is.
    pub agent: String,
    pub seat: usize,
    pub roster: Vec<String>,
    pub living: Vec<String>,
    pub view: GameView,
    /// Public outcomes of all closed rounds.
    pub history: Vec<PublicRound>,
    /// This agent's own conversations: all closed rounds, plus the
    /// current round's so far once the communicate stage has run.
    pub conversations: Vec<ConversationRecord>,
    /// This agent's own outgoing predictions.
    pub predictions: Vec<PredictionRecord>,
    /// This agent's own past reasoning, one entry per closed round.
    pub reasoning: Vec<(u32, String)>,
}

/// What an agent returns from its act stage.
#[derive(Clone, Debug, PartialEq)]
pub struct AgentTurn {
    pub reasoning: String,
    pub action: GameAction,
    /// True when the agent itself fell back to the game default after
    /// failing to produce a usable action.
    pub defaulted: bool,
}

/// A seat's driver. Implementations must not retain state across matches;
/// the runner constructs fresh handles per match.
pub trait AgentHandle: Send {
    /// Produce the next message to `partner`. `transcript` holds the
    /// conversation so far.
    fn converse(
        &mut self,
        ctx: &StageContext,
        partner: &str,
        transcript: &[ConversationMessage],
    ) -> std::result::Result<String, String>;

    /// Predict what `target` will do this round.
    fn predict(
        &mut self,
        ctx: &StageContext,
        target: &str,
    ) -> std::result::Result<PredictionPayload, String>;

    /// Produce reasoning and an action for this round.
    fn act(&mut self, ctx: &StageContext) -> std::result::Result<AgentTurn, String>;
}

/// Accumulates the per-agent private record as a match progresses and
/// builds stage contexts from it.
pub struct MatchJournal {
    conversations: Vec<ConversationRecord>,
    predictions: Vec<PredictionRecord>,
    reasoning: BTreeMap<String, Vec<(u32, String)>>,
    history: Vec<PublicRound>,
}

impl Default for MatchJournal {
    fn default() -> Self {
        MatchJournal::new()
    }
}

impl MatchJournal {
    pub fn new() -> Self {
        MatchJournal {
            conversations: Vec::new(),
            predictions: Vec::new(),
            reasoning: BTreeMap::new(),
            history: Vec::new(),
        }
    }

    /// The view `agent` gets at `stage`, filtered down to public
    /// information plus that agent's own record.
    pub fn context(
        &self,
        spec: &MatchSpec,
        match_id: &str,
        state: &GameState,
        stage: StageKind,
        agent: &str,
    ) -> StageContext {
        StageContext {
            match_id: match_id.to_string(),
            game: spec.game,
            framing: spec.framing,
            stage,
            round: state.round,
            max_rounds: spec.max_rounds,
            communication: spec.communication,
            agent: agent.to_string(),
            seat: spec.seat_of(agent).unwrap_or(0),
            roster: state.roster.clone(),
            living: state.living(),
            view: build_view(state, agent),
            history: self.history.clone(),
            conversations: self
                .conversations
                .iter()
                .filter(|c| c.involves(agent))
                .cloned()
                .collect(),
            predictions: self
                .predictions
                .iter()
                .filter(|p| p.predictor == agent)
                .cloned()
                .collect(),
            reasoning: self.reasoning.get(agent).cloned().unwrap_or_default(),
        }
    }
}

fn write_line(sink: &mut Option<&mut TraceSink>, line: &TraceLine) -> Result<()> {
    if let Some(sink) = sink {
        sink.write(line)?;
    }
    Ok(())
}

/// Truncates to the message cap on a character boundary.
fn cap_message(text: String) -> (String, bool) {
    if text.chars().count() <= MESSAGE_CHAR_CAP {
        (text, false)
    } else {
        (text.chars().take(MESSAGE_CHAR_CAP).collect(), true)
    }
}

/// Runs one private conversation between `first` and `second`, already
/// ordered so that `first` opens. Both get [`MESSAGES_PER_AGENT`] turns,
/// alternating. Generation failures record an empty flagged message.
pub fn run_conversation(
    journal: &MatchJournal,
    spec: &MatchSpec,
    match_id: &str,
    state: &GameState,
    agents: &mut BTreeMap<String, Box<dyn AgentHandle>>,
    first: &str,
    second: &str,
) -> ConversationRecord {
    let mut record = ConversationRecord {
        round: state.round,
        participants: [first.to_string(), second.to_string()],
        messages: Vec::new(),
    };
    for turn in 0..(2 * MESSAGES_PER_AGENT) {
        let (speaker, partner) = if turn % 2 == 0 {
            (first, second)
        } else {
            (second, first)
        };
        let ctx = journal.context(spec, match_id, state, StageKind::Communicate, speaker);
        let handle = agents.get_mut(speaker).expect("roster agents exist");
        match handle.converse(&ctx, partner, &record.messages) {
            Ok(text) => {
                let (text, truncated) = cap_message(text);
                record.messages.push(ConversationMessage {
                    speaker: speaker.to_string(),
                    text,
                    truncated,
                    failed: false,
                });
            }
            Err(_) => record.messages.push(ConversationMessage {
                speaker: speaker.to_string(),
                text: String::new(),
                truncated: false,
                failed: true,
            }),
        }
    }
    record
}

/// Collects every living agent's prediction about every other living
/// agent. Failures and malformed payloads become flagged neutral
/// defaults.
pub fn collect_predictions(
    journal: &MatchJournal,
    spec: &MatchSpec,
    match_id: &str,
    state: &GameState,
    agents: &mut BTreeMap<String, Box<dyn AgentHandle>>,
) -> Vec<PredictionRecord> {
    let living = state.living();
    let mut records = Vec::new();
    for predictor in &living {
        let ctx = journal.context(spec, match_id, state, StageKind::Predict, predictor);
        for target in &living {
            if target == predictor {
                continue;
            }
            let handle = agents.get_mut(predictor).expect("roster agents exist");
            let (payload, defaulted) = match handle.predict(&ctx, target) {
                Ok(payload) if games::validate_prediction(state, &payload).is_ok() => {
                    (payload, false)
                }
                _ => (games::neutral_prediction(state, target), true),
            };
            records.push(PredictionRecord {
                round: state.round,
                predictor: predictor.clone(),
                target: target.clone(),
                payload,
                defaulted,
            });
        }
    }
    records
}

/// Runs a full match under the communicate/predict/act protocol,
/// streaming trace lines to `sink` as stages complete.
pub fn run_match(
    spec: &MatchSpec,
    agents: &mut BTreeMap<String, Box<dyn AgentHandle>>,
    mut sink: Option<&mut TraceSink>,
) -> Result<MatchRecord> {
    if !(2..=5).contains(&spec.roster.len()) {
        return Err(ArenaError::Contract(format!(
            "match size {} out of range [2, 5]",
            spec.roster.len()
        )));
    }
    let names = spec.display_names();
    let mut unique = names.clone();
    unique.sort();
    unique.dedup();
    if unique.len() != names.len() {
        return Err(ArenaError::Contract("duplicate display names in roster".into()));
    }
    if names.iter().any(|n| !agents.contains_key(n)) || agents.len() != names.len() {
        return Err(ArenaError::Contract(
            "agent handles must match the roster display names exactly".into(),
        ));
    }

    let match_id = spec.match_id();
    let started = trace::wall_ms();
    write_line(
        &mut sink,
        &TraceLine::MatchHeader {
            schema_version: SCHEMA_VERSION,
            match_id: match_id.clone(),
            spec: spec.clone(),
            wall_ms: started,
        },
    )?;

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed ^ PROTOCOL_STREAM_SALT);
    let mut state = games::new_state(spec.game, names);
    let mut journal = MatchJournal::new();
    let mut rounds: Vec<RoundRecord> = Vec::new();

    while !games::is_terminal(&state, spec.max_rounds) {
        let round = state.round;
        let living = state.living();

        let mut conversations = Vec::new();
        if spec.communication {
            for i in 0..living.len() {
                for j in (i + 1)..living.len() {
                    let (a, b) = (living[i].as_str(), living[j].as_str());
                    let (first, second) = if rng.gen::<bool>() { (a, b) } else { (b, a) };
                    let record = run_conversation(
                        &journal, spec, &match_id, &state, agents, first, second,
                    );
                    for msg in &record.messages {
                        write_line(
                            &mut sink,
                            &TraceLine::ConversationTurn {
                                round,
                                participants: record.participants.clone(),
                                speaker: msg.speaker.clone(),
                                text: msg.text.clone(),
                                truncated: msg.truncated,
                                failed: msg.failed,
                            },
                        )?;
                    }
                    conversations.push(record.clone());
                    journal.conversations.push(record);
                }
            }
        }

        let predictions = collect_predictions(&journal, spec, &match_id, &state, agents);
        for pred in &predictions {
            write_line(
                &mut sink,
                &TraceLine::Prediction {
                    round,
                    predictor: pred.predictor.clone(),
                    target: pred.target.clone(),
                    payload: pred.payload.clone(),
                    defaulted: pred.defaulted,
                },
            )?;
        }
        journal.predictions.extend(predictions.iter().cloned());

        let mut turns = Vec::new();
        let mut actions: BTreeMap<String, GameAction> = BTreeMap::new();
        for name in &living {
            let ctx = journal.context(spec, &match_id, &state, StageKind::Act, name);
            let handle = agents.get_mut(name).expect("roster agents exist");
            let turn = match handle.act(&ctx) {
                Ok(turn) => turn,
                Err(_) => AgentTurn {
                    reasoning: String::new(),
                    action: games::default_action(&state, name),
                    defaulted: true,
                },
            };
            write_line(
                &mut sink,
                &TraceLine::Reasoning {
                    round,
                    agent: name.clone(),
                    text: turn.reasoning.clone(),
                },
            )?;
            write_line(
                &mut sink,
                &TraceLine::Action {
                    round,
                    agent: name.clone(),
                    action: turn.action.clone(),
                    defaulted: turn.defaulted,
                },
            )?;
            actions.insert(name.clone(), turn.action.clone());
            turns.push(TurnRecord {
                round,
                agent: name.clone(),
                reasoning: turn.reasoning.clone(),
                action: turn.action,
                defaulted: turn.defaulted,
            });
            journal
                .reasoning
                .entry(name.clone())
                .or_default()
                .push((round, turn.reasoning));
        }

        let (next, outcome) = games::apply_round(&state, &actions)?;
        write_line(&mut sink, &TraceLine::RoundResult { round, outcome: outcome.clone() })?;
        journal.history.push(PublicRound { round, outcome: outcome.clone() });
        rounds.push(RoundRecord { round, conversations, predictions, turns, outcome });
        state = next;
    }

    let rewards = games::terminal_rewards(&state, spec.max_rounds);
    write_line(
        &mut sink,
        &TraceLine::MatchResult {
            match_id: match_id.clone(),
            status: MatchStatus::Completed,
            rewards: rewards.clone(),
            rounds: rounds.len() as u32,
            wall_ms: trace::wall_ms(),
        },
    )?;
    if let Some(sink) = sink.as_mut() {
        sink.flush()?;
    }

    Ok(MatchRecord {
        schema_version: SCHEMA_VERSION,
        match_id,
        spec: spec.clone(),
        rounds,
        rewards,
        status: MatchStatus::Completed,
    })
}
