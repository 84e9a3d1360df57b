//! Shared domain types: agent identities, match specifications, and the
//! records that make up a completed match.
//!
//! Serialized maps use `BTreeMap` so that every emitted JSON object has a
//! deterministic key order. Within a match, agents are referred to by their
//! per-match display `name`; the roster binds each display name to the stable
//! `model_key` under which results are aggregated across matches.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::games::{GameAction, PredictionPayload, RoundOutcome};

/// Current trace schema version. Readers accept files at or below this.
pub const SCHEMA_VERSION: u32 = 1;

/// One seat in a match: a per-match display name bound to a stable agent key.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct AgentId {
    /// Display name used inside the match (unique within the roster).
    pub name: String,
    /// Registered agent key, stable across matches.
    pub model_key: String,
}

/// The five games the arena can run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GameKind {
    Coalition,
    Scheduler,
    Tragedy,
    Survivor,
    Hupi,
}

impl GameKind {
    pub const ALL: [GameKind; 5] = [
        GameKind::Coalition,
        GameKind::Scheduler,
        GameKind::Tragedy,
        GameKind::Survivor,
        GameKind::Hupi,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            GameKind::Coalition => "coalition",
            GameKind::Scheduler => "scheduler",
            GameKind::Tragedy => "tragedy",
            GameKind::Survivor => "survivor",
            GameKind::Hupi => "hupi",
        }
    }
}

impl std::fmt::Display for GameKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for GameKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "coalition" => Ok(GameKind::Coalition),
            "scheduler" => Ok(GameKind::Scheduler),
            "tragedy" => Ok(GameKind::Tragedy),
            "survivor" => Ok(GameKind::Survivor),
            "hupi" => Ok(GameKind::Hupi),
            other => Err(format!("unknown game kind {other:?}")),
        }
    }
}

/// Narrative framing applied to prompts. Rules are identical under both.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Framing {
    A,
    B,
}

impl Framing {
    pub const ALL: [Framing; 2] = [Framing::A, Framing::B];

    pub fn as_str(self) -> &'static str {
        match self {
            Framing::A => "a",
            Framing::B => "b",
        }
    }
}

impl std::fmt::Display for Framing {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Everything needed to run one match deterministically.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatchSpec {
    pub game: GameKind,
    pub framing: Framing,
    /// Seats in order. Display names are unique within the roster.
    pub roster: Vec<AgentId>,
    pub communication: bool,
    pub max_rounds: u32,
    pub seed: u64,
}

impl MatchSpec {
    pub fn size(&self) -> usize {
        self.roster.len()
    }

    /// Stable identifier derived from the spec alone.
    pub fn match_id(&self) -> String {
        format!(
            "{}-{}p-{}-{}-{:016x}",
            self.game,
            self.roster.len(),
            self.framing,
            if self.communication { "comm" } else { "silent" },
            self.seed
        )
    }

    /// Seat index of a display name.
    pub fn seat_of(&self, name: &str) -> Option<usize> {
        self.roster.iter().position(|a| a.name == name)
    }

    /// Registered key behind a display name.
    pub fn model_key_of(&self, name: &str) -> Option<&str> {
        self.roster
            .iter()
            .find(|a| a.name == name)
            .map(|a| a.model_key.as_str())
    }

    pub fn display_names(&self) -> Vec<String> {
        self.roster.iter().map(|a| a.name.clone()).collect()
    }
}

/// One message inside a pairwise conversation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConversationMessage {
    pub speaker: String,
    pub text: String,
    /// True when the original text exceeded the length cap and was cut.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub truncated: bool,
    /// True when message generation failed and an empty string was recorded.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub failed: bool,
}

/// A full pairwise conversation from the communicate stage.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConversationRecord {
    pub round: u32,
    /// The two participants, in speaking order of the opener first.
    pub participants: [String; 2],
    pub messages: Vec<ConversationMessage>,
}

impl ConversationRecord {
    pub fn involves(&self, name: &str) -> bool {
        self.participants.iter().any(|p| p == name)
    }

    pub fn partner_of(&self, name: &str) -> Option<&str> {
        match &self.participants {
            [a, b] if a == name => Some(b),
            [a, b] if b == name => Some(a),
            _ => None,
        }
    }
}

/// One agent's prediction of another agent's upcoming action.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PredictionRecord {
    pub round: u32,
    pub predictor: String,
    pub target: String,
    pub payload: PredictionPayload,
    /// True when the agent failed to produce a usable prediction and a
    /// neutral default was substituted.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub defaulted: bool,
}

/// One agent's reasoning and action from the act stage.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TurnRecord {
    pub round: u32,
    pub agent: String,
    pub reasoning: String,
    pub action: GameAction,
    /// True when the submitted action was illegal or unparseable and the
    /// game's default action was substituted.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub defaulted: bool,
}

/// Everything recorded for one protocol round.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoundRecord {
    pub round: u32,
    pub conversations: Vec<ConversationRecord>,
    pub predictions: Vec<PredictionRecord>,
    pub turns: Vec<TurnRecord>,
    pub outcome: RoundOutcome,
}

/// Whether a match ran to completion.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MatchStatus {
    Completed,
    Aborted,
}

/// A completed (or aborted) match: spec, per-round records, final rewards.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatchRecord {
    pub schema_version: u32,
    pub match_id: String,
    pub spec: MatchSpec,
    pub rounds: Vec<RoundRecord>,
    /// Final reward per display name. Empty for aborted matches.
    pub rewards: BTreeMap<String, f64>,
    pub status: MatchStatus,
}

impl MatchRecord {
    /// Reward of a registered agent key, resolved through the roster.
    pub fn reward_of_key(&self, model_key: &str) -> Option<f64> {
        let name = &self
            .spec
            .roster
            .iter()
            .find(|a| a.model_key == model_key)?
            .name;
        self.rewards.get(name).copied()
    }
}

/// Fixed pool of per-match display names. Seeded sampling without
/// replacement keeps names unique within a roster and stable per seed.
pub const DISPLAY_NAMES: [&str; 64] = [
    "Alder", "Aspen", "Basil", "Bay", "Birch", "Briar", "Cedar", "Clay",
    "Clove", "Coral", "Cove", "Cypress", "Dale", "Dune", "Ember", "Fern",
    "Flint", "Frost", "Gale", "Garnet", "Glen", "Hazel", "Heath", "Holly",
    "Indigo", "Iris", "Ivy", "Jasper", "Juniper", "Kestrel", "Lark", "Laurel",
    "Linden", "Lotus", "Maple", "Marsh", "Moss", "Nettle", "North", "Oak",
    "Ochre", "Onyx", "Opal", "Osier", "Pike", "Pine", "Quill", "Reed",
    "Ridge", "Rowan", "Rush", "Sable", "Sage", "Slate", "Sorrel", "Sparrow",
    "Tarn", "Teal", "Thorn", "Umber", "Vale", "Wren", "Yarrow", "Zephyr",
];

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_spec() -> MatchSpec {
        MatchSpec {
            game: GameKind::Hupi,
            framing: Framing::A,
            roster: vec![
                AgentId { name: "Fern".into(), model_key: "greedy".into() },
                AgentId { name: "Oak".into(), model_key: "random".into() },
            ],
            communication: true,
            max_rounds: 10,
            seed: 0x00ff,
        }
    }

    #[test]
    fn match_id_is_deterministic_and_descriptive() {
        let spec = sample_spec();
        assert_eq!(spec.match_id(), "hupi-2p-a-comm-00000000000000ff");
        assert_eq!(spec.match_id(), sample_spec().match_id());
    }

    #[test]
    fn roster_lookups_resolve_names_and_keys() {
        let spec = sample_spec();
        assert_eq!(spec.seat_of("Oak"), Some(1));
        assert_eq!(spec.seat_of("Elm"), None);
        assert_eq!(spec.model_key_of("Fern"), Some("greedy"));
        assert_eq!(spec.model_key_of("nobody"), None);
    }

    #[test]
    fn game_kind_round_trips_through_strings() {
        for kind in GameKind::ALL {
            let parsed: GameKind = kind.as_str().parse().unwrap();
            assert_eq!(parsed, kind);
            let json = serde_json::to_string(&kind).unwrap();
            assert_eq!(json, format!("\"{}\"", kind.as_str()));
        }
        assert!("poker".parse::<GameKind>().is_err());
    }

    #[test]
    fn display_name_pool_has_no_duplicates() {
        let mut names: Vec<&str> = DISPLAY_NAMES.to_vec();
        names.sort_unstable();
        names.dedup();
        assert_eq!(names.len(), DISPLAY_NAMES.len());
    }

    #[test]
    fn conversation_partner_resolution() {
        let conv = ConversationRecord {
            round: 0,
            participants: ["Fern".into(), "Oak".into()],
            messages: vec![],
        };
        assert_eq!(conv.partner_of("Fern"), Some("Oak"));
        assert_eq!(conv.partner_of("Oak"), Some("Fern"));
        assert_eq!(conv.partner_of("Elm"), None);
        assert!(conv.involves("Oak"));
    }
}
