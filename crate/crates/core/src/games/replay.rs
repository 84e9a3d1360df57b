//! Deterministic re-execution of recorded matches.
//!
//! A match record carries every submitted action, so the rule engines can
//! replay it from the initial state and verify that each stored round
//! outcome and the final rewards follow from the rules. A mismatch means
//! the trace was corrupted or produced by different rules.

use std::collections::BTreeMap;

use crate::error::{ArenaError, Result};
use crate::games::{self, GameState};
use crate::types::{MatchRecord, MatchStatus};

/// What a successful replay reconstructed.
#[derive(Clone, Debug)]
pub struct ReplayReport {
    pub rounds_replayed: u32,
    pub final_state: GameState,
    pub rewards: BTreeMap<String, f64>,
}

/// Replays `record` through the rule engines and checks every stored
/// outcome and the final rewards. Aborted records replay the rounds they
/// have but skip terminal checks.
pub fn replay_match(record: &MatchRecord) -> Result<ReplayReport> {
    let spec = &record.spec;
    let mut state = games::new_state(spec.game, spec.display_names());

    for stored in &record.rounds {
        if stored.round != state.round {
            return Err(ArenaError::Validation(format!(
                "{}: round {} recorded out of order (expected {})",
                record.match_id, stored.round, state.round
            )));
        }
        if games::is_terminal(&state, spec.max_rounds) {
            return Err(ArenaError::Validation(format!(
                "{}: round {} recorded after the game ended",
                record.match_id, stored.round
            )));
        }
        let actions: BTreeMap<String, games::GameAction> = stored
            .turns
            .iter()
            .map(|t| (t.agent.clone(), t.action.clone()))
            .collect();
        let (next, outcome) = games::apply_round(&state, &actions)?;
        if outcome != stored.outcome {
            return Err(ArenaError::Validation(format!(
                "{}: round {} outcome does not follow from the recorded actions",
                record.match_id, stored.round
            )));
        }
        state = next;
    }

    let rewards = games::terminal_rewards(&state, spec.max_rounds);
    if record.status == MatchStatus::Completed {
        if !games::is_terminal(&state, spec.max_rounds) {
            return Err(ArenaError::Validation(format!(
                "{}: record claims completion but the game is not over",
                record.match_id
            )));
        }
        if rewards != record.rewards {
            return Err(ArenaError::Validation(format!(
                "{}: stored rewards {:?} disagree with replayed rewards {:?}",
                record.match_id, record.rewards, rewards
            )));
        }
    }

    Ok(ReplayReport {
        rounds_replayed: record.rounds.len() as u32,
        final_state: state,
        rewards,
    })
}
