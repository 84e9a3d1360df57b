//! Rule engines for the five arena games.
//!
//! The module exposes a uniform surface over per-game implementations:
//! state construction, round application, terminal detection, rewards,
//! per-action assertiveness, and prediction scoring. All games reward
//! "more" as better, all run simultaneous rounds, and none uses hidden
//! randomness, so a state plus a full action map determines the next
//! state exactly.

mod coalition;
mod hupi;
mod replay;
mod scheduler;
mod survivor;
mod tragedy;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{ArenaError, Result};
use crate::types::GameKind;

pub use coalition::{CoalitionState, FormedCoalition, Proposal, ProposalSpec, COALITION_PRIZE};
pub use hupi::{HupiState, HUPI_BID_FACTOR};
pub use replay::{replay_match, ReplayReport};
pub use scheduler::{preference, SchedulerState};
pub use survivor::{
    primary_target, Combatant, SurvivorState, SURVIVOR_BONUS, SURVIVOR_LIVES,
    SURVIVOR_START_AMMO,
};
pub use tragedy::{TragedyState, TRAGEDY_CEILING, TRAGEDY_REGROWTH, TRAGEDY_START_STOCK};

/// One simultaneous action in any of the five games.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum GameAction {
    /// Survivor: ammo to spend per target. Empty map means hold.
    Attack(BTreeMap<String, u32>),
    /// Tragedy: amount demanded from the common stock.
    Extract(f64),
    /// Coalition: put a new proposal on the table.
    Propose(ProposalSpec),
    /// Coalition: endorse a standing proposal by id.
    Accept(u64),
    /// Coalition: do nothing this round.
    Pass,
    /// Scheduler: pick one of the n options.
    Choose(usize),
    /// Hupi: submit a positive integer bid.
    Bid(u32),
}

/// Coalition action stance, the facet predictions are scored on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stance {
    Propose,
    Accept,
    Pass,
}

/// What one agent predicts another will do this round.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum PredictionPayload {
    /// Survivor: primary attack target, or None for hold.
    Target(Option<String>),
    /// Tragedy: predicted extraction amount.
    Extraction(f64),
    /// Coalition: predicted stance.
    Stance(Stance),
    /// Scheduler: predicted option index.
    Choice(usize),
    /// Hupi: predicted bid.
    Bid(u32),
}

/// One resolved attack in a Survivor round.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AttackEvent {
    pub from: String,
    pub to: String,
    pub ammo: u32,
}

/// Coalition accept, resolved against the standing proposal list.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AcceptEvent {
    pub agent: String,
    pub proposal_id: u64,
}

/// Public result of one round, game-specific.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "game", rename_all = "snake_case")]
pub enum OutcomeDetail {
    Survivor {
        attacks: Vec<AttackEvent>,
        eliminated: Vec<String>,
    },
    Tragedy {
        hauls: BTreeMap<String, f64>,
        rationed: bool,
        stock_after: f64,
    },
    Coalition {
        proposals: Vec<Proposal>,
        accepts: Vec<AcceptEvent>,
        formed: Option<FormedCoalition>,
    },
    Scheduler {
        choices: BTreeMap<String, usize>,
        agreed: Option<usize>,
    },
    Hupi {
        bids: BTreeMap<String, u32>,
        winner: Option<String>,
    },
}

/// Public summary of one round: the game detail plus the names whose
/// submitted action was illegal and got replaced by the game default.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoundOutcome {
    pub defaulted: Vec<String>,
    pub detail: OutcomeDetail,
}

/// Game-specific live state.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "game", rename_all = "snake_case")]
pub enum StateDetail {
    Survivor(SurvivorState),
    Tragedy(TragedyState),
    Coalition(CoalitionState),
    Scheduler(SchedulerState),
    Hupi(HupiState),
}

/// Full game state: round counter, seat order, and per-game detail.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GameState {
    pub round: u32,
    /// Display names in seat order. Seat indices drive Scheduler
    /// preferences and all lowest-index tie breaks.
    pub roster: Vec<String>,
    pub detail: StateDetail,
}

impl GameState {
    pub fn kind(&self) -> GameKind {
        match self.detail {
            StateDetail::Survivor(_) => GameKind::Survivor,
            StateDetail::Tragedy(_) => GameKind::Tragedy,
            StateDetail::Coalition(_) => GameKind::Coalition,
            StateDetail::Scheduler(_) => GameKind::Scheduler,
            StateDetail::Hupi(_) => GameKind::Hupi,
        }
    }

    pub fn seat_of(&self, name: &str) -> Option<usize> {
        self.roster.iter().position(|n| n == name)
    }

    /// Display names still participating, in seat order. Identical to the
    /// roster in every game except Survivor.
    pub fn living(&self) -> Vec<String> {
        match &self.detail {
            StateDetail::Survivor(s) => self
                .roster
                .iter()
                .filter(|n| s.is_alive(n))
                .cloned()
                .collect(),
            _ => self.roster.clone(),
        }
    }

    pub fn is_living(&self, name: &str) -> bool {
        match &self.detail {
            StateDetail::Survivor(s) => s.is_alive(name),
            _ => self.roster.iter().any(|n| n == name),
        }
    }
}

/// Fresh state for a game over the given seat order.
pub fn new_state(kind: GameKind, roster: Vec<String>) -> GameState {
    let detail = match kind {
        GameKind::Survivor => StateDetail::Survivor(SurvivorState::new(&roster)),
        GameKind::Tragedy => StateDetail::Tragedy(TragedyState::new(&roster)),
        GameKind::Coalition => StateDetail::Coalition(CoalitionState::new()),
        GameKind::Scheduler => StateDetail::Scheduler(SchedulerState::new()),
        GameKind::Hupi => StateDetail::Hupi(HupiState::new(&roster)),
    };
    GameState { round: 0, roster, detail }
}

/// Checks an action against the current state. `Err` carries a short
/// human-readable reason; callers substitute [`default_action`] and flag.
pub fn validate_action(
    state: &GameState,
    actor: &str,
    action: &GameAction,
) -> std::result::Result<(), String> {
    if !state.is_living(actor) {
        return Err(format!("{actor} is not an active player"));
    }
    match (&state.detail, action) {
        (StateDetail::Survivor(s), GameAction::Attack(spend)) => {
            survivor::validate(s, actor, spend)
        }
        (StateDetail::Tragedy(_), GameAction::Extract(x)) => tragedy::validate(*x),
        (StateDetail::Coalition(s), GameAction::Propose(spec)) => {
            coalition::validate_propose(state, s, spec)
        }
        (StateDetail::Coalition(s), GameAction::Accept(id)) => coalition::validate_accept(s, *id),
        (StateDetail::Coalition(_), GameAction::Pass) => Ok(()),
        (StateDetail::Scheduler(_), GameAction::Choose(j)) => {
            scheduler::validate(state.roster.len(), *j)
        }
        (StateDetail::Hupi(s), GameAction::Bid(b)) => hupi::validate(s, *b),
        _ => Err(format!(
            "action {:?} does not belong to {}",
            action,
            state.kind()
        )),
    }
}

/// The safe fallback action substituted for illegal, unparseable, or
/// missing submissions.
pub fn default_action(state: &GameState, actor: &str) -> GameAction {
    match &state.detail {
        StateDetail::Survivor(_) => GameAction::Attack(BTreeMap::new()),
        StateDetail::Tragedy(_) => GameAction::Extract(0.0),
        StateDetail::Coalition(_) => GameAction::Pass,
        StateDetail::Scheduler(_) => {
            GameAction::Choose(state.seat_of(actor).unwrap_or(0))
        }
        StateDetail::Hupi(_) => GameAction::Bid(1),
    }
}

/// Applies one simultaneous round. `actions` must hold exactly one entry
/// per living player; illegal actions are replaced by the game default and
/// the actor is listed in the outcome's `defaulted` set.
pub fn apply_round(
    state: &GameState,
    actions: &BTreeMap<String, GameAction>,
) -> Result<(GameState, RoundOutcome)> {
    let living = state.living();
    if actions.len() != living.len() || living.iter().any(|n| !actions.contains_key(n)) {
        return Err(ArenaError::Contract(format!(
            "apply_round expects exactly one action per living player; got {:?}, living {:?}",
            actions.keys().collect::<Vec<_>>(),
            living
        )));
    }

    let mut defaulted = Vec::new();
    let mut effective: BTreeMap<String, GameAction> = BTreeMap::new();
    for name in &living {
        let submitted = &actions[name];
        match validate_action(state, name, submitted) {
            Ok(()) => {
                effective.insert(name.clone(), submitted.clone());
            }
            Err(_) => {
                defaulted.push(name.clone());
                effective.insert(name.clone(), default_action(state, name));
            }
        }
    }

    let mut next = state.clone();
    next.round = state.round + 1;
    let detail = match (&state.detail, &mut next.detail) {
        (StateDetail::Survivor(_), StateDetail::Survivor(s)) => {
            survivor::apply(s, state.round, &state.roster, &effective)
        }
        (StateDetail::Tragedy(_), StateDetail::Tragedy(s)) => tragedy::apply(s, &effective),
        (StateDetail::Coalition(_), StateDetail::Coalition(s)) => {
            coalition::apply(s, &state.roster, &effective)
        }
        (StateDetail::Scheduler(_), StateDetail::Scheduler(s)) => {
            scheduler::apply(s, &effective)
        }
        (StateDetail::Hupi(_), StateDetail::Hupi(s)) => hupi::apply(s, &state.roster, &effective),
        _ => unreachable!("state detail variants cannot change between rounds"),
    };

    Ok((next, RoundOutcome { defaulted, detail }))
}

/// True once no further round should run.
pub fn is_terminal(state: &GameState, max_rounds: u32) -> bool {
    if state.round >= max_rounds {
        return true;
    }
    match &state.detail {
        StateDetail::Survivor(s) => s.living_count() <= 1,
        StateDetail::Tragedy(s) => s.stock <= 0.0,
        StateDetail::Coalition(s) => s.formed.is_some(),
        StateDetail::Scheduler(s) => s.agreed.is_some(),
        StateDetail::Hupi(_) => false,
    }
}

/// Final reward per display name. Defined on any state, though callers
/// normally invoke it only once [`is_terminal`] holds.
pub fn terminal_rewards(state: &GameState, max_rounds: u32) -> BTreeMap<String, f64> {
    match &state.detail {
        StateDetail::Survivor(s) => survivor::rewards(s, &state.roster, max_rounds),
        StateDetail::Tragedy(s) => s.hauls.clone(),
        StateDetail::Coalition(s) => coalition::rewards(s, &state.roster),
        StateDetail::Scheduler(s) => scheduler::rewards(s, &state.roster),
        StateDetail::Hupi(s) => state
            .roster
            .iter()
            .map(|n| (n.clone(), f64::from(s.wins.get(n).copied().unwrap_or(0))))
            .collect(),
    }
}

/// How much of the available action budget an action claims, in [0, 1].
/// `state` is the state the action was taken in.
pub fn assertiveness(state: &GameState, actor: &str, action: &GameAction) -> f64 {
    match (&state.detail, action) {
        (StateDetail::Survivor(s), GameAction::Attack(spend)) => {
            survivor::assertiveness(s, actor, spend)
        }
        (StateDetail::Tragedy(s), GameAction::Extract(x)) => tragedy::assertiveness(s, *x),
        (StateDetail::Coalition(s), _) => coalition::assertiveness(s, actor, action),
        (StateDetail::Scheduler(_), GameAction::Choose(j)) => {
            scheduler::assertiveness(state, actor, *j)
        }
        (StateDetail::Hupi(s), GameAction::Bid(b)) => hupi::assertiveness(s, *b),
        _ => 0.0,
    }
}

/// The canonical facet of an action, i.e. the payload a perfectly accurate
/// prediction of it would carry.
pub fn action_facet(state: &GameState, action: &GameAction) -> PredictionPayload {
    match (&state.detail, action) {
        (StateDetail::Survivor(_), GameAction::Attack(spend)) => {
            PredictionPayload::Target(survivor::primary_target(&state.roster, spend))
        }
        (StateDetail::Tragedy(s), GameAction::Extract(x)) => {
            PredictionPayload::Extraction(x.clamp(0.0, s.stock))
        }
        (StateDetail::Coalition(_), GameAction::Propose(_)) => {
            PredictionPayload::Stance(Stance::Propose)
        }
        (StateDetail::Coalition(_), GameAction::Accept(_)) => {
            PredictionPayload::Stance(Stance::Accept)
        }
        (StateDetail::Coalition(_), GameAction::Pass) => PredictionPayload::Stance(Stance::Pass),
        (StateDetail::Scheduler(_), GameAction::Choose(j)) => PredictionPayload::Choice(*j),
        (StateDetail::Hupi(s), GameAction::Bid(b)) => {
            PredictionPayload::Bid((*b).clamp(1, s.max_bid))
        }
        _ => {
            debug_assert!(false, "action kind does not match state kind");
            PredictionPayload::Stance(Stance::Pass)
        }
    }
}

/// Scores a prediction against the action actually taken, in [0, 1].
/// `state` must be the state the action was taken in: it supplies the
/// normalizing bounds (current stock, maximum bid).
pub fn prediction_score(
    state: &GameState,
    predicted: &PredictionPayload,
    actual: &GameAction,
) -> f64 {
    let facet = action_facet(state, actual);
    match (predicted, &facet) {
        (PredictionPayload::Target(p), PredictionPayload::Target(a)) => {
            if p == a {
                1.0
            } else {
                0.0
            }
        }
        (PredictionPayload::Extraction(p), PredictionPayload::Extraction(a)) => {
            let cap = match &state.detail {
                StateDetail::Tragedy(s) => s.stock,
                _ => 0.0,
            };
            if cap <= 0.0 {
                1.0
            } else {
                1.0 - (p.clamp(0.0, cap) - a).abs() / cap
            }
        }
        (PredictionPayload::Stance(p), PredictionPayload::Stance(a)) => {
            if p == a {
                1.0
            } else {
                0.0
            }
        }
        (PredictionPayload::Choice(p), PredictionPayload::Choice(a)) => {
            if p == a {
                1.0
            } else {
                0.0
            }
        }
        (PredictionPayload::Bid(p), PredictionPayload::Bid(a)) => {
            let max_bid = match &state.detail {
                StateDetail::Hupi(s) => s.max_bid,
                _ => return 0.0,
            };
            let p = (*p).clamp(1, max_bid);
            1.0 - f64::from(p.abs_diff(*a)) / f64::from(max_bid - 1)
        }
        _ => {
            debug_assert!(false, "prediction kind does not match action facet");
            0.0
        }
    }
}

/// The payload substituted when an agent fails to produce a usable
/// prediction about `target`.
pub fn neutral_prediction(state: &GameState, target: &str) -> PredictionPayload {
    match &state.detail {
        StateDetail::Survivor(_) => PredictionPayload::Target(None),
        StateDetail::Tragedy(s) => PredictionPayload::Extraction(s.stock / 2.0),
        StateDetail::Coalition(_) => PredictionPayload::Stance(Stance::Pass),
        StateDetail::Scheduler(_) => {
            PredictionPayload::Choice(state.seat_of(target).unwrap_or(0))
        }
        StateDetail::Hupi(s) => PredictionPayload::Bid((s.max_bid / 2).max(1)),
    }
}

/// Checks a prediction payload against the game and state bounds. Finite
/// out-of-range numeric payloads are acceptable (scoring clamps them);
/// wrong-kind, non-finite, or unresolvable payloads are malformed.
pub fn validate_prediction(
    state: &GameState,
    payload: &PredictionPayload,
) -> std::result::Result<(), String> {
    match (&state.detail, payload) {
        (StateDetail::Survivor(_), PredictionPayload::Target(t)) => match t {
            None => Ok(()),
            Some(name) if state.roster.iter().any(|n| n == name) => Ok(()),
            Some(name) => Err(format!("{name} is not in the roster")),
        },
        (StateDetail::Tragedy(_), PredictionPayload::Extraction(x)) => {
            if x.is_finite() {
                Ok(())
            } else {
                Err("extraction must be finite".into())
            }
        }
        (StateDetail::Coalition(_), PredictionPayload::Stance(_)) => Ok(()),
        (StateDetail::Scheduler(_), PredictionPayload::Choice(j)) => {
            if *j < state.roster.len() {
                Ok(())
            } else {
                Err(format!(
                    "option {} out of range (n = {})",
                    j,
                    state.roster.len()
                ))
            }
        }
        (StateDetail::Hupi(_), PredictionPayload::Bid(_)) => Ok(()),
        _ => Err(format!(
            "payload {:?} does not belong to {}",
            payload,
            state.kind()
        )),
    }
}
