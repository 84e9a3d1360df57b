//! Coalition formation over a fixed prize.
//!
//! Players negotiate a split of a prize of 100. A proposal names a member
//! set and a per-member split summing to the prize. Proposals accumulate
//! on a public standing list with sequential ids. Each round a player may
//! put up a new proposal, accept a standing one by id, or pass. A
//! proposal whose member set is a strict majority forms the moment every
//! member endorses it within a single round, either by accepting its id
//! or by proposing an identical split; formation ends the game. Members
//! of the formed coalition take their shares, everyone else scores zero,
//! and if nothing forms by the round cap everyone scores zero.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::{AcceptEvent, GameAction, GameState, OutcomeDetail};

pub const COALITION_PRIZE: f64 = 100.0;

const SPLIT_TOLERANCE: f64 = 1e-9;

/// The content of a proposal: who is in, and who gets what. Members are
/// exactly the split's keys.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProposalSpec {
    pub split: BTreeMap<String, f64>,
}

impl ProposalSpec {
    pub fn members(&self) -> impl Iterator<Item = &str> {
        self.split.keys().map(String::as_str)
    }

    pub fn share_of(&self, name: &str) -> f64 {
        self.split.get(name).copied().unwrap_or(0.0)
    }

    /// Same member set and per-member shares within a small tolerance.
    pub fn matches(&self, other: &ProposalSpec) -> bool {
        self.split.len() == other.split.len()
            && self.split.iter().all(|(name, share)| {
                other
                    .split
                    .get(name)
                    .is_some_and(|s| (s - share).abs() <= SPLIT_TOLERANCE)
            })
    }
}

/// A proposal on the standing list.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Proposal {
    pub id: u64,
    pub proposer: String,
    pub spec: ProposalSpec,
}

/// The coalition that ended the game.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FormedCoalition {
    pub proposal_id: u64,
    pub split: BTreeMap<String, f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoalitionState {
    pub prize: f64,
    pub standing: Vec<Proposal>,
    pub next_id: u64,
    pub formed: Option<FormedCoalition>,
}

impl CoalitionState {
    pub fn new() -> Self {
        CoalitionState {
            prize: COALITION_PRIZE,
            standing: Vec::new(),
            next_id: 0,
            formed: None,
        }
    }

    pub fn proposal(&self, id: u64) -> Option<&Proposal> {
        self.standing.iter().find(|p| p.id == id)
    }
}

impl Default for CoalitionState {
    fn default() -> Self {
        Self::new()
    }
}

pub fn validate_propose(
    state: &GameState,
    coalition: &CoalitionState,
    spec: &ProposalSpec,
) -> Result<(), String> {
    if spec.split.is_empty() {
        return Err("proposal must name at least one member".into());
    }
    for (name, share) in &spec.split {
        if !state.roster.iter().any(|n| n == name) {
            return Err(format!("member {name} is not in the roster"));
        }
        if !share.is_finite() || *share < 0.0 {
            return Err(format!("share for {name} must be a finite non-negative number"));
        }
    }
    let total: f64 = spec.split.values().sum();
    if (total - coalition.prize).abs() > SPLIT_TOLERANCE {
        return Err(format!(
            "split sums to {total}, must sum to the prize {}",
            coalition.prize
        ));
    }
    Ok(())
}

pub fn validate_accept(coalition: &CoalitionState, id: u64) -> Result<(), String> {
    if coalition.proposal(id).is_some() {
        Ok(())
    } else {
        Err(format!("no standing proposal with id {id}"))
    }
}

pub fn apply(
    state: &mut CoalitionState,
    roster: &[String],
    actions: &BTreeMap<String, GameAction>,
) -> OutcomeDetail {
    let mut new_proposals = Vec::new();
    for name in roster {
        if let Some(GameAction::Propose(spec)) = actions.get(name) {
            new_proposals.push(Proposal {
                id: state.next_id,
                proposer: name.clone(),
                spec: spec.clone(),
            });
            state.next_id += 1;
        }
    }

    let mut accepts = Vec::new();
    for name in roster {
        if let Some(GameAction::Accept(id)) = actions.get(name) {
            accepts.push(AcceptEvent { agent: name.clone(), proposal_id: *id });
        }
    }

    let candidates: Vec<&Proposal> = state.standing.iter().chain(new_proposals.iter()).collect();
    let mut formed: Option<FormedCoalition> = None;
    for proposal in candidates {
        if proposal.spec.split.len() * 2 <= roster.len() {
            continue;
        }
        let endorsers: BTreeSet<&str> = actions
            .iter()
            .filter(|(_, action)| match action {
                GameAction::Accept(id) => *id == proposal.id,
                GameAction::Propose(spec) => spec.matches(&proposal.spec),
                _ => false,
            })
            .map(|(name, _)| name.as_str())
            .collect();
        if proposal.spec.members().all(|m| endorsers.contains(m)) {
            let candidate = FormedCoalition {
                proposal_id: proposal.id,
                split: proposal.spec.split.clone(),
            };
            match &formed {
                Some(best) if best.proposal_id <= candidate.proposal_id => {}
                _ => formed = Some(candidate),
            }
        }
    }

    state.standing.extend(new_proposals.iter().cloned());
    state.formed = formed.clone();

    OutcomeDetail::Coalition { proposals: new_proposals, accepts, formed }
}

pub fn rewards(state: &CoalitionState, roster: &[String]) -> BTreeMap<String, f64> {
    roster
        .iter()
        .map(|name| {
            let share = state
                .formed
                .as_ref()
                .and_then(|f| f.split.get(name).copied())
                .unwrap_or(0.0);
            (name.clone(), share)
        })
        .collect()
}

/// Share of the prize the action claims for the actor.
pub fn assertiveness(state: &CoalitionState, actor: &str, action: &GameAction) -> f64 {
    let share = match action {
        GameAction::Propose(spec) => spec.share_of(actor),
        GameAction::Accept(id) => state
            .proposal(*id)
            .map(|p| p.spec.share_of(actor))
            .unwrap_or(0.0),
        _ => 0.0,
    };
    (share / state.prize).clamp(0.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::games::{
        apply_round, is_terminal, new_state, terminal_rewards, validate_action, GameState,
        StateDetail,
    };
    use crate::types::GameKind;

    fn names(n: usize) -> Vec<String> {
        ["Ada", "Ben", "Cleo", "Dot", "Eve"][..n]
            .iter()
            .map(|s| s.to_string())
            .collect()
    }

    fn state(n: usize) -> GameState {
        new_state(GameKind::Coalition, names(n))
    }

    fn coalition(state: &GameState) -> &CoalitionState {
        match &state.detail {
            StateDetail::Coalition(s) => s,
            _ => unreachable!(),
        }
    }

    fn split(pairs: &[(&str, f64)]) -> ProposalSpec {
        ProposalSpec {
            split: pairs.iter().map(|(n, x)| (n.to_string(), *x)).collect(),
        }
    }

    fn propose(pairs: &[(&str, f64)]) -> GameAction {
        GameAction::Propose(split(pairs))
    }

    #[test]
    fn identical_proposals_form_immediately() {
        let s0 = state(3);
        let actions = [
            ("Ada".to_string(), propose(&[("Ada", 50.0), ("Ben", 50.0)])),
            ("Ben".to_string(), propose(&[("Ada", 50.0), ("Ben", 50.0)])),
            ("Cleo".to_string(), GameAction::Pass),
        ]
        .into_iter()
        .collect();
        let (s1, outcome) = apply_round(&s0, &actions).unwrap();
        let OutcomeDetail::Coalition { formed, proposals, .. } = &outcome.detail else {
            unreachable!()
        };
        assert_eq!(proposals.len(), 2);
        let formed = formed.as_ref().expect("majority pair endorsed the same split");
        assert_eq!(formed.proposal_id, 0);
        assert!(is_terminal(&s1, 10));
        let rewards = terminal_rewards(&s1, 10);
        assert_eq!(rewards["Ada"], 50.0);
        assert_eq!(rewards["Ben"], 50.0);
        assert_eq!(rewards["Cleo"], 0.0);
    }

    #[test]
    fn accepting_a_standing_proposal_forms_next_round() {
        let mut s = state(3);
        let actions = [
            ("Ada".to_string(), propose(&[("Ada", 60.0), ("Cleo", 40.0)])),
            ("Ben".to_string(), GameAction::Pass),
            ("Cleo".to_string(), GameAction::Pass),
        ]
        .into_iter()
        .collect();
        let outcome;
        (s, outcome) = apply_round(&s, &actions).unwrap();
        let OutcomeDetail::Coalition { formed, .. } = &outcome.detail else { unreachable!() };
        assert!(formed.is_none(), "only the proposer endorsed it");

        let actions = [
            ("Ada".to_string(), propose(&[("Ada", 60.0), ("Cleo", 40.0)])),
            ("Ben".to_string(), GameAction::Pass),
            ("Cleo".to_string(), GameAction::Accept(0)),
        ]
        .into_iter()
        .collect();
        (s, _) = apply_round(&s, &actions).unwrap();
        assert!(is_terminal(&s, 10));
        let rewards = terminal_rewards(&s, 10);
        assert_eq!(rewards["Ada"], 60.0);
        assert_eq!(rewards["Cleo"], 40.0);
        assert_eq!(rewards["Ben"], 0.0);
    }

    #[test]
    fn endorsement_must_land_in_one_round() {
        let mut s = state(2);
        let first = [
            ("Ada".to_string(), propose(&[("Ada", 50.0), ("Ben", 50.0)])),
            ("Ben".to_string(), GameAction::Pass),
        ]
        .into_iter()
        .collect();
        (s, _) = apply_round(&s, &first).unwrap();
        assert!(coalition(&s).formed.is_none());

        let second = [
            ("Ada".to_string(), GameAction::Pass),
            ("Ben".to_string(), GameAction::Accept(0)),
        ]
        .into_iter()
        .collect();
        let (s2, _) = apply_round(&s, &second).unwrap();
        assert!(
            coalition(&s2).formed.is_none(),
            "Ada did not re-endorse in the round Ben accepted"
        );
    }

    #[test]
    fn minority_coalitions_never_form() {
        let s0 = state(3);
        let actions = [
            ("Ada".to_string(), propose(&[("Ada", 100.0)])),
            ("Ben".to_string(), GameAction::Pass),
            ("Cleo".to_string(), GameAction::Pass),
        ]
        .into_iter()
        .collect();
        let (s1, _) = apply_round(&s0, &actions).unwrap();
        assert!(coalition(&s1).formed.is_none(), "a singleton is not a majority of three");
    }

    #[test]
    fn no_formation_by_the_cap_means_zero_for_everyone() {
        let mut s = state(2);
        for _ in 0..3 {
            let actions = [
                ("Ada".to_string(), GameAction::Pass),
                ("Ben".to_string(), GameAction::Pass),
            ]
            .into_iter()
            .collect();
            (s, _) = apply_round(&s, &actions).unwrap();
        }
        assert!(is_terminal(&s, 3));
        assert!(terminal_rewards(&s, 3).values().all(|r| *r == 0.0));
    }

    #[test]
    fn bad_splits_and_unknown_accepts_are_illegal() {
        let s0 = state(2);
        let short = propose(&[("Ada", 40.0), ("Ben", 40.0)]);
        let stranger = propose(&[("Ada", 50.0), ("Zed", 50.0)]);
        let negative = propose(&[("Ada", 150.0), ("Ben", -50.0)]);
        assert!(validate_action(&s0, "Ada", &short).is_err());
        assert!(validate_action(&s0, "Ada", &stranger).is_err());
        assert!(validate_action(&s0, "Ada", &negative).is_err());
        assert!(validate_action(&s0, "Ada", &GameAction::Accept(7)).is_err());

        let actions = [
            ("Ada".to_string(), short),
            ("Ben".to_string(), GameAction::Pass),
        ]
        .into_iter()
        .collect();
        let (s1, outcome) = apply_round(&s0, &actions).unwrap();
        assert_eq!(outcome.defaulted, vec!["Ada".to_string()]);
        assert!(coalition(&s1).standing.is_empty());
    }

    #[test]
    fn proposal_ids_are_sequential_across_rounds() {
        let mut s = state(3);
        let round = |a: &GameAction, b: &GameAction, c: &GameAction| {
            [
                ("Ada".to_string(), a.clone()),
                ("Ben".to_string(), b.clone()),
                ("Cleo".to_string(), c.clone()),
            ]
            .into_iter()
            .collect::<BTreeMap<String, GameAction>>()
        };
        let p1 = propose(&[("Ada", 70.0), ("Ben", 30.0)]);
        let p2 = propose(&[("Ben", 55.0), ("Cleo", 45.0)]);
        let p3 = propose(&[("Ada", 10.0), ("Ben", 45.0), ("Cleo", 45.0)]);
        (s, _) = apply_round(&s, &round(&p1, &p2, &GameAction::Pass)).unwrap();
        (s, _) = apply_round(&s, &round(&GameAction::Pass, &GameAction::Pass, &p3)).unwrap();
        let ids: Vec<u64> = coalition(&s).standing.iter().map(|p| p.id).collect();
        assert_eq!(ids, vec![0, 1, 2]);
        assert_eq!(coalition(&s).proposal(2).unwrap().proposer, "Cleo");
    }

    #[test]
    fn assertiveness_reflects_the_claimed_share() {
        let mut s = state(2);
        let p = propose(&[("Ada", 70.0), ("Ben", 30.0)]);
        let claimed = assertiveness(coalition(&s), "Ada", &p);
        assert_eq!(claimed, 0.7);

        let actions = [("Ada".to_string(), p), ("Ben".to_string(), GameAction::Pass)]
            .into_iter()
            .collect();
        (s, _) = apply_round(&s, &actions).unwrap();
        assert_eq!(assertiveness(coalition(&s), "Ben", &GameAction::Accept(0)), 0.3);
        assert_eq!(assertiveness(coalition(&s), "Cleo", &GameAction::Accept(0)), 0.0);
        assert_eq!(assertiveness(coalition(&s), "Ada", &GameAction::Pass), 0.0);
    }
}
