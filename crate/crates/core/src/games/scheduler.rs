//! Scheduler: unanimous choice among n options under circulant preferences.
//!
//! A match of n players has n options. The player in seat i values option
//! j at n - ((j - i) mod n), so every seat has a distinct favourite (its
//! own index) and every option has a distinct fan. Preferences are private
//! to each seat. Each round every player picks an option; a unanimous pick
//! ends the game and pays each player their preference for it. No
//! unanimity by the round cap pays everyone zero.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{GameAction, GameState, OutcomeDetail};

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SchedulerState {
    pub agreed: Option<usize>,
}

impl SchedulerState {
    pub fn new() -> Self {
        SchedulerState { agreed: None }
    }
}

/// Preference of seat `i` for option `j` among `n` options.
pub fn preference(n: usize, i: usize, j: usize) -> u32 {
    (n - (j as i64 - i as i64).rem_euclid(n as i64) as usize) as u32
}

pub fn validate(n: usize, j: usize) -> Result<(), String> {
    if j < n {
        Ok(())
    } else {
        Err(format!("option {j} out of range (n = {n})"))
    }
}

pub fn apply(state: &mut SchedulerState, actions: &BTreeMap<String, GameAction>) -> OutcomeDetail {
    let choices: BTreeMap<String, usize> = actions
        .iter()
        .map(|(name, action)| {
            let GameAction::Choose(j) = action else {
                unreachable!("validated as scheduler actions")
            };
            (name.clone(), *j)
        })
        .collect();

    let mut values = choices.values();
    let first = values.next().copied();
    let agreed = match first {
        Some(j) if values.all(|v| *v == j) => Some(j),
        _ => None,
    };
    state.agreed = agreed;

    OutcomeDetail::Scheduler { choices, agreed }
}

pub fn rewards(state: &SchedulerState, roster: &[String]) -> BTreeMap<String, f64> {
    let n = roster.len();
    roster
        .iter()
        .enumerate()
        .map(|(i, name)| {
            let reward = match state.agreed {
                Some(j) => f64::from(preference(n, i, j)),
                None => 0.0,
            };
            (name.clone(), reward)
        })
        .collect()
}

/// Preference for the chosen option relative to the best available.
pub fn assertiveness(state: &GameState, actor: &str, j: usize) -> f64 {
    let n = state.roster.len();
    let Some(i) = state.seat_of(actor) else { return 0.0 };
    if j >= n || n == 0 {
        return 0.0;
    }
    f64::from(preference(n, i, j)) / n as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::games::{
        apply_round, is_terminal, new_state, terminal_rewards, validate_action, GameState,
    };
    use crate::types::GameKind;

    fn names(n: usize) -> Vec<String> {
        ["Ada", "Ben", "Cleo", "Dot", "Eve"][..n]
            .iter()
            .map(|s| s.to_string())
            .collect()
    }

    fn state(n: usize) -> GameState {
        new_state(GameKind::Scheduler, names(n))
    }

    fn choose(pairs: &[(&str, usize)]) -> BTreeMap<String, GameAction> {
        pairs
            .iter()
            .map(|(n, j)| (n.to_string(), GameAction::Choose(*j)))
            .collect()
    }

    #[test]
    fn every_seat_ranks_its_own_index_first() {
        for n in 2..=5 {
            for i in 0..n {
                assert_eq!(preference(n, i, i), n as u32);
                let mut row: Vec<u32> = (0..n).map(|j| preference(n, i, j)).collect();
                row.sort_unstable();
                let expected: Vec<u32> = (1..=n as u32).collect();
                assert_eq!(row, expected, "each seat ranks all options distinctly");
            }
        }
    }

    #[test]
    fn seat_zero_preferences_decrease_with_option_index() {
        let row: Vec<u32> = (0..3).map(|j| preference(3, 0, j)).collect();
        assert_eq!(row, vec![3, 2, 1]);
    }

    #[test]
    fn unanimity_pays_the_circulant_preferences() {
        let s0 = state(3);
        let (s1, outcome) =
            apply_round(&s0, &choose(&[("Ada", 1), ("Ben", 1), ("Cleo", 1)])).unwrap();
        let OutcomeDetail::Scheduler { agreed, .. } = &outcome.detail else { unreachable!() };
        assert_eq!(*agreed, Some(1));
        assert!(is_terminal(&s1, 10));
        let rewards = terminal_rewards(&s1, 10);
        assert_eq!(rewards["Ada"], 2.0);
        assert_eq!(rewards["Ben"], 3.0);
        assert_eq!(rewards["Cleo"], 1.0);
    }

    #[test]
    fn split_votes_continue_the_game_and_pay_zero_at_the_cap() {
        let mut s = state(2);
        for _ in 0..3 {
            (s, _) = apply_round(&s, &choose(&[("Ada", 0), ("Ben", 1)])).unwrap();
            assert!(s.round >= 3 || !is_terminal(&s, 3));
        }
        assert!(is_terminal(&s, 3));
        assert!(terminal_rewards(&s, 3).values().all(|r| *r == 0.0));
    }

    #[test]
    fn out_of_range_options_are_illegal_and_default_to_own_seat() {
        let s0 = state(2);
        assert!(validate_action(&s0, "Ada", &GameAction::Choose(2)).is_err());
        let (_, outcome) = apply_round(&s0, &choose(&[("Ada", 5), ("Ben", 0)])).unwrap();
        assert_eq!(outcome.defaulted, vec!["Ada".to_string()]);
        let OutcomeDetail::Scheduler { choices, agreed } = &outcome.detail else {
            unreachable!()
        };
        assert_eq!(choices["Ada"], 0, "defaulted to own seat index");
        assert_eq!(*agreed, Some(0));
    }

    #[test]
    fn assertiveness_is_the_normalized_preference_of_the_pick() {
        let s0 = state(4);
        assert_eq!(assertiveness(&s0, "Ada", 0), 1.0);
        assert_eq!(assertiveness(&s0, "Ada", 1), 0.75);
        assert_eq!(assertiveness(&s0, "Ben", 1), 1.0);
        assert_eq!(assertiveness(&s0, "Ben", 9), 0.0);
    }
}
