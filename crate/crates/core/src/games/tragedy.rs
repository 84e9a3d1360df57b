//! Tragedy of the commons: a shared renewable stock.
//!
//! The stock starts at 100. Each round every player demands an amount;
//! demands are clamped to the current stock. If the total demanded fits
//! in the stock each player hauls their demand, otherwise the stock is
//! rationed proportionally to demands and drops to zero. After hauling,
//! the remainder regrows by a factor of 1.5 up to the ceiling of 100.
//! The game ends when the stock is exhausted or the round cap is
//! reached; each player's reward is their cumulative haul.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{GameAction, OutcomeDetail};

pub const TRAGEDY_START_STOCK: f64 = 100.0;
pub const TRAGEDY_CEILING: f64 = 100.0;
pub const TRAGEDY_REGROWTH: f64 = 1.5;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TragedyState {
    pub stock: f64,
    /// Cumulative haul per display name.
    pub hauls: BTreeMap<String, f64>,
}

impl TragedyState {
    pub fn new(roster: &[String]) -> Self {
        TragedyState {
            stock: TRAGEDY_START_STOCK,
            hauls: roster.iter().map(|n| (n.clone(), 0.0)).collect(),
        }
    }
}

pub fn validate(amount: f64) -> Result<(), String> {
    if !amount.is_finite() {
        return Err("extraction must be a finite number".into());
    }
    if amount < 0.0 {
        return Err("extraction cannot be negative".into());
    }
    Ok(())
}

pub fn apply(state: &mut TragedyState, actions: &BTreeMap<String, GameAction>) -> OutcomeDetail {
    let stock_before = state.stock;
    let demands: BTreeMap<&str, f64> = actions
        .iter()
        .map(|(name, action)| {
            let GameAction::Extract(x) = action else {
                unreachable!("validated as tragedy actions")
            };
            (name.as_str(), x.clamp(0.0, stock_before))
        })
        .collect();

    let total: f64 = demands.values().sum();
    let rationed = total > stock_before;
    let mut hauls = BTreeMap::new();
    for (name, demand) in &demands {
        let haul = if rationed {
            stock_before * demand / total
        } else {
            *demand
        };
        hauls.insert(name.to_string(), haul);
        *state.hauls.get_mut(*name).expect("actor in roster") += haul;
    }

    let remaining = if rationed {
        0.0
    } else {
        stock_before - total
    };
    state.stock = (remaining * TRAGEDY_REGROWTH).min(TRAGEDY_CEILING);

    OutcomeDetail::Tragedy { hauls, rationed, stock_after: state.stock }
}

pub fn assertiveness(state: &TragedyState, amount: f64) -> f64 {
    if state.stock <= 0.0 {
        return 0.0;
    }
    (amount / state.stock).clamp(0.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::games::{
        apply_round, is_terminal, new_state, terminal_rewards, validate_action, GameState,
        StateDetail,
    };
    use crate::types::GameKind;
    use proptest::prelude::*;

    fn names(n: usize) -> Vec<String> {
        ["Ada", "Ben", "Cleo", "Dot", "Eve"][..n]
            .iter()
            .map(|s| s.to_string())
            .collect()
    }

    fn state(n: usize) -> GameState {
        new_state(GameKind::Tragedy, names(n))
    }

    fn tragedy(state: &GameState) -> &TragedyState {
        match &state.detail {
            StateDetail::Tragedy(s) => s,
            _ => unreachable!(),
        }
    }

    fn extract(pairs: &[(&str, f64)]) -> BTreeMap<String, GameAction> {
        pairs
            .iter()
            .map(|(n, x)| (n.to_string(), GameAction::Extract(*x)))
            .collect()
    }

    #[test]
    fn over_demand_rations_proportionally_and_exhausts_the_stock() {
        let s0 = state(2);
        let (s1, outcome) = apply_round(&s0, &extract(&[("Ada", 60.0), ("Ben", 60.0)])).unwrap();
        match &outcome.detail {
            OutcomeDetail::Tragedy { hauls, rationed, stock_after } => {
                assert!(*rationed);
                assert_eq!(hauls["Ada"], 50.0);
                assert_eq!(hauls["Ben"], 50.0);
                assert_eq!(*stock_after, 0.0);
            }
            _ => unreachable!(),
        }
        assert!(is_terminal(&s1, 10));
        let rewards = terminal_rewards(&s1, 10);
        assert_eq!(rewards["Ada"], 50.0);
        assert_eq!(rewards["Ben"], 50.0);
    }

    #[test]
    fn modest_demands_regrow_to_the_ceiling() {
        let s0 = state(2);
        let (s1, outcome) = apply_round(&s0, &extract(&[("Ada", 10.0), ("Ben", 15.0)])).unwrap();
        match &outcome.detail {
            OutcomeDetail::Tragedy { hauls, rationed, stock_after } => {
                assert!(!rationed);
                assert_eq!(hauls["Ada"], 10.0);
                assert_eq!(hauls["Ben"], 15.0);
                assert_eq!(*stock_after, 100.0);
            }
            _ => unreachable!(),
        }
        assert!(!is_terminal(&s1, 10));
    }

    #[test]
    fn heavy_demand_shrinks_the_stock_below_the_ceiling() {
        let s0 = state(2);
        let (s1, _) = apply_round(&s0, &extract(&[("Ada", 50.0), ("Ben", 30.0)])).unwrap();
        assert_eq!(tragedy(&s1).stock, 30.0);
    }

    #[test]
    fn demands_above_stock_are_clamped_not_rejected() {
        let s0 = state(2);
        assert!(validate_action(&s0, "Ada", &GameAction::Extract(250.0)).is_ok());
        let (s1, outcome) = apply_round(&s0, &extract(&[("Ada", 250.0), ("Ben", 0.0)])).unwrap();
        match &outcome.detail {
            OutcomeDetail::Tragedy { hauls, rationed, .. } => {
                assert!(!rationed);
                assert_eq!(hauls["Ada"], 100.0);
            }
            _ => unreachable!(),
        }
        assert_eq!(tragedy(&s1).stock, 0.0);
    }

    #[test]
    fn negative_or_nan_demands_are_illegal_and_default_to_zero() {
        let s0 = state(2);
        assert!(validate_action(&s0, "Ada", &GameAction::Extract(-1.0)).is_err());
        assert!(validate_action(&s0, "Ada", &GameAction::Extract(f64::NAN)).is_err());
        let (s1, outcome) =
            apply_round(&s0, &extract(&[("Ada", -5.0), ("Ben", 20.0)])).unwrap();
        assert_eq!(outcome.defaulted, vec!["Ada".to_string()]);
        assert_eq!(tragedy(&s1).hauls["Ada"], 0.0);
        assert_eq!(tragedy(&s1).hauls["Ben"], 20.0);
    }

    #[test]
    fn assertiveness_is_demand_over_stock() {
        let s0 = state(2);
        assert_eq!(super::assertiveness(tragedy(&s0), 25.0), 0.25);
        assert_eq!(super::assertiveness(tragedy(&s0), 500.0), 1.0);
        let mut empty = tragedy(&s0).clone();
        empty.stock = 0.0;
        assert_eq!(super::assertiveness(&empty, 10.0), 0.0);
    }

    proptest! {
        /// Hauled amounts never exceed the pre-round stock, and the
        /// post-round stock follows the regrowth law exactly.
        #[test]
        fn conservation_holds_for_random_demand_sequences(
            demands in proptest::collection::vec(
                proptest::collection::vec(0.0f64..150.0, 3),
                1..12,
            )
        ) {
            let mut s = state(3);
            for row in demands {
                if is_terminal(&s, 12) {
                    break;
                }
                let stock_before = tragedy(&s).stock;
                let actions = extract(&[
                    ("Ada", row[0]),
                    ("Ben", row[1]),
                    ("Cleo", row[2]),
                ]);
                let (s1, outcome) = apply_round(&s, &actions).unwrap();
                let OutcomeDetail::Tragedy { hauls, rationed, stock_after } = &outcome.detail
                else { unreachable!() };

                let total: f64 = hauls.values().sum();
                prop_assert!(total <= stock_before + 1e-9);
                if *rationed {
                    prop_assert_eq!(*stock_after, 0.0);
                } else {
                    let expected =
                        ((stock_before - total) * TRAGEDY_REGROWTH).min(TRAGEDY_CEILING);
                    prop_assert_eq!(*stock_after, expected);
                }
                prop_assert!(hauls.values().all(|h| *h >= 0.0));
                s = s1;
            }
        }
    }
}
