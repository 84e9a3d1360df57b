//! Highest unique positive integer.
//!
//! Each round every player bids an integer in [1, M] with M = 10n. The
//! round is won by the highest value that exactly one player chose; if
//! every value is shared the round has no winner. The game always runs to
//! the round cap and each player's reward is their number of round wins.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{GameAction, OutcomeDetail};

/// M = this factor times the number of players.
pub const HUPI_BID_FACTOR: u32 = 10;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HupiState {
    pub max_bid: u32,
    pub wins: BTreeMap<String, u32>,
}

impl HupiState {
    pub fn new(roster: &[String]) -> Self {
        HupiState {
            max_bid: HUPI_BID_FACTOR * roster.len() as u32,
            wins: roster.iter().map(|n| (n.clone(), 0)).collect(),
        }
    }
}

pub fn validate(state: &HupiState, bid: u32) -> Result<(), String> {
    if (1..=state.max_bid).contains(&bid) {
        Ok(())
    } else {
        Err(format!("bid {bid} out of range [1, {}]", state.max_bid))
    }
}

/// The winning bid among `bids`: the highest value chosen exactly once.
pub fn winning_bid<'a, I>(bids: I) -> Option<u32>
where
    I: IntoIterator<Item = &'a u32>,
{
    let mut counts: BTreeMap<u32, u32> = BTreeMap::new();
    for bid in bids {
        *counts.entry(*bid).or_insert(0) += 1;
    }
    counts
        .into_iter()
        .rev()
        .find(|(_, count)| *count == 1)
        .map(|(bid, _)| bid)
}

pub fn apply(
    state: &mut HupiState,
    roster: &[String],
    actions: &BTreeMap<String, GameAction>,
) -> OutcomeDetail {
    let bids: BTreeMap<String, u32> = actions
        .iter()
        .map(|(name, action)| {
            let GameAction::Bid(b) = action else {
                unreachable!("validated as hupi actions")
            };
            (name.clone(), *b)
        })
        .collect();

    let winner = winning_bid(bids.values()).map(|value| {
        roster
            .iter()
            .find(|n| bids.get(*n) == Some(&value))
            .expect("winning bid belongs to a bidder")
            .clone()
    });
    if let Some(name) = &winner {
        *state.wins.get_mut(name).expect("winner in roster") += 1;
    }

    OutcomeDetail::Hupi { bids, winner }
}

pub fn assertiveness(state: &HupiState, bid: u32) -> f64 {
    f64::from(bid.clamp(1, state.max_bid)) / f64::from(state.max_bid)
}
