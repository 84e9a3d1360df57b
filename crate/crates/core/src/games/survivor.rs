//! Survivor: last one standing.
//!
//! Every player starts with 3 lives and 5 ammo. Each round, each living
//! player may spend any part of their remaining ammo on attacks against
//! living opponents; all attacks land simultaneously and each ammo unit
//! removes one life. A player at zero lives is eliminated at the end of
//! the round. The game ends when at most one player remains or the round
//! cap is reached. Eliminated players score their elimination round
//! (1-based), everyone alive at the cap scores the cap, and a sole
//! survivor scores the cap plus a bonus.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{AttackEvent, GameAction, OutcomeDetail};

pub const SURVIVOR_LIVES: i32 = 3;
pub const SURVIVOR_START_AMMO: u32 = 5;
pub const SURVIVOR_BONUS: f64 = 5.0;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Combatant {
    pub lives: i32,
    pub ammo: u32,
    pub alive: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SurvivorState {
    pub players: BTreeMap<String, Combatant>,
    /// (display name, 0-based round in which the elimination happened).
    pub eliminated: Vec<(String, u32)>,
}

impl SurvivorState {
    pub fn new(roster: &[String]) -> Self {
        let players = roster
            .iter()
            .map(|n| {
                (
                    n.clone(),
                    Combatant {
                        lives: SURVIVOR_LIVES,
                        ammo: SURVIVOR_START_AMMO,
                        alive: true,
                    },
                )
            })
            .collect();
        SurvivorState { players, eliminated: Vec::new() }
    }

    pub fn is_alive(&self, name: &str) -> bool {
        self.players.get(name).map(|c| c.alive).unwrap_or(false)
    }

    pub fn living_count(&self) -> usize {
        self.players.values().filter(|c| c.alive).count()
    }
}

pub fn validate(
    state: &SurvivorState,
    actor: &str,
    spend: &BTreeMap<String, u32>,
) -> Result<(), String> {
    let own_ammo = state.players.get(actor).map(|c| c.ammo).unwrap_or(0);
    let mut total: u64 = 0;
    for (target, ammo) in spend {
        if target == actor {
            return Err("cannot attack yourself".into());
        }
        if !state.is_alive(target) {
            return Err(format!("target {target} is not a living player"));
        }
        total += u64::from(*ammo);
    }
    if total > u64::from(own_ammo) {
        return Err(format!("spend {total} exceeds remaining ammo {own_ammo}"));
    }
    Ok(())
}

pub fn apply(
    state: &mut SurvivorState,
    round: u32,
    roster: &[String],
    actions: &BTreeMap<String, GameAction>,
) -> OutcomeDetail {
    let mut attacks = Vec::new();
    let mut damage: BTreeMap<&str, u32> = BTreeMap::new();

    for name in roster {
        let Some(GameAction::Attack(spend)) = actions.get(name) else {
            continue;
        };
        for (target, ammo) in spend {
            if *ammo == 0 {
                continue;
            }
            let shooter = state.players.get_mut(name).expect("actor in roster");
            shooter.ammo -= ammo;
            *damage.entry(target.as_str()).or_insert(0) += ammo;
            attacks.push(AttackEvent {
                from: name.clone(),
                to: target.clone(),
                ammo: *ammo,
            });
        }
    }

    let mut eliminated = Vec::new();
    for name in roster {
        let Some(hit) = damage.get(name.as_str()) else { continue };
        let player = state.players.get_mut(name).expect("target validated as living");
        player.lives -= *hit as i32;
        if player.alive && player.lives <= 0 {
            player.alive = false;
            eliminated.push(name.clone());
            state.eliminated.push((name.clone(), round));
        }
    }

    OutcomeDetail::Survivor { attacks, eliminated }
}

pub fn rewards(state: &SurvivorState, roster: &[String], max_rounds: u32) -> BTreeMap<String, f64> {
    let sole_survivor = state.living_count() == 1;
    let mut out = BTreeMap::new();
    for name in roster {
        let player = &state.players[name];
        let reward = if player.alive {
            if sole_survivor {
                f64::from(max_rounds) + SURVIVOR_BONUS
            } else {
                f64::from(max_rounds)
            }
        } else {
            let round = state
                .eliminated
                .iter()
                .find(|(n, _)| n == name)
                .map(|(_, r)| *r)
                .expect("dead players have an elimination record");
            f64::from(round + 1)
        };
        out.insert(name.clone(), reward);
    }
    out
}

pub fn assertiveness(state: &SurvivorState, actor: &str, spend: &BTreeMap<String, u32>) -> f64 {
    let ammo = state.players.get(actor).map(|c| c.ammo).unwrap_or(0);
    if ammo == 0 {
        return 0.0;
    }
    let spent: u32 = spend.values().sum();
    f64::from(spent.min(ammo)) / f64::from(ammo)
}

/// The target receiving the most ammo, ties broken by lowest seat index.
/// None for an empty (hold) action.
pub fn primary_target(roster: &[String], spend: &BTreeMap<String, u32>) -> Option<String> {
    spend
        .iter()
        .filter(|(_, ammo)| **ammo > 0)
        .max_by_key(|(target, ammo)| {
            let seat = roster.iter().position(|n| &n == target).unwrap_or(usize::MAX);
            (**ammo, std::cmp::Reverse(seat))
        })
        .map(|(target, _)| target.clone())
}
