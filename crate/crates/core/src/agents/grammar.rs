//! The fenced block grammar agents use to submit actions and predictions.
//!
//! A submission is a fenced code block tagged `action` or `prediction`
//! whose first non-empty line is one game command:
//!
//! ```text
//! attack Ben=2, Cleo=1     Survivor spend per target
//! hold                     Survivor no-op
//! extract 12.5             Tragedy demand
//! propose Ada=60, Ben=40   Coalition proposal
//! accept 3                 Coalition endorsement by id
//! pass                     Coalition no-op
//! choose 2                 Scheduler option
//! bid 17                   Hupi bid
//! ```
//!
//! Prediction blocks reuse the same commands, except Survivor predicts a
//! single primary target (`target Ben` or `none`) and Coalition predicts
//! only a stance keyword. When a reply contains several blocks of the
//! same tag the last one wins, so models can think out loud first.

use std::collections::BTreeMap;

use crate::games::{GameAction, PredictionPayload, ProposalSpec, Stance};
use crate::types::GameKind;

/// Extracts the body of the last fenced block tagged `tag`.
pub fn last_fenced_block(text: &str, tag: &str) -> Option<String> {
    let mut body: Option<String> = None;
    let mut current: Option<Vec<&str>> = None;
    for line in text.lines() {
        let trimmed = line.trim();
        match &mut current {
            None => {
                if let Some(rest) = trimmed.strip_prefix("```") {
                    if rest.trim().eq_ignore_ascii_case(tag) {
                        current = Some(Vec::new());
                    }
                }
            }
            Some(lines) => {
                if trimmed.starts_with("```") {
                    body = Some(lines.join("\n"));
                    current = None;
                } else {
                    lines.push(line);
                }
            }
        }
    }
    body
}

fn first_command(body: &str) -> Option<(String, String)> {
    let line = body.lines().map(str::trim).find(|l| !l.is_empty())?;
    let (keyword, rest) = match line.split_once(char::is_whitespace) {
        Some((k, r)) => (k, r.trim()),
        None => (line, ""),
    };
    Some((keyword.to_ascii_lowercase(), rest.to_string()))
}

fn parse_assignments(rest: &str) -> Result<Vec<(String, f64)>, String> {
    let mut pairs = Vec::new();
    for part in rest.split(',') {
        let part = part.trim();
        if part.is_empty() {
            continue;
        }
        let (name, value) = part
            .split_once('=')
            .ok_or_else(|| format!("expected Name=value, got {part:?}"))?;
        let value: f64 = value
            .trim()
            .parse()
            .map_err(|_| format!("{:?} is not a number", value.trim()))?;
        pairs.push((name.trim().to_string(), value));
    }
    if pairs.is_empty() {
        return Err("expected at least one Name=value pair".into());
    }
    Ok(pairs)
}

/// Parses an `action` block from a full model reply.
pub fn parse_action_block(kind: GameKind, text: &str) -> Result<GameAction, String> {
    let body = last_fenced_block(text, "action")
        .ok_or_else(|| "no ```action block found".to_string())?;
    let (keyword, rest) =
        first_command(&body).ok_or_else(|| "action block is empty".to_string())?;
    match (kind, keyword.as_str()) {
        (GameKind::Survivor, "hold") => Ok(GameAction::Attack(BTreeMap::new())),
        (GameKind::Survivor, "attack") => {
            let mut spend = BTreeMap::new();
            for (name, value) in parse_assignments(&rest)? {
                if value < 0.0 || value.fract() != 0.0 || value > u32::MAX as f64 {
                    return Err(format!("ammo for {name} must be a whole number"));
                }
                *spend.entry(name).or_insert(0) += value as u32;
            }
            Ok(GameAction::Attack(spend))
        }
        (GameKind::Tragedy, "extract") => {
            let amount: f64 = rest
                .parse()
                .map_err(|_| format!("{rest:?} is not a number"))?;
            Ok(GameAction::Extract(amount))
        }
        (GameKind::Coalition, "propose") => {
            let split = parse_assignments(&rest)?.into_iter().collect();
            Ok(GameAction::Propose(ProposalSpec { split }))
        }
        (GameKind::Coalition, "accept") => {
            let id: u64 = rest
                .parse()
                .map_err(|_| format!("{rest:?} is not a proposal id"))?;
            Ok(GameAction::Accept(id))
        }
        (GameKind::Coalition, "pass") => Ok(GameAction::Pass),
        (GameKind::Scheduler, "choose") => {
            let option: usize = rest
                .parse()
                .map_err(|_| format!("{rest:?} is not an option index"))?;
            Ok(GameAction::Choose(option))
        }
        (GameKind::Hupi, "bid") => {
            let bid: u32 = rest
                .parse()
                .map_err(|_| format!("{rest:?} is not a bid"))?;
            Ok(GameAction::Bid(bid))
        }
        _ => Err(format!("command {keyword:?} is not valid in {kind}")),
    }
}

/// Parses a `prediction` block from a full model reply.
pub fn parse_prediction_block(kind: GameKind, text: &str) -> Result<PredictionPayload, String> {
    let body = last_fenced_block(text, "prediction")
        .ok_or_else(|| "no ```prediction block found".to_string())?;
    let (keyword, rest) =
        first_command(&body).ok_or_else(|| "prediction block is empty".to_string())?;
    match (kind, keyword.as_str()) {
        (GameKind::Survivor, "none") | (GameKind::Survivor, "hold") => {
            Ok(PredictionPayload::Target(None))
        }
        (GameKind::Survivor, "target") | (GameKind::Survivor, "attack") => {
            if rest.is_empty() {
                Err("expected a target name".into())
            } else {
                Ok(PredictionPayload::Target(Some(rest)))
            }
        }
        (GameKind::Tragedy, "extract") => {
            let amount: f64 = rest
                .parse()
                .map_err(|_| format!("{rest:?} is not a number"))?;
            Ok(PredictionPayload::Extraction(amount))
        }
        (GameKind::Coalition, "propose") => Ok(PredictionPayload::Stance(Stance::Propose)),
        (GameKind::Coalition, "accept") => Ok(PredictionPayload::Stance(Stance::Accept)),
        (GameKind::Coalition, "pass") => Ok(PredictionPayload::Stance(Stance::Pass)),
        (GameKind::Scheduler, "choose") => {
            let option: usize = rest
                .parse()
                .map_err(|_| format!("{rest:?} is not an option index"))?;
            Ok(PredictionPayload::Choice(option))
        }
        (GameKind::Hupi, "bid") => {
            let bid: u32 = rest
                .parse()
                .map_err(|_| format!("{rest:?} is not a bid"))?;
            Ok(PredictionPayload::Bid(bid))
        }
        _ => Err(format!("command {keyword:?} is not a valid {kind} prediction")),
    }
}

/// Renders an action as a grammar command, usable as an example or to
/// echo a submission back in a correction prompt.
pub fn render_action(action: &GameAction) -> String {
    match action {
        GameAction::Attack(spend) if spend.is_empty() => "hold".into(),
        GameAction::Attack(spend) => {
            let parts: Vec<String> =
                spend.iter().map(|(name, ammo)| format!("{name}={ammo}")).collect();
            format!("attack {}", parts.join(", "))
        }
        GameAction::Extract(x) => format!("extract {x}"),
        GameAction::Propose(spec) => {
            let parts: Vec<String> =
                spec.split.iter().map(|(name, share)| format!("{name}={share}")).collect();
            format!("propose {}", parts.join(", "))
        }
        GameAction::Accept(id) => format!("accept {id}"),
        GameAction::Pass => "pass".into(),
        GameAction::Choose(j) => format!("choose {j}"),
        GameAction::Bid(b) => format!("bid {b}"),
    }
}
