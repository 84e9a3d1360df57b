//! The scripted agent roster.
//!
//! Seven deterministic-given-seed policies spanning the skill range, used
//! for protocol tests, rating calibration, and as opponents in mixed
//! campaigns:
//!
//! * `Silent` never speaks, predicts neutrally, plays the game default.
//! * `Random` plays and predicts uniformly among legal moves.
//! * `Greedy` grabs the maximum in every game and announces it.
//! * `Cooperator` plays for sustainable joint reward and honors intents
//!   announced in conversation, which makes it communication-sensitive.
//! * `Mirror` repeats its own previous action and predicts that others
//!   repeat theirs.
//! * `KLevel` plays k rounds of iterated best response in Hupi and the
//!   default elsewhere.
//! * `NoisyOracle` plays a strong per-game policy with probability
//!   `skill` and a uniform random move otherwise, giving a tunable
//!   skill dial.
//!
//! All randomness comes from a stream derived from the match seed and
//! seat, so traces are reproducible.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::{BotKind, BotSpec};
use crate::games::{GameAction, PredictionPayload, Proposal, ProposalSpec, Stance};
use crate::protocol::{AgentHandle, AgentTurn, GameView, StageContext};
use crate::seeds;
use crate::types::{ConversationMessage, GameKind};

const SCRIPTED_STREAM_SALT: u64 = 0x05ca_1ab1_e0dd_ba11;

/// Announced plans parsed out of conversation messages. Bots that honor
/// communication read these; bots that announce embed them.
#[derive(Clone, Debug, PartialEq)]
pub enum Intent {
    Extract(f64),
    ChooseOption(usize),
    Bid(u32),
    AttackTarget(String),
    Hold,
    Propose,
    Accept(u64),
}

/// Renders an intent as the `intent: ...` suffix bots append to messages.
pub fn render_intent(intent: &Intent) -> String {
    match intent {
        Intent::Extract(x) => format!("intent: extract={x}"),
        Intent::ChooseOption(j) => format!("intent: option={j}"),
        Intent::Bid(b) => format!("intent: bid={b}"),
        Intent::AttackTarget(name) => format!("intent: attack={name}"),
        Intent::Hold => "intent: hold".into(),
        Intent::Propose => "intent: propose".into(),
        Intent::Accept(id) => format!("intent: accept={id}"),
    }
}

/// Parses the last `intent:` marker in a message, if any.
pub fn parse_intent(text: &str) -> Option<Intent> {
    let start = text.rfind("intent:")?;
    let rest = text[start + "intent:".len()..].lines().next()?.trim();
    if rest.eq_ignore_ascii_case("hold") {
        return Some(Intent::Hold);
    }
    if rest.eq_ignore_ascii_case("propose") {
        return Some(Intent::Propose);
    }
    let (key, value) = rest.split_once('=')?;
    match key.trim() {
        "extract" => value.trim().parse().ok().map(Intent::Extract),
        "option" => value.trim().parse().ok().map(Intent::ChooseOption),
        "bid" => value.trim().parse().ok().map(Intent::Bid),
        "attack" => Some(Intent::AttackTarget(value.trim().to_string())),
        "accept" => value.trim().parse().ok().map(Intent::Accept),
        _ => None,
    }
}

/// All intents heard by `me` this round, in speaking order: first from
/// completed conversations in the context, then from a live transcript.
fn heard_intents(
    ctx: &StageContext,
    live_transcript: &[ConversationMessage],
    me: &str,
) -> Vec<(String, Intent)> {
    let mut heard = Vec::new();
    let mut scan = |messages: &[ConversationMessage]| {
        for msg in messages {
            if msg.speaker == me {
                continue;
            }
            if let Some(intent) = parse_intent(&msg.text) {
                heard.push((msg.speaker.clone(), intent));
            }
        }
    };
    for conv in ctx.conversations.iter().filter(|c| c.round == ctx.round) {
        scan(&conv.messages);
    }
    scan(live_transcript);
    heard
}

/// The last intent announced by `speaker`, if any.
fn last_intent_of(heard: &[(String, Intent)], speaker: &str) -> Option<Intent> {
    heard
        .iter()
        .rev()
        .find(|(s, _)| s == speaker)
        .map(|(_, i)| i.clone())
}

fn seat_in(ctx: &StageContext, name: &str) -> usize {
    ctx.roster.iter().position(|n| n == name).unwrap_or(usize::MAX)
}

/// The game default action, reconstructed from the agent-side view.
pub fn ctx_default_action(ctx: &StageContext) -> GameAction {
    match ctx.game {
        GameKind::Survivor => GameAction::Attack(BTreeMap::new()),
        GameKind::Tragedy => GameAction::Extract(0.0),
        GameKind::Coalition => GameAction::Pass,
        GameKind::Scheduler => GameAction::Choose(ctx.seat),
        GameKind::Hupi => GameAction::Bid(1),
    }
}

/// The neutral prediction, reconstructed from the agent-side view.
pub fn ctx_neutral_prediction(ctx: &StageContext, target: &str) -> PredictionPayload {
    match &ctx.view {
        GameView::Survivor { .. } => PredictionPayload::Target(None),
        GameView::Tragedy { stock, .. } => PredictionPayload::Extraction(stock / 2.0),
        GameView::Coalition { .. } => PredictionPayload::Stance(Stance::Pass),
        GameView::Scheduler { .. } => PredictionPayload::Choice(seat_in(ctx, target)),
        GameView::Hupi { max_bid, .. } => PredictionPayload::Bid((max_bid / 2).max(1)),
    }
}

/// What `target` did last round, expressed as a prediction payload.
fn facet_from_history(ctx: &StageContext, target: &str) -> Option<PredictionPayload> {
    use crate::games::OutcomeDetail;
    let last = ctx.history.last()?;
    match &last.outcome.detail {
        OutcomeDetail::Survivor { attacks, .. } => {
            let mut spend: BTreeMap<String, u32> = BTreeMap::new();
            for attack in attacks.iter().filter(|a| a.from == target) {
                *spend.entry(attack.to.clone()).or_insert(0) += attack.ammo;
            }
            let primary = crate::games::primary_target(&ctx.roster, &spend);
            Some(PredictionPayload::Target(primary))
        }
        OutcomeDetail::Tragedy { hauls, .. } => {
            hauls.get(target).map(|h| PredictionPayload::Extraction(*h))
        }
        OutcomeDetail::Coalition { proposals, accepts, .. } => {
            let stance = if proposals.iter().any(|p| p.proposer == target) {
                Stance::Propose
            } else if accepts.iter().any(|a| a.agent == target) {
                Stance::Accept
            } else {
                Stance::Pass
            };
            Some(PredictionPayload::Stance(stance))
        }
        OutcomeDetail::Scheduler { choices, .. } => {
            choices.get(target).map(|j| PredictionPayload::Choice(*j))
        }
        OutcomeDetail::Hupi { bids, .. } => bids.get(target).map(|b| PredictionPayload::Bid(*b)),
    }
}

fn living_others<'a>(ctx: &'a StageContext, me: &str) -> Vec<&'a str> {
    ctx.living.iter().map(String::as_str).filter(|n| *n != me).collect()
}

/// Seat index of the lowest-seat living player.
fn lowest_living_seat_option(ctx: &StageContext) -> usize {
    ctx.living.first().map(|n| seat_in(ctx, n)).unwrap_or(0)
}

fn view_stock(ctx: &StageContext) -> f64 {
    match &ctx.view {
        GameView::Tragedy { stock, .. } => *stock,
        _ => 0.0,
    }
}

fn view_max_bid(ctx: &StageContext) -> u32 {
    match &ctx.view {
        GameView::Hupi { max_bid, .. } => *max_bid,
        _ => 1,
    }
}

fn view_ammo(ctx: &StageContext) -> u32 {
    match &ctx.view {
        GameView::Survivor { own_ammo, .. } => *own_ammo,
        _ => 0,
    }
}

fn view_standing(ctx: &StageContext) -> &[Proposal] {
    match &ctx.view {
        GameView::Coalition { standing, .. } => standing,
        _ => &[],
    }
}

fn view_prize(ctx: &StageContext) -> f64 {
    match &ctx.view {
        GameView::Coalition { prize, .. } => *prize,
        _ => 0.0,
    }
}

/// An even split of the prize over `members`, with the rounding
/// remainder on the last member so the total is exact.
fn even_split(members: &[String], prize: f64) -> ProposalSpec {
    let n = members.len();
    let share = prize / n as f64;
    let mut split = BTreeMap::new();
    let mut allocated = 0.0;
    for (idx, name) in members.iter().enumerate() {
        let s = if idx + 1 == n { prize - allocated } else { share };
        allocated += s;
        split.insert(name.clone(), s);
    }
    ProposalSpec { split }
}

/// Accept the cheapest standing proposal paying `me` at least
/// `threshold`, or fall back to proposing `fallback`.
fn coalition_plan(ctx: &StageContext, me: &str, threshold: f64, fallback: ProposalSpec) -> GameAction {
    view_standing(ctx)
        .iter()
        .find(|p| p.spec.share_of(me) >= threshold - 1e-9)
        .map(|p| GameAction::Accept(p.id))
        .unwrap_or(GameAction::Propose(fallback))
}

/// Smallest strict majority of `n` players.
fn majority_size(n: usize) -> usize {
    n / 2 + 1
}

/// Members of a minimal winning coalition around `me`: myself plus the
/// lowest-seat others, in seat order.
fn minimal_winning_members(ctx: &StageContext, me: &str) -> Vec<String> {
    let mut members = vec![me.to_string()];
    for name in ctx.living.iter().filter(|n| n.as_str() != me) {
        if members.len() >= majority_size(ctx.living.len()) {
            break;
        }
        members.push(name.clone());
    }
    members.sort_by_key(|n| seat_in(ctx, n));
    members
}

// Hupi level-k analysis.

fn binomial_table(max_n: usize) -> Vec<Vec<f64>> {
    let mut table = vec![vec![0.0; max_n + 1]; max_n + 1];
    for n in 0..=max_n {
        table[n][0] = 1.0;
        for k in 1..=n {
            table[n][k] = table[n - 1][k - 1] + if k < n { table[n - 1][k] } else { 0.0 };
        }
    }
    table
}

/// Probability that `bid` is the highest unique value when `opponents`
/// players draw independently from `pmf` (indexed by value - 1).
pub fn hupi_win_probability(pmf: &[f64], opponents: usize, bid: u32) -> f64 {
    let max_bid = pmf.len();
    let bid = bid as usize;
    if bid == 0 || bid > max_bid {
        return 0.0;
    }
    let binom = binomial_table(opponents);
    let mut prefix = vec![0.0; max_bid + 1];
    for v in 1..=max_bid {
        prefix[v] = prefix[v - 1] + pmf[v - 1];
    }

    // f[r] is the probability mass of assignments of the processed top
    // values that satisfy the win constraints and leave r opponents for
    // the remaining lower values.
    let mut f = vec![0.0; opponents + 1];
    f[opponents] = 1.0;
    for v in (bid..=max_bid).rev() {
        let p = if prefix[v] > 0.0 { pmf[v - 1] / prefix[v] } else { 0.0 };
        let mut next = vec![0.0; opponents + 1];
        for r in 0..=opponents {
            if f[r] == 0.0 {
                continue;
            }
            for c in 0..=r {
                let legal = if v == bid { c == 0 } else { c != 1 };
                if !legal {
                    continue;
                }
                let weight =
                    binom[r][c] * p.powi(c as i32) * (1.0 - p).powi((r - c) as i32);
                next[r - c] += f[r] * weight;
            }
        }
        f = next;
    }
    f.iter().sum()
}

/// Best response against opponents drawing iid from `pmf`, lowest bid on
/// ties.
fn hupi_best_response(pmf: &[f64], opponents: usize) -> u32 {
    let mut best_bid = 1;
    let mut best_p = -1.0;
    for bid in 1..=pmf.len() as u32 {
        let p = hupi_win_probability(pmf, opponents, bid);
        if p > best_p + 1e-12 {
            best_p = p;
            best_bid = bid;
        }
    }
    best_bid
}

/// The level-k bid: level 0 is uniform, each level best-responds to the
/// previous one.
pub fn hupi_klevel_bid(k: u32, opponents: usize, max_bid: u32) -> u32 {
    let mut pmf = vec![1.0 / f64::from(max_bid); max_bid as usize];
    let mut bid = 1;
    for _ in 0..k.max(1) {
        bid = hupi_best_response(&pmf, opponents);
        pmf = vec![0.0; max_bid as usize];
        pmf[(bid - 1) as usize] = 1.0;
    }
    bid
}

// Random play.

fn random_action(ctx: &StageContext, me: &str, rng: &mut ChaCha8Rng) -> GameAction {
    match ctx.game {
        GameKind::Survivor => {
            let others = living_others(ctx, me);
            let ammo = view_ammo(ctx);
            if others.is_empty() || ammo == 0 {
                return GameAction::Attack(BTreeMap::new());
            }
            let target = others[rng.gen_range(0..others.len())].to_string();
            let spend = rng.gen_range(0..=ammo);
            if spend == 0 {
                GameAction::Attack(BTreeMap::new())
            } else {
                GameAction::Attack([(target, spend)].into_iter().collect())
            }
        }
        GameKind::Tragedy => GameAction::Extract(rng.gen::<f64>() * view_stock(ctx)),
        GameKind::Coalition => {
            let standing = view_standing(ctx);
            match rng.gen_range(0..3) {
                0 => GameAction::Pass,
                1 if !standing.is_empty() => {
                    GameAction::Accept(standing[rng.gen_range(0..standing.len())].id)
                }
                1 => GameAction::Pass,
                _ => {
                    let mut members = vec![me.to_string()];
                    for name in living_others(ctx, me) {
                        if rng.gen::<bool>() {
                            members.push(name.to_string());
                        }
                    }
                    members.sort_by_key(|n| seat_in(ctx, n));
                    let prize = view_prize(ctx);
                    let weights: Vec<f64> =
                        members.iter().map(|_| 0.1 + rng.gen::<f64>()).collect();
                    let total: f64 = weights.iter().sum();
                    let mut split = BTreeMap::new();
                    let mut allocated = 0.0;
                    for (idx, name) in members.iter().enumerate() {
                        let share = if idx + 1 == members.len() {
                            prize - allocated
                        } else {
                            prize * weights[idx] / total
                        };
                        allocated += share;
                        split.insert(name.clone(), share);
                    }
                    GameAction::Propose(ProposalSpec { split })
                }
            }
        }
        GameKind::Scheduler => GameAction::Choose(rng.gen_range(0..ctx.roster.len())),
        GameKind::Hupi => GameAction::Bid(rng.gen_range(1..=view_max_bid(ctx))),
    }
}

fn random_prediction(
    ctx: &StageContext,
    target: &str,
    rng: &mut ChaCha8Rng,
) -> PredictionPayload {
    match ctx.game {
        GameKind::Survivor => {
            let candidates: Vec<Option<String>> = std::iter::once(None)
                .chain(
                    living_others(ctx, target)
                        .into_iter()
                        .map(|n| Some(n.to_string())),
                )
                .collect();
            PredictionPayload::Target(candidates[rng.gen_range(0..candidates.len())].clone())
        }
        GameKind::Tragedy => PredictionPayload::Extraction(rng.gen::<f64>() * view_stock(ctx)),
        GameKind::Coalition => {
            let stance = [Stance::Propose, Stance::Accept, Stance::Pass][rng.gen_range(0..3)];
            PredictionPayload::Stance(stance)
        }
        GameKind::Scheduler => PredictionPayload::Choice(rng.gen_range(0..ctx.roster.len())),
        GameKind::Hupi => PredictionPayload::Bid(rng.gen_range(1..=view_max_bid(ctx))),
    }
}

// Oracle play: a strong deterministic policy per game.

fn oracle_action(ctx: &StageContext, me: &str) -> GameAction {
    match ctx.game {
        GameKind::Tragedy => GameAction::Extract(view_stock(ctx)),
        GameKind::Hupi => {
            let opponents = ctx.living.len().saturating_sub(1).max(1);
            GameAction::Bid(hupi_klevel_bid(1, opponents, view_max_bid(ctx)))
        }
        GameKind::Scheduler => GameAction::Choose(lowest_living_seat_option(ctx)),
        GameKind::Coalition => {
            let m = majority_size(ctx.living.len());
            let threshold = view_prize(ctx) / m as f64;
            let members = minimal_winning_members(ctx, me);
            coalition_plan(ctx, me, threshold, even_split(&members, view_prize(ctx)))
        }
        GameKind::Survivor => match last_aggressor(ctx, me) {
            Some(enemy) if view_ammo(ctx) > 0 => {
                let spend = view_ammo(ctx).min(3);
                GameAction::Attack([(enemy, spend)].into_iter().collect())
            }
            _ => GameAction::Attack(BTreeMap::new()),
        },
    }
}

/// The living player who dealt `victim` the most damage last round,
/// ties broken by lowest seat.
fn last_aggressor(ctx: &StageContext, victim: &str) -> Option<String> {
    use crate::games::OutcomeDetail;
    let last = ctx.history.last()?;
    let OutcomeDetail::Survivor { attacks, .. } = &last.outcome.detail else {
        return None;
    };
    let mut damage: BTreeMap<String, u32> = BTreeMap::new();
    for attack in attacks.iter().filter(|a| a.to == victim) {
        *damage.entry(attack.from.clone()).or_insert(0) += attack.ammo;
    }
    damage
        .into_iter()
        .filter(|(name, _)| ctx.living.iter().any(|l| l == name))
        .max_by_key(|(name, dmg)| (*dmg, std::cmp::Reverse(seat_in(ctx, name))))
        .map(|(name, _)| name)
}

fn oracle_prediction(ctx: &StageContext, target: &str) -> PredictionPayload {
    match ctx.game {
        GameKind::Tragedy => PredictionPayload::Extraction(view_stock(ctx)),
        GameKind::Hupi => {
            let opponents = ctx.living.len().saturating_sub(1).max(1);
            PredictionPayload::Bid(hupi_klevel_bid(1, opponents, view_max_bid(ctx)))
        }
        GameKind::Scheduler => PredictionPayload::Choice(lowest_living_seat_option(ctx)),
        GameKind::Coalition => {
            let m = majority_size(ctx.living.len());
            let threshold = view_prize(ctx) / m as f64;
            let qualifies = view_standing(ctx)
                .iter()
                .any(|p| p.spec.share_of(target) >= threshold - 1e-9);
            PredictionPayload::Stance(if qualifies { Stance::Accept } else { Stance::Propose })
        }
        GameKind::Survivor => PredictionPayload::Target(last_aggressor(ctx, target)),
    }
}

// Greedy play: the maximal immediate claim, announced honestly.

fn greedy_action(ctx: &StageContext, me: &str) -> GameAction {
    match ctx.game {
        GameKind::Tragedy => GameAction::Extract(view_stock(ctx)),
        GameKind::Hupi => GameAction::Bid(view_max_bid(ctx)),
        GameKind::Scheduler => GameAction::Choose(ctx.seat),
        GameKind::Coalition => {
            let prize = view_prize(ctx);
            let members = minimal_winning_members(ctx, me);
            let mut split = BTreeMap::new();
            let own = prize * 0.6;
            split.insert(me.to_string(), own);
            let others: Vec<&String> = members.iter().filter(|n| n.as_str() != me).collect();
            let mut allocated = own;
            for (idx, name) in others.iter().enumerate() {
                let share = if idx + 1 == others.len() {
                    prize - allocated
                } else {
                    (prize - own) / others.len() as f64
                };
                allocated += share;
                split.insert((*name).clone(), share);
            }
            coalition_plan(ctx, me, prize * 0.6, ProposalSpec { split })
        }
        GameKind::Survivor => {
            let ammo = view_ammo(ctx);
            match living_others(ctx, me).first() {
                Some(victim) if ammo > 0 => {
                    GameAction::Attack([(victim.to_string(), ammo)].into_iter().collect())
                }
                _ => GameAction::Attack(BTreeMap::new()),
            }
        }
    }
}

fn greedy_intent(ctx: &StageContext, me: &str) -> Intent {
    match greedy_action(ctx, me) {
        GameAction::Extract(x) => Intent::Extract(x),
        GameAction::Bid(b) => Intent::Bid(b),
        GameAction::Choose(j) => Intent::ChooseOption(j),
        GameAction::Propose(_) => Intent::Propose,
        GameAction::Accept(id) => Intent::Accept(id),
        GameAction::Attack(spend) => {
            match crate::games::primary_target(&ctx.roster, &spend) {
                Some(victim) => Intent::AttackTarget(victim),
                None => Intent::Hold,
            }
        }
        GameAction::Pass => Intent::Hold,
    }
}

fn greedy_prediction(ctx: &StageContext, target: &str) -> PredictionPayload {
    match ctx.game {
        GameKind::Tragedy => PredictionPayload::Extraction(view_stock(ctx)),
        GameKind::Hupi => PredictionPayload::Bid(view_max_bid(ctx)),
        GameKind::Scheduler => PredictionPayload::Choice(seat_in(ctx, target)),
        GameKind::Coalition => PredictionPayload::Stance(Stance::Propose),
        GameKind::Survivor => PredictionPayload::Target(
            living_others(ctx, target).first().map(|n| n.to_string()),
        ),
    }
}

// Cooperator play: sustainable choices, adjusted by announced intents.

/// The cooperator's planned action given everything heard so far this
/// round. Used identically when announcing and when acting, so its
/// announcements stay honest.
fn cooperator_plan(
    ctx: &StageContext,
    me: &str,
    live_transcript: &[ConversationMessage],
) -> GameAction {
    let heard = heard_intents(ctx, live_transcript, me);
    match ctx.game {
        GameKind::Tragedy => {
            let stock = view_stock(ctx);
            let sustainable_total = stock / 3.0;
            let mut announced_total = 0.0;
            let mut announcers = 0usize;
            for name in living_others(ctx, me) {
                if let Some(Intent::Extract(x)) = last_intent_of(&heard, name) {
                    announced_total += x.max(0.0);
                    announcers += 1;
                }
            }
            let open_slots = (ctx.living.len() - announcers).max(1);
            let own = ((sustainable_total - announced_total).max(0.0) / open_slots as f64)
                .min(stock);
            GameAction::Extract(own)
        }
        GameKind::Scheduler => {
            let n = ctx.roster.len();
            let mut plan = ctx.seat;
            for (_, intent) in &heard {
                if let Intent::ChooseOption(j) = intent {
                    if *j < n {
                        plan = *j;
                    }
                }
            }
            GameAction::Choose(plan)
        }
        GameKind::Coalition => {
            let prize = view_prize(ctx);
            let threshold = prize / (2.0 * ctx.living.len() as f64);
            let members: Vec<String> = ctx.living.clone();
            coalition_plan(ctx, me, threshold, even_split(&members, prize))
        }
        GameKind::Survivor => GameAction::Attack(BTreeMap::new()),
        GameKind::Hupi => {
            let bid = (ctx.seat as u32 + 1).clamp(1, view_max_bid(ctx));
            GameAction::Bid(bid)
        }
    }
}

fn intent_of_action(ctx: &StageContext, action: &GameAction) -> Intent {
    match action {
        GameAction::Extract(x) => Intent::Extract(*x),
        GameAction::Choose(j) => Intent::ChooseOption(*j),
        GameAction::Bid(b) => Intent::Bid(*b),
        GameAction::Propose(_) => Intent::Propose,
        GameAction::Accept(id) => Intent::Accept(*id),
        GameAction::Pass => Intent::Hold,
        GameAction::Attack(spend) => {
            match crate::games::primary_target(&ctx.roster, spend) {
                Some(victim) => Intent::AttackTarget(victim),
                None => Intent::Hold,
            }
        }
    }
}

fn intent_to_payload(ctx: &StageContext, intent: &Intent) -> PredictionPayload {
    match intent {
        Intent::Extract(x) => PredictionPayload::Extraction(*x),
        Intent::ChooseOption(j) => PredictionPayload::Choice(*j),
        Intent::Bid(b) => PredictionPayload::Bid(*b),
        Intent::AttackTarget(name) => PredictionPayload::Target(Some(name.clone())),
        Intent::Hold => match ctx.game {
            GameKind::Survivor => PredictionPayload::Target(None),
            _ => PredictionPayload::Stance(Stance::Pass),
        },
        Intent::Propose => PredictionPayload::Stance(Stance::Propose),
        Intent::Accept(_) => PredictionPayload::Stance(Stance::Accept),
    }
}

/// One scripted seat. Holds the per-match RNG stream and, for the
/// mirror policy, the previously taken action.
pub struct ScriptedAgent {
    spec: BotSpec,
    rng: ChaCha8Rng,
    last_action: Option<GameAction>,
}

/// Builds the scripted agent for a seat, with its RNG stream derived
/// from the match seed and seat index.
pub fn scripted_agent(spec: BotSpec, match_seed: u64, seat: usize) -> ScriptedAgent {
    let seed = seeds::mix(&[match_seed, SCRIPTED_STREAM_SALT, seat as u64]);
    ScriptedAgent {
        spec,
        rng: ChaCha8Rng::seed_from_u64(seed),
        last_action: None,
    }
}

impl ScriptedAgent {
    /// Re-anchors a remembered action to the current round so repeating
    /// it stays legal: stale accept ids become passes, attack spends
    /// shrink to the remaining budget and drop dead targets.
    fn legalize(&self, ctx: &StageContext, action: GameAction) -> GameAction {
        match action {
            GameAction::Attack(spend) => {
                let mut budget = view_ammo(ctx);
                let mut kept = BTreeMap::new();
                for (target, ammo) in spend {
                    if !ctx.living.contains(&target) || target == ctx.agent {
                        continue;
                    }
                    let spend_here = ammo.min(budget);
                    budget -= spend_here;
                    if spend_here > 0 {
                        kept.insert(target, spend_here);
                    }
                }
                GameAction::Attack(kept)
            }
            GameAction::Accept(id) => {
                if view_standing(ctx).iter().any(|p| p.id == id) {
                    GameAction::Accept(id)
                } else {
                    GameAction::Pass
                }
            }
            other => other,
        }
    }

    fn decide(&mut self, ctx: &StageContext) -> GameAction {
        let me = ctx.agent.clone();
        match self.spec.kind {
            BotKind::Silent => ctx_default_action(ctx),
            BotKind::Random => random_action(ctx, &me, &mut self.rng),
            BotKind::Greedy => greedy_action(ctx, &me),
            BotKind::Cooperator => cooperator_plan(ctx, &me, &[]),
            BotKind::Mirror => match self.last_action.clone() {
                Some(previous) => self.legalize(ctx, previous),
                None => ctx_default_action(ctx),
            },
            BotKind::KLevel => match ctx.game {
                GameKind::Hupi => {
                    let opponents = ctx.living.len().saturating_sub(1).max(1);
                    GameAction::Bid(hupi_klevel_bid(
                        self.spec.k,
                        opponents,
                        view_max_bid(ctx),
                    ))
                }
                _ => ctx_default_action(ctx),
            },
            BotKind::NoisyOracle => {
                if self.rng.gen::<f64>() < self.spec.skill {
                    oracle_action(ctx, &me)
                } else {
                    random_action(ctx, &me, &mut self.rng)
                }
            }
        }
    }
}

impl AgentHandle for ScriptedAgent {
    fn converse(
        &mut self,
        ctx: &StageContext,
        _partner: &str,
        transcript: &[ConversationMessage],
    ) -> Result<String, String> {
        let me = ctx.agent.clone();
        let text = match self.spec.kind {
            BotKind::Greedy => {
                let intent = greedy_intent(ctx, &me);
                format!("I take what the rules allow. {}", render_intent(&intent))
            }
            BotKind::Cooperator => {
                let plan = cooperator_plan(ctx, &me, transcript);
                let intent = intent_of_action(ctx, &plan);
                format!(
                    "Let's find something that works for everyone. {}",
                    render_intent(&intent)
                )
            }
            _ => String::new(),
        };
        Ok(text)
    }

    fn predict(
        &mut self,
        ctx: &StageContext,
        target: &str,
    ) -> Result<PredictionPayload, String> {
        let payload = match self.spec.kind {
            BotKind::Silent => ctx_neutral_prediction(ctx, target),
            BotKind::Random => random_prediction(ctx, target, &mut self.rng),
            BotKind::Greedy => greedy_prediction(ctx, target),
            BotKind::Cooperator => {
                let heard = heard_intents(ctx, &[], &ctx.agent.clone());
                match last_intent_of(&heard, target) {
                    Some(intent) => intent_to_payload(ctx, &intent),
                    None => facet_from_history(ctx, target)
                        .unwrap_or_else(|| ctx_neutral_prediction(ctx, target)),
                }
            }
            BotKind::Mirror => facet_from_history(ctx, target)
                .unwrap_or_else(|| ctx_neutral_prediction(ctx, target)),
            BotKind::KLevel => match ctx.game {
                GameKind::Hupi if self.spec.k >= 2 => {
                    let opponents = ctx.living.len().saturating_sub(1).max(1);
                    PredictionPayload::Bid(hupi_klevel_bid(
                        self.spec.k - 1,
                        opponents,
                        view_max_bid(ctx),
                    ))
                }
                _ => ctx_neutral_prediction(ctx, target),
            },
            BotKind::NoisyOracle => {
                if self.rng.gen::<f64>() < self.spec.skill {
                    oracle_prediction(ctx, target)
                } else {
                    random_prediction(ctx, target, &mut self.rng)
                }
            }
        };
        Ok(payload)
    }

    fn act(&mut self, ctx: &StageContext) -> Result<AgentTurn, String> {
        let action = self.decide(ctx);
        self.last_action = Some(action.clone());
        Ok(AgentTurn { reasoning: String::new(), action, defaulted: false })
    }
}
