//! Prompt construction for model-driven seats.
//!
//! Each game has two narrative framings, A and B, that dress identical
//! rules in different stories. The rule text, payoffs, and submission
//! grammar are word-for-word the same across framings so that any
//! behavioral difference between them is attributable to the story
//! alone.

use std::fmt::Write as _;

use crate::protocol::{GameView, StageContext};
use crate::types::{ConversationMessage, Framing, GameKind};

/// The story a seat is told, per game and framing.
fn scenario(game: GameKind, framing: Framing) -> &'static str {
    match (game, framing) {
        (GameKind::Survivor, Framing::A) => {
            "You are a gunslinger in a dusty frontier standoff. The other \
             participants are rival gunslingers circling the same town square."
        }
        (GameKind::Survivor, Framing::B) => {
            "You are a pirate captain in a cove where rival crews have \
             cornered each other. The other participants are rival captains."
        }
        (GameKind::Tragedy, Framing::A) => {
            "You are one of the fishing crews working a shared lake. The \
             other participants are the other crews on the same water."
        }
        (GameKind::Tragedy, Framing::B) => {
            "You are one of the herders grazing a common pasture. The other \
             participants are the other herders using the same land."
        }
        (GameKind::Coalition, Framing::A) => {
            "You are a startup founder negotiating how to split the equity \
             of a joint venture with the other founders."
        }
        (GameKind::Coalition, Framing::B) => {
            "You are a party leader negotiating how to divide cabinet posts \
             after an election left no party with a majority."
        }
        (GameKind::Scheduler, Framing::A) => {
            "You are a colleague trying to schedule a recurring team meeting \
             in a slot that everyone will actually attend."
        }
        (GameKind::Scheduler, Framing::B) => {
            "You are one of a group of friends picking a restaurant for a \
             shared dinner that only happens if everyone agrees."
        }
        (GameKind::Hupi, Framing::A) => {
            "You are a bidder on the floor of an auction house running a \
             sealed-bid novelty lot."
        }
        (GameKind::Hupi, Framing::B) => {
            "You are a player at a carnival number booth where everyone \
             secretly picks a number each round."
        }
    }
}

/// The exact rules, identical across framings.
fn rules(ctx: &StageContext) -> String {
    let n = ctx.roster.len();
    match ctx.game {
        GameKind::Survivor => format!(
            "Rules: each of the {n} participants starts with 3 lives and 5 \
             ammo for the whole match. Each round everyone simultaneously \
             distributes any amount of remaining ammo as attacks on others, \
             or holds. Each incoming ammo point removes one life; at zero \
             lives you are eliminated. Your reward is the number of the \
             round in which you were eliminated (the first round is round \
             1), or {max} if you survive all {max} rounds. If you are ever \
             the only survivor you immediately score {max} plus a bonus of \
             5. The match ends when one or zero participants remain or \
             after round {max}. If you submit nothing, you hold.",
            max = ctx.max_rounds
        ),
        GameKind::Tragedy => format!(
            "Rules: a shared stock starts at 100.0. Each round all {n} \
             participants simultaneously demand an amount. If total demand \
             is at most the stock everyone gets their demand; otherwise the \
             stock is split in proportion to demands and drops to zero. \
             After harvesting, the remaining stock regrows by a factor of \
             1.5, capped at 100.0. Your reward is your total haul over \
             {max} rounds. If you submit nothing, you demand 0.",
            max = ctx.max_rounds
        ),
        GameKind::Coalition => format!(
            "Rules: a prize of 100.0 goes to the first coalition of more \
             than half of the {n} participants that agrees on a split. Each \
             round you may propose a split over any such group, accept an \
             existing proposal by id, or pass. A proposal forms the moment \
             every member listed in it has endorsed it (proposing an \
             identical split counts as endorsing). Members of the formed \
             coalition get their listed shares; everyone else gets 0. If \
             nothing forms within {max} rounds everyone gets 0. If you \
             submit nothing, you pass.",
            max = ctx.max_rounds
        ),
        GameKind::Scheduler => format!(
            "Rules: there are {n} options, numbered 0 to {top}. Each round \
             all {n} participants simultaneously pick an option; the match \
             ends when everyone picks the same one. Each participant has \
             their own private value for each option, between 1 and {n} \
             points; you only know your own values. Agreeing on an option \
             scores you your value for it. No agreement within {max} \
             rounds scores everyone 0. If you submit nothing, you pick \
             option {seat}.",
            top = n - 1,
            max = ctx.max_rounds,
            seat = ctx.seat
        ),
        GameKind::Hupi => format!(
            "Rules: each round all {n} participants secretly bid an integer \
             from 1 to {m}. The highest bid chosen by exactly one \
             participant wins the round; if every bid is shared, nobody \
             wins. Your reward is your number of round wins over {max} \
             rounds. If you submit nothing, you bid 1.",
            m = 10 * n,
            max = ctx.max_rounds
        ),
    }
}

fn protocol_summary(ctx: &StageContext) -> String {
    let comm = if ctx.communication {
        "Each round has three phases: private one-on-one conversations with \
         every other participant (two messages each, at most 500 characters \
         per message), then a prediction phase where you forecast what each \
         other participant will do, then simultaneous actions."
    } else {
        "Each round has two phases: a prediction phase where you forecast \
         what each other participant will do, then simultaneous actions. \
         There is no communication in this match."
    };
    format!(
        "{comm} Participants, in seat order: {}. You are {}.",
        ctx.roster.join(", "),
        ctx.agent
    )
}

/// The persona-and-rules message that opens every exchange.
pub fn system_prompt(ctx: &StageContext) -> String {
    format!(
        "{}\n\n{}\n\n{}",
        scenario(ctx.game, ctx.framing),
        rules(ctx),
        protocol_summary(ctx)
    )
}

fn describe_view(ctx: &StageContext) -> String {
    match &ctx.view {
        GameView::Survivor { own_lives, own_ammo, alive, eliminated } => {
            let mut s = format!(
                "You have {own_lives} lives and {own_ammo} ammo. Still standing: {}.",
                alive.join(", ")
            );
            for (name, round) in eliminated {
                let _ = write!(s, " {name} was eliminated in round {}.", round + 1);
            }
            s
        }
        GameView::Tragedy { stock, hauls } => {
            let mut s = format!("The stock is at {stock:.2}.");
            if hauls.values().any(|h| *h > 0.0) {
                let parts: Vec<String> =
                    hauls.iter().map(|(name, h)| format!("{name} {h:.2}")).collect();
                let _ = write!(s, " Total hauls so far: {}.", parts.join(", "));
            }
            s
        }
        GameView::Coalition { prize, standing, formed } => {
            let mut s = format!("The prize is {prize:.0}.");
            if let Some(done) = formed {
                let parts: Vec<String> = done
                    .split
                    .iter()
                    .map(|(name, share)| format!("{name} {share:.1}"))
                    .collect();
                let _ = write!(s, " A coalition has formed: {}.", parts.join(", "));
            } else if standing.is_empty() {
                s.push_str(" No proposals are on the table.");
            } else {
                for p in standing {
                    let parts: Vec<String> = p
                        .spec
                        .split
                        .iter()
                        .map(|(name, share)| format!("{name} {share:.1}"))
                        .collect();
                    let _ = write!(
                        s,
                        " Proposal {} by {}: {}.",
                        p.id,
                        p.proposer,
                        parts.join(", ")
                    );
                }
            }
            s
        }
        GameView::Scheduler { n_options, own_preferences } => {
            let parts: Vec<String> = own_preferences
                .iter()
                .enumerate()
                .map(|(j, v)| format!("option {j} is worth {v}"))
                .collect();
            format!(
                "There are {n_options} options. Your private values: {}.",
                parts.join(", ")
            )
        }
        GameView::Hupi { max_bid, wins } => {
            let mut s = format!("Bids run from 1 to {max_bid}.");
            if wins.values().any(|w| *w > 0) {
                let parts: Vec<String> =
                    wins.iter().map(|(name, w)| format!("{name} {w}")).collect();
                let _ = write!(s, " Round wins so far: {}.", parts.join(", "));
            }
            s
        }
    }
}

pub(crate) fn describe_outcome(detail: &crate::games::OutcomeDetail) -> String {
    use crate::games::OutcomeDetail;
    match detail {
        OutcomeDetail::Survivor { attacks, eliminated, .. } => {
            let mut parts: Vec<String> = attacks
                .iter()
                .map(|a| format!("{} hit {} with {} ammo", a.from, a.to, a.ammo))
                .collect();
            if parts.is_empty() {
                parts.push("nobody attacked".into());
            }
            for name in eliminated {
                parts.push(format!("{name} was eliminated"));
            }
            parts.join("; ")
        }
        OutcomeDetail::Tragedy { hauls, rationed, stock_after } => {
            let parts: Vec<String> = hauls
                .iter()
                .map(|(name, h)| format!("{name} hauled {h:.1}"))
                .collect();
            let note = if *rationed { "; demand exceeded the stock and was rationed" } else { "" };
            format!("{}{note}; stock now {stock_after:.1}", parts.join(", "))
        }
        OutcomeDetail::Coalition { proposals, accepts, formed } => {
            let mut parts = Vec::new();
            for p in proposals {
                let split: Vec<String> = p
                    .spec
                    .split
                    .iter()
                    .map(|(name, share)| format!("{name}={share:.1}"))
                    .collect();
                parts.push(format!(
                    "{} proposed ({}) as proposal {}",
                    p.proposer,
                    split.join(", "),
                    p.id
                ));
            }
            for a in accepts {
                parts.push(format!("{} accepted proposal {}", a.agent, a.proposal_id));
            }
            if let Some(done) = formed {
                parts.push(format!("proposal {} formed a coalition", done.proposal_id));
            }
            if parts.is_empty() {
                parts.push("everyone passed".into());
            }
            parts.join("; ")
        }
        OutcomeDetail::Scheduler { choices, agreed } => {
            let parts: Vec<String> =
                choices.iter().map(|(name, j)| format!("{name} picked {j}")).collect();
            match agreed {
                Some(j) => format!("{}; agreement on option {j}", parts.join(", ")),
                None => format!("{}; no agreement", parts.join(", ")),
            }
        }
        OutcomeDetail::Hupi { bids, winner } => {
            let parts: Vec<String> =
                bids.iter().map(|(name, b)| format!("{name} bid {b}")).collect();
            match winner {
                Some(name) => format!("{}; {name} won the round", parts.join(", ")),
                None => format!("{}; no unique bid, nobody won", parts.join(", ")),
            }
        }
    }
}

fn describe_history(ctx: &StageContext) -> String {
    if ctx.history.is_empty() {
        return "This is the first round.".into();
    }
    let mut s = String::new();
    for public in &ctx.history {
        let _ = writeln!(
            s,
            "Round {}: {}",
            public.round + 1,
            describe_outcome(&public.outcome.detail)
        );
    }
    s.trim_end().to_string()
}

fn describe_round_conversations(ctx: &StageContext) -> String {
    let mut s = String::new();
    for conv in ctx.conversations.iter().filter(|c| c.round == ctx.round) {
        let partner = conv.partner_of(&ctx.agent).unwrap_or_default();
        let _ = writeln!(s, "Your conversation with {partner}:");
        for msg in &conv.messages {
            let text = if msg.text.is_empty() { "(silence)" } else { &msg.text };
            let _ = writeln!(s, "  {}: {text}", msg.speaker);
        }
    }
    if s.is_empty() {
        "You have not spoken with anyone this round.".into()
    } else {
        s.trim_end().to_string()
    }
}

fn situation(ctx: &StageContext) -> String {
    format!(
        "Round {} of {}.\n{}\n\nHistory:\n{}",
        ctx.round + 1,
        ctx.max_rounds,
        describe_view(ctx),
        describe_history(ctx)
    )
}

const ACTION_FORMATS: &[(GameKind, &str)] = &[
    (
        GameKind::Survivor,
        "```action\nattack Name=2, OtherName=1\n```\nor\n```action\nhold\n```",
    ),
    (GameKind::Tragedy, "```action\nextract 12.5\n```"),
    (
        GameKind::Coalition,
        "```action\npropose Name=60, OtherName=40\n```\nor\n```action\naccept 3\n```\nor\n```action\npass\n```",
    ),
    (GameKind::Scheduler, "```action\nchoose 2\n```"),
    (GameKind::Hupi, "```action\nbid 17\n```"),
];

const PREDICTION_FORMATS: &[(GameKind, &str)] = &[
    (
        GameKind::Survivor,
        "```prediction\ntarget Name\n```\nor\n```prediction\nnone\n```",
    ),
    (GameKind::Tragedy, "```prediction\nextract 12.5\n```"),
    (
        GameKind::Coalition,
        "```prediction\npropose\n```\nor\n```prediction\naccept\n```\nor\n```prediction\npass\n```",
    ),
    (GameKind::Scheduler, "```prediction\nchoose 2\n```"),
    (GameKind::Hupi, "```prediction\nbid 17\n```"),
];

fn format_for(table: &'static [(GameKind, &'static str)], game: GameKind) -> &'static str {
    table
        .iter()
        .find(|(k, _)| *k == game)
        .map(|(_, f)| *f)
        .unwrap_or("")
}

/// The user message for a conversation turn with `partner`.
pub fn converse_prompt(
    ctx: &StageContext,
    partner: &str,
    transcript: &[ConversationMessage],
) -> String {
    let mut s = situation(ctx);
    s.push_str("\n\n");
    if transcript.is_empty() {
        let _ = write!(s, "You open a private conversation with {partner}.");
    } else {
        let _ = writeln!(s, "Your private conversation with {partner} so far:");
        for msg in transcript {
            let text = if msg.text.is_empty() { "(silence)" } else { &msg.text };
            let _ = writeln!(s, "  {}: {text}", msg.speaker);
        }
        s = s.trim_end().to_string();
    }
    let _ = write!(
        s,
        "\n\nReply with your next message to {partner}, under 500 characters. \
         Say only what you want them to hear."
    );
    s
}

/// The user message asking for a prediction about `target`.
pub fn predict_prompt(ctx: &StageContext, target: &str) -> String {
    format!(
        "{}\n\n{}\n\nPredict what {target} will do this round. Think briefly if \
         you need to, then end your reply with exactly one block in this \
         format:\n{}",
        situation(ctx),
        describe_round_conversations(ctx),
        format_for(PREDICTION_FORMATS, ctx.game)
    )
}

/// The user message asking for this round's reasoning and action.
pub fn act_prompt(ctx: &StageContext) -> String {
    format!(
        "{}\n\n{}\n\nDecide your action for this round. Explain your reasoning, \
         then end your reply with exactly one block in this format:\n{}",
        situation(ctx),
        describe_round_conversations(ctx),
        format_for(ACTION_FORMATS, ctx.game)
    )
}

/// The follow-up sent once when a submitted action fails validation.
pub fn invalid_action_reprompt(ctx: &StageContext, error: &str) -> String {
    format!(
        "That submission is not valid: {error}. Reply again with exactly one \
         block in this format:\n{}",
        format_for(ACTION_FORMATS, ctx.game)
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocol::{MatchJournal, StageKind};
    use crate::types::{AgentId, MatchSpec};

    fn context(game: GameKind, framing: Framing) -> StageContext {
        let spec = MatchSpec {
            game,
            framing,
            roster: vec![
                AgentId { name: "Ada".into(), model_key: "m0".into() },
                AgentId { name: "Ben".into(), model_key: "m1".into() },
                AgentId { name: "Cleo".into(), model_key: "m2".into() },
            ],
            communication: true,
            max_rounds: 10,
            seed: 5,
        };
        let state = crate::games::new_state(game, spec.display_names());
        MatchJournal::new().context(&spec, &spec.match_id(), &state, StageKind::Act, "Ada")
    }

    #[test]
    fn framings_share_rules_but_not_stories() {
        for game in GameKind::ALL {
            let a = context(game, Framing::A);
            let b = context(game, Framing::B);
            assert_eq!(rules(&a), rules(&b), "{game}: rules must be identical");
            assert_ne!(
                scenario(game, Framing::A),
                scenario(game, Framing::B),
                "{game}: stories must differ"
            );
        }
    }

    #[test]
    fn prompts_carry_the_submission_grammar() {
        for game in GameKind::ALL {
            let ctx = context(game, Framing::A);
            assert!(act_prompt(&ctx).contains("```action"), "{game}");
            assert!(predict_prompt(&ctx, "Ben").contains("```prediction"), "{game}");
        }
    }

    #[test]
    fn scheduler_prompt_reveals_only_own_preferences() {
        let ctx = context(GameKind::Scheduler, Framing::A);
        let prompt = act_prompt(&ctx);
        assert!(prompt.contains("option 0 is worth 3"));
        assert!(prompt.contains("Your private values"));
    }

    #[test]
    fn silent_match_prompt_says_so() {
        let mut ctx = context(GameKind::Hupi, Framing::A);
        ctx.communication = false;
        assert!(system_prompt(&ctx).contains("no communication"));
    }

    #[test]
    fn history_renders_round_outcomes() {
        use crate::games::{OutcomeDetail, RoundOutcome};
        use crate::protocol::PublicRound;
        let mut ctx = context(GameKind::Hupi, Framing::B);
        ctx.history.push(PublicRound {
            round: 0,
            outcome: RoundOutcome {
                defaulted: vec![],
                detail: OutcomeDetail::Hupi {
                    bids: [("Ada".to_string(), 4), ("Ben".to_string(), 7)]
                        .into_iter()
                        .collect(),
                    winner: Some("Ben".into()),
                },
            },
        });
        let text = describe_history(&ctx);
        assert!(text.contains("Ben bid 7"));
        assert!(text.contains("Ben won the round"));
    }
}
