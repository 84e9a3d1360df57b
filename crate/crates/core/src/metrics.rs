//! Behavioral metrics per agent and match.
//!
//! Seven metrics describe how an agent played, all scaled so that
//! higher means more of the named trait:
//!
//! * `tom`: accuracy of the agent's predictions about others' actions;
//! * `transparency`: accuracy of others' predictions about the agent;
//! * `assertiveness`: how much of the available action budget the
//!   agent's moves claimed;
//! * `influence`, `amenability`, `planning`, `learning`: judged on a
//!   1 to 5 scale by a model reading the match transcript.
//!
//! The first three are computed from the trace alone. Flagged material
//! is excluded everywhere: a defaulted prediction says nothing about
//! the predictor, and a defaulted action says nothing about the actor,
//! so neither side of such an exchange is scored.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::agents::llm::{ChatCompleter, ChatMessage};
use crate::agents::prompts::describe_outcome;
use crate::error::{ArenaError, Result};
use crate::games::{self, GameAction};
use crate::types::{Framing, GameKind, MatchRecord, RoundRecord};

/// Metric names, rule-based first, in canonical order.
pub const METRIC_NAMES: [&str; 7] = [
    "tom",
    "transparency",
    "assertiveness",
    "influence",
    "amenability",
    "planning",
    "learning",
];

/// The judged subset of [`METRIC_NAMES`].
pub const JUDGED_METRICS: [&str; 4] = ["influence", "amenability", "planning", "learning"];

/// One agent's metrics for one match. Metrics that could not be
/// measured are absent from `values`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricVector {
    pub model_key: String,
    pub match_id: String,
    pub game: GameKind,
    pub size: usize,
    pub framing: Framing,
    pub communication: bool,
    pub values: BTreeMap<String, f64>,
}

/// One judged score.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JudgeVerdict {
    pub match_id: String,
    pub judge: String,
    /// Display name of the judged agent within the match.
    pub subject: String,
    pub model_key: String,
    pub metric: String,
    pub score: u8,
}

/// Judging outcome over one or more matches.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct JudgeReport {
    pub verdicts: Vec<JudgeVerdict>,
    /// `(match_id, subject, metric)` triples whose replies never parsed.
    pub dropped: Vec<(String, String, String)>,
}

fn mean(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        None
    } else {
        Some(values.iter().sum::<f64>() / values.len() as f64)
    }
}

fn is_flagged(round: &RoundRecord, agent: &str) -> bool {
    round.outcome.defaulted.iter().any(|n| n == agent)
        || round
            .turns
            .iter()
            .any(|t| t.agent == agent && t.defaulted)
}

/// Computes `tom`, `transparency`, and `assertiveness` for every roster
/// member of a match, keyed by display name.
pub fn rule_based_metrics(
    record: &MatchRecord,
) -> Result<BTreeMap<String, BTreeMap<String, f64>>> {
    let mut state = games::new_state(record.spec.game, record.spec.display_names());
    let mut tom: BTreeMap<&str, Vec<f64>> = BTreeMap::new();
    let mut transparency: BTreeMap<&str, Vec<f64>> = BTreeMap::new();
    let mut assertive: BTreeMap<&str, Vec<f64>> = BTreeMap::new();

    for round in &record.rounds {
        let actions: BTreeMap<String, GameAction> = round
            .turns
            .iter()
            .map(|t| (t.agent.clone(), t.action.clone()))
            .collect();

        for turn in &round.turns {
            if !is_flagged(round, &turn.agent) {
                assertive
                    .entry(turn.agent.as_str())
                    .or_default()
                    .push(games::assertiveness(&state, &turn.agent, &turn.action));
            }
        }

        for prediction in &round.predictions {
            if prediction.defaulted || is_flagged(round, &prediction.target) {
                continue;
            }
            let Some(actual) = actions.get(&prediction.target) else {
                continue;
            };
            let score = games::prediction_score(&state, &prediction.payload, actual);
            tom.entry(prediction.predictor.as_str()).or_default().push(score);
            transparency.entry(prediction.target.as_str()).or_default().push(score);
        }

        let (next, _) = games::apply_round(&state, &actions)?;
        state = next;
    }

    let mut result = BTreeMap::new();
    for id in &record.spec.roster {
        let mut values = BTreeMap::new();
        let name = id.name.as_str();
        if let Some(v) = tom.get(name).and_then(|v| mean(v)) {
            values.insert("tom".to_string(), v);
        }
        if let Some(v) = transparency.get(name).and_then(|v| mean(v)) {
            values.insert("transparency".to_string(), v);
        }
        if let Some(v) = assertive.get(name).and_then(|v| mean(v)) {
            values.insert("assertiveness".to_string(), v);
        }
        result.insert(id.name.clone(), values);
    }
    Ok(result)
}

fn outgoing_messages(record: &MatchRecord, name: &str) -> String {
    let mut lines = Vec::new();
    for round in &record.rounds {
        for conv in &round.conversations {
            let Some(partner) = conv.partner_of(name) else { continue };
            for msg in conv.messages.iter().filter(|m| m.speaker == name && !m.text.is_empty())
            {
                lines.push(format!("[round {}] to {partner}: {}", round.round + 1, msg.text));
            }
        }
    }
    lines.join("\n")
}

fn incoming_messages(record: &MatchRecord, name: &str) -> String {
    let mut lines = Vec::new();
    for round in &record.rounds {
        for conv in &round.conversations {
            if conv.partner_of(name).is_none() {
                continue;
            }
            for msg in conv.messages.iter().filter(|m| m.speaker != name && !m.text.is_empty())
            {
                lines.push(format!(
                    "[round {}] from {}: {}",
                    round.round + 1,
                    msg.speaker,
                    msg.text
                ));
            }
        }
    }
    lines.join("\n")
}

fn action_log(record: &MatchRecord, name: &str) -> String {
    let mut lines = Vec::new();
    for round in &record.rounds {
        for turn in round.turns.iter().filter(|t| t.agent == name) {
            lines.push(format!(
                "[round {}] {name} did: {}",
                round.round + 1,
                crate::agents::grammar::render_action(&turn.action)
            ));
        }
        lines.push(format!(
            "[round {}] outcome: {}",
            round.round + 1,
            describe_outcome(&round.outcome.detail)
        ));
    }
    lines.join("\n")
}

fn reasoning_log(record: &MatchRecord, name: &str) -> String {
    let mut lines = Vec::new();
    for round in &record.rounds {
        for turn in round.turns.iter().filter(|t| t.agent == name && !t.reasoning.is_empty())
        {
            lines.push(format!("[round {}] {name} reasoned: {}", round.round + 1, turn.reasoning));
        }
    }
    lines.join("\n")
}

fn reasoning_outcome_sequence(record: &MatchRecord, name: &str) -> String {
    let mut lines = Vec::new();
    for round in &record.rounds {
        for turn in round.turns.iter().filter(|t| t.agent == name && !t.reasoning.is_empty())
        {
            lines.push(format!("[round {}] reasoning: {}", round.round + 1, turn.reasoning));
        }
        lines.push(format!(
            "[round {}] outcome: {}",
            round.round + 1,
            describe_outcome(&round.outcome.detail)
        ));
    }
    lines.join("\n")
}

/// The judged question per metric, with its anchor descriptions.
fn judge_question(metric: &str, name: &str) -> String {
    match metric {
        "influence" => format!(
            "How much did {name}'s messages shape what the other participants \
             went on to do? 1 means their words had no visible effect; 5 means \
             others clearly changed their behavior because of them."
        ),
        "amenability" => format!(
            "How much did {name} adjust their own actions in response to what \
             others said to them? 1 means they ignored every request; 5 means \
             they consistently incorporated what was asked of them."
        ),
        "planning" => format!(
            "How much multi-step planning does {name}'s reasoning show? 1 means \
             purely reactive single-round thinking; 5 means an explicit \
             multi-round plan that their actions follow through on."
        ),
        "learning" => format!(
            "How much did {name} adapt across rounds based on observed \
             outcomes? 1 means they repeated the same behavior regardless of \
             results; 5 means they visibly updated their approach as evidence \
             came in."
        ),
        _ => unreachable!("unknown judged metric"),
    }
}

/// The transcript material each judged metric looks at. Empty material
/// means the metric is not measurable for this agent in this match.
fn judge_material(record: &MatchRecord, name: &str, metric: &str) -> String {
    match metric {
        "influence" => {
            let said = outgoing_messages(record, name);
            if said.is_empty() {
                String::new()
            } else {
                format!("{said}\n\nWhat everyone then did:\n{}", action_log(record, name))
            }
        }
        "amenability" => {
            let heard = incoming_messages(record, name);
            if heard.is_empty() {
                String::new()
            } else {
                format!("{heard}\n\nWhat {name} then did:\n{}", action_log(record, name))
            }
        }
        "planning" => {
            let reasoning = reasoning_log(record, name);
            if reasoning.is_empty() {
                String::new()
            } else {
                format!("{reasoning}\n\nActions and outcomes:\n{}", action_log(record, name))
            }
        }
        "learning" => {
            let sequence = reasoning_outcome_sequence(record, name);
            if reasoning_log(record, name).is_empty() {
                String::new()
            } else {
                sequence
            }
        }
        _ => String::new(),
    }
}

fn judge_prompt(record: &MatchRecord, name: &str, metric: &str, material: &str) -> String {
    format!(
        "You are reviewing one participant's behavior in a {} game between \
         {} players, played over {} rounds.\n\nMaterial concerning {name}:\n\
         {material}\n\n{}\n\nExplain briefly, then end your reply with a line \
         of exactly the form `score: N` where N is an integer from 1 to 5.",
        record.spec.game,
        record.spec.roster.len(),
        record.rounds.len(),
        judge_question(metric, name)
    )
}

/// Parses the last `score:` line of a judge reply into 1..=5.
fn parse_score(reply: &str) -> Option<u8> {
    let line = reply
        .lines()
        .rev()
        .map(str::trim)
        .find_map(|l| l.to_ascii_lowercase().strip_prefix("score:").map(str::to_string))?;
    let score: u8 = line.trim().parse().ok()?;
    (1..=5).contains(&score).then_some(score)
}

/// Judges every applicable metric for every roster member of one match.
/// Unparseable replies get one correction prompt, then are dropped and
/// listed. Judging runs at temperature zero.
pub fn judge_match(
    judge_name: &str,
    completer: &dyn ChatCompleter,
    record: &MatchRecord,
) -> Result<JudgeReport> {
    let mut report = JudgeReport::default();
    for id in &record.spec.roster {
        for metric in JUDGED_METRICS {
            let material = judge_material(record, &id.name, metric);
            if material.is_empty() {
                continue;
            }
            let mut messages = vec![ChatMessage::user(judge_prompt(
                record, &id.name, metric, &material,
            ))];
            let reply = completer
                .complete(&messages, 0.0)
                .map_err(ArenaError::Llm)?;
            let score = match parse_score(&reply) {
                Some(score) => Some(score),
                None => {
                    messages.push(ChatMessage::assistant(reply));
                    messages.push(ChatMessage::user(
                        "Reply with exactly one line of the form `score: N` \
                         where N is an integer from 1 to 5."
                            .to_string(),
                    ));
                    let retry = completer
                        .complete(&messages, 0.0)
                        .map_err(ArenaError::Llm)?;
                    parse_score(&retry)
                }
            };
            match score {
                Some(score) => report.verdicts.push(JudgeVerdict {
                    match_id: record.match_id.clone(),
                    judge: judge_name.to_string(),
                    subject: id.name.clone(),
                    model_key: id.model_key.clone(),
                    metric: metric.to_string(),
                    score,
                }),
                None => report.dropped.push((
                    record.match_id.clone(),
                    id.name.clone(),
                    metric.to_string(),
                )),
            }
        }
    }
    Ok(report)
}

/// Assembles per-agent-per-match metric vectors from rule-based metrics
/// plus any judged verdicts for the same matches.
pub fn metric_vectors(
    records: &[MatchRecord],
    verdicts: &[JudgeVerdict],
) -> Result<Vec<MetricVector>> {
    let mut judged: BTreeMap<(&str, &str, &str), Vec<f64>> = BTreeMap::new();
    for v in verdicts {
        judged
            .entry((v.match_id.as_str(), v.subject.as_str(), v.metric.as_str()))
            .or_default()
            .push(f64::from(v.score));
    }

    let mut vectors = Vec::new();
    for record in records {
        let rule_based = rule_based_metrics(record)?;
        for id in &record.spec.roster {
            let mut values = rule_based.get(&id.name).cloned().unwrap_or_default();
            for metric in JUDGED_METRICS {
                let key = (record.match_id.as_str(), id.name.as_str(), metric);
                if let Some(v) = judged.get(&key).and_then(|v| mean(v)) {
                    values.insert(metric.to_string(), v);
                }
            }
            vectors.push(MetricVector {
                model_key: id.model_key.clone(),
                match_id: record.match_id.clone(),
                game: record.spec.game,
                size: record.spec.roster.len(),
                framing: record.spec.framing,
                communication: record.spec.communication,
                values,
            });
        }
    }
    Ok(vectors)
}

/// Agreement between two judges over the verdicts they share.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AgreementReport {
    pub pairs: usize,
    pub mean_absolute_difference: f64,
    pub exact_rate: f64,
    pub within_one_rate: f64,
}

/// Pairs verdicts on `(match, subject, metric)` and summarizes how far
/// apart the two judges land.
pub fn judge_agreement(a: &[JudgeVerdict], b: &[JudgeVerdict]) -> Result<AgreementReport> {
    let index: BTreeMap<(&str, &str, &str), u8> = b
        .iter()
        .map(|v| ((v.match_id.as_str(), v.subject.as_str(), v.metric.as_str()), v.score))
        .collect();
    let mut differences = Vec::new();
    for v in a {
        let key = (v.match_id.as_str(), v.subject.as_str(), v.metric.as_str());
        if let Some(other) = index.get(&key) {
            differences.push((f64::from(v.score) - f64::from(*other)).abs());
        }
    }
    if differences.is_empty() {
        return Err(ArenaError::Validation(
            "the two judges share no verdicts to compare".into(),
        ));
    }
    let pairs = differences.len();
    let mean_absolute_difference = differences.iter().sum::<f64>() / pairs as f64;
    let exact = differences.iter().filter(|d| **d == 0.0).count();
    let within_one = differences.iter().filter(|d| **d <= 1.0).count();
    Ok(AgreementReport {
        pairs,
        mean_absolute_difference,
        exact_rate: exact as f64 / pairs as f64,
        within_one_rate: within_one as f64 / pairs as f64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::Mutex;

    use crate::games::{OutcomeDetail, PredictionPayload, RoundOutcome};
    use crate::types::{
        AgentId, ConversationMessage, ConversationRecord, MatchSpec, MatchStatus,
        PredictionRecord, TurnRecord, SCHEMA_VERSION,
    };

    struct FnCompleter<F>(F, Mutex<usize>);

    impl<F: Fn(usize, &[ChatMessage]) -> std::result::Result<String, String> + Send + Sync>
        ChatCompleter for FnCompleter<F>
    {
        fn complete(
            &self,
            messages: &[ChatMessage],
            _temperature: f64,
        ) -> std::result::Result<String, String> {
            let mut count = self.1.lock().unwrap();
            let call = *count;
            *count += 1;
            (self.0)(call, messages)
        }
    }

    fn hupi_spec() -> MatchSpec {
        MatchSpec {
            game: GameKind::Hupi,
            framing: Framing::A,
            roster: vec![
                AgentId { name: "Ada".into(), model_key: "k_ada".into() },
                AgentId { name: "Ben".into(), model_key: "k_ben".into() },
            ],
            communication: true,
            max_rounds: 2,
            seed: 1,
        }
    }

    fn bid_turn(round: u32, agent: &str, bid: u32, defaulted: bool) -> TurnRecord {
        TurnRecord {
            round,
            agent: agent.into(),
            reasoning: format!("round {round} thinking of {agent}"),
            action: GameAction::Bid(bid),
            defaulted,
        }
    }

    fn bid_prediction(
        round: u32,
        predictor: &str,
        target: &str,
        bid: u32,
        defaulted: bool,
    ) -> PredictionRecord {
        PredictionRecord {
            round,
            predictor: predictor.into(),
            target: target.into(),
            payload: PredictionPayload::Bid(bid),
            defaulted,
        }
    }

    fn hupi_outcome(ada: u32, ben: u32, winner: Option<&str>, defaulted: &[&str]) -> RoundOutcome {
        RoundOutcome {
            defaulted: defaulted.iter().map(|s| s.to_string()).collect(),
            detail: OutcomeDetail::Hupi {
                bids: [("Ada".to_string(), ada), ("Ben".to_string(), ben)]
                    .into_iter()
                    .collect(),
                winner: winner.map(str::to_string),
            },
        }
    }

    fn two_round_record() -> MatchRecord {
        let spec = hupi_spec();
        MatchRecord {
            schema_version: SCHEMA_VERSION,
            match_id: spec.match_id(),
            spec,
            rounds: vec![
                RoundRecord {
                    round: 0,
                    conversations: vec![ConversationRecord {
                        round: 0,
                        participants: ["Ada".into(), "Ben".into()],
                        messages: vec![
                            ConversationMessage {
                                speaker: "Ada".into(),
                                text: "let's both go low".into(),
                                truncated: false,
                                failed: false,
                            },
                            ConversationMessage {
                                speaker: "Ben".into(),
                                text: "fine by me".into(),
                                truncated: false,
                                failed: false,
                            },
                        ],
                    }],
                    predictions: vec![
                        bid_prediction(0, "Ada", "Ben", 7, false),
                        bid_prediction(0, "Ben", "Ada", 17, false),
                    ],
                    turns: vec![bid_turn(0, "Ada", 7, false), bid_turn(0, "Ben", 7, false)],
                    outcome: hupi_outcome(7, 7, None, &[]),
                },
                RoundRecord {
                    round: 1,
                    conversations: vec![],
                    predictions: vec![
                        bid_prediction(1, "Ada", "Ben", 9, false),
                        bid_prediction(1, "Ben", "Ada", 5, false),
                    ],
                    turns: vec![bid_turn(1, "Ada", 5, false), bid_turn(1, "Ben", 9, false)],
                    outcome: hupi_outcome(5, 9, Some("Ben"), &[]),
                },
            ],
            rewards: [("Ada".to_string(), 0.0), ("Ben".to_string(), 1.0)]
                .into_iter()
                .collect(),
            status: MatchStatus::Completed,
        }
    }

    #[test]
    fn rule_based_metrics_match_hand_computation() {
        let record = two_round_record();
        let metrics = rule_based_metrics(&record).unwrap();
        let ada = &metrics["Ada"];
        let ben = &metrics["Ben"];

        assert!((ada["tom"] - 1.0).abs() < 1e-12, "both of Ada's predictions were exact");
        let expected_ben_tom = ((1.0 - 10.0 / 19.0) + 1.0) / 2.0;
        assert!((ben["tom"] - expected_ben_tom).abs() < 1e-12, "got {}", ben["tom"]);

        assert!((ada["transparency"] - expected_ben_tom).abs() < 1e-12);
        assert!((ben["transparency"] - 1.0).abs() < 1e-12);

        assert!((ada["assertiveness"] - 0.3).abs() < 1e-12);
        assert!((ben["assertiveness"] - 0.4).abs() < 1e-12);
    }

    #[test]
    fn flagged_material_is_excluded_from_both_sides() {
        let mut record = two_round_record();
        record.rounds[0].turns[1].defaulted = true;
        record.rounds[0].turns[1].action = GameAction::Bid(1);
        record.rounds[0].outcome = hupi_outcome(7, 1, Some("Ada"), &[]);
        record.rewards = [("Ada".to_string(), 1.0), ("Ben".to_string(), 1.0)]
            .into_iter()
            .collect();

        let metrics = rule_based_metrics(&record).unwrap();
        let ada = &metrics["Ada"];
        let ben = &metrics["Ben"];

        assert!(
            (ada["tom"] - 1.0).abs() < 1e-12,
            "Ada's round-0 prediction about flagged Ben is dropped, round 1 was exact"
        );
        assert!((ben["transparency"] - 1.0).abs() < 1e-12, "only round 1 counts");
        assert!(
            (ben["assertiveness"] - 0.45).abs() < 1e-12,
            "flagged round drops out: only the round-1 bid of 9 counts"
        );
        assert!((ben["tom"] - expected_flagged_ben_tom()).abs() < 1e-12);
    }

    fn expected_flagged_ben_tom() -> f64 {
        // Ben's own predictions both count: his round-0 guess of 17 vs
        // Ada's actual 7, then an exact round-1 guess.
        ((1.0 - 10.0 / 19.0) + 1.0) / 2.0
    }

    #[test]
    fn defaulted_predictions_do_not_count_for_anyone() {
        let mut record = two_round_record();
        record.rounds[0].predictions[0].defaulted = true;
        let metrics = rule_based_metrics(&record).unwrap();
        assert!((metrics["Ada"]["tom"] - 1.0).abs() < 1e-12, "round 1 only");
        assert!(
            (metrics["Ben"]["transparency"] - 1.0).abs() < 1e-12,
            "the dropped prediction was about Ben"
        );
    }

    #[test]
    fn judge_scores_every_applicable_metric() {
        let completer = FnCompleter(
            |_, _: &[ChatMessage]| Ok("Reasonable behavior.\nscore: 4".to_string()),
            Mutex::new(0),
        );
        let record = two_round_record();
        let report = judge_match("judge-a", &completer, &record).unwrap();
        assert_eq!(report.verdicts.len(), 8, "4 metrics x 2 agents");
        assert!(report.dropped.is_empty());
        assert!(report.verdicts.iter().all(|v| v.score == 4));
        assert!(report.verdicts.iter().any(|v| v.subject == "Ada" && v.metric == "influence"));
        assert_eq!(report.verdicts[0].judge, "judge-a");
    }

    #[test]
    fn unparseable_judgments_get_one_retry_then_drop() {
        let completer = FnCompleter(
            |call, messages: &[ChatMessage]| {
                if call == 0 {
                    Ok("a 4 out of 5 I suppose".to_string())
                } else if call == 1 {
                    assert!(messages.len() == 3, "retry carries the exchange");
                    Ok("score: 3".to_string())
                } else {
                    Ok("still rambling".to_string())
                }
            },
            Mutex::new(0),
        );
        let mut record = two_round_record();
        record.spec.roster.truncate(1);
        record.rounds[0].predictions.clear();
        record.rounds[1].predictions.clear();
        let report = judge_match("judge-a", &completer, &record).unwrap();
        let scored: Vec<u8> = report.verdicts.iter().map(|v| v.score).collect();
        assert_eq!(scored, vec![3], "first metric recovers on retry");
        assert_eq!(report.dropped.len(), 3, "later metrics never parse");
    }

    #[test]
    fn judges_skip_what_they_cannot_see() {
        let counter = Mutex::new(0);
        let completer = FnCompleter(
            |_, _: &[ChatMessage]| Ok("score: 2".to_string()),
            counter,
        );
        let mut record = two_round_record();
        for round in &mut record.rounds {
            round.conversations.clear();
            for turn in &mut round.turns {
                turn.reasoning.clear();
            }
        }
        let report = judge_match("judge-a", &completer, &record).unwrap();
        assert!(report.verdicts.is_empty());
        assert!(report.dropped.is_empty());
        assert_eq!(*completer.1.lock().unwrap(), 0, "no material, no calls");
    }

    #[test]
    fn metric_vectors_merge_rules_and_verdicts() {
        let record = two_round_record();
        let verdicts = vec![
            JudgeVerdict {
                match_id: record.match_id.clone(),
                judge: "judge-a".into(),
                subject: "Ada".into(),
                model_key: "k_ada".into(),
                metric: "influence".into(),
                score: 5,
            },
            JudgeVerdict {
                match_id: record.match_id.clone(),
                judge: "judge-a".into(),
                subject: "Ada".into(),
                model_key: "k_ada".into(),
                metric: "influence".into(),
                score: 3,
            },
        ];
        let vectors = metric_vectors(&[record], &verdicts).unwrap();
        assert_eq!(vectors.len(), 2);
        let ada = vectors.iter().find(|v| v.model_key == "k_ada").unwrap();
        assert_eq!(ada.values["influence"], 4.0, "two verdicts average");
        assert!(ada.values.contains_key("tom"));
        assert!(
            !ada.values.contains_key("planning"),
            "unjudged metrics stay missing"
        );
        let ben = vectors.iter().find(|v| v.model_key == "k_ben").unwrap();
        assert!(!ben.values.contains_key("influence"));
        assert_eq!(ben.game, GameKind::Hupi);
        assert_eq!(ben.size, 2);
    }

    #[test]
    fn agreement_summarizes_shared_verdicts() {
        let verdict = |judge: &str, subject: &str, metric: &str, score: u8| JudgeVerdict {
            match_id: "m".into(),
            judge: judge.into(),
            subject: subject.into(),
            model_key: format!("k_{subject}"),
            metric: metric.into(),
            score,
        };
        let a = vec![
            verdict("a", "Ada", "influence", 4),
            verdict("a", "Ada", "planning", 2),
            verdict("a", "Ben", "influence", 5),
            verdict("a", "Ben", "learning", 1),
        ];
        let b = vec![
            verdict("b", "Ada", "influence", 4),
            verdict("b", "Ada", "planning", 4),
            verdict("b", "Ben", "influence", 4),
        ];
        let report = judge_agreement(&a, &b).unwrap();
        assert_eq!(report.pairs, 3);
        assert!((report.mean_absolute_difference - 1.0).abs() < 1e-12);
        assert!((report.exact_rate - 1.0 / 3.0).abs() < 1e-12);
        assert!((report.within_one_rate - 2.0 / 3.0).abs() < 1e-12);

        assert!(judge_agreement(&a, &[]).is_err());
    }
}
