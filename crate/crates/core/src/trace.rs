//! JSONL gameplay traces: one file per match, one event per line.
//!
//! Line-per-event keeps partially written files useful: a crash mid-match
//! loses at most one line, every complete prefix is parseable, and
//! resumption only needs to check whether a `match_result` line exists.
//! Lines are type-tagged so readers can skip kinds they do not know, and
//! every line is self-describing enough to be grepped in isolation.
//!
//! Only `match_header` and `match_result` carry wall-clock fields; all
//! other lines are pure functions of seed and config, which is what makes
//! byte-level determinism checks possible.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{ArenaError, Result};
use crate::games::{GameAction, PredictionPayload, RoundOutcome};
use crate::types::{
    ConversationMessage, ConversationRecord, MatchRecord, MatchSpec, MatchStatus,
    PredictionRecord, RoundRecord, TurnRecord, SCHEMA_VERSION,
};

/// One line of a trace file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum TraceLine {
    MatchHeader {
        schema_version: u32,
        match_id: String,
        spec: MatchSpec,
        wall_ms: u64,
    },
    ConversationTurn {
        round: u32,
        participants: [String; 2],
        speaker: String,
        text: String,
        #[serde(default, skip_serializing_if = "std::ops::Not::not")]
        truncated: bool,
        #[serde(default, skip_serializing_if = "std::ops::Not::not")]
        failed: bool,
    },
    Prediction {
        round: u32,
        predictor: String,
        target: String,
        payload: PredictionPayload,
        #[serde(default, skip_serializing_if = "std::ops::Not::not")]
        defaulted: bool,
    },
    Reasoning {
        round: u32,
        agent: String,
        text: String,
    },
    Action {
        round: u32,
        agent: String,
        action: GameAction,
        #[serde(default, skip_serializing_if = "std::ops::Not::not")]
        defaulted: bool,
    },
    RoundResult {
        round: u32,
        outcome: RoundOutcome,
    },
    MatchResult {
        match_id: String,
        status: MatchStatus,
        rewards: BTreeMap<String, f64>,
        rounds: u32,
        wall_ms: u64,
    },
}

/// Where a match's trace file lives under an output directory.
pub fn trace_path(trace_dir: &Path, match_id: &str) -> PathBuf {
    trace_dir.join(format!("{match_id}.jsonl"))
}

/// An append-only consumer of trace lines.
pub struct TraceSink {
    out: Box<dyn Write + Send>,
}

impl TraceSink {
    /// A sink writing to a fresh file, truncating any previous content.
    pub fn file(path: &Path) -> Result<Self> {
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent)?;
        }
        let file = File::create(path)?;
        Ok(TraceSink { out: Box::new(BufWriter::new(file)) })
    }

    pub fn from_writer(out: Box<dyn Write + Send>) -> Self {
        TraceSink { out }
    }

    pub fn write(&mut self, line: &TraceLine) -> Result<()> {
        serde_json::to_writer(&mut self.out, line)?;
        self.out.write_all(b"\n")?;
        Ok(())
    }

    pub fn flush(&mut self) -> Result<()> {
        self.out.flush()?;
        Ok(())
    }
}

/// Milliseconds since the Unix epoch, for the two wall-clock fields.
pub fn wall_ms() -> u64 {
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_millis() as u64)
        .unwrap_or(0)
}

/// Flattens a match record into its trace line sequence.
pub fn record_to_lines(record: &MatchRecord, started_ms: u64, ended_ms: u64) -> Vec<TraceLine> {
    let mut lines = vec![TraceLine::MatchHeader {
        schema_version: record.schema_version,
        match_id: record.match_id.clone(),
        spec: record.spec.clone(),
        wall_ms: started_ms,
    }];
    for round in &record.rounds {
        for conv in &round.conversations {
            for msg in &conv.messages {
                lines.push(TraceLine::ConversationTurn {
                    round: round.round,
                    participants: conv.participants.clone(),
                    speaker: msg.speaker.clone(),
                    text: msg.text.clone(),
                    truncated: msg.truncated,
                    failed: msg.failed,
                });
            }
        }
        for pred in &round.predictions {
            lines.push(TraceLine::Prediction {
                round: round.round,
                predictor: pred.predictor.clone(),
                target: pred.target.clone(),
                payload: pred.payload.clone(),
                defaulted: pred.defaulted,
            });
        }
        for turn in &round.turns {
            lines.push(TraceLine::Reasoning {
                round: round.round,
                agent: turn.agent.clone(),
                text: turn.reasoning.clone(),
            });
            lines.push(TraceLine::Action {
                round: round.round,
                agent: turn.agent.clone(),
                action: turn.action.clone(),
                defaulted: turn.defaulted,
            });
        }
        lines.push(TraceLine::RoundResult {
            round: round.round,
            outcome: round.outcome.clone(),
        });
    }
    lines.push(TraceLine::MatchResult {
        match_id: record.match_id.clone(),
        status: record.status,
        rewards: record.rewards.clone(),
        rounds: record.rounds.len() as u32,
        wall_ms: ended_ms,
    });
    lines
}

/// Writes a whole record to a sink as its line sequence.
pub fn append_trace(record: &MatchRecord, sink: &mut TraceSink) -> Result<()> {
    let now = wall_ms();
    for line in record_to_lines(record, now, now) {
        sink.write(&line)?;
    }
    sink.flush()
}

#[derive(Clone, Copy, PartialEq, PartialOrd)]
enum Stage {
    Communicate,
    Predict,
    Act,
    Closed,
}

/// Rebuilds a match record from its line sequence, enforcing header
/// first, monotone rounds, and communicate/predict/act stage order
/// within each round. A missing `match_result` yields an aborted record.
pub fn lines_to_record(lines: &[TraceLine]) -> Result<MatchRecord> {
    let bad = |msg: String| ArenaError::Trace(msg);

    let mut iter = lines.iter();
    let (schema_version, match_id, spec) = match iter.next() {
        Some(TraceLine::MatchHeader { schema_version, match_id, spec, .. }) => {
            (*schema_version, match_id.clone(), spec.clone())
        }
        _ => return Err(bad("first line must be a match_header".into())),
    };
    if schema_version > SCHEMA_VERSION {
        return Err(ArenaError::SchemaVersion {
            found: schema_version,
            supported: SCHEMA_VERSION,
        });
    }

    let mut rounds: Vec<RoundRecord> = Vec::new();
    let mut current: Option<RoundRecord> = None;
    let mut stage = Stage::Communicate;
    let mut result: Option<(MatchStatus, BTreeMap<String, f64>)> = None;
    let mut pending_reasoning: BTreeMap<String, String> = BTreeMap::new();

    let expected_round = |rounds: &Vec<RoundRecord>| rounds.len() as u32;
    for line in iter {
        if result.is_some() {
            return Err(bad("lines found after match_result".into()));
        }
        let round_of = |r: u32, rounds: &Vec<RoundRecord>| -> Result<()> {
            if r != expected_round(rounds) {
                Err(bad(format!(
                    "line for round {r} arrived while round {} was open",
                    expected_round(rounds)
                )))
            } else {
                Ok(())
            }
        };
        match line {
            TraceLine::MatchHeader { .. } => {
                return Err(bad("duplicate match_header".into()));
            }
            TraceLine::ConversationTurn { round, participants, speaker, text, truncated, failed } => {
                round_of(*round, &rounds)?;
                if stage > Stage::Communicate {
                    return Err(bad(format!(
                        "round {round}: conversation_turn after the communicate stage closed"
                    )));
                }
                stage = Stage::Communicate;
                let record = current.get_or_insert_with(|| blank_round(*round));
                let message = ConversationMessage {
                    speaker: speaker.clone(),
                    text: text.clone(),
                    truncated: *truncated,
                    failed: *failed,
                };
                match record.conversations.last_mut() {
                    Some(conv) if conv.participants == *participants => {
                        conv.messages.push(message)
                    }
                    _ => record.conversations.push(ConversationRecord {
                        round: *round,
                        participants: participants.clone(),
                        messages: vec![message],
                    }),
                }
            }
            TraceLine::Prediction { round, predictor, target, payload, defaulted } => {
                round_of(*round, &rounds)?;
                if stage > Stage::Predict {
                    return Err(bad(format!(
                        "round {round}: prediction after the predict stage closed"
                    )));
                }
                stage = Stage::Predict;
                let record = current.get_or_insert_with(|| blank_round(*round));
                record.predictions.push(PredictionRecord {
                    round: *round,
                    predictor: predictor.clone(),
                    target: target.clone(),
                    payload: payload.clone(),
                    defaulted: *defaulted,
                });
            }
            TraceLine::Reasoning { round, agent, text } => {
                round_of(*round, &rounds)?;
                stage = Stage::Act;
                if pending_reasoning.insert(agent.clone(), text.clone()).is_some() {
                    return Err(bad(format!(
                        "round {round}: duplicate reasoning for {agent}"
                    )));
                }
            }
            TraceLine::Action { round, agent, action, defaulted } => {
                round_of(*round, &rounds)?;
                stage = Stage::Act;
                let reasoning = pending_reasoning.remove(agent).ok_or_else(|| {
                    bad(format!("round {round}: action for {agent} without reasoning"))
                })?;
                let record = current.get_or_insert_with(|| blank_round(*round));
                record.turns.push(TurnRecord {
                    round: *round,
                    agent: agent.clone(),
                    reasoning,
                    action: action.clone(),
                    defaulted: *defaulted,
                });
            }
            TraceLine::RoundResult { round, outcome } => {
                round_of(*round, &rounds)?;
                if !pending_reasoning.is_empty() {
                    return Err(bad(format!(
                        "round {round}: reasoning without action for {:?}",
                        pending_reasoning.keys().collect::<Vec<_>>()
                    )));
                }
                let mut record = current.take().unwrap_or_else(|| blank_round(*round));
                record.outcome = outcome.clone();
                rounds.push(record);
                stage = Stage::Communicate;
            }
            TraceLine::MatchResult { match_id: id, status, rewards, rounds: count, .. } => {
                if *id != match_id {
                    return Err(bad(format!(
                        "match_result id {id} does not match header id {match_id}"
                    )));
                }
                if current.is_some() || stage == Stage::Closed {
                    return Err(bad("match_result arrived inside an open round".into()));
                }
                if *count != rounds.len() as u32 {
                    return Err(bad(format!(
                        "match_result claims {count} rounds, trace holds {}",
                        rounds.len()
                    )));
                }
                result = Some((*status, rewards.clone()));
                stage = Stage::Closed;
            }
        }
    }

    if current.is_some() {
        return Err(bad("trace ends inside an open round".into()));
    }

    let (status, rewards) = result.unwrap_or((MatchStatus::Aborted, BTreeMap::new()));
    Ok(MatchRecord { schema_version, match_id, spec, rounds, rewards, status })
}

fn blank_round(round: u32) -> RoundRecord {
    RoundRecord {
        round,
        conversations: Vec::new(),
        predictions: Vec::new(),
        turns: Vec::new(),
        outcome: RoundOutcome {
            defaulted: Vec::new(),
            detail: crate::games::OutcomeDetail::Scheduler {
                choices: BTreeMap::new(),
                agreed: None,
            },
        },
    }
}

/// Everything found while reading a directory of traces.
#[derive(Debug, Default)]
pub struct TraceReadReport {
    pub completed: Vec<MatchRecord>,
    pub aborted: Vec<MatchRecord>,
    /// (path, reason) for files that could not be read as valid traces.
    pub skipped: Vec<(PathBuf, String)>,
}

/// Parses one trace file into its line sequence. Errors carry the
/// 1-based line number.
pub fn read_trace_file(path: &Path) -> Result<Vec<TraceLine>> {
    let file = File::open(path)?;
    let reader = BufReader::new(file);
    let mut lines = Vec::new();
    for (idx, raw) in reader.lines().enumerate() {
        let raw = raw?;
        if raw.trim().is_empty() {
            continue;
        }
        let line: TraceLine = serde_json::from_str(&raw).map_err(|e| {
            ArenaError::Trace(format!("{}:{}: {e}", path.display(), idx + 1))
        })?;
        lines.push(line);
    }
    Ok(lines)
}

/// Reads every `*.jsonl` file in a directory. Unreadable or malformed
/// files are skipped with a diagnostic; a trace written by a newer
/// schema than this reader supports aborts the read with an explicit
/// version error.
pub fn read_traces(trace_dir: &Path) -> Result<TraceReadReport> {
    let mut report = TraceReadReport::default();
    if !trace_dir.exists() {
        return Ok(report);
    }

    let mut paths: Vec<PathBuf> = std::fs::read_dir(trace_dir)?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|ext| ext == "jsonl"))
        .collect();
    paths.sort();

    for path in paths {
        let lines = match read_trace_file(&path) {
            Ok(lines) => lines,
            Err(e) => {
                report.skipped.push((path, e.to_string()));
                continue;
            }
        };
        match lines_to_record(&lines) {
            Ok(record) => match record.status {
                MatchStatus::Completed => report.completed.push(record),
                MatchStatus::Aborted => report.aborted.push(record),
            },
            Err(e @ ArenaError::SchemaVersion { .. }) => return Err(e),
            Err(e) => report.skipped.push((path, e.to_string())),
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::games::OutcomeDetail;
    use crate::types::{AgentId, Framing, GameKind};

    fn sample_record() -> MatchRecord {
        let spec = MatchSpec {
            game: GameKind::Scheduler,
            framing: Framing::B,
            roster: vec![
                AgentId { name: "Ada".into(), model_key: "a".into() },
                AgentId { name: "Ben".into(), model_key: "b".into() },
            ],
            communication: true,
            max_rounds: 10,
            seed: 99,
        };
        let outcome = RoundOutcome {
            defaulted: vec![],
            detail: OutcomeDetail::Scheduler {
                choices: [("Ada".to_string(), 0), ("Ben".to_string(), 0)].into_iter().collect(),
                agreed: Some(0),
            },
        };
        MatchRecord {
            schema_version: SCHEMA_VERSION,
            match_id: spec.match_id(),
            spec,
            rounds: vec![RoundRecord {
                round: 0,
                conversations: vec![ConversationRecord {
                    round: 0,
                    participants: ["Ada".into(), "Ben".into()],
                    messages: vec![
                        ConversationMessage {
                            speaker: "Ada".into(),
                            text: "let us both take option 0".into(),
                            truncated: false,
                            failed: false,
                        },
                        ConversationMessage {
                            speaker: "Ben".into(),
                            text: "agreed".into(),
                            truncated: false,
                            failed: false,
                        },
                    ],
                }],
                predictions: vec![PredictionRecord {
                    round: 0,
                    predictor: "Ada".into(),
                    target: "Ben".into(),
                    payload: PredictionPayload::Choice(0),
                    defaulted: false,
                }],
                turns: vec![
                    TurnRecord {
                        round: 0,
                        agent: "Ada".into(),
                        reasoning: "we agreed on 0".into(),
                        action: GameAction::Choose(0),
                        defaulted: false,
                    },
                    TurnRecord {
                        round: 0,
                        agent: "Ben".into(),
                        reasoning: "sticking to the deal".into(),
                        action: GameAction::Choose(0),
                        defaulted: false,
                    },
                ],
                outcome,
            }],
            rewards: [("Ada".to_string(), 2.0), ("Ben".to_string(), 1.0)].into_iter().collect(),
            status: MatchStatus::Completed,
        }
    }

    #[test]
    fn records_round_trip_through_lines() {
        let record = sample_record();
        let lines = record_to_lines(&record, 1000, 2000);
        let back = lines_to_record(&lines).unwrap();
        assert_eq!(back, record);
    }

    #[test]
    fn records_round_trip_through_a_file() {
        let dir = tempfile::tempdir().unwrap();
        let record = sample_record();
        let path = trace_path(dir.path(), &record.match_id);
        let mut sink = TraceSink::file(&path).unwrap();
        append_trace(&record, &mut sink).unwrap();
        drop(sink);

        let report = read_traces(dir.path()).unwrap();
        assert_eq!(report.completed.len(), 1);
        assert!(report.aborted.is_empty());
        assert!(report.skipped.is_empty());
        assert_eq!(report.completed[0], record);
    }

    #[test]
    fn missing_match_result_yields_an_aborted_record() {
        let record = sample_record();
        let mut lines = record_to_lines(&record, 0, 0);
        lines.pop();
        let back = lines_to_record(&lines).unwrap();
        assert_eq!(back.status, MatchStatus::Aborted);
        assert!(back.rewards.is_empty());
        assert_eq!(back.rounds.len(), 1);
    }

    #[test]
    fn stage_order_violations_are_rejected() {
        let record = sample_record();
        let mut lines = record_to_lines(&record, 0, 0);
        // Move the prediction line before the conversation turns.
        let pred_idx = lines
            .iter()
            .position(|l| matches!(l, TraceLine::Prediction { .. }))
            .unwrap();
        let pred = lines.remove(pred_idx);
        lines.insert(1, pred);
        let err = lines_to_record(&lines).unwrap_err().to_string();
        assert!(err.contains("communicate"), "error was: {err}");
    }

    #[test]
    fn newer_schema_versions_raise_an_explicit_error() {
        let mut record = sample_record();
        record.schema_version = SCHEMA_VERSION + 1;
        let lines = record_to_lines(&record, 0, 0);
        match lines_to_record(&lines) {
            Err(ArenaError::SchemaVersion { found, supported }) => {
                assert_eq!(found, SCHEMA_VERSION + 1);
                assert_eq!(supported, SCHEMA_VERSION);
            }
            other => panic!("expected a schema version error, got {other:?}"),
        }
    }

    #[test]
    fn corrupt_files_are_skipped_with_line_numbers() {
        let dir = tempfile::tempdir().unwrap();
        let good = sample_record();
        let mut sink = TraceSink::file(&trace_path(dir.path(), &good.match_id)).unwrap();
        append_trace(&good, &mut sink).unwrap();
        drop(sink);

        let bad_path = dir.path().join("broken.jsonl");
        std::fs::write(&bad_path, "{\"type\": \"match_header\"\nnot json\n").unwrap();

        let report = read_traces(dir.path()).unwrap();
        assert_eq!(report.completed.len(), 1);
        assert_eq!(report.skipped.len(), 1);
        assert!(report.skipped[0].1.contains(":1:"), "diagnostic was: {}", report.skipped[0].1);
    }

    #[test]
    fn wall_clock_lives_only_in_header_and_result() {
        let lines = record_to_lines(&sample_record(), 123, 456);
        for line in &lines {
            let value = serde_json::to_value(line).unwrap();
            let has_wall = value.get("wall_ms").is_some();
            match line {
                TraceLine::MatchHeader { .. } | TraceLine::MatchResult { .. } => {
                    assert!(has_wall)
                }
                _ => assert!(!has_wall, "unexpected wall clock in {value}"),
            }
        }
    }

    #[test]
    fn credentials_never_appear_in_traces() {
        let record = sample_record();
        let lines = record_to_lines(&record, 1, 2);
        let text = lines
            .iter()
            .map(|l| serde_json::to_string(l).unwrap())
            .collect::<Vec<_>>()
            .join("\n");
        assert!(!text.to_lowercase().contains("api_key"));
        assert!(!text.to_lowercase().contains("bearer"));
    }
}
