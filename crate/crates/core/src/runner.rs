//! Campaign execution: enumerating the match grid, seeding every match
//! deterministically, and running matches in parallel with traces on
//! disk.
//!
//! A campaign is the cross product of configured games, sizes, framings,
//! agent combinations, and seeded repeats. Every match seed, seat order,
//! and display-name assignment derives from the campaign seed alone, so
//! re-running a campaign reproduces the same traces byte for byte apart
//! from wall-clock fields, and a partially finished campaign can resume
//! by skipping matches whose completed traces already exist.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::agents::{self, ChatCompleter};
use crate::config::ArenaConfig;
use crate::error::{ArenaError, Result};
use crate::protocol::run_match;
use crate::seeds;
use crate::trace::{self, TraceSink};
use crate::types::{AgentId, Framing, MatchSpec, MatchStatus, DISPLAY_NAMES};

const SALT_MATCH: u64 = 0x6d61_7463_6873;
const SALT_ROSTER: u64 = 0x726f_7374_6572;
const SALT_COVERAGE: u64 = 0x0063_6f76_6572;

/// The fully enumerated campaign.
#[derive(Clone, Debug)]
pub struct CampaignPlan {
    pub matches: Vec<MatchSpec>,
    /// Configured sizes larger than the agent pool, which cannot run.
    pub infeasible_sizes: Vec<usize>,
}

/// Outcome counts for one campaign run.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CampaignSummary {
    pub planned: usize,
    pub completed: usize,
    pub failed: usize,
    pub skipped_existing: usize,
    /// Total illegal or unparseable submissions replaced by defaults.
    pub flagged_actions: usize,
}

/// All k-element index combinations of `0..n` in lexicographic order.
fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut result = Vec::new();
    if k > n {
        return result;
    }
    let mut combo: Vec<usize> = (0..k).collect();
    loop {
        result.push(combo.clone());
        let mut i = k;
        loop {
            if i == 0 {
                return result;
            }
            i -= 1;
            if combo[i] != i + n - k {
                break;
            }
        }
        combo[i] += 1;
        for j in i + 1..k {
            combo[j] = combo[j - 1] + 1;
        }
    }
}

fn framing_index(framing: Framing) -> u64 {
    match framing {
        Framing::A => 0,
        Framing::B => 1,
    }
}

/// Builds the match spec for one cell of the campaign grid. Seat order
/// and display names are drawn from a stream derived from the campaign
/// seed and the cell coordinates.
fn build_spec(
    config: &ArenaConfig,
    game_idx: usize,
    size: usize,
    framing: Framing,
    combo_idx: usize,
    combo: &[usize],
    repeat: u32,
) -> MatchSpec {
    let coordinates = [
        config.seed,
        SALT_ROSTER,
        game_idx as u64,
        size as u64,
        framing_index(framing),
        combo_idx as u64,
        u64::from(repeat),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(seeds::mix(&coordinates));

    let mut keys: Vec<&str> = combo.iter().map(|i| config.agents[*i].name.as_str()).collect();
    keys.shuffle(&mut rng);

    let mut name_pool: Vec<&str> = DISPLAY_NAMES.to_vec();
    name_pool.shuffle(&mut rng);

    let roster: Vec<AgentId> = keys
        .iter()
        .zip(&name_pool)
        .map(|(key, name)| AgentId { name: name.to_string(), model_key: key.to_string() })
        .collect();

    let mut seed_parts = coordinates.to_vec();
    seed_parts[1] = SALT_MATCH;
    MatchSpec {
        game: config.games[game_idx],
        framing,
        roster,
        communication: config.communication,
        max_rounds: config.max_rounds,
        seed: seeds::mix(&seed_parts),
    }
}

/// Enumerates every match the campaign will run, applying the coverage
/// fraction as a seed-stable subsample of the full grid.
pub fn plan_campaign(config: &ArenaConfig) -> Result<CampaignPlan> {
    config.validate()?;
    let pool = config.agents.len();
    let mut matches = Vec::new();
    let mut infeasible = Vec::new();

    for &size in &config.sizes {
        if size > pool {
            infeasible.push(size);
        }
    }
    for (game_idx, _) in config.games.iter().enumerate() {
        for &size in config.sizes.iter().filter(|s| **s <= pool) {
            for &framing in &config.framings {
                for (combo_idx, combo) in combinations(pool, size).iter().enumerate() {
                    for repeat in 0..config.repeats {
                        matches.push(build_spec(
                            config, game_idx, size, framing, combo_idx, combo, repeat,
                        ));
                    }
                }
            }
        }
    }

    if config.coverage_fraction < 1.0 && !matches.is_empty() {
        let keep = ((matches.len() as f64 * config.coverage_fraction).floor() as usize).max(1);
        let mut order: Vec<usize> = (0..matches.len()).collect();
        let mut rng =
            ChaCha8Rng::seed_from_u64(seeds::mix(&[config.seed, SALT_COVERAGE]));
        order.shuffle(&mut rng);
        let mut chosen: Vec<usize> = order.into_iter().take(keep).collect();
        chosen.sort_unstable();
        matches = chosen.into_iter().map(|i| matches[i].clone()).collect();
    }

    Ok(CampaignPlan { matches, infeasible_sizes: infeasible })
}

/// Where a campaign writes its traces.
pub fn trace_dir(config: &ArenaConfig) -> PathBuf {
    config.output_dir.join("traces")
}

fn has_completed_trace(path: &Path) -> bool {
    path.is_file()
        && trace::read_trace_file(path)
            .and_then(|lines| trace::lines_to_record(&lines))
            .map(|record| record.status == MatchStatus::Completed)
            .unwrap_or(false)
}

fn flagged_in(record: &crate::types::MatchRecord) -> usize {
    record
        .rounds
        .iter()
        .map(|r| {
            r.outcome.defaulted.len()
                + r.turns.iter().filter(|t| t.defaulted).count()
                + r.predictions.iter().filter(|p| p.defaulted).count()
        })
        .sum()
}

/// Runs one planned match to a trace file, replacing any stale partial
/// trace at its path.
fn run_planned_match(
    config: &ArenaConfig,
    spec: &MatchSpec,
    completers: &BTreeMap<String, Arc<dyn ChatCompleter>>,
) -> Result<usize> {
    let mut agents = agents::build_agents(config, spec, completers)?;
    let path = trace::trace_path(&trace_dir(config), &spec.match_id());
    let mut sink = TraceSink::file(&path)?;
    let record = run_match(spec, &mut agents, Some(&mut sink))?;
    Ok(flagged_in(&record))
}

/// Runs the whole campaign on a thread pool of the configured width.
/// With `resume`, matches whose completed traces already exist are
/// skipped; partial traces from an interrupted run are redone.
pub fn run_campaign(config: &ArenaConfig, resume: bool) -> Result<CampaignSummary> {
    let plan = plan_campaign(config)?;
    std::fs::create_dir_all(trace_dir(config))?;
    let completers = agents::build_completers(config)?;

    let completed = AtomicUsize::new(0);
    let failed = AtomicUsize::new(0);
    let skipped = AtomicUsize::new(0);
    let flagged = AtomicUsize::new(0);

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.parallelism)
        .build()
        .map_err(|e| ArenaError::Config(format!("parallelism: {e}")))?;

    pool.install(|| {
        plan.matches.par_iter().for_each(|spec| {
            let path = trace::trace_path(&trace_dir(config), &spec.match_id());
            if resume && has_completed_trace(&path) {
                skipped.fetch_add(1, Ordering::Relaxed);
                return;
            }
            match run_planned_match(config, spec, &completers) {
                Ok(flags) => {
                    completed.fetch_add(1, Ordering::Relaxed);
                    flagged.fetch_add(flags, Ordering::Relaxed);
                }
                Err(error) => {
                    eprintln!("match {} failed: {error}", spec.match_id());
                    failed.fetch_add(1, Ordering::Relaxed);
                }
            }
        });
    });

    Ok(CampaignSummary {
        planned: plan.matches.len(),
        completed: completed.into_inner(),
        failed: failed.into_inner(),
        skipped_existing: skipped.into_inner(),
        flagged_actions: flagged.into_inner(),
    })
}
