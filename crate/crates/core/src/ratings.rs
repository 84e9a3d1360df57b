//! Skill ratings from pairwise reward comparisons.
//!
//! Completed matches become events; events yield two kinds of pairwise
//! comparisons between registered agents:
//!
//! * co-play: two agents in the same match, compared by their rewards
//!   in it;
//! * parallel: two matches identical in game, size, framing, and
//!   communication whose rosters differ in exactly one agent, comparing
//!   the two differing agents by their rewards in their own matches.
//!
//! Ratings are maximum-likelihood Elo scores: the probability that `i`
//! beats `j` is `1 / (1 + 10^((w_j - w_i) / 400))`, fit by batch
//! gradient ascent with an adaptive step. Variants add per-game
//! deviations around each agent's mean rating, or replace the scalar
//! with a low-dimensional latent vector scored against a per-game
//! direction. Uncertainty comes from bootstrap resampling of events.

use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{ArenaError, Result};
use crate::seeds;
use crate::types::{Framing, GameKind, MatchRecord, MatchStatus};

/// Elo scale constant: log-odds per rating point.
const ELO_SCALE: f64 = std::f64::consts::LN_10 / 400.0;

/// Prior rating every agent starts from.
pub const ELO_PRIOR: f64 = 1500.0;

/// Ratings are clipped to the prior plus or minus this span.
pub const ELO_CLIP_SPAN: f64 = 800.0;

const SALT_BOOTSTRAP: u64 = 0x626f_6f74;
const SALT_VECTOR: u64 = 0x7665_6374;

/// Closed-form win probability for a rating pair.
pub fn elo_win_probability(rating_i: f64, rating_j: f64) -> f64 {
    1.0 / (1.0 + 10f64.powf((rating_j - rating_i) / 400.0))
}

/// Reward tie tolerance when turning reward pairs into scores.
const REWARD_TIE_EPS: f64 = 1e-9;

/// One completed match reduced to what rating needs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub match_id: String,
    pub game: GameKind,
    pub size: usize,
    pub framing: Framing,
    pub communication: bool,
    /// `(model_key, reward)` in seat order.
    pub rewards: Vec<(String, f64)>,
}

/// Reduces completed match records to events, in input order.
pub fn events_from_records(records: &[MatchRecord]) -> Vec<Event> {
    records
        .iter()
        .filter(|r| r.status == MatchStatus::Completed)
        .map(|r| Event {
            match_id: r.match_id.clone(),
            game: r.spec.game,
            size: r.spec.roster.len(),
            framing: r.spec.framing,
            communication: r.spec.communication,
            rewards: r
                .spec
                .roster
                .iter()
                .map(|id| {
                    (id.model_key.clone(), r.rewards.get(&id.name).copied().unwrap_or(0.0))
                })
                .collect(),
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ComparisonKind {
    CoPlay,
    Parallel,
}

/// One pairwise comparison: `score` is 1.0 if `first` did strictly
/// better, 0.0 if strictly worse, 0.5 on a tie.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub first: String,
    pub second: String,
    pub score: f64,
    pub game: GameKind,
    pub kind: ComparisonKind,
    /// Index into the event list for each side; equal for co-play.
    pub first_event: usize,
    pub second_event: usize,
}

fn score_of(reward_first: f64, reward_second: f64) -> f64 {
    if (reward_first - reward_second).abs() <= REWARD_TIE_EPS {
        0.5
    } else if reward_first > reward_second {
        1.0
    } else {
        0.0
    }
}

/// The grouping key under which two events are parallel for a focal
/// seat: everything about the match except the focal agent itself.
fn parallel_key(event: &Event, focal: &str) -> String {
    let mut others: Vec<&str> = event
        .rewards
        .iter()
        .map(|(key, _)| key.as_str())
        .filter(|key| *key != focal)
        .collect();
    others.sort_unstable();
    format!(
        "{}|{}|{}|{}|{}",
        event.game,
        event.size,
        event.framing,
        event.communication,
        others.join(",")
    )
}

/// Extracts all co-play and parallel comparisons from the event list.
pub fn extract_comparisons(events: &[Event]) -> Vec<Comparison> {
    let mut comparisons = Vec::new();

    for (idx, event) in events.iter().enumerate() {
        for i in 0..event.rewards.len() {
            for j in (i + 1)..event.rewards.len() {
                let (first, reward_first) = &event.rewards[i];
                let (second, reward_second) = &event.rewards[j];
                if first == second {
                    continue;
                }
                comparisons.push(Comparison {
                    first: first.clone(),
                    second: second.clone(),
                    score: score_of(*reward_first, *reward_second),
                    game: event.game,
                    kind: ComparisonKind::CoPlay,
                    first_event: idx,
                    second_event: idx,
                });
            }
        }
    }

    let mut groups: BTreeMap<String, Vec<(usize, &str, f64)>> = BTreeMap::new();
    for (idx, event) in events.iter().enumerate() {
        for (focal, reward) in &event.rewards {
            groups
                .entry(parallel_key(event, focal))
                .or_default()
                .push((idx, focal.as_str(), *reward));
        }
    }
    for members in groups.values() {
        for a in 0..members.len() {
            for b in (a + 1)..members.len() {
                let (event_a, focal_a, reward_a) = members[a];
                let (event_b, focal_b, reward_b) = members[b];
                if event_a == event_b || focal_a == focal_b {
                    continue;
                }
                comparisons.push(Comparison {
                    first: focal_a.to_string(),
                    second: focal_b.to_string(),
                    score: score_of(reward_a, reward_b),
                    game: events[event_a].game,
                    kind: ComparisonKind::Parallel,
                    first_event: event_a,
                    second_event: event_b,
                });
            }
        }
    }

    comparisons
}

/// All agents appearing in the comparisons, sorted.
pub fn comparison_agents(comparisons: &[Comparison]) -> Vec<String> {
    let set: BTreeSet<&str> = comparisons
        .iter()
        .flat_map(|c| [c.first.as_str(), c.second.as_str()])
        .collect();
    set.into_iter().map(str::to_string).collect()
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind { parent: (0..n).collect() }
    }

    fn find(&mut self, i: usize) -> usize {
        if self.parent[i] != i {
            let root = self.find(self.parent[i]);
            self.parent[i] = root;
        }
        self.parent[i]
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra] = rb;
        }
    }
}

/// Checks that every rated agent is reachable from every other through
/// comparisons; a rating over a disconnected graph is meaningless.
pub fn check_connected(comparisons: &[Comparison]) -> Result<()> {
    let agents = comparison_agents(comparisons);
    if agents.is_empty() {
        return Err(ArenaError::Validation("no comparisons to rate".into()));
    }
    let index: BTreeMap<&str, usize> =
        agents.iter().enumerate().map(|(i, a)| (a.as_str(), i)).collect();
    let mut uf = UnionFind::new(agents.len());
    for c in comparisons {
        uf.union(index[c.first.as_str()], index[c.second.as_str()]);
    }
    let mut components: BTreeMap<usize, Vec<String>> = BTreeMap::new();
    for (i, agent) in agents.iter().enumerate() {
        components.entry(uf.find(i)).or_default().push(agent.clone());
    }
    if components.len() > 1 {
        return Err(ArenaError::DisconnectedGraph(components.into_values().collect()));
    }
    Ok(())
}

pub(crate) fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

pub(crate) fn bernoulli_log_likelihood(score: f64, p: f64) -> f64 {
    let p = p.clamp(1e-12, 1.0 - 1e-12);
    score * p.ln() + (1.0 - score) * (1.0 - p).ln()
}

/// Shared adaptive-step gradient ascent: doubles the step while it
/// keeps improving the objective, halves it when it overshoots, and
/// stops on a gradient-norm tolerance or the iteration cap.
pub(crate) fn ascend(
    params: &mut [f64],
    objective_and_gradient: impl Fn(&[f64], &mut [f64]) -> f64,
    max_iters: usize,
    grad_tol: f64,
    initial_step: f64,
) {
    let mut gradient = vec![0.0; params.len()];
    let mut step = initial_step;
    let mut value = objective_and_gradient(params, &mut gradient);
    for _ in 0..max_iters {
        let grad_max = gradient.iter().fold(0.0f64, |m, g| m.max(g.abs()));
        if grad_max < grad_tol {
            break;
        }
        let mut improved = false;
        while step > 1e-14 {
            let candidate: Vec<f64> = params
                .iter()
                .zip(&gradient)
                .map(|(p, g)| p + step * g)
                .collect();
            let mut candidate_gradient = vec![0.0; params.len()];
            let candidate_value =
                objective_and_gradient(&candidate, &mut candidate_gradient);
            if candidate_value > value {
                params.copy_from_slice(&candidate);
                gradient = candidate_gradient;
                value = candidate_value;
                step *= 2.0;
                improved = true;
                break;
            }
            step /= 2.0;
        }
        if !improved {
            break;
        }
    }
}

/// Fit controls; the defaults match the standard pipeline.
#[derive(Clone, Copy, Debug)]
pub struct FitOptions {
    pub max_iters: usize,
    pub grad_tol: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions { max_iters: 100_000, grad_tol: 1e-8 }
    }
}

fn clip_rating(r: f64) -> f64 {
    r.clamp(ELO_PRIOR - ELO_CLIP_SPAN, ELO_PRIOR + ELO_CLIP_SPAN)
}

/// Global scalar ratings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EloRatings {
    pub ratings: BTreeMap<String, f64>,
}

/// Fits maximum-likelihood Elo ratings over a connected comparison
/// graph, recentered to a mean of [`ELO_PRIOR`].
pub fn fit_elo(comparisons: &[Comparison], options: FitOptions) -> Result<EloRatings> {
    check_connected(comparisons)?;
    let agents = comparison_agents(comparisons);
    let index: BTreeMap<&str, usize> =
        agents.iter().enumerate().map(|(i, a)| (a.as_str(), i)).collect();
    let pairs: Vec<(usize, usize, f64)> = comparisons
        .iter()
        .map(|c| (index[c.first.as_str()], index[c.second.as_str()], c.score))
        .collect();

    let mut params = vec![ELO_PRIOR; agents.len()];
    ascend(
        &mut params,
        |w, grad| {
            grad.fill(0.0);
            let mut ll = 0.0;
            for &(i, j, score) in &pairs {
                let p = sigmoid(ELO_SCALE * (w[i] - w[j]));
                ll += bernoulli_log_likelihood(score, p);
                let pull = ELO_SCALE * (score - p);
                grad[i] += pull;
                grad[j] -= pull;
            }
            ll
        },
        options.max_iters,
        options.grad_tol,
        1000.0,
    );

    let mean = params.iter().sum::<f64>() / params.len() as f64;
    let ratings = agents
        .into_iter()
        .zip(&params)
        .map(|(agent, w)| (agent, clip_rating(w - mean + ELO_PRIOR)))
        .collect();
    Ok(EloRatings { ratings })
}

/// Penalty weight on squared per-game deviations, scaled by the number
/// of comparisons.
const DEVIATION_PENALTY: f64 = 1e-3;

/// Ratings with a per-game deviation around each agent's mean.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PerGameRatings {
    pub mean: BTreeMap<String, f64>,
    /// `deviations[agent][game]` shifts the mean in that game; games the
    /// agent never played are absent.
    pub deviations: BTreeMap<String, BTreeMap<GameKind, f64>>,
}

impl PerGameRatings {
    /// The effective rating of `agent` in `game`.
    pub fn rating_in(&self, agent: &str, game: GameKind) -> Option<f64> {
        let mean = self.mean.get(agent)?;
        let dev = self.deviations.get(agent).and_then(|d| d.get(&game)).unwrap_or(&0.0);
        Some(clip_rating(mean + dev))
    }
}

/// Fits ratings with per-game deviations. Deviations are ridge-penalized
/// toward zero so the game-specific signal has to earn its distance from
/// the agent mean, and each agent's played deviations are recentered to
/// mean zero with the shift folded into the agent mean.
pub fn fit_elo_per_game(
    comparisons: &[Comparison],
    options: FitOptions,
) -> Result<PerGameRatings> {
    check_connected(comparisons)?;
    let agents = comparison_agents(comparisons);
    let index: BTreeMap<&str, usize> =
        agents.iter().enumerate().map(|(i, a)| (a.as_str(), i)).collect();

    let mut played: BTreeMap<(usize, GameKind), usize> = BTreeMap::new();
    for c in comparisons {
        for agent in [&c.first, &c.second] {
            let key = (index[agent.as_str()], c.game);
            let next = played.len();
            played.entry(key).or_insert(next);
        }
    }
    let n_agents = agents.len();
    let n_dev = played.len();
    let n = comparisons.len() as f64;

    let pairs: Vec<(usize, usize, usize, usize, f64)> = comparisons
        .iter()
        .map(|c| {
            let i = index[c.first.as_str()];
            let j = index[c.second.as_str()];
            (i, j, played[&(i, c.game)], played[&(j, c.game)], c.score)
        })
        .collect();

    let mut params = vec![0.0; n_agents + n_dev];
    params[..n_agents].fill(ELO_PRIOR);

    ascend(
        &mut params,
        |w, grad| {
            grad.fill(0.0);
            let mut objective = 0.0;
            for &(i, j, di, dj, score) in &pairs {
                let wi = w[i] + w[n_agents + di];
                let wj = w[j] + w[n_agents + dj];
                let p = sigmoid(ELO_SCALE * (wi - wj));
                objective += bernoulli_log_likelihood(score, p);
                let pull = ELO_SCALE * (score - p);
                grad[i] += pull;
                grad[j] -= pull;
                grad[n_agents + di] += pull;
                grad[n_agents + dj] -= pull;
            }
            for d in 0..n_dev {
                let dev = w[n_agents + d];
                objective -= DEVIATION_PENALTY * n * (dev / 400.0).powi(2);
                grad[n_agents + d] -= 2.0 * DEVIATION_PENALTY * n * dev / 400.0_f64.powi(2);
            }
            objective
        },
        options.max_iters,
        options.grad_tol,
        1000.0,
    );

    let mut mean: BTreeMap<String, f64> = BTreeMap::new();
    let mut deviations: BTreeMap<String, BTreeMap<GameKind, f64>> = BTreeMap::new();
    for (agent_idx, agent) in agents.iter().enumerate() {
        let games: Vec<(GameKind, f64)> = played
            .iter()
            .filter(|((i, _), _)| *i == agent_idx)
            .map(|((_, game), slot)| (*game, params[n_agents + slot]))
            .collect();
        let dev_mean = if games.is_empty() {
            0.0
        } else {
            games.iter().map(|(_, d)| d).sum::<f64>() / games.len() as f64
        };
        mean.insert(agent.clone(), params[agent_idx] + dev_mean);
        deviations.insert(
            agent.clone(),
            games.into_iter().map(|(game, d)| (game, d - dev_mean)).collect(),
        );
    }

    let grand = mean.values().sum::<f64>() / mean.len() as f64;
    for value in mean.values_mut() {
        *value = clip_rating(*value - grand + ELO_PRIOR);
    }
    Ok(PerGameRatings { mean, deviations })
}

/// L2 penalty on latent vectors and game directions.
const VECTOR_PENALTY: f64 = 1e-2;

/// Latent-vector skill model: each agent has a vector, each game a
/// direction, and the log odds that `i` beats `j` in game `k` are
/// `(w_i - w_j) . g_k`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VectorModel {
    pub dim: usize,
    pub agents: BTreeMap<String, Vec<f64>>,
    pub games: BTreeMap<GameKind, Vec<f64>>,
}

impl VectorModel {
    /// Log-odds score of `agent` along the direction of `game`.
    pub fn score_in(&self, agent: &str, game: GameKind) -> Option<f64> {
        let w = self.agents.get(agent)?;
        let g = self.games.get(&game)?;
        Some(w.iter().zip(g).map(|(a, b)| a * b).sum())
    }

    /// Win probability between two rated agents in a game.
    pub fn win_probability(&self, first: &str, second: &str, game: GameKind) -> Option<f64> {
        Some(sigmoid(self.score_in(first, game)? - self.score_in(second, game)?))
    }
}

/// Fits the latent-vector model with `dim` dimensions.
pub fn fit_vector_model(
    comparisons: &[Comparison],
    dim: usize,
    seed: u64,
    options: FitOptions,
) -> Result<VectorModel> {
    if !(1..=7).contains(&dim) {
        return Err(ArenaError::Validation(format!(
            "vector dimension {dim} out of range [1, 7]"
        )));
    }
    check_connected(comparisons)?;
    let agents = comparison_agents(comparisons);
    let agent_index: BTreeMap<&str, usize> =
        agents.iter().enumerate().map(|(i, a)| (a.as_str(), i)).collect();
    let games: Vec<GameKind> = {
        let set: BTreeSet<GameKind> = comparisons.iter().map(|c| c.game).collect();
        set.into_iter().collect()
    };
    let game_index: BTreeMap<GameKind, usize> =
        games.iter().enumerate().map(|(i, g)| (*g, i)).collect();

    let pairs: Vec<(usize, usize, usize, f64)> = comparisons
        .iter()
        .map(|c| {
            (
                agent_index[c.first.as_str()],
                agent_index[c.second.as_str()],
                game_index[&c.game],
                c.score,
            )
        })
        .collect();

    let n_agent_params = agents.len() * dim;
    let total = n_agent_params + games.len() * dim;
    let mut rng = ChaCha8Rng::seed_from_u64(seeds::mix(&[seed, SALT_VECTOR, dim as u64]));
    let mut gaussian = || {
        let u1: f64 = rng.gen::<f64>().max(1e-12);
        let u2: f64 = rng.gen();
        0.1 * (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    };
    let mut params: Vec<f64> = (0..total).map(|_| gaussian()).collect();

    ascend(
        &mut params,
        |w, grad| {
            grad.fill(0.0);
            let mut objective = 0.0;
            for &(i, j, k, score) in &pairs {
                let wi = &w[i * dim..(i + 1) * dim];
                let wj = &w[j * dim..(j + 1) * dim];
                let gk = &w[n_agent_params + k * dim..n_agent_params + (k + 1) * dim];
                let margin: f64 =
                    wi.iter().zip(wj).zip(gk).map(|((a, b), g)| (a - b) * g).sum();
                let p = sigmoid(margin);
                objective += bernoulli_log_likelihood(score, p);
                let pull = score - p;
                for d in 0..dim {
                    grad[i * dim + d] += pull * gk[d];
                    grad[j * dim + d] -= pull * gk[d];
                    grad[n_agent_params + k * dim + d] += pull * (wi[d] - wj[d]);
                }
            }
            for (slot, value) in w.iter().enumerate() {
                objective -= VECTOR_PENALTY * value * value;
                grad[slot] -= 2.0 * VECTOR_PENALTY * value;
            }
            objective
        },
        options.max_iters,
        options.grad_tol,
        0.1,
    );

    Ok(VectorModel {
        dim,
        agents: agents
            .iter()
            .enumerate()
            .map(|(i, a)| (a.clone(), params[i * dim..(i + 1) * dim].to_vec()))
            .collect(),
        games: games
            .iter()
            .enumerate()
            .map(|(k, g)| {
                (
                    *g,
                    params[n_agent_params + k * dim..n_agent_params + (k + 1) * dim]
                        .to_vec(),
                )
            })
            .collect(),
    })
}

/// Five-number summary of a bootstrap rating distribution.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatingQuantiles {
    pub q025: f64,
    pub q25: f64,
    pub median: f64,
    pub q75: f64,
    pub q975: f64,
}

/// Bootstrap output: per-agent quantiles plus resample accounting.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BootstrapSummary {
    pub resamples_requested: usize,
    pub resamples_used: usize,
    /// Resamples dropped because their comparison graph lost an agent
    /// or fell apart.
    pub resamples_skipped: usize,
    pub quantiles: BTreeMap<String, RatingQuantiles>,
    /// Per-agent ratings from each used resample, in resample order.
    pub samples: BTreeMap<String, Vec<f64>>,
}

/// Linear-interpolation quantile of a sorted sample.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let h = (sorted.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Bootstraps Elo ratings by resampling events with replacement.
/// Resamples whose comparisons drop an agent or disconnect are skipped
/// and counted rather than silently biasing the quantiles.
pub fn bootstrap_ratings(
    events: &[Event],
    resamples: usize,
    seed: u64,
    options: FitOptions,
) -> Result<BootstrapSummary> {
    let full = extract_comparisons(events);
    check_connected(&full)?;
    let agents = comparison_agents(&full);

    let samples: Vec<Option<BTreeMap<String, f64>>> = (0..resamples)
        .into_par_iter()
        .map(|r| {
            let mut rng =
                ChaCha8Rng::seed_from_u64(seeds::mix(&[seed, SALT_BOOTSTRAP, r as u64]));
            let resampled: Vec<Event> = (0..events.len())
                .map(|_| events[rng.gen_range(0..events.len())].clone())
                .collect();
            let comparisons = extract_comparisons(&resampled);
            let present = comparison_agents(&comparisons);
            if present != agents || check_connected(&comparisons).is_err() {
                return None;
            }
            fit_elo(&comparisons, options).ok().map(|fit| fit.ratings)
        })
        .collect();

    let used = samples.iter().flatten().count();
    let mut quantiles = BTreeMap::new();
    let mut per_agent = BTreeMap::new();
    for agent in &agents {
        let values: Vec<f64> = samples
            .iter()
            .flatten()
            .filter_map(|ratings| ratings.get(agent).copied())
            .collect();
        let mut sorted = values.clone();
        sorted.sort_by(f64::total_cmp);
        quantiles.insert(
            agent.clone(),
            RatingQuantiles {
                q025: quantile(&sorted, 0.025),
                q25: quantile(&sorted, 0.25),
                median: quantile(&sorted, 0.5),
                q75: quantile(&sorted, 0.75),
                q975: quantile(&sorted, 0.975),
            },
        );
        per_agent.insert(agent.clone(), values);
    }

    Ok(BootstrapSummary {
        resamples_requested: resamples,
        resamples_used: used,
        resamples_skipped: resamples - used,
        quantiles,
        samples: per_agent,
    })
}

/// Kendall rank correlation, tau-a: strictly concordant minus strictly
/// discordant pairs over all pairs.
pub fn kendall_tau(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(ArenaError::Validation(format!(
            "rank lists differ in length: {} vs {}",
            a.len(),
            b.len()
        )));
    }
    let n = a.len();
    if n < 2 {
        return Err(ArenaError::Validation("need at least two items to rank".into()));
    }
    let sign = |x: f64| {
        if x > 0.0 {
            1i8
        } else if x < 0.0 {
            -1
        } else {
            0
        }
    };
    let mut net = 0i64;
    for i in 0..n {
        for j in (i + 1)..n {
            let da = sign(a[i] - a[j]);
            let db = sign(b[i] - b[j]);
            if da != 0 && db != 0 {
                net += if da == db { 1 } else { -1 };
            }
        }
    }
    Ok(net as f64 / (n * (n - 1) / 2) as f64)
}

/// Area under the ROC curve by the midrank method; ties in score share
/// their average rank.
pub fn roc_auc(labels: &[bool], scores: &[f64]) -> Result<f64> {
    if labels.len() != scores.len() {
        return Err(ArenaError::Validation(format!(
            "labels and scores differ in length: {} vs {}",
            labels.len(),
            scores.len()
        )));
    }
    let positives = labels.iter().filter(|l| **l).count();
    let negatives = labels.len() - positives;
    if positives == 0 || negatives == 0 {
        return Err(ArenaError::SingleClass);
    }

    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&i, &j| scores[i].total_cmp(&scores[j]));
    let mut ranks = vec![0.0; scores.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start;
        while end + 1 < order.len() && scores[order[end + 1]] == scores[order[start]] {
            end += 1;
        }
        let midrank = (start + end) as f64 / 2.0 + 1.0;
        for &idx in &order[start..=end] {
            ranks[idx] = midrank;
        }
        start = end + 1;
    }

    let positive_rank_sum: f64 = labels
        .iter()
        .zip(&ranks)
        .filter(|(l, _)| **l)
        .map(|(_, r)| r)
        .sum();
    let auc = (positive_rank_sum - (positives * (positives + 1)) as f64 / 2.0)
        / (positives as f64 * negatives as f64);
    Ok(auc)
}
