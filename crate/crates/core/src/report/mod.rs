//! Cross-match analyses: behavioral-profile similarity, consistency
//! statistics, and outperformance probabilities.
//!
//! A profile is the mean metric vector of one agent within one game
//! category (a game at a player count). Correlating profiles across
//! categories and framings asks whether an agent behaves like itself
//! in different settings; correlating across agents asks whether a
//! setting forces everyone into the same behavior. Undefined
//! correlations (too few shared metrics, or no spread) are reported
//! as absent rather than coerced to zero, because zero is itself a
//! meaningful correlation.

pub mod figures;

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{ArenaError, Result};
use crate::metrics::{MetricVector, METRIC_NAMES};
use crate::ratings::{self, Comparison};
use crate::types::{Framing, GameKind, MatchRecord};

/// Sample Pearson correlation.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(ArenaError::Validation(format!(
            "correlation inputs differ in length: {} vs {}",
            x.len(),
            y.len()
        )));
    }
    if x.len() < 2 {
        return Err(ArenaError::UndefinedCorrelation(format!(
            "need at least 2 paired values, got {}",
            x.len()
        )));
    }
    let n = x.len() as f64;
    let mean_x = x.iter().sum::<f64>() / n;
    let mean_y = y.iter().sum::<f64>() / n;
    let mut covariance = 0.0;
    let mut var_x = 0.0;
    let mut var_y = 0.0;
    for (a, b) in x.iter().zip(y) {
        covariance += (a - mean_x) * (b - mean_y);
        var_x += (a - mean_x) * (a - mean_x);
        var_y += (b - mean_y) * (b - mean_y);
    }
    if var_x <= 0.0 || var_y <= 0.0 {
        return Err(ArenaError::UndefinedCorrelation(
            "constant input has no correlation".into(),
        ));
    }
    Ok(covariance / (var_x * var_y).sqrt())
}

/// One axis label of the similarity matrix: an agent within a game
/// category.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ProfileLabel {
    pub agent: String,
    pub game: GameKind,
    pub size: usize,
}

/// Symmetric matrix of profile correlations. `None` marks undefined
/// entries.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimilarityMatrix {
    pub labels: Vec<ProfileLabel>,
    pub entries: Vec<Vec<Option<f64>>>,
}

type MeanVector = BTreeMap<&'static str, f64>;

fn mean_vectors<K: Ord>(
    vectors: &[MetricVector],
    key_of: impl Fn(&MetricVector) -> Option<K>,
) -> BTreeMap<K, MeanVector> {
    let mut sums: BTreeMap<K, BTreeMap<&'static str, (f64, usize)>> = BTreeMap::new();
    for vector in vectors {
        let Some(key) = key_of(vector) else { continue };
        let entry = sums.entry(key).or_default();
        for name in METRIC_NAMES {
            if let Some(value) = vector.values.get(name) {
                let slot = entry.entry(name).or_insert((0.0, 0));
                slot.0 += value;
                slot.1 += 1;
            }
        }
    }
    sums.into_iter()
        .map(|(key, metrics)| {
            let means = metrics
                .into_iter()
                .map(|(name, (sum, count))| (name, sum / count as f64))
                .collect();
            (key, means)
        })
        .collect()
}

/// Correlation between two mean vectors over the metrics they share.
/// `None` when fewer than two metrics are shared or a shared slice is
/// constant.
fn profile_correlation(a: &MeanVector, b: &MeanVector) -> Option<f64> {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for name in METRIC_NAMES {
        if let (Some(x), Some(y)) = (a.get(name), b.get(name)) {
            xs.push(*x);
            ys.push(*y);
        }
    }
    pearson(&xs, &ys).ok()
}

/// Builds the profile similarity matrix from per-match metric vectors.
pub fn similarity_matrix(vectors: &[MetricVector]) -> SimilarityMatrix {
    let profiles = mean_vectors(vectors, |v| {
        Some(ProfileLabel { agent: v.model_key.clone(), game: v.game, size: v.size })
    });
    let labels: Vec<ProfileLabel> = profiles.keys().cloned().collect();
    let entries = labels
        .iter()
        .map(|row| {
            labels
                .iter()
                .map(|col| profile_correlation(&profiles[row], &profiles[col]))
                .collect()
        })
        .collect();
    SimilarityMatrix { labels, entries }
}

/// Mean, standard error of the mean, and count of one correlation
/// population.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StatSummary {
    pub mean: f64,
    pub sem: f64,
    pub pairs: usize,
}

fn summarize(values: &[f64]) -> Option<StatSummary> {
    if values.is_empty() {
        return None;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let sem = if values.len() < 2 {
        0.0
    } else {
        let variance = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
        (variance / n).sqrt()
    };
    Some(StatSummary { mean, sem, pairs: values.len() })
}

/// The six consistency statistics plus the similarity matrix they are
/// read from. Statistics that have no defined pairs are absent.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConsistencyReport {
    pub similarity: SimilarityMatrix,
    /// Same agent correlated across different game categories.
    pub intra_agent: Option<StatSummary>,
    /// Different agents correlated within the same game category.
    pub inter_agent: Option<StatSummary>,
    /// Same agent, same category, one framing against the other.
    pub framing_intra: Option<StatSummary>,
    /// Different agents, same category, across framings.
    pub framing_inter: Option<StatSummary>,
    /// Same agent, all play aggregated per framing.
    pub aggregated_framing_intra: Option<StatSummary>,
    /// Different agents, all play aggregated per framing.
    pub aggregated_framing_inter: Option<StatSummary>,
}

impl ConsistencyReport {
    /// The six statistics as labeled rows, absent ones skipped.
    pub fn rows(&self) -> Vec<(&'static str, StatSummary)> {
        [
            ("intra_agent", self.intra_agent),
            ("inter_agent", self.inter_agent),
            ("framing_intra", self.framing_intra),
            ("framing_inter", self.framing_inter),
            ("aggregated_framing_intra", self.aggregated_framing_intra),
            ("aggregated_framing_inter", self.aggregated_framing_inter),
        ]
        .into_iter()
        .filter_map(|(name, stat)| stat.map(|s| (name, s)))
        .collect()
    }
}

/// Computes the consistency statistics from per-match metric vectors.
pub fn consistency_report(vectors: &[MetricVector]) -> ConsistencyReport {
    let similarity = similarity_matrix(vectors);

    let mut intra = Vec::new();
    let mut inter = Vec::new();
    for (i, row) in similarity.labels.iter().enumerate() {
        for (j, col) in similarity.labels.iter().enumerate() {
            if i >= j {
                continue;
            }
            let Some(value) = similarity.entries[i][j] else { continue };
            if row.agent == col.agent {
                intra.push(value);
            } else if row.game == col.game && row.size == col.size {
                inter.push(value);
            }
        }
    }

    let by_framing = mean_vectors(vectors, |v| {
        Some((v.model_key.clone(), v.game, v.size, v.framing))
    });
    let mut framing_intra = Vec::new();
    let mut framing_inter = Vec::new();
    for ((agent_a, game_a, size_a, framing_a), profile_a) in &by_framing {
        for ((agent_b, game_b, size_b, framing_b), profile_b) in &by_framing {
            if (game_a, size_a) != (game_b, size_b)
                || *framing_a != Framing::A
                || *framing_b != Framing::B
            {
                continue;
            }
            let Some(value) = profile_correlation(profile_a, profile_b) else { continue };
            if agent_a == agent_b {
                framing_intra.push(value);
            } else {
                framing_inter.push(value);
            }
        }
    }

    let aggregated = mean_vectors(vectors, |v| Some((v.model_key.clone(), v.framing)));
    let mut aggregated_intra = Vec::new();
    let mut aggregated_inter = Vec::new();
    for ((agent_a, framing_a), profile_a) in &aggregated {
        for ((agent_b, framing_b), profile_b) in &aggregated {
            if *framing_a != Framing::A || *framing_b != Framing::B {
                continue;
            }
            let Some(value) = profile_correlation(profile_a, profile_b) else { continue };
            if agent_a == agent_b {
                aggregated_intra.push(value);
            } else {
                aggregated_inter.push(value);
            }
        }
    }

    ConsistencyReport {
        similarity,
        intra_agent: summarize(&intra),
        inter_agent: summarize(&inter),
        framing_intra: summarize(&framing_intra),
        framing_inter: summarize(&framing_inter),
        aggregated_framing_intra: summarize(&aggregated_intra),
        aggregated_framing_inter: summarize(&aggregated_inter),
    }
}

/// One ordered-pair cell of the outperformance heatmap.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HeatmapCell {
    /// Fraction of comparisons the row agent won; ties count half.
    pub probability: f64,
    pub samples: usize,
    /// Fewer than five samples back this cell.
    pub sparse: bool,
}

/// Empirical win probabilities between every agent pair. Cells nobody
/// ever contested are absent, as is the diagonal.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OutperformanceHeatmap {
    pub agents: Vec<String>,
    pub cells: Vec<Vec<Option<HeatmapCell>>>,
}

impl OutperformanceHeatmap {
    pub fn cell(&self, row: &str, col: &str) -> Option<&HeatmapCell> {
        let r = self.agents.iter().position(|a| a == row)?;
        let c = self.agents.iter().position(|a| a == col)?;
        self.cells[r][c].as_ref()
    }
}

/// Builds the heatmap from a comparison list.
pub fn heatmap_from_comparisons(comparisons: &[Comparison]) -> OutperformanceHeatmap {
    let mut agents = BTreeSet::new();
    let mut tallies: BTreeMap<(&str, &str), (f64, usize)> = BTreeMap::new();
    for comparison in comparisons {
        agents.insert(comparison.first.clone());
        agents.insert(comparison.second.clone());
        let forward = tallies
            .entry((comparison.first.as_str(), comparison.second.as_str()))
            .or_insert((0.0, 0));
        forward.0 += comparison.score;
        forward.1 += 1;
        let backward = tallies
            .entry((comparison.second.as_str(), comparison.first.as_str()))
            .or_insert((0.0, 0));
        backward.0 += 1.0 - comparison.score;
        backward.1 += 1;
    }
    let agents: Vec<String> = agents.into_iter().collect();
    let cells = agents
        .iter()
        .map(|row| {
            agents
                .iter()
                .map(|col| {
                    if row == col {
                        return None;
                    }
                    tallies.get(&(row.as_str(), col.as_str())).map(|(wins, n)| HeatmapCell {
                        probability: wins / *n as f64,
                        samples: *n,
                        sparse: *n < 5,
                    })
                })
                .collect()
        })
        .collect();
    OutperformanceHeatmap { agents, cells }
}

/// Builds the heatmap from completed match records.
pub fn outperformance_heatmap(records: &[MatchRecord]) -> OutperformanceHeatmap {
    let events = ratings::events_from_records(records);
    heatmap_from_comparisons(&ratings::extract_comparisons(&events))
}

/// Points of a ROC curve from (0,0) to (1,1), one step per distinct
/// score, as (false positive rate, true positive rate).
pub fn roc_points(labels: &[bool], scores: &[f64]) -> Result<Vec<(f64, f64)>> {
    if labels.len() != scores.len() {
        return Err(ArenaError::Validation(format!(
            "ROC inputs differ in length: {} vs {}",
            labels.len(),
            scores.len()
        )));
    }
    let positives = labels.iter().filter(|l| **l).count();
    let negatives = labels.len() - positives;
    if positives == 0 || negatives == 0 {
        return Err(ArenaError::SingleClass);
    }
    let mut order: Vec<usize> = (0..labels.len()).collect();
    order.sort_by(|a, b| scores[*b].total_cmp(&scores[*a]));

    let mut points = vec![(0.0, 0.0)];
    let mut true_positives = 0usize;
    let mut false_positives = 0usize;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j < order.len() && scores[order[j]] == scores[order[i]] {
            if labels[order[j]] {
                true_positives += 1;
            } else {
                false_positives += 1;
            }
            j += 1;
        }
        points.push((
            false_positives as f64 / negatives as f64,
            true_positives as f64 / positives as f64,
        ));
        i = j;
    }
    Ok(points)
}
