//! Predicting pairwise outcomes from behavioral metrics.
//!
//! Each non-tie co-play comparison becomes a training row whose
//! features are the differences between the two agents' metric values
//! in that match. A zero-intercept logistic regression keeps the model
//! antisymmetric: swapping the two agents negates every feature and
//! flips the label, so the predicted probabilities are complementary
//! by construction.
//!
//! Metrics are z-scored with statistics from the training rows only.
//! A missing metric is imputed to the post-standardization mean (zero)
//! and surfaced through a paired missing-indicator feature, so rows
//! from ablated conditions stay usable without pretending the value
//! was observed.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{ArenaError, Result};
use crate::metrics::{MetricVector, METRIC_NAMES};
use crate::ratings::{
    ascend, bernoulli_log_likelihood, roc_auc, sigmoid, Comparison, ComparisonKind, Event,
    FitOptions,
};
use crate::seeds;
use crate::types::GameKind;

/// L2 penalty applied to every weight.
pub const PREDICTOR_L2: f64 = 1e-2;

/// Number of behavioral metrics in a full vector.
pub const N_METRICS: usize = METRIC_NAMES.len();

const SALT_FOLDS: u64 = 0x666f_6c64;

/// One comparison with both sides' raw metric values. `None` marks a
/// metric that was not measured for that agent in that match.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeatureRow {
    pub first: String,
    pub second: String,
    /// 1.0 when `first` outperformed `second`, 0.0 otherwise.
    pub label: f64,
    pub game: GameKind,
    /// Event index the comparison came from, for grouped folding.
    pub event: usize,
    pub first_values: [Option<f64>; N_METRICS],
    pub second_values: [Option<f64>; N_METRICS],
}

/// Feature rows plus the agent pool they mention.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct Dataset {
    pub rows: Vec<FeatureRow>,
    /// Sorted distinct agent keys appearing in `rows`.
    pub agents: Vec<String>,
    /// Comparisons dropped because a metric vector was absent.
    pub dropped_missing_metrics: usize,
}

/// Builds the training dataset from metric vectors and co-play
/// comparisons. Ties and parallel-source comparisons are excluded;
/// comparisons whose agents lack a metric vector are dropped and
/// counted.
pub fn build_dataset(
    vectors: &[MetricVector],
    comparisons: &[Comparison],
    events: &[Event],
) -> Dataset {
    let index: BTreeMap<(&str, &str), &MetricVector> = vectors
        .iter()
        .map(|v| ((v.match_id.as_str(), v.model_key.as_str()), v))
        .collect();

    let values_of = |vector: &MetricVector| {
        let mut values = [None; N_METRICS];
        for (slot, name) in values.iter_mut().zip(METRIC_NAMES) {
            *slot = vector.values.get(name).copied();
        }
        values
    };

    let mut dataset = Dataset::default();
    let mut agents = BTreeSet::new();
    for comparison in comparisons {
        if comparison.kind != ComparisonKind::CoPlay || comparison.score == 0.5 {
            continue;
        }
        let match_id = events[comparison.first_event].match_id.as_str();
        let first = index.get(&(match_id, comparison.first.as_str()));
        let second = index.get(&(match_id, comparison.second.as_str()));
        let (Some(first), Some(second)) = (first, second) else {
            dataset.dropped_missing_metrics += 1;
            continue;
        };
        agents.insert(comparison.first.clone());
        agents.insert(comparison.second.clone());
        dataset.rows.push(FeatureRow {
            first: comparison.first.clone(),
            second: comparison.second.clone(),
            label: comparison.score,
            game: comparison.game,
            event: comparison.first_event,
            first_values: values_of(first),
            second_values: values_of(second),
        });
    }
    dataset.agents = agents.into_iter().collect();
    dataset
}

/// Per-metric mean and standard deviation from a set of training rows.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Standardization {
    pub means: [f64; N_METRICS],
    pub stds: [f64; N_METRICS],
}

impl Standardization {
    /// Statistics over every observed value (both sides of every row).
    /// A metric with no observations or zero spread gets mean 0, SD 1,
    /// which zeroes its diffs instead of dividing by zero.
    pub fn from_rows<'a>(rows: impl IntoIterator<Item = &'a FeatureRow>) -> Standardization {
        let mut observed: [Vec<f64>; N_METRICS] = Default::default();
        for row in rows {
            for (m, seen) in observed.iter_mut().enumerate() {
                seen.extend(row.first_values[m]);
                seen.extend(row.second_values[m]);
            }
        }
        let mut means = [0.0; N_METRICS];
        let mut stds = [1.0; N_METRICS];
        for m in 0..N_METRICS {
            let values = &observed[m];
            if values.is_empty() {
                continue;
            }
            let mean = values.iter().sum::<f64>() / values.len() as f64;
            let variance =
                values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / values.len() as f64;
            means[m] = mean;
            if variance.sqrt() > 1e-9 {
                stds[m] = variance.sqrt();
            }
        }
        Standardization { means, stds }
    }

    fn z(&self, m: usize, value: Option<f64>) -> f64 {
        match value {
            Some(v) => (v - self.means[m]) / self.stds[m],
            None => 0.0,
        }
    }
}

/// Feature vector of one row: metric z-diffs, missing-indicator diffs,
/// then the identity block when `identity_agents` is non-empty.
fn featurize(row: &FeatureRow, std: &Standardization, identity_agents: &[String]) -> Vec<f64> {
    let mut x = Vec::with_capacity(2 * N_METRICS + identity_agents.len());
    for m in 0..N_METRICS {
        x.push(std.z(m, row.first_values[m]) - std.z(m, row.second_values[m]));
    }
    for m in 0..N_METRICS {
        let miss = |v: Option<f64>| if v.is_none() { 1.0 } else { 0.0 };
        x.push(miss(row.first_values[m]) - miss(row.second_values[m]));
    }
    for agent in identity_agents {
        let mut value = 0.0;
        if *agent == row.first {
            value += 1.0;
        }
        if *agent == row.second {
            value -= 1.0;
        }
        x.push(value);
    }
    x
}

/// Names of the feature slots, aligned with fitted weight vectors.
pub fn feature_names(identity_agents: &[String]) -> Vec<String> {
    METRIC_NAMES
        .iter()
        .map(|m| m.to_string())
        .chain(METRIC_NAMES.iter().map(|m| format!("{m}_missing")))
        .chain(identity_agents.iter().map(|a| format!("id:{a}")))
        .collect()
}

/// One weight vector for all games, or one per game.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "scheme", content = "weights", rename_all = "snake_case")]
pub enum WeightScheme {
    Fixed(Vec<f64>),
    PerGame(BTreeMap<GameKind, Vec<f64>>),
}

/// A fitted predictor: weights plus the training standardization they
/// were fitted under. Intercept is identically zero.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PredictorWeights {
    pub standardization: Standardization,
    pub scheme: WeightScheme,
    /// Agent keys behind the identity block, empty when unused.
    pub identity_agents: Vec<String>,
}

impl PredictorWeights {
    fn weights_for(&self, game: GameKind) -> Option<&[f64]> {
        match &self.scheme {
            WeightScheme::Fixed(w) => Some(w),
            WeightScheme::PerGame(map) => map.get(&game).map(Vec::as_slice),
        }
    }

    /// Log-odds that `first` outperforms `second`. `None` when the
    /// per-game scheme has no weights for this row's game.
    pub fn score_row(&self, row: &FeatureRow) -> Option<f64> {
        let weights = self.weights_for(row.game)?;
        let x = featurize(row, &self.standardization, &self.identity_agents);
        Some(weights.iter().zip(&x).map(|(w, xf)| w * xf).sum())
    }

    /// Probability that `first` outperforms `second`.
    pub fn predict_row(&self, row: &FeatureRow) -> Option<f64> {
        self.score_row(row).map(sigmoid)
    }
}

/// Fit controls.
#[derive(Clone, Debug)]
pub struct PredictorConfig {
    pub per_game: bool,
    pub identity: bool,
    pub l2: f64,
    pub options: FitOptions,
}

impl Default for PredictorConfig {
    fn default() -> Self {
        PredictorConfig {
            per_game: false,
            identity: false,
            l2: PREDICTOR_L2,
            options: FitOptions::default(),
        }
    }
}

fn fit_weight_vector(
    rows: &[&FeatureRow],
    std: &Standardization,
    identity_agents: &[String],
    config: &PredictorConfig,
) -> Vec<f64> {
    let xs: Vec<Vec<f64>> = rows
        .iter()
        .map(|r| featurize(r, std, identity_agents))
        .collect();
    let labels: Vec<f64> = rows.iter().map(|r| r.label).collect();
    let l2 = config.l2;
    let mut weights = vec![0.0; 2 * N_METRICS + identity_agents.len()];
    ascend(
        &mut weights,
        |params, gradient| {
            gradient.fill(0.0);
            let mut objective = 0.0;
            for (x, label) in xs.iter().zip(&labels) {
                let margin: f64 = params.iter().zip(x).map(|(w, xf)| w * xf).sum();
                let p = sigmoid(margin);
                objective += bernoulli_log_likelihood(*label, p);
                let residual = label - p;
                for (g, xf) in gradient.iter_mut().zip(x) {
                    *g += residual * xf;
                }
            }
            for (g, w) in gradient.iter_mut().zip(params.iter()) {
                *g -= 2.0 * l2 * w;
            }
            objective - l2 * params.iter().map(|w| w * w).sum::<f64>()
        },
        config.options.max_iters,
        config.options.grad_tol,
        0.1,
    );
    weights
}

fn fit_rows(rows: &[&FeatureRow], agents: &[String], config: &PredictorConfig) -> Result<PredictorWeights> {
    if rows.is_empty() {
        return Err(ArenaError::Validation(
            "no rows to fit the outcome predictor on".into(),
        ));
    }
    let standardization = Standardization::from_rows(rows.iter().copied());
    let identity_agents: Vec<String> = if config.identity { agents.to_vec() } else { Vec::new() };
    let scheme = if config.per_game {
        let mut by_game: BTreeMap<GameKind, Vec<&FeatureRow>> = BTreeMap::new();
        for row in rows {
            by_game.entry(row.game).or_default().push(row);
        }
        WeightScheme::PerGame(
            by_game
                .into_iter()
                .map(|(game, rows)| {
                    (game, fit_weight_vector(&rows, &standardization, &identity_agents, config))
                })
                .collect(),
        )
    } else {
        WeightScheme::Fixed(fit_weight_vector(rows, &standardization, &identity_agents, config))
    };
    Ok(PredictorWeights { standardization, scheme, identity_agents })
}

/// Fits a predictor on the whole dataset.
pub fn fit_predictor(dataset: &Dataset, config: &PredictorConfig) -> Result<PredictorWeights> {
    let rows: Vec<&FeatureRow> = dataset.rows.iter().collect();
    fit_rows(&rows, &dataset.agents, config)
}

/// One completed cross-validation fold.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FoldResult {
    pub fold: String,
    pub train_rows: usize,
    pub test_rows: usize,
    pub auc: f64,
}

/// Fold-level AUCs plus the folds that could not be scored.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CrossValReport {
    pub folds: Vec<FoldResult>,
    /// `(fold, reason)` pairs for folds skipped without an AUC.
    pub skipped: Vec<(String, String)>,
    pub mean_auc: f64,
    /// Test-row `(label, score)` pairs pooled across scored folds, in
    /// fold order, for ROC curves over the out-of-fold predictions.
    pub pooled: Vec<(bool, f64)>,
}

type FoldOutcome = std::result::Result<(FoldResult, Vec<(bool, f64)>), (String, String)>;

fn summarize_folds(outcomes: Vec<FoldOutcome>) -> Result<CrossValReport> {
    let mut folds = Vec::new();
    let mut skipped = Vec::new();
    let mut pooled = Vec::new();
    for outcome in outcomes {
        match outcome {
            Ok((fold, mut pairs)) => {
                folds.push(fold);
                pooled.append(&mut pairs);
            }
            Err(skip) => skipped.push(skip),
        }
    }
    if folds.is_empty() {
        return Err(ArenaError::Validation(
            "every cross-validation fold was skipped".into(),
        ));
    }
    let mean_auc = folds.iter().map(|f| f.auc).sum::<f64>() / folds.len() as f64;
    Ok(CrossValReport { folds, skipped, mean_auc, pooled })
}

fn score_fold(
    name: String,
    train: Vec<&FeatureRow>,
    test: Vec<&FeatureRow>,
    agents: &[String],
    config: &PredictorConfig,
) -> FoldOutcome {
    if train.is_empty() {
        return Err((name, "no training rows".into()));
    }
    if test.is_empty() {
        return Err((name, "no test rows".into()));
    }
    let weights =
        fit_rows(&train, agents, config).map_err(|e| (name.clone(), e.to_string()))?;
    let mut labels = Vec::new();
    let mut scores = Vec::new();
    for row in &test {
        if let Some(score) = weights.score_row(row) {
            labels.push(row.label == 1.0);
            scores.push(score);
        }
    }
    match roc_auc(&labels, &scores) {
        Ok(auc) => Ok((
            FoldResult { fold: name, train_rows: train.len(), test_rows: test.len(), auc },
            labels.into_iter().zip(scores).collect(),
        )),
        Err(e) => Err((name, e.to_string())),
    }
}

/// Cross-validation with one fold per unordered agent pair: the fold
/// trains on rows touching neither held-out agent and tests on rows
/// touching at least one.
pub fn crossval_leave_two_agents(
    dataset: &Dataset,
    config: &PredictorConfig,
) -> Result<CrossValReport> {
    let agents = &dataset.agents;
    if agents.len() < 3 {
        return Err(ArenaError::Validation(format!(
            "leave-two-agents-out needs at least 3 agents, got {}",
            agents.len()
        )));
    }
    let mut pairs = Vec::new();
    for i in 0..agents.len() {
        for j in i + 1..agents.len() {
            pairs.push((agents[i].as_str(), agents[j].as_str()));
        }
    }
    let outcomes: Vec<_> = pairs
        .par_iter()
        .map(|(a, b)| {
            let held_out = |row: &FeatureRow| {
                row.first == *a || row.first == *b || row.second == *a || row.second == *b
            };
            let train: Vec<&FeatureRow> =
                dataset.rows.iter().filter(|r| !held_out(r)).collect();
            let test: Vec<&FeatureRow> =
                dataset.rows.iter().filter(|r| held_out(r)).collect();
            assert!(
                train.iter().all(|r| !held_out(r)),
                "held-out agent leaked into a training fold"
            );
            score_fold(format!("{a}|{b}"), train, test, agents, config)
        })
        .collect();
    summarize_folds(outcomes)
}

/// Cross-validation over `k` folds that partition events, so all rows
/// of one event share a fold. Fold assignment is a seeded shuffle.
pub fn crossval_random_kfold(
    dataset: &Dataset,
    k: usize,
    seed: u64,
    config: &PredictorConfig,
) -> Result<CrossValReport> {
    if k < 2 {
        return Err(ArenaError::Validation(format!(
            "k-fold cross-validation needs k >= 2, got {k}"
        )));
    }
    let events: BTreeSet<usize> = dataset.rows.iter().map(|r| r.event).collect();
    let mut events: Vec<usize> = events.into_iter().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seeds::mix(&[seed, SALT_FOLDS]));
    events.shuffle(&mut rng);
    let fold_of: BTreeMap<usize, usize> = events
        .iter()
        .enumerate()
        .map(|(position, event)| (*event, position % k))
        .collect();

    let outcomes: Vec<_> = (0..k)
        .into_par_iter()
        .map(|fold| {
            let train: Vec<&FeatureRow> =
                dataset.rows.iter().filter(|r| fold_of[&r.event] != fold).collect();
            let test: Vec<&FeatureRow> =
                dataset.rows.iter().filter(|r| fold_of[&r.event] == fold).collect();
            score_fold(format!("fold-{fold}"), train, test, &dataset.agents, config)
        })
        .collect();
    summarize_folds(outcomes)
}

/// Features ranked by absolute weight, sign preserved. Per-game
/// schemes are ranked by the mean weight across games.
pub fn feature_importances(weights: &PredictorWeights) -> Vec<(String, f64)> {
    let names = feature_names(&weights.identity_agents);
    let averaged: Vec<f64> = match &weights.scheme {
        WeightScheme::Fixed(w) => w.clone(),
        WeightScheme::PerGame(map) => {
            let mut sums = vec![0.0; names.len()];
            for vector in map.values() {
                for (sum, w) in sums.iter_mut().zip(vector) {
                    *sum += w;
                }
            }
            sums.iter().map(|s| s / map.len() as f64).collect()
        }
    };
    let mut ranked: Vec<(String, f64)> = names.into_iter().zip(averaged).collect();
    ranked.sort_by(|a, b| b.1.abs().total_cmp(&a.1.abs()).then_with(|| a.0.cmp(&b.0)));
    ranked
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn plain_row(
        first: &str,
        second: &str,
        label: f64,
        event: usize,
        first_tom: f64,
        second_tom: f64,
    ) -> FeatureRow {
        let mut first_values = [Some(0.5); N_METRICS];
        let mut second_values = [Some(0.5); N_METRICS];
        first_values[0] = Some(first_tom);
        second_values[0] = Some(second_tom);
        FeatureRow {
            first: first.into(),
            second: second.into(),
            label,
            game: GameKind::Hupi,
            event,
            first_values,
            second_values,
        }
    }

    fn tom_ladder_rows(agents: &[&str], events: usize) -> Vec<FeatureRow> {
        let mut rows = Vec::new();
        for event in 0..events {
            for i in 0..agents.len() {
                for j in i + 1..agents.len() {
                    let (ti, tj) = (i as f64 / 10.0, j as f64 / 10.0);
                    rows.push(if (event + i + j) % 2 == 0 {
                        plain_row(agents[i], agents[j], 0.0, event, ti, tj)
                    } else {
                        plain_row(agents[j], agents[i], 1.0, event, tj, ti)
                    });
                }
            }
        }
        rows
    }

    fn dataset_of(rows: Vec<FeatureRow>) -> Dataset {
        let agents: BTreeSet<String> = rows
            .iter()
            .flat_map(|r| [r.first.clone(), r.second.clone()])
            .collect();
        Dataset { rows, agents: agents.into_iter().collect(), dropped_missing_metrics: 0 }
    }

    #[test]
    fn dataset_excludes_ties_parallel_and_unmetered_rows() {
        let event = Event {
            match_id: "m1".into(),
            game: GameKind::Hupi,
            size: 3,
            framing: crate::types::Framing::A,
            communication: true,
            rewards: vec![
                ("alpha".into(), 2.0),
                ("beta".into(), 1.0),
                ("gamma".into(), 1.0),
            ],
        };
        let comparison = |first: &str, second: &str, score: f64, kind| Comparison {
            first: first.into(),
            second: second.into(),
            score,
            game: GameKind::Hupi,
            kind,
            first_event: 0,
            second_event: 0,
        };
        let comparisons = vec![
            comparison("alpha", "beta", 1.0, ComparisonKind::CoPlay),
            comparison("alpha", "gamma", 1.0, ComparisonKind::CoPlay),
            comparison("beta", "gamma", 0.5, ComparisonKind::CoPlay),
            comparison("alpha", "beta", 1.0, ComparisonKind::Parallel),
        ];
        let vector = |key: &str, tom: f64| MetricVector {
            model_key: key.into(),
            match_id: "m1".into(),
            game: GameKind::Hupi,
            size: 3,
            framing: crate::types::Framing::A,
            communication: true,
            values: [("tom".to_string(), tom)].into_iter().collect(),
        };
        let vectors = vec![vector("alpha", 0.9), vector("beta", 0.4)];

        let dataset = build_dataset(&vectors, &comparisons, &[event]);
        assert_eq!(dataset.rows.len(), 1, "tie, parallel, and missing-gamma rows drop");
        assert_eq!(dataset.dropped_missing_metrics, 1);
        assert_eq!(dataset.agents, vec!["alpha".to_string(), "beta".to_string()]);
        let row = &dataset.rows[0];
        assert_eq!(row.first_values[0], Some(0.9));
        assert_eq!(row.first_values[1], None, "unmeasured metrics stay missing");
        assert_eq!(row.label, 1.0);
    }

    #[test]
    fn scores_are_antisymmetric() {
        let rows = tom_ladder_rows(&["a", "b", "c"], 4);
        let dataset = dataset_of(rows.clone());
        let weights = fit_predictor(&dataset, &PredictorConfig::default()).unwrap();
        for row in &rows {
            let mut swapped = row.clone();
            std::mem::swap(&mut swapped.first, &mut swapped.second);
            std::mem::swap(&mut swapped.first_values, &mut swapped.second_values);
            swapped.label = 1.0 - swapped.label;
            let forward = weights.score_row(row).unwrap();
            let backward = weights.score_row(&swapped).unwrap();
            assert!((forward + backward).abs() < 1e-12);
            let p_forward = weights.predict_row(row).unwrap();
            let p_backward = weights.predict_row(&swapped).unwrap();
            assert!((p_forward + p_backward - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn all_zero_features_give_zero_weights() {
        let rows: Vec<FeatureRow> = (0..20)
            .map(|i| plain_row("a", "b", (i % 2) as f64, i, 0.5, 0.5))
            .collect();
        let dataset = dataset_of(rows);
        let weights = fit_predictor(&dataset, &PredictorConfig::default()).unwrap();
        let WeightScheme::Fixed(w) = &weights.scheme else { panic!("fixed fit") };
        assert!(w.iter().all(|w| w.abs() < 1e-9), "no signal leaves weights at zero");
    }

    #[test]
    fn separable_feature_dominates() {
        let mut rows = Vec::new();
        for i in 0..40 {
            let label = (i % 2) as f64;
            let (ti, tj) = if label == 1.0 { (0.9, 0.1) } else { (0.1, 0.9) };
            rows.push(plain_row("a", "b", label, i, ti, tj));
        }
        let dataset = dataset_of(rows);
        let weights = fit_predictor(&dataset, &PredictorConfig::default()).unwrap();
        let WeightScheme::Fixed(w) = &weights.scheme else { panic!("fixed fit") };
        assert!(w[0] > 1.0, "tom weight should grow large, got {}", w[0]);
        for (m, other) in w.iter().enumerate().skip(1).take(N_METRICS - 1) {
            assert!(other.abs() < 1e-6, "metric {m} has no signal, got {other}");
        }
    }

    #[test]
    fn fit_recovers_generating_direction() {
        let true_g = [2.5, -1.5, 0.0, 1.0, 0.0, -0.5, 2.0];
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut rows = Vec::new();
        for event in 0..5000 {
            let draw = |rng: &mut ChaCha8Rng| {
                let mut v = [None; N_METRICS];
                for slot in &mut v {
                    *slot = Some(rng.gen::<f64>());
                }
                v
            };
            let first_values = draw(&mut rng);
            let second_values = draw(&mut rng);
            let margin: f64 = (0..N_METRICS)
                .map(|m| true_g[m] * (first_values[m].unwrap() - second_values[m].unwrap()))
                .sum();
            let label = if rng.gen::<f64>() < sigmoid(margin) { 1.0 } else { 0.0 };
            rows.push(FeatureRow {
                first: "a".into(),
                second: "b".into(),
                label,
                game: GameKind::Hupi,
                event,
                first_values,
                second_values,
            });
        }
        let dataset = dataset_of(rows);
        let weights = fit_predictor(&dataset, &PredictorConfig::default()).unwrap();
        let WeightScheme::Fixed(w) = &weights.scheme else { panic!("fixed fit") };
        let dot: f64 = (0..N_METRICS).map(|m| w[m] * true_g[m]).sum();
        let norm_w: f64 = w[..N_METRICS].iter().map(|w| w * w).sum::<f64>().sqrt();
        let norm_g: f64 = true_g.iter().map(|g| g * g).sum::<f64>().sqrt();
        let cosine = dot / (norm_w * norm_g);
        assert!(cosine >= 0.95, "recovered direction cosine {cosine}");
    }

    #[test]
    fn per_game_weights_capture_opposite_relationships() {
        let mut rows = Vec::new();
        for i in 0..40 {
            let label = (i % 2) as f64;
            let (ti, tj) = if label == 1.0 { (0.9, 0.1) } else { (0.1, 0.9) };
            rows.push(plain_row("a", "b", label, i, ti, tj));
            let mut reversed = plain_row("a", "b", label, 40 + i, tj, ti);
            reversed.game = GameKind::Tragedy;
            rows.push(reversed);
        }
        let dataset = dataset_of(rows);

        let pooled = fit_predictor(&dataset, &PredictorConfig::default()).unwrap();
        let WeightScheme::Fixed(pooled_w) = &pooled.scheme else { panic!("fixed fit") };
        assert!(pooled_w[0].abs() < 1e-6, "opposite games cancel in a pooled fit");

        let config = PredictorConfig { per_game: true, ..PredictorConfig::default() };
        let per_game = fit_predictor(&dataset, &config).unwrap();
        let WeightScheme::PerGame(map) = &per_game.scheme else { panic!("per-game fit") };
        assert!(map[&GameKind::Hupi][0] > 1.0);
        assert!(map[&GameKind::Tragedy][0] < -1.0);
    }

    #[test]
    fn missing_indicators_carry_signal() {
        let mut rows = Vec::new();
        for i in 0..40 {
            let label = (i % 2) as f64;
            let mut row = plain_row("a", "b", label, i, 0.5, 0.5);
            if label == 1.0 {
                row.first_values[3] = None;
            } else {
                row.second_values[3] = None;
            }
            rows.push(row);
        }
        let dataset = dataset_of(rows.clone());
        let weights = fit_predictor(&dataset, &PredictorConfig::default()).unwrap();
        let WeightScheme::Fixed(w) = &weights.scheme else { panic!("fixed fit") };
        assert!(w[N_METRICS + 3] > 1.0, "indicator weight is {}", w[N_METRICS + 3]);
        for row in &rows {
            let p = weights.predict_row(row).unwrap();
            assert_eq!(p > 0.5, row.label == 1.0);
        }
    }

    #[test]
    fn leave_two_agents_covers_every_pair_without_leakage() {
        let agents = ["a", "b", "c", "d"];
        let dataset = dataset_of(tom_ladder_rows(&agents, 6));
        let report =
            crossval_leave_two_agents(&dataset, &PredictorConfig::default()).unwrap();
        assert_eq!(report.folds.len(), 6, "C(4,2) folds");
        assert!(report.skipped.is_empty());
        for agent in agents {
            let held_out = report
                .folds
                .iter()
                .filter(|f| f.fold.split('|').any(|part| part == agent))
                .count();
            assert_eq!(held_out, 3, "each agent held out in |A|-1 folds");
        }
        assert!(
            report.folds.iter().all(|f| f.auc == 1.0),
            "deterministic ladder is perfectly predictable: {:?}",
            report.folds
        );
        assert!((report.mean_auc - 1.0).abs() < 1e-12);
    }

    #[test]
    fn leave_two_agents_needs_three_agents() {
        let dataset = dataset_of(tom_ladder_rows(&["a", "b"], 4));
        assert!(crossval_leave_two_agents(&dataset, &PredictorConfig::default()).is_err());
    }

    #[test]
    fn kfold_groups_rows_by_event() {
        let dataset = dataset_of(tom_ladder_rows(&["a", "b", "c"], 8));
        let config = PredictorConfig::default();
        let report = crossval_random_kfold(&dataset, 4, 7, &config).unwrap();
        assert_eq!(report.folds.len(), 4);
        assert_eq!(
            report.folds.iter().map(|f| f.test_rows).sum::<usize>(),
            dataset.rows.len(),
            "test folds partition the rows"
        );
        for fold in &report.folds {
            assert_eq!(fold.test_rows % 3, 0, "events of 3 rows never split across folds");
        }
        let again = crossval_random_kfold(&dataset, 4, 7, &config).unwrap();
        assert_eq!(report, again, "seeded folding is reproducible");
        let other_seed = crossval_random_kfold(&dataset, 4, 8, &config).unwrap();
        assert_eq!(other_seed.folds.len(), 4);

        assert!(crossval_random_kfold(&dataset, 1, 7, &config).is_err());
    }

    #[test]
    fn identity_block_separates_otherwise_identical_agents() {
        let mut rows = Vec::new();
        for event in 0..30 {
            rows.push(plain_row("strong", "weak", 1.0, event, 0.5, 0.5));
        }
        for event in 30..60 {
            rows.push(plain_row("weak", "strong", 0.0, event, 0.5, 0.5));
        }
        let dataset = dataset_of(rows.clone());
        let config = PredictorConfig { identity: true, ..PredictorConfig::default() };
        let weights = fit_predictor(&dataset, &config).unwrap();
        assert_eq!(weights.identity_agents, vec!["strong".to_string(), "weak".to_string()]);
        for row in &rows {
            let p = weights.predict_row(row).unwrap();
            assert_eq!(p > 0.5, row.label == 1.0, "identity carries the signal");
        }
        let names = feature_names(&weights.identity_agents);
        assert_eq!(names.len(), 2 * N_METRICS + 2);
        assert_eq!(names[2 * N_METRICS], "id:strong");
    }

    #[test]
    fn importances_rank_by_magnitude_with_sign() {
        let weights = PredictorWeights {
            standardization: Standardization { means: [0.0; N_METRICS], stds: [1.0; N_METRICS] },
            scheme: WeightScheme::Fixed(
                [0.9, -1.2, 0.1, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0].to_vec(),
            ),
            identity_agents: vec![],
        };
        let ranked = feature_importances(&weights);
        assert_eq!(ranked[0], ("transparency".to_string(), -1.2));
        assert_eq!(ranked[1], ("tom".to_string(), 0.9));
        assert_eq!(ranked.len(), 2 * N_METRICS);
    }
}
