//! Command-line front end: runs campaigns and drives the analysis
//! pipeline from traces to figures.
//!
//! Every subcommand takes `--config` and works under the configured
//! output directory: traces land in `traces/`, fitted ratings in
//! `ratings/`, behavioral metrics in `metrics/`, outcome models in
//! `predictor/`, and rendered figures with their CSV twins in
//! `figures/`. Exit codes: 0 on success, 1 for usage errors, 2 for
//! runtime failures (with diagnostics on standard error).

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use arena_core::agents::{ChatCompleter, HttpChatClient};
use arena_core::config::{load_config, AgentKind, ArenaConfig};
use arena_core::games::replay_match;
use arena_core::metrics::{self, JudgeReport, JudgeVerdict, MetricVector};
use arena_core::predictor::{self, PredictorConfig};
use arena_core::ratings::{self, BootstrapSummary, FitOptions};
use arena_core::report::{self, figures};
use arena_core::runner;
use arena_core::trace;
use arena_core::types::{GameKind, MatchRecord};

#[derive(Parser)]
#[command(name = "arena", version, about = "Multi-agent game arena and analysis pipeline")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the configured campaign and write one trace per match.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Disable communication in every match.
        #[arg(long)]
        ablation: bool,
        /// Keep existing completed traces instead of re-running them.
        #[arg(long)]
        resume: bool,
    },
    /// Fit skill ratings from completed traces.
    Rate {
        #[arg(long)]
        config: PathBuf,
        /// Also fit per-game rating deviations.
        #[arg(long)]
        per_game: bool,
        /// Also fit the latent-vector model with this dimension.
        #[arg(long)]
        vector_dim: Option<usize>,
        /// Bootstrap rating uncertainty with this many resamples.
        #[arg(long)]
        bootstrap: Option<usize>,
    },
    /// Compute behavioral metrics, optionally with judged scores.
    Metrics {
        #[arg(long)]
        config: PathBuf,
        /// Registered llm agent to score transcripts with.
        #[arg(long)]
        judge: Option<String>,
        /// Second judge; enables the agreement report.
        #[arg(long)]
        second_judge: Option<String>,
    },
    /// Fit the metric-based outcome predictor.
    Predict {
        #[arg(long)]
        config: PathBuf,
        /// Fit one weight vector per game.
        #[arg(long)]
        per_game: bool,
        /// Add agent-identity features.
        #[arg(long)]
        identity: bool,
        /// Cross-validation scheme to evaluate with.
        #[arg(long, value_enum)]
        cv: Option<CvScheme>,
    },
    /// Render figures and their CSV twins from prior outputs.
    Report {
        #[arg(long)]
        config: PathBuf,
    },
    /// Check trace integrity by replaying every match.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum CvScheme {
    /// Leave-two-agents-out folds.
    L2ao,
    /// 4-fold, grouped by event.
    Kfold,
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    let result = match cli.command {
        Command::Run { config, ablation, resume } => cmd_run(&config, ablation, resume),
        Command::Rate { config, per_game, vector_dim, bootstrap } => {
            cmd_rate(&config, per_game, vector_dim, bootstrap)
        }
        Command::Metrics { config, judge, second_judge } => {
            cmd_metrics(&config, judge.as_deref(), second_judge.as_deref())
        }
        Command::Predict { config, per_game, identity, cv } => {
            cmd_predict(&config, per_game, identity, cv)
        }
        Command::Report { config } => cmd_report(&config),
        Command::Validate { config } => cmd_validate(&config),
    };
    if let Err(e) = result {
        eprintln!("error: {e:#}");
        std::process::exit(2);
    }
}

fn num(v: f64) -> String {
    format!("{v:.6}")
}

fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

fn output_subdir(config: &ArenaConfig, name: &str) -> Result<PathBuf> {
    let dir = config.output_dir.join(name);
    fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    Ok(dir)
}

fn completed_records(config: &ArenaConfig) -> Result<Vec<MatchRecord>> {
    let dir = runner::trace_dir(config);
    let report = trace::read_traces(&dir)?;
    for (path, reason) in &report.skipped {
        eprintln!("skipping unreadable trace {}: {reason}", path.display());
    }
    if report.completed.is_empty() {
        bail!("no completed traces under {}; run `arena run` first", dir.display());
    }
    Ok(report.completed)
}

fn cmd_run(config_path: &Path, ablation: bool, resume: bool) -> Result<()> {
    let mut config = load_config(config_path)?;
    if ablation {
        config.communication = false;
    }
    let plan = runner::plan_campaign(&config)?;
    for size in &plan.infeasible_sizes {
        eprintln!(
            "size {size} skipped: only {} agents are registered",
            config.agents.len()
        );
    }
    println!(
        "planned {} matches into {}",
        plan.matches.len(),
        runner::trace_dir(&config).display()
    );
    let summary = runner::run_campaign(&config, resume)?;
    println!(
        "completed {} | resumed past {} | failed {} | defaulted submissions {}",
        summary.completed, summary.skipped_existing, summary.failed, summary.flagged_actions
    );
    if summary.failed > 0 {
        bail!("{} of {} planned matches failed", summary.failed, summary.planned);
    }
    Ok(())
}

fn cmd_rate(
    config_path: &Path,
    per_game: bool,
    vector_dim: Option<usize>,
    bootstrap: Option<usize>,
) -> Result<()> {
    let config = load_config(config_path)?;
    let records = completed_records(&config)?;
    let events = ratings::events_from_records(&records);
    let comparisons = ratings::extract_comparisons(&events);
    let dir = output_subdir(&config, "ratings")?;
    let options = FitOptions::default();

    let global = ratings::fit_elo(&comparisons, options)?;
    write_json(&dir.join("global.json"), &global)?;
    let mut csv = String::from("agent,rating\n");
    for (agent, rating) in &global.ratings {
        let _ = writeln!(csv, "{agent},{}", num(*rating));
    }
    write_text(&dir.join("global.csv"), &csv)?;
    println!(
        "global ratings fitted from {} comparisons across {} events",
        comparisons.len(),
        events.len()
    );

    if per_game {
        let fitted = ratings::fit_elo_per_game(&comparisons, options)?;
        write_json(&dir.join("per_game.json"), &fitted)?;
        let mut csv = String::from("agent,mean");
        for game in GameKind::ALL {
            let _ = write!(csv, ",{game}");
        }
        csv.push('\n');
        for (agent, mean) in &fitted.mean {
            let _ = write!(csv, "{agent},{}", num(*mean));
            for game in GameKind::ALL {
                match fitted.rating_in(agent, game) {
                    Some(rating) => {
                        let _ = write!(csv, ",{}", num(rating));
                    }
                    None => csv.push(','),
                }
            }
            csv.push('\n');
        }
        write_text(&dir.join("per_game.csv"), &csv)?;
        println!("per-game deviations fitted for {} agents", fitted.mean.len());
    }

    if let Some(dim) = vector_dim {
        let model = ratings::fit_vector_model(&comparisons, dim, config.seed, options)?;
        write_json(&dir.join("vector.json"), &model)?;
        let header: String =
            (0..dim).fold(String::new(), |mut acc, d| {
                let _ = write!(acc, ",d{d}");
                acc
            });
        let mut csv = format!("agent{header}\n");
        for (agent, vector) in &model.agents {
            let _ = write!(csv, "{agent}");
            for value in vector {
                let _ = write!(csv, ",{}", num(*value));
            }
            csv.push('\n');
        }
        write_text(&dir.join("vector_agents.csv"), &csv)?;
        let mut csv = format!("game{header}\n");
        for (game, vector) in &model.games {
            let _ = write!(csv, "{game}");
            for value in vector {
                let _ = write!(csv, ",{}", num(*value));
            }
            csv.push('\n');
        }
        write_text(&dir.join("vector_games.csv"), &csv)?;
        println!("latent-vector model fitted with dimension {dim}");
    }

    if let Some(resamples) = bootstrap {
        let summary = ratings::bootstrap_ratings(&events, resamples, config.seed, options)?;
        write_json(&dir.join("bootstrap.json"), &summary)?;
        let mut csv = String::from("agent,q025,q25,median,q75,q975\n");
        for (agent, q) in &summary.quantiles {
            let _ = writeln!(
                csv,
                "{agent},{},{},{},{},{}",
                num(q.q025),
                num(q.q25),
                num(q.median),
                num(q.q75),
                num(q.q975)
            );
        }
        write_text(&dir.join("bootstrap.csv"), &csv)?;
        write_text(&dir.join("bootstrap_samples.csv"), &figures::violin_csv(&summary.samples))?;
        println!(
            "bootstrap used {} of {} resamples ({} skipped)",
            summary.resamples_used, summary.resamples_requested, summary.resamples_skipped
        );
    }
    Ok(())
}

fn judge_records(
    config: &ArenaConfig,
    judge_name: &str,
    records: &[MatchRecord],
) -> Result<JudgeReport> {
    let agent = config
        .agent(judge_name)
        .with_context(|| format!("judge {judge_name:?} is not a registered agent"))?;
    if agent.kind != AgentKind::Llm {
        bail!("judge {judge_name:?} must be an llm agent");
    }
    let binding = config.llm.as_ref().context("llm section required for judging")?;
    let model = agent.model.as_deref().unwrap_or(&binding.model);
    let client = HttpChatClient::new(binding, model)?;
    let mut combined = JudgeReport::default();
    for record in records {
        let report = metrics::judge_match(judge_name, &client as &dyn ChatCompleter, record)?;
        combined.verdicts.extend(report.verdicts);
        combined.dropped.extend(report.dropped);
    }
    Ok(combined)
}

fn verdicts_path(dir: &Path, judge: &str) -> PathBuf {
    dir.join(format!("verdicts_{judge}.jsonl"))
}

fn load_verdicts(path: &Path) -> Result<Vec<JudgeVerdict>> {
    let text =
        fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| serde_json::from_str(l).with_context(|| format!("parsing {}", path.display())))
        .collect()
}

fn load_all_verdicts(dir: &Path) -> Result<Vec<JudgeVerdict>> {
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| {
            p.file_name()
                .and_then(|n| n.to_str())
                .is_some_and(|n| n.starts_with("verdicts_") && n.ends_with(".jsonl"))
        })
        .collect();
    paths.sort();
    let mut verdicts = Vec::new();
    for path in paths {
        verdicts.extend(load_verdicts(&path)?);
    }
    Ok(verdicts)
}

fn cmd_metrics(
    config_path: &Path,
    judge: Option<&str>,
    second_judge: Option<&str>,
) -> Result<()> {
    let config = load_config(config_path)?;
    let records = completed_records(&config)?;
    let dir = output_subdir(&config, "metrics")?;

    for judge_name in [judge, second_judge].into_iter().flatten() {
        let report = judge_records(&config, judge_name, &records)?;
        let mut text = String::new();
        for verdict in &report.verdicts {
            let _ = writeln!(text, "{}", serde_json::to_string(verdict)?);
        }
        write_text(&verdicts_path(&dir, judge_name), &text)?;
        println!(
            "judge {judge_name}: {} verdicts, {} dropped",
            report.verdicts.len(),
            report.dropped.len()
        );
        for (match_id, subject, metric) in &report.dropped {
            eprintln!("judge {judge_name} never scored {metric} for {subject} in {match_id}");
        }
    }

    let verdicts = load_all_verdicts(&dir)?;
    let vectors = metrics::metric_vectors(&records, &verdicts)?;
    let mut text = String::new();
    for vector in &vectors {
        let _ = writeln!(text, "{}", serde_json::to_string(vector)?);
    }
    write_text(&dir.join("metric_vectors.jsonl"), &text)?;
    println!(
        "{} metric vectors over {} matches ({} verdicts joined)",
        vectors.len(),
        records.len(),
        verdicts.len()
    );

    if let (Some(a), Some(b)) = (judge, second_judge) {
        let agreement = metrics::judge_agreement(
            &load_verdicts(&verdicts_path(&dir, a))?,
            &load_verdicts(&verdicts_path(&dir, b))?,
        )?;
        write_json(&dir.join("agreement.json"), &agreement)?;
        println!(
            "judge agreement over {} shared verdicts: mean absolute difference {:.3}, \
             exact {:.0}%, within one {:.0}%",
            agreement.pairs,
            agreement.mean_absolute_difference,
            agreement.exact_rate * 100.0,
            agreement.within_one_rate * 100.0
        );
    }
    Ok(())
}

fn load_metric_vectors(config: &ArenaConfig) -> Result<Vec<MetricVector>> {
    let path = config.output_dir.join("metrics").join("metric_vectors.jsonl");
    if !path.exists() {
        bail!("{} not found; run `arena metrics` first", path.display());
    }
    let text = fs::read_to_string(&path)?;
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| serde_json::from_str(l).with_context(|| format!("parsing {}", path.display())))
        .collect()
}

fn cv_csv(report: &predictor::CrossValReport) -> String {
    let mut csv = String::from("fold,train_rows,test_rows,auc\n");
    for fold in &report.folds {
        let _ = writeln!(
            csv,
            "{},{},{},{}",
            fold.fold,
            fold.train_rows,
            fold.test_rows,
            num(fold.auc)
        );
    }
    csv
}

fn cmd_predict(
    config_path: &Path,
    per_game: bool,
    identity: bool,
    cv: Option<CvScheme>,
) -> Result<()> {
    let config = load_config(config_path)?;
    let records = completed_records(&config)?;
    let events = ratings::events_from_records(&records);
    let comparisons = ratings::extract_comparisons(&events);
    let vectors = load_metric_vectors(&config)?;
    let dataset = predictor::build_dataset(&vectors, &comparisons, &events);
    if dataset.dropped_missing_metrics > 0 {
        eprintln!(
            "dropped {} comparisons lacking metric vectors",
            dataset.dropped_missing_metrics
        );
    }
    let dir = output_subdir(&config, "predictor")?;
    let predictor_config = PredictorConfig { per_game, identity, ..PredictorConfig::default() };

    let weights = predictor::fit_predictor(&dataset, &predictor_config)?;
    write_json(&dir.join("weights.json"), &weights)?;
    let mut csv = String::from("feature,weight\n");
    for (feature, weight) in predictor::feature_importances(&weights) {
        let _ = writeln!(csv, "{feature},{}", num(weight));
    }
    write_text(&dir.join("importances.csv"), &csv)?;
    println!(
        "predictor fitted on {} rows over {} agents",
        dataset.rows.len(),
        dataset.agents.len()
    );

    if let Some(scheme) = cv {
        let (name, report) = match scheme {
            CvScheme::L2ao => (
                "l2ao",
                predictor::crossval_leave_two_agents(&dataset, &predictor_config)?,
            ),
            CvScheme::Kfold => (
                "kfold",
                predictor::crossval_random_kfold(&dataset, 4, config.seed, &predictor_config)?,
            ),
        };
        write_json(&dir.join(format!("cv_{name}.json")), &report)?;
        write_text(&dir.join(format!("cv_{name}.csv")), &cv_csv(&report))?;
        for (fold, reason) in &report.skipped {
            eprintln!("fold {fold} skipped: {reason}");
        }
        println!(
            "{name} mean AUC {:.3} over {} folds ({} skipped)",
            report.mean_auc,
            report.folds.len(),
            report.skipped.len()
        );
    }
    Ok(())
}

fn cmd_report(config_path: &Path) -> Result<()> {
    let config = load_config(config_path)?;
    let records = completed_records(&config)?;
    let dir = output_subdir(&config, "figures")?;
    let mut written = Vec::new();

    let (comm, silent): (Vec<MatchRecord>, Vec<MatchRecord>) =
        records.iter().cloned().partition(|r| r.spec.communication);
    for (label, subset) in [("comm", comm), ("silent", silent)] {
        if subset.is_empty() {
            continue;
        }
        let heatmap = report::outperformance_heatmap(&subset);
        let title = format!(
            "win probability, communication {}",
            if label == "comm" { "on" } else { "off" }
        );
        write_text(
            &dir.join(format!("outperformance_{label}.svg")),
            &figures::outperformance_svg(&title, &heatmap),
        )?;
        write_text(
            &dir.join(format!("outperformance_{label}.csv")),
            &figures::outperformance_csv(&heatmap),
        )?;
        written.push(format!("outperformance_{label}"));
    }

    match load_metric_vectors(&config) {
        Ok(vectors) => {
            let consistency = report::consistency_report(&vectors);
            write_text(
                &dir.join("similarity.svg"),
                &figures::similarity_svg("behavioral profile correlations", &consistency.similarity),
            )?;
            write_text(
                &dir.join("similarity.csv"),
                &figures::similarity_csv(&consistency.similarity),
            )?;
            let bars = figures::consistency_bars(&consistency);
            write_text(
                &dir.join("consistency.svg"),
                &figures::bar_chart_svg("behavioral consistency", &bars),
            )?;
            write_text(&dir.join("consistency.csv"), &figures::bar_chart_csv(&bars))?;
            write_json(&config.output_dir.join("metrics").join("consistency.json"), &consistency)?;
            written.push("similarity".into());
            written.push("consistency".into());
        }
        Err(e) => eprintln!("skipping similarity and consistency figures: {e}"),
    }

    let bootstrap_path = config.output_dir.join("ratings").join("bootstrap.json");
    if bootstrap_path.exists() {
        let summary: BootstrapSummary =
            serde_json::from_str(&fs::read_to_string(&bootstrap_path)?)
                .with_context(|| format!("parsing {}", bootstrap_path.display()))?;
        write_text(
            &dir.join("ratings_violin.svg"),
            &figures::violin_svg("bootstrapped ratings", &summary.samples),
        )?;
        write_text(&dir.join("ratings_violin.csv"), &figures::violin_csv(&summary.samples))?;
        written.push("ratings_violin".into());
    } else {
        eprintln!("skipping rating violins: {} not found", bootstrap_path.display());
    }

    let weights_path = config.output_dir.join("predictor").join("weights.json");
    if weights_path.exists() {
        let weights: predictor::PredictorWeights =
            serde_json::from_str(&fs::read_to_string(&weights_path)?)
                .with_context(|| format!("parsing {}", weights_path.display()))?;
        let bars: Vec<(String, f64, f64)> = predictor::feature_importances(&weights)
            .into_iter()
            .map(|(feature, weight)| (feature, weight, 0.0))
            .collect();
        write_text(
            &dir.join("importances.svg"),
            &figures::bar_chart_svg("predictor feature weights", &bars),
        )?;
        write_text(&dir.join("importances.csv"), &figures::bar_chart_csv(&bars))?;
        written.push("importances".into());
    } else {
        eprintln!("skipping feature importances: {} not found", weights_path.display());
    }

    let mut curves = Vec::new();
    for name in ["l2ao", "kfold"] {
        let path = config.output_dir.join("predictor").join(format!("cv_{name}.json"));
        if !path.exists() {
            continue;
        }
        let cv: predictor::CrossValReport = serde_json::from_str(&fs::read_to_string(&path)?)
            .with_context(|| format!("parsing {}", path.display()))?;
        let labels: Vec<bool> = cv.pooled.iter().map(|(l, _)| *l).collect();
        let scores: Vec<f64> = cv.pooled.iter().map(|(_, s)| *s).collect();
        match report::roc_points(&labels, &scores) {
            Ok(points) => curves.push((format!("{name} (AUC {:.2})", cv.mean_auc), points)),
            Err(e) => eprintln!("skipping ROC curve for {name}: {e}"),
        }
    }
    if !curves.is_empty() {
        write_text(
            &dir.join("roc.svg"),
            &figures::roc_svg("out-of-fold outcome prediction", &curves),
        )?;
        write_text(&dir.join("roc.csv"), &figures::roc_csv(&curves))?;
        written.push("roc".into());
    }

    if written.is_empty() {
        bail!("nothing to report: no analysis outputs found");
    }
    println!("wrote {} figure sets to {}: {}", written.len(), dir.display(), written.join(", "));
    Ok(())
}

fn cmd_validate(config_path: &Path) -> Result<()> {
    let config = load_config(config_path)?;
    let dir = runner::trace_dir(&config);
    let report = trace::read_traces(&dir)?;
    let mut failures = 0usize;
    for (path, reason) in &report.skipped {
        failures += 1;
        eprintln!("unreadable trace {}: {reason}", path.display());
    }
    let mut replayed = 0usize;
    let mut per_game: BTreeMap<GameKind, usize> = BTreeMap::new();
    for record in report.completed.iter().chain(&report.aborted) {
        match replay_match(record) {
            Ok(_) => {
                replayed += 1;
                *per_game.entry(record.spec.game).or_default() += 1;
            }
            Err(e) => {
                failures += 1;
                eprintln!("replay mismatch: {e}");
            }
        }
    }
    let total = report.completed.len() + report.aborted.len() + report.skipped.len();
    if total == 0 {
        bail!("no traces under {}", dir.display());
    }
    if failures > 0 {
        bail!("{failures} of {total} traces failed validation");
    }
    let breakdown: Vec<String> =
        per_game.iter().map(|(game, count)| format!("{game} {count}")).collect();
    println!(
        "validated {replayed} traces ({} completed, {} aborted): every round and reward \
         replays exactly [{}]",
        report.completed.len(),
        report.aborted.len(),
        breakdown.join(", ")
    );
    Ok(())
}
