//! Command-line front door: `rate`, `evaluate`, `sweep`, `bench`, `synth`.
//!
//! Exit codes: 0 on success (for `rate`: convergence), 2 when propagation
//! stopped at the iteration cap, 1 for usage or IO errors. All randomness
//! flows from `--seed`; results are independent of `--threads`.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use riskprop_core::eval::{
    ablation_ads, ablation_random_scores, auc, classification_metrics, one_way_anova,
    precision_recall_at_k, score_groups, threshold_sweep, train_test_split, CurvePoint,
    ScalarMetrics, UnlabeledPolicy,
};
use riskprop_core::graph::{build_graph, score_all_edges, PayerPayeeGraph};
use riskprop_core::ingest::{Category, ColumnMap};
use riskprop_core::propagation::{
    iterate_until_convergence, LabelReliability, Mode, PropagationConfig, Termination,
};
use riskprop_core::rating::risk_of;
use riskprop_core::synth::{exchange_hub, generate, Pattern, SynthSpec};

use crate::bench::{fit_linear, scalability_benchmark, BenchOptions};
use crate::exec::ThreadPool;
use crate::io::{
    read_labels, read_report, read_transactions, termination_name, write_anova, write_bench,
    write_checkpoint, write_curves, write_graph_dump, write_labels, write_metrics, write_report,
    write_sweep, write_trace, write_transactions, Echo,
};
use crate::pipeline::{rate, restrict_labels, RateOptions};

#[derive(Parser)]
#[command(
    name = "riskprop",
    version,
    about = "Account risk rating over payer-payee transaction networks"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand)]
pub enum Command {
    /// Rate every account: parse, filter, build the bipartite graph, score
    /// edges, propagate to a fixed point, and write the risk report.
    Rate(RateArgs),
    /// Score a risk report against a label table.
    Evaluate(EvaluateArgs),
    /// Classification metrics across a range of risk thresholds.
    Sweep(SweepArgs),
    /// Pipeline timings over a ladder of random network sizes.
    Bench(BenchArgs),
    /// Generate synthetic transaction corpora and label files.
    Synth(SynthArgs),
}

/// Propagation flags shared by commands that run the engine.
#[derive(Args, Debug, Clone)]
pub struct PropagationArgs {
    /// Convergence threshold on the max summed absolute change.
    #[arg(long, default_value_t = 0.01)]
    pub epsilon: f64,
    /// Iteration safety cap.
    #[arg(long = "max-iters", default_value_t = 1000)]
    pub max_iters: usize,
    /// Initial payee trustiness.
    #[arg(long, default_value_t = 0.5)]
    pub init_trustiness: f64,
    /// Initial payer reliability (also the default-risk anchor).
    #[arg(long, default_value_t = 0.7)]
    pub init_reliability: f64,
    /// Initial edge confidence.
    #[arg(long, default_value_t = 0.5)]
    pub init_confidence: f64,
    /// Per-category initial reliability overrides,
    /// e.g. `gambling=0.3,exchange=0.8`.
    #[arg(long)]
    pub label_reliability: Option<String>,
    /// Let labeled illicit training accounts drift instead of pinning them.
    #[arg(long)]
    pub no_clamp_illicit: bool,
    /// Compare per-element mean changes (instead of raw sums) against
    /// epsilon.
    #[arg(long)]
    pub normalized_delta: bool,
}

impl PropagationArgs {
    fn to_config(&self, mode: Mode) -> Result<PropagationConfig> {
        let mut label_reliability = LabelReliability::default();
        if let Some(overrides) = &self.label_reliability {
            for part in overrides.split(',').filter(|p| !p.trim().is_empty()) {
                let (name, value) = part
                    .split_once('=')
                    .with_context(|| format!("expected category=value, got `{part}`"))?;
                let category = Category::parse(name.trim())
                    .with_context(|| format!("unknown category `{}`", name.trim()))?;
                let value: f64 = value
                    .trim()
                    .parse()
                    .with_context(|| format!("unparseable reliability in `{part}`"))?;
                label_reliability.set(category, value);
            }
        }
        let config = PropagationConfig {
            init_trustiness: self.init_trustiness,
            init_reliability: self.init_reliability,
            init_confidence: self.init_confidence,
            epsilon: self.epsilon,
            max_iterations: self.max_iters,
            mode,
            label_reliability,
            clamp_illicit: !self.no_clamp_illicit,
            normalized_delta: self.normalized_delta,
        };
        config.validate()?;
        Ok(config)
    }

    fn echo_into(&self, echo: &mut Echo) {
        echo.push("epsilon", self.epsilon)
            .push("max_iters", self.max_iters)
            .push("init_trustiness", self.init_trustiness)
            .push("init_reliability", self.init_reliability)
            .push("init_confidence", self.init_confidence)
            .push(
                "label_reliability",
                self.label_reliability.as_deref().unwrap_or("default"),
            )
            .push("clamp_illicit", !self.no_clamp_illicit)
            .push("normalized_delta", self.normalized_delta);
    }
}

#[derive(Args)]
pub struct RateArgs {
    /// Transactions CSV (`tx,from,to,value[,timestamp]`).
    #[arg(long)]
    pub transactions: PathBuf,
    /// Labels CSV (`address,category`).
    #[arg(long)]
    pub labels: Option<PathBuf>,
    /// Risk report output path.
    #[arg(long)]
    pub out: PathBuf,
    /// Per-iteration convergence trace output.
    #[arg(long)]
    pub trace: Option<PathBuf>,
    /// Converged state checkpoint output.
    #[arg(long)]
    pub checkpoint: Option<PathBuf>,
    /// Scored edge list output.
    #[arg(long = "dump-graph")]
    pub dump_graph: Option<PathBuf>,
    /// Seed training reliabilities from the labels (requires --labels).
    #[arg(long = "semi-supervised", requires = "labels")]
    pub semi_supervised: bool,
    /// Train fraction of labeled accounts used for initialization.
    #[arg(long, default_value_t = 0.8)]
    pub split: f64,
    /// Risk threshold for the predicted column.
    #[arg(long, default_value_t = 6.0)]
    pub rth: f64,
    /// Classify the top percentage by risk instead of thresholding.
    #[arg(long = "top-percent")]
    pub top_percent: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads (0 = all cores). Never affects results.
    #[arg(long, default_value_t = 0)]
    pub threads: usize,
    #[command(flatten)]
    pub propagation: PropagationArgs,
}

#[derive(Args)]
pub struct EvaluateArgs {
    /// Risk report produced by `rate`.
    #[arg(long)]
    pub report: PathBuf,
    #[arg(long)]
    pub labels: PathBuf,
    /// Transactions CSV; required by --anova and --ablation.
    #[arg(long)]
    pub transactions: Option<PathBuf>,
    /// Output directory for metrics.csv, curves.csv, and friends.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 6.0)]
    pub rth: f64,
    /// Classify the top percentage by risk instead of thresholding.
    #[arg(long = "top-percent")]
    pub top_percent: Option<f64>,
    /// Evaluate only the held-out share of a seeded train/test split
    /// (e.g. 0.8 scores the remaining 20%).
    #[arg(long)]
    pub split: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Comma-separated seed list; metrics become mean and stddev.
    #[arg(long)]
    pub seeds: Option<String>,
    /// Largest k of the precision/recall curves.
    #[arg(long = "k-max", default_value_t = 150)]
    pub k_max: usize,
    /// Count unlabeled accounts in the top k as ranking errors.
    #[arg(long = "strict-k")]
    pub strict_k: bool,
    /// Variance analysis of edge scores by payer label, against a
    /// seed-matched random-score baseline.
    #[arg(long, requires = "transactions")]
    pub anova: bool,
    /// Baseline classifiers: `ads` (no propagation) or `random`
    /// (random scores).
    #[arg(long, requires = "transactions")]
    pub ablation: Option<AblationKind>,
    /// Also sweep thresholds, e.g. `1..10` or `2,4,6`.
    #[arg(long = "sweep-rth")]
    pub sweep_rth: Option<String>,
    #[arg(long, default_value_t = 0)]
    pub threads: usize,
    #[command(flatten)]
    pub propagation: PropagationArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum AblationKind {
    Ads,
    Random,
}

#[derive(Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub report: PathBuf,
    #[arg(long)]
    pub labels: PathBuf,
    /// Sweep output file.
    #[arg(long)]
    pub out: PathBuf,
    /// Thresholds, e.g. `1..10` or `2,4,6`.
    #[arg(long, default_value = "1..10")]
    pub rths: String,
}

#[derive(Args)]
pub struct BenchArgs {
    /// Comma-separated transaction counts.
    #[arg(long, default_value = "10000,20000,40000,80000")]
    pub sizes: String,
    /// Benchmark rows output file.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Time exactly this many iterations per size instead of running to
    /// convergence.
    #[arg(long = "fixed-iters")]
    pub fixed_iters: Option<usize>,
    #[arg(long, default_value_t = 0.01)]
    pub epsilon: f64,
    #[arg(long = "max-iters", default_value_t = 1000)]
    pub max_iters: usize,
    #[arg(long, default_value_t = 0)]
    pub threads: usize,
}

#[derive(Args)]
pub struct SynthArgs {
    #[arg(long, default_value_t = 100)]
    pub payers: usize,
    #[arg(long, default_value_t = 100)]
    pub payees: usize,
    #[arg(long, default_value_t = 1000)]
    pub transactions: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Plant a risky motif, e.g. `phishing-star:victims=50,forwards=3`;
    /// repeatable. Kinds: phishing-star, collusion-upstream,
    /// laundering-downstream, zero-out-middle, round-transfer.
    #[arg(long = "plant")]
    pub plants: Vec<String>,
    /// Add an exchange-like hub, e.g. `clients=100,deposits=2,withdrawals=2`.
    #[arg(long)]
    pub hub: Option<String>,
    #[arg(long = "out-transactions")]
    pub out_transactions: PathBuf,
    #[arg(long = "out-labels")]
    pub out_labels: Option<PathBuf>,
}

fn thread_pool(threads: usize) -> ThreadPool {
    if threads == 0 {
        ThreadPool::auto()
    } else {
        ThreadPool::new(threads)
    }
}

/// Parses `lo..hi` (inclusive, step 1) or a comma-separated list.
fn parse_value_list(text: &str) -> Result<Vec<f64>> {
    if let Some((lo, hi)) = text.split_once("..") {
        let lo: f64 = lo.trim().parse().context("bad range start")?;
        let hi: f64 = hi.trim().parse().context("bad range end")?;
        if hi < lo {
            bail!("empty range `{text}`");
        }
        let mut values = Vec::new();
        let mut v = lo;
        while v <= hi + 1e-9 {
            values.push(v);
            v += 1.0;
        }
        Ok(values)
    } else {
        text.split(',')
            .filter(|p| !p.trim().is_empty())
            .map(|p| p.trim().parse::<f64>().with_context(|| format!("bad value `{p}`")))
            .collect()
    }
}

pub fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Rate(args) => cmd_rate(args),
        Command::Evaluate(args) => cmd_evaluate(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::Bench(args) => cmd_bench(args),
        Command::Synth(args) => cmd_synth(args),
    }
}

fn cmd_rate(args: RateArgs) -> Result<ExitCode> {
    let mode = if args.semi_supervised {
        Mode::SemiSupervised
    } else {
        Mode::Unsupervised
    };
    let config = args.propagation.to_config(mode)?;
    let labels = match &args.labels {
        Some(path) => {
            let parsed = read_labels(path)?;
            for warning in &parsed.warnings {
                eprintln!("warning: {warning}");
            }
            Some(parsed.table)
        }
        None => None,
    };
    let pool = thread_pool(args.threads);
    let options = RateOptions {
        transactions: args.transactions.clone(),
        labels,
        config,
        split: args.split,
        seed: args.seed,
        rth: args.rth,
        top_percent: args.top_percent,
    };
    let outcome = rate(&options, &pool)?;

    if !outcome.parse_errors.is_empty() {
        eprintln!(
            "warning: skipped {} malformed row(s)",
            outcome.parse_errors.len()
        );
        for e in outcome.parse_errors.iter().take(5) {
            eprintln!("  line {}: {}", e.line, e.message);
        }
    }

    // `threads` is deliberately absent: results are thread-count-invariant
    // and the report must be byte-identical across worker counts.
    let mut echo = Echo::new("rate");
    echo.push("transactions", args.transactions.display())
        .push(
            "labels",
            args.labels
                .as_ref()
                .map(|p| p.display().to_string())
                .unwrap_or_else(|| "none".into()),
        )
        .push("semi_supervised", args.semi_supervised)
        .push("split", args.split)
        .push("seed", args.seed)
        .push("rth", args.rth);
    if let Some(p) = args.top_percent {
        echo.push("top_percent", p);
    }
    args.propagation.echo_into(&mut echo);

    write_report(&args.out, &outcome.report, &echo)?;
    if let Some(path) = &args.trace {
        write_trace(path, &outcome.run, &echo)?;
    }
    if let Some(path) = &args.checkpoint {
        write_checkpoint(path, &outcome.graph, &outcome.run.state, &echo)?;
    }
    if let Some(path) = &args.dump_graph {
        write_graph_dump(path, &outcome.graph, &echo)?;
    }

    println!(
        "parsed {} rows ({} after zero-value filter, {} in largest component)",
        outcome.records_parsed, outcome.records_after_filter, outcome.records_after_wcc
    );
    println!(
        "graph: {} accounts, {} payers, {} payees, {} edges ({} transactions)",
        outcome.graph.n_accounts(),
        outcome.graph.n_payers(),
        outcome.graph.n_payees(),
        outcome.graph.n_edges(),
        outcome.graph.n_transactions()
    );
    if let Some(n) = outcome.training_size {
        println!("training accounts: {n}");
    }
    if outcome.graph.is_saturated() {
        eprintln!(
            "warning: some |score| = 1; the contraction guarantee does not apply"
        );
    }
    println!(
        "propagation: {} iterations, {} (contraction factor {:.4}, {} clamps)",
        outcome.run.state.iteration,
        termination_name(&outcome.run),
        outcome.run.contraction_factor,
        outcome.run.clamp_events
    );
    println!("report: {} accounts -> {}", outcome.report.entries.len(), args.out.display());

    Ok(match outcome.run.termination {
        Termination::Converged => ExitCode::SUCCESS,
        Termination::MaxIterations => {
            eprintln!("warning: stopped at the iteration cap without converging");
            ExitCode::from(2)
        }
    })
}

/// Ordered metric rows, one value per seed.
#[derive(Default)]
struct MetricRows {
    order: Vec<String>,
    values: BTreeMap<String, Vec<f64>>,
}

impl MetricRows {
    fn push(&mut self, name: &str, value: f64) {
        if !self.values.contains_key(name) {
            self.order.push(name.to_string());
        }
        self.values.entry(name.to_string()).or_default().push(value);
    }

    fn push_scalars(&mut self, prefix: &str, m: &ScalarMetrics) {
        self.push(&format!("{prefix}illicit_precision"), m.illicit.precision);
        self.push(&format!("{prefix}illicit_recall"), m.illicit.recall);
        self.push(&format!("{prefix}illicit_f1"), m.illicit.f1);
        self.push(&format!("{prefix}licit_precision"), m.licit.precision);
        self.push(&format!("{prefix}licit_recall"), m.licit.recall);
        self.push(&format!("{prefix}licit_f1"), m.licit.f1);
        self.push(&format!("{prefix}accuracy"), m.accuracy);
    }

    fn into_rows(self) -> Vec<(String, Vec<f64>)> {
        self.order
            .into_iter()
            .map(|name| {
                let values = self.values[&name].clone();
                (name, values)
            })
            .collect()
    }
}

fn cmd_evaluate(args: EvaluateArgs) -> Result<ExitCode> {
    let report = read_report(&args.report)?;
    let labels = read_labels(&args.labels)?.table;
    if labels.is_empty() {
        bail!("{}: no labels", args.labels.display());
    }
    let pool = thread_pool(args.threads);

    let graph: Option<PayerPayeeGraph> = match &args.transactions {
        Some(path) => {
            let parsed = read_transactions(path, &ColumnMap::default())?;
            let records = riskprop_core::ingest::extract_largest_wcc(
                riskprop_core::ingest::filter_zero_value(parsed.records),
            );
            let mut g = build_graph(&records)?;
            score_all_edges(&mut g, &pool);
            Some(g)
        }
        None => None,
    };

    let seeds: Vec<u64> = match &args.seeds {
        Some(list) => parse_value_list(list)?.into_iter().map(|v| v as u64).collect(),
        None => vec![args.seed],
    };

    let mut classified = report.clone();
    match args.top_percent {
        Some(p) => classified.classify_top_percent(p),
        None => classified.classify(args.rth),
    }

    let policy = if args.strict_k {
        UnlabeledPolicy::Penalize
    } else {
        UnlabeledPolicy::Skip
    };
    let ks: Vec<usize> = (1..=args.k_max.max(1)).collect();

    let mut rows = MetricRows::default();
    let mut curve_runs: Vec<Vec<CurvePoint>> = Vec::new();
    let mut anova_rows: Vec<(String, riskprop_core::eval::AnovaResult)> = Vec::new();

    if let (true, Some(g)) = (args.anova, &graph) {
        let (illicit, licit) = score_groups(g, &labels);
        anova_rows.push((
            "deanonymous".to_string(),
            one_way_anova(&illicit, &licit).context("variance analysis of edge scores")?,
        ));
    }

    for &seed in &seeds {
        let eval_labels = match args.split {
            Some(fraction) => {
                let split = train_test_split(&labels, fraction, seed)?;
                restrict_labels(&labels, &split.test)
            }
            None => labels.clone(),
        };

        let metrics = classification_metrics(
            classified
                .entries
                .iter()
                .map(|e| (e.address.as_str(), e.predicted.is_illicit())),
            &eval_labels,
        )?;
        rows.push_scalars("", &metrics);
        match auc(
            classified.entries.iter().map(|e| (e.address.as_str(), e.risk)),
            &eval_labels,
        ) {
            Ok(value) => rows.push("auc", value),
            Err(err) => eprintln!("warning: auc skipped for seed {seed}: {err}"),
        }
        curve_runs.push(precision_recall_at_k(
            classified.ranking(),
            &eval_labels,
            &ks,
            policy,
        ));

        if let Some(g) = &graph {
            match args.ablation {
                Some(AblationKind::Ads) => {
                    let predictions = ablation_ads(g);
                    let metrics = classification_metrics(
                        predictions.iter().map(|p| (p.address.as_str(), p.illicit)),
                        &eval_labels,
                    )?;
                    rows.push_scalars("ads_", &metrics);
                }
                Some(AblationKind::Random) => {
                    let randomized = ablation_random_scores(g, seed);
                    let config = args.propagation.to_config(Mode::Unsupervised)?;
                    let run = iterate_until_convergence(&randomized, &config, None, None, &pool)?;
                    let mut rand_report = risk_of(&run.state, &randomized, &config);
                    match args.top_percent {
                        Some(p) => rand_report.classify_top_percent(p),
                        None => rand_report.classify(args.rth),
                    }
                    let metrics = classification_metrics(
                        rand_report
                            .entries
                            .iter()
                            .map(|e| (e.address.as_str(), e.predicted.is_illicit())),
                        &eval_labels,
                    )?;
                    rows.push_scalars("random_", &metrics);
                }
                None => {}
            }
            if args.anova {
                let randomized = ablation_random_scores(g, seed);
                let (illicit, licit) = score_groups(&randomized, &labels);
                anova_rows.push((
                    format!("random-seed{seed}"),
                    one_way_anova(&illicit, &licit)
                        .context("variance analysis of random scores")?,
                ));
            }
        }
    }

    let mut echo = Echo::new("evaluate");
    echo.push("report", args.report.display())
        .push("labels", args.labels.display())
        .push("rth", args.rth)
        .push(
            "split",
            args.split.map(|s| s.to_string()).unwrap_or_else(|| "none".into()),
        )
        .push("seeds", seeds.iter().map(|s| s.to_string()).collect::<Vec<_>>().join("+"))
        .push("k_max", args.k_max)
        .push("strict_k", args.strict_k);
    if let Some(p) = args.top_percent {
        echo.push("top_percent", p);
    }

    std::fs::create_dir_all(&args.out)
        .with_context(|| format!("creating {}", args.out.display()))?;
    let metric_rows = rows.into_rows();
    write_metrics(&args.out.join("metrics.csv"), &metric_rows, &echo)?;

    // Curves averaged across seeds (they differ only under --split).
    let averaged: Vec<CurvePoint> = (0..ks.len())
        .map(|i| CurvePoint {
            k: ks[i],
            precision: curve_runs.iter().map(|c| c[i].precision).sum::<f64>()
                / curve_runs.len() as f64,
            recall: curve_runs.iter().map(|c| c[i].recall).sum::<f64>() / curve_runs.len() as f64,
        })
        .collect();
    write_curves(&args.out.join("curves.csv"), &averaged, &echo)?;

    if !anova_rows.is_empty() {
        write_anova(&args.out.join("anova.csv"), &anova_rows, &echo)?;
    }
    if let Some(rths) = &args.sweep_rth {
        let rths = parse_value_list(rths)?;
        let sweep = threshold_sweep(&classified, &labels, &rths)?;
        write_sweep(&args.out.join("sweep.csv"), &sweep, &echo)?;
    }

    println!("evaluated {} labeled account(s) over {} seed(s)", labels.len(), seeds.len());
    for (name, values) in &metric_rows {
        let mean = values.iter().sum::<f64>() / values.len() as f64;
        println!("  {name:24} {mean:.4}");
    }
    for (name, r) in &anova_rows {
        println!(
            "  anova {name}: F = {:.4e} (p = {:.4e})",
            r.f_statistic, r.p_value
        );
    }
    println!("wrote {}", args.out.display());
    Ok(ExitCode::SUCCESS)
}

fn cmd_sweep(args: SweepArgs) -> Result<ExitCode> {
    let report = read_report(&args.report)?;
    let labels = read_labels(&args.labels)?.table;
    let rths = parse_value_list(&args.rths)?;
    let sweep = threshold_sweep(&report, &labels, &rths)?;

    let mut echo = Echo::new("sweep");
    echo.push("report", args.report.display())
        .push("labels", args.labels.display())
        .push("rths", &args.rths);
    write_sweep(&args.out, &sweep, &echo)?;

    for (rth, m) in &sweep {
        println!(
            "rth {rth:>5.2}: illicit P={:.3} R={:.3} F1={:.3}, accuracy={:.3}",
            m.illicit.precision, m.illicit.recall, m.illicit.f1, m.accuracy
        );
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_bench(args: BenchArgs) -> Result<ExitCode> {
    let sizes: Vec<usize> = parse_value_list(&args.sizes)?
        .into_iter()
        .map(|v| v as usize)
        .collect();
    if sizes.is_empty() {
        bail!("--sizes is empty");
    }
    let options = BenchOptions {
        sizes,
        seed: args.seed,
        epsilon: args.epsilon,
        max_iterations: args.max_iters,
        fixed_iterations: args.fixed_iters,
    };
    let pool = thread_pool(args.threads);
    let rows = scalability_benchmark(&options, &pool)?;

    let mut echo = Echo::new("bench");
    echo.push("sizes", &args.sizes)
        .push("seed", args.seed)
        .push(
            "fixed_iters",
            args.fixed_iters.map(|v| v.to_string()).unwrap_or_else(|| "none".into()),
        )
        .push("epsilon", args.epsilon)
        .push("max_iters", args.max_iters)
        .push("threads", pool.threads());
    write_bench(&args.out, &rows, &echo)?;

    for r in &rows {
        println!(
            "{:>9} edges {:>9} nodes: build {:>9.2} ms, propagate {:>9.2} ms over {} iterations",
            r.edges, r.nodes, r.build_ms, r.propagate_ms, r.iterations
        );
    }
    if rows.len() >= 2 {
        let xs: Vec<f64> = rows.iter().map(|r| r.edges as f64).collect();
        let ys: Vec<f64> = rows
            .iter()
            .map(|r| r.propagate_ms / r.iterations.max(1) as f64)
            .collect();
        let fit = fit_linear(&xs, &ys);
        println!(
            "per-iteration time vs edges: {:.3e} ms/edge, r^2 = {:.4}",
            fit.slope, fit.r_squared
        );
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_synth(args: SynthArgs) -> Result<ExitCode> {
    let plants = args
        .plants
        .iter()
        .map(|text| Ok(Pattern::parse(text)?))
        .collect::<Result<Vec<_>>>()?;
    let spec = SynthSpec {
        payers: args.payers,
        payees: args.payees,
        transactions: args.transactions,
        seed: args.seed,
        plants: vec![],
    };
    let (mut records, mut labels) = generate(&spec)?;

    // The hub joins the base before any plant, so planted patterns can wire
    // themselves into it (a detached hub would fall out of the largest
    // weakly connected component downstream).
    if let Some(hub_spec) = &args.hub {
        let (mut clients, mut deposits, mut withdrawals) = (100usize, 2u64, 2u64);
        for part in hub_spec.split(',').filter(|p| !p.trim().is_empty()) {
            let (key, value) = part
                .split_once('=')
                .with_context(|| format!("expected key=value, got `{part}`"))?;
            let value: u64 = value.trim().parse().with_context(|| format!("bad `{part}`"))?;
            match key.trim() {
                "clients" => clients = value as usize,
                "deposits" => deposits = value,
                "withdrawals" => withdrawals = value,
                other => bail!("unknown hub parameter `{other}`"),
            }
        }
        let (hub_records, hub_labels) = exchange_hub(clients, deposits, withdrawals, args.seed, 0)?;
        records.extend(hub_records);
        labels.merge(&hub_labels);
    }

    for (i, pattern) in plants.iter().enumerate() {
        let (combined, plant_labels) =
            riskprop_core::synth::plant_pattern(&records, pattern, args.seed, i as u64)?;
        records = combined;
        labels.merge(&plant_labels);
    }

    let mut echo = Echo::new("synth");
    echo.push("payers", args.payers)
        .push("payees", args.payees)
        .push("transactions", args.transactions)
        .push("seed", args.seed)
        .push("plants", args.plants.join("+"))
        .push("hub", args.hub.as_deref().unwrap_or("none"));

    write_transactions(&args.out_transactions, &records, &echo)?;
    if let Some(path) = &args.out_labels {
        write_labels(path, &labels, &echo)?;
    }
    println!(
        "wrote {} transaction(s), {} label(s)",
        records.len(),
        labels.len()
    );
    Ok(ExitCode::SUCCESS)
}
