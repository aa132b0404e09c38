//! End-to-end rating pipeline: parse, filter, connect, build, score,
//! propagate, report.

use std::collections::BTreeSet;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use riskprop_core::eval::train_test_split;
use riskprop_core::exec::ParallelMap;
use riskprop_core::graph::{build_graph, score_all_edges, PayerPayeeGraph};
use riskprop_core::ingest::{
    extract_largest_wcc, filter_zero_value, ColumnMap, LabelTable, RowError,
};
use riskprop_core::propagation::{
    iterate_until_convergence, Mode, PropagationConfig, PropagationRun,
};
use riskprop_core::rating::{risk_of, RiskReport};

use crate::io::read_transactions;

/// Everything `rate` needs.
#[derive(Debug, Clone)]
pub struct RateOptions {
    pub transactions: PathBuf,
    pub labels: Option<LabelTable>,
    pub config: PropagationConfig,
    /// Train fraction of the labeled accounts used for semi-supervised
    /// initialization (1.0 = use them all).
    pub split: f64,
    pub seed: u64,
    /// Risk threshold for the predicted column.
    pub rth: f64,
    /// When set, classify the top percentage by risk instead of
    /// thresholding.
    pub top_percent: Option<f64>,
}

/// The pipeline's products, kept around for optional output files.
pub struct RateOutcome {
    pub report: RiskReport,
    pub run: PropagationRun,
    pub graph: PayerPayeeGraph,
    pub parse_errors: Vec<RowError>,
    pub records_parsed: usize,
    pub records_after_filter: usize,
    pub records_after_wcc: usize,
    pub training_size: Option<usize>,
}

/// Runs the full pipeline on a transactions file.
pub fn rate(options: &RateOptions, exec: &dyn ParallelMap) -> Result<RateOutcome> {
    let parsed = read_transactions(&options.transactions, &ColumnMap::default())?;
    let records_parsed = parsed.records.len();
    let records = filter_zero_value(parsed.records);
    let records_after_filter = records.len();
    let records = extract_largest_wcc(records);
    let records_after_wcc = records.len();
    if records.is_empty() {
        bail!(
            "{}: no usable transactions after filtering",
            options.transactions.display()
        );
    }

    let mut graph = build_graph(&records).context("building the payer-payee graph")?;
    score_all_edges(&mut graph, exec);

    let (labels, training) = match options.config.mode {
        Mode::SemiSupervised => {
            let labels = options
                .labels
                .as_ref()
                .context("semi-supervised mode requires a label table")?;
            let training: BTreeSet<String> = if options.split < 1.0 {
                train_test_split(labels, options.split, options.seed)?.train
            } else {
                labels.iter().map(|(a, _)| a.to_string()).collect()
            };
            (Some(labels), Some(training))
        }
        Mode::Unsupervised => (None, None),
    };
    let training_size = training.as_ref().map(|t| t.len());

    let run = iterate_until_convergence(
        &graph,
        &options.config,
        labels,
        training.as_ref(),
        exec,
    )?;

    let mut report = risk_of(&run.state, &graph, &options.config);
    match options.top_percent {
        Some(percent) => report.classify_top_percent(percent),
        None => report.classify(options.rth),
    }

    Ok(RateOutcome {
        report,
        run,
        graph,
        parse_errors: parsed.errors,
        records_parsed,
        records_after_filter,
        records_after_wcc,
        training_size,
    })
}

/// Restricts a label table to the given addresses (used to evaluate on the
/// held-out side of a split).
pub fn restrict_labels(labels: &LabelTable, keep: &BTreeSet<String>) -> LabelTable {
    let mut out = LabelTable::new();
    for (address, category) in labels.iter() {
        if keep.contains(address) {
            out.insert(address.to_string(), category);
        }
    }
    out
}
