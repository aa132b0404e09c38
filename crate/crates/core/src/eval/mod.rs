//! Evaluation of predictions against the label table: classification
//! metrics, rank-based AUC, precision/recall at k, two-group variance
//! analysis of edge scores, ablation classifiers, and the risk-threshold
//! sweep.
//!
//! Ground truth is binary: the phish-hack category is illicit, every other
//! category licit. Unlabeled accounts are ignored throughout. Degenerate
//! ratios follow a vacuous convention: a precision with no predictions in
//! the class (or a recall with no true members) is 1.0 — there is nothing to
//! get wrong — and F1 falls back to 0 when precision + recall is 0.

pub mod stats;

use alloc::collections::BTreeSet;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::graph::{PayerId, PayerPayeeGraph};
use crate::ingest::{Category, LabelTable};
use crate::rating::RiskReport;
use crate::rng::{keyed_signed_unit, SplitMix64};
use crate::{Error, Result};

/// Precision, recall, and F1 for one class.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl ClassMetrics {
    fn from_counts(tp: usize, fp: usize, missed: usize) -> Self {
        let precision = if tp + fp == 0 {
            1.0
        } else {
            tp as f64 / (tp + fp) as f64
        };
        let recall = if tp + missed == 0 {
            1.0
        } else {
            tp as f64 / (tp + missed) as f64
        };
        let f1 = if precision + recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            0.0
        };
        Self {
            precision,
            recall,
            f1,
        }
    }
}

/// Scalar classification metrics over labeled accounts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalarMetrics {
    pub illicit: ClassMetrics,
    pub licit: ClassMetrics,
    pub accuracy: f64,
    /// Labeled accounts that had a prediction.
    pub evaluated: usize,
}

/// Per-class precision/recall/F1 plus accuracy.
///
/// Labeled accounts without a prediction and predictions without a label
/// are skipped; it is an error if nothing remains.
pub fn classification_metrics<'a, I>(predictions: I, labels: &LabelTable) -> Result<ScalarMetrics>
where
    I: IntoIterator<Item = (&'a str, bool)>,
{
    let (mut tp, mut fp, mut tn, mut missed) = (0usize, 0usize, 0usize, 0usize);
    for (address, predicted_illicit) in predictions {
        let Some(category) = labels.get(address) else {
            continue;
        };
        match (category.is_illicit(), predicted_illicit) {
            (true, true) => tp += 1,
            (true, false) => missed += 1,
            (false, true) => fp += 1,
            (false, false) => tn += 1,
        }
    }
    let evaluated = tp + fp + tn + missed;
    if evaluated == 0 {
        return Err(Error::NoLabeledPredictions);
    }
    Ok(ScalarMetrics {
        illicit: ClassMetrics::from_counts(tp, fp, missed),
        licit: ClassMetrics::from_counts(tn, missed, fp),
        accuracy: (tp + tn) as f64 / evaluated as f64,
        evaluated,
    })
}

/// Rank-based AUC: the probability that a random illicit account outranks a
/// random licit one, ties counting one half. Invariant under any strictly
/// increasing transform of the scores.
pub fn auc<'a, I>(risk_scores: I, labels: &LabelTable) -> Result<f64>
where
    I: IntoIterator<Item = (&'a str, f64)>,
{
    let mut scored: Vec<(f64, bool)> = risk_scores
        .into_iter()
        .filter_map(|(address, score)| labels.get(address).map(|c| (score, c.is_illicit())))
        .collect();
    let n_illicit = scored.iter().filter(|(_, ill)| *ill).count();
    let n_licit = scored.len() - n_illicit;
    if n_illicit == 0 || n_licit == 0 {
        return Err(Error::SingleClass);
    }
    scored.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite scores"));

    let mut rank_sum_illicit = 0.0;
    let mut i = 0;
    while i < scored.len() {
        let mut j = i;
        while j < scored.len() && scored[j].0 == scored[i].0 {
            j += 1;
        }
        // 1-based ranks i+1 ..= j share the average rank.
        let avg_rank = (i + 1 + j) as f64 / 2.0;
        for entry in &scored[i..j] {
            if entry.1 {
                rank_sum_illicit += avg_rank;
            }
        }
        i = j;
    }
    let u = rank_sum_illicit - (n_illicit * (n_illicit + 1)) as f64 / 2.0;
    Ok(u / (n_illicit as f64 * n_licit as f64))
}

/// How precision-at-k treats unlabeled accounts inside the top k.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnlabeledPolicy {
    /// Skip them: the denominator counts only labeled accounts (suits
    /// sparsely labeled data).
    Skip,
    /// Count them as errors: the denominator is k itself.
    Penalize,
}

/// One point of the ranking-quality curves.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvePoint {
    pub k: usize,
    pub precision: f64,
    pub recall: f64,
}

/// Precision@k and recall@k over a risk-descending ranking.
///
/// Recall is against all labeled illicit accounts, whether ranked or not.
pub fn precision_recall_at_k<'a, I>(
    ranking: I,
    labels: &LabelTable,
    ks: &[usize],
    policy: UnlabeledPolicy,
) -> Vec<CurvePoint>
where
    I: IntoIterator<Item = &'a str>,
{
    let total_illicit = labels.iter().filter(|(_, c)| c.is_illicit()).count();
    let mut ks: Vec<usize> = ks.iter().copied().filter(|k| *k > 0).collect();
    ks.sort_unstable();
    ks.dedup();

    let mut points = Vec::with_capacity(ks.len());
    let mut illicit_seen = 0usize;
    let mut labeled_seen = 0usize;
    let mut ranked = 0usize;
    let mut next = ks.iter().peekable();
    for address in ranking {
        if next.peek().is_none() {
            break;
        }
        ranked += 1;
        if let Some(category) = labels.get(address) {
            labeled_seen += 1;
            if category.is_illicit() {
                illicit_seen += 1;
            }
        }
        while next.peek() == Some(&&ranked) {
            next.next();
            points.push(curve_point(ranked, illicit_seen, labeled_seen, total_illicit, policy));
        }
    }
    // ks beyond the ranking length collapse to the full-length metrics.
    for k in next {
        points.push(curve_point(*k, illicit_seen, labeled_seen, total_illicit, policy));
    }
    points
}

fn curve_point(
    k: usize,
    illicit_seen: usize,
    labeled_seen: usize,
    total_illicit: usize,
    policy: UnlabeledPolicy,
) -> CurvePoint {
    let denominator = match policy {
        UnlabeledPolicy::Skip => labeled_seen,
        UnlabeledPolicy::Penalize => k,
    };
    CurvePoint {
        k,
        precision: if denominator == 0 {
            1.0
        } else {
            illicit_seen as f64 / denominator as f64
        },
        recall: if total_illicit == 0 {
            1.0
        } else {
            illicit_seen as f64 / total_illicit as f64
        },
    }
}

/// Two-group one-way analysis of variance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnovaResult {
    pub ss_between: f64,
    pub ss_within: f64,
    pub ms_between: f64,
    pub ms_within: f64,
    pub f_statistic: f64,
    pub p_value: f64,
    pub df_between: u64,
    pub df_within: u64,
}

/// One-way ANOVA of two sample groups; the p-value comes from the
/// regularized incomplete beta. Needs two or more samples per group.
pub fn one_way_anova(group_a: &[f64], group_b: &[f64]) -> Result<AnovaResult> {
    if group_a.len() < 2 || group_b.len() < 2 {
        return Err(Error::GroupTooSmall);
    }
    let n_a = group_a.len() as f64;
    let n_b = group_b.len() as f64;
    let mean_a = group_a.iter().sum::<f64>() / n_a;
    let mean_b = group_b.iter().sum::<f64>() / n_b;
    let grand = (mean_a * n_a + mean_b * n_b) / (n_a + n_b);

    let ss_between = n_a * (mean_a - grand) * (mean_a - grand) + n_b * (mean_b - grand) * (mean_b - grand);
    let ss_within = group_a.iter().map(|x| (x - mean_a) * (x - mean_a)).sum::<f64>()
        + group_b.iter().map(|x| (x - mean_b) * (x - mean_b)).sum::<f64>();

    let df_between = 1u64;
    let df_within = (group_a.len() + group_b.len() - 2) as u64;
    let ms_between = ss_between / df_between as f64;
    let ms_within = ss_within / df_within as f64;

    let (f_statistic, p_value) = if ms_within == 0.0 {
        if ms_between == 0.0 {
            return Err(Error::DegenerateVariance);
        }
        (f64::INFINITY, 0.0)
    } else {
        let f = ms_between / ms_within;
        (f, stats::f_sf(f, df_between, df_within))
    };

    Ok(AnovaResult {
        ss_between,
        ss_within,
        ms_between,
        ms_within,
        f_statistic,
        p_value,
        df_between,
        df_within,
    })
}

/// Splits per-transaction edge scores into (illicit, licit) groups by the
/// payer's label, expanding collapsed edges back to one sample per
/// transaction. Transactions with unlabeled payers are excluded.
pub fn score_groups(graph: &PayerPayeeGraph, labels: &LabelTable) -> (Vec<f64>, Vec<f64>) {
    let mut illicit = Vec::new();
    let mut licit = Vec::new();
    for e in graph.edges() {
        let Some(category) = labels.get(graph.payer_address(e.payer)) else {
            continue;
        };
        let bucket = if category.is_illicit() {
            &mut illicit
        } else {
            &mut licit
        };
        for _ in 0..e.multiplicity {
            bucket.push(e.score);
        }
    }
    (illicit, licit)
}

/// A payer's multiplicity-weighted mean outgoing score and the
/// no-propagation verdict derived from it.
#[derive(Debug, Clone, PartialEq)]
pub struct AdsScore {
    pub address: String,
    pub ads: f64,
    /// Flagged when the mean outgoing score is non-positive.
    pub illicit: bool,
}

/// The propagation-free baseline classifier: per payer, the average
/// de-anonymization score of its outgoing transactions, flagged illicit
/// when that average is `<= 0`. Payee-only accounts are excluded.
pub fn ablation_ads(graph: &PayerPayeeGraph) -> Vec<AdsScore> {
    (0..graph.n_payers())
        .map(|u| {
            let u = PayerId(u as u32);
            let sum: f64 = graph
                .out_edges(u)
                .iter()
                .map(|e| e.multiplicity as f64 * e.score)
                .sum();
            let ads = sum / graph.out_count(u) as f64;
            AdsScore {
                address: graph.payer_address(u).to_string(),
                ads,
                illicit: ads <= 0.0,
            }
        })
        .collect()
}

/// The score-free baseline: a copy of the graph with every edge score
/// replaced by a uniform draw on [-1, 1), keyed by `(seed, edge index)` so
/// the result is order-independent and reproducible.
pub fn ablation_random_scores(graph: &PayerPayeeGraph, seed: u64) -> PayerPayeeGraph {
    let scores: Vec<f64> = (0..graph.n_edges())
        .map(|i| keyed_signed_unit(seed, i as u64))
        .collect();
    let mut replaced = graph.clone();
    replaced.replace_scores(&scores).expect("same edge count");
    replaced
}

/// Classification metrics at each risk threshold.
pub fn threshold_sweep(
    report: &RiskReport,
    labels: &LabelTable,
    thresholds: &[f64],
) -> Result<Vec<(f64, ScalarMetrics)>> {
    let mut scratch = report.clone();
    thresholds
        .iter()
        .map(|rth| {
            scratch.classify(*rth);
            let metrics = classification_metrics(
                scratch
                    .entries
                    .iter()
                    .map(|e| (e.address.as_str(), e.predicted.is_illicit())),
                labels,
            )?;
            Ok((*rth, metrics))
        })
        .collect()
}

/// A deterministic train/test partition of the labeled addresses.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelSplit {
    pub train: BTreeSet<String>,
    pub test: BTreeSet<String>,
}

/// Stratified split: within each category the (address-sorted) members are
/// shuffled by the seed and the first `round(n * train_fraction)` go to the
/// training set.
pub fn train_test_split(
    labels: &LabelTable,
    train_fraction: f64,
    seed: u64,
) -> Result<LabelSplit> {
    if !(0.0..=1.0).contains(&train_fraction) {
        return Err(Error::InvalidConfig(alloc::format!(
            "train fraction {train_fraction} outside [0, 1]"
        )));
    }
    let mut rng = SplitMix64::new(seed);
    let mut split = LabelSplit {
        train: BTreeSet::new(),
        test: BTreeSet::new(),
    };
    for category in Category::ALL {
        let mut members: Vec<&str> = labels
            .iter()
            .filter(|(_, c)| *c == category)
            .map(|(a, _)| a)
            .collect();
        rng.shuffle(&mut members);
        let n_train = libm::floor(members.len() as f64 * train_fraction + 0.5) as usize;
        for (i, address) in members.into_iter().enumerate() {
            if i < n_train {
                split.train.insert(address.to_string());
            } else {
                split.test.insert(address.to_string());
            }
        }
    }
    Ok(split)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exec::Serial;
    use crate::graph::{build_graph, score_all_edges};
    use crate::ingest::TransactionRecord;
    use proptest::prelude::*;

    fn labels_of(pairs: &[(&str, Category)]) -> LabelTable {
        let mut t = LabelTable::new();
        for (a, c) in pairs {
            t.insert(a.to_string(), *c);
        }
        t
    }

    const ILL: Category = Category::PhishHack;
    const LIC: Category = Category::Exchange;

    #[test]
    fn perfect_predictions_score_one() {
        let labels = labels_of(&[("a", ILL), ("b", LIC)]);
        let m = classification_metrics([("a", true), ("b", false)], &labels).unwrap();
        assert_eq!(m.illicit.precision, 1.0);
        assert_eq!(m.illicit.recall, 1.0);
        assert_eq!(m.illicit.f1, 1.0);
        assert_eq!(m.licit.f1, 1.0);
        assert_eq!(m.accuracy, 1.0);
    }

    #[test]
    fn all_licit_predictions_on_half_illicit_labels() {
        let labels = labels_of(&[("a", ILL), ("b", LIC)]);
        let m = classification_metrics([("a", false), ("b", false)], &labels).unwrap();
        assert_eq!(m.illicit.recall, 0.0);
        assert_eq!(m.accuracy, 0.5);
        // No illicit predictions at all: vacuous precision.
        assert_eq!(m.illicit.precision, 1.0);
        assert_eq!(m.illicit.f1, 0.0);
    }

    #[test]
    fn one_each_of_tp_fp_fn() {
        let labels = labels_of(&[("a", ILL), ("b", ILL), ("c", LIC)]);
        let m = classification_metrics([("a", true), ("b", false), ("c", true)], &labels).unwrap();
        assert_eq!(m.illicit.precision, 0.5);
        assert_eq!(m.illicit.recall, 0.5);
        assert_eq!(m.illicit.f1, 0.5);
    }

    #[test]
    fn unlabeled_predictions_are_ignored() {
        let labels = labels_of(&[("a", ILL)]);
        let m = classification_metrics([("a", true), ("zz", true)], &labels).unwrap();
        assert_eq!(m.evaluated, 1);
    }

    #[test]
    fn empty_intersection_is_an_error() {
        let labels = labels_of(&[("a", ILL)]);
        let err = classification_metrics([("b", true)], &labels).unwrap_err();
        assert_eq!(err, Error::NoLabeledPredictions);
    }

    #[test]
    fn auc_examples() {
        let labels = labels_of(&[("i1", ILL), ("i2", ILL), ("l1", LIC), ("l2", LIC)]);
        // Perfect separation.
        let a = auc([("i1", 0.9), ("i2", 0.8), ("l1", 0.2), ("l2", 0.1)], &labels).unwrap();
        assert_eq!(a, 1.0);
        // One win, one loss over two pairs.
        let labels3 = labels_of(&[("i1", ILL), ("i2", ILL), ("l1", LIC)]);
        let a = auc([("i1", 0.9), ("i2", 0.3), ("l1", 0.8)], &labels3).unwrap();
        assert_eq!(a, 0.5);
        // All ties.
        let a = auc([("i1", 0.5), ("i2", 0.5), ("l1", 0.5), ("l2", 0.5)], &labels).unwrap();
        assert_eq!(a, 0.5);
    }

    #[test]
    fn auc_needs_both_classes() {
        let labels = labels_of(&[("a", ILL)]);
        assert_eq!(auc([("a", 0.5)], &labels).unwrap_err(), Error::SingleClass);
    }

    #[test]
    fn curve_examples() {
        let labels = labels_of(&[("i1", ILL), ("i2", ILL), ("l1", LIC)]);
        // top-2 = [illicit, licit], 2 illicit total.
        let pts = precision_recall_at_k(
            ["i1", "l1", "i2"],
            &labels,
            &[2],
            UnlabeledPolicy::Skip,
        );
        assert_eq!(pts[0].precision, 0.5);
        assert_eq!(pts[0].recall, 0.5);

        // k beyond the list equals the full-length metrics.
        let pts = precision_recall_at_k(["i1", "l1", "i2"], &labels, &[3, 50], UnlabeledPolicy::Skip);
        assert_eq!(pts[0], CurvePoint { k: 3, precision: 2.0 / 3.0, recall: 1.0 });
        assert_eq!(pts[1].precision, 2.0 / 3.0);
        assert_eq!(pts[1].recall, 1.0);

        // Top-k all illicit with k = total illicit.
        let pts = precision_recall_at_k(["i1", "i2", "l1"], &labels, &[2], UnlabeledPolicy::Skip);
        assert_eq!((pts[0].precision, pts[0].recall), (1.0, 1.0));
    }

    #[test]
    fn sweep_endpoints() {
        let entries = [("a", 0.1195), ("b", 0.9526), ("c", 0.4)]
            .iter()
            .map(|(addr, rel)| crate::rating::AccountReport {
                address: addr.to_string(),
                reliability: *rel,
                trustiness: None,
                risk: (1.0 - rel) * 10.0,
                is_default: false,
                predicted: crate::rating::Prediction::Licit,
            })
            .collect();
        let report = RiskReport { entries };
        let labels = labels_of(&[("a", ILL), ("b", LIC), ("c", ILL)]);
        let sweep = threshold_sweep(&report, &labels, &[0.0, 11.0]).unwrap();
        // rth = 0: everything predicted illicit.
        assert_eq!(sweep[0].1.illicit.recall, 1.0);
        assert_eq!(sweep[0].1.illicit.precision, 2.0 / 3.0);
        // rth above every risk: nothing predicted illicit.
        assert_eq!(sweep[1].1.illicit.recall, 0.0);
        assert_eq!(sweep[1].1.illicit.precision, 1.0);
    }

    #[test]
    fn fully_labeled_ranking_makes_policies_agree() {
        let labels = labels_of(&[("i1", ILL), ("i2", ILL), ("l1", LIC), ("l2", LIC)]);
        let ranking = ["i1", "l1", "i2", "l2"];
        for k in 1..=4 {
            let skip = precision_recall_at_k(ranking, &labels, &[k], UnlabeledPolicy::Skip);
            let strict = precision_recall_at_k(ranking, &labels, &[k], UnlabeledPolicy::Penalize);
            assert_eq!(skip[0], strict[0]);
            // Precision of the top-k cut, computed directly.
            let direct = ranking[..k].iter().filter(|a| a.starts_with('i')).count() as f64 / k as f64;
            assert_eq!(skip[0].precision, direct);
        }
    }

    #[test]
    fn unlabeled_policy_changes_denominator() {
        let labels = labels_of(&[("i1", ILL)]);
        let ranking = ["i1", "zz", "zz2", "zz3"];
        let skip = precision_recall_at_k(ranking, &labels, &[4], UnlabeledPolicy::Skip);
        assert_eq!(skip[0].precision, 1.0);
        let strict = precision_recall_at_k(ranking, &labels, &[4], UnlabeledPolicy::Penalize);
        assert_eq!(strict[0].precision, 0.25);
    }

    #[test]
    fn recall_at_k_is_non_decreasing() {
        let labels = labels_of(&[("i1", ILL), ("i2", ILL), ("l1", LIC)]);
        let ks: Vec<usize> = (1..=5).collect();
        let pts = precision_recall_at_k(["l1", "i1", "zz", "i2", "zz2"], &labels, &ks, UnlabeledPolicy::Skip);
        for pair in pts.windows(2) {
            assert!(pair[1].recall >= pair[0].recall);
        }
    }

    #[test]
    fn anova_reference_case() {
        let r = one_way_anova(&[1.0, 2.0, 3.0], &[2.0, 3.0, 4.0]).unwrap();
        assert!((r.ms_between - 1.5).abs() < 1e-12);
        assert!((r.ms_within - 1.0).abs() < 1e-12);
        assert!((r.f_statistic - 1.5).abs() < 1e-12);
        assert!((r.p_value - 0.2878641347266906620019903).abs() < 1e-12);
        assert_eq!((r.df_between, r.df_within), (1, 4));
    }

    #[test]
    fn anova_identical_groups_give_zero_f() {
        let r = one_way_anova(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(r.f_statistic, 0.0);
        assert_eq!(r.p_value, 1.0);
    }

    #[test]
    fn anova_degenerate_and_small_groups_error() {
        assert_eq!(
            one_way_anova(&[1.0, 1.0], &[1.0, 1.0]).unwrap_err(),
            Error::DegenerateVariance
        );
        assert_eq!(
            one_way_anova(&[1.0], &[1.0, 2.0]).unwrap_err(),
            Error::GroupTooSmall
        );
    }

    #[test]
    fn anova_zero_within_variance_gives_infinite_f() {
        let r = one_way_anova(&[1.0, 1.0], &[2.0, 2.0]).unwrap();
        assert_eq!(r.f_statistic, f64::INFINITY);
        assert_eq!(r.p_value, 0.0);
    }

    fn txn(payer: &str, payee: &str) -> TransactionRecord {
        TransactionRecord {
            tx_id: String::new(),
            payer: payer.to_string(),
            payee: payee.to_string(),
            value: 1,
            timestamp: None,
        }
    }

    #[test]
    fn ads_examples() {
        let mut g = build_graph(&[txn("a", "x"), txn("a", "y"), txn("b", "x")]).unwrap();
        // Payer a has scores {-0.2, +0.1}; payer b has +1.
        // Edge order is (a,x), (a,y), (b,x).
        g.replace_scores(&[-0.2, 0.1, 1.0]).unwrap();
        let ads = ablation_ads(&g);
        let a = ads.iter().find(|p| p.address == "a").unwrap();
        assert!((a.ads - (-0.05)).abs() < 1e-15);
        assert!(a.illicit);
        let b = ads.iter().find(|p| p.address == "b").unwrap();
        assert!(!b.illicit);
    }

    #[test]
    fn ads_zero_is_inclusive_and_weighted() {
        let mut g = build_graph(&[txn("a", "x"), txn("a", "x"), txn("a", "y")]).unwrap();
        // Edge (a,x) has multiplicity 2 and score 0.1; (a,y) scores -0.2:
        // ads = (2*0.1 - 0.2) / 3 = 0.
        g.replace_scores(&[0.1, -0.2]).unwrap();
        let ads = ablation_ads(&g);
        assert!(ads[0].ads.abs() < 1e-15);
        assert!(ads[0].illicit);
    }

    #[test]
    fn random_ablation_is_seed_deterministic() {
        let mut g = build_graph(&[txn("a", "x"), txn("b", "y"), txn("c", "z")]).unwrap();
        score_all_edges(&mut g, &Serial);
        let r1 = ablation_random_scores(&g, 7);
        let r2 = ablation_random_scores(&g, 7);
        let r3 = ablation_random_scores(&g, 8);
        let scores = |g: &PayerPayeeGraph| -> Vec<f64> { g.edges().iter().map(|e| e.score).collect() };
        assert_eq!(scores(&r1), scores(&r2));
        assert_ne!(scores(&r1), scores(&r3));
        assert!(scores(&r1).iter().all(|s| (-1.0..=1.0).contains(s)));
    }

    #[test]
    fn keyed_scores_have_near_zero_mean() {
        let n = 100_000u64;
        let mean: f64 = (0..n).map(|i| keyed_signed_unit(0, i)).sum::<f64>() / n as f64;
        assert!(mean.abs() < 0.01, "{mean}");
    }

    #[test]
    fn split_is_deterministic_and_stratified() {
        let mut labels = LabelTable::new();
        for i in 0..40 {
            labels.insert(alloc::format!("i{i:02}"), ILL);
        }
        for i in 0..60 {
            labels.insert(alloc::format!("l{i:02}"), LIC);
        }
        let s1 = train_test_split(&labels, 0.8, 3).unwrap();
        let s2 = train_test_split(&labels, 0.8, 3).unwrap();
        assert_eq!(s1, s2);
        let s3 = train_test_split(&labels, 0.8, 4).unwrap();
        assert_ne!(s1, s3);

        assert_eq!(s1.train.len() + s1.test.len(), 100);
        assert!(s1.train.is_disjoint(&s1.test));
        let illicit_train = s1.train.iter().filter(|a| a.starts_with('i')).count();
        let licit_train = s1.train.iter().filter(|a| a.starts_with('l')).count();
        assert_eq!(illicit_train, 32);
        assert_eq!(licit_train, 48);
    }

    #[test]
    fn split_rejects_bad_fraction() {
        let labels = labels_of(&[("a", ILL)]);
        assert!(train_test_split(&labels, 1.5, 0).is_err());
    }

    proptest! {
        /// Total sum of squares decomposes into between + within.
        #[test]
        fn anova_ss_identity(
            a in proptest::collection::vec(-50.0f64..50.0, 2..30),
            b in proptest::collection::vec(-50.0f64..50.0, 2..30),
        ) {
            prop_assume!(a.iter().chain(&b).any(|x| (x - a[0]).abs() > 1e-9));
            let r = one_way_anova(&a, &b).unwrap();
            let all: Vec<f64> = a.iter().chain(&b).copied().collect();
            let grand = all.iter().sum::<f64>() / all.len() as f64;
            let ss_total: f64 = all.iter().map(|x| (x - grand) * (x - grand)).sum();
            prop_assert!((ss_total - (r.ss_between + r.ss_within)).abs() <= 1e-9 * ss_total.max(1.0));
            prop_assert!(r.f_statistic >= 0.0);
            prop_assert!(r.p_value > 0.0 && r.p_value <= 1.0);
        }

        /// AUC only depends on the ranking, not the score scale.
        #[test]
        fn auc_invariant_under_monotone_transform(
            scores in proptest::collection::vec(-5.0f64..5.0, 4..40),
            flags in proptest::collection::vec(proptest::bool::ANY, 4..40),
        ) {
            let n = scores.len().min(flags.len());
            prop_assume!(flags[..n].iter().any(|f| *f) && flags[..n].iter().any(|f| !*f));
            let mut labels = LabelTable::new();
            let names: Vec<String> = (0..n).map(|i| alloc::format!("a{i:02}")).collect();
            for i in 0..n {
                labels.insert(names[i].clone(), if flags[i] { ILL } else { LIC });
            }
            let plain = auc(names.iter().map(|s| s.as_str()).zip(scores[..n].iter().copied()), &labels).unwrap();
            let transformed = auc(
                names.iter().map(|s| s.as_str()).zip(scores[..n].iter().map(|s| libm::exp(*s) + s * 3.0)),
                &labels,
            ).unwrap();
            prop_assert!((plain - transformed).abs() < 1e-12);
        }
    }
}
