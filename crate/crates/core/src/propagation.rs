//! Fixed-point propagation of reliability, trustiness, and confidence.
//!
//! Per iteration, with scores fixed:
//!
//! ```text
//! T[t](v) = sum over in-edges  (m * score * C[t-1]) / in_count(v)
//! R[t](u) = sum over out-edges (m * C[t-1])         / out_count(u)
//! C[t](e) = (R[t](payer) + 1 - |score - T[t](payee)|) / 2, clamped to [0,1]
//! ```
//!
//! so trustiness and reliability read the previous iteration's confidence
//! while confidence reads the current trustiness and reliability. Iteration
//! stops when the largest of the summed absolute changes drops below
//! `epsilon`. The raw update can push confidence to -1/2 when a score sits
//! far from its payee's trustiness; the clamp enforces the declared [0,1]
//! range and thereby keeps reliability in [0,1] as well. Trustiness is left
//! on its natural [-1,1] range.
//!
//! When the maximum absolute edge score `m` is strictly below 1 the map is a
//! contraction: the distance to the fixed point shrinks at least by
//! `(1+m)/2` per iteration, which also makes the fixed point unique. Both
//! properties are exercised by this crate's acceptance tests.
//!
//! In semi-supervised mode, training accounts start from per-category
//! reliability priors, and illicit training payers are pinned at their
//! initial reliability for the whole run.

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;
use core::sync::atomic::{AtomicU64, Ordering};

use crate::exec::ParallelMap;
use crate::graph::{PayeeId, PayerId, PayerPayeeGraph};
use crate::ingest::{Category, LabelTable};
use crate::{Error, Result};

/// Whether label priors seed the initial reliability values.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Unsupervised,
    SemiSupervised,
}

/// Initial reliability per label category, used by semi-supervised runs.
/// Categories without an entry fall back to the generic initial value.
#[derive(Debug, Clone, PartialEq)]
pub struct LabelReliability {
    values: [Option<f64>; Category::ALL.len()],
}

impl Default for LabelReliability {
    fn default() -> Self {
        let mut lr = Self {
            values: [None; Category::ALL.len()],
        };
        lr.set(Category::IcoWallet, 0.9);
        lr.set(Category::Converter, 0.9);
        lr.set(Category::Mining, 0.9);
        lr.set(Category::Exchange, 0.7);
        lr.set(Category::Gambling, 0.4);
        lr.set(Category::PhishHack, 0.0);
        lr
    }
}

impl LabelReliability {
    pub fn get(&self, category: Category) -> Option<f64> {
        self.values[category.index()]
    }

    pub fn set(&mut self, category: Category, value: f64) {
        self.values[category.index()] = Some(value);
    }
}

/// Propagation tuning knobs.
#[derive(Debug, Clone, PartialEq)]
pub struct PropagationConfig {
    pub init_trustiness: f64,
    pub init_reliability: f64,
    pub init_confidence: f64,
    /// Convergence threshold on the max summed absolute change.
    pub epsilon: f64,
    /// Safety cap; saturated graphs (`|score| = 1`) may never converge.
    pub max_iterations: usize,
    pub mode: Mode,
    pub label_reliability: LabelReliability,
    /// Keep illicit training payers at their initial reliability.
    pub clamp_illicit: bool,
    /// Divide each change sum by its element count before comparing against
    /// `epsilon`; off by default (the raw sums are scale-dependent).
    pub normalized_delta: bool,
}

impl Default for PropagationConfig {
    fn default() -> Self {
        Self {
            init_trustiness: 0.5,
            init_reliability: 0.7,
            init_confidence: 0.5,
            epsilon: 0.01,
            max_iterations: 1000,
            mode: Mode::Unsupervised,
            label_reliability: LabelReliability::default(),
            clamp_illicit: true,
            normalized_delta: false,
        }
    }
}

impl PropagationConfig {
    pub fn validate(&self) -> Result<()> {
        let check = |name: &str, v: f64, lo: f64, hi: f64| -> Result<()> {
            if !(v >= lo && v <= hi) {
                return Err(Error::InvalidConfig(alloc::format!(
                    "{name} = {v} outside [{lo}, {hi}]"
                )));
            }
            Ok(())
        };
        check("init_trustiness", self.init_trustiness, -1.0, 1.0)?;
        check("init_reliability", self.init_reliability, 0.0, 1.0)?;
        check("init_confidence", self.init_confidence, 0.0, 1.0)?;
        for c in Category::ALL {
            if let Some(v) = self.label_reliability.get(c) {
                check(c.as_str(), v, 0.0, 1.0)?;
            }
        }
        if !(self.epsilon > 0.0) || !self.epsilon.is_finite() {
            return Err(Error::InvalidConfig(alloc::format!(
                "epsilon = {} must be a positive finite number",
                self.epsilon
            )));
        }
        if self.max_iterations == 0 {
            return Err(Error::InvalidConfig(String::from(
                "max_iterations must be at least 1",
            )));
        }
        Ok(())
    }
}

/// Per-payee trustiness, per-payer reliability, per-edge confidence.
#[derive(Debug, Clone, PartialEq)]
pub struct PropagationState {
    pub trustiness: Vec<f64>,
    pub reliability: Vec<f64>,
    pub confidence: Vec<f64>,
    /// Completed iterations.
    pub iteration: usize,
    pinned: Vec<bool>,
}

impl PropagationState {
    pub fn trustiness_of(&self, v: PayeeId) -> f64 {
        self.trustiness[v.index()]
    }
    pub fn reliability_of(&self, u: PayerId) -> f64 {
        self.reliability[u.index()]
    }
    /// True when the payer's reliability is held at its initial value.
    pub fn is_pinned(&self, u: PayerId) -> bool {
        self.pinned[u.index()]
    }

    fn matches(&self, graph: &PayerPayeeGraph) -> bool {
        self.trustiness.len() == graph.n_payees()
            && self.reliability.len() == graph.n_payers()
            && self.confidence.len() == graph.n_edges()
            && self.pinned.len() == graph.n_payers()
    }
}

/// Summed absolute changes of one iteration, and their maximum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Delta {
    pub trustiness: f64,
    pub reliability: f64,
    pub confidence: f64,
    pub max: f64,
}

/// Why the iteration stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    Converged,
    MaxIterations,
}

/// A completed propagation run.
#[derive(Debug, Clone)]
pub struct PropagationRun {
    pub state: PropagationState,
    /// One entry per completed iteration.
    pub trace: Vec<Delta>,
    pub termination: Termination,
    /// Number of confidence values clamped over the whole run.
    pub clamp_events: u64,
    /// `(1 + max|score|) / 2`; the guaranteed per-iteration contraction
    /// rate when it is below 1.
    pub contraction_factor: f64,
}

/// Trustiness of a payee from `(score, confidence, multiplicity)` in-edges.
pub fn trustiness_of(incoming: &[(f64, f64, u64)]) -> f64 {
    let total: u64 = incoming.iter().map(|(_, _, m)| *m).sum();
    let sum: f64 = incoming
        .iter()
        .map(|(s, c, m)| *m as f64 * *s * *c)
        .sum::<f64>();
    sum / total as f64
}

/// Reliability of a payer from `(confidence, multiplicity)` out-edges.
pub fn reliability_of(outgoing: &[(f64, u64)]) -> f64 {
    let total: u64 = outgoing.iter().map(|(_, m)| *m).sum();
    let sum: f64 = outgoing.iter().map(|(c, m)| *m as f64 * *c).sum::<f64>();
    sum / total as f64
}

/// The raw confidence update `(R + 1 - |score - T|) / 2`, before clamping.
pub fn confidence_raw(reliability: f64, score: f64, trustiness: f64) -> f64 {
    (reliability + 1.0 - libm::fabs(score - trustiness)) / 2.0
}

/// The clamped confidence update; the engine stores this value.
pub fn confidence_of(reliability: f64, score: f64, trustiness: f64) -> f64 {
    confidence_raw(reliability, score, trustiness).clamp(0.0, 1.0)
}

/// Builds the initial state.
///
/// Unsupervised: every payer starts at `init_reliability`. Semi-supervised:
/// training payers with a label start from their category prior; illicit
/// training payers are additionally pinned when `clamp_illicit` is set.
pub fn initialize(
    graph: &PayerPayeeGraph,
    config: &PropagationConfig,
    labels: Option<&LabelTable>,
    training: Option<&BTreeSet<String>>,
) -> Result<PropagationState> {
    config.validate()?;
    let mut reliability = alloc::vec![config.init_reliability; graph.n_payers()];
    let mut pinned = alloc::vec![false; graph.n_payers()];
    if config.mode == Mode::SemiSupervised {
        let (labels, training) = match (labels, training) {
            (Some(l), Some(t)) => (l, t),
            _ => return Err(Error::MissingLabels),
        };
        for u in 0..graph.n_payers() {
            let uid = PayerId(u as u32);
            let address = graph.payer_address(uid);
            if !training.contains(address) {
                continue;
            }
            if let Some(category) = labels.get(address) {
                reliability[u] = config
                    .label_reliability
                    .get(category)
                    .unwrap_or(config.init_reliability);
                if config.clamp_illicit && category.is_illicit() {
                    pinned[u] = true;
                }
            }
        }
    }
    Ok(PropagationState {
        trustiness: alloc::vec![config.init_trustiness; graph.n_payees()],
        reliability,
        confidence: alloc::vec![config.init_confidence; graph.n_edges()],
        iteration: 0,
        pinned,
    })
}

fn trustiness_into(
    out: &mut [f64],
    prev_confidence: &[f64],
    graph: &PayerPayeeGraph,
    exec: &dyn ParallelMap,
) {
    let edges = graph.edges();
    exec.map_into(out, &|v| {
        let v = PayeeId(v as u32);
        let mut acc = 0.0;
        for &ei in graph.in_edge_ids(v) {
            let e = &edges[ei as usize];
            acc += e.multiplicity as f64 * e.score * prev_confidence[ei as usize];
        }
        acc / graph.in_count(v) as f64
    });
}

fn reliability_into(
    out: &mut [f64],
    prev_confidence: &[f64],
    prev_reliability: &[f64],
    pinned: &[bool],
    graph: &PayerPayeeGraph,
    exec: &dyn ParallelMap,
) {
    let edges = graph.edges();
    exec.map_into(out, &|u| {
        if pinned[u] {
            return prev_reliability[u];
        }
        let u = PayerId(u as u32);
        let mut acc = 0.0;
        for ei in graph.out_edge_range(u) {
            acc += edges[ei].multiplicity as f64 * prev_confidence[ei];
        }
        acc / graph.out_count(u) as f64
    });
}

fn confidence_into(
    out: &mut [f64],
    trustiness: &[f64],
    reliability: &[f64],
    graph: &PayerPayeeGraph,
    exec: &dyn ParallelMap,
) -> u64 {
    let edges = graph.edges();
    let clamps = AtomicU64::new(0);
    exec.map_into(out, &|i| {
        let e = &edges[i];
        let raw = confidence_raw(reliability[e.payer.index()], e.score, trustiness[e.payee.index()]);
        if !(0.0..=1.0).contains(&raw) {
            clamps.fetch_add(1, Ordering::Relaxed);
            raw.clamp(0.0, 1.0)
        } else {
            raw
        }
    });
    clamps.into_inner()
}

fn delta_between(
    graph: &PayerPayeeGraph,
    prev: (&[f64], &[f64], &[f64]),
    curr: (&[f64], &[f64], &[f64]),
    normalized: bool,
) -> Delta {
    let sum_abs = |a: &[f64], b: &[f64]| -> f64 {
        a.iter().zip(b).map(|(x, y)| libm::fabs(x - y)).sum()
    };
    let mut trustiness = sum_abs(prev.0, curr.0);
    let mut reliability = sum_abs(prev.1, curr.1);
    let mut confidence: f64 = graph
        .edges()
        .iter()
        .zip(prev.2.iter().zip(curr.2))
        .map(|(e, (x, y))| e.multiplicity as f64 * libm::fabs(x - y))
        .sum();
    if normalized {
        trustiness /= graph.n_payees() as f64;
        reliability /= graph.n_payers() as f64;
        confidence /= graph.n_transactions() as f64;
    }
    Delta {
        trustiness,
        reliability,
        confidence,
        max: trustiness.max(reliability).max(confidence),
    }
}

fn ensure_ready(graph: &PayerPayeeGraph, state: &PropagationState) -> Result<()> {
    if !graph.is_scored() {
        return Err(Error::UnscoredGraph);
    }
    if !state.matches(graph) {
        return Err(Error::GraphMismatch);
    }
    Ok(())
}

/// One trustiness phase, reading the previous iteration's confidence.
pub fn update_trustiness(
    state: &PropagationState,
    graph: &PayerPayeeGraph,
    exec: &dyn ParallelMap,
) -> Result<Vec<f64>> {
    ensure_ready(graph, state)?;
    let mut out = alloc::vec![0.0; graph.n_payees()];
    trustiness_into(&mut out, &state.confidence, graph, exec);
    Ok(out)
}

/// One reliability phase, reading the previous iteration's confidence.
/// Pinned payers keep their current value.
pub fn update_reliability(
    state: &PropagationState,
    graph: &PayerPayeeGraph,
    exec: &dyn ParallelMap,
) -> Result<Vec<f64>> {
    ensure_ready(graph, state)?;
    let mut out = alloc::vec![0.0; graph.n_payers()];
    reliability_into(
        &mut out,
        &state.confidence,
        &state.reliability,
        &state.pinned,
        graph,
        exec,
    );
    Ok(out)
}

/// One confidence phase, reading `state`'s trustiness and reliability as the
/// current-iteration values.
pub fn update_confidence(
    state: &PropagationState,
    graph: &PayerPayeeGraph,
    exec: &dyn ParallelMap,
) -> Result<Vec<f64>> {
    ensure_ready(graph, state)?;
    let mut out = alloc::vec![0.0; graph.n_edges()];
    confidence_into(&mut out, &state.trustiness, &state.reliability, graph, exec);
    Ok(out)
}

/// Change sums between two states over the same graph. The confidence sum
/// is multiplicity-weighted, i.e. taken per underlying transaction.
pub fn compute_delta(
    graph: &PayerPayeeGraph,
    prev: &PropagationState,
    curr: &PropagationState,
    normalized: bool,
) -> Result<Delta> {
    if !prev.matches(graph) || !curr.matches(graph) {
        return Err(Error::GraphMismatch);
    }
    Ok(delta_between(
        graph,
        (&prev.trustiness, &prev.reliability, &prev.confidence),
        (&curr.trustiness, &curr.reliability, &curr.confidence),
        normalized,
    ))
}

/// Runs the propagation loop until the change criterion drops below
/// `epsilon` or `max_iterations` is hit.
pub fn iterate_until_convergence(
    graph: &PayerPayeeGraph,
    config: &PropagationConfig,
    labels: Option<&LabelTable>,
    training: Option<&BTreeSet<String>>,
    exec: &dyn ParallelMap,
) -> Result<PropagationRun> {
    if !graph.is_scored() {
        return Err(Error::UnscoredGraph);
    }
    let mut state = initialize(graph, config, labels, training)?;
    let mut next_t = alloc::vec![0.0; graph.n_payees()];
    let mut next_r = alloc::vec![0.0; graph.n_payers()];
    let mut next_c = alloc::vec![0.0; graph.n_edges()];
    let mut trace = Vec::new();
    let mut clamp_events = 0;
    let mut termination = Termination::MaxIterations;

    for iteration in 1..=config.max_iterations {
        trustiness_into(&mut next_t, &state.confidence, graph, exec);
        reliability_into(
            &mut next_r,
            &state.confidence,
            &state.reliability,
            &state.pinned,
            graph,
            exec,
        );
        clamp_events += confidence_into(&mut next_c, &next_t, &next_r, graph, exec);

        let finite = next_t.iter().chain(&next_r).chain(&next_c).all(|x| x.is_finite());
        if !finite {
            return Err(Error::NonFinite { iteration });
        }

        let delta = delta_between(
            graph,
            (&state.trustiness, &state.reliability, &state.confidence),
            (&next_t, &next_r, &next_c),
            config.normalized_delta,
        );
        core::mem::swap(&mut state.trustiness, &mut next_t);
        core::mem::swap(&mut state.reliability, &mut next_r);
        core::mem::swap(&mut state.confidence, &mut next_c);
        state.iteration = iteration;
        trace.push(delta);

        if delta.max < config.epsilon {
            termination = Termination::Converged;
            break;
        }
    }

    Ok(PropagationRun {
        state,
        trace,
        termination,
        clamp_events,
        contraction_factor: (1.0 + graph.max_abs_score()) / 2.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exec::Serial;
    use crate::graph::{build_graph, score_all_edges};
    use crate::ingest::TransactionRecord;
    use alloc::string::ToString;
    use alloc::vec;
    use proptest::prelude::*;

    fn txn(payer: &str, payee: &str) -> TransactionRecord {
        TransactionRecord {
            tx_id: String::new(),
            payer: payer.to_string(),
            payee: payee.to_string(),
            value: 1,
            timestamp: None,
        }
    }

    /// Single edge a->b with an injected score.
    fn single_edge(score: f64) -> PayerPayeeGraph {
        let mut g = build_graph(&[txn("a", "b")]).unwrap();
        g.replace_scores(&[score]).unwrap();
        g
    }

    #[test]
    fn unsupervised_initialization_uses_defaults() {
        let g = single_edge(0.0);
        let state = initialize(&g, &PropagationConfig::default(), None, None).unwrap();
        assert_eq!(state.reliability, vec![0.7]);
        assert_eq!(state.trustiness, vec![0.5]);
        assert_eq!(state.confidence, vec![0.5]);
        assert_eq!(state.iteration, 0);
    }

    fn semi_config() -> PropagationConfig {
        PropagationConfig {
            mode: Mode::SemiSupervised,
            ..PropagationConfig::default()
        }
    }

    #[test]
    fn semi_supervised_uses_label_priors() {
        let g = build_graph(&[txn("a", "x"), txn("b", "x"), txn("c", "x")]).unwrap();
        let mut labels = LabelTable::new();
        labels.insert("a".to_string(), Category::PhishHack);
        labels.insert("b".to_string(), Category::Gambling);
        let training: BTreeSet<String> = ["a".to_string(), "b".to_string()].into();
        let state = initialize(&g, &semi_config(), Some(&labels), Some(&training)).unwrap();
        // Payers are ordered by address: a, b, c.
        assert_eq!(state.reliability, vec![0.0, 0.4, 0.7]);
        assert!(state.is_pinned(PayerId(0)));
        assert!(!state.is_pinned(PayerId(1)));
    }

    #[test]
    fn labeled_but_not_training_gets_default() {
        let g = build_graph(&[txn("a", "x")]).unwrap();
        let mut labels = LabelTable::new();
        labels.insert("a".to_string(), Category::PhishHack);
        let training = BTreeSet::new();
        let state = initialize(&g, &semi_config(), Some(&labels), Some(&training)).unwrap();
        assert_eq!(state.reliability, vec![0.7]);
        assert!(!state.is_pinned(PayerId(0)));
    }

    #[test]
    fn semi_supervised_without_labels_errors() {
        let g = single_edge(0.0);
        assert_eq!(
            initialize(&g, &semi_config(), None, None).unwrap_err(),
            Error::MissingLabels
        );
    }

    #[test]
    fn kernel_examples() {
        assert_eq!(trustiness_of(&[(-1.0, 0.5, 1)]), -0.5);
        assert_eq!(trustiness_of(&[(0.0, 0.3, 2), (0.0, 0.9, 5)]), 0.0);
        assert_eq!(trustiness_of(&[(1.0, 1.0, 1), (-1.0, 1.0, 1)]), 0.0);
        assert_eq!(reliability_of(&[(0.5, 1)]), 0.5);
        assert_eq!(reliability_of(&[(1.0, 3), (1.0, 2)]), 1.0);
        assert_eq!(confidence_of(0.5, 0.0, 0.0), 0.75);
        assert_eq!(confidence_of(1.0, 0.3, 0.3), 1.0);
        assert_eq!(confidence_raw(0.0, 1.0, -1.0), -0.5);
        assert_eq!(confidence_of(0.0, 1.0, -1.0), 0.0);
    }

    /// One iteration on the single-edge score -1 network pins down the phase
    /// ordering: trustiness and reliability read the previous confidence,
    /// confidence reads the current trustiness and reliability.
    #[test]
    fn update_order_is_exact_on_single_edge() {
        let g = single_edge(-1.0);
        let run =
            iterate_until_convergence(&g, &PropagationConfig::default(), None, None, &Serial)
                .unwrap();
        // Iteration 1: T = -1*0.5 = -0.5, R = 0.5, C = (0.5+1-|-1+0.5|)/2 = 0.5.
        // That is already the fixed point.
        assert_eq!(run.state.trustiness, vec![-0.5]);
        assert_eq!(run.state.reliability, vec![0.5]);
        assert_eq!(run.state.confidence, vec![0.5]);
        assert_eq!(run.termination, Termination::Converged);
        assert_eq!(run.trace.len(), run.state.iteration);
    }

    #[test]
    fn score_zero_edge_converges_to_full_confidence() {
        let g = single_edge(0.0);
        let config = PropagationConfig {
            epsilon: 1e-9,
            ..PropagationConfig::default()
        };
        let run = iterate_until_convergence(&g, &config, None, None, &Serial).unwrap();
        assert!(run.state.trustiness[0].abs() < 1e-6);
        assert!((run.state.reliability[0] - 1.0).abs() < 1e-6);
        assert!((run.state.confidence[0] - 1.0).abs() < 1e-6);
        assert_eq!(run.termination, Termination::Converged);
    }

    #[test]
    fn phase_updates_match_kernels() {
        let records = vec![txn("a", "c"), txn("a", "d"), txn("b", "c"), txn("b", "c")];
        let mut g = build_graph(&records).unwrap();
        score_all_edges(&mut g, &Serial);
        let state = initialize(&g, &PropagationConfig::default(), None, None).unwrap();
        let t = update_trustiness(&state, &g, &Serial).unwrap();
        for v in 0..g.n_payees() {
            let vid = PayeeId(v as u32);
            let incoming: Vec<_> = g
                .in_edges(vid)
                .map(|e| (e.score, 0.5, e.multiplicity))
                .collect();
            assert_eq!(t[v], trustiness_of(&incoming));
        }
        let r = update_reliability(&state, &g, &Serial).unwrap();
        for u in 0..g.n_payers() {
            let outgoing: Vec<_> = g
                .out_edges(PayerId(u as u32))
                .iter()
                .map(|e| (0.5, e.multiplicity))
                .collect();
            assert_eq!(r[u], reliability_of(&outgoing));
        }
    }

    #[test]
    fn pinned_payer_keeps_reliability() {
        let g = {
            let mut g = build_graph(&[txn("a", "x"), txn("b", "x")]).unwrap();
            g.replace_scores(&[0.2, 0.2]).unwrap();
            g
        };
        let mut labels = LabelTable::new();
        labels.insert("a".to_string(), Category::PhishHack);
        let training: BTreeSet<String> = ["a".to_string()].into();
        let run = iterate_until_convergence(&g, &semi_config(), Some(&labels), Some(&training), &Serial)
            .unwrap();
        assert_eq!(run.state.reliability[0], 0.0);
        assert!(run.state.reliability[1] > 0.0);
    }

    #[test]
    fn delta_examples() {
        let records = vec![txn("a", "x"), txn("b", "y")];
        let mut g = build_graph(&records).unwrap();
        score_all_edges(&mut g, &Serial);
        let base = initialize(&g, &PropagationConfig::default(), None, None).unwrap();

        let identical = compute_delta(&g, &base, &base, false).unwrap();
        assert_eq!(
            (identical.trustiness, identical.reliability, identical.confidence, identical.max),
            (0.0, 0.0, 0.0, 0.0)
        );

        // One payee moves 0.5 -> 0.4.
        let mut moved = base.clone();
        moved.trustiness[0] = 0.4;
        let d = compute_delta(&g, &base, &moved, false).unwrap();
        assert!((d.trustiness - 0.1).abs() < 1e-15);
        assert_eq!(d.max, d.trustiness);

        // Two payers move 0.05 each, one payee moves 0.08.
        let mut moved = base.clone();
        moved.reliability[0] += 0.05;
        moved.reliability[1] -= 0.05;
        moved.trustiness[0] += 0.08;
        let d = compute_delta(&g, &base, &moved, false).unwrap();
        assert!((d.reliability - 0.1).abs() < 1e-15);
        assert!((d.trustiness - 0.08).abs() < 1e-15);
        assert!((d.max - 0.1).abs() < 1e-15);
    }

    #[test]
    fn delta_confidence_is_multiplicity_weighted() {
        let mut g = build_graph(&[txn("a", "x"), txn("a", "x"), txn("a", "x")]).unwrap();
        score_all_edges(&mut g, &Serial);
        let base = initialize(&g, &PropagationConfig::default(), None, None).unwrap();
        let mut moved = base.clone();
        moved.confidence[0] += 0.1;
        let d = compute_delta(&g, &base, &moved, false).unwrap();
        assert!((d.confidence - 0.3).abs() < 1e-15);
    }

    #[test]
    fn normalized_delta_divides_by_element_counts() {
        let mut g = build_graph(&[txn("a", "x"), txn("a", "x"), txn("b", "y")]).unwrap();
        score_all_edges(&mut g, &Serial);
        let base = initialize(&g, &PropagationConfig::default(), None, None).unwrap();
        let mut moved = base.clone();
        moved.trustiness[0] += 0.2;
        moved.reliability[0] += 0.1;
        moved.confidence[0] += 0.3; // edge (a, x) has multiplicity 2
        let raw = compute_delta(&g, &base, &moved, false).unwrap();
        let norm = compute_delta(&g, &base, &moved, true).unwrap();
        assert!((norm.trustiness - raw.trustiness / g.n_payees() as f64).abs() < 1e-15);
        assert!((norm.reliability - raw.reliability / g.n_payers() as f64).abs() < 1e-15);
        assert!((norm.confidence - raw.confidence / g.n_transactions() as f64).abs() < 1e-15);
    }

    #[test]
    fn mismatched_states_error() {
        let g1 = single_edge(0.0);
        let g2 = {
            let mut g = build_graph(&[txn("a", "x"), txn("b", "y")]).unwrap();
            score_all_edges(&mut g, &Serial);
            g
        };
        let s1 = initialize(&g1, &PropagationConfig::default(), None, None).unwrap();
        let s2 = initialize(&g2, &PropagationConfig::default(), None, None).unwrap();
        assert_eq!(
            compute_delta(&g1, &s1, &s2, false).unwrap_err(),
            Error::GraphMismatch
        );
    }

    #[test]
    fn unscored_graph_is_rejected() {
        let g = build_graph(&[txn("a", "b")]).unwrap();
        let err = iterate_until_convergence(&g, &PropagationConfig::default(), None, None, &Serial)
            .unwrap_err();
        assert_eq!(err, Error::UnscoredGraph);
    }

    #[test]
    fn non_finite_scores_fail_with_iteration_index() {
        let g = single_edge(f64::NAN);
        let err = iterate_until_convergence(&g, &PropagationConfig::default(), None, None, &Serial)
            .unwrap_err();
        assert_eq!(err, Error::NonFinite { iteration: 1 });
    }

    #[test]
    fn max_iterations_cap_reports_termination() {
        let g = single_edge(0.0);
        let config = PropagationConfig {
            epsilon: 1e-300,
            max_iterations: 3,
            ..PropagationConfig::default()
        };
        let run = iterate_until_convergence(&g, &config, None, None, &Serial).unwrap();
        assert_eq!(run.termination, Termination::MaxIterations);
        assert_eq!(run.state.iteration, 3);
        assert_eq!(run.trace.len(), 3);
    }

    #[test]
    fn invalid_config_is_rejected() {
        let g = single_edge(0.0);
        let bad = PropagationConfig {
            epsilon: 0.0,
            ..PropagationConfig::default()
        };
        assert!(matches!(
            initialize(&g, &bad, None, None).unwrap_err(),
            Error::InvalidConfig(_)
        ));
        let bad = PropagationConfig {
            init_reliability: 1.5,
            ..PropagationConfig::default()
        };
        assert!(initialize(&g, &bad, None, None).is_err());
    }

    proptest! {
        /// After every iteration the declared metric ranges hold.
        #[test]
        fn ranges_preserved_on_random_graphs(
            edges in proptest::collection::vec((0u8..6, 0u8..6), 1..30),
            raw_scores in proptest::collection::vec(-1.0f64..=1.0, 30),
        ) {
            let records: Vec<_> = edges
                .iter()
                .map(|(a, b)| txn(&alloc::format!("p{a}"), &alloc::format!("q{b}")))
                .collect();
            let mut g = build_graph(&records).unwrap();
            let scores: Vec<f64> = (0..g.n_edges()).map(|i| raw_scores[i % raw_scores.len()]).collect();
            g.replace_scores(&scores).unwrap();
            let config = PropagationConfig { max_iterations: 25, epsilon: 1e-12, ..PropagationConfig::default() };
            let run = iterate_until_convergence(&g, &config, None, None, &Serial).unwrap();
            for c in &run.state.confidence {
                prop_assert!((0.0..=1.0).contains(c));
            }
            for r in &run.state.reliability {
                prop_assert!((0.0..=1.0).contains(r));
            }
            for t in &run.state.trustiness {
                prop_assert!((-1.0..=1.0).contains(t));
            }
            prop_assert_eq!(run.trace.len(), run.state.iteration);
        }

        /// Two identical serial runs agree bit for bit.
        #[test]
        fn serial_runs_are_deterministic(
            edges in proptest::collection::vec((0u8..5, 0u8..5), 1..20),
        ) {
            let records: Vec<_> = edges
                .iter()
                .map(|(a, b)| txn(&alloc::format!("p{a}"), &alloc::format!("q{b}")))
                .collect();
            let mut g = build_graph(&records).unwrap();
            score_all_edges(&mut g, &Serial);
            let config = PropagationConfig::default();
            let a = iterate_until_convergence(&g, &config, None, None, &Serial).unwrap();
            let b = iterate_until_convergence(&g, &config, None, None, &Serial).unwrap();
            prop_assert_eq!(a.state, b.state);
        }
    }
}
