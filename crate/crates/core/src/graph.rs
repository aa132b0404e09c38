//! Directed bipartite payer-payee graph and per-edge de-anonymization
//! scoring.
//!
//! Every account appearing as a sender gets a payer-role node, every
//! receiver a payee-role node; an account active in both roles owns one node
//! on each side. Parallel transactions between the same pair collapse into a
//! single edge carrying a multiplicity, which leaves all downstream
//! propagation quantities identical to the per-transaction formulation
//! (parallel edges share a score, hence share confidence).
//!
//! The de-anonymization score of an edge is
//!
//! ```text
//! score(u, v) = 1/2 * ( (2*ln out(u) - ln maxOut) / ln maxOut
//!             +         (2*ln in(v)  - ln maxIn)  / ln maxIn )
//! ```
//!
//! where `out(u)`/`in(v)` are the payer's total payments and the payee's
//! total receptions. Each term sweeps -1 (a single transaction: maximal
//! anonymity) to +1 (network maximum: fully exposed); the value is invariant
//! under the logarithm base. When `maxOut` or `maxIn` is 1 the whole side of
//! the network is degenerate and that term is defined as 0 (neutral).

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::exec::ParallelMap;
use crate::ingest::TransactionRecord;
use crate::{Error, Result};

/// Index into the interned account table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AccountId(pub u32);

/// Index of a payer-role node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PayerId(pub u32);

/// Index of a payee-role node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PayeeId(pub u32);

impl AccountId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}
impl PayerId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}
impl PayeeId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// A collapsed payer-to-payee edge.
#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    pub payer: PayerId,
    pub payee: PayeeId,
    /// Number of underlying transactions.
    pub multiplicity: u64,
    /// De-anonymization score in `[-1, 1]`; `NAN` until scored.
    pub score: f64,
}

/// The directed bipartite transaction graph.
///
/// Edges are stored sorted by `(payer, payee)`, so each payer's out-edges
/// form a contiguous range ordered by payee address and the per-payee index
/// lists in-edges ordered by payer address. All propagation sums follow
/// these canonical orders, which is what makes parallel and serial runs
/// bit-identical.
#[derive(Debug, Clone)]
pub struct PayerPayeeGraph {
    accounts: Vec<String>,
    payer_accounts: Vec<AccountId>,
    payee_accounts: Vec<AccountId>,
    account_payer: Vec<Option<PayerId>>,
    account_payee: Vec<Option<PayeeId>>,
    edges: Vec<Edge>,
    out_start: Vec<usize>,
    in_start: Vec<usize>,
    in_edges: Vec<u32>,
    out_count: Vec<u64>,
    in_count: Vec<u64>,
    max_out: u64,
    max_in: u64,
    total_transactions: u64,
    scored: bool,
    max_score: f64,
    max_abs_score: f64,
    saturated: bool,
}

fn score_term(count: u64, max: u64) -> f64 {
    if max <= 1 {
        return 0.0;
    }
    let log_max = libm::log(max as f64);
    (2.0 * libm::log(count as f64) - log_max) / log_max
}

/// Evaluates the de-anonymization score for one transaction.
///
/// Errors unless `1 <= out_count <= max_out` and `1 <= in_count <= max_in`.
pub fn deanonymous_score(
    out_count: u64,
    in_count: u64,
    max_out: u64,
    max_in: u64,
) -> Result<f64> {
    if out_count < 1 || out_count > max_out {
        return Err(Error::CountOutOfRange {
            count: out_count,
            max: max_out,
        });
    }
    if in_count < 1 || in_count > max_in {
        return Err(Error::CountOutOfRange {
            count: in_count,
            max: max_in,
        });
    }
    Ok(0.5 * (score_term(out_count, max_out) + score_term(in_count, max_in)))
}

/// Builds the bipartite graph from clean transaction records.
///
/// Degree counts and `maxOut`/`maxIn` are populated; edge scores are not
/// (see [`score_all_edges`]).
pub fn build_graph(records: &[TransactionRecord]) -> Result<PayerPayeeGraph> {
    if records.is_empty() {
        return Err(Error::EmptyInput);
    }

    let mut addrs: Vec<&str> = records
        .iter()
        .flat_map(|r| [r.payer.as_str(), r.payee.as_str()])
        .collect();
    addrs.sort_unstable();
    addrs.dedup();
    let accounts: Vec<String> = addrs.iter().map(|a| a.to_string()).collect();
    let account_id = |a: &str| AccountId(addrs.binary_search(&a).expect("interned") as u32);

    let mut is_payer = alloc::vec![false; accounts.len()];
    let mut is_payee = alloc::vec![false; accounts.len()];
    for r in records {
        is_payer[account_id(&r.payer).index()] = true;
        is_payee[account_id(&r.payee).index()] = true;
    }
    let payer_accounts: Vec<AccountId> = (0..accounts.len())
        .filter(|i| is_payer[*i])
        .map(|i| AccountId(i as u32))
        .collect();
    let payee_accounts: Vec<AccountId> = (0..accounts.len())
        .filter(|i| is_payee[*i])
        .map(|i| AccountId(i as u32))
        .collect();
    let mut account_payer = alloc::vec![None; accounts.len()];
    for (p, a) in payer_accounts.iter().enumerate() {
        account_payer[a.index()] = Some(PayerId(p as u32));
    }
    let mut account_payee = alloc::vec![None; accounts.len()];
    for (p, a) in payee_accounts.iter().enumerate() {
        account_payee[a.index()] = Some(PayeeId(p as u32));
    }

    // Collapse parallel transactions; BTreeMap iteration yields the
    // canonical (payer, payee) edge order.
    let mut multiplicities: alloc::collections::BTreeMap<(u32, u32), u64> =
        alloc::collections::BTreeMap::new();
    for r in records {
        let u = account_payer[account_id(&r.payer).index()].expect("payer role");
        let v = account_payee[account_id(&r.payee).index()].expect("payee role");
        *multiplicities.entry((u.0, v.0)).or_insert(0) += 1;
    }
    let edges: Vec<Edge> = multiplicities
        .into_iter()
        .map(|((u, v), multiplicity)| Edge {
            payer: PayerId(u),
            payee: PayeeId(v),
            multiplicity,
            score: f64::NAN,
        })
        .collect();

    let mut out_count = alloc::vec![0u64; payer_accounts.len()];
    let mut in_count = alloc::vec![0u64; payee_accounts.len()];
    for e in &edges {
        out_count[e.payer.index()] += e.multiplicity;
        in_count[e.payee.index()] += e.multiplicity;
    }

    let mut out_start = alloc::vec![0usize; payer_accounts.len() + 1];
    for e in &edges {
        out_start[e.payer.index() + 1] += 1;
    }
    for i in 0..payer_accounts.len() {
        out_start[i + 1] += out_start[i];
    }

    let mut in_degree = alloc::vec![0usize; payee_accounts.len()];
    for e in &edges {
        in_degree[e.payee.index()] += 1;
    }
    let mut in_start = alloc::vec![0usize; payee_accounts.len() + 1];
    for i in 0..payee_accounts.len() {
        in_start[i + 1] = in_start[i] + in_degree[i];
    }
    let mut cursor = in_start.clone();
    let mut in_edges = alloc::vec![0u32; edges.len()];
    for (idx, e) in edges.iter().enumerate() {
        in_edges[cursor[e.payee.index()]] = idx as u32;
        cursor[e.payee.index()] += 1;
    }

    let max_out = out_count.iter().copied().max().unwrap_or(0);
    let max_in = in_count.iter().copied().max().unwrap_or(0);

    Ok(PayerPayeeGraph {
        accounts,
        payer_accounts,
        payee_accounts,
        account_payer,
        account_payee,
        edges,
        out_start,
        in_start,
        in_edges,
        out_count,
        in_count,
        max_out,
        max_in,
        total_transactions: records.len() as u64,
        scored: false,
        max_score: f64::NAN,
        max_abs_score: f64::NAN,
        saturated: false,
    })
}

/// Scores every edge and records the score extrema.
///
/// Sets a diagnostic flag when any `|score| = 1`, since the propagation
/// contraction guarantee needs the maximum absolute score strictly below 1.
pub fn score_all_edges(graph: &mut PayerPayeeGraph, exec: &dyn ParallelMap) {
    let mut scores = alloc::vec![0.0; graph.edges.len()];
    {
        let edges = &graph.edges;
        let out_count = &graph.out_count;
        let in_count = &graph.in_count;
        let (max_out, max_in) = (graph.max_out, graph.max_in);
        exec.map_into(&mut scores, &|i| {
            let e = &edges[i];
            0.5 * (score_term(out_count[e.payer.index()], max_out)
                + score_term(in_count[e.payee.index()], max_in))
        });
    }
    graph.set_scores(scores);
}

impl PayerPayeeGraph {
    pub fn n_accounts(&self) -> usize {
        self.accounts.len()
    }
    pub fn n_payers(&self) -> usize {
        self.payer_accounts.len()
    }
    pub fn n_payees(&self) -> usize {
        self.payee_accounts.len()
    }
    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }
    /// Total ingested transactions (the sum of edge multiplicities).
    pub fn n_transactions(&self) -> u64 {
        self.total_transactions
    }

    pub fn account(&self, id: AccountId) -> &str {
        &self.accounts[id.index()]
    }
    pub fn account_id(&self, address: &str) -> Option<AccountId> {
        self.accounts
            .binary_search_by(|a| a.as_str().cmp(address))
            .ok()
            .map(|i| AccountId(i as u32))
    }
    pub fn accounts(&self) -> impl Iterator<Item = (AccountId, &str)> {
        self.accounts
            .iter()
            .enumerate()
            .map(|(i, a)| (AccountId(i as u32), a.as_str()))
    }

    pub fn payer_of(&self, id: AccountId) -> Option<PayerId> {
        self.account_payer[id.index()]
    }
    pub fn payee_of(&self, id: AccountId) -> Option<PayeeId> {
        self.account_payee[id.index()]
    }
    pub fn payer_account(&self, u: PayerId) -> AccountId {
        self.payer_accounts[u.index()]
    }
    pub fn payee_account(&self, v: PayeeId) -> AccountId {
        self.payee_accounts[v.index()]
    }
    pub fn payer_address(&self, u: PayerId) -> &str {
        self.account(self.payer_account(u))
    }
    pub fn payee_address(&self, v: PayeeId) -> &str {
        self.account(self.payee_account(v))
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }
    /// Out-edges of a payer, ordered by payee address.
    pub fn out_edges(&self, u: PayerId) -> &[Edge] {
        &self.edges[self.out_start[u.index()]..self.out_start[u.index() + 1]]
    }
    /// In-edges of a payee, ordered by payer address.
    pub fn in_edges(&self, v: PayeeId) -> impl Iterator<Item = &Edge> {
        self.in_edge_ids(v).iter().map(|i| &self.edges[*i as usize])
    }
    pub(crate) fn in_edge_ids(&self, v: PayeeId) -> &[u32] {
        &self.in_edges[self.in_start[v.index()]..self.in_start[v.index() + 1]]
    }
    pub(crate) fn out_edge_range(&self, u: PayerId) -> core::ops::Range<usize> {
        self.out_start[u.index()]..self.out_start[u.index() + 1]
    }

    /// Total outgoing transactions of a payer.
    pub fn out_count(&self, u: PayerId) -> u64 {
        self.out_count[u.index()]
    }
    /// Total incoming transactions of a payee.
    pub fn in_count(&self, v: PayeeId) -> u64 {
        self.in_count[v.index()]
    }
    pub fn max_out(&self) -> u64 {
        self.max_out
    }
    pub fn max_in(&self) -> u64 {
        self.max_in
    }

    pub fn is_scored(&self) -> bool {
        self.scored
    }
    /// Maximum edge score.
    pub fn max_score(&self) -> f64 {
        self.max_score
    }
    /// Maximum absolute edge score; drives the contraction factor.
    pub fn max_abs_score(&self) -> f64 {
        self.max_abs_score
    }
    /// True when some `|score| = 1`, voiding the convergence-rate guarantee.
    pub fn is_saturated(&self) -> bool {
        self.saturated
    }

    /// Replaces every edge score (ablations, synthetic fixtures) and
    /// recomputes the score extrema. Scores are expected in `[-1, 1]`.
    pub fn replace_scores(&mut self, scores: &[f64]) -> Result<()> {
        if scores.len() != self.edges.len() {
            return Err(Error::GraphMismatch);
        }
        self.set_scores(scores.to_vec());
        Ok(())
    }

    fn set_scores(&mut self, scores: Vec<f64>) {
        let mut max_score = f64::NEG_INFINITY;
        let mut max_abs = 0.0f64;
        for (e, s) in self.edges.iter_mut().zip(&scores) {
            e.score = *s;
            max_score = max_score.max(*s);
            max_abs = max_abs.max(libm::fabs(*s));
        }
        self.max_score = max_score;
        self.max_abs_score = max_abs;
        self.saturated = max_abs >= 1.0;
        self.scored = true;
    }
}
