//! Conversion of converged reliability into 0-10 risk ratings.
//!
//! Risk is `(1 - reliability) * 10`: 0 is safe, 10 is maximally risky. An
//! account's risk comes from its payer role; accounts that never sent a
//! transaction have no reliability of their own and receive the default
//! rating derived from the initial reliability.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::graph::PayerPayeeGraph;
use crate::propagation::{PropagationConfig, PropagationState};

/// Predicted class at a risk threshold.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Prediction {
    Illicit,
    Licit,
}

impl Prediction {
    pub fn as_str(self) -> &'static str {
        match self {
            Prediction::Illicit => "illicit",
            Prediction::Licit => "licit",
        }
    }

    pub fn is_illicit(self) -> bool {
        self == Prediction::Illicit
    }
}

/// One account's rating row.
#[derive(Debug, Clone, PartialEq)]
pub struct AccountReport {
    pub address: String,
    pub reliability: f64,
    /// Present only when the account has a payee role.
    pub trustiness: Option<f64>,
    pub risk: f64,
    /// True when the account has no outgoing transactions and therefore
    /// carries the default rating.
    pub is_default: bool,
    pub predicted: Prediction,
}

/// All account ratings, ordered by risk descending with ties broken by
/// address ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct RiskReport {
    pub entries: Vec<AccountReport>,
}

/// Builds the per-account report from a converged state.
///
/// Every account in either role gets exactly one row; predictions start out
/// all-licit until a classifier runs.
pub fn risk_of(
    state: &PropagationState,
    graph: &PayerPayeeGraph,
    config: &PropagationConfig,
) -> RiskReport {
    let mut entries: Vec<AccountReport> = graph
        .accounts()
        .map(|(id, address)| {
            let payer = graph.payer_of(id);
            let reliability = match payer {
                Some(u) => state.reliability_of(u),
                None => config.init_reliability,
            };
            AccountReport {
                address: address.to_string(),
                reliability,
                trustiness: graph.payee_of(id).map(|v| state.trustiness_of(v)),
                risk: (1.0 - reliability) * 10.0,
                is_default: payer.is_none(),
                predicted: Prediction::Licit,
            }
        })
        .collect();
    entries.sort_by(|a, b| {
        b.risk
            .partial_cmp(&a.risk)
            .expect("finite risk")
            .then_with(|| a.address.cmp(&b.address))
    });
    RiskReport { entries }
}

impl RiskReport {
    /// Marks every account with `risk >= rth` as illicit (inclusive
    /// boundary).
    pub fn classify(&mut self, rth: f64) {
        for e in &mut self.entries {
            e.predicted = if e.risk >= rth {
                Prediction::Illicit
            } else {
                Prediction::Licit
            };
        }
    }

    /// Alternative classifier: the top `percent`% of accounts by risk are
    /// illicit. `ceil` rounding, so any positive percentage flags at least
    /// one account.
    pub fn classify_top_percent(&mut self, percent: f64) {
        let n = self.entries.len();
        let k = libm::ceil(n as f64 * percent / 100.0).clamp(0.0, n as f64) as usize;
        for (i, e) in self.entries.iter_mut().enumerate() {
            e.predicted = if i < k {
                Prediction::Illicit
            } else {
                Prediction::Licit
            };
        }
    }

    /// The `min(k, n)` riskiest accounts.
    pub fn top_k(&self, k: usize) -> &[AccountReport] {
        &self.entries[..k.min(self.entries.len())]
    }

    /// Addresses in rank order (risk descending).
    pub fn ranking(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|e| e.address.as_str())
    }

    pub fn find(&self, address: &str) -> Option<&AccountReport> {
        self.entries.iter().find(|e| e.address == address)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exec::Serial;
    use crate::graph::{build_graph, score_all_edges};
    use crate::ingest::TransactionRecord;
    use crate::propagation::{initialize, PropagationConfig};
    use alloc::vec;

    fn txn(payer: &str, payee: &str) -> TransactionRecord {
        TransactionRecord {
            tx_id: String::new(),
            payer: payer.to_string(),
            payee: payee.to_string(),
            value: 1,
            timestamp: None,
        }
    }

    fn report_from(reliabilities: &[(&str, f64)]) -> RiskReport {
        let entries = reliabilities
            .iter()
            .map(|(a, r)| AccountReport {
                address: a.to_string(),
                reliability: *r,
                trustiness: None,
                risk: (1.0 - r) * 10.0,
                is_default: false,
                predicted: Prediction::Licit,
            })
            .collect();
        let mut report = RiskReport { entries };
        report.entries.sort_by(|a, b| {
            b.risk
                .partial_cmp(&a.risk)
                .unwrap()
                .then_with(|| a.address.cmp(&b.address))
        });
        report
    }

    #[test]
    fn risk_is_linear_in_reliability() {
        let report = report_from(&[("x", 0.1195), ("y", 1.0)]);
        assert!((report.find("x").unwrap().risk - 8.805).abs() < 1e-12);
        assert_eq!(report.find("y").unwrap().risk, 0.0);
    }

    #[test]
    fn payee_only_account_gets_default_risk() {
        let mut g = build_graph(&[txn("a", "b")]).unwrap();
        score_all_edges(&mut g, &Serial);
        let config = PropagationConfig::default();
        let state = initialize(&g, &config, None, None).unwrap();
        let report = risk_of(&state, &g, &config);
        assert_eq!(report.entries.len(), 2);
        let b = report.find("b").unwrap();
        assert!(b.is_default);
        assert!((b.risk - 3.0).abs() < 1e-12);
        assert_eq!(b.reliability, config.init_reliability);
        assert!(b.trustiness.is_some());
        let a = report.find("a").unwrap();
        assert!(!a.is_default);
        assert!(a.trustiness.is_none());
    }

    #[test]
    fn report_covers_every_account_once() {
        let records = vec![txn("a", "b"), txn("b", "c"), txn("a", "c")];
        let mut g = build_graph(&records).unwrap();
        score_all_edges(&mut g, &Serial);
        let config = PropagationConfig::default();
        let state = initialize(&g, &config, None, None).unwrap();
        let report = risk_of(&state, &g, &config);
        assert_eq!(report.entries.len(), g.n_accounts());
        let mut addresses: Vec<_> = report.entries.iter().map(|e| e.address.clone()).collect();
        addresses.sort();
        addresses.dedup();
        assert_eq!(addresses.len(), g.n_accounts());
    }

    #[test]
    fn classify_uses_inclusive_threshold() {
        let mut report = report_from(&[("a", 0.1195), ("b", 0.9526), ("c", 0.4)]);
        report.classify(6.0);
        assert_eq!(report.find("a").unwrap().predicted, Prediction::Illicit); // 8.805
        assert_eq!(report.find("b").unwrap().predicted, Prediction::Licit); // 0.474
        assert_eq!(report.find("c").unwrap().predicted, Prediction::Illicit); // exactly 6.0
    }

    #[test]
    fn top_k_breaks_ties_by_address() {
        let report = report_from(&[("a", 0.1), ("b", 0.5), ("c", 0.1)]);
        let top: Vec<_> = report.top_k(2).iter().map(|e| e.address.as_str()).collect();
        assert_eq!(top, vec!["a", "c"]);
        assert_eq!(report.top_k(10).len(), 3);

        let unique_max = report_from(&[("a", 0.5), ("b", 0.1), ("c", 0.9)]);
        assert_eq!(unique_max.top_k(1)[0].address, "b");
    }

    #[test]
    fn top_percent_classifier_flags_ceil() {
        let mut report = report_from(&[("a", 0.1), ("b", 0.2), ("c", 0.3), ("d", 0.4)]);
        report.classify_top_percent(26.0); // ceil(4 * 0.26) = 2
        let illicit: Vec<_> = report
            .entries
            .iter()
            .filter(|e| e.predicted.is_illicit())
            .map(|e| e.address.as_str())
            .collect();
        assert_eq!(illicit, vec!["a", "b"]);
        report.classify_top_percent(0.0);
        assert!(report.entries.iter().all(|e| !e.predicted.is_illicit()));
    }

    #[test]
    fn ranking_by_risk_matches_reliability_ascending() {
        let report = report_from(&[("a", 0.9), ("b", 0.2), ("c", 0.5)]);
        let by_risk: Vec<_> = report.ranking().collect();
        assert_eq!(by_risk, vec!["b", "c", "a"]);
        let mut by_rel: Vec<_> = report.entries.iter().collect();
        by_rel.sort_by(|x, y| x.reliability.partial_cmp(&y.reliability).unwrap());
        let by_rel: Vec<_> = by_rel.iter().map(|e| e.address.as_str()).collect();
        assert_eq!(by_risk, by_rel);
    }

    #[test]
    fn classify_is_monotone_in_threshold() {
        let mut report = report_from(&[("a", 0.05), ("b", 0.35), ("c", 0.65), ("d", 0.95)]);
        let mut prev = usize::MAX;
        for rth10 in 0..=100 {
            report.classify(rth10 as f64 / 10.0);
            let count = report.entries.iter().filter(|e| e.predicted.is_illicit()).count();
            assert!(count <= prev, "raising rth never adds illicit predictions");
            prev = count;
        }
    }
}
