//! Synthetic transaction corpora: random bipartite networks for scalability
//! runs and planted risky-pattern fixtures for qualitative checks.
//!
//! Every generator is seed-deterministic and emits records valid under the
//! ingestion schema (lowercase `0x`-prefixed addresses, positive values).

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::ingest::{Category, LabelTable, TransactionRecord};
use crate::rng::{keyed_u64, SplitMix64};
use crate::{Error, Result};

/// Address spaces keep generated account pools disjoint.
const SPACE_RANDOM_PAYER: u64 = 1;
const SPACE_RANDOM_PAYEE: u64 = 2;
const SPACE_PLANT: u64 = 3;
const SPACE_HUB: u64 = 4;

fn synth_address(space: u64, sub: u64, index: u64) -> String {
    format!(
        "0x{:040x}",
        ((space as u128) << 112) | ((sub as u128) << 64) | index as u128
    )
}

fn record(tx_id: String, payer: String, payee: String, value: u128, seq: u64) -> TransactionRecord {
    TransactionRecord {
        tx_id,
        payer,
        payee,
        value,
        timestamp: Some(seq),
    }
}

/// A plantable risky-transaction motif.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Pattern {
    /// Many one-shot payers fund a single collector, which forwards to a
    /// few payees (drawn from the base corpus when available).
    PhishingStar { victims: usize, forwards: usize },
    /// Few-transaction feeder accounts fund the planted scammer.
    CollusionUpstream { feeders: usize },
    /// The planted scammer fans stolen funds out to fresh sink accounts.
    LaunderingDownstream { sinks: usize },
    /// A transfer chain whose middle accounts forward nearly everything
    /// they receive.
    ZeroOutMiddle { depth: usize },
    /// Withdraw-then-redeposit loops between one wallet and one exchange.
    RoundTransfer { round_trips: usize },
}

impl Pattern {
    pub fn kind(&self) -> &'static str {
        match self {
            Pattern::PhishingStar { .. } => "phishing-star",
            Pattern::CollusionUpstream { .. } => "collusion-upstream",
            Pattern::LaunderingDownstream { .. } => "laundering-downstream",
            Pattern::ZeroOutMiddle { .. } => "zero-out-middle",
            Pattern::RoundTransfer { .. } => "round-transfer",
        }
    }

    /// Parses `kind` or `kind:key=value,...`, e.g.
    /// `phishing-star:victims=50,forwards=3`. Omitted parameters take the
    /// defaults shown by [`Pattern::parse`]'s error-free round trips.
    pub fn parse(text: &str) -> Result<Pattern> {
        let (kind, params) = match text.split_once(':') {
            Some((k, p)) => (k.trim(), p),
            None => (text.trim(), ""),
        };
        let mut pattern = match kind {
            "phishing-star" => Pattern::PhishingStar {
                victims: 50,
                forwards: 3,
            },
            "collusion-upstream" => Pattern::CollusionUpstream { feeders: 20 },
            "laundering-downstream" => Pattern::LaunderingDownstream { sinks: 10 },
            "zero-out-middle" => Pattern::ZeroOutMiddle { depth: 3 },
            "round-transfer" => Pattern::RoundTransfer { round_trips: 5 },
            other => return Err(Error::UnknownPattern(other.to_string())),
        };
        for part in params.split(',').filter(|p| !p.trim().is_empty()) {
            let (key, value) = part
                .split_once('=')
                .ok_or_else(|| Error::InvalidConfig(format!("expected key=value, got `{part}`")))?;
            let value: usize = value.trim().parse().map_err(|_| {
                Error::InvalidConfig(format!("unparseable pattern parameter `{part}`"))
            })?;
            let key = key.trim();
            let slot = match (&mut pattern, key) {
                (Pattern::PhishingStar { victims, .. }, "victims") => victims,
                (Pattern::PhishingStar { forwards, .. }, "forwards") => forwards,
                (Pattern::CollusionUpstream { feeders }, "feeders") => feeders,
                (Pattern::LaunderingDownstream { sinks }, "sinks") => sinks,
                (Pattern::ZeroOutMiddle { depth }, "depth") => depth,
                (Pattern::RoundTransfer { round_trips }, "round-trips") => round_trips,
                _ => {
                    return Err(Error::InvalidConfig(format!(
                        "pattern `{kind}` has no parameter `{key}`"
                    )))
                }
            };
            *slot = value;
        }
        pattern.validate()?;
        Ok(pattern)
    }

    fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidConfig(msg.to_string()));
        match self {
            Pattern::PhishingStar { victims, forwards } if *victims == 0 || *forwards == 0 => {
                bad("phishing-star needs victims >= 1 and forwards >= 1")
            }
            Pattern::CollusionUpstream { feeders } if *feeders == 0 => {
                bad("collusion-upstream needs feeders >= 1")
            }
            Pattern::LaunderingDownstream { sinks } if *sinks == 0 => {
                bad("laundering-downstream needs sinks >= 1")
            }
            Pattern::ZeroOutMiddle { depth } if *depth < 2 => {
                bad("zero-out-middle needs depth >= 2 to have a middle account")
            }
            Pattern::RoundTransfer { round_trips } if *round_trips == 0 => {
                bad("round-transfer needs round-trips >= 1")
            }
            _ => Ok(()),
        }
    }
}

/// Specification of a synthetic corpus.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SynthSpec {
    pub payers: usize,
    pub payees: usize,
    pub transactions: usize,
    pub seed: u64,
    pub plants: Vec<Pattern>,
}

/// Uniform random bipartite records; no labels.
pub fn random_network(spec: &SynthSpec) -> Result<(Vec<TransactionRecord>, LabelTable)> {
    if spec.payers == 0 || spec.payees == 0 || spec.transactions == 0 {
        return Err(Error::InvalidConfig(
            "random network needs payers, payees, and transactions >= 1".to_string(),
        ));
    }
    let mut rng = SplitMix64::new(spec.seed);
    let mut records = Vec::with_capacity(spec.transactions);
    for i in 0..spec.transactions {
        let payer = rng.next_below(spec.payers as u64);
        let payee = rng.next_below(spec.payees as u64);
        let value = rng.next_in(1, 1000) as u128;
        records.push(record(
            format!("r{i}"),
            synth_address(SPACE_RANDOM_PAYER, 0, payer),
            synth_address(SPACE_RANDOM_PAYEE, 0, payee),
            value,
            i as u64,
        ));
    }
    Ok((records, LabelTable::new()))
}

/// Appends one motif to `base`, returning the combined records and a label
/// table marking the planted core accounts as illicit. `plant_index` keeps
/// the address pools of multiple plants disjoint.
pub fn plant_pattern(
    base: &[TransactionRecord],
    pattern: &Pattern,
    seed: u64,
    plant_index: u64,
) -> Result<(Vec<TransactionRecord>, LabelTable)> {
    pattern.validate()?;
    let mut rng = SplitMix64::new(keyed_u64(seed, plant_index));
    let addr = |role: u64, i: u64| synth_address(SPACE_PLANT, plant_index * 8 + role, i);
    let mut records = base.to_vec();
    let mut labels = LabelTable::new();
    let mut seq = base.len() as u64;
    let mut tx = 0u64;
    let mut push = |records: &mut Vec<TransactionRecord>, payer: String, payee: String, value: u128| {
        records.push(record(format!("p{plant_index}-{tx}"), payer, payee, value, seq));
        seq += 1;
        tx += 1;
    };

    match *pattern {
        Pattern::PhishingStar { victims, forwards } => {
            let core = addr(0, 0);
            for i in 0..victims {
                let value = rng.next_in(1, 1000) as u128;
                push(&mut records, addr(1, i as u64), core.clone(), value);
            }
            // Forward the take into existing payees where possible, so the
            // collector's outgoing scores face externally anchored
            // trustiness; top up with fresh accomplices.
            let mut pool: Vec<&str> = base.iter().map(|r| r.payee.as_str()).collect();
            pool.sort_unstable();
            pool.dedup();
            for i in 0..forwards {
                let target = if pool.is_empty() {
                    addr(2, i as u64)
                } else {
                    let pick = rng.next_below(pool.len() as u64) as usize;
                    pool.swap_remove(pick).to_string()
                };
                let value = rng.next_in(1, 1000) as u128;
                push(&mut records, core.clone(), target, value);
            }
            labels.insert(core, Category::PhishHack);
        }
        Pattern::CollusionUpstream { feeders } => {
            let core = addr(0, 0);
            for i in 0..feeders {
                let value = rng.next_in(1, 1000) as u128;
                push(&mut records, addr(2, i as u64), core.clone(), value);
            }
            labels.insert(core, Category::PhishHack);
        }
        Pattern::LaunderingDownstream { sinks } => {
            let core = addr(0, 0);
            for i in 0..sinks {
                let value = rng.next_in(1, 1000) as u128;
                push(&mut records, core.clone(), addr(2, i as u64), value);
            }
            labels.insert(core, Category::PhishHack);
        }
        Pattern::ZeroOutMiddle { depth } => {
            // Chain c0 -> c1 -> ... -> c_depth; each middle forwards its
            // inflow minus a residue.
            let mut value = 1_000_000u128;
            for i in 0..depth {
                push(&mut records, addr(3, i as u64), addr(3, i as u64 + 1), value);
                value -= 1;
            }
            for i in 1..depth {
                labels.insert(addr(3, i as u64), Category::PhishHack);
            }
        }
        Pattern::RoundTransfer { round_trips } => {
            let exchange = addr(5, 0);
            let wallet = addr(4, 0);
            for _ in 0..round_trips {
                let value = rng.next_in(1, 1000) as u128;
                push(&mut records, exchange.clone(), wallet.clone(), value);
                push(&mut records, wallet.clone(), exchange.clone(), value);
            }
            labels.insert(wallet, Category::PhishHack);
        }
    }
    Ok((records, labels))
}

/// A busy exchange-like hub: `clients` accounts that each deposit and
/// withdraw several times. The hub is labeled `exchange`; it is the licit
/// counterweight for the planted-pattern fixtures.
pub fn exchange_hub(
    clients: usize,
    deposits_per_client: u64,
    withdrawals_per_client: u64,
    seed: u64,
    hub_index: u64,
) -> Result<(Vec<TransactionRecord>, LabelTable)> {
    if clients == 0 || deposits_per_client == 0 || withdrawals_per_client == 0 {
        return Err(Error::InvalidConfig(
            "exchange hub needs clients, deposits, and withdrawals >= 1".to_string(),
        ));
    }
    let mut rng = SplitMix64::new(keyed_u64(seed, 0x4000 + hub_index));
    let hub = synth_address(SPACE_HUB, hub_index * 8, 0);
    let mut records = Vec::new();
    let mut seq = 0u64;
    for i in 0..clients {
        let client = synth_address(SPACE_HUB, hub_index * 8 + 1, i as u64);
        for _ in 0..deposits_per_client {
            let value = rng.next_in(1, 1000) as u128;
            records.push(record(format!("h{hub_index}-{seq}"), client.clone(), hub.clone(), value, seq));
            seq += 1;
        }
        for _ in 0..withdrawals_per_client {
            let value = rng.next_in(1, 1000) as u128;
            records.push(record(format!("h{hub_index}-{seq}"), hub.clone(), client.clone(), value, seq));
            seq += 1;
        }
    }
    let mut labels = LabelTable::new();
    labels.insert(hub, Category::Exchange);
    Ok((records, labels))
}

/// Materializes a [`SynthSpec`]: the random base plus each plant in
/// order, with labels merged.
pub fn generate(spec: &SynthSpec) -> Result<(Vec<TransactionRecord>, LabelTable)> {
    let (mut records, mut labels) = random_network(spec)?;
    for (i, pattern) in spec.plants.iter().enumerate() {
        let (combined, plant_labels) = plant_pattern(&records, pattern, spec.seed, i as u64)?;
        records = combined;
        labels.merge(&plant_labels);
    }
    Ok((records, labels))
}
