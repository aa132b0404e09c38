//! Transaction and label ingestion.
//!
//! Parses delimiter-separated text into [`TransactionRecord`]s and a
//! [`LabelTable`], then applies the two preprocessing filters the rating
//! pipeline expects: dropping zero-value transfers and keeping only the
//! largest weakly connected component of the account graph.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::{Error, Result};

/// One raw payer-to-payee transfer. Addresses are normalized to lowercase;
/// `value` is in the smallest currency unit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransactionRecord {
    pub tx_id: String,
    pub payer: String,
    pub payee: String,
    pub value: u128,
    pub timestamp: Option<u64>,
}

/// Account category from the label source. `PhishHack` is the only category
/// treated as illicit ground truth; everything else counts as licit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Category {
    IcoWallet,
    Converter,
    Mining,
    Exchange,
    Gambling,
    PhishHack,
    LicitOther,
}

impl Category {
    pub const ALL: [Category; 7] = [
        Category::IcoWallet,
        Category::Converter,
        Category::Mining,
        Category::Exchange,
        Category::Gambling,
        Category::PhishHack,
        Category::LicitOther,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Category::IcoWallet => "ico-wallet",
            Category::Converter => "converter",
            Category::Mining => "mining",
            Category::Exchange => "exchange",
            Category::Gambling => "gambling",
            Category::PhishHack => "phish-hack",
            Category::LicitOther => "licit-other",
        }
    }

    pub fn parse(s: &str) -> Option<Category> {
        Category::ALL.iter().copied().find(|c| c.as_str() == s)
    }

    /// Dense index, used for category-keyed lookup tables.
    pub fn index(self) -> usize {
        match self {
            Category::IcoWallet => 0,
            Category::Converter => 1,
            Category::Mining => 2,
            Category::Exchange => 3,
            Category::Gambling => 4,
            Category::PhishHack => 5,
            Category::LicitOther => 6,
        }
    }

    pub fn is_illicit(self) -> bool {
        self == Category::PhishHack
    }
}

/// Address-to-category map; the ground truth for semi-supervised
/// initialization and for evaluation.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LabelTable {
    entries: BTreeMap<String, Category>,
}

impl LabelTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// Inserts a label, returning the previous category if the address was
    /// already present.
    pub fn insert(&mut self, address: String, category: Category) -> Option<Category> {
        self.entries.insert(address, category)
    }

    pub fn get(&self, address: &str) -> Option<Category> {
        self.entries.get(address).copied()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Iterates in address order.
    pub fn iter(&self) -> impl Iterator<Item = (&str, Category)> {
        self.entries.iter().map(|(a, c)| (a.as_str(), *c))
    }

    /// Merges another table into this one (other wins on conflicts).
    pub fn merge(&mut self, other: &LabelTable) {
        for (a, c) in other.iter() {
            self.entries.insert(a.to_string(), c);
        }
    }
}

/// Maps header names onto the roles the parser needs. Defaults match the
/// `tx,from,to,value[,timestamp]` file layout.
#[derive(Debug, Clone)]
pub struct ColumnMap {
    pub tx_id: String,
    pub payer: String,
    pub payee: String,
    pub value: String,
    pub timestamp: String,
}

impl Default for ColumnMap {
    fn default() -> Self {
        Self {
            tx_id: "tx".to_string(),
            payer: "from".to_string(),
            payee: "to".to_string(),
            value: "value".to_string(),
            timestamp: "timestamp".to_string(),
        }
    }
}

/// A skipped row together with its 1-based line number in the source.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RowError {
    pub line: usize,
    pub message: String,
}

/// Parser output: clean records plus the rows that had to be skipped.
#[derive(Debug, Clone, Default)]
pub struct ParsedTransactions {
    pub records: Vec<TransactionRecord>,
    pub errors: Vec<RowError>,
}

/// Label parser output with non-fatal duplicate warnings.
#[derive(Debug, Clone, Default)]
pub struct ParsedLabels {
    pub table: LabelTable,
    pub warnings: Vec<String>,
}

fn normalize_address(raw: &str) -> String {
    raw.trim().to_ascii_lowercase()
}

fn skippable(line: &str) -> bool {
    let t = line.trim();
    t.is_empty() || t.starts_with('#')
}

/// Parses comma-separated transaction text with a header row. Blank lines
/// and `#` comment lines are ignored.
///
/// Rows with an unparseable value, a bad field count, or an empty endpoint
/// are skipped and reported with their line number; a missing required
/// column is fatal.
pub fn parse_transactions(source: &str, columns: &ColumnMap) -> Result<ParsedTransactions> {
    let mut lines = source.lines().enumerate();
    let header = loop {
        match lines.next() {
            Some((_, l)) if skippable(l) => continue,
            Some((_, l)) => break l,
            None => return Err(Error::MissingColumn(columns.tx_id.clone())),
        }
    };
    let names: Vec<&str> = header.split(',').map(str::trim).collect();
    let col = |name: &str| -> Result<usize> {
        names
            .iter()
            .position(|n| *n == name)
            .ok_or_else(|| Error::MissingColumn(name.to_string()))
    };
    let tx_col = col(&columns.tx_id)?;
    let payer_col = col(&columns.payer)?;
    let payee_col = col(&columns.payee)?;
    let value_col = col(&columns.value)?;
    let ts_col = names.iter().position(|n| *n == columns.timestamp);

    let mut out = ParsedTransactions::default();
    for (idx, line) in lines {
        if skippable(line) {
            continue;
        }
        let lineno = idx + 1;
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != names.len() {
            out.errors.push(RowError {
                line: lineno,
                message: format!("expected {} fields, found {}", names.len(), fields.len()),
            });
            continue;
        }
        let payer = normalize_address(fields[payer_col]);
        let payee = normalize_address(fields[payee_col]);
        if payer.is_empty() || payee.is_empty() {
            out.errors.push(RowError {
                line: lineno,
                message: "empty payer or payee address".to_string(),
            });
            continue;
        }
        let value = match fields[value_col].parse::<u128>() {
            Ok(v) => v,
            Err(_) => {
                out.errors.push(RowError {
                    line: lineno,
                    message: format!("unparseable value `{}`", fields[value_col]),
                });
                continue;
            }
        };
        let timestamp = match ts_col {
            Some(c) if !fields[c].is_empty() => match fields[c].parse::<u64>() {
                Ok(t) => Some(t),
                Err(_) => {
                    out.errors.push(RowError {
                        line: lineno,
                        message: format!("unparseable timestamp `{}`", fields[c]),
                    });
                    continue;
                }
            },
            _ => None,
        };
        out.records.push(TransactionRecord {
            tx_id: fields[tx_col].to_string(),
            payer,
            payee,
            value,
            timestamp,
        });
    }
    Ok(out)
}

/// Parses two-column `address,category` label text.
///
/// Duplicate addresses resolve last-write-wins with a warning; an unknown
/// category is fatal and names the offending line.
pub fn parse_labels(source: &str) -> Result<ParsedLabels> {
    let mut out = ParsedLabels::default();
    let mut seen_data = false;
    for (idx, line) in source.lines().enumerate() {
        let lineno = idx + 1;
        let trimmed = line.trim();
        if skippable(trimmed) {
            continue;
        }
        if !seen_data && trimmed.starts_with("address") {
            seen_data = true;
            continue;
        }
        seen_data = true;
        let (addr_raw, cat_raw) = trimmed.split_once(',').ok_or_else(|| Error::UnknownCategory {
            line: lineno,
            name: trimmed.to_string(),
        })?;
        let category = Category::parse(cat_raw.trim()).ok_or_else(|| Error::UnknownCategory {
            line: lineno,
            name: cat_raw.trim().to_string(),
        })?;
        let address = normalize_address(addr_raw);
        if let Some(prev) = out.table.insert(address.clone(), category) {
            out.warnings.push(format!(
                "line {lineno}: duplicate label for {address} (was {}, now {})",
                prev.as_str(),
                category.as_str()
            ));
        }
    }
    Ok(out)
}

/// Keeps exactly the records with `value > 0`, preserving order.
pub fn filter_zero_value(records: Vec<TransactionRecord>) -> Vec<TransactionRecord> {
    records.into_iter().filter(|r| r.value > 0).collect()
}

/// Disjoint-set forest with union by size and path halving.
struct UnionFind {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
            size: alloc::vec![1; n],
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let mut ra = self.find(a);
        let mut rb = self.find(b);
        if ra == rb {
            return;
        }
        if self.size[ra] < self.size[rb] {
            core::mem::swap(&mut ra, &mut rb);
        }
        self.size[ra] += self.size[rb];
        self.parent[rb] = ra;
    }
}

/// Keeps the records whose endpoints lie in the largest weakly connected
/// component of the undirected account graph. Ties between equal-size
/// components go to the one containing the smallest address.
pub fn extract_largest_wcc(records: Vec<TransactionRecord>) -> Vec<TransactionRecord> {
    if records.is_empty() {
        return records;
    }
    // Intern addresses in sorted order so smaller index == smaller address.
    let mut addrs: Vec<String> = records
        .iter()
        .flat_map(|r| [r.payer.clone(), r.payee.clone()])
        .collect();
    addrs.sort_unstable();
    addrs.dedup();
    let id_of = |a: &str| {
        addrs
            .binary_search_by(|x| x.as_str().cmp(a))
            .expect("interned address")
    };

    let mut dsu = UnionFind::new(addrs.len());
    for r in &records {
        dsu.union(id_of(&r.payer), id_of(&r.payee));
    }

    // Winner: largest component, smallest minimum member on ties. Scanning
    // ids in ascending order visits each component first at its minimum
    // member, so strict `>` does both jobs.
    let mut seen = alloc::vec![false; addrs.len()];
    let mut best_root = usize::MAX;
    let mut best_size = 0;
    for id in 0..addrs.len() {
        let root = dsu.find(id);
        if !seen[root] {
            seen[root] = true;
            if dsu.size[root] > best_size {
                best_size = dsu.size[root];
                best_root = root;
            }
        }
    }

    records
        .into_iter()
        .filter(|r| dsu.find(id_of(&r.payer)) == best_root)
        .collect()
}
