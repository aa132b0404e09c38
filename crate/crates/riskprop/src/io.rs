//! File formats.
//!
//! Every output file starts with `# key=value` lines echoing the effective
//! configuration, so a run is reproducible from the file alone; readers skip
//! `#` lines. Report floats are printed at 6 decimals, state checkpoints and
//! graph dumps at 17 significant digits (round-trip exact).

use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use anyhow::{bail, Context, Result};
use riskprop_core::eval::{AnovaResult, CurvePoint};
use riskprop_core::graph::PayerPayeeGraph;
use riskprop_core::ingest::{
    parse_labels, parse_transactions, ColumnMap, LabelTable, ParsedLabels, ParsedTransactions,
    TransactionRecord,
};
use riskprop_core::propagation::{PropagationRun, PropagationState};
use riskprop_core::rating::{AccountReport, Prediction, RiskReport};

use crate::bench::BenchRow;

/// The `# key=value` header identifying a run.
#[derive(Debug, Clone, Default)]
pub struct Echo {
    entries: Vec<(String, String)>,
}

impl Echo {
    pub fn new(subcommand: &str) -> Self {
        Self {
            entries: vec![("subcommand".into(), subcommand.into())],
        }
    }

    pub fn push(&mut self, key: &str, value: impl std::fmt::Display) -> &mut Self {
        self.entries.push((key.into(), value.to_string()));
        self
    }

    fn write_to(&self, w: &mut impl Write) -> std::io::Result<()> {
        for (k, v) in &self.entries {
            writeln!(w, "# {k}={v}")?;
        }
        Ok(())
    }
}

fn create(path: &Path) -> Result<BufWriter<fs::File>> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)
                .with_context(|| format!("creating directory {}", parent.display()))?;
        }
    }
    Ok(BufWriter::new(fs::File::create(path).with_context(
        || format!("creating {}", path.display()),
    )?))
}

pub fn read_transactions(path: &Path, columns: &ColumnMap) -> Result<ParsedTransactions> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(parse_transactions(&text, columns)?)
}

pub fn read_labels(path: &Path) -> Result<ParsedLabels> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(parse_labels(&text)?)
}

pub fn write_transactions(
    path: &Path,
    records: &[TransactionRecord],
    echo: &Echo,
) -> Result<()> {
    let mut w = create(path)?;
    echo.write_to(&mut w)?;
    writeln!(w, "tx,from,to,value,timestamp")?;
    for r in records {
        let ts = r.timestamp.map(|t| t.to_string()).unwrap_or_default();
        writeln!(w, "{},{},{},{},{}", r.tx_id, r.payer, r.payee, r.value, ts)?;
    }
    Ok(w.flush()?)
}

pub fn write_labels(path: &Path, labels: &LabelTable, echo: &Echo) -> Result<()> {
    let mut w = create(path)?;
    echo.write_to(&mut w)?;
    writeln!(w, "address,category")?;
    for (address, category) in labels.iter() {
        writeln!(w, "{address},{}", category.as_str())?;
    }
    Ok(w.flush()?)
}

/// Report rows: `address,reliability,trustiness,risk,is_default,predicted`,
/// risk-descending, floats at 6 decimals, trustiness blank for accounts
/// that were never a payee.
pub fn write_report(path: &Path, report: &RiskReport, echo: &Echo) -> Result<()> {
    let mut w = create(path)?;
    echo.write_to(&mut w)?;
    writeln!(w, "address,reliability,trustiness,risk,is_default,predicted")?;
    for e in &report.entries {
        let trustiness = e
            .trustiness
            .map(|t| format!("{t:.6}"))
            .unwrap_or_default();
        writeln!(
            w,
            "{},{:.6},{},{:.6},{},{}",
            e.address,
            e.reliability,
            trustiness,
            e.risk,
            e.is_default,
            e.predicted.as_str()
        )?;
    }
    Ok(w.flush()?)
}

pub fn read_report(path: &Path) -> Result<RiskReport> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut entries = Vec::new();
    let mut saw_header = false;
    for (idx, line) in text.lines().enumerate() {
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        if !saw_header {
            if !t.starts_with("address,") {
                bail!("line {}: expected report header, got `{t}`", idx + 1);
            }
            saw_header = true;
            continue;
        }
        let fields: Vec<&str> = t.split(',').collect();
        if fields.len() != 6 {
            bail!("line {}: expected 6 report fields", idx + 1);
        }
        let parse = |s: &str| -> Result<f64> {
            let v: f64 = s
                .parse()
                .with_context(|| format!("line {}: bad float `{s}`", idx + 1))?;
            if !v.is_finite() {
                bail!("line {}: non-finite value `{s}`", idx + 1);
            }
            Ok(v)
        };
        entries.push(AccountReport {
            address: fields[0].to_string(),
            reliability: parse(fields[1])?,
            trustiness: if fields[2].is_empty() {
                None
            } else {
                Some(parse(fields[2])?)
            },
            risk: parse(fields[3])?,
            is_default: fields[4] == "true",
            predicted: match fields[5] {
                "illicit" => Prediction::Illicit,
                "licit" => Prediction::Licit,
                other => bail!("line {}: unknown prediction `{other}`", idx + 1),
            },
        });
    }
    if !saw_header {
        bail!("{}: no report header found", path.display());
    }
    Ok(RiskReport { entries })
}

/// Per-iteration change sums: `t,delta_T,delta_R,delta_C,delta`.
pub fn write_trace(path: &Path, run: &PropagationRun, echo: &Echo) -> Result<()> {
    let mut w = create(path)?;
    echo.write_to(&mut w)?;
    writeln!(w, "# contraction_factor={:.6}", run.contraction_factor)?;
    writeln!(w, "# clamp_events={}", run.clamp_events)?;
    writeln!(w, "# termination={}", termination_name(run))?;
    writeln!(w, "t,delta_T,delta_R,delta_C,delta")?;
    for (i, d) in run.trace.iter().enumerate() {
        writeln!(
            w,
            "{},{:.12e},{:.12e},{:.12e},{:.12e}",
            i + 1,
            d.trustiness,
            d.reliability,
            d.confidence,
            d.max
        )?;
    }
    Ok(w.flush()?)
}

pub fn termination_name(run: &PropagationRun) -> &'static str {
    match run.termination {
        riskprop_core::propagation::Termination::Converged => "converged",
        riskprop_core::propagation::Termination::MaxIterations => "max-iterations",
    }
}

/// State checkpoint: `kind,key,value` with payer/payee/edge rows.
pub fn write_checkpoint(
    path: &Path,
    graph: &PayerPayeeGraph,
    state: &PropagationState,
    echo: &Echo,
) -> Result<()> {
    let mut w = create(path)?;
    echo.write_to(&mut w)?;
    writeln!(w, "kind,key,value")?;
    for (u, value) in state.reliability.iter().enumerate() {
        let address = graph.payer_address(riskprop_core::graph::PayerId(u as u32));
        writeln!(w, "payer,{address},{value:.16e}")?;
    }
    for (v, value) in state.trustiness.iter().enumerate() {
        let address = graph.payee_address(riskprop_core::graph::PayeeId(v as u32));
        writeln!(w, "payee,{address},{value:.16e}")?;
    }
    for (e, value) in graph.edges().iter().zip(&state.confidence) {
        writeln!(
            w,
            "edge,{}:{},{value:.16e}",
            graph.payer_address(e.payer),
            graph.payee_address(e.payee)
        )?;
    }
    Ok(w.flush()?)
}

/// Edge list dump: `payer,payee,multiplicity,score` with scores at 17
/// significant digits.
pub fn write_graph_dump(path: &Path, graph: &PayerPayeeGraph, echo: &Echo) -> Result<()> {
    let mut w = create(path)?;
    echo.write_to(&mut w)?;
    writeln!(w, "payer,payee,multiplicity,score")?;
    for e in graph.edges() {
        writeln!(
            w,
            "{},{},{},{:.16e}",
            graph.payer_address(e.payer),
            graph.payee_address(e.payee),
            e.multiplicity,
            e.score
        )?;
    }
    Ok(w.flush()?)
}

/// Machine-readable metric rows. With one value per metric the format is
/// `metric,value`; with several (multi-seed runs) it is
/// `metric,mean,stddev`.
pub fn write_metrics(path: &Path, rows: &[(String, Vec<f64>)], echo: &Echo) -> Result<()> {
    let mut w = create(path)?;
    echo.write_to(&mut w)?;
    let aggregated = rows.iter().any(|(_, values)| values.len() > 1);
    if aggregated {
        writeln!(w, "metric,mean,stddev")?;
    } else {
        writeln!(w, "metric,value")?;
    }
    for (name, values) in rows {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        if aggregated {
            let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
            writeln!(w, "{name},{mean:.6},{:.6}", var.sqrt())?;
        } else {
            writeln!(w, "{name},{mean:.6}")?;
        }
    }
    Ok(w.flush()?)
}

/// Ranking-quality curves: `k,precision,recall`.
pub fn write_curves(path: &Path, points: &[CurvePoint], echo: &Echo) -> Result<()> {
    let mut w = create(path)?;
    echo.write_to(&mut w)?;
    writeln!(w, "k,precision,recall")?;
    for p in points {
        writeln!(w, "{},{:.6},{:.6}", p.k, p.precision, p.recall)?;
    }
    Ok(w.flush()?)
}

/// Variance-analysis rows, one per score source.
pub fn write_anova(path: &Path, rows: &[(String, AnovaResult)], echo: &Echo) -> Result<()> {
    let mut w = create(path)?;
    echo.write_to(&mut w)?;
    writeln!(
        w,
        "scores,ms_between,ms_within,f,p,df_between,df_within"
    )?;
    for (name, r) in rows {
        writeln!(
            w,
            "{name},{:.6e},{:.6e},{:.6e},{:.6e},{},{}",
            r.ms_between, r.ms_within, r.f_statistic, r.p_value, r.df_between, r.df_within
        )?;
    }
    Ok(w.flush()?)
}

/// Threshold-sweep rows: the scalar metrics at each risk threshold.
pub fn write_sweep(
    path: &Path,
    rows: &[(f64, riskprop_core::eval::ScalarMetrics)],
    echo: &Echo,
) -> Result<()> {
    let mut w = create(path)?;
    echo.write_to(&mut w)?;
    writeln!(
        w,
        "rth,illicit_precision,illicit_recall,illicit_f1,licit_precision,licit_recall,licit_f1,accuracy"
    )?;
    for (rth, m) in rows {
        writeln!(
            w,
            "{rth},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6}",
            m.illicit.precision,
            m.illicit.recall,
            m.illicit.f1,
            m.licit.precision,
            m.licit.recall,
            m.licit.f1,
            m.accuracy
        )?;
    }
    Ok(w.flush()?)
}

/// Benchmark rows: `edges,nodes,iterations,build_ms,propagate_ms,total_ms`.
pub fn write_bench(path: &Path, rows: &[BenchRow], echo: &Echo) -> Result<()> {
    let mut w = create(path)?;
    echo.write_to(&mut w)?;
    writeln!(w, "edges,nodes,iterations,build_ms,propagate_ms,total_ms")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{:.3},{:.3},{:.3}",
            r.edges, r.nodes, r.iterations, r.build_ms, r.propagate_ms, r.total_ms
        )?;
    }
    Ok(w.flush()?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use riskprop_core::rating::{AccountReport, Prediction};

    #[test]
    fn report_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("report.csv");
        let report = RiskReport {
            entries: vec![
                AccountReport {
                    address: "0xb".into(),
                    reliability: 0.1195,
                    trustiness: Some(-0.25),
                    risk: 8.805,
                    is_default: false,
                    predicted: Prediction::Illicit,
                },
                AccountReport {
                    address: "0xa".into(),
                    reliability: 0.7,
                    trustiness: None,
                    risk: 3.0,
                    is_default: true,
                    predicted: Prediction::Licit,
                },
            ],
        };
        let mut echo = Echo::new("rate");
        echo.push("seed", 0);
        write_report(&path, &report, &echo).unwrap();
        let back = read_report(&path).unwrap();
        assert_eq!(back.entries.len(), 2);
        assert_eq!(back.entries[0].address, "0xb");
        assert_eq!(back.entries[0].trustiness, Some(-0.25));
        assert!(back.entries[1].is_default);
        assert_eq!(back.entries[1].trustiness, None);
        assert_eq!(back.entries[0].predicted, Prediction::Illicit);

        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("# subcommand=rate\n# seed=0\n"));
        assert!(text.contains("0xb,0.119500,-0.250000,8.805000,false,illicit"));
    }

    #[test]
    fn graph_dump_scores_round_trip_exactly() {
        let records = vec![riskprop_core::ingest::TransactionRecord {
            tx_id: "t".into(),
            payer: "0xa".into(),
            payee: "0xb".into(),
            value: 1,
            timestamp: None,
        }];
        let mut graph = riskprop_core::graph::build_graph(&records).unwrap();
        graph.replace_scores(&[0.1234567890123456789]).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("graph.csv");
        write_graph_dump(&path, &graph, &Echo::new("rate")).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let line = text.lines().last().unwrap();
        let dumped: f64 = line.split(',').nth(3).unwrap().parse().unwrap();
        assert_eq!(dumped, graph.edges()[0].score);
    }
}
