//! Scalability benchmark: full pipeline timings over a ladder of random
//! network sizes. Propagation cost is linear in the edge count per
//! iteration, so per-iteration time against edges should fit a line.

use std::time::Instant;

use anyhow::Result;
use riskprop_core::exec::ParallelMap;
use riskprop_core::graph::{build_graph, score_all_edges};
use riskprop_core::propagation::{iterate_until_convergence, PropagationConfig};
use riskprop_core::rng::keyed_u64;
use riskprop_core::synth::{random_network, SynthSpec};

#[derive(Debug, Clone)]
pub struct BenchOptions {
    /// Transaction counts to generate, one row per entry.
    pub sizes: Vec<usize>,
    pub seed: u64,
    pub epsilon: f64,
    pub max_iterations: usize,
    /// Run exactly this many iterations instead of iterating to
    /// convergence; keeps the measured work identical across sizes.
    pub fixed_iterations: Option<usize>,
}

impl Default for BenchOptions {
    fn default() -> Self {
        Self {
            sizes: vec![10_000, 20_000, 40_000, 80_000],
            seed: 0,
            epsilon: 0.01,
            max_iterations: 1000,
            fixed_iterations: None,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct BenchRow {
    /// Collapsed edge count of the built graph.
    pub edges: usize,
    /// Payer-role plus payee-role node count.
    pub nodes: usize,
    pub iterations: usize,
    pub build_ms: f64,
    pub propagate_ms: f64,
    pub total_ms: f64,
}

/// One full pipeline run (build + score + propagate) per ladder size.
pub fn scalability_benchmark(
    options: &BenchOptions,
    exec: &dyn ParallelMap,
) -> Result<Vec<BenchRow>> {
    let mut rows = Vec::with_capacity(options.sizes.len());
    for (i, &size) in options.sizes.iter().enumerate() {
        let spec = SynthSpec {
            payers: (size / 10).max(2),
            payees: (size / 10).max(2),
            transactions: size,
            seed: keyed_u64(options.seed, i as u64),
            plants: vec![],
        };
        let (records, _) = random_network(&spec)?;

        let build_started = Instant::now();
        let mut graph = build_graph(&records)?;
        score_all_edges(&mut graph, exec);
        let build_ms = build_started.elapsed().as_secs_f64() * 1e3;

        let config = match options.fixed_iterations {
            Some(iterations) => PropagationConfig {
                epsilon: f64::MIN_POSITIVE,
                max_iterations: iterations,
                ..PropagationConfig::default()
            },
            None => PropagationConfig {
                epsilon: options.epsilon,
                max_iterations: options.max_iterations,
                ..PropagationConfig::default()
            },
        };
        let propagate_started = Instant::now();
        let run = iterate_until_convergence(&graph, &config, None, None, exec)?;
        let propagate_ms = propagate_started.elapsed().as_secs_f64() * 1e3;

        rows.push(BenchRow {
            edges: graph.n_edges(),
            nodes: graph.n_payers() + graph.n_payees(),
            iterations: run.state.iteration,
            build_ms,
            propagate_ms,
            total_ms: build_ms + propagate_ms,
        });
    }
    Ok(rows)
}

/// Ordinary least squares fit of `y = slope * x + intercept`.
#[derive(Debug, Clone, Copy)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

pub fn fit_linear(xs: &[f64], ys: &[f64]) -> LinearFit {
    assert_eq!(xs.len(), ys.len());
    assert!(xs.len() >= 2);
    let n = xs.len() as f64;
    let mean_x = xs.iter().sum::<f64>() / n;
    let mean_y = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (x - mean_x) * (y - mean_y))
        .sum();
    let sxx: f64 = xs.iter().map(|x| (x - mean_x) * (x - mean_x)).sum();
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let ss_res: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| {
            let r = y - (slope * x + intercept);
            r * r
        })
        .sum();
    let ss_tot: f64 = ys.iter().map(|y| (y - mean_y) * (y - mean_y)).sum();
    let r_squared = if ss_tot == 0.0 { 1.0 } else { 1.0 - ss_res / ss_tot };
    LinearFit {
        slope,
        intercept,
        r_squared,
    }
}
