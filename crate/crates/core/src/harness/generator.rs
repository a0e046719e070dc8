use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::diagnosability::is_k_diagnosable;
use crate::error::{Error, Result};
use crate::graph::{DiagnosticGraph, NodeLabel};

pub const DEFAULT_RETRY_BUDGET: usize = 10_000;

pub fn gen_random_diagnosable_graph(n: usize, kappa: usize, seed: u64) -> Result<DiagnosticGraph> {
    gen_random_diagnosable_graph_with_budget(n, kappa, seed, DEFAULT_RETRY_BUDGET)
}

/// Rejection sampling: every node gets `kappa` distinct testers drawn
/// uniformly from the other nodes; the draw is kept once it is verified
/// κ-diagnosable. Nodes are labelled `m0..m{n-1}` at tick 0.
pub fn gen_random_diagnosable_graph_with_budget(
    n: usize,
    kappa: usize,
    seed: u64,
    budget: usize,
) -> Result<DiagnosticGraph> {
    if n == 0 {
        return Err(Error::EmptyGraph);
    }
    if 2 * kappa > n - 1 {
        return Err(Error::InvalidArgument(format!(
            "κ = {kappa} exceeds ⌊(n − 1)/2⌋ = {} for n = {n}",
            (n - 1) / 2
        )));
    }
    let nodes: Vec<NodeLabel> = (0..n).map(|i| NodeLabel::instant(format!("m{i}"))).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..budget {
        let mut edges = Vec::with_capacity(n * kappa);
        for j in 0..n {
            // testers of j: sample from the n - 1 other nodes
            for k in sample(&mut rng, n - 1, kappa) {
                let i = if k >= j { k + 1 } else { k };
                edges.push((i, j));
            }
        }
        let graph = DiagnosticGraph::new(nodes.clone(), edges)?;
        if is_k_diagnosable(&graph, kappa)?.diagnosable {
            return Ok(graph);
        }
    }
    Err(Error::RetryBudgetExhausted { attempts: budget })
}
