#![allow(dead_code)]

use persys_core::{DiagnosticGraph, FaultSet, FaultyTesterPolicy, NodeLabel};
use proptest::prelude::*;

pub fn graph_from_matrix(n: usize, bits: &[bool]) -> DiagnosticGraph {
    let nodes = (0..n).map(|i| NodeLabel::instant(format!("u{i}"))).collect();
    let edges = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .filter(|&(i, j)| i != j && bits[i * n + j])
        .collect();
    DiagnosticGraph::new(nodes, edges).unwrap()
}

/// Random simple digraph on `lo..=hi` nodes; the edge density is drawn too,
/// so sparse and dense graphs both show up.
pub fn arb_graph(lo: usize, hi: usize) -> impl Strategy<Value = DiagnosticGraph> {
    (lo..=hi, 0.0..1.0f64).prop_flat_map(|(n, density)| {
        proptest::collection::vec(proptest::bool::weighted(density.clamp(0.01, 0.99)), n * n)
            .prop_map(move |bits| graph_from_matrix(n, &bits))
    })
}

pub fn arb_fault_set(n: usize, max: usize) -> impl Strategy<Value = FaultSet> {
    proptest::sample::subsequence((0..n).collect::<Vec<_>>(), 0..=max.min(n)).prop_map(FaultSet::from_iter)
}

pub fn policy(k: u8) -> FaultyTesterPolicy {
    match k % 4 {
        0 => FaultyTesterPolicy::RandomUniform,
        1 => FaultyTesterPolicy::AlwaysPass,
        2 => FaultyTesterPolicy::AlwaysFail,
        _ => FaultyTesterPolicy::inverted(),
    }
}
