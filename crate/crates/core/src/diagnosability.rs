//! κ-diagnosability of diagnostic graphs.
//!
//! A graph on `n` nodes is κ-diagnosable iff
//!
//! 1. `2κ ≤ n − 1`,
//! 2. `κ ≤ δ_in(D)`, and
//! 3. for every `0 ≤ p < κ` and every `X ⊂ U` with `|X| = n − 2κ + p`,
//!    `|Γ(X)| > p`.
//!
//! Condition 3 is checked by exhaustive enumeration of subsets in
//! lexicographic order, so the reported witness is the lexicographically
//! smallest violating subset for the smallest violating `p`.
//! [`distinguishability_oracle`] decides the same property straight from the
//! definition (no two small fault sets share a consistent syndrome) and is
//! kept independent of the characterization for cross-checking.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{is_consistent, DiagnosticGraph, FaultSet, NodeIndex, Syndrome};

/// Largest graph accepted by the subset-enumeration checker.
pub const ENUMERATION_GUARD: usize = 30;

/// Largest graph accepted by the fault-set-pair oracle without override.
pub const ORACLE_GUARD: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Condition {
    /// κ > (|U| − 1) / 2
    #[serde(rename = "bound-i")]
    BoundI,
    /// κ > δ_in(D)
    #[serde(rename = "bound-ii")]
    BoundII,
    /// some subset X has |Γ(X)| ≤ p
    #[serde(rename = "subset-iii")]
    SubsetIII,
}

/// A subset violating the subset condition: `|gamma| ≤ p` with
/// `|subset| = |U| − 2κ + p`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Witness {
    pub p: usize,
    pub subset: BTreeSet<NodeIndex>,
    pub gamma: BTreeSet<NodeIndex>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct KCheck {
    pub diagnosable: bool,
    pub violated: Option<Condition>,
    pub witness: Option<Witness>,
}

impl KCheck {
    fn pass() -> Self {
        Self {
            diagnosable: true,
            violated: None,
            witness: None,
        }
    }

    fn fail(condition: Condition, witness: Option<Witness>) -> Self {
        Self {
            diagnosable: false,
            violated: Some(condition),
            witness,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DiagnosabilityReport {
    pub kappa: usize,
    pub min_in_degree: usize,
    pub node_count: usize,
    pub edge_count: usize,
    /// Why κ + 1 is not achievable.
    pub violated_condition: Option<Condition>,
    pub witness: Option<Witness>,
}

fn out_masks(graph: &DiagnosticGraph) -> Vec<u64> {
    (0..graph.node_count())
        .map(|i| {
            graph
                .out_edge_indices(i)
                .iter()
                .fold(0u64, |m, &k| m | 1 << graph.edges()[k].1)
        })
        .collect()
}

fn mask_to_set(mask: u64) -> BTreeSet<NodeIndex> {
    (0..64).filter(|b| mask >> b & 1 == 1).collect()
}

/// First subset of `size` nodes (lexicographic order) with `|Γ(X)| ≤ p`.
fn find_small_gamma(out: &[u64], size: usize, p: usize) -> Option<u64> {
    fn rec(out: &[u64], start: usize, left: usize, chosen: u64, union: u64, p: usize) -> Option<u64> {
        if left == 0 {
            return ((union & !chosen).count_ones() as usize <= p).then_some(chosen);
        }
        // leave room for the remaining `left - 1` picks
        for i in start..=out.len() - left {
            if let Some(found) = rec(out, i + 1, left - 1, chosen | 1 << i, union | out[i], p) {
                return Some(found);
            }
        }
        None
    }
    if size == 0 || size > out.len() {
        return None;
    }
    rec(out, 0, size, 0, 0, p)
}

/// `min(⌊(|U| − 1)/2⌋, δ_in(D))`, the analytic ceiling on κ(D).
pub fn kappa_upper_bound(graph: &DiagnosticGraph) -> Result<usize> {
    let n = graph.node_count();
    let delta = graph.min_in_degree()?;
    Ok(((n - 1) / 2).min(delta))
}

pub fn is_k_diagnosable(graph: &DiagnosticGraph, kappa: usize) -> Result<KCheck> {
    let n = graph.node_count();
    if n == 0 {
        return Err(Error::EmptyGraph);
    }
    if kappa == 0 {
        return Ok(KCheck::pass());
    }
    if 2 * kappa > n - 1 {
        return Ok(KCheck::fail(Condition::BoundI, None));
    }
    if kappa > graph.min_in_degree()? {
        return Ok(KCheck::fail(Condition::BoundII, None));
    }
    if n > ENUMERATION_GUARD {
        return Err(Error::SizeGuard {
            nodes: n,
            guard: ENUMERATION_GUARD,
        });
    }

    let out = out_masks(graph);
    for p in 0..kappa {
        // n - 2κ + p; with bound (i) satisfied this is in 1..n
        let size = (n + p).saturating_sub(2 * kappa);
        if let Some(x) = find_small_gamma(&out, size, p) {
            let gamma = out
                .iter()
                .enumerate()
                .filter(|(i, _)| x >> i & 1 == 1)
                .fold(0u64, |u, (_, &m)| u | m)
                & !x;
            return Ok(KCheck::fail(
                Condition::SubsetIII,
                Some(Witness {
                    p,
                    subset: mask_to_set(x),
                    gamma: mask_to_set(gamma),
                }),
            ));
        }
    }
    Ok(KCheck::pass())
}

/// κ(D), searched downward from [`kappa_upper_bound`].
pub fn max_diagnosability(graph: &DiagnosticGraph) -> Result<DiagnosabilityReport> {
    let upper = kappa_upper_bound(graph)?;
    let n = graph.node_count();
    let delta = graph.min_in_degree()?;

    // reason the bound itself cannot be exceeded
    let (mut violated, mut witness) = if 2 * (upper + 1) > n - 1 {
        (Some(Condition::BoundI), None)
    } else {
        (Some(Condition::BoundII), None)
    };

    let mut kappa = upper;
    loop {
        let check = is_k_diagnosable(graph, kappa)?;
        if check.diagnosable {
            break;
        }
        violated = check.violated;
        witness = check.witness;
        kappa -= 1;
    }

    Ok(DiagnosabilityReport {
        kappa,
        min_in_degree: delta,
        node_count: n,
        edge_count: graph.edge_count(),
        violated_condition: violated,
        witness,
    })
}

/// Builds a syndrome consistent with both fault sets, if one exists.
///
/// Edges whose tester is fault-free under either hypothesis take the outcome
/// that hypothesis dictates; edges tested by a node faulty under both are
/// free and set to pass.
fn common_syndrome(graph: &DiagnosticGraph, a: &FaultSet, b: &FaultSet) -> Result<Option<Syndrome>> {
    let outcomes = graph
        .edges()
        .iter()
        .map(|&(i, j)| {
            if !a.contains(i) {
                a.contains(j)
            } else if !b.contains(i) {
                b.contains(j)
            } else {
                false
            }
        })
        .collect();
    let sigma = Syndrome::from_outcomes(graph, outcomes)?;
    Ok((is_consistent(graph, &sigma, a)? && is_consistent(graph, &sigma, b)?).then_some(sigma))
}

fn subsets_up_to(n: usize, k: usize) -> Vec<u64> {
    let mut out = Vec::new();
    fn rec(n: usize, start: usize, left: usize, cur: u64, out: &mut Vec<u64>) {
        out.push(cur);
        if left == 0 {
            return;
        }
        for i in start..n {
            rec(n, i + 1, left - 1, cur | 1 << i, out);
        }
    }
    rec(n, 0, k, 0, &mut out);
    out
}

/// Decides κ-diagnosability from the definition: true iff no two distinct
/// fault sets of size ≤ κ admit a common consistent syndrome.
pub fn distinguishability_oracle(graph: &DiagnosticGraph, kappa: usize) -> Result<bool> {
    distinguishability_oracle_with_guard(graph, kappa, ORACLE_GUARD)
}

pub fn distinguishability_oracle_with_guard(
    graph: &DiagnosticGraph,
    kappa: usize,
    guard: usize,
) -> Result<bool> {
    let n = graph.node_count();
    if n == 0 {
        return Err(Error::EmptyGraph);
    }
    if n > guard.min(63) {
        return Err(Error::SizeGuard { nodes: n, guard });
    }
    let sets: Vec<FaultSet> = subsets_up_to(n, kappa.min(n))
        .into_iter()
        .map(FaultSet::from_mask)
        .collect();
    for (k, a) in sets.iter().enumerate() {
        for b in &sets[k + 1..] {
            if common_syndrome(graph, a, b)?.is_some() {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// κ(D) ≤ κ(D′) whenever D′ adds edges to D on the same node set.
pub fn check_edge_monotonicity(smaller: &DiagnosticGraph, larger: &DiagnosticGraph) -> Result<bool> {
    if smaller.nodes() != larger.nodes() {
        return Err(Error::InvalidArgument("graphs have different node sets".into()));
    }
    if let Some(&(i, j)) = smaller
        .edges()
        .iter()
        .find(|&&(i, j)| larger.edge_index(i, j).is_none())
    {
        return Err(Error::InvalidArgument(format!(
            "edge ({i}, {j}) missing from the larger graph"
        )));
    }
    Ok(max_diagnosability(smaller)?.kappa <= max_diagnosability(larger)?.kappa)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::NodeLabel;

    fn named(modules: &[&str], tests: &[(&str, &str)]) -> DiagnosticGraph {
        DiagnosticGraph::from_named(modules, tests).unwrap()
    }

    fn cycle3() -> DiagnosticGraph {
        named(&["a", "b", "c"], &[("a", "b"), ("b", "c"), ("c", "a")])
    }

    fn object_detection() -> DiagnosticGraph {
        named(&["C", "L", "R", "F"], &[("R", "F"), ("F", "L"), ("L", "R"), ("R", "C")])
    }

    fn complete(n: usize) -> DiagnosticGraph {
        let nodes = (0..n).map(|i| NodeLabel::instant(format!("m{i}"))).collect();
        let edges = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .collect();
        DiagnosticGraph::new(nodes, edges).unwrap()
    }

    #[test]
    fn kappa_zero_always_holds() {
        for g in [cycle3(), object_detection(), named(&["x"], &[])] {
            assert!(is_k_diagnosable(&g, 0).unwrap().diagnosable);
            assert!(distinguishability_oracle(&g, 0).unwrap());
        }
    }

    #[test]
    fn three_cycle_is_one_diagnosable() {
        let g = cycle3();
        assert!(is_k_diagnosable(&g, 1).unwrap().diagnosable);
        assert!(distinguishability_oracle(&g, 1).unwrap());
        assert_eq!(max_diagnosability(&g).unwrap().kappa, 1);
    }

    #[test]
    fn object_detection_snapshot_fails_on_in_degree() {
        let check = is_k_diagnosable(&object_detection(), 2).unwrap();
        assert!(!check.diagnosable);
        // 4 nodes: bound (i) caps at 1 as well; bound (i) is checked first
        assert_eq!(check.violated, Some(Condition::BoundI));
        let report = max_diagnosability(&object_detection()).unwrap();
        assert_eq!(report.kappa, 1);
        assert_eq!(report.min_in_degree, 1);
    }

    #[test]
    fn in_degree_bound_reported_when_size_allows() {
        // 5 nodes, κ=2 passes bound (i) but every node has in-degree 1
        let g = named(
            &["a", "b", "c", "d", "e"],
            &[("a", "b"), ("b", "c"), ("c", "d"), ("d", "e"), ("e", "a")],
        );
        let check = is_k_diagnosable(&g, 2).unwrap();
        assert_eq!(check.violated, Some(Condition::BoundII));
    }

    #[test]
    fn complete_five_is_two_diagnosable() {
        let g = complete(5);
        assert_eq!(max_diagnosability(&g).unwrap().kappa, 2);
        assert!(distinguishability_oracle(&g, 2).unwrap());
    }

    #[test]
    fn single_node_and_pair() {
        assert_eq!(max_diagnosability(&named(&["x"], &[])).unwrap().kappa, 0);
        let pair = named(&["a", "b"], &[("a", "b")]);
        assert!(!distinguishability_oracle(&pair, 1).unwrap());
        assert_eq!(max_diagnosability(&pair).unwrap().kappa, 0);
        let empty = DiagnosticGraph::new(vec![], vec![]).unwrap();
        assert_eq!(max_diagnosability(&empty), Err(Error::EmptyGraph));
        assert_eq!(is_k_diagnosable(&empty, 0), Err(Error::EmptyGraph));
    }

    #[test]
    fn subset_witness_is_genuine() {
        // two disjoint 3-cycles glued by nothing: 6 nodes, in-degree 1, κ=2
        // fails bound (ii); use a graph where only condition (iii) fails.
        // 7 nodes, every node tested by its two predecessors on a ring, but
        // the ring is split into a 3-clique-ish block and a 4-block.
        let nodes: Vec<_> = (0..7).map(|i| NodeLabel::instant(format!("n{i}"))).collect();
        let mut edges = vec![];
        for block in [vec![0, 1, 2], vec![3, 4, 5, 6]] {
            for &i in &block {
                for &j in &block {
                    if i != j {
                        edges.push((i, j));
                    }
                }
            }
        }
        let g = DiagnosticGraph::new(nodes, edges).unwrap();
        let check = is_k_diagnosable(&g, 2).unwrap();
        assert!(!check.diagnosable);
        assert_eq!(check.violated, Some(Condition::SubsetIII));
        let w = check.witness.unwrap();
        assert_eq!(w.subset.len(), 7 - 4 + w.p);
        let gamma = g.gamma_of_set(&w.subset).unwrap();
        assert_eq!(gamma, w.gamma);
        assert!(gamma.len() <= w.p);
        assert!(!distinguishability_oracle(&g, 2).unwrap());
    }

    #[test]
    fn three_cycle_plus_reverse_edges() {
        let g = cycle3();
        let g2 = named(
            &["a", "b", "c"],
            &[("a", "b"), ("b", "c"), ("c", "a"), ("b", "a"), ("c", "b"), ("a", "c")],
        );
        assert!(check_edge_monotonicity(&g, &g2).unwrap());
        assert!(check_edge_monotonicity(&g, &g).unwrap());
        assert!(check_edge_monotonicity(&g2, &g).is_err());
    }

    #[test]
    fn oracle_guard() {
        let g = complete(21);
        assert!(matches!(
            distinguishability_oracle(&g, 1),
            Err(Error::SizeGuard { .. })
        ));
    }
}
