//! Diagnostic graphs, syndromes and fault sets.
//!
//! A diagnostic graph is a directed graph whose nodes are module executions
//! and whose edges are test assignments: an edge `(i, j)` means node `i`
//! tests node `j`. A syndrome assigns each edge a pass (`false`) or fail
//! (`true`) outcome. Fault-free testers report the true state of the node
//! they test; faulty testers may report anything.

use std::collections::{BTreeSet, HashSet};
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type NodeIndex = usize;

/// A directed test assignment `(tester, tested)`.
pub type Edge = (NodeIndex, NodeIndex);

/// Identity of a node: which module ran, and at which tick.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct NodeLabel {
    pub module_id: String,
    pub timestamp: i64,
}

impl NodeLabel {
    pub fn new(module_id: impl Into<String>, timestamp: i64) -> Self {
        Self {
            module_id: module_id.into(),
            timestamp,
        }
    }

    /// Label for a node of a purely instantaneous graph.
    pub fn instant(module_id: impl Into<String>) -> Self {
        Self::new(module_id, 0)
    }
}

impl fmt::Display for NodeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}@{}", self.module_id, self.timestamp)
    }
}

/// Immutable, validated diagnostic graph.
///
/// Edges are stored sorted lexicographically by `(tester, tested)`; edge
/// indices used by [`Syndrome`] refer to that canonical order.
#[derive(Debug, Clone)]
pub struct DiagnosticGraph {
    nodes: Vec<NodeLabel>,
    edges: Vec<Edge>,
    // edge indices grouped by tester and by tested node
    out_edges: Vec<Vec<usize>>,
    in_edges: Vec<Vec<usize>>,
}

impl PartialEq for DiagnosticGraph {
    fn eq(&self, other: &Self) -> bool {
        self.nodes == other.nodes && self.edges == other.edges
    }
}

impl Eq for DiagnosticGraph {}

impl DiagnosticGraph {
    pub fn new(nodes: Vec<NodeLabel>, edges: Vec<Edge>) -> Result<Self> {
        let mut seen = HashSet::with_capacity(nodes.len());
        for label in &nodes {
            if !seen.insert(label) {
                return Err(Error::DuplicateNode {
                    module_id: label.module_id.clone(),
                    timestamp: label.timestamp,
                });
            }
        }

        let n = nodes.len();
        let mut edges = edges;
        for &(tester, tested) in &edges {
            if tester >= n || tested >= n {
                return Err(Error::DanglingEdge {
                    tester,
                    tested,
                    node_count: n,
                });
            }
            if tester == tested {
                return Err(Error::SelfLoop(tester));
            }
        }
        edges.sort_unstable();
        if let Some(w) = edges.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::DuplicateEdge {
                tester: w[0].0,
                tested: w[0].1,
            });
        }

        let mut out_edges = vec![Vec::new(); n];
        let mut in_edges = vec![Vec::new(); n];
        for (k, &(i, j)) in edges.iter().enumerate() {
            out_edges[i].push(k);
            in_edges[j].push(k);
        }

        Ok(Self {
            nodes,
            edges,
            out_edges,
            in_edges,
        })
    }

    /// Graph over `modules` at timestamp 0 with edges given by module name.
    pub fn from_named(modules: &[&str], tests: &[(&str, &str)]) -> Result<Self> {
        let nodes: Vec<NodeLabel> = modules.iter().map(|m| NodeLabel::instant(*m)).collect();
        let index = |name: &str| {
            modules
                .iter()
                .position(|m| *m == name)
                .ok_or_else(|| Error::InvalidArgument(format!("unknown module `{name}`")))
        };
        let edges = tests
            .iter()
            .map(|(a, b)| Ok((index(a)?, index(b)?)))
            .collect::<Result<Vec<_>>>()?;
        Self::new(nodes, edges)
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[NodeLabel] {
        &self.nodes
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn label(&self, i: NodeIndex) -> Result<&NodeLabel> {
        self.nodes.get(i).ok_or(Error::NodeOutOfRange {
            index: i,
            node_count: self.nodes.len(),
        })
    }

    pub fn index_of(&self, label: &NodeLabel) -> Option<NodeIndex> {
        self.nodes.iter().position(|l| l == label)
    }

    /// Position of `(tester, tested)` in the canonical edge order.
    pub fn edge_index(&self, tester: NodeIndex, tested: NodeIndex) -> Option<usize> {
        self.edges.binary_search(&(tester, tested)).ok()
    }

    /// Edge indices whose tester is `i`.
    pub fn out_edge_indices(&self, i: NodeIndex) -> &[usize] {
        &self.out_edges[i]
    }

    /// Edge indices whose tested node is `i`.
    pub fn in_edge_indices(&self, i: NodeIndex) -> &[usize] {
        &self.in_edges[i]
    }

    pub fn in_degree(&self, i: NodeIndex) -> Result<usize> {
        self.check_index(i)?;
        Ok(self.in_edges[i].len())
    }

    pub(crate) fn check_index(&self, i: NodeIndex) -> Result<()> {
        if i < self.nodes.len() {
            Ok(())
        } else {
            Err(Error::NodeOutOfRange {
                index: i,
                node_count: self.nodes.len(),
            })
        }
    }

    /// Γ(i): the nodes tested by `i`.
    pub fn testable_set(&self, i: NodeIndex) -> Result<BTreeSet<NodeIndex>> {
        self.check_index(i)?;
        Ok(self.out_edges[i].iter().map(|&k| self.edges[k].1).collect())
    }

    /// Γ(X): nodes tested by some member of `x`, excluding `x` itself.
    pub fn gamma_of_set(&self, x: &BTreeSet<NodeIndex>) -> Result<BTreeSet<NodeIndex>> {
        let mut out = BTreeSet::new();
        for &i in x {
            self.check_index(i)?;
            out.extend(
                self.out_edges[i]
                    .iter()
                    .map(|&k| self.edges[k].1)
                    .filter(|j| !x.contains(j)),
            );
        }
        Ok(out)
    }

    /// δ_in(D): the smallest in-degree over all nodes.
    pub fn min_in_degree(&self) -> Result<usize> {
        self.in_edges
            .iter()
            .map(Vec::len)
            .min()
            .ok_or(Error::EmptyGraph)
    }

    /// Subgraph induced by `subset`, keeping every edge with both endpoints
    /// inside. Returns the subgraph and the original index of each new node.
    pub fn induced_subgraph(&self, subset: &BTreeSet<NodeIndex>) -> Result<(Self, Vec<NodeIndex>)> {
        for &i in subset {
            self.check_index(i)?;
        }
        let original: Vec<NodeIndex> = subset.iter().copied().collect();
        let mut remap = vec![usize::MAX; self.nodes.len()];
        for (new, &old) in original.iter().enumerate() {
            remap[old] = new;
        }
        let nodes = original.iter().map(|&i| self.nodes[i].clone()).collect();
        let edges = self
            .edges
            .iter()
            .filter(|(i, j)| remap[*i] != usize::MAX && remap[*j] != usize::MAX)
            .map(|&(i, j)| (remap[i], remap[j]))
            .collect();
        Ok((Self::new(nodes, edges)?, original))
    }
}

/// Set of node indices hypothesized or known to be faulty.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FaultSet(BTreeSet<NodeIndex>);

impl FaultSet {
    pub fn empty() -> Self {
        Self::default()
    }

    /// Validated fault set over the nodes of `graph`.
    pub fn new(graph: &DiagnosticGraph, members: impl IntoIterator<Item = NodeIndex>) -> Result<Self> {
        let set: BTreeSet<_> = members.into_iter().collect();
        for &i in &set {
            graph.check_index(i)?;
        }
        Ok(Self(set))
    }

    pub(crate) fn from_set_unchecked(set: BTreeSet<NodeIndex>) -> Self {
        Self(set)
    }

    pub(crate) fn from_mask(mask: u64) -> Self {
        Self((0..64).filter(|b| mask >> b & 1 == 1).collect())
    }

    pub fn contains(&self, i: NodeIndex) -> bool {
        self.0.contains(&i)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = NodeIndex> + '_ {
        self.0.iter().copied()
    }

    pub fn as_set(&self) -> &BTreeSet<NodeIndex> {
        &self.0
    }

    pub(crate) fn validate(&self, graph: &DiagnosticGraph) -> Result<()> {
        self.0.iter().try_for_each(|&i| graph.check_index(i))
    }

    /// Cardinality first, then lexicographic on sorted members.
    pub fn cmp_canonical(&self, other: &Self) -> std::cmp::Ordering {
        self.len()
            .cmp(&other.len())
            .then_with(|| self.0.iter().cmp(other.0.iter()))
    }
}

impl FromIterator<NodeIndex> for FaultSet {
    fn from_iter<T: IntoIterator<Item = NodeIndex>>(iter: T) -> Self {
        Self(iter.into_iter().collect())
    }
}

/// Test outcomes, one per edge in the graph's canonical edge order.
/// `true` is a failed test.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Syndrome {
    outcomes: Vec<bool>,
}

impl Syndrome {
    pub fn from_outcomes(graph: &DiagnosticGraph, outcomes: Vec<bool>) -> Result<Self> {
        if outcomes.len() != graph.edge_count() {
            return Err(Error::SyndromeMismatch(format!(
                "{} outcomes for {} edges",
                outcomes.len(),
                graph.edge_count()
            )));
        }
        Ok(Self { outcomes })
    }

    /// Builds a syndrome from `(tester, tested, failed)` triples, which must
    /// cover every edge exactly once.
    pub fn from_tests(
        graph: &DiagnosticGraph,
        tests: impl IntoIterator<Item = (NodeIndex, NodeIndex, bool)>,
    ) -> Result<Self> {
        let mut outcomes: Vec<Option<bool>> = vec![None; graph.edge_count()];
        for (i, j, bit) in tests {
            let k = graph.edge_index(i, j).ok_or_else(|| {
                Error::SyndromeMismatch(format!("test ({i}, {j}) is not an edge of the graph"))
            })?;
            if outcomes[k].replace(bit).is_some() {
                return Err(Error::SyndromeMismatch(format!("test ({i}, {j}) given twice")));
            }
        }
        let outcomes = outcomes
            .into_iter()
            .enumerate()
            .map(|(k, o)| {
                o.ok_or_else(|| {
                    let (i, j) = graph.edges()[k];
                    Error::SyndromeMismatch(format!("missing outcome for edge ({i}, {j})"))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { outcomes })
    }

    pub fn all_pass(graph: &DiagnosticGraph) -> Self {
        Self {
            outcomes: vec![false; graph.edge_count()],
        }
    }

    pub fn len(&self) -> usize {
        self.outcomes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outcomes.is_empty()
    }

    pub fn outcomes(&self) -> &[bool] {
        &self.outcomes
    }

    pub fn get(&self, edge_index: usize) -> Option<bool> {
        self.outcomes.get(edge_index).copied()
    }

    pub fn outcome(&self, graph: &DiagnosticGraph, tester: NodeIndex, tested: NodeIndex) -> Option<bool> {
        graph.edge_index(tester, tested).and_then(|k| self.get(k))
    }

    /// Indices of failed tests.
    pub fn failing_edges(&self) -> impl Iterator<Item = usize> + '_ {
        self.outcomes
            .iter()
            .enumerate()
            .filter_map(|(k, &b)| b.then_some(k))
    }

    pub(crate) fn check_matches(&self, graph: &DiagnosticGraph) -> Result<()> {
        if self.outcomes.len() == graph.edge_count() {
            Ok(())
        } else {
            Err(Error::SyndromeMismatch(format!(
                "{} outcomes for {} edges",
                self.outcomes.len(),
                graph.edge_count()
            )))
        }
    }
}

/// Fault detection: some test failed.
pub fn detect(syndrome: &Syndrome) -> bool {
    syndrome.outcomes.iter().any(|&b| b)
}

type OutcomeFn = dyn Fn(&DiagnosticGraph, &FaultSet, NodeIndex, NodeIndex) -> bool + Send + Sync;

/// How faulty testers report their outcomes when generating syndromes.
#[derive(Clone)]
pub enum FaultyTesterPolicy {
    /// Fair coin per edge, drawn from the seeded generator.
    RandomUniform,
    AlwaysPass,
    AlwaysFail,
    /// Arbitrary caller-defined outcome `(graph, faults, tester, tested) -> failed`.
    Adversarial(Arc<OutcomeFn>),
}

impl FaultyTesterPolicy {
    /// Faulty testers report the opposite of the truth.
    pub fn inverted() -> Self {
        Self::Adversarial(Arc::new(|_, faults, _, tested| !faults.contains(tested)))
    }

    pub fn tag(&self) -> &'static str {
        match self {
            Self::RandomUniform => "random-uniform",
            Self::AlwaysPass => "always-pass",
            Self::AlwaysFail => "always-fail",
            Self::Adversarial(_) => "adversarial",
        }
    }
}

impl fmt::Debug for FaultyTesterPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for FaultyTesterPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "random-uniform" => Ok(Self::RandomUniform),
            "always-pass" => Ok(Self::AlwaysPass),
            "always-fail" => Ok(Self::AlwaysFail),
            "inverted" | "adversarial" => Ok(Self::inverted()),
            other => Err(Error::InvalidArgument(format!(
                "unknown faulty-tester policy `{other}`"
            ))),
        }
    }
}

/// Syndrome produced when exactly the nodes of `faults` are faulty.
///
/// Fault-free testers report `tested ∈ faults`; faulty testers follow
/// `policy`. Random draws happen only for faulty testers, in canonical edge
/// order, so the result is a pure function of the inputs and `seed`.
pub fn generate_syndrome(
    graph: &DiagnosticGraph,
    faults: &FaultSet,
    policy: &FaultyTesterPolicy,
    seed: u64,
) -> Result<Syndrome> {
    faults.validate(graph)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let outcomes = graph
        .edges()
        .iter()
        .map(|&(i, j)| {
            if !faults.contains(i) {
                return faults.contains(j);
            }
            match policy {
                FaultyTesterPolicy::RandomUniform => rng.gen::<bool>(),
                FaultyTesterPolicy::AlwaysPass => false,
                FaultyTesterPolicy::AlwaysFail => true,
                FaultyTesterPolicy::Adversarial(f) => f(graph, faults, i, j),
            }
        })
        .collect();
    Ok(Syndrome { outcomes })
}

/// Whether `syndrome` could have been produced with exactly `faults` faulty:
/// every edge with a fault-free tester reports the true state of its target.
pub fn is_consistent(graph: &DiagnosticGraph, syndrome: &Syndrome, faults: &FaultSet) -> Result<bool> {
    syndrome.check_matches(graph)?;
    faults.validate(graph)?;
    Ok(graph
        .edges()
        .iter()
        .zip(&syndrome.outcomes)
        .all(|(&(i, j), &bit)| faults.contains(i) || bit == faults.contains(j)))
}
