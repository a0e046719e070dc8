//! Fault identification from a syndrome.
//!
//! Each edge `(i, j)` with outcome `s` is the clause "i faulty, or j's state
//! equals s". Identification searches all assignments with at most `bound`
//! faulty nodes by branch-and-bound, propagating forced assignments:
//!
//! * a fault-free tester forces each tested node to its reported state;
//! * a tested node whose state contradicts a report forces the tester faulty.
//!
//! On a κ-diagnosable graph with at most κ true faults exactly one
//! assignment survives, so the result is [`Status::Unique`].

use std::collections::BTreeSet;
use std::time::Instant;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{is_consistent, DiagnosticGraph, FaultSet, NodeIndex, Syndrome};

/// Ambiguous results list at most this many candidates.
pub const CANDIDATE_CAP: usize = 32;

/// Largest graph accepted by [`brute_force_identify`].
pub const BRUTE_FORCE_GUARD: usize = 25;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Unique,
    Ambiguous,
    Infeasible,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentificationResult {
    pub status: Status,
    /// Present when `status` is unique.
    pub fault_set: Option<FaultSet>,
    /// Consistent sets in canonical order, capped at [`CANDIDATE_CAP`].
    pub candidates: Vec<FaultSet>,
    /// Number of consistent sets within the bound, before capping.
    pub candidate_count: usize,
    pub bound: usize,
    pub elapsed_us: f64,
}

impl IdentificationResult {
    /// Smallest consistent set, if any (the unique one when unique).
    pub fn best(&self) -> Option<&FaultSet> {
        self.candidates.first()
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum State {
    Unknown,
    Good,
    Faulty,
}

struct Search<'a> {
    graph: &'a DiagnosticGraph,
    outcomes: &'a [bool],
    bound: usize,
    state: Vec<State>,
    faulty: usize,
    trail: Vec<NodeIndex>,
    queue: Vec<NodeIndex>,
    found: BTreeSet<(usize, Vec<NodeIndex>)>,
    count: usize,
}

impl<'a> Search<'a> {
    fn new(graph: &'a DiagnosticGraph, outcomes: &'a [bool], bound: usize) -> Self {
        Self {
            graph,
            outcomes,
            bound,
            state: vec![State::Unknown; graph.node_count()],
            faulty: 0,
            trail: Vec::new(),
            queue: Vec::new(),
            found: BTreeSet::new(),
            count: 0,
        }
    }

    fn set(&mut self, node: NodeIndex, value: State) -> bool {
        match self.state[node] {
            State::Unknown => {
                if value == State::Faulty {
                    if self.faulty == self.bound {
                        return false;
                    }
                    self.faulty += 1;
                }
                self.state[node] = value;
                self.trail.push(node);
                self.queue.push(node);
                true
            }
            current => current == value,
        }
    }

    fn propagate(&mut self) -> bool {
        let edges = self.graph.edges();
        while let Some(x) = self.queue.pop() {
            let x_faulty = self.state[x] == State::Faulty;
            if !x_faulty {
                for &k in self.graph.out_edge_indices(x) {
                    let target = if self.outcomes[k] { State::Faulty } else { State::Good };
                    if !self.set(edges[k].1, target) {
                        return false;
                    }
                }
            }
            for &k in self.graph.in_edge_indices(x) {
                if self.outcomes[k] != x_faulty && !self.set(edges[k].0, State::Faulty) {
                    return false;
                }
            }
        }
        true
    }

    fn undo_to(&mut self, mark: usize) {
        while self.trail.len() > mark {
            let node = self.trail.pop().unwrap();
            if self.state[node] == State::Faulty {
                self.faulty -= 1;
            }
            self.state[node] = State::Unknown;
        }
        self.queue.clear();
    }

    fn record(&mut self) {
        self.count += 1;
        let members: Vec<NodeIndex> = (0..self.state.len())
            .filter(|&i| self.state[i] == State::Faulty)
            .collect();
        self.found.insert((members.len(), members));
        if self.found.len() > CANDIDATE_CAP {
            self.found.pop_last();
        }
    }

    fn branch(&mut self, from: NodeIndex) {
        let Some(next) = (from..self.state.len()).find(|&i| self.state[i] == State::Unknown) else {
            self.record();
            return;
        };
        for value in [State::Good, State::Faulty] {
            let mark = self.trail.len();
            if self.set(next, value) && self.propagate() {
                self.branch(next + 1);
            }
            self.undo_to(mark);
        }
    }
}

fn result_from(
    status_count: usize,
    found: BTreeSet<(usize, Vec<NodeIndex>)>,
    bound: usize,
    elapsed_us: f64,
) -> IdentificationResult {
    let candidates: Vec<FaultSet> = found
        .into_iter()
        .map(|(_, m)| FaultSet::from_set_unchecked(m.into_iter().collect()))
        .collect();
    let (status, fault_set) = match status_count {
        0 => (Status::Infeasible, None),
        1 => (Status::Unique, candidates.first().cloned()),
        _ => (Status::Ambiguous, None),
    };
    IdentificationResult {
        status,
        fault_set,
        candidates,
        candidate_count: status_count,
        bound,
        elapsed_us,
    }
}

/// All fault sets of size ≤ `bound` consistent with `syndrome`, found by
/// branch-and-bound with unit propagation.
pub fn identify_faults(graph: &DiagnosticGraph, syndrome: &Syndrome, bound: usize) -> Result<IdentificationResult> {
    let start = Instant::now();
    if syndrome.len() != graph.edge_count() {
        return Err(Error::SyndromeMismatch(format!(
            "{} outcomes for {} edges",
            syndrome.len(),
            graph.edge_count()
        )));
    }
    let mut search = Search::new(graph, syndrome.outcomes(), bound);
    search.branch(0);
    let elapsed_us = start.elapsed().as_secs_f64() * 1e6;
    Ok(result_from(search.count, search.found, bound, elapsed_us))
}

/// Identification under `kappa`, widening the bound one node at a time when
/// no consistent set of size ≤ κ exists. Returns the result of the first
/// feasible bound; past κ uniqueness is no longer guaranteed by
/// diagnosability, so callers should report the bound used.
pub fn identify_escalating(graph: &DiagnosticGraph, syndrome: &Syndrome, kappa: usize) -> Result<IdentificationResult> {
    let start = Instant::now();
    let mut bound = kappa;
    loop {
        let mut result = identify_faults(graph, syndrome, bound)?;
        if result.status != Status::Infeasible || bound >= graph.node_count() {
            result.elapsed_us = start.elapsed().as_secs_f64() * 1e6;
            return Ok(result);
        }
        bound += 1;
    }
}

/// Every consistent fault set of size ≤ `bound`, by exhaustive enumeration,
/// sorted by cardinality then lexicographically.
pub fn brute_force_identify(graph: &DiagnosticGraph, syndrome: &Syndrome, bound: usize) -> Result<Vec<FaultSet>> {
    let n = graph.node_count();
    if n > BRUTE_FORCE_GUARD {
        return Err(Error::SizeGuard {
            nodes: n,
            guard: BRUTE_FORCE_GUARD,
        });
    }
    let mut out = Vec::new();
    for size in 0..=bound.min(n) {
        let mut combo: Vec<usize> = (0..size).collect();
        loop {
            let f = FaultSet::from_iter(combo.iter().copied());
            if is_consistent(graph, syndrome, &f)? {
                out.push(f);
            }
            // next combination in lexicographic order
            let Some(pos) = (0..size).rev().find(|&k| combo[k] < n - size + k) else {
                break;
            };
            combo[pos] += 1;
            for k in pos + 1..size {
                combo[k] = combo[k - 1] + 1;
            }
        }
    }
    Ok(out)
}
