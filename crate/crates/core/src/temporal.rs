//! Temporal diagnostic graphs.
//!
//! A temporal graph over a window `[a, b]` stacks one copy of every module
//! per tick and instantiates [`TestTemplate`]s between them. A template with
//! lag `ℓ` links `source@(t − ℓ)` to `target@t` for every `t` where both
//! ticks fall inside the window; a negative lag therefore has the later
//! execution test the earlier one.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::diagnosability::is_k_diagnosable;
use crate::error::{Error, Result};
use crate::graph::{DiagnosticGraph, NodeIndex, NodeLabel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TestKind {
    InputAdmissibility,
    IoConsistency,
    InputOutput,
    Temporal,
}

impl TestKind {
    pub fn tag(self) -> &'static str {
        match self {
            Self::InputAdmissibility => "input-admissibility",
            Self::IoConsistency => "io-consistency",
            Self::InputOutput => "input-output",
            Self::Temporal => "temporal",
        }
    }
}

impl fmt::Display for TestKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for TestKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "input-admissibility" => Ok(Self::InputAdmissibility),
            "io-consistency" => Ok(Self::IoConsistency),
            "input-output" => Ok(Self::InputOutput),
            "temporal" => Ok(Self::Temporal),
            other => Err(Error::InvalidArgument(format!("unknown test kind `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TestTemplate {
    pub source_module: String,
    pub target_module: String,
    /// `source@(t − lag)` tests `target@t`.
    pub lag: i64,
    pub kind: TestKind,
}

impl TestTemplate {
    pub fn new(source: &str, target: &str, lag: i64, kind: TestKind) -> Result<Self> {
        if lag == 0 && source == target {
            return Err(Error::InvalidArgument(format!(
                "instantaneous template {source} -> {target} is a self-loop"
            )));
        }
        Ok(Self {
            source_module: source.to_owned(),
            target_module: target.to_owned(),
            lag,
            kind,
        })
    }

    pub fn instant(source: &str, target: &str, kind: TestKind) -> Self {
        Self::new(source, target, 0, kind).expect("distinct modules")
    }

    pub fn temporal(source: &str, target: &str, lag: i64) -> Self {
        Self::new(source, target, lag, TestKind::Temporal).expect("non-zero lag")
    }
}

/// A diagnostic graph over a tick window, with the template behind each edge.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TemporalDiagnosticGraph {
    pub graph: DiagnosticGraph,
    pub window: (i64, i64),
    pub modules: Vec<String>,
    /// Template index realized by each edge, in canonical edge order.
    pub edge_templates: Vec<usize>,
}

impl TemporalDiagnosticGraph {
    pub fn node_index(&self, module: &str, tick: i64) -> Option<NodeIndex> {
        let m = self.modules.iter().position(|x| x == module)?;
        let (a, b) = self.window;
        (a..=b)
            .contains(&tick)
            .then(|| (tick - a) as usize * self.modules.len() + m)
    }

    pub fn slice_count(&self) -> usize {
        (self.window.1 - self.window.0 + 1) as usize
    }
}

pub fn build_temporal_graph(
    modules: &[String],
    templates: &[TestTemplate],
    window: (i64, i64),
) -> Result<TemporalDiagnosticGraph> {
    let (a, b) = window;
    if a > b {
        return Err(Error::InvalidArgument(format!("empty window [{a}, {b}]")));
    }
    let module_index = |name: &str| {
        modules
            .iter()
            .position(|m| m == name)
            .ok_or_else(|| Error::InvalidArgument(format!("template references unknown module `{name}`")))
    };
    let resolved = templates
        .iter()
        .map(|t| {
            if t.lag == 0 && t.source_module == t.target_module {
                return Err(Error::InvalidArgument(format!(
                    "instantaneous template on `{}` is a self-loop",
                    t.source_module
                )));
            }
            Ok((module_index(&t.source_module)?, module_index(&t.target_module)?))
        })
        .collect::<Result<Vec<_>>>()?;

    let m = modules.len();
    let index = |module: usize, tick: i64| (tick - a) as usize * m + module;
    let nodes = (a..=b)
        .flat_map(|t| modules.iter().map(move |name| NodeLabel::new(name.clone(), t)))
        .collect();

    let mut raw = Vec::new();
    for (k, (t, &(src, dst))) in templates.iter().zip(&resolved).enumerate() {
        for tick in a..=b {
            let src_tick = tick - t.lag;
            if (a..=b).contains(&src_tick) {
                raw.push(((index(src, src_tick), index(dst, tick)), k));
            }
        }
    }
    raw.sort_unstable();
    let graph = DiagnosticGraph::new(nodes, raw.iter().map(|&(e, _)| e).collect())?;
    Ok(TemporalDiagnosticGraph {
        graph,
        window,
        modules: modules.to_vec(),
        edge_templates: raw.into_iter().map(|(_, k)| k).collect(),
    })
}

/// Parses `template <source> <target> <lag> <kind>` lines; `#` starts a comment.
pub fn parse_templates(text: &str) -> Result<Vec<TestTemplate>> {
    let mut out = Vec::new();
    for (k, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let toks: Vec<&str> = line.split_whitespace().collect();
        let ["template", src, dst, lag, kind] = toks.as_slice() else {
            return Err(Error::parse(k + 1, "expected `template <source> <target> <lag> <kind>`"));
        };
        let lag: i64 = lag
            .parse()
            .map_err(|_| Error::parse(k + 1, format!("invalid lag `{lag}`")))?;
        let kind: TestKind = kind.parse().map_err(|e: Error| Error::parse(k + 1, e.to_string()))?;
        out.push(TestTemplate::new(src, dst, lag, kind).map_err(|e| Error::parse(k + 1, e.to_string()))?);
    }
    Ok(out)
}

pub fn write_templates(templates: &[TestTemplate]) -> String {
    templates
        .iter()
        .map(|t| format!("template {} {} {} {}\n", t.source_module, t.target_module, t.lag, t.kind))
        .collect()
}

/// Checks the cover property on `graph`: when every subgraph induced by a
/// cover member is κ-diagnosable, the whole graph must be too. Returns
/// `true` when the premise fails (nothing to assert).
pub fn check_cover_property(graph: &DiagnosticGraph, covers: &[BTreeSet<NodeIndex>], kappa: usize) -> Result<bool> {
    let covered: BTreeSet<NodeIndex> = covers.iter().flatten().copied().collect();
    if covered.len() != graph.node_count() || covered.iter().any(|&i| i >= graph.node_count()) {
        return Err(Error::InvalidArgument("subsets do not cover the node set".into()));
    }
    for cover in covers {
        let (sub, _) = graph.induced_subgraph(cover)?;
        if sub.is_empty() || !is_k_diagnosable(&sub, kappa)?.diagnosable {
            return Ok(true);
        }
    }
    Ok(is_k_diagnosable(graph, kappa)?.diagnosable)
}

/// Object-detection pipeline modules: camera, LIDAR, RADAR, fusion.
pub const OBJECT_DETECTION_MODULES: [&str; 4] = ["C", "L", "R", "F"];

/// Localization pipeline modules.
pub const LOCALIZATION_MODULES: [&str; 3] = ["GPS", "IMU", "POSE"];

/// Object-detection tests. The instantaneous set is R→F, F→L, L→R, R→C.
/// With `temporal`, every module also tests its own previous output, and each
/// instantaneous test gets a lag −1 mirror (the later source tests the
/// earlier target), which gives every node of a two-tick window in-degree 2.
pub fn object_detection_templates(temporal: bool) -> Vec<TestTemplate> {
    let cross = [("R", "F"), ("F", "L"), ("L", "R"), ("R", "C")];
    let mut out: Vec<TestTemplate> = cross
        .iter()
        .map(|(s, t)| TestTemplate::instant(s, t, TestKind::IoConsistency))
        .collect();
    if temporal {
        out.extend(OBJECT_DETECTION_MODULES.iter().map(|m| TestTemplate::temporal(m, m, 1)));
        out.extend(cross.iter().map(|(s, t)| TestTemplate::temporal(s, t, -1)));
    }
    out
}

/// Localization tests: IMU→POSE, POSE→GPS, GPS→IMU, plus each module
/// testing its own previous output when `temporal`.
pub fn localization_templates(temporal: bool) -> Vec<TestTemplate> {
    let mut out = vec![
        TestTemplate::instant("IMU", "POSE", TestKind::InputOutput),
        TestTemplate::instant("POSE", "GPS", TestKind::IoConsistency),
        TestTemplate::instant("GPS", "IMU", TestKind::InputAdmissibility),
    ];
    if temporal {
        out.extend(LOCALIZATION_MODULES.iter().map(|m| TestTemplate::temporal(m, m, 1)));
    }
    out
}

pub fn module_names(names: &[&str]) -> Vec<String> {
    names.iter().map(|s| s.to_string()).collect()
}

/// A complete window emitted by [`StreamAssembler`]: the graph plus one
/// payload per node, indexed like the graph's nodes.
#[derive(Debug, Clone)]
pub struct WindowInstance<P> {
    pub graph: TemporalDiagnosticGraph,
    pub payloads: Vec<P>,
}

impl<P> WindowInstance<P> {
    pub fn payload(&self, module: &str, tick: i64) -> Option<&P> {
        self.graph.node_index(module, tick).map(|i| &self.payloads[i])
    }
}

/// Assembles temporal graphs from a stream of `(module, tick, payload)`
/// events over a sliding window of `window_length` ticks ending at the
/// latest tick seen. Each slot keeps the latest payload; after every
/// accepted event, a [`WindowInstance`] is emitted if all slots of the
/// current window are filled.
#[derive(Debug)]
pub struct StreamAssembler<P> {
    modules: Vec<String>,
    templates: Vec<TestTemplate>,
    window_length: i64,
    head: Option<i64>,
    slots: BTreeMap<(i64, usize), P>,
    stale: usize,
    unknown: usize,
}

impl<P: Clone> StreamAssembler<P> {
    pub fn new(modules: Vec<String>, templates: Vec<TestTemplate>, window_length: usize) -> Result<Self> {
        if window_length == 0 {
            return Err(Error::InvalidArgument("window length must be at least one tick".into()));
        }
        // validates template references once, up front
        build_temporal_graph(&modules, &templates, (0, window_length as i64 - 1))?;
        Ok(Self {
            modules,
            templates,
            window_length: window_length as i64,
            head: None,
            slots: BTreeMap::new(),
            stale: 0,
            unknown: 0,
        })
    }

    /// Events dropped because their tick fell before the current window.
    pub fn stale_dropped(&self) -> usize {
        self.stale
    }

    pub fn unknown_dropped(&self) -> usize {
        self.unknown
    }

    pub fn window(&self) -> Option<(i64, i64)> {
        self.head.map(|h| (h - self.window_length + 1, h))
    }

    pub fn push(&mut self, module: &str, tick: i64, payload: P) -> Result<Option<WindowInstance<P>>> {
        let Some(m) = self.modules.iter().position(|x| x == module) else {
            self.unknown += 1;
            return Ok(None);
        };
        match self.head {
            Some(h) if tick < h - self.window_length + 1 => {
                self.stale += 1;
                return Ok(None);
            }
            Some(h) if tick <= h => {}
            _ => {
                self.head = Some(tick);
                let start = tick - self.window_length + 1;
                self.slots.retain(|&(t, _), _| t >= start);
            }
        }
        self.slots.insert((tick, m), payload);
        self.emit()
    }

    fn emit(&self) -> Result<Option<WindowInstance<P>>> {
        let (a, b) = self.window().expect("head set by push");
        let mut payloads = Vec::with_capacity(self.modules.len() * self.window_length as usize);
        for t in a..=b {
            for m in 0..self.modules.len() {
                match self.slots.get(&(t, m)) {
                    Some(p) => payloads.push(p.clone()),
                    None => return Ok(None),
                }
            }
        }
        let graph = build_temporal_graph(&self.modules, &self.templates, (a, b))?;
        Ok(Some(WindowInstance { graph, payloads }))
    }
}

/// Replays `events` through a fresh [`StreamAssembler`], collecting every
/// emitted window. Also returns the number of stale events dropped.
pub fn stream_assemble<P: Clone>(
    modules: Vec<String>,
    templates: Vec<TestTemplate>,
    window_length: usize,
    events: impl IntoIterator<Item = (String, i64, P)>,
) -> Result<(Vec<WindowInstance<P>>, usize)> {
    let mut asm = StreamAssembler::new(modules, templates, window_length)?;
    let mut out = Vec::new();
    for (module, tick, payload) in events {
        if let Some(w) = asm.push(&module, tick, payload)? {
            out.push(w);
        }
    }
    Ok((out, asm.stale_dropped()))
}
