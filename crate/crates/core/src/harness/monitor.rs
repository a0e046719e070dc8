//! Trace replay through the sliding-window assembler.
//!
//! Records are bucketed into `(module, tick)` batches. A batch is handed to
//! the assembler once a record from a later tick arrives, so every slot sees
//! the complete tick. Each emitted window is turned into a syndrome by
//! evaluating the consistency function behind every edge, then identified.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::consistency::{
    gps_gps_test, gps_imu_test, imu_imu_test, imu_pose_test, object_detection_test, pose_gps_test, pose_pose_test,
    ConvexPolygon, ImuSample, KinematicLimits, LaneMap, MatchConfig, SensorView, Severity, StateSample,
};
use crate::diagnosability::max_diagnosability;
use crate::error::{Error, Result};
use crate::graph::{detect, NodeLabel, Syndrome};
use crate::identification::{identify_escalating, IdentificationResult, Status};
use crate::temporal::{
    localization_templates, module_names, object_detection_templates, parse_templates, write_templates,
    StreamAssembler, TestKind, TestTemplate, WindowInstance, LOCALIZATION_MODULES, OBJECT_DETECTION_MODULES,
};

use super::trace::{parse_trace, TraceRecord};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Pipeline {
    Localization,
    ObjectDetection,
}

impl Pipeline {
    pub fn modules(self) -> Vec<String> {
        match self {
            Self::Localization => module_names(&LOCALIZATION_MODULES),
            Self::ObjectDetection => module_names(&OBJECT_DETECTION_MODULES),
        }
    }

    pub fn default_templates(self, temporal: bool) -> Vec<TestTemplate> {
        match self {
            Self::Localization => localization_templates(temporal),
            Self::ObjectDetection => object_detection_templates(temporal),
        }
    }
}

/// Road layout and sensor coverage for the object-detection pipeline.
/// Fields of view are given in the vehicle frame and placed in `frame`
/// using the latest pose record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometryConfig {
    #[serde(default = "world")]
    pub frame: String,
    pub current_lane: ConvexPolygon,
    pub map: Vec<ConvexPolygon>,
    pub fov: BTreeMap<String, ConvexPolygon>,
}

fn world() -> String {
    "world".into()
}

fn one() -> usize {
    1
}

fn tenth() -> f64 {
    0.1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MonitorConfig {
    pub pipeline: Pipeline,
    /// Window length in ticks.
    #[serde(default = "one")]
    pub slots: usize,
    /// Seconds per tick.
    #[serde(default = "tenth")]
    pub tick_period: f64,
    /// Template lines overriding the pipeline defaults (which include the
    /// temporal tests whenever `slots > 1`).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub templates: Option<String>,
    #[serde(default)]
    pub limits: KinematicLimits,
    #[serde(default)]
    pub matching: MatchConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub geometry: Option<GeometryConfig>,
}

impl MonitorConfig {
    pub fn new(pipeline: Pipeline, slots: usize) -> Self {
        Self {
            pipeline,
            slots,
            tick_period: 0.1,
            templates: None,
            limits: KinematicLimits::default(),
            matching: MatchConfig::default(),
            geometry: None,
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn resolved_templates(&self) -> Result<Vec<TestTemplate>> {
        match &self.templates {
            Some(text) => parse_templates(text),
            None => Ok(self.pipeline.default_templates(self.slots > 1)),
        }
    }
}

/// Data held by one `(module, tick)` slot.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", content = "data", rename_all = "snake_case")]
pub enum Payload {
    Gps(Vec<StateSample>),
    Imu(Vec<ImuSample>),
    Pose(Vec<StateSample>),
    Obstacles(SensorView),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FailingEdge {
    pub tester: NodeLabel,
    pub tested: NodeLabel,
    pub kind: TestKind,
    pub severity: Severity,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentificationSummary {
    pub status: Status,
    /// The identified set when unique, empty otherwise.
    pub faults: Vec<NodeLabel>,
    /// Consistent sets within `bound`, capped.
    pub candidates: Vec<Vec<NodeLabel>>,
    pub candidates_count: usize,
    pub kappa: usize,
    pub bound: usize,
    pub elapsed_us: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FaultReport {
    pub window: (i64, i64),
    pub detected: bool,
    pub severity: Severity,
    pub identification: IdentificationSummary,
    pub failing_edges: Vec<FailingEdge>,
    /// Ground-truth faulty nodes, when the trace records them.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub injected: Vec<NodeLabel>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct MonitorStats {
    pub records: usize,
    pub skipped_records: usize,
    /// Records that do not belong to the configured pipeline.
    pub ignored_records: usize,
    pub stale_dropped: usize,
    pub windows: usize,
    pub kappa: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct MonitorRun {
    pub reports: Vec<FaultReport>,
    pub windows: Vec<WindowInstance<Payload>>,
    pub stats: MonitorStats,
}

impl MonitorRun {
    pub fn zero_timing(&mut self) {
        for r in &mut self.reports {
            r.identification.elapsed_us = 0.0;
        }
    }

    pub fn reports_jsonl(&self) -> String {
        let mut out = String::new();
        for r in &self.reports {
            out.push_str(&serde_json::to_string(r).expect("reports serialize"));
            out.push('\n');
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgeOutcome {
    pub failed: bool,
    pub severity: Severity,
}

/// A validated monitor ready to replay traces.
#[derive(Debug, Clone)]
pub struct Monitor {
    config: MonitorConfig,
    modules: Vec<String>,
    templates: Vec<TestTemplate>,
    lanes: Option<LaneMap>,
}

fn tick_of(t: f64, period: f64) -> i64 {
    (t / period + 1e-9).floor() as i64
}

fn sorted_unique<T: Copy>(mut v: Vec<T>, time: impl Fn(&T) -> f64) -> Vec<T> {
    v.sort_by(|a, b| time(a).total_cmp(&time(b)));
    // keep the last sample at each timestamp
    let mut out: Vec<T> = Vec::with_capacity(v.len());
    for s in v {
        match out.last_mut() {
            Some(last) if time(last) == time(&s) => *last = s,
            _ => out.push(s),
        }
    }
    out
}

fn imu_between(imu: &[ImuSample], t1: f64, t2: f64) -> Vec<ImuSample> {
    imu.iter().copied().filter(|s| s.t >= t1 && s.t <= t2).collect()
}

impl Monitor {
    pub fn new(config: MonitorConfig) -> Result<Self> {
        if config.slots == 0 {
            return Err(Error::Config("slots must be at least 1".into()));
        }
        if !(config.tick_period.is_finite() && config.tick_period > 0.0) {
            return Err(Error::Config("tick_period must be positive".into()));
        }
        config.limits.validate().map_err(|e| Error::Config(e.to_string()))?;
        config.matching.validate().map_err(|e| Error::Config(e.to_string()))?;
        let modules = config.pipeline.modules();
        let templates = config.resolved_templates()?;
        // rejects unknown modules and self-loops
        StreamAssembler::<()>::new(modules.clone(), templates.clone(), config.slots)
            .map_err(|e| Error::Config(e.to_string()))?;

        let lanes = match config.pipeline {
            Pipeline::Localization => {
                if let Some(t) = templates.iter().find(|t| !localization_supported(t)) {
                    return Err(Error::Config(format!(
                        "no localization consistency test for {} -> {} at lag {}",
                        t.source_module, t.target_module, t.lag
                    )));
                }
                None
            }
            Pipeline::ObjectDetection => {
                let geo = config
                    .geometry
                    .as_ref()
                    .ok_or_else(|| Error::Config("object-detection pipeline needs a [geometry] section".into()))?;
                if let Some(m) = modules.iter().find(|m| !geo.fov.contains_key(*m)) {
                    return Err(Error::Config(format!("no field of view configured for sensor `{m}`")));
                }
                Some(
                    LaneMap::new(geo.frame.clone(), geo.current_lane.clone(), geo.map.clone())
                        .map_err(|e| Error::Config(e.to_string()))?,
                )
            }
        };
        Ok(Self {
            config,
            modules,
            templates,
            lanes,
        })
    }

    pub fn config(&self) -> &MonitorConfig {
        &self.config
    }

    pub fn templates(&self) -> &[TestTemplate] {
        &self.templates
    }

    /// Re-evaluates the consistency function behind edge `edge` of `window`.
    pub fn evaluate_edge(&self, window: &WindowInstance<Payload>, edge: usize) -> Result<EdgeOutcome> {
        let graph = &window.graph.graph;
        let (i, j) = graph.edges()[edge];
        let template = &self.templates[window.graph.edge_templates[edge]];
        let (src, dst) = (&window.payloads[i], &window.payloads[j]);
        match (src, dst) {
            (Payload::Obstacles(a), Payload::Obstacles(b)) => {
                let lanes = self.lanes.as_ref().expect("object-detection monitor has lanes");
                let r = object_detection_test(a, b, lanes, &self.config.matching)?;
                Ok(EdgeOutcome {
                    failed: r.failed,
                    severity: r.severity,
                })
            }
            _ => {
                let failed = self.evaluate_kinematic(template, src, dst)?;
                // kinematic tests carry no road-position grading
                Ok(EdgeOutcome {
                    failed,
                    severity: if failed { Severity::High } else { Severity::None },
                })
            }
        }
    }

    fn evaluate_kinematic(&self, template: &TestTemplate, src: &Payload, dst: &Payload) -> Result<bool> {
        let lim = &self.config.limits;
        let mut failed = false;
        match (src, dst, template.lag) {
            (Payload::Imu(imu), Payload::Pose(pose), 0) => {
                for w in pose.windows(2) {
                    let between = imu_between(imu, w[0].t, w[1].t);
                    if !between.is_empty() {
                        failed |= imu_pose_test(&w[0], &w[1], &between, lim)?;
                    }
                }
            }
            (Payload::Pose(pose), Payload::Gps(gps), 0) => {
                for g in gps {
                    let nearest = pose
                        .iter()
                        .min_by(|a, b| (a.t - g.t).abs().total_cmp(&(b.t - g.t).abs()));
                    if let Some(p) = nearest {
                        failed |= pose_gps_test(p, g, lim);
                    }
                }
            }
            (Payload::Gps(gps), Payload::Imu(imu), 0) => {
                for w in gps.windows(2) {
                    let between = imu_between(imu, w[0].t, w[1].t);
                    if !between.is_empty() {
                        failed |= gps_imu_test(&w[0], &w[1], &between, lim)?;
                    }
                }
            }
            (Payload::Gps(prev), Payload::Gps(cur), 1) | (Payload::Pose(prev), Payload::Pose(cur), 1) => {
                let is_gps = matches!(src, Payload::Gps(_));
                let chain: Vec<&StateSample> = prev.last().into_iter().chain(cur.iter()).collect();
                for w in chain.windows(2) {
                    failed |= if is_gps {
                        gps_gps_test(w[0], w[1], lim)
                    } else {
                        pose_pose_test(w[0], w[1], lim)
                    };
                }
            }
            (Payload::Imu(prev), Payload::Imu(cur), 1) => {
                let chain: Vec<&ImuSample> = prev.last().into_iter().chain(cur.iter()).collect();
                for w in chain.windows(2) {
                    failed |= imu_imu_test(w[0], w[1], lim)?;
                }
            }
            _ => {
                return Err(Error::Config(format!(
                    "no consistency test for {} -> {} at lag {}",
                    template.source_module, template.target_module, template.lag
                )))
            }
        }
        Ok(failed)
    }

    fn payload_for(&self, module: &str, record: &TraceRecord, ego: ([f64; 2], f64)) -> Option<Payload> {
        match (self.config.pipeline, record) {
            (Pipeline::Localization, TraceRecord::Gps { t, p, v }) if module == "GPS" => {
                Some(Payload::Gps(vec![StateSample { t: *t, p: *p, v: *v }]))
            }
            (Pipeline::Localization, TraceRecord::Pose { t, p, v, .. }) if module == "POSE" => {
                Some(Payload::Pose(vec![StateSample { t: *t, p: *p, v: *v }]))
            }
            (Pipeline::Localization, TraceRecord::Imu { t, a }) if module == "IMU" => {
                Some(Payload::Imu(vec![ImuSample { t: *t, a: *a }]))
            }
            (Pipeline::ObjectDetection, TraceRecord::Obstacles { obstacles, .. }) => {
                let geo = self.config.geometry.as_ref()?;
                let fov = geo.fov.get(module)?.transformed(ego.0, ego.1);
                Some(Payload::Obstacles(SensorView {
                    frame: geo.frame.clone(),
                    obstacles: obstacles.clone(),
                    fov,
                }))
            }
            _ => None,
        }
    }

    fn record_module<'r>(&self, record: &'r TraceRecord) -> Option<&'r str> {
        match (self.config.pipeline, record) {
            (Pipeline::Localization, TraceRecord::Gps { .. }) => Some("GPS"),
            (Pipeline::Localization, TraceRecord::Imu { .. }) => Some("IMU"),
            (Pipeline::Localization, TraceRecord::Pose { .. }) => Some("POSE"),
            (Pipeline::ObjectDetection, TraceRecord::Obstacles { sensor, .. }) => Some(sensor.as_str()),
            _ => None,
        }
    }

    pub fn run_text(&self, text: &str) -> Result<MonitorRun> {
        let (records, skipped) = parse_trace(text);
        let mut run = self.run(&records)?;
        run.stats.skipped_records = skipped.len();
        Ok(run)
    }

    pub fn run(&self, records: &[TraceRecord]) -> Result<MonitorRun> {
        let period = self.config.tick_period;
        let mut asm = StreamAssembler::new(self.modules.clone(), self.templates.clone(), self.config.slots)?;
        let mut pending: BTreeMap<(i64, usize), Payload> = BTreeMap::new();
        let mut injected: BTreeSet<NodeLabel> = BTreeSet::new();
        let mut ego = ([0.0, 0.0], 0.0);
        let mut stats = MonitorStats {
            records: records.len(),
            ..Default::default()
        };
        let mut windows = Vec::new();

        let flush = |pending: &mut BTreeMap<(i64, usize), Payload>,
                         below: Option<i64>,
                         asm: &mut StreamAssembler<Payload>,
                         windows: &mut Vec<WindowInstance<Payload>>|
         -> Result<()> {
            while let Some(entry) = pending.first_entry() {
                let (tick, m) = *entry.key();
                if below.is_some_and(|b| tick >= b) {
                    break;
                }
                let payload = entry.remove();
                if let Some(w) = asm.push(&self.modules[m], tick, payload)? {
                    windows.push(w);
                }
            }
            Ok(())
        };

        for record in records {
            match record {
                TraceRecord::FaultWindow {
                    modules, t_start, t_end, ..
                } => {
                    for tick in tick_of(*t_start, period)..=tick_of(*t_end, period) {
                        injected.extend(modules.iter().map(|m| NodeLabel::new(m.clone(), tick)));
                    }
                    continue;
                }
                TraceRecord::Pose { p, heading, .. } if self.config.pipeline == Pipeline::ObjectDetection => {
                    ego = (*p, *heading);
                    continue;
                }
                _ => {}
            }
            let Some(m) = self
                .record_module(record)
                .and_then(|name| self.modules.iter().position(|x| x == name))
            else {
                stats.ignored_records += 1;
                continue;
            };
            let tick = tick_of(record.time(), period);
            flush(&mut pending, Some(tick), &mut asm, &mut windows)?;
            let Some(piece) = self.payload_for(&self.modules[m], record, ego) else {
                stats.ignored_records += 1;
                continue;
            };
            match (pending.get_mut(&(tick, m)), piece) {
                (Some(Payload::Gps(v)), Payload::Gps(new)) | (Some(Payload::Pose(v)), Payload::Pose(new)) => {
                    v.extend(new)
                }
                (Some(Payload::Imu(v)), Payload::Imu(new)) => v.extend(new),
                (_, piece) => {
                    pending.insert((tick, m), piece);
                }
            }
        }
        flush(&mut pending, None, &mut asm, &mut windows)?;
        stats.stale_dropped = asm.stale_dropped();

        for w in &mut windows {
            for p in &mut w.payloads {
                match p {
                    Payload::Gps(v) | Payload::Pose(v) => *v = sorted_unique(std::mem::take(v), |s| s.t),
                    Payload::Imu(v) => *v = sorted_unique(std::mem::take(v), |s| s.t),
                    Payload::Obstacles(_) => {}
                }
            }
        }

        let mut kappa = None;
        let mut reports = Vec::with_capacity(windows.len());
        for w in &windows {
            let graph = &w.graph.graph;
            let k = match kappa {
                Some(k) => k,
                None => {
                    let k = max_diagnosability(graph)?.kappa;
                    kappa = Some(k);
                    k
                }
            };
            let outcomes = (0..graph.edge_count())
                .map(|e| self.evaluate_edge(w, e))
                .collect::<Result<Vec<_>>>()?;
            let sigma = Syndrome::from_outcomes(graph, outcomes.iter().map(|o| o.failed).collect())?;
            let failing_edges: Vec<FailingEdge> = sigma
                .failing_edges()
                .map(|e| {
                    let (i, j) = graph.edges()[e];
                    FailingEdge {
                        tester: graph.nodes()[i].clone(),
                        tested: graph.nodes()[j].clone(),
                        kind: self.templates[w.graph.edge_templates[e]].kind,
                        severity: outcomes[e].severity,
                    }
                })
                .collect();
            let severity = failing_edges.iter().map(|f| f.severity).max().unwrap_or_default();
            let id = identify_escalating(graph, &sigma, k)?;
            reports.push(FaultReport {
                window: w.graph.window,
                detected: detect(&sigma),
                severity,
                identification: summarize(&id, graph.nodes(), k),
                failing_edges,
                injected: graph.nodes().iter().filter(|n| injected.contains(n)).cloned().collect(),
            });
        }
        stats.windows = windows.len();
        stats.kappa = kappa;
        Ok(MonitorRun {
            reports,
            windows,
            stats,
        })
    }

    /// Writes `config.toml`, `templates.txt`, `reports.jsonl` and
    /// `summary.json` into `dir`, creating it if needed.
    pub fn write_run_dir(&self, dir: &Path, run: &MonitorRun) -> std::io::Result<()> {
        std::fs::create_dir_all(dir)?;
        let snapshot = self.config.to_toml().map_err(std::io::Error::other)?;
        std::fs::write(dir.join("config.toml"), snapshot)?;
        std::fs::write(dir.join("templates.txt"), write_templates(&self.templates))?;
        std::fs::write(dir.join("reports.jsonl"), run.reports_jsonl())?;
        let summary = serde_json::to_string_pretty(&run.stats).map_err(std::io::Error::other)?;
        std::fs::write(dir.join("summary.json"), summary + "\n")
    }
}

fn localization_supported(t: &TestTemplate) -> bool {
    matches!(
        (t.source_module.as_str(), t.target_module.as_str(), t.lag),
        ("IMU", "POSE", 0) | ("POSE", "GPS", 0) | ("GPS", "IMU", 0) | ("GPS", "GPS", 1) | ("POSE", "POSE", 1) | ("IMU", "IMU", 1)
    )
}

fn summarize(id: &IdentificationResult, nodes: &[NodeLabel], kappa: usize) -> IdentificationSummary {
    let labels = |f: &crate::graph::FaultSet| f.iter().map(|i| nodes[i].clone()).collect::<Vec<_>>();
    IdentificationSummary {
        status: id.status,
        faults: id.fault_set.as_ref().map(labels).unwrap_or_default(),
        candidates: id.candidates.iter().map(labels).collect(),
        candidates_count: id.candidate_count,
        kappa,
        bound: id.bound,
        elapsed_us: id.elapsed_us,
    }
}

/// Convenience wrapper: validate `config` and replay `records`.
pub fn run_monitor(records: &[TraceRecord], config: &MonitorConfig) -> Result<MonitorRun> {
    Monitor::new(config.clone())?.run(records)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn loc_records(n_ticks: i64, jump_at: Option<f64>) -> Vec<TraceRecord> {
        let mut out = Vec::new();
        for k in 0..n_ticks * 10 {
            let t = k as f64 / 100.0;
            let x = 10.0 * t;
            let off = if jump_at.is_some_and(|j| (t - j).abs() < 1e-9) { 30.0 } else { 0.0 };
            if k % 2 == 0 {
                out.push(TraceRecord::Gps {
                    t,
                    p: [x + off, 0.0],
                    v: 10.0,
                });
            }
            out.push(TraceRecord::Imu { t, a: 0.0 });
            out.push(TraceRecord::Pose {
                t,
                p: [x, 0.0],
                v: 10.0,
                heading: 0.0,
            });
        }
        out
    }

    #[test]
    fn clean_localization_never_detects() {
        for slots in [1, 2] {
            let run = run_monitor(&loc_records(6, None), &MonitorConfig::new(Pipeline::Localization, slots)).unwrap();
            assert_eq!(run.reports.len(), 7 - slots);
            assert!(run.reports.iter().all(|r| !r.detected && r.severity == Severity::None));
            assert_eq!(run.stats.kappa, Some(1));
        }
    }

    #[test]
    fn gps_outlier_detected_in_its_tick() {
        let run = run_monitor(&loc_records(6, Some(0.32)), &MonitorConfig::new(Pipeline::Localization, 1)).unwrap();
        let flagged: Vec<_> = run.reports.iter().filter(|r| r.detected).map(|r| r.window).collect();
        assert_eq!(flagged, vec![(3, 3)]);
        let r = &run.reports[3];
        assert!(r.failing_edges.iter().any(|e| e.tested.module_id == "GPS"));
        // GPS alone explains POSE→GPS and GPS→IMU failing
        assert_eq!(r.identification.status, Status::Unique);
        assert_eq!(r.identification.faults, vec![NodeLabel::new("GPS", 3)]);
    }

    #[test]
    fn detected_reports_cite_reproducible_edges() {
        let monitor = Monitor::new(MonitorConfig::new(Pipeline::Localization, 2)).unwrap();
        let run = monitor.run(&loc_records(6, Some(0.32))).unwrap();
        assert!(run.reports.iter().any(|r| r.detected));
        for (report, window) in run.reports.iter().zip(&run.windows) {
            assert_eq!(report.detected, !report.failing_edges.is_empty());
            for e in &report.failing_edges {
                let g = &window.graph.graph;
                let k = g
                    .edge_index(g.index_of(&e.tester).unwrap(), g.index_of(&e.tested).unwrap())
                    .unwrap();
                assert!(monitor.evaluate_edge(window, k).unwrap().failed);
            }
        }
    }

    #[test]
    fn config_errors_are_fatal() {
        let mut c = MonitorConfig::new(Pipeline::Localization, 1);
        c.templates = Some("template GPS POSE 0 io-consistency\n".into());
        assert!(matches!(Monitor::new(c), Err(Error::Config(_))));
        assert!(Monitor::new(MonitorConfig::new(Pipeline::ObjectDetection, 1)).is_err());
        assert!(Monitor::new(MonitorConfig::new(Pipeline::Localization, 0)).is_err());
        assert!(MonitorConfig::from_toml("pipeline = \"radar\"").is_err());
    }

    #[test]
    fn toml_round_trip() {
        let mut c = MonitorConfig::new(Pipeline::Localization, 2);
        c.limits.pose_gps_gate = 2.0;
        let text = c.to_toml().unwrap();
        assert_eq!(MonitorConfig::from_toml(&text).unwrap(), c);
        let minimal = MonitorConfig::from_toml("pipeline = \"localization\"\n[limits]\ntau_p = 0.4\n").unwrap();
        assert_eq!(minimal.slots, 1);
        assert_eq!(minimal.limits.tau_p, 0.4);
        assert_eq!(minimal.limits.tau_v, 0.5);
    }

    #[test]
    fn malformed_lines_skipped_not_fatal() {
        let mut text = crate::harness::trace::write_trace(&loc_records(3, None));
        text.push_str("{broken\n");
        let monitor = Monitor::new(MonitorConfig::new(Pipeline::Localization, 1)).unwrap();
        let run = monitor.run_text(&text).unwrap();
        assert_eq!(run.stats.skipped_records, 1);
        assert_eq!(run.reports.len(), 3);
    }
}
