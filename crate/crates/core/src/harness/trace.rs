//! Line-delimited JSON sensor traces.
//!
//! ```text
//! {"type":"gps","t":0.02,"p":[1.0,2.0],"v":11.0}
//! {"type":"imu","t":0.01,"a":0.4}
//! {"type":"pose","t":0.01,"p":[1.0,2.0],"v":11.0,"heading":0.0}
//! {"type":"obstacles","sensor":"C","t":0.1,"obstacles":[{"id":"truck","polygon":[[0,0],[1,0],[1,1]],"confidence":0.9}]}
//! {"type":"fault_window","kind":"gps-spoof","modules":["GPS","POSE"],"t_start":3.0,"t_end":3.28}
//! ```
//!
//! `fault_window` records carry injected ground truth; the monitor uses them
//! only to annotate reports.

use serde::{Deserialize, Serialize};

use crate::consistency::{ImuSample, Obstacle, Point, StateSample};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum TraceRecord {
    Gps {
        t: f64,
        p: Point,
        v: f64,
    },
    Imu {
        t: f64,
        a: f64,
    },
    Pose {
        t: f64,
        p: Point,
        v: f64,
        #[serde(default, skip_serializing_if = "is_zero")]
        heading: f64,
    },
    Obstacles {
        sensor: String,
        t: f64,
        obstacles: Vec<Obstacle>,
    },
    FaultWindow {
        kind: String,
        modules: Vec<String>,
        t_start: f64,
        t_end: f64,
    },
}

fn is_zero(x: &f64) -> bool {
    *x == 0.0
}

impl TraceRecord {
    pub fn time(&self) -> f64 {
        match self {
            Self::Gps { t, .. } | Self::Imu { t, .. } | Self::Pose { t, .. } | Self::Obstacles { t, .. } => *t,
            Self::FaultWindow { t_start, .. } => *t_start,
        }
    }

    pub fn gps(s: StateSample) -> Self {
        Self::Gps { t: s.t, p: s.p, v: s.v }
    }

    pub fn pose(s: StateSample, heading: f64) -> Self {
        Self::Pose {
            t: s.t,
            p: s.p,
            v: s.v,
            heading,
        }
    }

    pub fn imu(s: ImuSample) -> Self {
        Self::Imu { t: s.t, a: s.a }
    }

    fn is_finite(&self) -> bool {
        match self {
            Self::Gps { t, p, v } | Self::Pose { t, p, v, .. } => t.is_finite() && p.iter().all(|c| c.is_finite()) && v.is_finite(),
            Self::Imu { t, a } => t.is_finite() && a.is_finite(),
            Self::Obstacles { t, .. } => t.is_finite(),
            Self::FaultWindow { t_start, t_end, .. } => t_start.is_finite() && t_end.is_finite() && t_start <= t_end,
        }
    }
}

/// Parsed records plus the line numbers of records that were skipped
/// (bad JSON, unknown type, degenerate polygon, non-finite values).
pub fn parse_trace(text: &str) -> (Vec<TraceRecord>, Vec<usize>) {
    let mut records = Vec::new();
    let mut skipped = Vec::new();
    for (k, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        match serde_json::from_str::<TraceRecord>(line) {
            Ok(r) if r.is_finite() => records.push(r),
            _ => skipped.push(k + 1),
        }
    }
    (records, skipped)
}

pub fn write_trace(records: &[TraceRecord]) -> String {
    let mut out = String::new();
    for r in records {
        out.push_str(&serde_json::to_string(r).expect("trace records serialize"));
        out.push('\n');
    }
    out
}
