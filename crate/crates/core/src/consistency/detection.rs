//! Pairwise consistency of obstacle lists from two perception sources.
//!
//! For sources A and B, an obstacle of A is unexplained when it lies inside
//! B's field of view (centroid test) but has no approximate match among B's
//! obstacles. The test fails when either direction leaves an unexplained
//! obstacle. Severity grades the unexplained set by where it sits on the
//! road: anything overlapping the ego lane is high, anything else on the map
//! is low.

use serde::{Deserialize, Serialize};

use super::geometry::{distance, ConvexPolygon};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Obstacle {
    pub id: String,
    #[serde(rename = "polygon")]
    pub footprint: ConvexPolygon,
    #[serde(default = "full_confidence")]
    pub confidence: f64,
}

fn full_confidence() -> f64 {
    1.0
}

impl Obstacle {
    pub fn new(id: impl Into<String>, footprint: ConvexPolygon) -> Self {
        Self {
            id: id.into(),
            footprint,
            confidence: 1.0,
        }
    }
}

/// One source's output at one time: obstacles plus the region it observes,
/// both expressed in `frame`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensorView {
    pub frame: String,
    pub obstacles: Vec<Obstacle>,
    pub fov: ConvexPolygon,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LaneMap {
    pub frame: String,
    pub current_lane: ConvexPolygon,
    pub map: Vec<ConvexPolygon>,
}

impl LaneMap {
    /// Every vertex of the current lane must lie on some map polygon.
    pub fn new(frame: impl Into<String>, current_lane: ConvexPolygon, map: Vec<ConvexPolygon>) -> Result<Self> {
        for v in current_lane.vertices() {
            if !map.iter().any(|m| m.contains(*v)) {
                return Err(Error::InvalidArgument(format!(
                    "current lane vertex ({}, {}) lies outside the map",
                    v[0], v[1]
                )));
            }
        }
        Ok(Self {
            frame: frame.into(),
            current_lane,
            map,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MatchMode {
    /// Distance between centroids.
    #[default]
    Centroid,
    /// `1 - IoU` of the footprints.
    AreaOverlap,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct MatchConfig {
    pub mode: MatchMode,
    /// `None` scales the threshold to the larger footprint: half its diameter
    /// for centroid matching, 0.5 for area overlap.
    pub dist_threshold: Option<f64>,
    /// Unexplained obstacles below this confidence are not reported.
    pub min_confidence: Option<f64>,
}

impl MatchConfig {
    pub fn validate(&self) -> Result<()> {
        if let Some(t) = self.dist_threshold {
            if !(t.is_finite() && t > 0.0) {
                return Err(Error::InvalidArgument(format!("dist_threshold must be positive, got {t}")));
            }
        }
        if let Some(c) = self.min_confidence {
            if !(0.0..=1.0).contains(&c) {
                return Err(Error::InvalidArgument(format!("min_confidence must be in [0, 1], got {c}")));
            }
        }
        Ok(())
    }

    fn threshold(&self, a: &ConvexPolygon, b: &ConvexPolygon) -> f64 {
        self.dist_threshold.unwrap_or_else(|| match self.mode {
            MatchMode::Centroid => a.diameter().max(b.diameter()) / 2.0,
            MatchMode::AreaOverlap => 0.5,
        })
    }

    pub fn distance(&self, a: &ConvexPolygon, b: &ConvexPolygon) -> f64 {
        match self.mode {
            MatchMode::Centroid => distance(a.centroid(), b.centroid()),
            MatchMode::AreaOverlap => 1.0 - a.iou(b),
        }
    }

    pub fn matches(&self, a: &ConvexPolygon, b: &ConvexPolygon) -> bool {
        self.distance(a, b) <= self.threshold(a, b)
    }
}

/// Ordered `None < Low < High`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Severity {
    #[default]
    None,
    Low,
    High,
}

impl std::fmt::Display for Severity {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Severity::None => "NONE",
            Severity::Low => "LOW",
            Severity::High => "HIGH",
        })
    }
}

/// Approximate membership: some element of `set` lies within the match
/// threshold of `o`.
pub fn approx_member(o: &Obstacle, set: &[Obstacle], cfg: &MatchConfig) -> bool {
    set.iter().any(|s| cfg.matches(&o.footprint, &s.footprint))
}

/// Which side of the test an unexplained obstacle came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    A,
    B,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Unexplained {
    pub side: Side,
    pub obstacle: Obstacle,
    pub severity: Severity,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DetectionOutcome {
    pub failed: bool,
    pub severity: Severity,
    pub unexplained: Vec<Unexplained>,
}

/// Severity of a single obstacle against the lane map.
pub fn grade(o: &Obstacle, lanes: &LaneMap) -> Severity {
    if o.footprint.intersects(&lanes.current_lane) {
        Severity::High
    } else if lanes.map.iter().any(|m| o.footprint.intersects(m)) {
        Severity::Low
    } else {
        Severity::None
    }
}

fn unexplained_one_way(from: &SensorView, against: &SensorView, cfg: &MatchConfig) -> Vec<Obstacle> {
    from.obstacles
        .iter()
        .filter(|o| against.fov.contains(o.footprint.centroid()))
        .filter(|o| !approx_member(o, &against.obstacles, cfg))
        .filter(|o| cfg.min_confidence.is_none_or(|c| o.confidence >= c))
        .cloned()
        .collect()
}

fn check_frame(expected: &str, found: &str) -> Result<()> {
    if expected != found {
        return Err(Error::FrameMismatch {
            expected: expected.to_string(),
            found: found.to_string(),
        });
    }
    Ok(())
}

/// Compare two views. Fails when the union of unexplained obstacles in both
/// directions is non-empty.
pub fn object_detection_test(
    a: &SensorView,
    b: &SensorView,
    lanes: &LaneMap,
    cfg: &MatchConfig,
) -> Result<DetectionOutcome> {
    cfg.validate()?;
    check_frame(&a.frame, &b.frame)?;
    check_frame(&a.frame, &lanes.frame)?;
    let mut unexplained: Vec<Unexplained> = unexplained_one_way(a, b, cfg)
        .into_iter()
        .map(|o| (Side::A, o))
        .chain(unexplained_one_way(b, a, cfg).into_iter().map(|o| (Side::B, o)))
        .map(|(side, obstacle)| Unexplained {
            side,
            severity: grade(&obstacle, lanes),
            obstacle,
        })
        .collect();
    unexplained.sort_by(|x, y| {
        y.severity
            .cmp(&x.severity)
            .then_with(|| x.side.cmp(&y.side))
            .then_with(|| x.obstacle.id.cmp(&y.obstacle.id))
    });
    let severity = unexplained.iter().map(|u| u.severity).max().unwrap_or_default();
    Ok(DetectionOutcome {
        failed: !unexplained.is_empty(),
        severity,
        unexplained,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sq(x: f64, y: f64, side: f64) -> ConvexPolygon {
        ConvexPolygon::square([x, y], side).unwrap()
    }

    fn lanes() -> LaneMap {
        LaneMap::new(
            "world",
            ConvexPolygon::rect(0.0, -2.0, 100.0, 2.0).unwrap(),
            vec![
                ConvexPolygon::rect(0.0, -2.0, 100.0, 6.0).unwrap(),
                ConvexPolygon::rect(0.0, 6.0, 100.0, 9.0).unwrap(),
            ],
        )
        .unwrap()
    }

    fn view(obstacles: Vec<Obstacle>) -> SensorView {
        SensorView {
            frame: "world".into(),
            obstacles,
            fov: ConvexPolygon::rect(0.0, -20.0, 80.0, 20.0).unwrap(),
        }
    }

    #[test]
    fn identical_lists_pass() {
        let obs = vec![Obstacle::new("car", sq(30.0, 0.0, 2.0))];
        let r = object_detection_test(&view(obs.clone()), &view(obs), &lanes(), &MatchConfig::default()).unwrap();
        assert!(!r.failed);
        assert_eq!(r.severity, Severity::None);
    }

    #[test]
    fn missed_in_lane_obstacle_is_high() {
        let truck = Obstacle::new("truck", ConvexPolygon::rect(40.0, -1.2, 48.0, 1.2).unwrap());
        let r = object_detection_test(&view(vec![truck]), &view(vec![]), &lanes(), &MatchConfig::default()).unwrap();
        assert!(r.failed);
        assert_eq!(r.severity, Severity::High);
        assert_eq!(r.unexplained[0].side, Side::A);
    }

    #[test]
    fn phantom_on_sidewalk_is_low() {
        let ghost = Obstacle::new("ghost", sq(30.0, 7.5, 1.0));
        let r = object_detection_test(&view(vec![]), &view(vec![ghost]), &lanes(), &MatchConfig::default()).unwrap();
        assert!(r.failed);
        assert_eq!(r.severity, Severity::Low);
        assert_eq!(r.unexplained[0].side, Side::B);
    }

    #[test]
    fn off_map_discrepancy_is_none() {
        let tree = Obstacle::new("tree", sq(30.0, 15.0, 1.0));
        let r = object_detection_test(&view(vec![tree]), &view(vec![]), &lanes(), &MatchConfig::default()).unwrap();
        assert!(r.failed);
        assert_eq!(r.severity, Severity::None);
    }

    #[test]
    fn outside_other_fov_is_not_unexplained() {
        let far = Obstacle::new("far", sq(90.0, 0.0, 2.0));
        let r = object_detection_test(&view(vec![far]), &view(vec![]), &lanes(), &MatchConfig::default()).unwrap();
        assert!(!r.failed);
    }

    #[test]
    fn match_threshold_boundary() {
        // centroids 1.0 apart, both diameters sqrt(2)*2
        let a = Obstacle::new("a", sq(10.0, 0.0, 2.0));
        let b = Obstacle::new("b", sq(11.0, 0.0, 2.0));
        let exact = MatchConfig {
            dist_threshold: Some(1.0),
            ..Default::default()
        };
        assert!(approx_member(&a, std::slice::from_ref(&b), &exact));
        let tight = MatchConfig {
            dist_threshold: Some(1.0 - 1e-9),
            ..Default::default()
        };
        assert!(!approx_member(&a, std::slice::from_ref(&b), &tight));
        let scaled = MatchConfig::default();
        assert!(approx_member(&a, std::slice::from_ref(&b), &scaled));
        let far = Obstacle::new("far", sq(10.0 + 2f64.sqrt() + 1e-6, 0.0, 2.0));
        assert!(!approx_member(&a, &[far], &scaled));
    }

    #[test]
    fn area_overlap_mode() {
        let cfg = MatchConfig {
            mode: MatchMode::AreaOverlap,
            ..Default::default()
        };
        let a = Obstacle::new("a", sq(0.0, 0.0, 1.0));
        let b = Obstacle::new("b", sq(0.2, 0.0, 1.0));
        let c = Obstacle::new("c", sq(0.6, 0.0, 1.0));
        assert!(approx_member(&a, &[b], &cfg));
        assert!(!approx_member(&a, &[c], &cfg));
    }

    #[test]
    fn low_confidence_suppressed_when_configured() {
        let mut ghost = Obstacle::new("ghost", sq(30.0, 0.0, 1.0));
        ghost.confidence = 0.2;
        let cfg = MatchConfig {
            min_confidence: Some(0.5),
            ..Default::default()
        };
        let r = object_detection_test(&view(vec![ghost.clone()]), &view(vec![]), &lanes(), &cfg).unwrap();
        assert!(!r.failed);
        let r = object_detection_test(&view(vec![ghost]), &view(vec![]), &lanes(), &MatchConfig::default()).unwrap();
        assert!(r.failed);
    }

    #[test]
    fn frame_mismatch_and_bad_config() {
        let mut other = view(vec![]);
        other.frame = "ego".into();
        assert!(matches!(
            object_detection_test(&view(vec![]), &other, &lanes(), &MatchConfig::default()),
            Err(Error::FrameMismatch { .. })
        ));
        let bad = MatchConfig {
            dist_threshold: Some(0.0),
            ..Default::default()
        };
        assert!(object_detection_test(&view(vec![]), &view(vec![]), &lanes(), &bad).is_err());
        assert!(LaneMap::new("w", sq(0.0, 0.0, 1.0), vec![sq(10.0, 0.0, 1.0)]).is_err());
    }

    #[test]
    fn severity_order() {
        assert!(Severity::None < Severity::Low && Severity::Low < Severity::High);
        assert_eq!(serde_json::to_string(&Severity::High).unwrap(), "\"HIGH\"");
    }

    fn arb_obstacles() -> impl Strategy<Value = Vec<Obstacle>> {
        proptest::collection::vec((0.0..100.0f64, -25.0..25.0f64, 0.5..4.0f64), 0..6).prop_map(|v| {
            v.into_iter()
                .enumerate()
                .map(|(k, (x, y, s))| Obstacle::new(format!("o{k}"), sq(x, y, s)))
                .collect()
        })
    }

    fn multiset(r: &DetectionOutcome, flip: bool) -> Vec<(Side, String, Severity)> {
        let mut v: Vec<_> = r
            .unexplained
            .iter()
            .map(|u| {
                let side = match (u.side, flip) {
                    (s, false) => s,
                    (Side::A, true) => Side::B,
                    (Side::B, true) => Side::A,
                };
                (side, u.obstacle.id.clone(), u.severity)
            })
            .collect();
        v.sort();
        v
    }

    proptest! {
        #[test]
        fn symmetric_in_arguments(a in arb_obstacles(), b in arb_obstacles()) {
            let cfg = MatchConfig::default();
            let ab = object_detection_test(&view(a.clone()), &view(b.clone()), &lanes(), &cfg).unwrap();
            let ba = object_detection_test(&view(b), &view(a), &lanes(), &cfg).unwrap();
            prop_assert_eq!(ab.failed, ba.failed);
            prop_assert_eq!(ab.severity, ba.severity);
            prop_assert_eq!(multiset(&ab, false), multiset(&ba, true));
        }

        #[test]
        fn larger_threshold_never_adds_unexplained(
            a in arb_obstacles(), b in arb_obstacles(), t in 0.1..5.0f64, dt in 0.0..5.0f64
        ) {
            let lo = MatchConfig { dist_threshold: Some(t), ..Default::default() };
            let hi = MatchConfig { dist_threshold: Some(t + dt), ..Default::default() };
            let r_lo = object_detection_test(&view(a.clone()), &view(b.clone()), &lanes(), &lo).unwrap();
            let r_hi = object_detection_test(&view(a), &view(b), &lanes(), &hi).unwrap();
            let lo_set = multiset(&r_lo, false);
            for u in multiset(&r_hi, false) {
                prop_assert!(lo_set.contains(&u));
            }
            prop_assert!(r_hi.failed <= r_lo.failed);
        }

        #[test]
        fn severity_is_max_over_unexplained(a in arb_obstacles(), b in arb_obstacles()) {
            let r = object_detection_test(&view(a), &view(b), &lanes(), &MatchConfig::default()).unwrap();
            let l = lanes();
            let mut expected = Severity::None;
            for u in &r.unexplained {
                // oracle: direct area checks against each lane polygon
                let in_lane = u.obstacle.footprint.intersection_area(&l.current_lane) > 1e-9;
                let on_map = l.map.iter().any(|m| u.obstacle.footprint.intersection_area(m) > 1e-9);
                let s = if in_lane { Severity::High } else if on_map { Severity::Low } else { Severity::None };
                expected = expected.max(s);
            }
            prop_assert_eq!(r.severity, expected);
            prop_assert_eq!(r.failed, !r.unexplained.is_empty());
        }
    }
}
