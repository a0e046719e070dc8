//! Synthetic traces with injected faults.
//!
//! Clean sensor noise and fault parameters come from separate seeded
//! streams, so a fault that touches no sample leaves the trace identical to
//! its clean baseline.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::derive_seed;
use super::monitor::{GeometryConfig, MonitorConfig, Pipeline};
use super::trace::TraceRecord;
use crate::consistency::{ConvexPolygon, ImuSample, KinematicLimits, Obstacle, StateSample};
use crate::error::{Error, Result};

fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}

/// Spoofed GPS fixes are displaced by a random offset whose sign alternates
/// from one fix to the next; the pose estimator follows the latest fix with
/// `pose_gain`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SpoofParams {
    pub min_duration: f64,
    pub max_duration: f64,
    pub min_offset: f64,
    pub max_offset: f64,
    /// Alternate the offset sign on consecutive fixes.
    pub alternate: bool,
    /// Maximum error added to spoofed speeds (m/s).
    pub speed_error: f64,
    pub pose_gain: f64,
    /// Number of spoofing intervals, spread over the trace.
    pub count: usize,
}

impl Default for SpoofParams {
    fn default() -> Self {
        Self {
            min_duration: 0.1,
            max_duration: 0.4,
            min_offset: 20.0,
            max_offset: 50.0,
            alternate: true,
            speed_error: 2.0,
            pose_gain: 0.5,
            count: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LocalizationScenario {
    pub duration: f64,
    pub gps_rate: u32,
    pub imu_rate: u32,
    pub pose_rate: u32,
    /// Mean speed (m/s); the speed oscillates by `speed_amplitude` with
    /// angular frequency `speed_omega`.
    pub speed: f64,
    pub speed_amplitude: f64,
    pub speed_omega: f64,
    /// Direction of travel (rad).
    pub heading: f64,
    pub gps_noise: f64,
    pub pose_noise: f64,
    pub imu_noise: f64,
    pub spoof: Option<SpoofParams>,
}

impl Default for LocalizationScenario {
    fn default() -> Self {
        Self {
            duration: 20.0,
            gps_rate: 50,
            imu_rate: 100,
            pose_rate: 100,
            speed: 11.0,
            speed_amplitude: 1.0,
            speed_omega: 0.5,
            heading: 0.3,
            gps_noise: 0.01,
            pose_noise: 0.005,
            imu_noise: 0.01,
            spoof: Some(SpoofParams::default()),
        }
    }
}

/// Margin kept free of faults at both ends of a trace (s).
const EDGE_MARGIN: f64 = 1.0;

fn check_range(name: &str, lo: f64, hi: f64) -> Result<()> {
    if !(lo.is_finite() && hi.is_finite() && 0.0 <= lo && lo <= hi) {
        return Err(invalid(format!("{name}: need 0 <= min <= max, got [{lo}, {hi}]")));
    }
    Ok(())
}

/// Non-overlapping random intervals, one per equal segment of the usable span.
fn fault_intervals(rng: &mut ChaCha8Rng, duration: f64, count: usize, min: f64, max: f64) -> Result<Vec<(f64, f64)>> {
    let span = duration - 2.0 * EDGE_MARGIN;
    if count == 0 {
        return Ok(vec![]);
    }
    let seg = span / count as f64;
    if seg < max {
        return Err(invalid(format!(
            "{count} fault intervals of up to {max} s do not fit in a {duration} s trace"
        )));
    }
    Ok((0..count)
        .map(|k| {
            let d = if max > min { rng.gen_range(min..=max) } else { min };
            let lo = EDGE_MARGIN + k as f64 * seg;
            let start = if seg - d > 0.0 { rng.gen_range(lo..=lo + seg - d) } else { lo };
            (start, start + d)
        })
        .collect())
}

impl LocalizationScenario {
    pub fn validate(&self, lim: &KinematicLimits) -> Result<()> {
        if !(self.duration.is_finite() && self.duration > 2.0 * EDGE_MARGIN) {
            return Err(invalid(format!("duration must exceed {} s", 2.0 * EDGE_MARGIN)));
        }
        if self.gps_rate == 0 || self.imu_rate == 0 || self.pose_rate == 0 {
            return Err(invalid("sample rates must be positive"));
        }
        let (v, amp, w) = (self.speed, self.speed_amplitude, self.speed_omega);
        if !(amp >= 0.0 && w >= 0.0 && v - amp >= 0.0) {
            return Err(invalid("speed profile must stay non-negative"));
        }
        if v + amp > lim.v_max || amp * w > lim.a_max || amp * w * w > lim.j_max {
            return Err(invalid("speed profile violates the kinematic limits"));
        }
        for (name, x) in [
            ("gps_noise", self.gps_noise),
            ("pose_noise", self.pose_noise),
            ("imu_noise", self.imu_noise),
        ] {
            if !(x.is_finite() && x >= 0.0) {
                return Err(invalid(format!("{name} must be non-negative")));
            }
        }
        if let Some(s) = &self.spoof {
            check_range("spoof duration", s.min_duration, s.max_duration)?;
            check_range("spoof offset", s.min_offset, s.max_offset)?;
            if !(s.speed_error >= 0.0 && (0.0..=1.0).contains(&s.pose_gain)) {
                return Err(invalid("speed_error must be >= 0 and pose_gain in [0, 1]"));
            }
        }
        Ok(())
    }

    fn speed_at(&self, t: f64) -> f64 {
        self.speed + self.speed_amplitude * (self.speed_omega * t).sin()
    }

    fn accel_at(&self, t: f64) -> f64 {
        self.speed_amplitude * self.speed_omega * (self.speed_omega * t).cos()
    }

    fn position_at(&self, t: f64) -> [f64; 2] {
        let s = if self.speed_omega > 0.0 {
            self.speed * t + self.speed_amplitude / self.speed_omega * (1.0 - (self.speed_omega * t).cos())
        } else {
            self.speed * t
        };
        [s * self.heading.cos(), s * self.heading.sin()]
    }
}

fn times(rate: u32, duration: f64) -> Vec<f64> {
    let n = (duration * rate as f64).floor() as u64;
    (0..=n).map(|i| i as f64 / rate as f64).collect()
}

fn jitter(rng: &mut ChaCha8Rng, scale: f64) -> f64 {
    if scale > 0.0 {
        rng.gen_range(-scale..=scale)
    } else {
        0.0
    }
}

/// GPS/IMU/pose trace along a straight road with an optional GPS spoof.
pub fn synth_localization(params: &LocalizationScenario, lim: &KinematicLimits, seed: u64) -> Result<Vec<TraceRecord>> {
    params.validate(lim)?;
    let mut noise = ChaCha8Rng::seed_from_u64(derive_seed(seed, &[10]));
    let mut fault = ChaCha8Rng::seed_from_u64(derive_seed(seed, &[11]));

    let gps_t = times(params.gps_rate, params.duration);
    let imu_t = times(params.imu_rate, params.duration);
    let pose_t = times(params.pose_rate, params.duration);

    let state = |rng: &mut ChaCha8Rng, t: f64, scale: f64| {
        let p = params.position_at(t);
        StateSample {
            t,
            p: [p[0] + jitter(rng, scale), p[1] + jitter(rng, scale)],
            v: (params.speed_at(t) + jitter(rng, scale)).max(0.0),
        }
    };
    let mut gps: Vec<StateSample> = gps_t.iter().map(|&t| state(&mut noise, t, params.gps_noise)).collect();
    let imu: Vec<ImuSample> = imu_t
        .iter()
        .map(|&t| ImuSample {
            t,
            a: params.accel_at(t) + jitter(&mut noise, params.imu_noise),
        })
        .collect();
    let mut pose: Vec<StateSample> = pose_t.iter().map(|&t| state(&mut noise, t, params.pose_noise)).collect();

    let mut records = Vec::new();
    if let Some(s) = &params.spoof {
        let intervals = fault_intervals(&mut fault, params.duration, s.count, s.min_duration, s.max_duration)?;
        // offset applied to each GPS fix, by index
        let mut offsets = vec![[0.0, 0.0]; gps.len()];
        for (start, end) in intervals {
            let hit: Vec<usize> = (0..gps.len()).filter(|&k| gps[k].t >= start && gps[k].t < end).collect();
            let (Some(&first), Some(&last)) = (hit.first(), hit.last()) else {
                continue;
            };
            let dir = fault.gen_range(0.0..std::f64::consts::TAU);
            for (n, &k) in hit.iter().enumerate() {
                let mag = if s.max_offset > s.min_offset {
                    fault.gen_range(s.min_offset..=s.max_offset)
                } else {
                    s.min_offset
                };
                let sign = if s.alternate && n % 2 == 1 { -1.0 } else { 1.0 };
                offsets[k] = [sign * mag * dir.cos(), sign * mag * dir.sin()];
                gps[k].p = [gps[k].p[0] + offsets[k][0], gps[k].p[1] + offsets[k][1]];
                gps[k].v = (gps[k].v + jitter(&mut fault, s.speed_error)).max(0.0);
            }
            records.push(TraceRecord::FaultWindow {
                kind: "gps-spoof".into(),
                modules: vec!["GPS".into(), "POSE".into()],
                t_start: gps[first].t,
                t_end: gps[last].t,
            });
        }
        // the estimator absorbs part of the latest fix's error
        for p in &mut pose {
            let latest = gps.partition_point(|g| g.t <= p.t);
            if latest > 0 {
                let o = offsets[latest - 1];
                p.p = [p.p[0] + s.pose_gain * o[0], p.p[1] + s.pose_gain * o[1]];
            }
        }
    }

    let mut timed: Vec<(f64, u8, TraceRecord)> = Vec::new();
    timed.extend(gps.into_iter().map(|s| (s.t, 0, TraceRecord::gps(s))));
    timed.extend(imu.into_iter().map(|s| (s.t, 1, TraceRecord::imu(s))));
    timed.extend(pose.into_iter().map(|s| (s.t, 2, TraceRecord::pose(s, params.heading))));
    timed.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    records.extend(timed.into_iter().map(|(_, _, r)| r));
    Ok(records)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ObstacleFault {
    /// The camera drops the in-lane truck.
    TruckOmission,
    /// The camera reports a ghost obstacle on the sidewalk.
    Phantom,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ObjectScenario {
    pub duration: f64,
    /// Frames per second for every sensor.
    pub rate: u32,
    pub ego_speed: f64,
    pub fault: Option<ObstacleFault>,
    pub min_duration: f64,
    pub max_duration: f64,
    pub count: usize,
}

impl Default for ObjectScenario {
    fn default() -> Self {
        Self {
            duration: 10.0,
            rate: 10,
            ego_speed: 5.0,
            fault: Some(ObstacleFault::TruckOmission),
            min_duration: 0.5,
            max_duration: 2.0,
            count: 1,
        }
    }
}

const FAULTY_SENSOR: &str = "C";

/// Straight two-lane road along +x with sidewalks on both sides; the ego
/// drives in the lane `|y| ≤ 1.75`.
pub fn object_detection_geometry() -> GeometryConfig {
    let rect = |x0, y0, x1, y1| ConvexPolygon::rect(x0, y0, x1, y1).expect("valid rectangle");
    let sector = |r, half, seg| ConvexPolygon::sector(r, half, seg).expect("valid sector");
    let deg = std::f64::consts::PI / 180.0;
    let fov = BTreeMap::from([
        ("C".to_string(), sector(60.0, 30.0 * deg, 12)),
        ("L".to_string(), sector(50.0, std::f64::consts::PI, 16)),
        ("R".to_string(), sector(150.0, 10.0 * deg, 6)),
        ("F".to_string(), sector(160.0, std::f64::consts::PI, 24)),
    ]);
    GeometryConfig {
        frame: "world".into(),
        current_lane: rect(-20.0, -1.75, 200.0, 1.75),
        map: vec![
            rect(-20.0, -1.75, 200.0, 5.25),
            rect(-20.0, 5.25, 200.0, 8.0),
            rect(-20.0, -4.0, 200.0, -1.75),
        ],
        fov,
    }
}

fn scene_obstacles() -> Vec<Obstacle> {
    vec![
        Obstacle::new("truck", ConvexPolygon::rect(60.0, -1.2, 68.0, 1.2).expect("valid")),
        Obstacle::new("parked-car", ConvexPolygon::rect(40.0, 3.0, 44.5, 4.8).expect("valid")),
        Obstacle::new("sign", ConvexPolygon::square([80.0, 11.0], 0.6).expect("valid")),
    ]
}

impl ObjectScenario {
    pub fn validate(&self) -> Result<()> {
        if !(self.duration.is_finite() && self.duration > 2.0 * EDGE_MARGIN) {
            return Err(invalid(format!("duration must exceed {} s", 2.0 * EDGE_MARGIN)));
        }
        if self.rate == 0 {
            return Err(invalid("rate must be positive"));
        }
        // stay short of the truck
        if !(self.ego_speed >= 0.0 && self.ego_speed * self.duration < 55.0) {
            return Err(invalid("ego would reach the truck; lower ego_speed or duration"));
        }
        check_range("fault duration", self.min_duration, self.max_duration)
    }
}

/// Obstacle lists from four sensors (camera C, lidar L, radar R, fusion F)
/// observing a static scene, with an optional camera fault.
pub fn synth_object_detection(params: &ObjectScenario, seed: u64) -> Result<Vec<TraceRecord>> {
    params.validate()?;
    let mut fault = ChaCha8Rng::seed_from_u64(derive_seed(seed, &[21]));
    let geo = object_detection_geometry();
    let scene = scene_obstacles();
    let intervals = match params.fault {
        Some(_) => fault_intervals(&mut fault, params.duration, params.count, params.min_duration, params.max_duration)?,
        None => vec![],
    };
    let frame_times = times(params.rate, params.duration);
    let faulty_at = |t: f64| intervals.iter().any(|&(a, b)| t >= a && t < b);

    let mut records = Vec::new();
    if let Some(kind) = params.fault {
        for &(a, b) in &intervals {
            let hit: Vec<f64> = frame_times.iter().copied().filter(|&t| t >= a && t < b).collect();
            if let (Some(&first), Some(&last)) = (hit.first(), hit.last()) {
                records.push(TraceRecord::FaultWindow {
                    kind: match kind {
                        ObstacleFault::TruckOmission => "truck-omission".into(),
                        ObstacleFault::Phantom => "phantom".into(),
                    },
                    modules: vec![FAULTY_SENSOR.into()],
                    t_start: first,
                    t_end: last,
                });
            }
        }
    }

    for &t in &frame_times {
        let ego = [params.ego_speed * t, 0.0];
        records.push(TraceRecord::pose(
            StateSample {
                t,
                p: ego,
                v: params.ego_speed,
            },
            0.0,
        ));
        for (sensor, fov) in &geo.fov {
            let fov = fov.transformed(ego, 0.0);
            let mut seen: Vec<Obstacle> = scene
                .iter()
                .filter(|o| fov.contains(o.footprint.centroid()))
                .cloned()
                .collect();
            if sensor == FAULTY_SENSOR && faulty_at(t) {
                match params.fault {
                    Some(ObstacleFault::TruckOmission) => seen.retain(|o| o.id != "truck"),
                    Some(ObstacleFault::Phantom) => {
                        let ghost = ConvexPolygon::square([ego[0] + 40.0, 6.0], 0.8).expect("valid");
                        let mut o = Obstacle::new("ghost", ghost);
                        o.confidence = 0.6;
                        seen.push(o);
                    }
                    None => {}
                }
            }
            records.push(TraceRecord::Obstacles {
                sensor: sensor.clone(),
                t,
                obstacles: seen,
            });
        }
    }
    Ok(records)
}

/// Monitor configuration matching [`synth_object_detection`] traces.
pub fn object_detection_config(slots: usize) -> MonitorConfig {
    MonitorConfig {
        geometry: Some(object_detection_geometry()),
        ..MonitorConfig::new(Pipeline::ObjectDetection, slots)
    }
}
