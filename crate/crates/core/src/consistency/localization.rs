//! Kinematic consistency tests between GPS, IMU and pose-estimator samples.
//!
//! Each test returns `true` on failure. Speeds and accelerations are scalar
//! magnitudes along the direction of travel.

use serde::{Deserialize, Serialize};

use super::geometry::{distance, Point};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct KinematicLimits {
    /// Position tolerance between consecutive samples of one source (m).
    pub tau_p: f64,
    /// Velocity tolerance (m/s).
    pub tau_v: f64,
    /// Maximum speed (m/s).
    pub v_max: f64,
    /// Maximum acceleration magnitude (m/s²).
    pub a_max: f64,
    /// Maximum jerk magnitude (m/s³).
    pub j_max: f64,
    /// Position tolerance between a pose estimate and a GPS fix (m).
    pub pose_gps_gate: f64,
}

impl Default for KinematicLimits {
    fn default() -> Self {
        Self {
            tau_p: 0.30,
            tau_v: 0.5,
            v_max: 25.0,
            a_max: 10.0,
            j_max: 15.0,
            pose_gps_gate: 1.0,
        }
    }
}

impl KinematicLimits {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("tau_p", self.tau_p),
            ("tau_v", self.tau_v),
            ("v_max", self.v_max),
            ("a_max", self.a_max),
            ("j_max", self.j_max),
            ("pose_gps_gate", self.pose_gps_gate),
        ];
        for (name, v) in fields {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidArgument(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }
}

/// A position/velocity sample; used for both GPS fixes and pose estimates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StateSample {
    pub t: f64,
    pub p: Point,
    pub v: f64,
}

pub type GpsSample = StateSample;
pub type PoseSample = StateSample;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ImuSample {
    pub t: f64,
    pub a: f64,
}

fn ordered(t1: f64, t2: f64) -> Result<()> {
    if t1 < t2 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("sample times must increase: {t1} then {t2}")))
    }
}

/// Acceleration at `t`, linearly interpolated between samples and held
/// constant beyond the first and last one. `imu` must be sorted and non-empty.
fn accel_at(imu: &[ImuSample], t: f64) -> f64 {
    let first = imu[0];
    let last = imu[imu.len() - 1];
    if t <= first.t {
        return first.a;
    }
    if t >= last.t {
        return last.a;
    }
    let k = imu.partition_point(|s| s.t <= t);
    let (lo, hi) = (imu[k - 1], imu[k]);
    lo.a + (hi.a - lo.a) * (t - lo.t) / (hi.t - lo.t)
}

/// Trapezoidal integral of acceleration over `[t1, t2]`.
pub fn integrate_accel(imu: &[ImuSample], t1: f64, t2: f64) -> Result<f64> {
    if imu.is_empty() {
        return Err(Error::InvalidArgument("no IMU samples in interval".into()));
    }
    ordered(t1, t2)?;
    if imu.windows(2).any(|w| w[0].t >= w[1].t) {
        return Err(Error::InvalidArgument("IMU sample times must increase".into()));
    }
    let mut knots = vec![(t1, accel_at(imu, t1))];
    knots.extend(imu.iter().filter(|s| s.t > t1 && s.t < t2).map(|s| (s.t, s.a)));
    knots.push((t2, accel_at(imu, t2)));
    Ok(knots
        .windows(2)
        .map(|w| (w[1].0 - w[0].0) * (w[0].1 + w[1].1) / 2.0)
        .sum())
}

fn reachable(s1: &StateSample, s2: &StateSample, lim: &KinematicLimits) -> bool {
    distance(s1.p, s2.p) <= lim.v_max * (s2.t - s1.t)
}

fn admissible_speeds(s1: &StateSample, s2: &StateSample, lim: &KinematicLimits) -> bool {
    s1.v <= lim.v_max && s2.v <= lim.v_max
}

fn velocity_matches_accel(s1: &StateSample, s2: &StateSample, imu: &[ImuSample], lim: &KinematicLimits) -> Result<bool> {
    let dv = s2.v - s1.v;
    Ok((dv - integrate_accel(imu, s1.t, s2.t)?).abs() <= lim.tau_v)
}

/// Pose estimate against a GPS fix at (about) the same time.
pub fn pose_gps_test(pose: &PoseSample, gps: &GpsSample, lim: &KinematicLimits) -> bool {
    let ok = distance(pose.p, gps.p) <= lim.pose_gps_gate
        && (pose.v - gps.v).abs() <= lim.tau_v
        && pose.v <= lim.v_max
        && gps.v <= lim.v_max;
    !ok
}

/// Two pose estimates against the IMU samples between them.
pub fn imu_pose_test(p1: &PoseSample, p2: &PoseSample, imu: &[ImuSample], lim: &KinematicLimits) -> Result<bool> {
    ordered(p1.t, p2.t)?;
    let ok = reachable(p1, p2, lim)
        && velocity_matches_accel(p1, p2, imu, lim)?
        && imu.iter().all(|s| s.a.abs() <= lim.a_max)
        && admissible_speeds(p1, p2, lim);
    Ok(!ok)
}

/// Two GPS fixes against the IMU samples between them.
pub fn gps_imu_test(g1: &GpsSample, g2: &GpsSample, imu: &[ImuSample], lim: &KinematicLimits) -> Result<bool> {
    ordered(g1.t, g2.t)?;
    let ok = reachable(g1, g2, lim) && velocity_matches_accel(g1, g2, imu, lim)? && admissible_speeds(g1, g2, lim);
    Ok(!ok)
}

fn self_consistent(s1: &StateSample, s2: &StateSample, lim: &KinematicLimits) -> bool {
    distance(s1.p, s2.p) <= lim.tau_p && (s2.v - s1.v).abs() <= lim.tau_v && admissible_speeds(s1, s2, lim)
}

/// Consecutive GPS fixes.
pub fn gps_gps_test(g1: &GpsSample, g2: &GpsSample, lim: &KinematicLimits) -> bool {
    !self_consistent(g1, g2, lim)
}

/// Consecutive pose estimates.
pub fn pose_pose_test(p1: &PoseSample, p2: &PoseSample, lim: &KinematicLimits) -> bool {
    !self_consistent(p1, p2, lim)
}

/// Consecutive IMU samples: bounded jerk and acceleration.
pub fn imu_imu_test(i1: &ImuSample, i2: &ImuSample, lim: &KinematicLimits) -> Result<bool> {
    ordered(i1.t, i2.t)?;
    let jerk = (i2.a - i1.a).abs() / (i2.t - i1.t);
    let ok = jerk <= lim.j_max && i1.a.abs() <= lim.a_max && i2.a.abs() <= lim.a_max;
    Ok(!ok)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn s(t: f64, x: f64, v: f64) -> StateSample {
        StateSample { t, p: [x, 0.0], v }
    }

    fn imu(t: f64, a: f64) -> ImuSample {
        ImuSample { t, a }
    }

    fn lim() -> KinematicLimits {
        KinematicLimits::default()
    }

    #[test]
    fn gps_pair_within_tolerance_passes() {
        let l = lim();
        assert!(!gps_gps_test(&s(0.0, 0.0, 10.0), &s(0.1, 0.2, 10.1), &l));
    }

    #[test]
    fn gps_position_boundary() {
        let l = lim();
        assert!(!gps_gps_test(&s(0.0, 0.0, 10.0), &s(0.1, 0.3, 10.0), &l));
        assert!(gps_gps_test(&s(0.0, 0.0, 10.0), &s(0.1, 0.3 + 1e-9, 10.0), &l));
        assert!(!gps_gps_test(&s(0.0, 0.0, 10.0), &s(0.1, 0.3 - 1e-9, 10.0), &l));
    }

    #[test]
    fn velocity_boundary() {
        let l = lim();
        assert!(!pose_pose_test(&s(0.0, 0.0, 10.0), &s(0.1, 0.0, 10.5), &l));
        assert!(pose_pose_test(&s(0.0, 0.0, 10.0), &s(0.1, 0.0, 10.5 + 1e-9), &l));
        assert!(!pose_pose_test(&s(0.0, 0.0, 10.0), &s(0.1, 0.0, 10.5 - 1e-9), &l));
    }

    #[test]
    fn speed_limit_boundary() {
        let l = lim();
        assert!(!gps_gps_test(&s(0.0, 0.0, 25.0), &s(0.1, 0.0, 25.0), &l));
        assert!(gps_gps_test(&s(0.0, 0.0, 25.0 + 1e-9), &s(0.1, 0.0, 25.0), &l));
    }

    #[test]
    fn jerk_boundary() {
        let l = lim();
        assert!(!imu_imu_test(&imu(0.0, 0.0), &imu(0.5, 7.5), &l).unwrap());
        assert!(imu_imu_test(&imu(0.0, 0.0), &imu(0.5, 7.5 + 1e-9), &l).unwrap());
        assert!(!imu_imu_test(&imu(0.0, 0.0), &imu(0.5, 7.5 - 1e-9), &l).unwrap());
        assert!(imu_imu_test(&imu(0.0, 0.0), &imu(0.5, 0.0), &l).is_ok());
        assert!(imu_imu_test(&imu(0.5, 0.0), &imu(0.5, 0.0), &l).is_err());
    }

    #[test]
    fn acceleration_boundary() {
        let l = lim();
        assert!(!imu_imu_test(&imu(0.0, 10.0), &imu(1.0, 10.0), &l).unwrap());
        assert!(imu_imu_test(&imu(0.0, 10.0 + 1e-9), &imu(1.0, 10.0), &l).unwrap());
        assert!(imu_imu_test(&imu(0.0, -10.5), &imu(1.0, -10.0), &l).unwrap());
    }

    #[test]
    fn imu_pose_integration() {
        let l = lim();
        let samples: Vec<_> = (0..=10).map(|k| imu(k as f64 / 10.0, 1.0)).collect();
        assert!(!imu_pose_test(&s(0.0, 0.0, 5.0), &s(1.0, 5.5, 6.0), &samples, &l).unwrap());
        assert!(imu_pose_test(&s(0.0, 0.0, 5.0), &s(1.0, 5.5, 7.0), &samples, &l).unwrap());
        // residual exactly tau_v
        assert!(!imu_pose_test(&s(0.0, 0.0, 5.0), &s(1.0, 5.5, 6.5), &samples, &l).unwrap());
        assert!(imu_pose_test(&s(0.0, 0.0, 5.0), &s(1.0, 5.5, 6.5 + 1e-9), &samples, &l).unwrap());
    }

    #[test]
    fn imu_pose_reachability_and_accel_bound() {
        let l = lim();
        let calm = [imu(0.0, 0.0), imu(1.0, 0.0)];
        assert!(!imu_pose_test(&s(0.0, 0.0, 10.0), &s(1.0, 25.0, 10.0), &calm, &l).unwrap());
        assert!(imu_pose_test(&s(0.0, 0.0, 10.0), &s(1.0, 25.0 + 1e-9, 10.0), &calm, &l).unwrap());
        let spike = [imu(0.0, 0.0), imu(0.25, 11.0), imu(0.5, 0.0), imu(0.75, -11.0), imu(1.0, 0.0)];
        assert!(imu_pose_test(&s(0.0, 0.0, 10.0), &s(1.0, 10.0, 10.0), &spike, &l).unwrap());
        // gps-imu has no acceleration bound
        assert!(!gps_imu_test(&s(0.0, 0.0, 10.0), &s(1.0, 10.0, 10.0), &spike, &l).unwrap());
    }

    #[test]
    fn pose_gps_uses_own_gate() {
        let l = lim();
        assert!(!pose_gps_test(&s(0.0, 0.0, 10.0), &s(0.0, 1.0, 10.0), &l));
        assert!(pose_gps_test(&s(0.0, 0.0, 10.0), &s(0.0, 1.0 + 1e-9, 10.0), &l));
        let tight = KinematicLimits {
            pose_gps_gate: 0.3,
            ..l
        };
        assert!(pose_gps_test(&s(0.0, 0.0, 10.0), &s(0.0, 0.5, 10.0), &tight));
    }

    #[test]
    fn missing_or_unordered_imu_rejected() {
        let l = lim();
        assert!(imu_pose_test(&s(0.0, 0.0, 1.0), &s(1.0, 1.0, 1.0), &[], &l).is_err());
        assert!(gps_imu_test(&s(1.0, 0.0, 1.0), &s(0.0, 1.0, 1.0), &[imu(0.5, 0.0)], &l).is_err());
        assert!(integrate_accel(&[imu(0.5, 0.0), imu(0.2, 0.0)], 0.0, 1.0).is_err());
    }

    #[test]
    fn single_sample_is_held() {
        assert!((integrate_accel(&[imu(0.3, 2.0)], 0.0, 0.5).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn limits_validate() {
        assert!(lim().validate().is_ok());
        assert!(KinematicLimits { tau_p: 0.0, ..lim() }.validate().is_err());
        let parsed: KinematicLimits = serde_json::from_str(r#"{"tau_p": 0.5}"#).unwrap();
        assert_eq!(parsed.tau_p, 0.5);
        assert_eq!(parsed.pose_gps_gate, 1.0);
    }

    // Oracle integral: piecewise-linear interpolant integrated segment by
    // segment via its antiderivative, evaluated independently of the knot walk.
    fn oracle_integral(imu: &[ImuSample], t1: f64, t2: f64) -> f64 {
        let f = |t: f64| {
            if t <= imu[0].t {
                return imu[0].a;
            }
            if t >= imu[imu.len() - 1].t {
                return imu[imu.len() - 1].a;
            }
            let w = imu.windows(2).find(|w| w[0].t <= t && t <= w[1].t).unwrap();
            w[0].a + (w[1].a - w[0].a) * (t - w[0].t) / (w[1].t - w[0].t)
        };
        let mut cuts: Vec<f64> = vec![t1, t2];
        cuts.extend(imu.iter().map(|s| s.t).filter(|&t| t > t1 && t < t2));
        cuts.sort_by(f64::total_cmp);
        // midpoint rule is exact on each linear piece
        cuts.windows(2).map(|w| (w[1] - w[0]) * f((w[0] + w[1]) / 2.0)).sum()
    }

    fn arb_state(t: f64) -> impl Strategy<Value = StateSample> {
        ((-1.0..1.0f64), (-1.0..1.0f64), (0.0..30.0f64)).prop_map(move |(x, y, v)| StateSample { t, p: [x, y], v })
    }

    fn arb_imu() -> impl Strategy<Value = Vec<ImuSample>> {
        proptest::collection::vec((0.0..1.0f64, -12.0..12.0f64), 1..8).prop_map(|mut v| {
            v.sort_by(|a, b| a.0.total_cmp(&b.0));
            v.dedup_by(|a, b| a.0 == b.0);
            v.into_iter().map(|(t, a)| ImuSample { t, a }).collect()
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(10_000))]

        #[test]
        fn pose_gps_matches_formula(p in arb_state(0.0), g in arb_state(0.0)) {
            let l = lim();
            let d = ((p.p[0] - g.p[0]).powi(2) + (p.p[1] - g.p[1]).powi(2)).sqrt();
            let r = d <= 1.0 && (p.v - g.v).abs() <= 0.5 && p.v <= 25.0 && g.v <= 25.0;
            prop_assert_eq!(pose_gps_test(&p, &g, &l), !r);
        }

        #[test]
        fn self_tests_match_formula(a in arb_state(0.0), b in arb_state(0.1)) {
            let l = lim();
            let d = ((a.p[0] - b.p[0]).powi(2) + (a.p[1] - b.p[1]).powi(2)).sqrt();
            let r = d <= 0.30 && (b.v - a.v).abs() <= 0.5 && a.v <= 25.0 && b.v <= 25.0;
            prop_assert_eq!(gps_gps_test(&a, &b, &l), !r);
            prop_assert_eq!(pose_pose_test(&a, &b, &l), !r);
        }

        #[test]
        fn imu_imu_matches_formula(a1 in -12.0..12.0f64, a2 in -12.0..12.0f64, dt in 0.01..1.0f64) {
            let l = lim();
            let r = (a2 - a1).abs() / dt <= 15.0 && a1.abs() <= 10.0 && a2.abs() <= 10.0;
            prop_assert_eq!(imu_imu_test(&imu(0.0, a1), &imu(dt, a2), &l).unwrap(), !r);
        }

        #[test]
        fn imu_pose_and_gps_imu_match_formula(
            a in arb_state(0.0), b in arb_state(1.0), samples in arb_imu()
        ) {
            let l = lim();
            let integral = oracle_integral(&samples, 0.0, 1.0);
            let d = ((a.p[0] - b.p[0]).powi(2) + (a.p[1] - b.p[1]).powi(2)).sqrt();
            let residual = ((b.v - a.v) - integral).abs();
            prop_assume!((residual - 0.5).abs() > 1e-9);
            let base = d <= 25.0 && residual <= 0.5 && a.v <= 25.0 && b.v <= 25.0;
            let accel = samples.iter().all(|s| s.a.abs() <= 10.0);
            prop_assert_eq!(imu_pose_test(&a, &b, &samples, &l).unwrap(), !(base && accel));
            prop_assert_eq!(gps_imu_test(&a, &b, &samples, &l).unwrap(), !base);
        }

        #[test]
        fn larger_tolerances_never_add_failures(a in arb_state(0.0), b in arb_state(0.1), k in 1.0..3.0f64) {
            let l = lim();
            let wide = KinematicLimits {
                tau_p: l.tau_p * k, tau_v: l.tau_v * k, v_max: l.v_max * k,
                a_max: l.a_max * k, j_max: l.j_max * k, pose_gps_gate: l.pose_gps_gate * k,
            };
            prop_assert!(gps_gps_test(&a, &b, &wide) <= gps_gps_test(&a, &b, &l));
            prop_assert!(pose_gps_test(&a, &b, &wide) <= pose_gps_test(&a, &b, &l));
        }
    }
}
