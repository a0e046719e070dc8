//! Consistency tests between module outputs: obstacle lists for the
//! perception pipeline, kinematic checks for the localization pipeline.

pub mod detection;
pub mod geometry;
pub mod localization;

pub use detection::{
    approx_member, object_detection_test, DetectionOutcome, LaneMap, MatchConfig, MatchMode, Obstacle, SensorView,
    Severity,
};
pub use geometry::{ConvexPolygon, Point};
pub use localization::{
    gps_gps_test, gps_imu_test, imu_imu_test, imu_pose_test, pose_gps_test, pose_pose_test, GpsSample, ImuSample,
    KinematicLimits, PoseSample, StateSample,
};
