//! Pose estimation, pseudo-label refinement and closed-loop control for a
//! sensorless 4-joint desktop arm observed by a single camera.
//!
//! The pipeline: [`kinematics`] maps joint angles to 17 keypoints, [`camera`]
//! projects them, [`solver`] inverts the projection for the 10-dimensional
//! pose, [`refine`] turns detector heatmaps into geometry-consistent
//! pseudo-labels, [`synth`] fabricates ground truth and heatmaps, [`metrics`]
//! scores predictions and [`control`] closes the loop in a simulator.

// `!(x > 0.0)` is used on purpose to reject NaN alongside bad values.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop, clippy::too_many_arguments)]

pub mod camera;
pub mod control;
pub mod dataset;
pub mod demo;
pub mod error;
pub mod exec;
pub mod heatmap;
pub mod kinematics;
pub mod lm;
pub mod metrics;
pub mod refine;
pub mod rng;
pub mod solver;
pub mod synth;

pub use camera::{CameraIntrinsics, CameraRange, CameraRotation, Keypoints2D, PoseVector};
pub use error::{Error, Result};
pub use exec::Exec;
pub use kinematics::{ArmModel, JointAngles, Keypoints3D, NUM_JOINTS, NUM_KEYPOINTS};

pub(crate) fn sample_interval<R: rand::Rng + ?Sized>(rng: &mut R, [lo, hi]: [f64; 2]) -> f64 {
    if hi > lo {
        rng.random_range(lo..=hi)
    } else {
        lo
    }
}

/// Wrap an angle in degrees to (-180, 180].
pub(crate) fn wrap_degrees(a: f64) -> f64 {
    let w = (a + 180.0).rem_euclid(360.0) - 180.0;
    if w == -180.0 {
        180.0
    } else {
        w
    }
}

pub(crate) fn median(values: &mut [f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}
