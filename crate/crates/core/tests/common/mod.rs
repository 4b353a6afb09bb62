//! Shared strategies and oracles for the property tests.
#![allow(dead_code)]

use armpose::{ArmModel, CameraRotation, JointAngles, PoseVector, NUM_JOINTS};
use nalgebra::{Matrix3, Matrix4, Vector3};
use proptest::prelude::*;

pub fn model() -> ArmModel {
    ArmModel::owi535()
}

/// In-limit joint angles, shrunk towards the middle of each range by `fraction`.
pub fn joints_within(fraction: f64) -> impl Strategy<Value = JointAngles> {
    let m = model();
    let range = move |j: usize| {
        let [lo, hi] = m.joints[j].limit_deg;
        let (mid, half) = (0.5 * (lo + hi), 0.5 * (hi - lo) * fraction);
        (mid - half)..=(mid + half)
    };
    (range(0), range(1), range(2), range(3)).prop_map(|(a, b, c, d)| JointAngles::new(a, b, c, d))
}

pub fn joints() -> impl Strategy<Value = JointAngles> {
    joints_within(1.0)
}

pub fn rotation() -> impl Strategy<Value = CameraRotation> {
    (-180.0..180.0, -89.0..89.0, -180.0..180.0).prop_map(|(az, el, roll)| CameraRotation::new(az, el, roll))
}

/// A camera 40-90 cm from a point near the arm, at the tabletop viewing angles.
pub fn tabletop_pose() -> impl Strategy<Value = PoseVector> {
    (0.0..45.0, 30.0..60.0, -30.0..30.0, 40.0..90.0, joints_within(0.8)).prop_map(|(az, el, roll, d, j)| {
        PoseVector::looking_at(Vector3::new(0.0, 0.0, 12.0), CameraRotation::new(az, el, roll), d, j)
    })
}

/// Rodrigues rotation about the unit `axis` through `pivot`, as a 4×4 matrix.
fn homogeneous(axis: &Vector3<f64>, pivot: &Vector3<f64>, angle_rad: f64) -> Matrix4<f64> {
    let (s, c) = angle_rad.sin_cos();
    let k = Matrix3::new(0.0, -axis.z, axis.y, axis.z, 0.0, -axis.x, -axis.y, axis.x, 0.0);
    let r = Matrix3::identity() * c + k * s + axis * axis.transpose() * (1.0 - c);
    let t = pivot - r * pivot;
    let mut m = Matrix4::identity();
    m.fixed_view_mut::<3, 3>(0, 0).copy_from(&r);
    m.fixed_view_mut::<3, 1>(0, 3).copy_from(&t);
    m
}

fn part_matrix(model: &ArmModel, part: usize, degrees: &[f64; NUM_JOINTS]) -> Matrix4<f64> {
    let p = &model.parts[part];
    let parent = p.parent.map_or_else(Matrix4::identity, |q| part_matrix(model, q, degrees));
    let own = model
        .joints
        .iter()
        .position(|j| j.part == part)
        .map_or_else(Matrix4::identity, |j| homogeneous(&p.axis, &p.pivot, degrees[j].to_radians()));
    parent * own
}

/// World position of keypoint `k` by chaining 4×4 matrices from the root.
pub fn oracle_keypoint(model: &ArmModel, angles: &JointAngles, k: usize) -> Vector3<f64> {
    let kp = &model.keypoints[k];
    let m = part_matrix(model, kp.part, &angles.to_array());
    (m * kp.rest.push(1.0)).xyz()
}

/// All keypoints clear `floor` and all joints within limits, checked through the oracle.
pub fn oracle_pose_is_safe(model: &ArmModel, angles: &JointAngles, floor: f64) -> bool {
    let a = angles.to_array();
    let in_limits = (0..NUM_JOINTS).all(|j| {
        let [lo, hi] = model.joints[j].limit_deg;
        (lo..=hi).contains(&a[j])
    });
    in_limits && (0..model.keypoints.len()).all(|k| oracle_keypoint(model, angles, k).z >= floor)
}
