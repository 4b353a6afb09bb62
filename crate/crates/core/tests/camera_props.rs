mod common;

use armpose::camera::{pose_to_extrinsics, project, projection_consistency, weak_project};
use armpose::kinematics::forward_kinematics;
use armpose::{CameraIntrinsics, PoseVector};
use common::{joints, model, rotation, tabletop_pose};
use nalgebra::{Vector2, Vector3};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn projection_solves_the_homogeneous_system(p in tabletop_pose()) {
        let intr = CameraIntrinsics::default();
        let z = forward_kinematics(&model(), &p.joints).unwrap();
        let proj = project(&intr, &p, &z).unwrap();
        let ext = pose_to_extrinsics(&p).unwrap();
        for (k, w) in z.coords.iter().enumerate() {
            let c = ext.rotation * w + ext.translation;
            let rhs = intr.matrix() * c;
            // Third row gives the scale, the first two the pixel.
            let s = rhs.z;
            let uv = Vector2::new(rhs.x / s, rhs.y / s);
            prop_assert!((proj.scales[k] - s).abs() < 1e-9);
            prop_assert!((proj.scales[k] - c.z).abs() < 1e-9);
            prop_assert!((proj.points2d.points[k] - uv).norm() < 1e-9);
        }
        prop_assert!(projection_consistency(&intr, &p, &z, &proj.points2d).unwrap() < 1e-9);
    }

    #[test]
    fn rotations_are_proper(r in rotation(), loc in prop::array::uniform3(-200.0..200.0f64), j in joints()) {
        let p = PoseVector { cam_location: Vector3::from(loc), cam_rotation: r, joints: j };
        let ext = pose_to_extrinsics(&p).unwrap();
        prop_assert!((ext.rotation.determinant() - 1.0).abs() < 1e-12);
        prop_assert!((ext.rotation * ext.rotation.transpose() - nalgebra::Matrix3::identity()).amax() < 1e-12);
        let back = -(ext.rotation.transpose() * ext.translation);
        prop_assert!((back - p.cam_location).norm() < 1e-9);
        prop_assert!((ext.camera_location() - p.cam_location).norm() < 1e-9);
    }

    #[test]
    fn weak_matches_full_when_depth_is_flat(
        az in 0.0..45.0, el in 30.0..60.0, roll in -30.0..30.0,
        distance in 1500.0..4000.0, j in common::joints_within(0.8),
    ) {
        let intr = CameraIntrinsics::default();
        let p = PoseVector::looking_at(Vector3::new(0.0, 0.0, 12.0), armpose::CameraRotation::new(az, el, roll), distance, j);
        let z = forward_kinematics(&model(), &j).unwrap();
        let full = project(&intr, &p, &z).unwrap();
        let mean = full.scales.iter().sum::<f64>() / full.scales.len() as f64;
        let spread = full.scales.iter().cloned().fold(f64::MIN, f64::max) - full.scales.iter().cloned().fold(f64::MAX, f64::min);
        prop_assume!(spread < 0.01 * mean);
        let weak = weak_project(intr.fx / mean, Vector2::new(intr.cx, intr.cy), &p, &z).unwrap();
        for (a, b) in weak.points.iter().zip(&full.points2d.points) {
            prop_assert!((a - b).norm() < 1.5);
        }
    }
}
