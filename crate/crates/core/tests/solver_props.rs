mod common;

use armpose::camera::{project, projection_consistency, weak_project};
use armpose::kinematics::forward_kinematics;
use armpose::lm::{minimize, LeastSquaresProblem, LmOptions};
use armpose::metrics::pose_error;
use armpose::solver::{filter_keypoints, solve_pose, solve_pose_weak, SolverOptions, WeakPrior};
use armpose::{CameraIntrinsics, CameraRotation, Keypoints2D, PoseVector, NUM_KEYPOINTS};
use common::{joints_within, model, tabletop_pose};
use nalgebra::{DMatrix, DVector, Vector2, Vector3};
use proptest::prelude::*;

fn keypoints_with(points: Vec<Vector2<f64>>, confidence: Vec<f64>) -> Keypoints2D {
    Keypoints2D::new(points, confidence, vec![true; NUM_KEYPOINTS]).unwrap()
}

/// Sum of exponentials fitted to fixed samples, with one parameter boxed.
struct ExpFit {
    t: Vec<f64>,
    y: Vec<f64>,
}

impl LeastSquaresProblem for ExpFit {
    fn residuals(&self, x: &DVector<f64>) -> Option<DVector<f64>> {
        Some(DVector::from_iterator(
            self.t.len(),
            self.t.iter().zip(&self.y).map(|(t, y)| x[0] * (-x[1] * t).exp() + x[2] - y),
        ))
    }
    fn jacobian(&self, x: &DVector<f64>) -> Option<DMatrix<f64>> {
        let mut j = DMatrix::zeros(self.t.len(), 3);
        for (i, t) in self.t.iter().enumerate() {
            let e = (-x[1] * t).exp();
            j[(i, 0)] = e;
            j[(i, 1)] = -x[0] * t * e;
            j[(i, 2)] = 1.0;
        }
        Some(j)
    }
    fn bounds(&self) -> Option<(DVector<f64>, DVector<f64>)> {
        Some((
            DVector::from_vec(vec![f64::NEG_INFINITY, 0.0, -1.0]),
            DVector::from_vec(vec![f64::INFINITY, 5.0, 1.0]),
        ))
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn lowering_the_gate_never_drops_keypoints(
        c in prop::collection::vec(0.0..=1.0f64, NUM_KEYPOINTS),
        lo in 0.0..=1.0f64, hi in 0.0..=1.0f64,
    ) {
        let (lo, hi) = (lo.min(hi), lo.max(hi));
        let y = keypoints_with(vec![Vector2::zeros(); NUM_KEYPOINTS], c);
        let (loose, strict) = (filter_keypoints(&y, lo), filter_keypoints(&y, hi));
        for k in 0..NUM_KEYPOINTS {
            prop_assert!(!strict[k] || loose[k]);
        }
    }

    #[test]
    fn accepted_steps_never_raise_the_cost(
        a in -5.0..5.0f64, b in 0.1..3.0f64, c in -2.0..2.0f64,
        x0 in prop::array::uniform3(-3.0..3.0f64),
        noise in prop::collection::vec(-0.1..0.1f64, 20),
    ) {
        let t: Vec<f64> = (0..20).map(|i| i as f64 * 0.2).collect();
        let y = t.iter().zip(&noise).map(|(t, n)| a * (-b * t).exp() + c + n).collect();
        let out = minimize(&ExpFit { t, y }, DVector::from_row_slice(&x0), &LmOptions::default()).unwrap();
        prop_assert!(out.accepted_costs.windows(2).all(|w| w[1] < w[0]));
        prop_assert_eq!(*out.accepted_costs.last().unwrap(), out.cost);
        prop_assert!(out.x[1] >= 0.0 && out.x[1] <= 5.0 && out.x[2].abs() <= 1.0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn noisy_solves_are_consistent_and_deterministic(
        p in tabletop_pose(),
        noise in prop::collection::vec(-3.0..3.0f64, 2 * NUM_KEYPOINTS),
        conf in prop::collection::vec(0.0..=1.0f64, NUM_KEYPOINTS),
    ) {
        let m = model();
        let intr = CameraIntrinsics::default();
        let z = forward_kinematics(&m, &p.joints).unwrap();
        let proj = project(&intr, &p, &z).unwrap().points2d;
        let points = (0..NUM_KEYPOINTS)
            .map(|k| proj.points[k] + Vector2::new(noise[2 * k], noise[2 * k + 1]))
            .collect();
        // Most keypoints confident, a few gated out.
        let conf = conf.iter().map(|c| if *c < 0.2 { 0.1 } else { 1.0 }).collect();
        let y = keypoints_with(points, conf);
        let opts = SolverOptions { restarts: 8, ..Default::default() };
        let Ok(r) = solve_pose(&y, &intr, &m, &opts) else {
            return Ok(());
        };
        let fitted = forward_kinematics(&m, &r.pose.joints).unwrap();
        prop_assert!(projection_consistency(&intr, &r.pose, &fitted, &r.y_refined).unwrap() < 1e-9);
        prop_assert!(r.residual >= 0.0);
        prop_assert!(m.check_limits(&r.pose.joints).is_ok());
        let again = solve_pose(&y, &intr, &m, &opts).unwrap();
        prop_assert_eq!(format!("{r:?}"), format!("{again:?}"));
    }

    #[test]
    fn weak_projection_round_trips(
        az in 0.0..45.0, el in 30.0..60.0, roll in -30.0..30.0,
        scale in 2.0..5.0, j in joints_within(0.8),
    ) {
        let m = model();
        let truth = PoseVector::looking_at(Vector3::new(0.0, 0.0, 12.0), CameraRotation::new(az, el, roll), 100.0, j);
        let z = forward_kinematics(&m, &j).unwrap();
        let prior = WeakPrior::default();
        let y = weak_project(scale, prior.principal, &truth, &z).unwrap();
        let r = solve_pose_weak(&y, &prior, &m, &SolverOptions::default()).unwrap();
        let e = pose_error(&r.pose, &truth);
        prop_assert!(e.joints.iter().all(|&v| v < 0.5), "{:?}", e);
        prop_assert!(e.cam_rotation < 0.5, "{:?}", e);
        prop_assert!((r.weak_scale.unwrap() / scale - 1.0).abs() < 0.005);
    }

    #[test]
    fn far_cameras_solve_weakly(
        az in 0.0..45.0, el in 30.0..60.0, roll in -30.0..30.0,
        distance in 1000.0..1500.0, j in joints_within(0.8),
    ) {
        let m = model();
        let intr = CameraIntrinsics { fx: 4000.0, fy: 4000.0, ..Default::default() };
        let truth = PoseVector::looking_at(Vector3::new(0.0, 0.0, 12.0), CameraRotation::new(az, el, roll), distance, j);
        let z = forward_kinematics(&m, &j).unwrap();
        let y = project(&intr, &truth, &z).unwrap().points2d;
        let prior = WeakPrior { principal: Vector2::new(intr.cx, intr.cy), ..WeakPrior::default() };
        let r = solve_pose_weak(&y, &prior, &m, &SolverOptions::default()).unwrap();
        let e = pose_error(&r.pose, &truth);
        prop_assert!(e.joints.iter().all(|&v| v < 3.0), "{:?}", e);
    }
}
