//! Keypoint and pose scoring.
//!
//! PCK counts a keypoint as correct when its pixel error is at most
//! `alpha × L`, with `L` the longer side of the ground-truth keypoint bounding
//! box. Dataset-level PCK is pooled over keypoints, not averaged per image.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::Path;

use nalgebra::Matrix3;
use serde::{Deserialize, Serialize};

use crate::camera::{Keypoints2D, PoseVector};
use crate::dataset::{annotation_path, list_annotation_ids, load_annotation, load_manifest};
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::kinematics::{JOINT_NAMES, NUM_JOINTS, NUM_KEYPOINTS};

pub const DEFAULT_ALPHA: f64 = 0.2;

/// Longer side of the bounding box of `gt`'s keypoints.
pub fn pck_normalizer(gt: &Keypoints2D) -> f64 {
    let (mut lo, mut hi) = (gt.points[0], gt.points[0]);
    for p in &gt.points {
        lo = lo.inf(p);
        hi = hi.sup(p);
    }
    (hi - lo).max()
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct PckCounts {
    pub hits: usize,
    pub eligible: usize,
    pub per_keypoint_hits: Vec<usize>,
    pub per_keypoint_eligible: Vec<usize>,
}

impl PckCounts {
    fn empty() -> Self {
        Self {
            per_keypoint_hits: vec![0; NUM_KEYPOINTS],
            per_keypoint_eligible: vec![0; NUM_KEYPOINTS],
            ..Default::default()
        }
    }

    fn add(&mut self, other: &PckCounts) {
        self.hits += other.hits;
        self.eligible += other.eligible;
        for k in 0..NUM_KEYPOINTS {
            self.per_keypoint_hits[k] += other.per_keypoint_hits[k];
            self.per_keypoint_eligible[k] += other.per_keypoint_eligible[k];
        }
    }

    pub fn fraction(&self) -> Option<f64> {
        (self.eligible > 0).then(|| self.hits as f64 / self.eligible as f64)
    }
}

pub fn pck_counts(pred: &Keypoints2D, gt: &Keypoints2D, alpha: f64, visible_only: bool) -> Result<PckCounts> {
    pred.validate()?;
    gt.validate()?;
    if !(alpha >= 0.0) {
        return Err(Error::InvalidInput("alpha must be non-negative".into()));
    }
    let threshold = alpha * pck_normalizer(gt);
    let mut c = PckCounts::empty();
    for k in 0..NUM_KEYPOINTS {
        if visible_only && !gt.visible[k] {
            continue;
        }
        c.eligible += 1;
        c.per_keypoint_eligible[k] += 1;
        if (pred.points[k] - gt.points[k]).norm() <= threshold {
            c.hits += 1;
            c.per_keypoint_hits[k] += 1;
        }
    }
    Ok(c)
}

/// Fraction of keypoints within `alpha ×` the normalizer of their ground truth.
pub fn pck(pred: &Keypoints2D, gt: &Keypoints2D, alpha: f64, visible_only: bool) -> Result<f64> {
    pck_counts(pred, gt, alpha, visible_only)?
        .fraction()
        .ok_or_else(|| Error::EmptyEval("no visible keypoints to score".into()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PoseError {
    /// Absolute difference per joint, degrees.
    pub joints: [f64; NUM_JOINTS],
    pub joint_average: f64,
    /// Geodesic angle between the camera rotations, degrees.
    pub cam_rotation: f64,
    pub cam_location: f64,
}

/// Angle of the relative rotation `a · bᵀ`, degrees.
pub fn rotation_angle_between(a: &Matrix3<f64>, b: &Matrix3<f64>) -> f64 {
    let r = a * b.transpose();
    let cos = 0.5 * (r.trace() - 1.0);
    let sin = 0.5
        * nalgebra::Vector3::new(r[(2, 1)] - r[(1, 2)], r[(0, 2)] - r[(2, 0)], r[(1, 0)] - r[(0, 1)]).norm();
    sin.atan2(cos).to_degrees()
}

pub fn pose_error(pred: &PoseVector, gt: &PoseVector) -> PoseError {
    let p = pred.joints.to_array();
    let g = gt.joints.to_array();
    let joints: [f64; NUM_JOINTS] = std::array::from_fn(|j| (p[j] - g[j]).abs());
    PoseError {
        joints,
        joint_average: joints.iter().sum::<f64>() / NUM_JOINTS as f64,
        cam_rotation: rotation_angle_between(
            &pred.cam_rotation.world_to_camera(),
            &gt.cam_rotation.world_to_camera(),
        ),
        cam_location: (pred.cam_location - gt.cam_location).norm(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EvalOptions {
    pub alpha: f64,
    /// Score only keypoints flagged visible in the ground truth.
    pub visible_only: bool,
    #[serde(skip)]
    pub exec: Exec,
}

impl Default for EvalOptions {
    fn default() -> Self {
        Self {
            alpha: DEFAULT_ALPHA,
            visible_only: false,
            exec: Exec::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointErrors {
    pub rotation: f64,
    pub base: f64,
    pub elbow: f64,
    pub wrist: f64,
    pub average: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub n_samples: usize,
    pub alpha: f64,
    pub visible_only: bool,
    pub pck: f64,
    pub pck_per_keypoint: Vec<Option<f64>>,
    /// Pooled over ground-truth-visible keypoints; `None` if there are none.
    pub pck_visible_only: Option<f64>,
    /// Mean absolute error per joint, degrees.
    pub joint_errors: JointErrors,
    pub cam_rotation_error: f64,
    pub cam_location_error: f64,
    /// Ids the predictor reported as skipped.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub skipped: Vec<String>,
}

/// One scored pair.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleScore {
    pub counts: PckCounts,
    pub visible_counts: PckCounts,
    pub pose: PoseError,
}

pub fn score_sample(
    pred_y: &Keypoints2D,
    pred_pose: &PoseVector,
    gt_y: &Keypoints2D,
    gt_pose: &PoseVector,
    opts: &EvalOptions,
) -> Result<SampleScore> {
    Ok(SampleScore {
        counts: pck_counts(pred_y, gt_y, opts.alpha, opts.visible_only)?,
        visible_counts: pck_counts(pred_y, gt_y, opts.alpha, true)?,
        pose: pose_error(pred_pose, gt_pose),
    })
}

/// Pool per-sample scores, in order.
pub fn aggregate(scores: &[SampleScore], opts: &EvalOptions, skipped: Vec<String>) -> Result<EvalReport> {
    let mut counts = PckCounts::empty();
    let mut visible = PckCounts::empty();
    let mut joints = [0.0; NUM_JOINTS];
    let (mut rot, mut loc) = (0.0, 0.0);
    for s in scores {
        counts.add(&s.counts);
        visible.add(&s.visible_counts);
        for j in 0..NUM_JOINTS {
            joints[j] += s.pose.joints[j];
        }
        rot += s.pose.cam_rotation;
        loc += s.pose.cam_location;
    }
    let pck = counts
        .fraction()
        .ok_or_else(|| Error::EmptyEval("no keypoints to score".into()))?;
    let n = scores.len() as f64;
    let joints = joints.map(|v| v / n);
    Ok(EvalReport {
        n_samples: scores.len(),
        alpha: opts.alpha,
        visible_only: opts.visible_only,
        pck,
        pck_per_keypoint: (0..NUM_KEYPOINTS)
            .map(|k| {
                let e = counts.per_keypoint_eligible[k];
                (e > 0).then(|| counts.per_keypoint_hits[k] as f64 / e as f64)
            })
            .collect(),
        pck_visible_only: visible.fraction(),
        joint_errors: JointErrors {
            rotation: joints[0],
            base: joints[1],
            elbow: joints[2],
            wrist: joints[3],
            average: joints.iter().sum::<f64>() / NUM_JOINTS as f64,
        },
        cam_rotation_error: rot / n,
        cam_location_error: loc / n,
        skipped,
    })
}

/// Pair `pred_dir` and `gt_dir` annotations by id and score them. Ids listed
/// as skipped in the prediction manifest are reported, not scored; any other
/// unmatched id is an error.
pub fn evaluate_dataset(pred_dir: &Path, gt_dir: &Path, opts: &EvalOptions) -> Result<EvalReport> {
    let gt_ids: BTreeSet<String> = list_annotation_ids(gt_dir)?.into_iter().collect();
    let pred_ids: BTreeSet<String> = list_annotation_ids(pred_dir)?.into_iter().collect();
    let declared_skips: BTreeMap<String, String> = load_manifest(pred_dir)?.map(|m| m.skipped).unwrap_or_default();
    if let Some(id) = pred_ids.difference(&gt_ids).next() {
        return Err(Error::MissingPair(format!("prediction {id} has no ground truth")));
    }
    let mut skipped = Vec::new();
    let mut pairs = Vec::new();
    for id in &gt_ids {
        if pred_ids.contains(id) {
            pairs.push(id.clone());
        } else if declared_skips.contains_key(id) {
            skipped.push(id.clone());
        } else {
            return Err(Error::MissingPair(format!("ground truth {id} has no prediction")));
        }
    }
    if pairs.is_empty() {
        return Err(Error::EmptyEval("no prediction/ground-truth pairs".into()));
    }
    let scores = opts.exec.map_slice(&pairs, |id| -> Result<SampleScore> {
        let p = load_annotation(&annotation_path(pred_dir, id))?;
        let g = load_annotation(&annotation_path(gt_dir, id))?;
        score_sample(&p.keypoints()?, &p.pose, &g.keypoints()?, &g.pose, opts)
    });
    let scores = scores.into_iter().collect::<Result<Vec<_>>>()?;
    aggregate(&scores, opts, skipped)
}

impl EvalReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn to_table(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "samples            {}", self.n_samples);
        let _ = writeln!(s, "PCK@{:<4}           {:.2}%", self.alpha, 100.0 * self.pck);
        if let Some(v) = self.pck_visible_only {
            let _ = writeln!(s, "PCK (visible)      {:.2}%", 100.0 * v);
        }
        let j = &self.joint_errors;
        let _ = writeln!(s);
        let _ = writeln!(s, "{:>10} {:>10} {:>10} {:>10} {:>10}", JOINT_NAMES[0], JOINT_NAMES[1], JOINT_NAMES[2], JOINT_NAMES[3], "average");
        let _ = writeln!(s, "{:>10.2} {:>10.2} {:>10.2} {:>10.2} {:>10.2}", j.rotation, j.base, j.elbow, j.wrist, j.average);
        let _ = writeln!(s);
        let _ = writeln!(s, "camera rotation    {:.2} deg", self.cam_rotation_error);
        let _ = writeln!(s, "camera location    {:.2} cm", self.cam_location_error);
        if !self.skipped.is_empty() {
            let _ = writeln!(s, "skipped            {}", self.skipped.len());
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::camera::CameraRotation;
    use crate::kinematics::JointAngles;
    use nalgebra::{Rotation3, Unit, Vector2, Vector3};

    fn square() -> Keypoints2D {
        let pts = (0..NUM_KEYPOINTS)
            .map(|k| Vector2::new((k % 5) as f64 * 25.0, (k / 5) as f64 * 20.0))
            .collect();
        Keypoints2D::from_points(pts)
    }

    #[test]
    fn identical_is_perfect() {
        let g = square();
        assert_eq!(pck(&g, &g, 0.2, false).unwrap(), 1.0);
    }

    #[test]
    fn one_miss_out_of_seventeen() {
        let g = square();
        let mut p = g.clone();
        p.points[6].x += 21.0; // normalizer 100 -> threshold 20
        assert!((pck(&p, &g, 0.2, false).unwrap() - 16.0 / 17.0).abs() < 1e-12);
        p.points[6].x -= 1.0;
        assert_eq!(pck(&p, &g, 0.2, false).unwrap(), 1.0);
    }

    #[test]
    fn visible_only_needs_visible_points() {
        let mut g = square();
        g.visible = vec![false; NUM_KEYPOINTS];
        assert!(matches!(pck(&g, &g, 0.2, true), Err(Error::EmptyEval(_))));
        g.visible[2] = true;
        let mut p = g.clone();
        p.points[3].y += 500.0;
        assert_eq!(pck(&p, &g, 0.2, true).unwrap(), 1.0);
    }

    fn pose(joints: JointAngles, rot: CameraRotation) -> PoseVector {
        PoseVector {
            cam_location: Vector3::new(50.0, 10.0, 40.0),
            cam_rotation: rot,
            joints,
        }
    }

    #[test]
    fn pose_error_arithmetic() {
        let rot = CameraRotation::new(10.0, 40.0, 5.0);
        let g = pose(JointAngles::new(10.0, 20.0, 30.0, 40.0), rot);
        let z = pose_error(&g, &g);
        assert_eq!(z.joints, [0.0; 4]);
        assert!(z.cam_rotation.abs() < 1e-6 && z.cam_location == 0.0);
        let p = pose(JointAngles::new(11.0, 18.0, 33.0, 44.0), rot);
        let e = pose_error(&p, &g);
        assert_eq!(e.joints, [1.0, 2.0, 3.0, 4.0]);
        assert_eq!(e.joint_average, 2.5);
    }

    #[test]
    fn rotation_error_matches_axis_angle() {
        let base = CameraRotation::new(30.0, 45.0, -10.0).world_to_camera();
        for axis in [Vector3::new(1.0, 2.0, 3.0), Vector3::new(-0.3, 0.1, 0.9), Vector3::x()] {
            let delta = Rotation3::from_axis_angle(&Unit::new_normalize(axis), 5f64.to_radians());
            let other = delta.matrix() * base;
            assert!((rotation_angle_between(&other, &base) - 5.0).abs() < 1e-9);
        }
    }

    #[test]
    fn report_pools_keypoints() {
        let g = square();
        let mut p = g.clone();
        p.points[0].x += 100.0;
        let gp = pose(JointAngles::ZERO, CameraRotation::new(0.0, 30.0, 0.0));
        let opts = EvalOptions::default();
        let a = score_sample(&p, &gp, &g, &gp, &opts).unwrap();
        let b = score_sample(&g, &gp, &g, &gp, &opts).unwrap();
        let r = aggregate(&[a, b], &opts, vec![]).unwrap();
        assert!((r.pck - 33.0 / 34.0).abs() < 1e-12);
        assert_eq!(r.pck_per_keypoint[0], Some(0.5));
        assert!(aggregate(&[], &opts, vec![]).is_err());
    }
}
