//! Forward kinematics of the 4-joint arm.
//!
//! The model is a tree of rigid parts. Each actuated part rotates about an
//! axis through a pivot, both expressed in the rest frame (all joints at 0°),
//! which is also the world frame: origin at the base on the table, z up.
//! A keypoint's world position is its rest coordinate pushed through the
//! product of motor transforms of every joint between its part and the root.

use std::collections::HashMap;
use std::path::Path;

use nalgebra::{Matrix3, Rotation3, Unit, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const NUM_KEYPOINTS: usize = 17;
pub const NUM_JOINTS: usize = 4;
pub const JOINT_NAMES: [&str; NUM_JOINTS] = ["rotation", "base", "elbow", "wrist"];
/// Range of motion of each motor, in degrees.
pub const JOINT_SPANS_DEG: [f64; NUM_JOINTS] = [270.0, 180.0, 300.0, 120.0];

const UNIT_AXIS_TOL: f64 = 1e-9;
const SPAN_TOL: f64 = 1e-9;

static OWI535_JSON: &str = include_str!("../models/owi535.json");

/// The four motor angles, in degrees.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct JointAngles {
    pub rotation: f64,
    pub base: f64,
    pub elbow: f64,
    pub wrist: f64,
}

impl JointAngles {
    pub const ZERO: JointAngles = JointAngles {
        rotation: 0.0,
        base: 0.0,
        elbow: 0.0,
        wrist: 0.0,
    };

    pub fn new(rotation: f64, base: f64, elbow: f64, wrist: f64) -> Self {
        Self {
            rotation,
            base,
            elbow,
            wrist,
        }
    }

    pub fn from_array(a: [f64; NUM_JOINTS]) -> Self {
        Self::new(a[0], a[1], a[2], a[3])
    }

    pub fn to_array(self) -> [f64; NUM_JOINTS] {
        [self.rotation, self.base, self.elbow, self.wrist]
    }

    pub fn to_radians(self) -> [f64; NUM_JOINTS] {
        self.to_array().map(f64::to_radians)
    }

    pub fn from_radians(r: [f64; NUM_JOINTS]) -> Self {
        Self::from_array(r.map(f64::to_degrees))
    }
}

/// A proper rigid transform `x -> rotation * x + translation` (cm).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RigidTransform {
    pub rotation: Matrix3<f64>,
    pub translation: Vector3<f64>,
}

impl RigidTransform {
    pub fn identity() -> Self {
        Self {
            rotation: Matrix3::identity(),
            translation: Vector3::zeros(),
        }
    }

    /// Rotation by `angle_rad` about the line through `pivot` along `axis`.
    pub fn about_axis(axis: &Unit<Vector3<f64>>, pivot: &Vector3<f64>, angle_rad: f64) -> Self {
        let rotation = *Rotation3::from_axis_angle(axis, angle_rad).matrix();
        Self {
            rotation,
            translation: pivot - rotation * pivot,
        }
    }

    pub fn apply(&self, p: &Vector3<f64>) -> Vector3<f64> {
        self.rotation * p + self.translation
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &RigidTransform) -> RigidTransform {
        RigidTransform {
            rotation: self.rotation * other.rotation,
            translation: self.rotation * other.translation + self.translation,
        }
    }

    pub fn inverse(&self) -> RigidTransform {
        let rt = self.rotation.transpose();
        RigidTransform {
            rotation: rt,
            translation: -(rt * self.translation),
        }
    }
}

/// 3D keypoint coordinates in cm, world frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Keypoints3D {
    pub coords: Vec<Vector3<f64>>,
}

impl Keypoints3D {
    pub fn new(coords: Vec<Vector3<f64>>) -> Result<Self> {
        if coords.len() != NUM_KEYPOINTS {
            return Err(Error::InvalidInput(format!(
                "expected {NUM_KEYPOINTS} 3D keypoints, got {}",
                coords.len()
            )));
        }
        if coords.iter().any(|c| !c.iter().all(|v| v.is_finite())) {
            return Err(Error::InvalidInput("non-finite 3D keypoint".into()));
        }
        Ok(Self { coords })
    }

    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn centroid(&self) -> Vector3<f64> {
        self.coords.iter().sum::<Vector3<f64>>() / self.coords.len().max(1) as f64
    }
}

impl std::ops::Index<usize> for Keypoints3D {
    type Output = Vector3<f64>;
    fn index(&self, i: usize) -> &Vector3<f64> {
        &self.coords[i]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Part {
    pub name: String,
    pub parent: Option<usize>,
    pub axis: Unit<Vector3<f64>>,
    pub pivot: Vector3<f64>,
    /// Index of the joint actuating this part, if any.
    pub joint: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Joint {
    pub name: &'static str,
    pub part: usize,
    pub limit_deg: [f64; 2],
}

impl Joint {
    pub fn contains(&self, angle_deg: f64) -> bool {
        angle_deg >= self.limit_deg[0] && angle_deg <= self.limit_deg[1]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KeypointDef {
    pub id: usize,
    pub part: usize,
    pub rest: Vector3<f64>,
}

/// The geometric prior: rigid parts, joint axes and limits, rest keypoints.
///
/// Immutable after construction; validated on every load.
#[derive(Debug, Clone, PartialEq)]
pub struct ArmModel {
    pub name: String,
    pub parts: Vec<Part>,
    pub joints: Vec<Joint>,
    /// Sorted by id; `keypoints[k].id == k`.
    pub keypoints: Vec<KeypointDef>,
    pub tip_keypoint: usize,
    /// Parts in parent-before-child order.
    order: Vec<usize>,
    /// Joint indices from the root down to each part.
    chains: Vec<Vec<usize>>,
}

// On-disk schema.

#[derive(Debug, Clone, Serialize, Deserialize)]
struct PartFile {
    name: String,
    parent: Option<String>,
    axis: [f64; 3],
    pivot: [f64; 3],
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct JointFile {
    name: String,
    part: String,
    limit_deg: [f64; 2],
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct KeypointFile {
    id: usize,
    part: String,
    rest: [f64; 3],
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct ArmModelFile {
    name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    version: Option<u32>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    notes: Vec<String>,
    parts: Vec<PartFile>,
    joints: Vec<JointFile>,
    keypoints: Vec<KeypointFile>,
    tip_keypoint: usize,
}

/// Load and validate an arm model JSON file.
pub fn load_arm_model(path: impl AsRef<Path>) -> Result<ArmModel> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    ArmModel::from_json(&text)
}

impl ArmModel {
    /// The bundled OWI-535 reference model.
    pub fn owi535() -> ArmModel {
        Self::from_json(OWI535_JSON).expect("bundled model is valid")
    }

    pub fn from_json(text: &str) -> Result<ArmModel> {
        let file: ArmModelFile =
            serde_json::from_str(text).map_err(|e| Error::parse("arm model", e))?;
        Self::from_file_repr(file)
    }

    pub fn to_json(&self) -> String {
        let file = ArmModelFile {
            name: self.name.clone(),
            version: Some(1),
            notes: Vec::new(),
            parts: self
                .parts
                .iter()
                .map(|p| PartFile {
                    name: p.name.clone(),
                    parent: p.parent.map(|i| self.parts[i].name.clone()),
                    axis: [p.axis.x, p.axis.y, p.axis.z],
                    pivot: [p.pivot.x, p.pivot.y, p.pivot.z],
                })
                .collect(),
            joints: self
                .joints
                .iter()
                .map(|j| JointFile {
                    name: j.name.to_string(),
                    part: self.parts[j.part].name.clone(),
                    limit_deg: j.limit_deg,
                })
                .collect(),
            keypoints: self
                .keypoints
                .iter()
                .map(|k| KeypointFile {
                    id: k.id,
                    part: self.parts[k.part].name.clone(),
                    rest: [k.rest.x, k.rest.y, k.rest.z],
                })
                .collect(),
            tip_keypoint: self.tip_keypoint,
        };
        serde_json::to_string_pretty(&file).expect("model serializes")
    }

    fn from_file_repr(file: ArmModelFile) -> Result<ArmModel> {
        let bad = |m: String| Err(Error::ModelInvariant(m));

        let mut part_index = HashMap::new();
        for (i, p) in file.parts.iter().enumerate() {
            if part_index.insert(p.name.clone(), i).is_some() {
                return bad(format!("duplicate part `{}`", p.name));
            }
        }

        let mut parts = Vec::with_capacity(file.parts.len());
        for p in &file.parts {
            let parent = match &p.parent {
                None => None,
                Some(name) => match part_index.get(name) {
                    Some(&i) => Some(i),
                    None => return bad(format!("part `{}` has unknown parent `{name}`", p.name)),
                },
            };
            let axis = Vector3::from(p.axis);
            if !axis.iter().chain(p.pivot.iter()).all(|v| v.is_finite()) {
                return bad(format!("part `{}` has non-finite geometry", p.name));
            }
            if (axis.norm() - 1.0).abs() > UNIT_AXIS_TOL {
                return bad(format!(
                    "part `{}` axis has norm {}, expected a unit vector",
                    p.name,
                    axis.norm()
                ));
            }
            parts.push(Part {
                name: p.name.clone(),
                parent,
                axis: Unit::new_unchecked(axis),
                pivot: Vector3::from(p.pivot),
                joint: None,
            });
        }

        let roots = parts.iter().filter(|p| p.parent.is_none()).count();
        if roots != 1 {
            return bad(format!("expected exactly one root part, found {roots}"));
        }
        let order = topological_order(&parts)?;

        if file.joints.len() != NUM_JOINTS {
            return bad(format!(
                "expected {NUM_JOINTS} joints, found {}",
                file.joints.len()
            ));
        }
        let mut joints = Vec::with_capacity(NUM_JOINTS);
        for (j, jf) in file.joints.iter().enumerate() {
            if jf.name != JOINT_NAMES[j] {
                return bad(format!(
                    "joint {j} must be named `{}`, found `{}`",
                    JOINT_NAMES[j], jf.name
                ));
            }
            let Some(&part) = part_index.get(&jf.part) else {
                return bad(format!("joint `{}` refers to unknown part `{}`", jf.name, jf.part));
            };
            if parts[part].parent.is_none() {
                return bad(format!("joint `{}` cannot actuate the root part", jf.name));
            }
            if parts[part].joint.is_some() {
                return bad(format!("part `{}` has more than one joint", jf.part));
            }
            let [lo, hi] = jf.limit_deg;
            if !(lo.is_finite() && hi.is_finite() && lo <= 0.0 && 0.0 <= hi) {
                return bad(format!(
                    "joint `{}` limit [{lo}, {hi}] must contain the rest angle 0",
                    jf.name
                ));
            }
            if ((hi - lo) - JOINT_SPANS_DEG[j]).abs() > SPAN_TOL {
                return bad(format!(
                    "joint `{}` spans {}°, expected {}°",
                    jf.name,
                    hi - lo,
                    JOINT_SPANS_DEG[j]
                ));
            }
            parts[part].joint = Some(j);
            joints.push(Joint {
                name: JOINT_NAMES[j],
                part,
                limit_deg: jf.limit_deg,
            });
        }

        if file.keypoints.len() != NUM_KEYPOINTS {
            return bad(format!(
                "expected {NUM_KEYPOINTS} keypoints, found {}",
                file.keypoints.len()
            ));
        }
        let mut keypoints: Vec<Option<KeypointDef>> = vec![None; NUM_KEYPOINTS];
        for k in &file.keypoints {
            if k.id >= NUM_KEYPOINTS {
                return bad(format!("keypoint id {} out of range", k.id));
            }
            let Some(&part) = part_index.get(&k.part) else {
                return bad(format!("keypoint {} owned by unknown part `{}`", k.id, k.part));
            };
            if !k.rest.iter().all(|v| v.is_finite()) {
                return bad(format!("keypoint {} has non-finite rest coordinate", k.id));
            }
            if keypoints[k.id].is_some() {
                return bad(format!("duplicate keypoint id {}", k.id));
            }
            keypoints[k.id] = Some(KeypointDef {
                id: k.id,
                part,
                rest: Vector3::from(k.rest),
            });
        }
        let keypoints: Vec<KeypointDef> = keypoints.into_iter().map(Option::unwrap).collect();
        if file.tip_keypoint >= NUM_KEYPOINTS {
            return bad(format!("tip keypoint {} out of range", file.tip_keypoint));
        }

        let mut chains = vec![Vec::new(); parts.len()];
        for &p in &order {
            let mut chain = parts[p].parent.map(|q| chains[q].clone()).unwrap_or_default();
            if let Some(j) = parts[p].joint {
                chain.push(j);
            }
            chains[p] = chain;
        }

        Ok(ArmModel {
            name: file.name,
            parts,
            joints,
            keypoints,
            tip_keypoint: file.tip_keypoint,
            order,
            chains,
        })
    }

    /// Joint indices between a part and the root, root first.
    pub fn chain(&self, part: usize) -> &[usize] {
        &self.chains[part]
    }

    pub fn rest_keypoints(&self) -> Keypoints3D {
        Keypoints3D {
            coords: self.keypoints.iter().map(|k| k.rest).collect(),
        }
    }

    pub fn check_limits(&self, angles: &JointAngles) -> Result<()> {
        for (j, a) in angles.to_array().into_iter().enumerate() {
            self.check_joint(j, a)?;
        }
        Ok(())
    }

    fn check_joint(&self, j: usize, angle_deg: f64) -> Result<()> {
        let joint = &self.joints[j];
        if !joint.contains(angle_deg) {
            return Err(Error::JointLimit {
                joint: joint.name,
                angle_deg,
                min_deg: joint.limit_deg[0],
                max_deg: joint.limit_deg[1],
            });
        }
        Ok(())
    }

    /// Clamp each angle into its limit interval.
    pub fn clamp(&self, angles: &JointAngles) -> JointAngles {
        let mut a = angles.to_array();
        for (j, v) in a.iter_mut().enumerate() {
            let [lo, hi] = self.joints[j].limit_deg;
            *v = v.clamp(lo, hi);
        }
        JointAngles::from_array(a)
    }

    /// World transform of every part, given joint angles in radians. No limit check.
    pub fn part_transforms(&self, radians: &[f64; NUM_JOINTS]) -> Vec<RigidTransform> {
        let mut world = vec![RigidTransform::identity(); self.parts.len()];
        for &p in &self.order {
            let part = &self.parts[p];
            let parent = part.parent.map(|q| world[q]).unwrap_or_else(RigidTransform::identity);
            world[p] = match part.joint {
                Some(j) => {
                    parent.compose(&RigidTransform::about_axis(&part.axis, &part.pivot, radians[j]))
                }
                None => parent,
            };
        }
        world
    }

    /// Forward kinematics in radians without limit checks.
    pub fn keypoints_at_radians(&self, radians: &[f64; NUM_JOINTS]) -> Keypoints3D {
        let world = self.part_transforms(radians);
        Keypoints3D {
            coords: self
                .keypoints
                .iter()
                .map(|k| world[k.part].apply(&k.rest))
                .collect(),
        }
    }

    /// Keypoints plus `d keypoint / d joint` (cm per radian) for all joints.
    pub fn keypoints_and_jacobian(
        &self,
        radians: &[f64; NUM_JOINTS],
    ) -> (Keypoints3D, Vec<[Vector3<f64>; NUM_JOINTS]>) {
        let world = self.part_transforms(radians);
        // World-frame axis and pivot of each joint at this configuration.
        let mut axes = [Vector3::zeros(); NUM_JOINTS];
        let mut pivots = [Vector3::zeros(); NUM_JOINTS];
        for (j, joint) in self.joints.iter().enumerate() {
            let part = &self.parts[joint.part];
            let parent = part.parent.map(|q| world[q]).unwrap_or_else(RigidTransform::identity);
            axes[j] = parent.rotation * part.axis.into_inner();
            pivots[j] = parent.apply(&part.pivot);
        }
        let mut coords = Vec::with_capacity(NUM_KEYPOINTS);
        let mut jac = Vec::with_capacity(NUM_KEYPOINTS);
        for k in &self.keypoints {
            let z = world[k.part].apply(&k.rest);
            let mut d = [Vector3::zeros(); NUM_JOINTS];
            for &j in self.chain(k.part) {
                d[j] = axes[j].cross(&(z - pivots[j]));
            }
            coords.push(z);
            jac.push(d);
        }
        (Keypoints3D { coords }, jac)
    }

    /// Radius of a sphere about the rotation joint's pivot that contains every
    /// reachable tip position.
    pub fn reach_bound(&self) -> f64 {
        let (_, length) = self.tip_chain_lengths();
        length
    }

    /// Upper bound on the tip's horizontal distance from the rotation axis.
    pub fn horizontal_reach_bound(&self) -> f64 {
        let (offset, _) = self.tip_chain_lengths();
        offset
    }

    /// (distance-from-rotation-axis bound, distance-from-rotation-pivot bound).
    fn tip_chain_lengths(&self) -> (f64, f64) {
        let tip = &self.keypoints[self.tip_keypoint];
        let chain = self.chain(tip.part);
        let pivots: Vec<Vector3<f64>> = chain
            .iter()
            .map(|&j| self.parts[self.joints[j].part].pivot)
            .collect();
        if pivots.is_empty() {
            let r = tip.rest.norm();
            return (r, r);
        }
        let mut links = 0.0;
        for w in pivots.windows(2) {
            links += (w[1] - w[0]).norm();
        }
        links += (tip.rest - pivots[pivots.len() - 1]).norm();
        let root_joint = &self.parts[self.joints[chain[0]].part];
        let sphere = links;
        let horizontal = if pivots.len() >= 2 {
            let axis = root_joint.axis.into_inner();
            let rel = pivots[1] - root_joint.pivot;
            let radial = rel - axis * axis.dot(&rel);
            radial.norm() + links - (pivots[1] - pivots[0]).norm()
        } else {
            links
        };
        (horizontal, sphere)
    }
}

fn topological_order(parts: &[Part]) -> Result<Vec<usize>> {
    let n = parts.len();
    let mut depth = vec![None; n];
    for start in 0..n {
        let mut seen = 0;
        let mut cur = start;
        let mut d = 0usize;
        while let Some(p) = parts[cur].parent {
            cur = p;
            d += 1;
            seen += 1;
            if seen > n {
                return Err(Error::ModelInvariant(format!(
                    "part graph has a cycle through `{}`",
                    parts[start].name
                )));
            }
        }
        depth[start] = Some(d);
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&i| (depth[i], i));
    Ok(order)
}

/// The transform a single joint applies at `angle_deg` (in the rest frame).
pub fn motor_transform(model: &ArmModel, joint_index: usize, angle_deg: f64) -> Result<RigidTransform> {
    if joint_index >= NUM_JOINTS {
        return Err(Error::InvalidInput(format!("joint index {joint_index} out of range")));
    }
    model.check_joint(joint_index, angle_deg)?;
    let part = &model.parts[model.joints[joint_index].part];
    if angle_deg == 0.0 {
        return Ok(RigidTransform::identity());
    }
    Ok(RigidTransform::about_axis(
        &part.axis,
        &part.pivot,
        angle_deg.to_radians(),
    ))
}

/// World keypoint coordinates for in-limit joint angles.
pub fn forward_kinematics(model: &ArmModel, angles: &JointAngles) -> Result<Keypoints3D> {
    model.check_limits(angles)?;
    Ok(model.keypoints_at_radians(&angles.to_radians()))
}

/// The designated tip keypoint's world position.
pub fn tip_position(model: &ArmModel, angles: &JointAngles) -> Result<Vector3<f64>> {
    Ok(forward_kinematics(model, angles)?[model.tip_keypoint])
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn model_json_with(f: impl FnOnce(&mut serde_json::Value)) -> String {
        let mut v: serde_json::Value = serde_json::from_str(OWI535_JSON).unwrap();
        f(&mut v);
        v.to_string()
    }

    #[test]
    fn bundled_model_loads() {
        let m = ArmModel::owi535();
        assert_eq!(m.keypoints.len(), 17);
        assert_eq!(m.joints.len(), 4);
        for (j, joint) in m.joints.iter().enumerate() {
            assert_eq!(joint.name, JOINT_NAMES[j]);
            assert_relative_eq!(joint.limit_deg[1] - joint.limit_deg[0], JOINT_SPANS_DEG[j]);
        }
    }

    #[test]
    fn rejects_wrong_span() {
        let text = model_json_with(|v| v["joints"][0]["limit_deg"] = serde_json::json!([-180.0, 180.0]));
        assert!(matches!(ArmModel::from_json(&text), Err(Error::ModelInvariant(_))));
    }

    #[test]
    fn rejects_unknown_keypoint_part() {
        let text = model_json_with(|v| v["keypoints"][3]["part"] = "tail".into());
        assert!(matches!(ArmModel::from_json(&text), Err(Error::ModelInvariant(_))));
    }

    #[test]
    fn rejects_sixteen_keypoints() {
        let text = model_json_with(|v| {
            v["keypoints"].as_array_mut().unwrap().pop();
        });
        assert!(matches!(ArmModel::from_json(&text), Err(Error::ModelInvariant(_))));
    }

    #[test]
    fn rejects_cycle() {
        let text = model_json_with(|v| v["parts"][0]["parent"] = "gripper".into());
        assert!(matches!(ArmModel::from_json(&text), Err(Error::ModelInvariant(_))));
    }

    #[test]
    fn rejects_non_unit_axis() {
        let text = model_json_with(|v| v["parts"][2]["axis"] = serde_json::json!([0.0, 1.0001, 0.0]));
        assert!(matches!(ArmModel::from_json(&text), Err(Error::ModelInvariant(_))));
    }

    #[test]
    fn malformed_json_is_parse_error() {
        assert!(matches!(ArmModel::from_json("{ nope"), Err(Error::Parse { .. })));
    }

    #[test]
    fn json_round_trip() {
        let m = ArmModel::owi535();
        assert_eq!(ArmModel::from_json(&m.to_json()).unwrap(), m);
    }

    #[test]
    fn zero_angle_is_identity() {
        let m = ArmModel::owi535();
        for j in 0..NUM_JOINTS {
            assert_eq!(motor_transform(&m, j, 0.0).unwrap(), RigidTransform::identity());
        }
    }

    #[test]
    fn rotation_joint_quarter_turn() {
        let m = ArmModel::owi535();
        let t = motor_transform(&m, 0, 90.0).unwrap();
        let p = t.apply(&Vector3::new(1.0, 0.0, 5.0));
        assert_relative_eq!(p, Vector3::new(0.0, 1.0, 5.0), epsilon = 1e-12);
    }

    #[test]
    fn elbow_inverse_composes_to_identity() {
        let m = ArmModel::owi535();
        let a = motor_transform(&m, 2, 30.0).unwrap();
        let b = motor_transform(&m, 2, -30.0).unwrap();
        let c = a.compose(&b);
        assert_relative_eq!(c.rotation, Matrix3::identity(), epsilon = 1e-12);
        assert_relative_eq!(c.translation, Vector3::zeros(), epsilon = 1e-12);
        let inv = a.inverse().compose(&a);
        assert_relative_eq!(inv.translation, Vector3::zeros(), epsilon = 1e-12);
    }

    #[test]
    fn zero_angles_give_rest_pose() {
        let m = ArmModel::owi535();
        let z = forward_kinematics(&m, &JointAngles::ZERO).unwrap();
        assert_eq!(z, m.rest_keypoints());
        assert_eq!(tip_position(&m, &JointAngles::ZERO).unwrap(), m.keypoints[16].rest);
    }

    #[test]
    fn limits_are_inclusive_and_enforced() {
        let m = ArmModel::owi535();
        let lo = JointAngles::from_array(m.joints.iter().map(|j| j.limit_deg[0]).collect::<Vec<_>>().try_into().unwrap());
        let hi = JointAngles::from_array(m.joints.iter().map(|j| j.limit_deg[1]).collect::<Vec<_>>().try_into().unwrap());
        assert!(forward_kinematics(&m, &lo).is_ok());
        assert!(forward_kinematics(&m, &hi).is_ok());
        for j in 0..NUM_JOINTS {
            let mut a = JointAngles::ZERO.to_array();
            a[j] = m.joints[j].limit_deg[1] + 1e-6;
            assert!(matches!(
                forward_kinematics(&m, &JointAngles::from_array(a)),
                Err(Error::JointLimit { .. })
            ));
            assert!(matches!(motor_transform(&m, j, a[j]), Err(Error::JointLimit { .. })));
        }
    }

    #[test]
    fn rotation_joint_preserves_axis_distance() {
        let m = ArmModel::owi535();
        let rest = m.rest_keypoints();
        let phi: f64 = 37.0;
        let z = forward_kinematics(&m, &JointAngles::new(phi, 0.0, 0.0, 0.0)).unwrap();
        let rot = Rotation3::from_axis_angle(&Vector3::z_axis(), phi.to_radians());
        for k in 0..NUM_KEYPOINTS {
            let r0 = rest[k].xy().norm();
            assert_relative_eq!(z[k].xy().norm(), r0, epsilon = 1e-9);
            assert_relative_eq!(z[k].z, rest[k].z, epsilon = 1e-9);
            if m.parts[m.keypoints[k].part].parent.is_some() {
                assert_relative_eq!(z[k], rot * rest[k], epsilon = 1e-9);
            } else {
                assert_eq!(z[k], rest[k]);
            }
        }
    }

    #[test]
    fn reach_bounds_cover_straight_arm() {
        let m = ArmModel::owi535();
        let tip = tip_position(&m, &JointAngles::new(0.0, 90.0, 0.0, 0.0)).unwrap();
        assert!(tip.xy().norm() <= m.horizontal_reach_bound() + 1e-12);
        assert!(tip.norm() <= m.reach_bound() + 1e-12);
    }
}
