//! Pinhole and weak-perspective projection.
//!
//! Image coordinates have their origin at the top-left corner, `u` to the
//! right and `v` down. The camera looks along its own +z axis.
//!
//! Camera orientation is three angles in degrees, applied as intrinsic
//! Z-Y-X rotations: azimuth about the world up axis, then elevation, then
//! roll about the optical axis. With all three at zero the camera looks along
//! world -x with image-right along world +y and image-down along world -z.
//! Positive elevation tilts the view downward, so a camera placed at azimuth
//! `az`, elevation `el` on a sphere around a point and oriented with the same
//! angles looks straight at that point.

use std::path::Path;

use nalgebra::{Matrix3, Vector2, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kinematics::{JointAngles, Keypoints3D, NUM_KEYPOINTS};

/// Minimum camera-frame depth (cm) for a point to count as in front of the camera.
pub const MIN_DEPTH: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CameraIntrinsics {
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
    pub width: u32,
    pub height: u32,
}

impl Default for CameraIntrinsics {
    /// 256×256 crop with fx = fy = 320.
    fn default() -> Self {
        Self {
            fx: 320.0,
            fy: 320.0,
            cx: 128.0,
            cy: 128.0,
            width: 256,
            height: 256,
        }
    }
}

impl CameraIntrinsics {
    pub fn validate(&self) -> Result<()> {
        if !(self.fx > 0.0 && self.fy > 0.0) {
            return Err(Error::InvalidInput("focal lengths must be positive".into()));
        }
        let inside = |c: f64, n: u32| c.is_finite() && c >= 0.0 && c <= n as f64;
        if !inside(self.cx, self.width) || !inside(self.cy, self.height) {
            return Err(Error::InvalidInput("principal point outside the image".into()));
        }
        Ok(())
    }

    pub fn matrix(&self) -> Matrix3<f64> {
        Matrix3::new(self.fx, 0.0, self.cx, 0.0, self.fy, self.cy, 0.0, 0.0, 1.0)
    }

    pub fn contains(&self, uv: &Vector2<f64>) -> bool {
        uv.x >= 0.0 && uv.y >= 0.0 && uv.x < self.width as f64 && uv.y < self.height as f64
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let intr: Self = serde_json::from_str(text).map_err(|e| Error::parse("intrinsics", e))?;
        intr.validate()?;
        Ok(intr)
    }
}

pub fn load_intrinsics(path: impl AsRef<Path>) -> Result<CameraIntrinsics> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    CameraIntrinsics::from_json(&text)
}

/// Camera orientation in degrees.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct CameraRotation {
    pub az: f64,
    pub el: f64,
    pub roll: f64,
}

impl CameraRotation {
    pub fn new(az: f64, el: f64, roll: f64) -> Self {
        Self { az, el, roll }
    }

    /// World-to-camera rotation.
    pub fn world_to_camera(&self) -> Matrix3<f64> {
        rotation_with_derivatives(self.az.to_radians(), self.el.to_radians(), self.roll.to_radians()).0
    }

    /// Unit viewing direction (camera +z) in world coordinates.
    pub fn view_direction(&self) -> Vector3<f64> {
        let (az, el) = (self.az.to_radians(), self.el.to_radians());
        -Vector3::new(el.cos() * az.cos(), el.cos() * az.sin(), el.sin())
    }
}

/// Intervals (degrees) for camera azimuth, elevation and roll.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CameraRange {
    pub az: [f64; 2],
    pub el: [f64; 2],
    pub roll: [f64; 2],
}

impl Default for CameraRange {
    /// The tabletop setup: az in [0°, 45°], el in [30°, 60°], roll in [-30°, 30°].
    fn default() -> Self {
        Self {
            az: [0.0, 45.0],
            el: [30.0, 60.0],
            roll: [-30.0, 30.0],
        }
    }
}

impl CameraRange {
    pub fn validate(&self) -> Result<()> {
        for (name, [lo, hi]) in [("az", self.az), ("el", self.el), ("roll", self.roll)] {
            if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
                return Err(Error::InvalidInput(format!("{name} range [{lo}, {hi}] is not ordered")));
            }
        }
        if self.el[0] <= -90.0 || self.el[1] >= 90.0 {
            return Err(Error::InvalidInput("elevation range must lie inside (-90°, 90°)".into()));
        }
        Ok(())
    }

    pub fn center(&self) -> CameraRotation {
        let mid = |r: [f64; 2]| 0.5 * (r[0] + r[1]);
        CameraRotation::new(mid(self.az), mid(self.el), mid(self.roll))
    }

    pub fn sample<R: rand::Rng + ?Sized>(&self, rng: &mut R) -> CameraRotation {
        CameraRotation::new(
            crate::sample_interval(rng, self.az),
            crate::sample_interval(rng, self.el),
            crate::sample_interval(rng, self.roll),
        )
    }
}

/// The 10-dimensional pose: camera location and orientation plus four joint angles.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PoseVector {
    /// cm, world frame.
    pub cam_location: Vector3<f64>,
    pub cam_rotation: CameraRotation,
    pub joints: JointAngles,
}

impl PoseVector {
    /// A camera `distance` cm from `target`, placed and oriented at the given
    /// azimuth/elevation so that `target` sits on the optical axis.
    pub fn looking_at(
        target: Vector3<f64>,
        rotation: CameraRotation,
        distance: f64,
        joints: JointAngles,
    ) -> Self {
        Self {
            cam_location: target - rotation.view_direction() * distance,
            cam_rotation: rotation,
            joints,
        }
    }
}

/// World-to-camera extrinsics: `x_cam = rotation * x_world + translation`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Extrinsics {
    pub rotation: Matrix3<f64>,
    pub translation: Vector3<f64>,
}

impl Extrinsics {
    pub fn to_camera(&self, p: &Vector3<f64>) -> Vector3<f64> {
        self.rotation * p + self.translation
    }

    /// Camera centre in world coordinates, `-Rᵀ T`.
    pub fn camera_location(&self) -> Vector3<f64> {
        -(self.rotation.transpose() * self.translation)
    }
}

fn rz(t: f64) -> (Matrix3<f64>, Matrix3<f64>) {
    let (s, c) = t.sin_cos();
    (
        Matrix3::new(c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0),
        Matrix3::new(-s, -c, 0.0, c, -s, 0.0, 0.0, 0.0, 0.0),
    )
}

fn ry(t: f64) -> (Matrix3<f64>, Matrix3<f64>) {
    let (s, c) = t.sin_cos();
    (
        Matrix3::new(c, 0.0, s, 0.0, 1.0, 0.0, -s, 0.0, c),
        Matrix3::new(-s, 0.0, c, 0.0, 0.0, 0.0, -c, 0.0, -s),
    )
}

/// Camera-to-world axes at zero angles (columns: image right, image down, optical axis).
fn base_axes() -> Matrix3<f64> {
    Matrix3::new(0.0, 0.0, -1.0, 1.0, 0.0, 0.0, 0.0, -1.0, 0.0)
}

/// World-to-camera rotation and its partials with respect to az, el, roll (radians).
pub(crate) fn rotation_with_derivatives(az: f64, el: f64, roll: f64) -> (Matrix3<f64>, [Matrix3<f64>; 3]) {
    let (a, da) = rz(az);
    let (b, db_neg) = ry(-el);
    let db = -db_neg;
    let c0 = base_axes();
    let (d, dd) = rz(roll);
    let r_cw = a * b * c0 * d;
    let d_az = da * b * c0 * d;
    let d_el = a * db * c0 * d;
    let d_roll = a * b * c0 * dd;
    (
        r_cw.transpose(),
        [d_az.transpose(), d_el.transpose(), d_roll.transpose()],
    )
}

/// Rotation and translation of the camera described by `p`.
pub fn pose_to_extrinsics(p: &PoseVector) -> Result<Extrinsics> {
    let CameraRotation { az, el, roll } = p.cam_rotation;
    if !(el > -90.0 && el < 90.0) {
        return Err(Error::InvalidInput(format!(
            "camera elevation {el}° outside (-90°, 90°)"
        )));
    }
    if !(az.is_finite() && roll.is_finite() && p.cam_location.iter().all(|v| v.is_finite())) {
        return Err(Error::InvalidInput("non-finite camera parameters".into()));
    }
    let rotation = p.cam_rotation.world_to_camera();
    Ok(Extrinsics {
        rotation,
        translation: -(rotation * p.cam_location),
    })
}

/// Detected or projected 2D keypoints.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Keypoints2D {
    /// (u, v) in pixels.
    pub points: Vec<Vector2<f64>>,
    /// Detection confidence in [0, 1].
    pub confidence: Vec<f64>,
    pub visible: Vec<bool>,
}

impl Keypoints2D {
    pub fn new(points: Vec<Vector2<f64>>, confidence: Vec<f64>, visible: Vec<bool>) -> Result<Self> {
        let kp = Self {
            points,
            confidence,
            visible,
        };
        kp.validate()?;
        Ok(kp)
    }

    /// Points with confidence 1, all visible.
    pub fn from_points(points: Vec<Vector2<f64>>) -> Self {
        let n = points.len();
        Self {
            points,
            confidence: vec![1.0; n],
            visible: vec![true; n],
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.points.len() != NUM_KEYPOINTS
            || self.confidence.len() != NUM_KEYPOINTS
            || self.visible.len() != NUM_KEYPOINTS
        {
            return Err(Error::InvalidInput(format!(
                "expected {NUM_KEYPOINTS} 2D keypoints"
            )));
        }
        if self.confidence.iter().any(|c| !(0.0..=1.0).contains(c)) {
            return Err(Error::InvalidInput("confidence outside [0, 1]".into()));
        }
        if self.points.iter().any(|p| !(p.x.is_finite() && p.y.is_finite())) {
            return Err(Error::InvalidInput("non-finite 2D keypoint".into()));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionResult {
    /// Confidences are 1; `visible` flags whether the point lands inside the image.
    pub points2d: Keypoints2D,
    /// Homogeneous scale per keypoint, equal to the camera-frame depth (cm).
    pub scales: Vec<f64>,
}

/// Full-perspective projection of world points through explicit extrinsics.
pub fn project_with_extrinsics(
    intr: &CameraIntrinsics,
    ext: &Extrinsics,
    z: &Keypoints3D,
) -> Result<ProjectionResult> {
    let k = intr.matrix();
    let mut points = Vec::with_capacity(z.len());
    let mut scales = Vec::with_capacity(z.len());
    let mut visible = Vec::with_capacity(z.len());
    for (i, p) in z.coords.iter().enumerate() {
        let h = k * ext.to_camera(p);
        if !(h.z > MIN_DEPTH) {
            return Err(Error::BehindCamera(format!(
                "keypoint {i} has depth {} cm",
                h.z
            )));
        }
        let uv = Vector2::new(h.x / h.z, h.y / h.z);
        visible.push(intr.contains(&uv));
        points.push(uv);
        scales.push(h.z);
    }
    let n = points.len();
    Ok(ProjectionResult {
        points2d: Keypoints2D {
            points,
            confidence: vec![1.0; n],
            visible,
        },
        scales,
    })
}

/// Project world keypoints with the camera of `p`. Points outside the image are
/// kept and flagged through `visible`.
pub fn project(intr: &CameraIntrinsics, p: &PoseVector, z: &Keypoints3D) -> Result<ProjectionResult> {
    project_with_extrinsics(intr, &pose_to_extrinsics(p)?, z)
}

/// Weak-perspective (scaled orthographic) projection: camera-frame x/y scaled
/// by `scale` pixels per cm and offset by the principal point.
pub fn weak_project(
    scale: f64,
    principal: Vector2<f64>,
    p: &PoseVector,
    z: &Keypoints3D,
) -> Result<Keypoints2D> {
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(Error::InvalidInput(format!("weak-perspective scale {scale} must be positive")));
    }
    let ext = pose_to_extrinsics(p)?;
    let points: Vec<Vector2<f64>> = z
        .coords
        .iter()
        .map(|w| {
            let c = ext.to_camera(w);
            principal + Vector2::new(c.x, c.y) * scale
        })
        .collect();
    Ok(Keypoints2D::from_points(points))
}

/// Largest per-point violation of `S_k [y_k | 1]ᵀ = K (R z_k + T)` when each
/// `S_k` is recovered from the third row of the system.
pub fn projection_consistency(
    intr: &CameraIntrinsics,
    p: &PoseVector,
    z: &Keypoints3D,
    y: &Keypoints2D,
) -> Result<f64> {
    let ext = pose_to_extrinsics(p)?;
    let k = intr.matrix();
    let mut worst: f64 = 0.0;
    for (w, uv) in z.coords.iter().zip(&y.points) {
        let rhs = k * ext.to_camera(w);
        let s = rhs.z;
        let lhs = Vector3::new(uv.x, uv.y, 1.0) * s;
        worst = worst.max((lhs - rhs).norm());
    }
    Ok(worst)
}
