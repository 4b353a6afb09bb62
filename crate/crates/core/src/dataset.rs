//! Annotation and manifest files shared by the generator, the label exporter
//! and the evaluator.
//!
//! Layout of a dataset directory:
//! `manifest.json`, `annotations/<id>.json`, optionally `heatmaps/<id>.hmap`.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use nalgebra::Vector2;
use serde::{Deserialize, Serialize};

use crate::camera::{CameraIntrinsics, Keypoints2D, PoseVector};
use crate::error::{Error, Result};
use crate::kinematics::{Keypoints3D, NUM_KEYPOINTS};

pub const ANNOTATION_DIR: &str = "annotations";
pub const HEATMAP_DIR: &str = "heatmaps";
pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KeypointRecord {
    pub id: usize,
    pub u: f64,
    pub v: f64,
    pub visible: bool,
    pub confidence: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Annotation {
    pub image_id: String,
    pub intrinsics: CameraIntrinsics,
    pub pose: PoseVector,
    pub keypoints2d: Vec<KeypointRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub keypoints3d: Option<Keypoints3D>,
    /// Free-form solver details attached to pseudo-labels.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub meta: Option<serde_json::Value>,
}

impl Annotation {
    pub fn new(
        image_id: impl Into<String>,
        intrinsics: CameraIntrinsics,
        pose: PoseVector,
        y: &Keypoints2D,
        z: Option<Keypoints3D>,
    ) -> Self {
        let keypoints2d = (0..y.len())
            .map(|k| KeypointRecord {
                id: k,
                u: y.points[k].x,
                v: y.points[k].y,
                visible: y.visible[k],
                confidence: y.confidence[k],
            })
            .collect();
        Self {
            image_id: image_id.into(),
            intrinsics,
            pose,
            keypoints2d,
            keypoints3d: z,
            meta: None,
        }
    }

    /// Keypoints in id order.
    pub fn keypoints(&self) -> Result<Keypoints2D> {
        let mut slots: Vec<Option<&KeypointRecord>> = vec![None; NUM_KEYPOINTS];
        for r in &self.keypoints2d {
            let slot = slots.get_mut(r.id).ok_or_else(|| {
                Error::parse(format!("annotation {}", self.image_id), format!("keypoint id {} out of range", r.id))
            })?;
            if slot.replace(r).is_some() {
                return Err(Error::parse(
                    format!("annotation {}", self.image_id),
                    format!("duplicate keypoint id {}", r.id),
                ));
            }
        }
        let mut points = Vec::with_capacity(NUM_KEYPOINTS);
        let mut confidence = Vec::with_capacity(NUM_KEYPOINTS);
        let mut visible = Vec::with_capacity(NUM_KEYPOINTS);
        for (k, s) in slots.into_iter().enumerate() {
            let r = s.ok_or_else(|| {
                Error::parse(format!("annotation {}", self.image_id), format!("missing keypoint {k}"))
            })?;
            points.push(Vector2::new(r.u, r.v));
            confidence.push(r.confidence);
            visible.push(r.visible);
        }
        Keypoints2D::new(points, confidence, visible)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("annotation serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let a: Self = serde_json::from_str(text).map_err(|e| Error::parse("annotation", e))?;
        a.keypoints()?;
        if let Some(z) = &a.keypoints3d {
            Keypoints3D::new(z.coords.clone()).map_err(|e| Error::parse("annotation", e))?;
        }
        Ok(a)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct Manifest {
    /// What produced the directory, e.g. `synthetic` or `pseudo-labels`.
    pub kind: String,
    pub count: usize,
    #[serde(default)]
    pub seed: Option<u64>,
    /// Split name to image ids.
    #[serde(default)]
    pub splits: BTreeMap<String, Vec<String>>,
    /// Ids that were attempted but produced no annotation, with the reason.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub skipped: BTreeMap<String, String>,
    /// Extra producer-specific settings.
    #[serde(default, skip_serializing_if = "serde_json::Map::is_empty")]
    pub settings: serde_json::Map<String, serde_json::Value>,
}

pub fn annotation_path(dir: &Path, id: &str) -> PathBuf {
    dir.join(ANNOTATION_DIR).join(format!("{id}.json"))
}

pub fn heatmap_path(dir: &Path, id: &str) -> PathBuf {
    dir.join(HEATMAP_DIR).join(format!("{id}.hmap"))
}

pub(crate) fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub(crate) fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

pub fn save_annotation(dir: &Path, a: &Annotation) -> Result<PathBuf> {
    let path = annotation_path(dir, &a.image_id);
    write_text(&path, &a.to_json())?;
    Ok(path)
}

pub fn load_annotation(path: &Path) -> Result<Annotation> {
    Annotation::from_json(&read_text(path)?)
}

pub fn save_manifest(dir: &Path, m: &Manifest) -> Result<()> {
    let text = serde_json::to_string_pretty(m).expect("manifest serializes");
    write_text(&dir.join(MANIFEST_FILE), &text)
}

/// `None` when the directory has no manifest.
pub fn load_manifest(dir: &Path) -> Result<Option<Manifest>> {
    let path = dir.join(MANIFEST_FILE);
    if !path.exists() {
        return Ok(None);
    }
    serde_json::from_str(&read_text(&path)?)
        .map(Some)
        .map_err(|e| Error::parse(path.display().to_string(), e))
}

/// Sorted stems of the files in `dir` with extension `ext`.
pub fn list_ids(dir: &Path, ext: &str) -> Result<Vec<String>> {
    let entries = std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    let mut ids = Vec::new();
    for entry in entries {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        if path.extension().is_some_and(|e| e == ext) {
            if let Some(stem) = path.file_stem().and_then(|s| s.to_str()) {
                ids.push(stem.to_string());
            }
        }
    }
    ids.sort();
    Ok(ids)
}

pub fn list_annotation_ids(dir: &Path) -> Result<Vec<String>> {
    list_ids(&dir.join(ANNOTATION_DIR), "json")
}

pub fn list_heatmap_ids(dir: &Path) -> Result<Vec<String>> {
    list_ids(&dir.join(HEATMAP_DIR), "hmap")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::camera::CameraRotation;
    use crate::kinematics::{forward_kinematics, ArmModel, JointAngles};

    fn sample() -> Annotation {
        let model = ArmModel::owi535();
        let j = JointAngles::new(10.0, 20.0, 30.0, 40.0);
        let z = forward_kinematics(&model, &j).unwrap();
        let p = PoseVector::looking_at(z.centroid(), CameraRotation::new(10.0, 40.0, 0.0), 60.0, j);
        let y = crate::camera::project(&CameraIntrinsics::default(), &p, &z).unwrap().points2d;
        Annotation::new("000003", CameraIntrinsics::default(), p, &y, Some(z))
    }

    #[test]
    fn json_round_trip_is_lossless() {
        let a = sample();
        let b = Annotation::from_json(&a.to_json()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn keypoints_reordered_by_id() {
        let mut a = sample();
        let expected = a.keypoints().unwrap();
        a.keypoints2d.reverse();
        assert_eq!(a.keypoints().unwrap(), expected);
        a.keypoints2d.pop();
        assert!(a.keypoints().is_err());
    }

    #[test]
    fn manifest_and_listing() {
        let dir = tempfile::tempdir().unwrap();
        let a = sample();
        save_annotation(dir.path(), &a).unwrap();
        let m = Manifest {
            kind: "test".into(),
            count: 1,
            ..Default::default()
        };
        save_manifest(dir.path(), &m).unwrap();
        assert_eq!(load_manifest(dir.path()).unwrap(), Some(m));
        assert_eq!(list_annotation_ids(dir.path()).unwrap(), vec!["000003".to_string()]);
        assert_eq!(load_annotation(&annotation_path(dir.path(), "000003")).unwrap(), a);
    }
}
