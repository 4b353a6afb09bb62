//! Ground-truth scene sampling and synthetic detector output.

use std::f64::consts::PI;
use std::path::Path;

use nalgebra::Vector2;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::camera::{project, CameraIntrinsics, CameraRange, Keypoints2D, PoseVector};
use crate::dataset::{heatmap_path, save_annotation, save_manifest, Annotation, Manifest};
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::heatmap::{draw_blob, write_heatmaps, HeatmapSet, DEFAULT_CROP, DEFAULT_SIZE};
use crate::kinematics::{ArmModel, JointAngles, Keypoints3D, NUM_JOINTS};
use crate::rng::{stream_rng, Domain};
use crate::sample_interval;

pub const MAX_ATTEMPTS: usize = 1000;
pub const MIN_IN_IMAGE: usize = 12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SampleRanges {
    pub camera: CameraRange,
    /// Distance from the camera to the centroid of the posed keypoints, cm.
    pub cam_distance: [f64; 2],
    /// Per-joint intervals in degrees; `None` means the model limits.
    pub joints: Option<[[f64; 2]; NUM_JOINTS]>,
}

impl Default for SampleRanges {
    fn default() -> Self {
        Self {
            camera: CameraRange::default(),
            cam_distance: [40.0, 90.0],
            joints: None,
        }
    }
}

impl SampleRanges {
    pub fn joint_ranges(&self, model: &ArmModel) -> [[f64; 2]; NUM_JOINTS] {
        self.joints
            .unwrap_or_else(|| std::array::from_fn(|j| model.joints[j].limit_deg))
    }

    pub fn validate(&self, model: &ArmModel) -> Result<()> {
        self.camera.validate()?;
        let [lo, hi] = self.cam_distance;
        if !(lo > 0.0 && lo <= hi && hi.is_finite()) {
            return Err(Error::InvalidInput("camera distance range must be positive and ordered".into()));
        }
        for (j, [a, b]) in self.joint_ranges(model).into_iter().enumerate() {
            let [min, max] = model.joints[j].limit_deg;
            if !(a <= b && a >= min && b <= max) {
                return Err(Error::InvalidInput(format!(
                    "range [{a}, {b}] for joint {} must be ordered and inside [{min}, {max}]",
                    model.joints[j].name
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NoiseSpec {
    /// Gaussian jitter of each blob centre, image pixels.
    pub pixel_sigma: f64,
    /// Blob width, heatmap cells.
    pub blob_sigma: f64,
    pub outlier_prob: f64,
    /// Smallest displacement of an outlier blob, image pixels.
    pub outlier_shift_min: f64,
    pub dropout_prob: f64,
    pub seed: u64,
}

impl Default for NoiseSpec {
    fn default() -> Self {
        Self {
            pixel_sigma: 2.0,
            blob_sigma: 1.5,
            outlier_prob: 0.05,
            outlier_shift_min: 20.0,
            dropout_prob: 0.05,
            seed: 0,
        }
    }
}

impl NoiseSpec {
    pub fn noiseless() -> Self {
        Self {
            pixel_sigma: 0.0,
            outlier_prob: 0.0,
            dropout_prob: 0.0,
            ..Self::default()
        }
    }

    /// Gaussian pixel jitter only: no outliers, no dropout.
    pub fn gaussian(pixel_sigma: f64) -> Self {
        Self {
            pixel_sigma,
            ..Self::noiseless()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let prob = |p: f64| (0.0..=1.0).contains(&p);
        if !(prob(self.outlier_prob) && prob(self.dropout_prob)) {
            return Err(Error::InvalidInput("noise probabilities must lie in [0, 1]".into()));
        }
        if !(self.pixel_sigma >= 0.0 && self.blob_sigma >= 0.0 && self.outlier_shift_min >= 0.0) {
            return Err(Error::InvalidInput("noise sigmas and shifts must be non-negative".into()));
        }
        Ok(())
    }
}

/// Heatmap grid and crop placement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct HeatmapLayout {
    pub size: usize,
    pub crop_size: u32,
    pub crop_offset: [i32; 2],
}

impl Default for HeatmapLayout {
    fn default() -> Self {
        Self {
            size: DEFAULT_SIZE,
            crop_size: DEFAULT_CROP,
            crop_offset: [0, 0],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scene {
    pub pose: PoseVector,
    pub z: Keypoints3D,
    /// Exact projection; `visible` marks points inside the image.
    pub y: Keypoints2D,
}

/// Draw a scene: joints and camera angles uniform over `ranges`, the camera
/// aimed at the centroid of the posed keypoints. Resampled until every
/// keypoint is in front of the camera and at least [`MIN_IN_IMAGE`] land
/// inside the image.
pub fn sample_scene<R: Rng + ?Sized>(
    rng: &mut R,
    ranges: &SampleRanges,
    model: &ArmModel,
    intr: &CameraIntrinsics,
) -> Result<Scene> {
    ranges.validate(model)?;
    intr.validate()?;
    let joint_ranges = ranges.joint_ranges(model);
    for _ in 0..MAX_ATTEMPTS {
        let joints = JointAngles::from_array(std::array::from_fn(|j| sample_interval(rng, joint_ranges[j])));
        let rotation = ranges.camera.sample(rng);
        let distance = sample_interval(rng, ranges.cam_distance);
        let z = model.keypoints_at_radians(&joints.to_radians());
        let pose = PoseVector::looking_at(z.centroid(), rotation, distance, joints);
        let Ok(proj) = project(intr, &pose, &z) else { continue };
        if proj.points2d.visible.iter().filter(|&&v| v).count() >= MIN_IN_IMAGE {
            return Ok(Scene {
                pose,
                z,
                y: proj.points2d,
            });
        }
    }
    Err(Error::SamplingExhausted {
        attempts: MAX_ATTEMPTS,
    })
}

/// Scene `index` of the stream addressed by `seed`.
pub fn sample_scene_seeded(
    seed: u64,
    index: u64,
    ranges: &SampleRanges,
    model: &ArmModel,
    intr: &CameraIntrinsics,
) -> Result<Scene> {
    sample_scene(&mut stream_rng(seed, Domain::Scene, index), ranges, model, intr)
}

/// Synthesize detector output for `y`: one peak-1 Gaussian blob per keypoint,
/// jittered, occasionally displaced or dropped according to `noise`.
/// `index` selects the noise stream so that batches are reproducible.
pub fn render_heatmaps(y: &Keypoints2D, noise: &NoiseSpec, layout: &HeatmapLayout, index: u64) -> Result<HeatmapSet> {
    noise.validate()?;
    if layout.size == 0 || layout.crop_size == 0 {
        return Err(Error::InvalidInput("heatmap layout sizes must be positive".into()));
    }
    let mut rng = stream_rng(noise.seed, Domain::Heatmap, index);
    let mut h = HeatmapSet::zeros(layout.size, layout.size, layout.crop_size, layout.crop_offset);
    let stride = layout.crop_size as f64 / layout.size as f64;
    // Argmax quantization moves a peak by at most half a cell per axis.
    let margin = 0.5 * 2f64.sqrt() * stride;
    let jitter = Normal::new(0.0, noise.pixel_sigma).expect("sigma validated");
    for k in 0..y.len() {
        let j = Vector2::new(jitter.sample(&mut rng), jitter.sample(&mut rng));
        let drop = rng.random::<f64>() < noise.dropout_prob;
        let outlier = rng.random::<f64>() < noise.outlier_prob;
        let angle = rng.random_range(0.0..2.0 * PI);
        let u: f64 = rng.random();
        if drop {
            continue;
        }
        let mut centre = y.points[k] + j;
        if outlier {
            let lo = noise.outlier_shift_min + margin;
            let hi = (2.0 * noise.outlier_shift_min).max(lo);
            let r = lo + u * (hi - lo);
            centre += Vector2::new(angle.cos(), angle.sin()) * r;
        }
        let g = h.to_grid(&centre);
        draw_blob(&mut h, k, g, noise.blob_sigma);
    }
    Ok(h)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DatasetSpec {
    pub n: usize,
    pub seed: u64,
    pub ranges: SampleRanges,
    pub noise: NoiseSpec,
    pub intrinsics: CameraIntrinsics,
    pub heatmap: HeatmapLayout,
    pub train_fraction: f64,
}

impl Default for DatasetSpec {
    fn default() -> Self {
        Self {
            n: 5000,
            seed: 0,
            ranges: SampleRanges::default(),
            noise: NoiseSpec::default(),
            intrinsics: CameraIntrinsics::default(),
            heatmap: HeatmapLayout::default(),
            train_fraction: 0.9,
        }
    }
}

pub fn image_id(index: usize) -> String {
    format!("{index:06}")
}

/// Train/validation assignment: a seeded shuffle, `round(n · fraction)` ids to train.
pub fn split_ids(n: usize, seed: u64, train_fraction: f64) -> (Vec<String>, Vec<String>) {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut stream_rng(seed, Domain::DatasetSplit, 0));
    let n_train = ((n as f64) * train_fraction.clamp(0.0, 1.0)).round() as usize;
    let (train, val) = order.split_at(n_train);
    let ids = |s: &[usize]| {
        let mut v = s.to_vec();
        v.sort_unstable();
        v.into_iter().map(image_id).collect()
    };
    (ids(train), ids(val))
}

const WRITE_CHUNK: usize = 256;

/// Write `spec.n` scenes under `out`: annotation JSON (exact keypoints), HMAP
/// heatmaps (noisy), and a manifest with the split.
pub fn generate_dataset(spec: &DatasetSpec, model: &ArmModel, out: &Path, exec: Exec) -> Result<Manifest> {
    spec.ranges.validate(model)?;
    spec.noise.validate()?;
    spec.intrinsics.validate()?;
    if !(0.0..=1.0).contains(&spec.train_fraction) {
        return Err(Error::InvalidInput("train fraction must lie in [0, 1]".into()));
    }
    let noise = NoiseSpec {
        seed: spec.seed ^ spec.noise.seed.rotate_left(32),
        ..spec.noise
    };
    let mut start = 0;
    while start < spec.n {
        let len = WRITE_CHUNK.min(spec.n - start);
        let batch = exec.map_indexed(len, |i| -> Result<(Annotation, HeatmapSet)> {
            let index = start + i;
            let scene = sample_scene_seeded(spec.seed, index as u64, &spec.ranges, model, &spec.intrinsics)?;
            let h = render_heatmaps(&scene.y, &noise, &spec.heatmap, index as u64)?;
            let ann = Annotation::new(image_id(index), spec.intrinsics, scene.pose, &scene.y, Some(scene.z));
            Ok((ann, h))
        });
        for item in batch {
            let (ann, h) = item?;
            save_annotation(out, &ann)?;
            let hp = heatmap_path(out, &ann.image_id);
            if let Some(parent) = hp.parent() {
                std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
            }
            write_heatmaps(&hp, &h)?;
        }
        start += len;
    }

    let (train, val) = split_ids(spec.n, spec.seed, spec.train_fraction);
    let mut manifest = Manifest {
        kind: "synthetic".into(),
        count: spec.n,
        seed: Some(spec.seed),
        ..Default::default()
    };
    manifest.splits.insert("train".into(), train);
    manifest.splits.insert("val".into(), val);
    let settings = serde_json::to_value(spec).expect("spec serializes");
    if let serde_json::Value::Object(map) = settings {
        manifest.settings = map;
    }
    save_manifest(out, &manifest)?;
    Ok(manifest)
}
