//! Heatmaps in, geometry-consistent pseudo-labels out.
//!
//! Each record runs argmax, the confidence gate and the pose solver; the
//! fitted pose is reprojected to give labels for all 17 keypoints. Retraining
//! the detector on the exported labels happens outside this crate.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::camera::{CameraIntrinsics, Keypoints2D, PoseVector};
use crate::dataset::{heatmap_path, list_heatmap_ids, list_ids, save_annotation, save_manifest, Annotation, Manifest, HEATMAP_DIR};
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::heatmap::{heatmap_argmax, read_heatmaps, HeatmapSet};
use crate::kinematics::ArmModel;
use crate::solver::{solve_pose, solve_pose_weak, SolveResult, SolverMode, SolverOptions, WeakPrior};

/// Suggested synthetic-to-pseudo-labelled mixing ratio for the external trainer.
pub const SUGGESTED_MIX_RATIO: &str = "6:4";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PseudoLabelMeta {
    /// Raw argmax keypoints with their confidences.
    pub argmax: Keypoints2D,
    pub residual: f64,
    pub inlier_mask: Vec<bool>,
    pub iterations_used: usize,
    pub restarts_used: usize,
    pub degenerate: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PseudoLabelRecord {
    pub image_id: String,
    /// Original-image pixels, all 17 keypoints.
    pub y_refined: Keypoints2D,
    pub pose: PoseVector,
    pub meta: PseudoLabelMeta,
}

impl PseudoLabelRecord {
    fn from_solve(image_id: String, argmax: Keypoints2D, r: SolveResult) -> Self {
        Self {
            image_id,
            y_refined: r.y_refined,
            pose: r.pose,
            meta: PseudoLabelMeta {
                argmax,
                residual: r.residual,
                inlier_mask: r.inlier_mask,
                iterations_used: r.iterations_used,
                restarts_used: r.restarts_used,
                degenerate: r.degenerate,
            },
        }
    }

    pub fn to_annotation(&self, intr: &CameraIntrinsics) -> Annotation {
        let mut a = Annotation::new(self.image_id.clone(), *intr, self.pose, &self.y_refined, None);
        a.meta = Some(serde_json::to_value(&self.meta).expect("meta serializes"));
        a
    }

    pub fn from_annotation(a: &Annotation) -> Result<Self> {
        let meta = a
            .meta
            .clone()
            .ok_or_else(|| Error::parse(format!("annotation {}", a.image_id), "missing pseudo-label meta"))?;
        let meta = serde_json::from_value(meta).map_err(|e| Error::parse(format!("annotation {}", a.image_id), e))?;
        Ok(Self {
            image_id: a.image_id.clone(),
            y_refined: a.keypoints()?,
            pose: a.pose,
            meta,
        })
    }
}

/// Argmax, gate and solve one heatmap set. The record's id is left empty.
pub fn refine_labels(
    h: &HeatmapSet,
    intr: &CameraIntrinsics,
    model: &ArmModel,
    opts: &SolverOptions,
) -> Result<PseudoLabelRecord> {
    let argmax = heatmap_argmax(h)?;
    let solved = match opts.mode {
        SolverMode::FullPerspective => solve_pose(&argmax, intr, model, opts)?,
        SolverMode::WeakPerspective => {
            let prior = WeakPrior {
                principal: nalgebra::Vector2::new(intr.cx, intr.cy),
                ..WeakPrior::default()
            };
            solve_pose_weak(&argmax, &prior, model, opts)?
        }
    };
    let mut y_refined = solved.y_refined.clone();
    y_refined.visible = y_refined.points.iter().map(|p| intr.contains(p)).collect();
    let mut rec = PseudoLabelRecord::from_solve(String::new(), argmax, solved);
    rec.y_refined = y_refined;
    Ok(rec)
}

#[derive(Debug)]
pub struct RefineOutcome {
    pub image_id: String,
    pub result: Result<PseudoLabelRecord>,
}

/// Refine many heatmap sets, in parallel over records when `opts.exec` allows.
/// Failures are kept in place and logged.
pub fn refine_batch(
    items: &[(String, HeatmapSet)],
    intr: &CameraIntrinsics,
    model: &ArmModel,
    opts: &SolverOptions,
) -> Vec<RefineOutcome> {
    let inner = SolverOptions {
        exec: Exec::Sequential,
        ..opts.clone()
    };
    opts.exec.map_slice(items, |(id, h)| {
        let result = refine_labels(h, intr, model, &inner).map(|mut r| {
            r.image_id = id.clone();
            r
        });
        if let Err(e) = &result {
            log::warn!("skipping {id}: {e}");
        }
        RefineOutcome {
            image_id: id.clone(),
            result,
        }
    })
}

/// Write one annotation per successful record plus a manifest listing skipped
/// ids. Returns the number of annotation files written.
pub fn export_pseudo_dataset(batch: &[RefineOutcome], intr: &CameraIntrinsics, out: &Path) -> Result<usize> {
    std::fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let mut manifest = Manifest {
        kind: "pseudo-labels".into(),
        ..Default::default()
    };
    let mut written = Vec::new();
    for o in batch {
        match &o.result {
            Ok(rec) => {
                save_annotation(out, &rec.to_annotation(intr))?;
                written.push(o.image_id.clone());
            }
            Err(e) => {
                manifest.skipped.insert(o.image_id.clone(), format!("{}: {e}", e.code()));
            }
        }
    }
    manifest.count = written.len();
    manifest.splits.insert("all".into(), written);
    manifest
        .settings
        .insert("suggested_mix_ratio".into(), SUGGESTED_MIX_RATIO.into());
    save_manifest(out, &manifest)?;
    Ok(manifest.count)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RefineSummary {
    pub attempted: usize,
    pub written: usize,
    pub skipped: Vec<String>,
}

/// Refine every `heatmaps/*.hmap` under `input` (or directly in `input`) and
/// export the labels to `out`.
pub fn refine_directory(
    input: &Path,
    intr: &CameraIntrinsics,
    model: &ArmModel,
    opts: &SolverOptions,
    out: &Path,
) -> Result<RefineSummary> {
    let nested = input.join(HEATMAP_DIR).is_dir();
    let ids = if nested {
        list_heatmap_ids(input)?
    } else {
        list_ids(input, "hmap")?
    };
    let mut items = Vec::with_capacity(ids.len());
    for id in ids {
        let path = if nested {
            heatmap_path(input, &id)
        } else {
            input.join(format!("{id}.hmap"))
        };
        items.push((id, read_heatmaps(&path)?));
    }
    let batch = refine_batch(&items, intr, model, opts);
    let written = export_pseudo_dataset(&batch, intr, out)?;
    Ok(RefineSummary {
        attempted: batch.len(),
        written,
        skipped: batch
            .iter()
            .filter(|o| o.result.is_err())
            .map(|o| o.image_id.clone())
            .collect(),
    })
}
