//! End-to-end run: synthesize, refine, evaluate, reach.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dataset::{annotation_path, load_annotation};
use crate::error::Result;
use crate::exec::Exec;
use crate::kinematics::ArmModel;
use crate::metrics::{evaluate_dataset, pck_counts, EvalOptions, EvalReport, PckCounts};
use crate::refine::{refine_directory, PseudoLabelRecord, RefineSummary};
use crate::control::{reach_grid, run_reach_experiment, EpisodeConfig, PoseSource};
use crate::solver::SolverOptions;
use crate::synth::{generate_dataset, DatasetSpec};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReachLine {
    pub source: PoseSource,
    pub episodes: usize,
    pub success_rate: f64,
    pub mean_distance: f64,
    pub mean_steps: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DemoSummary {
    pub seed: u64,
    pub n: usize,
    pub train: usize,
    pub val: usize,
    pub refine: RefineSummary,
    /// PCK of the raw heatmap argmax over refined records.
    pub argmax_pck: f64,
    /// Refined labels and poses against ground truth.
    pub eval: EvalReport,
    pub reach: Vec<ReachLine>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DemoOptions {
    pub seed: u64,
    pub n: usize,
    /// Seeds per reach target.
    pub reach_seeds: u64,
    pub exec: Exec,
}

impl Default for DemoOptions {
    fn default() -> Self {
        Self {
            seed: 7,
            n: 100,
            reach_seeds: 2,
            exec: Exec::default(),
        }
    }
}

/// Writes `out/synthetic` and `out/pseudo`; the summary depends only on the
/// options, never on `exec`.
pub fn run_demo(model: &ArmModel, opts: &DemoOptions, out: &Path) -> Result<DemoSummary> {
    let synthetic = out.join("synthetic");
    let pseudo = out.join("pseudo");
    let spec = DatasetSpec {
        n: opts.n,
        seed: opts.seed,
        ..Default::default()
    };
    log::info!("generating {} scenes", opts.n);
    let manifest = generate_dataset(&spec, model, &synthetic, opts.exec)?;
    let solver = SolverOptions {
        seed: opts.seed,
        exec: opts.exec,
        ..Default::default()
    };
    log::info!("refining labels");
    let refine = refine_directory(&synthetic, &spec.intrinsics, model, &solver, &pseudo)?;
    let eval_opts = EvalOptions {
        exec: opts.exec,
        ..Default::default()
    };
    let eval = evaluate_dataset(&pseudo, &synthetic, &eval_opts)?;

    let mut raw = PckCounts::default();
    for id in manifest.splits.values().flatten() {
        let path = annotation_path(&pseudo, id);
        if !path.exists() {
            continue;
        }
        let rec = PseudoLabelRecord::from_annotation(&load_annotation(&path)?)?;
        let gt = load_annotation(&annotation_path(&synthetic, id))?.keypoints()?;
        let c = pck_counts(&rec.meta.argmax, &gt, eval_opts.alpha, false)?;
        raw.hits += c.hits;
        raw.eligible += c.eligible;
    }

    log::info!("running reach episodes");
    let cfg = EpisodeConfig::default();
    let targets = reach_grid();
    let reach = [PoseSource::GroundTruth, PoseSource::Solver]
        .into_iter()
        .map(|source| {
            let s = run_reach_experiment(model, &targets, source, opts.reach_seeds, &cfg, opts.exec);
            ReachLine {
                source,
                episodes: s.episodes.len(),
                success_rate: s.success_rate,
                mean_distance: s.mean_distance,
                mean_steps: s.mean_steps,
            }
        })
        .collect();

    Ok(DemoSummary {
        seed: opts.seed,
        n: opts.n,
        train: manifest.splits.get("train").map_or(0, Vec::len),
        val: manifest.splits.get("val").map_or(0, Vec::len),
        refine,
        argmax_pck: raw.fraction().unwrap_or(0.0),
        eval,
        reach,
    })
}

impl DemoSummary {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("summary serializes")
    }

    pub fn to_table(&self) -> String {
        let mut s = format!(
            "scenes {} (train {}, val {}), refined {}, skipped {}\n\n",
            self.n,
            self.train,
            self.val,
            self.refine.written,
            self.refine.skipped.len()
        );
        s.push_str(&format!("PCK@{} argmax       {:.2}%\n", self.eval.alpha, 100.0 * self.argmax_pck));
        s.push_str(&format!("PCK@{} refined      {:.2}%\n\n", self.eval.alpha, 100.0 * self.eval.pck));
        s.push_str(&self.eval.to_table());
        s.push('\n');
        s.push_str(&format!(
            "{:<14} {:>18} {:>13} {:>11}\n",
            "pose source", "distance error cm", "success rate", "mean steps"
        ));
        for r in &self.reach {
            let name = match r.source {
                PoseSource::GroundTruth => "ground truth",
                PoseSource::Solver => "solver",
            };
            s.push_str(&format!(
                "{:<14} {:>18.2} {:>12.1}% {:>11.1}\n",
                name,
                r.mean_distance,
                100.0 * r.success_rate,
                r.mean_steps
            ));
        }
        s
    }
}
