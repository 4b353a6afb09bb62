use std::path::{Path, PathBuf};

use armpose::camera::load_intrinsics;
use armpose::control::{reach_grid, run_reach_experiment, EpisodeConfig, PoseSource, TaskSpec};
use armpose::dataset::Annotation;
use armpose::demo::{run_demo, DemoOptions};
use armpose::kinematics::{load_arm_model, JOINT_NAMES};
use armpose::metrics::{evaluate_dataset, EvalOptions};
use armpose::refine::refine_directory;
use armpose::solver::{solve_pose, solve_pose_weak, SolveResult, SolverMode, SolverOptions, WeakPrior};
use armpose::synth::{generate_dataset, DatasetSpec, NoiseSpec, SampleRanges};
use armpose::{ArmModel, CameraIntrinsics, Error, Exec, Keypoints2D};
use clap::{Args, ValueEnum};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::{CliError, Format};

fn need<T>(value: Option<T>, flag: &str) -> Result<T, CliError> {
    value.ok_or_else(|| CliError::Usage(format!("missing required --{flag} (flag or config)")))
}

fn read_text(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|source| {
        CliError::Domain(Error::Io {
            path: path.to_path_buf(),
            source,
        })
    })
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    serde_json::from_str(&read_text(path)?).map_err(|e| {
        CliError::Domain(Error::Parse {
            what: path.display().to_string(),
            message: e.to_string(),
        })
    })
}

fn model(path: &Option<PathBuf>) -> Result<ArmModel, CliError> {
    Ok(match path {
        Some(p) => load_arm_model(p)?,
        None => ArmModel::owi535(),
    })
}

fn intrinsics(path: &Option<PathBuf>) -> Result<CameraIntrinsics, CliError> {
    Ok(match path {
        Some(p) => load_intrinsics(p)?,
        None => CameraIntrinsics::default(),
    })
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("output serializes");
    s.push('\n');
    s
}

fn solver_options(xi: Option<f64>, restarts: Option<usize>, max_iterations: Option<usize>, seed: Option<u64>, weak: bool) -> SolverOptions {
    let d = SolverOptions::default();
    SolverOptions {
        confidence_threshold: xi.unwrap_or(d.confidence_threshold),
        restarts: restarts.unwrap_or(d.restarts),
        max_iterations: max_iterations.unwrap_or(d.max_iterations),
        seed: seed.unwrap_or(d.seed),
        mode: if weak { SolverMode::WeakPerspective } else { SolverMode::FullPerspective },
        exec: Exec::Parallel,
        ..d
    }
}

#[derive(Debug, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct SynthArgs {
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Number of scenes [default: 5000].
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Arm model JSON [default: bundled OWI-535].
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Camera intrinsics JSON [default: 256×256, f = 320].
    #[arg(long)]
    pub intrinsics: Option<PathBuf>,
    /// Sampling ranges JSON.
    #[arg(long)]
    pub ranges: Option<PathBuf>,
    /// Heatmap noise JSON.
    #[arg(long)]
    pub noise: Option<PathBuf>,
    /// Fraction of scenes in the train split [default: 0.9].
    #[arg(long)]
    pub train_fraction: Option<f64>,
}

pub fn synth(a: SynthArgs, format: Format) -> Result<String, CliError> {
    let out = need(a.out, "out")?;
    let d = DatasetSpec::default();
    let spec = DatasetSpec {
        n: a.n.unwrap_or(d.n),
        seed: need(a.seed, "seed")?,
        ranges: a.ranges.as_deref().map(read_json::<SampleRanges>).transpose()?.unwrap_or(d.ranges),
        noise: a.noise.as_deref().map(read_json::<NoiseSpec>).transpose()?.unwrap_or(d.noise),
        intrinsics: intrinsics(&a.intrinsics)?,
        train_fraction: a.train_fraction.unwrap_or(d.train_fraction),
        ..d
    };
    let manifest = generate_dataset(&spec, &model(&a.model)?, &out, Exec::Parallel)?;
    Ok(match format {
        Format::Json => to_json(&manifest),
        Format::Table => {
            let mut s = format!("{} scenes written to {} (seed {})\n", manifest.count, out.display(), spec.seed);
            for (name, ids) in &manifest.splits {
                s.push_str(&format!("  {name:<6} {}\n", ids.len()));
            }
            s
        }
    })
}

#[derive(Debug, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct SolveArgs {
    /// Keypoints JSON: a keypoint set or a full annotation.
    #[arg(long)]
    pub keypoints: Option<PathBuf>,
    #[arg(long)]
    pub intrinsics: Option<PathBuf>,
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Confidence gate [default: 0.3].
    #[arg(long)]
    pub xi: Option<f64>,
    /// Seeded restarts [default: 16].
    #[arg(long)]
    pub restarts: Option<usize>,
    #[arg(long)]
    pub max_iterations: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Weak-perspective camera (unknown intrinsics).
    #[arg(long)]
    pub weak: bool,
    /// Weak-perspective scale in px/cm, if known.
    #[arg(long)]
    pub scale: Option<f64>,
}

fn read_keypoints(path: &Path) -> Result<Keypoints2D, CliError> {
    let text = read_text(path)?;
    if let Ok(y) = serde_json::from_str::<Keypoints2D>(&text) {
        y.validate()?;
        return Ok(y);
    }
    Ok(Annotation::from_json(&text)?.keypoints()?)
}

fn solve_table(r: &SolveResult) -> String {
    let j = r.pose.joints.to_array();
    let c = &r.pose.cam_rotation;
    let l = &r.pose.cam_location;
    let mut s = String::new();
    for (name, v) in JOINT_NAMES.iter().zip(j) {
        s.push_str(&format!("{name:<10} {v:>9.3} deg\n"));
    }
    s.push_str(&format!("camera     az {:.3} el {:.3} roll {:.3} deg\n", c.az, c.el, c.roll));
    s.push_str(&format!("location   {:.3} {:.3} {:.3} cm\n", l.x, l.y, l.z));
    s.push_str(&format!(
        "residual   {:.4} px^2 over {} inliers, {} iterations{}\n",
        r.residual,
        r.inlier_mask.iter().filter(|&&m| m).count(),
        r.iterations_used,
        if r.degenerate { ", degenerate" } else { "" }
    ));
    s
}

pub fn solve(a: SolveArgs, format: Format) -> Result<String, CliError> {
    let y = read_keypoints(&need(a.keypoints, "keypoints")?)?;
    let intr = intrinsics(&a.intrinsics)?;
    let m = model(&a.model)?;
    let opts = solver_options(a.xi, a.restarts, a.max_iterations, a.seed, a.weak);
    let r = if a.weak {
        let mut prior = WeakPrior {
            scale: a.scale,
            ..WeakPrior::default()
        };
        prior.principal.x = intr.cx;
        prior.principal.y = intr.cy;
        solve_pose_weak(&y, &prior, &m, &opts)?
    } else {
        solve_pose(&y, &intr, &m, &opts)?
    };
    Ok(match format {
        Format::Json => to_json(&r),
        Format::Table => solve_table(&r),
    })
}

#[derive(Debug, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct RefineArgs {
    /// Directory of `.hmap` files, or a dataset with a `heatmaps/` folder.
    #[arg(long)]
    pub heatmaps: Option<PathBuf>,
    #[arg(long)]
    pub intrinsics: Option<PathBuf>,
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Output directory for the pseudo-labels.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub xi: Option<f64>,
    #[arg(long)]
    pub restarts: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub weak: bool,
}

pub fn refine(a: RefineArgs, format: Format) -> Result<String, CliError> {
    let input = need(a.heatmaps, "heatmaps")?;
    let out = need(a.out, "out")?;
    let opts = solver_options(a.xi, a.restarts, None, a.seed, a.weak);
    let summary = refine_directory(&input, &intrinsics(&a.intrinsics)?, &model(&a.model)?, &opts, &out)?;
    Ok(match format {
        Format::Json => to_json(&summary),
        Format::Table => {
            let mut s = format!(
                "{} of {} heatmap sets refined into {}\n",
                summary.written,
                summary.attempted,
                out.display()
            );
            if !summary.skipped.is_empty() {
                s.push_str(&format!("skipped: {}\n", summary.skipped.join(", ")));
            }
            s
        }
    })
}

#[derive(Debug, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct EvalArgs {
    /// Predicted annotations.
    #[arg(long)]
    pub pred: Option<PathBuf>,
    /// Ground-truth annotations.
    #[arg(long)]
    pub gt: Option<PathBuf>,
    /// PCK threshold as a fraction of the keypoint bounding box [default: 0.2].
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Score only keypoints visible in the ground truth.
    #[arg(long)]
    pub visible_only: bool,
}

pub fn eval(a: EvalArgs, format: Format) -> Result<String, CliError> {
    let d = EvalOptions::default();
    let opts = EvalOptions {
        alpha: a.alpha.unwrap_or(d.alpha),
        visible_only: a.visible_only,
        exec: Exec::Parallel,
    };
    let report = evaluate_dataset(&need(a.pred, "pred")?, &need(a.gt, "gt")?, &opts)?;
    Ok(match format {
        Format::Json => format!("{}\n", report.to_json()),
        Format::Table => report.to_table(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SourceArg {
    Gt,
    Solver,
}

#[derive(Debug, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct ReachArgs {
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// `grid` for the 3×3 tabletop grid, or a JSON list of tasks [default: grid].
    #[arg(long)]
    pub targets: Option<String>,
    /// Where the controller reads joint angles from [default: gt].
    #[arg(long, value_enum)]
    pub pose_source: Option<SourceArg>,
    /// Episodes per target, seeded 0..N.
    #[arg(long)]
    pub seeds: Option<u64>,
    /// Heatmap noise JSON for the solver source.
    #[arg(long)]
    pub noise: Option<PathBuf>,
    /// Full episode configuration JSON; `--noise` overrides its noise.
    #[arg(long)]
    pub episode: Option<PathBuf>,
}

pub fn reach(a: ReachArgs, format: Format) -> Result<String, CliError> {
    let m = model(&a.model)?;
    let targets: Vec<TaskSpec> = match a.targets.as_deref() {
        None | Some("grid") => reach_grid(),
        Some(path) => read_json(Path::new(path))?,
    };
    let mut cfg: EpisodeConfig = a.episode.as_deref().map(read_json).transpose()?.unwrap_or_default();
    if let Some(noise) = a.noise.as_deref() {
        cfg.noise = read_json(noise)?;
    }
    let source = match a.pose_source.unwrap_or(SourceArg::Gt) {
        SourceArg::Gt => PoseSource::GroundTruth,
        SourceArg::Solver => PoseSource::Solver,
    };
    let summary = run_reach_experiment(&m, &targets, source, need(a.seeds, "seeds")?, &cfg, Exec::Parallel);
    Ok(match format {
        Format::Json => to_json(&summary),
        Format::Table => summary.to_table(),
    })
}

#[derive(Debug, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct DemoArgs {
    #[arg(long)]
    pub seed: Option<u64>,
    /// Synthetic scenes [default: 100].
    #[arg(long)]
    pub n: Option<usize>,
    /// Episodes per reach target and pose source [default: 2].
    #[arg(long)]
    pub reach_seeds: Option<u64>,
    /// Keep the generated datasets here instead of a temporary directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn demo(a: DemoArgs, format: Format) -> Result<String, CliError> {
    let d = DemoOptions::default();
    let opts = DemoOptions {
        seed: need(a.seed, "seed")?,
        n: a.n.unwrap_or(d.n),
        reach_seeds: a.reach_seeds.unwrap_or(d.reach_seeds),
        exec: Exec::Parallel,
    };
    let tmp;
    let out = match &a.out {
        Some(p) => p.as_path(),
        None => {
            tmp = tempfile::tempdir().map_err(|source| {
                CliError::Domain(Error::Io {
                    path: std::env::temp_dir(),
                    source,
                })
            })?;
            tmp.path()
        }
    };
    let summary = run_demo(&ArmModel::owi535(), &opts, out)?;
    Ok(match format {
        Format::Json => format!("{}\n", summary.to_json()),
        Format::Table => summary.to_table(),
    })
}
