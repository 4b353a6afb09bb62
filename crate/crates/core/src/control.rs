//! Kinematic simulator, PID pose maker, inverse-kinematics reach planner and
//! the reaching-task harness.
//!
//! One simulator step moves joint `i` by `a_i · max_speed · (1 + ε_i)` degrees
//! with `ε_i ~ U(-noise, noise)`, then clamps to the limits. The arm collides
//! when any keypoint drops below the table plane `z = 0`; the flag latches.

use nalgebra::{DMatrix, DVector, Vector2, Vector3};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::camera::{project, CameraIntrinsics, CameraRange, PoseVector};
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::heatmap::heatmap_argmax;
use crate::kinematics::{ArmModel, JointAngles, Keypoints3D, NUM_JOINTS, NUM_KEYPOINTS};
use crate::lm::{self, LeastSquaresProblem, LmOptions};
use crate::rng::{stream_rng, Domain};
use crate::sample_interval;
use crate::solver::{solve_pose_tracked, SolverOptions};
use crate::synth::{render_heatmaps, HeatmapLayout, NoiseSpec};

/// Planned poses keep every keypoint at least this high above the table, cm.
pub const PLAN_CLEARANCE: f64 = 0.5;
pub const MAX_WAYPOINTS: usize = 10;
/// Largest joint change between consecutive waypoints, degrees.
const WAYPOINT_SPACING_DEG: f64 = 40.0;
const IK_RESTARTS: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimConfig {
    /// Degrees per step at full command.
    pub max_speed_deg: f64,
    /// Relative actuation noise half-width.
    pub speed_noise: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            max_speed_deg: 3.0,
            speed_noise: 0.2,
        }
    }
}

impl SimConfig {
    pub fn noiseless() -> Self {
        Self {
            speed_noise: 0.0,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimState {
    pub joints: JointAngles,
    pub step_count: usize,
    pub collided: bool,
}

impl SimState {
    pub fn new(joints: JointAngles) -> Self {
        Self {
            joints,
            step_count: 0,
            collided: false,
        }
    }
}

/// Signed speed fraction per joint.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Action(pub [f64; NUM_JOINTS]);

impl Action {
    pub fn new(a: [f64; NUM_JOINTS]) -> Self {
        Self(a.map(|v| if v.is_nan() { 0.0 } else { v.clamp(-1.0, 1.0) }))
    }
}

pub fn lowest_keypoint(z: &Keypoints3D) -> f64 {
    z.coords.iter().map(|p| p.z).fold(f64::INFINITY, f64::min)
}

/// Advance one step. Actuation noise for step `state.step_count` comes from
/// the stream addressed by `noise_seed`.
pub fn sim_step(model: &ArmModel, state: &SimState, action: &Action, cfg: &SimConfig, noise_seed: u64) -> SimState {
    let action = Action::new(action.0);
    let mut rng = stream_rng(noise_seed, Domain::Actuation, state.step_count as u64);
    let mut joints = state.joints.to_array();
    for (j, v) in joints.iter_mut().enumerate() {
        let eps = if cfg.speed_noise > 0.0 {
            rng.random_range(-cfg.speed_noise..=cfg.speed_noise)
        } else {
            0.0
        };
        *v += action.0[j] * cfg.max_speed_deg * (1.0 + eps);
    }
    let joints = model.clamp(&JointAngles::from_array(joints));
    let z = model.keypoints_at_radians(&joints.to_radians());
    SimState {
        joints,
        step_count: state.step_count + 1,
        collided: state.collided || lowest_keypoint(&z) < 0.0,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PidGains {
    pub kp: f64,
    pub ki: f64,
    pub kd: f64,
}

impl Default for PidGains {
    fn default() -> Self {
        Self {
            kp: 0.3,
            ki: 0.005,
            kd: 0.05,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PidState {
    pub integral: [f64; NUM_JOINTS],
    pub prev_error: Option<[f64; NUM_JOINTS]>,
}

/// Integral term bound, degree-steps.
pub const INTEGRAL_LIMIT: f64 = 10.0;

/// One PID update on the per-joint error `target - current` in degrees, with a
/// unit time step.
pub fn pid_pose_maker(
    current: &JointAngles,
    target: &JointAngles,
    gains: &PidGains,
    state: &PidState,
) -> (Action, PidState) {
    let c = current.to_array();
    let t = target.to_array();
    let mut next = *state;
    let mut out = [0.0; NUM_JOINTS];
    let mut errors = [0.0; NUM_JOINTS];
    for j in 0..NUM_JOINTS {
        let e = t[j] - c[j];
        errors[j] = e;
        next.integral[j] = (state.integral[j] + e).clamp(-INTEGRAL_LIMIT, INTEGRAL_LIMIT);
        let d = state.prev_error.map_or(0.0, |p| e - p[j]);
        out[j] = gains.kp * e + gains.ki * next.integral[j] + gains.kd * d;
    }
    next.prev_error = Some(errors);
    (Action::new(out), next)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DistanceMeasure {
    #[default]
    Horizontal,
    Full3d,
}

impl DistanceMeasure {
    pub fn distance(self, a: &Vector3<f64>, b: &Vector3<f64>) -> f64 {
        match self {
            Self::Horizontal => Vector2::new(a.x - b.x, a.y - b.y).norm(),
            Self::Full3d => (a - b).norm(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TaskSpec {
    pub target: Vector3<f64>,
    #[serde(default = "default_radius")]
    pub success_radius: f64,
    #[serde(default = "default_max_steps")]
    pub max_steps: usize,
    #[serde(default)]
    pub measure: DistanceMeasure,
}

fn default_radius() -> f64 {
    3.0
}

fn default_max_steps() -> usize {
    50
}

impl TaskSpec {
    pub fn new(target: Vector3<f64>) -> Self {
        Self {
            target,
            success_radius: default_radius(),
            max_steps: default_max_steps(),
            measure: DistanceMeasure::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.success_radius > 0.0) || self.max_steps == 0 {
            return Err(Error::InvalidInput("task needs a positive radius and at least one step".into()));
        }
        if !self.target.iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidInput("task target must be finite".into()));
        }
        Ok(())
    }
}

/// Targets at 15, 20 and 25 cm from the base, at -45°, 0° and 45°, 10 cm high.
pub fn reach_grid() -> Vec<TaskSpec> {
    let mut out = Vec::new();
    for r in [15.0, 20.0, 25.0] {
        for a in [-45.0f64, 0.0, 45.0] {
            let a = a.to_radians();
            out.push(TaskSpec::new(Vector3::new(r * a.cos(), r * a.sin(), 10.0)));
        }
    }
    out
}

struct IkProblem<'a> {
    model: &'a ArmModel,
    target: Vector3<f64>,
    lo: [f64; NUM_JOINTS],
    hi: [f64; NUM_JOINTS],
    /// Keypoints are pushed above this height.
    floor: f64,
}

const HINGE_WEIGHT: f64 = 3.0;

fn rad4(x: &DVector<f64>) -> [f64; NUM_JOINTS] {
    [x[0], x[1], x[2], x[3]]
}

impl LeastSquaresProblem for IkProblem<'_> {
    fn residuals(&self, x: &DVector<f64>) -> Option<DVector<f64>> {
        let z = self.model.keypoints_at_radians(&rad4(x));
        let mut r = DVector::zeros(3 + NUM_KEYPOINTS);
        let d = z[self.model.tip_keypoint] - self.target;
        r.fixed_rows_mut::<3>(0).copy_from(&d);
        for k in 0..NUM_KEYPOINTS {
            r[3 + k] = HINGE_WEIGHT * (self.floor - z[k].z).max(0.0);
        }
        Some(r)
    }

    fn jacobian(&self, x: &DVector<f64>) -> Option<DMatrix<f64>> {
        let (z, dz) = self.model.keypoints_and_jacobian(&rad4(x));
        let mut jac = DMatrix::zeros(3 + NUM_KEYPOINTS, NUM_JOINTS);
        let tip = self.model.tip_keypoint;
        for j in 0..NUM_JOINTS {
            for a in 0..3 {
                jac[(a, j)] = dz[tip][j][a];
            }
            for k in 0..NUM_KEYPOINTS {
                if z[k].z < self.floor {
                    jac[(3 + k, j)] = -HINGE_WEIGHT * dz[k][j].z;
                }
            }
        }
        Some(jac)
    }

    fn bounds(&self) -> Option<(DVector<f64>, DVector<f64>)> {
        Some((DVector::from_row_slice(&self.lo), DVector::from_row_slice(&self.hi)))
    }
}

/// True when every keypoint of `joints` is at least `clearance` above the table
/// and all joints are within limits.
pub fn pose_is_safe(model: &ArmModel, joints: &JointAngles, clearance: f64) -> bool {
    model.check_limits(joints).is_ok() && lowest_keypoint(&model.keypoints_at_radians(&joints.to_radians())) >= clearance
}

/// Joint-space waypoints from `state.joints` to a collision-free inverse
/// kinematics solution whose tip lies within half the success radius of the
/// target. Among valid solutions the one closest to the current pose wins.
pub fn plan_reach(model: &ArmModel, state: &SimState, task: &TaskSpec) -> Result<Vec<JointAngles>> {
    task.validate()?;
    let rot_pivot = model.parts[model.joints[0].part].pivot;
    let rel = task.target - rot_pivot;
    if Vector2::new(rel.x, rel.y).norm() > model.horizontal_reach_bound() || rel.norm() > model.reach_bound() {
        return Err(Error::Unreachable(format!(
            "target ({:.1}, {:.1}, {:.1}) lies outside the arm's reach",
            task.target.x, task.target.y, task.target.z
        )));
    }
    if task.target.z < PLAN_CLEARANCE {
        return Err(Error::Unreachable("target lies below the table clearance".into()));
    }
    let start = model.clamp(&state.joints);
    let lo: [f64; NUM_JOINTS] = std::array::from_fn(|j| model.joints[j].limit_deg[0].to_radians());
    let hi: [f64; NUM_JOINTS] = std::array::from_fn(|j| model.joints[j].limit_deg[1].to_radians());
    let problem = IkProblem {
        model,
        target: task.target,
        lo,
        hi,
        floor: 2.0 * PLAN_CLEARANCE,
    };
    let opts = LmOptions {
        max_iterations: 100,
        tolerance: 1e-12,
        ..LmOptions::default()
    };
    let mut best: Option<(f64, JointAngles, Vec<JointAngles>)> = None;
    for i in 0..IK_RESTARTS {
        let x0 = if i == 0 {
            DVector::from_row_slice(&start.to_radians())
        } else {
            let mut rng = stream_rng(0, Domain::IkRestart, i as u64);
            DVector::from_iterator(NUM_JOINTS, (0..NUM_JOINTS).map(|j| sample_interval(&mut rng, [lo[j], hi[j]])))
        };
        let Some(out) = lm::minimize(&problem, x0, &opts) else { continue };
        let goal = model.clamp(&JointAngles::from_radians(rad4(&out.x)));
        let tip = model.keypoints_at_radians(&goal.to_radians())[model.tip_keypoint];
        if task.measure.distance(&tip, &task.target) > 0.5 * task.success_radius
            || !pose_is_safe(model, &goal, PLAN_CLEARANCE)
        {
            continue;
        }
        let waypoints = interpolate(&start, &goal);
        if !waypoints.iter().all(|w| pose_is_safe(model, w, PLAN_CLEARANCE)) {
            continue;
        }
        let cost = max_abs_diff(&start, &goal);
        if best.as_ref().is_none_or(|(c, _, _)| cost < *c) {
            best = Some((cost, goal, waypoints));
        }
    }
    best.map(|(_, _, w)| w).ok_or_else(|| {
        Error::Unreachable(format!(
            "no collision-free pose puts the tip within {:.2} cm of the target",
            0.5 * task.success_radius
        ))
    })
}

fn max_abs_diff(a: &JointAngles, b: &JointAngles) -> f64 {
    let (a, b) = (a.to_array(), b.to_array());
    (0..NUM_JOINTS).map(|j| (a[j] - b[j]).abs()).fold(0.0, f64::max)
}

fn interpolate(start: &JointAngles, goal: &JointAngles) -> Vec<JointAngles> {
    let n = ((max_abs_diff(start, goal) / WAYPOINT_SPACING_DEG).ceil() as usize).clamp(1, MAX_WAYPOINTS);
    let (s, g) = (start.to_array(), goal.to_array());
    (1..=n)
        .map(|i| {
            let t = i as f64 / n as f64;
            JointAngles::from_array(std::array::from_fn(|j| if i == n { g[j] } else { s[j] + t * (g[j] - s[j]) }))
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PoseSource {
    #[default]
    GroundTruth,
    /// Joint angles estimated each step by solving heatmaps rendered from a
    /// fixed camera.
    Solver,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EpisodeConfig {
    pub sim: SimConfig,
    pub gains: PidGains,
    pub initial: JointAngles,
    /// Move on to the next waypoint once every joint is this close, degrees.
    pub waypoint_tolerance: f64,
    /// Heatmap noise for the solver source.
    pub noise: NoiseSpec,
    /// Weight of a new solver estimate against the motion prediction; 1 uses
    /// the estimate as is.
    pub filter_gain: f64,
    /// Estimates further than this from the prediction (max over joints,
    /// degrees) are ignored, up to a few steps in a row.
    pub innovation_gate: f64,
    pub solver: SolverOptions,
    /// Restarts for the first solve of an episode; later solves start from the
    /// previous estimate and use `solver.restarts`.
    pub first_solve_restarts: usize,
    pub intrinsics: CameraIntrinsics,
    pub camera: CameraRange,
    /// Camera distance to the middle of the workspace, cm.
    pub cam_distance: [f64; 2],
    pub heatmap: HeatmapLayout,
}

impl Default for EpisodeConfig {
    fn default() -> Self {
        Self {
            sim: SimConfig::default(),
            gains: PidGains::default(),
            initial: JointAngles::ZERO,
            waypoint_tolerance: 4.0,
            noise: NoiseSpec::gaussian(2.0),
            filter_gain: 0.5,
            innovation_gate: 15.0,
            solver: SolverOptions {
                restarts: 4,
                exec: Exec::Sequential,
                ..SolverOptions::default()
            },
            first_solve_restarts: 16,
            intrinsics: CameraIntrinsics::default(),
            camera: CameraRange::default(),
            cam_distance: [60.0, 90.0],
            heatmap: HeatmapLayout::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeResult {
    pub success: bool,
    pub final_distance: f64,
    pub steps_used: usize,
    pub collided: bool,
    /// States after every step, starting with the initial state.
    pub trajectory: Vec<SimState>,
    /// Per-step estimation error (max over joints, degrees) for the solver source.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub estimate_errors: Vec<f64>,
}

/// Camera used by a solver-in-the-loop episode, aimed at the middle of the
/// segment between the arm base and the target.
pub fn episode_camera(task: &TaskSpec, cfg: &EpisodeConfig, seed: u64) -> PoseVector {
    let mut rng = stream_rng(seed, Domain::EpisodeCamera, 0);
    let rotation = cfg.camera.sample(&mut rng);
    let distance = sample_interval(&mut rng, cfg.cam_distance);
    let look = Vector3::new(0.5 * task.target.x, 0.5 * task.target.y, 0.5 * task.target.z + 8.0);
    PoseVector::looking_at(look, rotation, distance, JointAngles::ZERO)
}

struct Observer<'a> {
    model: &'a ArmModel,
    cfg: &'a EpisodeConfig,
    camera: PoseVector,
    noise: NoiseSpec,
    previous: Option<PoseVector>,
    rejected: usize,
}

/// Gated estimates in a row after which the measurement is trusted again.
const REACQUIRE_AFTER: usize = 3;

impl Observer<'_> {
    /// Solve from heatmaps of the true state and fuse with `predicted`.
    fn observe(&mut self, truth: &JointAngles, step: usize, predicted: &JointAngles) -> JointAngles {
        let mut view = self.camera;
        view.joints = *truth;
        let z = self.model.keypoints_at_radians(&truth.to_radians());
        let tracked = self.previous.map(|p| PoseVector { joints: *predicted, ..p });
        let measured = project(&self.cfg.intrinsics, &view, &z)
            .and_then(|p| render_heatmaps(&p.points2d, &self.noise, &self.cfg.heatmap, step as u64))
            .and_then(|h| heatmap_argmax(&h))
            .and_then(|y| {
                let mut opts = self.cfg.solver.clone();
                if tracked.is_none() {
                    opts.restarts = self.cfg.first_solve_restarts.max(1);
                }
                solve_pose_tracked(&y, &self.cfg.intrinsics, self.model, &opts, tracked.as_ref())
            });
        let r = match measured {
            Ok(r) => r,
            Err(e) => {
                log::debug!("step {step}: keeping the prediction ({e})");
                return *predicted;
            }
        };
        let m = r.pose.joints;
        let fused = if self.previous.is_none() || self.rejected >= REACQUIRE_AFTER {
            self.rejected = 0;
            m
        } else if max_abs_diff(&m, predicted) > self.cfg.innovation_gate {
            self.rejected += 1;
            log::debug!("step {step}: estimate jumped {:.1} deg, keeping the prediction", max_abs_diff(&m, predicted));
            return *predicted;
        } else {
            self.rejected = 0;
            let (p, m) = (predicted.to_array(), m.to_array());
            JointAngles::from_array(std::array::from_fn(|j| p[j] + self.cfg.filter_gain * (m[j] - p[j])))
        };
        self.previous = Some(PoseVector { joints: fused, ..r.pose });
        fused
    }
}

/// Run one reaching episode: plan from the first estimate, then drive the
/// waypoints with the PID pose maker until the tip is within the success
/// radius at the final waypoint, the arm hits the table, or steps run out.
pub fn run_episode(
    model: &ArmModel,
    task: &TaskSpec,
    source: PoseSource,
    cfg: &EpisodeConfig,
    seed: u64,
) -> Result<EpisodeResult> {
    task.validate()?;
    model.check_limits(&cfg.initial)?;
    let mut observer = Observer {
        model,
        cfg,
        camera: episode_camera(task, cfg, seed),
        noise: NoiseSpec {
            seed: stream_rng(seed, Domain::EpisodeHeatmap, 0).random(),
            ..cfg.noise
        },
        previous: None,
        rejected: 0,
    };
    let mut state = SimState::new(cfg.initial);
    let mut trajectory = vec![state];
    let mut estimate_errors = Vec::new();
    let mut estimate = state.joints;
    let tip_distance = |s: &SimState| {
        let tip = model.keypoints_at_radians(&s.joints.to_radians())[model.tip_keypoint];
        task.measure.distance(&tip, &task.target)
    };

    // `est` holds the prediction on entry and the new estimate on exit.
    let mut observe = |s: &SimState, est: &mut JointAngles, errs: &mut Vec<f64>| {
        if source == PoseSource::Solver {
            *est = observer.observe(&s.joints, s.step_count, est);
            errs.push(max_abs_diff(est, &s.joints));
        } else {
            *est = s.joints;
        }
    };

    observe(&state, &mut estimate, &mut estimate_errors);
    let plan = plan_reach(model, &SimState::new(estimate), task)?;
    let mut wp = 0;
    let mut pid = PidState::default();
    while state.step_count < task.max_steps {
        let last = wp + 1 == plan.len();
        if !last && max_abs_diff(&estimate, &plan[wp]) < cfg.waypoint_tolerance {
            wp += 1;
            pid = PidState::default();
        }
        let (action, next_pid) = pid_pose_maker(&estimate, &plan[wp], &cfg.gains, &pid);
        pid = next_pid;
        state = sim_step(model, &state, &action, &cfg.sim, seed);
        trajectory.push(state);
        let e = estimate.to_array();
        estimate = model.clamp(&JointAngles::from_array(std::array::from_fn(|j| {
            e[j] + action.0[j] * cfg.sim.max_speed_deg
        })));
        if state.collided {
            break;
        }
        observe(&state, &mut estimate, &mut estimate_errors);
        let at_goal = wp + 1 == plan.len() && max_abs_diff(&estimate, &plan[wp]) < cfg.waypoint_tolerance;
        if at_goal && tip_distance(&state) <= task.success_radius {
            break;
        }
    }
    let final_distance = tip_distance(&state);
    Ok(EpisodeResult {
        success: !state.collided && final_distance <= task.success_radius,
        final_distance,
        steps_used: state.step_count,
        collided: state.collided,
        trajectory,
        estimate_errors,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeRecord {
    pub target_index: usize,
    pub seed: u64,
    pub success: bool,
    pub final_distance: f64,
    pub steps_used: usize,
    pub collided: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReachSummary {
    pub source: PoseSource,
    pub episodes: Vec<EpisodeRecord>,
    pub success_rate: f64,
    pub mean_distance: f64,
    pub mean_steps: f64,
}

/// Every target × every seed in `0..seeds`, in parallel over episodes.
/// Episodes whose plan fails count as failures at their starting distance.
pub fn run_reach_experiment(
    model: &ArmModel,
    targets: &[TaskSpec],
    source: PoseSource,
    seeds: u64,
    cfg: &EpisodeConfig,
    exec: Exec,
) -> ReachSummary {
    let jobs: Vec<(usize, u64)> = (0..targets.len())
        .flat_map(|t| (0..seeds).map(move |s| (t, s)))
        .collect();
    let episodes = exec.map_slice(&jobs, |&(t, s)| {
        let task = &targets[t];
        match run_episode(model, task, source, cfg, s) {
            Ok(r) => EpisodeRecord {
                target_index: t,
                seed: s,
                success: r.success,
                final_distance: r.final_distance,
                steps_used: r.steps_used,
                collided: r.collided,
                error: None,
            },
            Err(e) => {
                let tip = model.keypoints_at_radians(&cfg.initial.to_radians())[model.tip_keypoint];
                EpisodeRecord {
                    target_index: t,
                    seed: s,
                    success: false,
                    final_distance: task.measure.distance(&tip, &task.target),
                    steps_used: 0,
                    collided: false,
                    error: Some(e.to_string()),
                }
            }
        }
    });
    let n = episodes.len().max(1) as f64;
    ReachSummary {
        source,
        success_rate: episodes.iter().filter(|e| e.success).count() as f64 / n,
        mean_distance: episodes.iter().map(|e| e.final_distance).sum::<f64>() / n,
        mean_steps: episodes.iter().map(|e| e.steps_used as f64).sum::<f64>() / n,
        episodes,
    }
}

impl ReachSummary {
    pub fn to_table(&self) -> String {
        let name = match self.source {
            PoseSource::GroundTruth => "ground truth",
            PoseSource::Solver => "solver",
        };
        format!(
            "{:<14} {:>18} {:>13} {:>11}\n{:<14} {:>18.2} {:>12.1}% {:>11.1}\n",
            "pose source",
            "distance error cm",
            "success rate",
            "mean steps",
            name,
            self.mean_distance,
            100.0 * self.success_rate,
            self.mean_steps
        )
    }
}

/// Drive from `start` to `target` with the pose maker on the simulator.
/// Returns the final state and the step at which every joint first came
/// within `tolerance` degrees of the target, if it did.
pub fn make_pose(
    model: &ArmModel,
    start: &JointAngles,
    target: &JointAngles,
    gains: &PidGains,
    sim: &SimConfig,
    max_steps: usize,
    tolerance: f64,
    seed: u64,
) -> (SimState, Option<usize>) {
    let mut state = SimState::new(*start);
    let mut pid = PidState::default();
    if max_abs_diff(start, target) <= tolerance {
        return (state, Some(0));
    }
    for _ in 0..max_steps {
        let (a, next) = pid_pose_maker(&state.joints, target, gains, &pid);
        pid = next;
        state = sim_step(model, &state, &a, sim, seed);
        if max_abs_diff(&state.joints, target) <= tolerance {
            return (state, Some(state.step_count));
        }
    }
    (state, None)
}

/// Random collision-free target poses from the middle `fraction` of every
/// joint range, for pose-maker trials.
pub fn sample_target_poses(model: &ArmModel, n: usize, fraction: f64, seed: u64) -> Vec<JointAngles> {
    let mut rng = stream_rng(seed, Domain::Scene, u64::MAX);
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let j = JointAngles::from_array(std::array::from_fn(|i| {
            let [lo, hi] = model.joints[i].limit_deg;
            sample_interval(&mut rng, [lo * fraction, hi * fraction])
        }));
        if pose_is_safe(model, &j, PLAN_CLEARANCE) {
            out.push(j);
        }
    }
    out
}
