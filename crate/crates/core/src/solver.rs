//! Recover the 10-dimensional pose from 2D keypoints.
//!
//! The loss is the sum over confident keypoints of the squared pixel distance
//! between the observation and the projection of the kinematic model. Depth
//! scales are eliminated by perspective division, so only the 6 camera and 4
//! joint parameters are optimized. Each solve runs a damped Gauss–Newton
//! descent from several seeded initializations and keeps the lowest loss;
//! afterwards keypoints whose residual exceeds `robust_cutoff` times the median
//! inlier residual (and `robust_floor_px`) are demoted and the fit is repeated.
//!
//! Internal parameter layout (perspective):
//! `[loc_x, loc_y, loc_z (cm), az, el, roll (rad), rotation, base, elbow, wrist (rad)]`.
//! The weak-perspective layout replaces the location with
//! `[scale (px/cm), offset_u, offset_v (px)]`.

use nalgebra::{DMatrix, DVector, Matrix2, SymmetricEigen, Vector2, Vector3};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::camera::{
    project, rotation_with_derivatives, weak_project, CameraIntrinsics, CameraRange, CameraRotation,
    Keypoints2D, PoseVector, MIN_DEPTH,
};
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::kinematics::{forward_kinematics, ArmModel, JointAngles, Keypoints3D, NUM_JOINTS, NUM_KEYPOINTS};
use crate::lm::{self, LeastSquaresProblem, LmOptions, LmOutcome};
use crate::rng::{stream_rng, Domain};
use crate::{median, wrap_degrees};

pub const NUM_PARAMS: usize = 6 + NUM_JOINTS;
/// Elevation is kept inside ±this many degrees during optimization.
const EL_LIMIT_DEG: f64 = 89.0;
const MIN_WEAK_SCALE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolverMode {
    #[default]
    FullPerspective,
    WeakPerspective,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverOptions {
    /// Keypoints with confidence below this are ignored by the fit.
    pub confidence_threshold: f64,
    pub max_iterations: usize,
    pub restarts: usize,
    /// Relative loss decrease below which a run counts as converged.
    pub convergence_tol: f64,
    pub min_inliers: usize,
    pub mode: SolverMode,
    pub seed: u64,
    /// Camera orientations sampled for initialization.
    pub init_rotation: CameraRange,
    pub robust_cutoff: f64,
    pub robust_floor_px: f64,
    pub robust_rounds: usize,
    #[serde(skip)]
    pub exec: Exec,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            confidence_threshold: 0.3,
            max_iterations: 200,
            restarts: 16,
            convergence_tol: 1e-8,
            min_inliers: 6,
            mode: SolverMode::FullPerspective,
            seed: 0,
            init_rotation: CameraRange::default(),
            robust_cutoff: 3.0,
            robust_floor_px: 3.0,
            robust_rounds: 3,
            exec: Exec::default(),
        }
    }
}

impl SolverOptions {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.confidence_threshold) {
            return Err(Error::InvalidInput("confidence threshold must lie in [0, 1]".into()));
        }
        if self.min_inliers < 6 {
            return Err(Error::InvalidInput("min_inliers must be at least 6".into()));
        }
        if self.restarts == 0 || self.max_iterations == 0 {
            return Err(Error::InvalidInput("restarts and max_iterations must be positive".into()));
        }
        if !(self.robust_cutoff > 0.0 && self.robust_floor_px >= 0.0) {
            return Err(Error::InvalidInput("robust cutoff must be positive".into()));
        }
        self.init_rotation.validate()
    }

    fn lm_options(&self) -> LmOptions {
        LmOptions {
            max_iterations: self.max_iterations,
            tolerance: self.convergence_tol,
            ..LmOptions::default()
        }
    }
}

/// Prior for the weak-perspective camera.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeakPrior {
    /// Pixels per cm; estimated from the keypoint spread when absent.
    pub scale: Option<f64>,
    /// Image point that the optical axis passes through.
    pub principal: Vector2<f64>,
    /// Depth assigned to the reported camera location, which weak perspective cannot observe.
    pub nominal_depth: f64,
}

impl Default for WeakPrior {
    fn default() -> Self {
        Self {
            scale: None,
            principal: Vector2::new(128.0, 128.0),
            nominal_depth: 100.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RestartTrace {
    pub initial_residual: f64,
    pub final_residual: f64,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveResult {
    pub pose: PoseVector,
    pub z: Keypoints3D,
    /// Reprojection of the fitted pose for all 17 keypoints, gated ones included.
    pub y_refined: Keypoints2D,
    /// Sum of squared pixel residuals over the final inliers.
    pub residual: f64,
    pub inlier_mask: Vec<bool>,
    pub iterations_used: usize,
    pub restarts_used: usize,
    /// Weak-perspective scale (px/cm), for weak solves.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weak_scale: Option<f64>,
    /// Set when the confident keypoints cannot pin down the pose
    /// (near-collinear observations or a rank-deficient Jacobian).
    pub degenerate: bool,
    /// Invalid initializations are reported as `None`.
    pub restarts: Vec<Option<RestartTrace>>,
}

/// Confidence gate: keypoint `k` is kept iff `c_k >= threshold`.
pub fn filter_keypoints(y: &Keypoints2D, threshold: f64) -> Vec<bool> {
    y.confidence.iter().map(|&c| c >= threshold).collect()
}

/// Sum over masked keypoints of squared pixel distance between `y` and the
/// projection of the model posed by `p`.
pub fn reprojection_loss(
    p: &PoseVector,
    y: &Keypoints2D,
    mask: &[bool],
    intr: &CameraIntrinsics,
    model: &ArmModel,
) -> Result<f64> {
    if mask.len() != y.len() || !mask.iter().any(|&m| m) {
        return Err(Error::InvalidInput("mask must select at least one keypoint".into()));
    }
    let z = forward_kinematics(model, &p.joints)?;
    let proj = project(intr, p, &z)?;
    Ok(proj
        .points2d
        .points
        .iter()
        .zip(&y.points)
        .zip(mask)
        .filter(|(_, &m)| m)
        .map(|((a, b), _)| (a - b).norm_squared())
        .sum())
}

/// Parameter vector for a pose, in the perspective layout.
pub fn pose_to_params(p: &PoseVector) -> DVector<f64> {
    let mut x = DVector::zeros(NUM_PARAMS);
    x.fixed_rows_mut::<3>(0).copy_from(&p.cam_location);
    x[3] = p.cam_rotation.az.to_radians();
    x[4] = p.cam_rotation.el.to_radians();
    x[5] = p.cam_rotation.roll.to_radians();
    for (i, r) in p.joints.to_radians().into_iter().enumerate() {
        x[6 + i] = r;
    }
    x
}

/// Residuals `(u_pred - u_obs, v_pred - v_obs)` of masked keypoints and their
/// analytic Jacobian with respect to [`pose_to_params`].
pub fn reprojection_jacobian(
    p: &PoseVector,
    y: &Keypoints2D,
    mask: &[bool],
    intr: &CameraIntrinsics,
    model: &ArmModel,
) -> Result<(DVector<f64>, DMatrix<f64>)> {
    model.check_limits(&p.joints)?;
    let problem = ReprojectionProblem::new(model, Projection::Perspective(*intr), y, mask);
    let x = pose_to_params(p);
    let r = problem
        .residuals(&x)
        .ok_or_else(|| Error::BehindCamera("pose puts a keypoint behind the camera".into()))?;
    let j = problem
        .jacobian(&x)
        .ok_or_else(|| Error::BehindCamera("pose puts a keypoint behind the camera".into()))?;
    Ok((r, j))
}

#[derive(Debug, Clone, Copy)]
enum Projection {
    Perspective(CameraIntrinsics),
    Weak,
}

struct ReprojectionProblem<'a> {
    model: &'a ArmModel,
    projection: Projection,
    obs: Vec<(usize, Vector2<f64>)>,
    lo: [f64; NUM_JOINTS],
    hi: [f64; NUM_JOINTS],
}

fn joints_of(x: &DVector<f64>) -> [f64; NUM_JOINTS] {
    [x[6], x[7], x[8], x[9]]
}

impl<'a> ReprojectionProblem<'a> {
    fn new(model: &'a ArmModel, projection: Projection, y: &Keypoints2D, mask: &[bool]) -> Self {
        let obs = (0..y.len())
            .filter(|&k| mask[k])
            .map(|k| (k, y.points[k]))
            .collect();
        let mut lo = [0.0; NUM_JOINTS];
        let mut hi = [0.0; NUM_JOINTS];
        for (j, joint) in model.joints.iter().enumerate() {
            lo[j] = joint.limit_deg[0].to_radians();
            hi[j] = joint.limit_deg[1].to_radians();
        }
        Self {
            model,
            projection,
            obs,
            lo,
            hi,
        }
    }

    /// Predicted pixel location of every keypoint.
    fn predict_all(&self, x: &DVector<f64>) -> Option<Vec<Vector2<f64>>> {
        let z = self.model.keypoints_at_radians(&joints_of(x));
        let (r, _) = rotation_with_derivatives(x[3], x[4], x[5]);
        z.coords
            .iter()
            .map(|w| match self.projection {
                Projection::Perspective(intr) => {
                    let pc = r * (w - Vector3::new(x[0], x[1], x[2]));
                    (pc.z > MIN_DEPTH).then(|| {
                        Vector2::new(intr.fx * pc.x / pc.z + intr.cx, intr.fy * pc.y / pc.z + intr.cy)
                    })
                }
                Projection::Weak => {
                    let q = r * w;
                    Some(Vector2::new(x[0] * q.x + x[1], x[0] * q.y + x[2]))
                }
            })
            .collect()
    }

    /// Pixel distance of each observed keypoint, in `obs` order.
    fn point_errors(&self, x: &DVector<f64>) -> Option<Vec<f64>> {
        let pred = self.predict_all(x)?;
        Some(self.obs.iter().map(|(k, uv)| (pred[*k] - uv).norm()).collect())
    }

    /// Initialization for restart `index`. Restart 0 is deterministic (centre of
    /// the rotation range, rest joints); later ones are random.
    fn initial_guess(&self, index: usize, opts: &SolverOptions, weak: Option<&WeakPrior>) -> DVector<f64> {
        let mut rng = stream_rng(opts.seed, Domain::SolverRestart, index as u64);
        let random = index > 0;
        let rot = if random {
            opts.init_rotation.sample(&mut rng)
        } else {
            opts.init_rotation.center()
        };
        let mut joints = [0.0; NUM_JOINTS];
        if random {
            for (j, v) in joints.iter_mut().enumerate() {
                *v = rng.random_range(self.lo[j]..=self.hi[j]);
            }
        }
        let jitter = if random { rng.random_range(0.75..1.35) } else { 1.0 };

        let z = self.model.keypoints_at_radians(&joints);
        let pts3: Vec<Vector3<f64>> = self.obs.iter().map(|(k, _)| z[*k]).collect();
        let pts2: Vec<Vector2<f64>> = self.obs.iter().map(|(_, uv)| *uv).collect();
        let c3 = pts3.iter().sum::<Vector3<f64>>() / pts3.len() as f64;
        let c2 = pts2.iter().sum::<Vector2<f64>>() / pts2.len() as f64;
        let extent3 = max_spread(pts3.iter().map(|p| p.as_slice()));
        let extent2 = max_spread(pts2.iter().map(|p| p.as_slice())).max(1.0);

        let r = rot.world_to_camera();
        let mut x = DVector::zeros(NUM_PARAMS);
        x[3] = rot.az.to_radians();
        x[4] = rot.el.to_radians();
        x[5] = rot.roll.to_radians();
        for j in 0..NUM_JOINTS {
            x[6 + j] = joints[j];
        }
        match self.projection {
            Projection::Perspective(intr) => {
                let distance = intr.fx * extent3.max(1.0) / extent2 * jitter;
                let ray_cam = Vector3::new((c2.x - intr.cx) / intr.fx, (c2.y - intr.cy) / intr.fy, 1.0).normalize();
                let loc = c3 - r.transpose() * ray_cam * distance;
                x.fixed_rows_mut::<3>(0).copy_from(&loc);
            }
            Projection::Weak => {
                let scale = weak
                    .and_then(|w| w.scale)
                    .unwrap_or(extent2 / extent3.max(1.0))
                    * jitter;
                let q = r * c3;
                x[0] = scale;
                x[1] = c2.x - scale * q.x;
                x[2] = c2.y - scale * q.y;
            }
        }
        x
    }
}

fn max_spread<'p>(points: impl Iterator<Item = &'p [f64]> + Clone) -> f64 {
    let mut best: f64 = 0.0;
    for (i, a) in points.clone().enumerate() {
        for b in points.clone().skip(i + 1) {
            let d: f64 = a.iter().zip(b).map(|(p, q)| (p - q) * (p - q)).sum();
            best = best.max(d);
        }
    }
    best.sqrt()
}

impl LeastSquaresProblem for ReprojectionProblem<'_> {
    fn residuals(&self, x: &DVector<f64>) -> Option<DVector<f64>> {
        let pred = self.predict_all(x);
        // Only observed points need to be in front of the camera.
        let z = self.model.keypoints_at_radians(&joints_of(x));
        let (r, _) = rotation_with_derivatives(x[3], x[4], x[5]);
        let mut out = DVector::zeros(2 * self.obs.len());
        for (i, (k, uv)) in self.obs.iter().enumerate() {
            let p = match (&pred, self.projection) {
                (Some(pred), _) => pred[*k],
                (None, Projection::Perspective(intr)) => {
                    let pc = r * (z[*k] - Vector3::new(x[0], x[1], x[2]));
                    if pc.z <= MIN_DEPTH {
                        return None;
                    }
                    Vector2::new(intr.fx * pc.x / pc.z + intr.cx, intr.fy * pc.y / pc.z + intr.cy)
                }
                (None, Projection::Weak) => unreachable!("weak projection is always defined"),
            };
            out[2 * i] = p.x - uv.x;
            out[2 * i + 1] = p.y - uv.y;
        }
        Some(out)
    }

    fn jacobian(&self, x: &DVector<f64>) -> Option<DMatrix<f64>> {
        let (z, dz) = self.model.keypoints_and_jacobian(&joints_of(x));
        let (r, dr) = rotation_with_derivatives(x[3], x[4], x[5]);
        let mut jac = DMatrix::zeros(2 * self.obs.len(), NUM_PARAMS);
        for (i, (k, _)) in self.obs.iter().enumerate() {
            let (ru, rv) = (2 * i, 2 * i + 1);
            match self.projection {
                Projection::Perspective(intr) => {
                    let d = z[*k] - Vector3::new(x[0], x[1], x[2]);
                    let pc = r * d;
                    if pc.z <= MIN_DEPTH {
                        return None;
                    }
                    let iz = 1.0 / pc.z;
                    // Rows of d(u, v) / d(camera point).
                    let du = Vector3::new(intr.fx * iz, 0.0, -intr.fx * pc.x * iz * iz);
                    let dv = Vector3::new(0.0, intr.fy * iz, -intr.fy * pc.y * iz * iz);
                    let mut put = |col: usize, dpc: Vector3<f64>| {
                        jac[(ru, col)] = du.dot(&dpc);
                        jac[(rv, col)] = dv.dot(&dpc);
                    };
                    for c in 0..3 {
                        put(c, -r.column(c).into_owned());
                    }
                    for a in 0..3 {
                        put(3 + a, dr[a] * d);
                    }
                    for j in 0..NUM_JOINTS {
                        put(6 + j, r * dz[*k][j]);
                    }
                }
                Projection::Weak => {
                    let s = x[0];
                    let q = r * z[*k];
                    jac[(ru, 0)] = q.x;
                    jac[(rv, 0)] = q.y;
                    jac[(ru, 1)] = 1.0;
                    jac[(rv, 2)] = 1.0;
                    for a in 0..3 {
                        let dq = dr[a] * z[*k];
                        jac[(ru, 3 + a)] = s * dq.x;
                        jac[(rv, 3 + a)] = s * dq.y;
                    }
                    for j in 0..NUM_JOINTS {
                        let dq = r * dz[*k][j];
                        jac[(ru, 6 + j)] = s * dq.x;
                        jac[(rv, 6 + j)] = s * dq.y;
                    }
                }
            }
        }
        Some(jac)
    }

    fn bounds(&self) -> Option<(DVector<f64>, DVector<f64>)> {
        let mut lo = DVector::from_element(NUM_PARAMS, f64::NEG_INFINITY);
        let mut hi = DVector::from_element(NUM_PARAMS, f64::INFINITY);
        let el_max = EL_LIMIT_DEG.to_radians();
        lo[4] = -el_max;
        hi[4] = el_max;
        for j in 0..NUM_JOINTS {
            lo[6 + j] = self.lo[j];
            hi[6 + j] = self.hi[j];
        }
        if matches!(self.projection, Projection::Weak) {
            lo[0] = MIN_WEAK_SCALE;
        }
        Some((lo, hi))
    }
}

/// Solve for the pose with a full-perspective camera.
pub fn solve_pose(
    y: &Keypoints2D,
    intr: &CameraIntrinsics,
    model: &ArmModel,
    opts: &SolverOptions,
) -> Result<SolveResult> {
    solve_pose_tracked(y, intr, model, opts, None)
}

/// As [`solve_pose`], with an extra initialization at `previous` (the last
/// frame's solution when tracking). It replaces restart 0.
pub fn solve_pose_tracked(
    y: &Keypoints2D,
    intr: &CameraIntrinsics,
    model: &ArmModel,
    opts: &SolverOptions,
    previous: Option<&PoseVector>,
) -> Result<SolveResult> {
    intr.validate()?;
    let tracked = previous.map(|p| {
        let mut p = *p;
        p.joints = model.clamp(&p.joints);
        pose_to_params(&p)
    });
    solve_impl(y, model, opts, Projection::Perspective(*intr), None, tracked)
}

/// Solve with a weak-perspective camera, for images with unknown intrinsics.
pub fn solve_pose_weak(
    y: &Keypoints2D,
    prior: &WeakPrior,
    model: &ArmModel,
    opts: &SolverOptions,
) -> Result<SolveResult> {
    if let Some(s) = prior.scale {
        if !(s > 0.0 && s.is_finite()) {
            return Err(Error::InvalidInput("weak scale prior must be positive".into()));
        }
    }
    solve_impl(y, model, opts, Projection::Weak, Some(prior), None)
}

fn solve_impl(
    y: &Keypoints2D,
    model: &ArmModel,
    opts: &SolverOptions,
    projection: Projection,
    weak: Option<&WeakPrior>,
    tracked: Option<DVector<f64>>,
) -> Result<SolveResult> {
    opts.validate()?;
    y.validate()?;
    let mut mask = filter_keypoints(y, opts.confidence_threshold);
    let found = mask.iter().filter(|&&m| m).count();
    if found < opts.min_inliers {
        return Err(Error::InsufficientKeypoints {
            found,
            required: opts.min_inliers,
        });
    }

    let lm_opts = opts.lm_options();
    let problem = ReprojectionProblem::new(model, projection, y, &mask);
    let outcomes: Vec<Option<LmOutcome>> = opts.exec.map_indexed(opts.restarts, |i| {
        let x0 = match (&tracked, i) {
            (Some(x), 0) => x.clone(),
            _ => problem.initial_guess(i, opts, weak),
        };
        lm::minimize(&problem, x0, &lm_opts)
    });

    let traces: Vec<Option<RestartTrace>> = outcomes
        .iter()
        .map(|o| {
            o.as_ref().map(|o| RestartTrace {
                initial_residual: o.initial_cost,
                final_residual: o.cost,
                iterations: o.iterations,
                converged: o.converged,
            })
        })
        .collect();
    let mut best: Option<&LmOutcome> = None;
    for o in outcomes.iter().flatten() {
        if best.is_none_or(|b| o.cost < b.cost) {
            best = Some(o);
        }
    }
    let Some(best) = best else {
        return Err(Error::BehindCamera(
            "no initialization puts the confident keypoints in front of the camera".into(),
        ));
    };
    if !outcomes.iter().flatten().any(|o| o.converged) {
        return Err(Error::NoConvergence {
            max_iterations: opts.max_iterations,
        });
    }

    let mut x = best.x.clone();
    let mut iterations = best.iterations;
    for _ in 0..opts.robust_rounds {
        let current = ReprojectionProblem::new(model, projection, y, &mask);
        let Some(errors) = current.point_errors(&x) else { break };
        let demote = robust_demotions(&errors, opts);
        if demote.is_empty() {
            break;
        }
        for i in demote {
            mask[current.obs[i].0] = false;
        }
        let refit = ReprojectionProblem::new(model, projection, y, &mask);
        match lm::minimize(&refit, x.clone(), &lm_opts) {
            Some(o) => {
                iterations += o.iterations;
                x = o.x;
            }
            None => break,
        }
    }

    let final_problem = ReprojectionProblem::new(model, projection, y, &mask);
    let degenerate = is_degenerate(&final_problem, &x);
    if degenerate {
        log::warn!("pose fit is degenerate: confident keypoints do not constrain all parameters");
    }
    let (pose, weak_scale) = params_to_pose(&x, model, projection, weak);
    let z = model.keypoints_at_radians(&pose.joints.to_radians());
    let y_refined = match projection {
        Projection::Perspective(intr) => project(&intr, &pose, &z)?.points2d,
        Projection::Weak => {
            let prior = weak.copied().unwrap_or_default();
            let mut kp = weak_project(x[0], prior.principal, &pose, &z)?;
            kp.visible = vec![true; NUM_KEYPOINTS];
            kp
        }
    };
    let residual = y_refined
        .points
        .iter()
        .zip(&y.points)
        .zip(&mask)
        .filter(|(_, &m)| m)
        .map(|((a, b), _)| (a - b).norm_squared())
        .sum();

    Ok(SolveResult {
        pose,
        z,
        y_refined,
        residual,
        inlier_mask: mask,
        iterations_used: iterations,
        restarts_used: opts.restarts,
        weak_scale,
        degenerate,
        restarts: traces,
    })
}

/// Indices (into the observation list) to demote: residual above
/// `max(cutoff × median, floor)`, never leaving fewer than `min_inliers`.
fn robust_demotions(errors: &[f64], opts: &SolverOptions) -> Vec<usize> {
    let mut sorted = errors.to_vec();
    let cut = (opts.robust_cutoff * median(&mut sorted)).max(opts.robust_floor_px);
    let mut over: Vec<usize> = (0..errors.len()).filter(|&i| errors[i] > cut).collect();
    let allowed = errors.len().saturating_sub(opts.min_inliers);
    if over.len() > allowed {
        over.sort_by(|&a, &b| errors[b].total_cmp(&errors[a]).then(a.cmp(&b)));
        over.truncate(allowed);
        over.sort_unstable();
    }
    over
}

fn is_degenerate(problem: &ReprojectionProblem, x: &DVector<f64>) -> bool {
    let pts: Vec<Vector2<f64>> = problem.obs.iter().map(|(_, uv)| *uv).collect();
    let c = pts.iter().sum::<Vector2<f64>>() / pts.len() as f64;
    let cov = pts
        .iter()
        .map(|p| (p - c) * (p - c).transpose())
        .sum::<Matrix2<f64>>();
    let eig = SymmetricEigen::new(cov).eigenvalues;
    let (lo, hi) = (eig.min(), eig.max());
    if hi <= 0.0 || lo <= 1e-6 * hi {
        return true;
    }
    match problem.jacobian(x) {
        Some(j) => {
            let sv = j.singular_values();
            let max = sv.max();
            max <= 0.0 || sv.min() <= 1e-10 * max
        }
        None => true,
    }
}

fn params_to_pose(
    x: &DVector<f64>,
    model: &ArmModel,
    projection: Projection,
    weak: Option<&WeakPrior>,
) -> (PoseVector, Option<f64>) {
    let rotation = CameraRotation::new(
        wrap_degrees(x[3].to_degrees()),
        x[4].to_degrees(),
        wrap_degrees(x[5].to_degrees()),
    );
    let joints = model.clamp(&JointAngles::from_radians(joints_of(x)));
    match projection {
        Projection::Perspective(_) => (
            PoseVector {
                cam_location: Vector3::new(x[0], x[1], x[2]),
                cam_rotation: rotation,
                joints,
            },
            None,
        ),
        Projection::Weak => {
            let prior = weak.copied().unwrap_or_default();
            let s = x[0];
            let r = rotation.world_to_camera();
            let in_camera = Vector3::new(
                (prior.principal.x - x[1]) / s,
                (prior.principal.y - x[2]) / s,
                -prior.nominal_depth,
            );
            (
                PoseVector {
                    cam_location: r.transpose() * in_camera,
                    cam_rotation: rotation,
                    joints,
                },
                Some(s),
            )
        }
    }
}
