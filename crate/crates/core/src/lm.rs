//! Box-constrained Levenberg–Marquardt.
//!
//! Damping follows Marquardt's diagonal scaling; the damping factor is
//! multiplied by `lambda_up` after a rejected step and by `lambda_down` after an
//! accepted one. Variables pinned at a bound with the gradient pushing outward
//! are held fixed for the step; every trial point is clamped to the box.
//! Accepted steps strictly decrease the cost.

use nalgebra::{DMatrix, DVector};

pub trait LeastSquaresProblem {
    /// Residual vector, or `None` where the model is undefined (e.g. a point
    /// behind the camera). Undefined trial points are rejected like uphill steps.
    fn residuals(&self, x: &DVector<f64>) -> Option<DVector<f64>>;

    fn jacobian(&self, x: &DVector<f64>) -> Option<DMatrix<f64>>;

    /// Lower and upper bounds per variable; infinite where unbounded.
    fn bounds(&self) -> Option<(DVector<f64>, DVector<f64>)> {
        None
    }
}

fn clamp(x: &mut DVector<f64>, bounds: &Option<(DVector<f64>, DVector<f64>)>) {
    if let Some((lo, hi)) = bounds {
        for i in 0..x.len() {
            x[i] = x[i].clamp(lo[i], hi[i]);
        }
    }
}

/// Variables at a bound whose descent direction leaves the box.
fn pinned(x: &DVector<f64>, g: &DVector<f64>, bounds: &Option<(DVector<f64>, DVector<f64>)>) -> Vec<bool> {
    match bounds {
        None => vec![false; x.len()],
        Some((lo, hi)) => (0..x.len())
            .map(|i| (x[i] <= lo[i] && g[i] > 0.0) || (x[i] >= hi[i] && g[i] < 0.0))
            .collect(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LmOptions {
    pub max_iterations: usize,
    /// Stop once an accepted step lowers the cost by less than this fraction.
    pub tolerance: f64,
    pub lambda_init: f64,
    pub lambda_up: f64,
    pub lambda_down: f64,
    /// Stop once a step moves `x` by less than this, relative to `‖x‖`.
    pub step_tolerance: f64,
    /// Costs at or below this are treated as an exact fit.
    pub cost_floor: f64,
}

impl Default for LmOptions {
    fn default() -> Self {
        Self {
            max_iterations: 200,
            tolerance: 1e-10,
            lambda_init: 1e-3,
            lambda_up: 10.0,
            lambda_down: 0.1,
            step_tolerance: 1e-10,
            cost_floor: 1e-20,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LmOutcome {
    pub x: DVector<f64>,
    /// Sum of squared residuals at `x`.
    pub cost: f64,
    pub initial_cost: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Cost after each accepted step, starting with the initial cost.
    pub accepted_costs: Vec<f64>,
}

const LAMBDA_MAX: f64 = 1e16;
const LAMBDA_MIN: f64 = 1e-15;

/// Minimize `½‖r(x)‖²` from `x0`. Returns `None` if `x0` itself is infeasible.
pub fn minimize<P: LeastSquaresProblem + ?Sized>(
    problem: &P,
    x0: DVector<f64>,
    opts: &LmOptions,
) -> Option<LmOutcome> {
    let bounds = problem.bounds();
    let mut x = x0;
    clamp(&mut x, &bounds);
    let r = problem.residuals(&x)?;
    let mut cost = r.norm_squared();
    let mut r = r;
    let initial_cost = cost;
    let mut lambda = opts.lambda_init;
    let mut accepted_costs = vec![cost];
    let mut converged = false;
    let mut iterations = 0;
    let mut jac: Option<DMatrix<f64>> = None;

    while iterations < opts.max_iterations {
        if cost <= opts.cost_floor {
            converged = true;
            break;
        }
        iterations += 1;
        if jac.is_none() {
            jac = problem.jacobian(&x);
        }
        let Some(j) = jac.as_ref() else { break };
        let jt = j.transpose();
        let mut a = &jt * j;
        let mut g = &jt * &r;
        for (i, p) in pinned(&x, &g, &bounds).into_iter().enumerate() {
            if p {
                a.row_mut(i).fill(0.0);
                a.column_mut(i).fill(0.0);
                a[(i, i)] = 1.0;
                g[i] = 0.0;
            }
        }
        if g.amax() <= 1e-15 * (1.0 + cost) {
            converged = true;
            break;
        }
        let diag_floor = 1e-12 * a.diagonal().amax().max(1e-300);
        let mut damped = a.clone();
        for i in 0..damped.nrows() {
            damped[(i, i)] += lambda * a[(i, i)].max(diag_floor);
        }
        let Some(chol) = damped.cholesky() else {
            lambda *= opts.lambda_up;
            if lambda > LAMBDA_MAX {
                break;
            }
            continue;
        };
        let delta = chol.solve(&(-g));
        let mut trial = &x + &delta;
        clamp(&mut trial, &bounds);
        let step = (&trial - &x).norm();
        match problem.residuals(&trial) {
            Some(r_new) if r_new.norm_squared() < cost => {
                let new_cost = r_new.norm_squared();
                let decrease = cost - new_cost;
                let old = cost;
                let small_step = step <= opts.step_tolerance * (opts.step_tolerance + x.norm());
                x = trial;
                r = r_new;
                cost = new_cost;
                jac = None;
                accepted_costs.push(cost);
                lambda = (lambda * opts.lambda_down).max(LAMBDA_MIN);
                if decrease <= opts.tolerance * old || small_step {
                    converged = true;
                    break;
                }
            }
            _ => {
                lambda *= opts.lambda_up;
                if lambda > LAMBDA_MAX {
                    // No downhill direction left at any damping: a local minimum.
                    converged = true;
                    break;
                }
            }
        }
    }

    Some(LmOutcome {
        x,
        cost,
        initial_cost,
        iterations,
        converged,
        accepted_costs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Rosenbrock as a least-squares problem: r = (10 (y - x²), 1 - x).
    struct Rosenbrock;

    impl LeastSquaresProblem for Rosenbrock {
        fn residuals(&self, p: &DVector<f64>) -> Option<DVector<f64>> {
            Some(DVector::from_vec(vec![10.0 * (p[1] - p[0] * p[0]), 1.0 - p[0]]))
        }
        fn jacobian(&self, p: &DVector<f64>) -> Option<DMatrix<f64>> {
            Some(DMatrix::from_row_slice(2, 2, &[-20.0 * p[0], 10.0, -1.0, 0.0]))
        }
    }

    struct Boxed;

    impl LeastSquaresProblem for Boxed {
        fn residuals(&self, p: &DVector<f64>) -> Option<DVector<f64>> {
            Some(DVector::from_vec(vec![p[0] - 5.0]))
        }
        fn jacobian(&self, _: &DVector<f64>) -> Option<DMatrix<f64>> {
            Some(DMatrix::from_element(1, 1, 1.0))
        }
        fn bounds(&self) -> Option<(DVector<f64>, DVector<f64>)> {
            Some((DVector::from_element(1, -1.0), DVector::from_element(1, 2.0)))
        }
    }

    #[test]
    fn solves_rosenbrock() {
        let out = minimize(&Rosenbrock, DVector::from_vec(vec![-1.2, 1.0]), &LmOptions::default()).unwrap();
        assert!(out.converged);
        assert!((out.x[0] - 1.0).abs() < 1e-8 && (out.x[1] - 1.0).abs() < 1e-8, "{:?}", out.x);
        assert!(out.accepted_costs.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn respects_box() {
        let out = minimize(&Boxed, DVector::from_vec(vec![0.0]), &LmOptions::default()).unwrap();
        assert_eq!(out.x[0], 2.0);
        assert!(out.converged);
    }
}
