//! Damped Newton with backtracking for the penalized conditional logit.

use nalgebra::{DMatrix, DVector};

use super::objective::{nll_and_gradient, nll_gradient_hessian, penalty_and_gradient, penalty_hessian};
use super::{ChoiceError, ChoiceSet, PenaltySpec};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions {
    pub gradient_tolerance: f64,
    pub max_iterations: usize,
    /// Bound on `|beta|_inf`; hitting it stops the fit with `norm_capped`.
    pub weight_cap: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            gradient_tolerance: 1e-6,
            max_iterations: 500,
            weight_cap: 1e3,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub beta: DVector<f64>,
    pub objective: f64,
    pub gradient_norm: f64,
    pub iterations: usize,
    pub converged: bool,
    /// The iterate ran into the weight cap (typically separable data without
    /// a penalty) and was clipped.
    pub norm_capped: bool,
}

impl FitResult {
    /// Anything other than clean convergence.
    pub fn flagged(&self) -> bool {
        !self.converged || self.norm_capped
    }
}

pub fn fit(
    sets: &[ChoiceSet],
    spec: &PenaltySpec,
    beta_init: &DVector<f64>,
) -> Result<FitResult, ChoiceError> {
    fit_with(sets, spec, beta_init, &FitOptions::default())
}

pub fn fit_with(
    sets: &[ChoiceSet],
    spec: &PenaltySpec,
    beta_init: &DVector<f64>,
    opts: &FitOptions,
) -> Result<FitResult, ChoiceError> {
    if sets.is_empty() {
        return Err(ChoiceError::EmptyWindow);
    }
    let p = beta_init.len();
    spec.validate(p)?;
    if sets.iter().any(|s| s.num_features() != p) {
        return Err(ChoiceError::Ragged);
    }
    let pen_hess = penalty_hessian(p, spec)?;
    let value_at = |b: &DVector<f64>| -> f64 {
        let nll = nll_and_gradient(b, sets).0;
        let pen = penalty_and_gradient(b, spec).map(|x| x.0).unwrap_or(f64::INFINITY);
        nll + pen
    };
    let eval = |b: &DVector<f64>| -> (f64, DVector<f64>, DMatrix<f64>) {
        let (nll, g, h) = nll_gradient_hessian(b, sets);
        let (pen, pg) = penalty_and_gradient(b, spec).expect("validated");
        (nll + pen, g + pg, h + &pen_hess)
    };

    let mut beta = beta_init.clone();
    let mut norm_capped = false;
    if clip(&mut beta, opts.weight_cap) {
        norm_capped = true;
    }
    let (mut f, mut g, mut h) = eval(&beta);
    let mut iterations = 0;
    let mut converged = false;
    let mut damping = 0.0f64;

    while iterations < opts.max_iterations {
        if g.norm() <= opts.gradient_tolerance {
            converged = true;
            break;
        }
        iterations += 1;
        let scale = 1.0 + h.diagonal().amax();
        let mut accepted = None;
        // grow the damping until the step direction yields a decrease
        for _ in 0..40 {
            let mut damped = h.clone();
            for i in 0..p {
                damped[(i, i)] += damping;
            }
            let Some(chol) = damped.cholesky() else {
                damping = (damping * 10.0).max(1e-10 * scale);
                continue;
            };
            let step = -chol.solve(&g);
            let slope = g.dot(&step);
            if slope >= 0.0 {
                damping = (damping * 10.0).max(1e-10 * scale);
                continue;
            }
            let mut t = 1.0;
            for _ in 0..50 {
                let candidate = &beta + &step * t;
                let fc = value_at(&candidate);
                if fc.is_finite() && fc <= f + 1e-4 * t * slope {
                    accepted = Some(candidate);
                    break;
                }
                t *= 0.5;
            }
            if accepted.is_some() {
                break;
            }
            damping = (damping * 10.0).max(1e-10 * scale);
        }
        let Some(next) = accepted else {
            // no descent possible at floating-point resolution
            break;
        };
        beta = next;
        damping *= 0.1;
        if damping < 1e-12 * scale {
            damping = 0.0;
        }
        if clip(&mut beta, opts.weight_cap) {
            norm_capped = true;
            (f, g, _) = eval(&beta);
            break;
        }
        (f, g, h) = eval(&beta);
    }
    if !converged && g.norm() <= opts.gradient_tolerance {
        converged = true;
    }

    Ok(FitResult {
        gradient_norm: g.norm(),
        beta,
        objective: f,
        iterations,
        converged,
        norm_capped,
    })
}

fn clip(beta: &mut DVector<f64>, cap: f64) -> bool {
    let mut clipped = false;
    for b in beta.iter_mut() {
        if b.abs() > cap {
            *b = b.signum() * cap;
            clipped = true;
        }
    }
    clipped
}
