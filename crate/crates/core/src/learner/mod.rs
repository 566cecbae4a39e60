//! Online rollout learners.
//!
//! Every variant runs the same loop: evaluate all legal actions with rollouts
//! under the current policy, take the best one, learn from the decision, and
//! reset the episode on a terminal transition. The variants differ only in how
//! they learn:
//!
//! * the M-learning variants append a choice set per non-terminal decision and
//!   refit a conditional-logit policy on a sliding window of recent sets;
//! * `lfd_only` counts feature-direction evidence and plays `argmax d . phi`;
//! * `ipse` runs the direction learner until every direction is decided, then
//!   switches to M-learning with the penalty centered on the learned
//!   directions and a fresh iteration counter, so the decreasing schedule
//!   `lambda_k = c / k` starts strong and relaxes.

mod config;

use nalgebra::DVector;
use rand::RngCore;
use thiserror::Error;

use crate::choice::{
    cross_validate_lambda, fit, ChoiceDataset, ChoiceError, ChoiceSet, PenaltyKind, PenaltySpec,
};
use crate::env::{CallMeter, FeatureEnvironment};
use crate::features::NUM_FEATURES;
use crate::lfd::{lfd_iteration, DirectionState};
use crate::policy::LinearPolicy;
use crate::rollout::{dominance_filter, rollout_argmax_over, RolloutError};

pub use config::{LearnerConfig, Variant};

#[derive(Debug, Error)]
pub enum LearnerError {
    #[error("invalid learner configuration: {0}")]
    Config(String),
    #[error("environment error: {0}")]
    Env(String),
    #[error(transparent)]
    Choice(#[from] ChoiceError),
}

impl<E: std::error::Error + 'static> From<RolloutError<E>> for LearnerError {
    fn from(e: RolloutError<E>) -> Self {
        LearnerError::Env(e.to_string())
    }
}

/// `n(k) = min(cap, floor(k / 2) + 2)`.
pub fn window_size(k: u64, cap: usize) -> usize {
    assert!(k >= 1, "iterations are counted from 1");
    ((k / 2) as usize + 2).min(cap)
}

/// `lambda_k = c / k`.
pub fn lambda_schedule(k: u64, c: f64) -> f64 {
    assert!(k >= 1, "iterations are counted from 1");
    c / k as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Phase {
    Lfd,
    M,
}

impl Phase {
    pub fn as_str(&self) -> &'static str {
        match self {
            Phase::Lfd => "LFD",
            Phase::M => "M",
        }
    }
}

/// State of the learner after one iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub iteration: u64,
    pub phase: Phase,
    /// beta in the M phase, the direction vector in the LFD phase.
    pub weights: [f64; NUM_FEATURES],
    /// Penalty strength used for this iteration's fit.
    pub lambda: Option<f64>,
    /// Choice sets in the fitted window (0 in the LFD phase).
    pub window: usize,
    pub meter_delta: u64,
    pub terminal: bool,
    /// The fit did not converge cleanly.
    pub fit_flagged: bool,
}

#[derive(Debug, Clone)]
pub struct LearningTrace {
    pub variant: Variant,
    /// Policy before the first iteration.
    pub initial_weights: [f64; NUM_FEATURES],
    pub rows: Vec<TraceRow>,
    /// Last LFD iteration of an IPSE run.
    pub transition_iteration: Option<u64>,
    /// Direction learner state, for variants that learn directions.
    pub directions: Option<DirectionState>,
    /// The direction learner hit its iteration cap; the run stopped early.
    pub aborted: bool,
}

impl LearningTrace {
    /// Weights in force after `iteration` (0 = initial policy).
    pub fn weights_at(&self, iteration: u64) -> Option<[f64; NUM_FEATURES]> {
        if iteration == 0 {
            return Some(self.initial_weights);
        }
        self.rows
            .iter()
            .find(|r| r.iteration == iteration)
            .map(|r| r.weights)
    }

    pub fn total_calls(&self) -> u64 {
        self.rows.iter().map(|r| r.meter_delta).sum()
    }
}

fn directions_array(state: &DirectionState) -> [f64; NUM_FEATURES] {
    let mut d = [0.0; NUM_FEATURES];
    for (slot, &x) in d.iter_mut().zip(&state.directions) {
        *slot = x as f64;
    }
    d
}

/// Conditional-logit learner: the M-learning loop body.
struct MLearner {
    beta: DVector<f64>,
    dataset: ChoiceDataset,
    /// Iterations since this learner started, counted from 1 once running.
    k: u64,
    /// Penalty template; `None` for the unregularized variant.
    template: Option<PenaltySpec>,
    cross_validate: bool,
    /// Directions used by the optional dominance filter.
    filter_directions: Option<[f64; NUM_FEATURES]>,
}

struct MOutcome<S> {
    next: S,
    terminal: bool,
    lambda: Option<f64>,
    window: usize,
    fit_flagged: bool,
}

impl MLearner {
    fn iterate<E: FeatureEnvironment>(
        &mut self,
        env: &E,
        state: &E::State,
        cfg: &LearnerConfig,
        rng: &mut dyn RngCore,
        meter: &mut CallMeter,
    ) -> Result<MOutcome<E::State>, LearnerError> {
        self.k += 1;
        let actions = env.legal_actions(state);
        let candidates = env.candidates(state, &actions);
        let policy = LinearPolicy::from_slice(self.beta.as_slice());

        let considered: Vec<usize> = match &self.filter_directions {
            Some(d) => {
                let feats: Vec<_> = candidates.iter().map(|c| c.features).collect();
                dominance_filter(&feats, d).unwrap_or_else(|| (0..actions.len()).collect())
            }
            None => (0..actions.len()).collect(),
        };
        let subset: Vec<E::Action> = considered.iter().map(|&i| actions[i]).collect();
        let decision = rollout_argmax_over(env, state, &subset, &policy, &cfg.rollout, rng, meter)?;
        let chosen = considered[decision.chosen];
        let transition = env
            .step(state, actions[chosen], rng, meter)
            .map_err(|e| LearnerError::Env(e.to_string()))?;

        if transition.terminal {
            return Ok(MOutcome {
                next: env.initial_state(rng),
                terminal: true,
                lambda: None,
                window: 0,
                fit_flagged: false,
            });
        }

        let mut outcome = MOutcome {
            next: transition.next,
            terminal: false,
            lambda: None,
            window: 0,
            fit_flagged: false,
        };
        if actions.len() < 2 {
            return Ok(outcome);
        }
        self.dataset.push(ChoiceSet::from_candidates(chosen, &candidates)?);
        let window = self.dataset.window(window_size(self.k, cfg.window_cap));
        let spec = match &self.template {
            None => PenaltySpec::none(),
            Some(t) if self.cross_validate => {
                let lambda = cross_validate_lambda(window, t, &cfg.cv_grid, cfg.cv_folds, rng)?;
                t.with_lambda(lambda)
            }
            Some(t) => t.with_lambda(lambda_schedule(self.k, cfg.schedule_c)),
        };
        let fitted = fit(window, &spec, &self.beta)?;
        self.beta = fitted.beta.clone();
        outcome.lambda = (spec.kind != PenaltyKind::None).then_some(spec.lambda);
        outcome.window = window.len();
        outcome.fit_flagged = fitted.flagged();
        Ok(outcome)
    }

    fn weights(&self) -> [f64; NUM_FEATURES] {
        let mut w = [0.0; NUM_FEATURES];
        w.copy_from_slice(self.beta.as_slice());
        w
    }
}

/// Runs any variant for `cfg.total_iterations` iterations.
pub fn run_variant<E: FeatureEnvironment>(
    env: &E,
    cfg: &LearnerConfig,
    rng: &mut dyn RngCore,
    meter: &mut CallMeter,
) -> Result<LearningTrace, LearnerError> {
    cfg.validate().map_err(LearnerError::Config)?;
    match cfg.variant {
        Variant::LfdOnly | Variant::Ipse => run_direction_variant(env, cfg, rng, meter),
        _ => run_m_variant(env, cfg, rng, meter),
    }
}

/// The IPSE composition; `cfg.variant` must be [`Variant::Ipse`].
pub fn run_ipse<E: FeatureEnvironment>(
    env: &E,
    cfg: &LearnerConfig,
    rng: &mut dyn RngCore,
    meter: &mut CallMeter,
) -> Result<LearningTrace, LearnerError> {
    if cfg.variant != Variant::Ipse {
        return Err(LearnerError::Config(format!(
            "run_ipse called with variant {}",
            cfg.variant.as_str()
        )));
    }
    run_variant(env, cfg, rng, meter)
}

fn m_learner_for(cfg: &LearnerConfig, directions: Option<[f64; NUM_FEATURES]>) -> MLearner {
    let ones = [1.0; NUM_FEATURES];
    let (template, cross_validate, init, filter) = match cfg.variant {
        Variant::MUnregularized => (None, false, [0.0; NUM_FEATURES], None),
        Variant::MStewSchedule => (Some(PenaltySpec::stew(0.0, &ones)), false, [0.0; NUM_FEATURES], None),
        Variant::MStewCv => (Some(PenaltySpec::stew(0.0, &ones)), true, [0.0; NUM_FEATURES], None),
        Variant::MStewKnownDirections => (
            Some(PenaltySpec::stew(0.0, &cfg.known_directions)),
            false,
            [0.0; NUM_FEATURES],
            cfg.filter_dominated.then_some(cfg.known_directions),
        ),
        Variant::Ipse | Variant::LfdOnly => {
            let d = directions.expect("IPSE switches only with learned directions");
            let template = match cfg.ipse_penalty {
                PenaltyKind::None => None,
                PenaltyKind::StewDirected => Some(PenaltySpec::stew(0.0, &d)),
                PenaltyKind::ShrinkToDirections => Some(PenaltySpec::shrink_to(0.0, &d)),
            };
            (template, false, d, cfg.filter_dominated.then_some(d))
        }
    };
    MLearner {
        beta: DVector::from_column_slice(&init),
        dataset: ChoiceDataset::new(),
        k: 0,
        template,
        cross_validate,
        filter_directions: filter,
    }
}

fn run_m_variant<E: FeatureEnvironment>(
    env: &E,
    cfg: &LearnerConfig,
    rng: &mut dyn RngCore,
    meter: &mut CallMeter,
) -> Result<LearningTrace, LearnerError> {
    let mut learner = m_learner_for(cfg, None);
    let mut trace = LearningTrace {
        variant: cfg.variant,
        initial_weights: learner.weights(),
        rows: Vec::with_capacity(cfg.total_iterations as usize),
        transition_iteration: None,
        directions: None,
        aborted: false,
    };
    let mut state = env.initial_state(rng);
    for iteration in 1..=cfg.total_iterations {
        let start = meter.calls();
        let out = learner.iterate(env, &state, cfg, rng, meter)?;
        trace.rows.push(TraceRow {
            iteration,
            phase: Phase::M,
            weights: learner.weights(),
            lambda: out.lambda,
            window: out.window,
            meter_delta: meter.calls() - start,
            terminal: out.terminal,
            fit_flagged: out.fit_flagged,
        });
        state = out.next;
    }
    Ok(trace)
}

fn run_direction_variant<E: FeatureEnvironment>(
    env: &E,
    cfg: &LearnerConfig,
    rng: &mut dyn RngCore,
    meter: &mut CallMeter,
) -> Result<LearningTrace, LearnerError> {
    let mut directions = DirectionState::new(NUM_FEATURES);
    let mut trace = LearningTrace {
        variant: cfg.variant,
        initial_weights: [0.0; NUM_FEATURES],
        rows: Vec::with_capacity(cfg.total_iterations as usize),
        transition_iteration: None,
        directions: None,
        aborted: false,
    };
    let mut m_learner: Option<MLearner> = None;
    let mut state = env.initial_state(rng);

    for iteration in 1..=cfg.total_iterations {
        let start = meter.calls();
        if let Some(learner) = m_learner.as_mut() {
            let out = learner.iterate(env, &state, cfg, rng, meter)?;
            trace.rows.push(TraceRow {
                iteration,
                phase: Phase::M,
                weights: learner.weights(),
                lambda: out.lambda,
                window: out.window,
                meter_delta: meter.calls() - start,
                terminal: out.terminal,
                fit_flagged: out.fit_flagged,
            });
            state = out.next;
            continue;
        }

        if !directions.all_decided() && iteration > cfg.lfd.iteration_cap {
            trace.aborted = true;
            break;
        }
        let learning = !directions.all_decided();
        let step = lfd_iteration(
            env,
            &state,
            &mut directions,
            &cfg.rollout,
            &cfg.lfd,
            iteration,
            learning,
            rng,
            meter,
        )?;
        trace.rows.push(TraceRow {
            iteration,
            phase: Phase::Lfd,
            weights: directions_array(&directions),
            lambda: None,
            window: 0,
            meter_delta: step.meter_delta,
            terminal: step.terminal,
            fit_flagged: false,
        });
        state = step.next;

        if cfg.variant == Variant::Ipse && directions.all_decided() {
            trace.transition_iteration = Some(iteration);
            m_learner = Some(m_learner_for(cfg, Some(directions_array(&directions))));
        }
    }
    trace.directions = Some(directions);
    Ok(trace)
}
