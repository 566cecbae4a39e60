//! Learning feature directions.
//!
//! Every non-terminal transition yields one paired-comparison instance per
//! undecided feature: does the rollout-chosen action have a larger value of the
//! feature than the other actions, more often than a smaller one? Positive and
//! negative instances are counted, and a feature's direction is fixed to the
//! majority sign as soon as an exact binomial test rejects "no direction" at
//! level `alpha`. Decided directions never change.

mod binomial;

use rand::RngCore;
use thiserror::Error;

use crate::env::{CallMeter, Candidate, FeatureEnvironment};
use crate::features::{FeatureVector, NUM_FEATURES};
use crate::policy::{argmax_random_tie, Policy};
use crate::rollout::{rollout_argmax_over, RolloutConfig, RolloutError};

pub use binomial::binomial_p_value;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LfdConfig {
    /// Significance threshold, in (0, 1).
    pub alpha: f64,
    /// Prefer any immediately line-clearing action over the directed score.
    pub alternative_rollout_policy: bool,
    /// Maximum number of iterations before giving up.
    pub iteration_cap: u64,
}

impl Default for LfdConfig {
    fn default() -> Self {
        Self {
            alpha: 0.05,
            alternative_rollout_policy: true,
            iteration_cap: 5000,
        }
    }
}

impl LfdConfig {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(format!("alpha must lie in (0, 1), got {}", self.alpha));
        }
        if self.iteration_cap == 0 {
            return Err("iteration_cap must be >= 1".into());
        }
        Ok(())
    }
}

/// `sign(sum_{a != chosen} sign(phi_i(chosen) - phi_i(a)))`.
pub fn delta_instance(chosen: &FeatureVector, others: &[FeatureVector], i: usize) -> i8 {
    debug_assert!(!others.is_empty());
    let total: i64 = others
        .iter()
        .map(|o| sign(chosen[i] - o[i]) as i64)
        .sum();
    total.signum() as i8
}

/// Delta for every feature, comparing `candidates[chosen]` against the rest.
pub fn deltas(candidates: &[Candidate], chosen: usize) -> [i8; NUM_FEATURES] {
    let mut totals = [0i64; NUM_FEATURES];
    let target = &candidates[chosen].features;
    for (j, c) in candidates.iter().enumerate() {
        if j == chosen {
            continue;
        }
        for (i, t) in totals.iter_mut().enumerate() {
            *t += sign(target[i] - c.features[i]) as i64;
        }
    }
    totals.map(|t| t.signum() as i8)
}

fn sign(x: f64) -> i8 {
    if x > 0.0 {
        1
    } else if x < 0.0 {
        -1
    } else {
        0
    }
}

/// Per-feature counters and directions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DirectionState {
    pub n_plus: Vec<u64>,
    pub n_minus: Vec<u64>,
    /// -1, 0 (undecided) or +1.
    pub directions: Vec<i8>,
    /// Iteration at which each direction was decided.
    pub decided_at: Vec<Option<u64>>,
}

impl DirectionState {
    pub fn new(features: usize) -> Self {
        Self {
            n_plus: vec![0; features],
            n_minus: vec![0; features],
            directions: vec![0; features],
            decided_at: vec![None; features],
        }
    }

    pub fn len(&self) -> usize {
        self.directions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.directions.is_empty()
    }

    pub fn all_decided(&self) -> bool {
        self.directions.iter().all(|&d| d != 0)
    }

    pub fn decided_count(&self) -> usize {
        self.directions.iter().filter(|&&d| d != 0).count()
    }

    pub fn directions_f64(&self) -> Vec<f64> {
        self.directions.iter().map(|&d| d as f64).collect()
    }

    /// Counts one instance per undecided feature and tests each of them.
    /// Decided features are left untouched.
    pub fn update(&mut self, deltas: &[i8], alpha: f64, iteration: u64) {
        assert_eq!(deltas.len(), self.len());
        for (i, &delta) in deltas.iter().enumerate() {
            if self.directions[i] != 0 {
                continue;
            }
            match delta {
                1 => self.n_plus[i] += 1,
                -1 => self.n_minus[i] += 1,
                _ => continue,
            }
            if binomial_p_value(self.n_plus[i], self.n_minus[i]) < alpha {
                self.directions[i] = if self.n_plus[i] > self.n_minus[i] { 1 } else { -1 };
                self.decided_at[i] = Some(iteration);
            }
        }
    }
}

/// `argmax_a d . phi(s, a)`, optionally preceded by a greedy grab of the
/// largest immediate reward when any action has a positive one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LfdPolicy {
    pub directions: [f64; NUM_FEATURES],
    pub prefer_immediate_reward: bool,
}

impl LfdPolicy {
    pub fn new(directions: &[i8], prefer_immediate_reward: bool) -> Self {
        let mut d = [0.0; NUM_FEATURES];
        for (slot, &x) in d.iter_mut().zip(directions) {
            *slot = x as f64;
        }
        Self {
            directions: d,
            prefer_immediate_reward,
        }
    }

    pub fn choose_among(&self, candidates: &[Candidate], rng: &mut dyn RngCore) -> usize {
        let directed = |c: &Candidate| c.features.dot(&self.directions);
        if self.prefer_immediate_reward {
            let best_reward = candidates
                .iter()
                .map(|c| c.immediate_reward)
                .fold(f64::NEG_INFINITY, f64::max);
            if best_reward > 0.0 {
                // lexicographic: reward first, then d . phi, then random
                let scores: Vec<f64> = candidates
                    .iter()
                    .map(|c| {
                        if c.immediate_reward == best_reward {
                            directed(c)
                        } else {
                            f64::NEG_INFINITY
                        }
                    })
                    .collect();
                return argmax_random_tie(&scores, rng);
            }
        }
        let scores: Vec<f64> = candidates.iter().map(directed).collect();
        argmax_random_tie(&scores, rng)
    }
}

impl<E: FeatureEnvironment> Policy<E> for LfdPolicy {
    fn choose(
        &self,
        env: &E,
        state: &E::State,
        actions: &[E::Action],
        rng: &mut dyn RngCore,
    ) -> usize {
        if actions.len() == 1 {
            return 0;
        }
        self.choose_among(&env.candidates(state, actions), rng)
    }
}

/// One row of the LFD trace, recorded after the iteration's update.
#[derive(Debug, Clone, PartialEq)]
pub struct LfdTraceRow {
    pub iteration: u64,
    pub n_plus: Vec<u64>,
    pub n_minus: Vec<u64>,
    pub directions: Vec<i8>,
    pub meter_delta: u64,
    pub terminal: bool,
}

#[derive(Debug, Clone)]
pub struct LfdRun {
    pub state: DirectionState,
    pub iterations: u64,
    pub trace: Vec<LfdTraceRow>,
}

impl LfdRun {
    pub fn directions(&self) -> &[i8] {
        &self.state.directions
    }
}

#[derive(Debug, Error)]
pub enum LfdError<E: std::error::Error + 'static> {
    #[error("directions still undecided after {} iterations", .0.iterations)]
    IterationCap(Box<LfdRun>),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Rollout(#[from] RolloutError<E>),
}

/// Result of one LFD iteration.
#[derive(Debug, Clone)]
pub struct LfdStep<S> {
    pub next: S,
    pub terminal: bool,
    pub meter_delta: u64,
}

/// One pass of the LFD loop body: evaluate every action by rollouts under the
/// current directions, take the best, and, if the episode continues, count the
/// comparison instances. On a terminal transition `next` is a fresh initial
/// state.
#[allow(clippy::too_many_arguments)]
pub fn lfd_iteration<E: FeatureEnvironment>(
    env: &E,
    state: &E::State,
    directions: &mut DirectionState,
    rollout_cfg: &RolloutConfig,
    lfd_cfg: &LfdConfig,
    iteration: u64,
    learn: bool,
    rng: &mut dyn RngCore,
    meter: &mut CallMeter,
) -> Result<LfdStep<E::State>, RolloutError<E::Error>> {
    let start = meter.calls();
    let actions = env.legal_actions(state);
    let policy = LfdPolicy::new(&directions.directions, lfd_cfg.alternative_rollout_policy);
    let decision = rollout_argmax_over(env, state, &actions, &policy, rollout_cfg, rng, meter)?;
    let transition = env.step(state, actions[decision.chosen], rng, meter)?;
    if transition.terminal {
        return Ok(LfdStep {
            next: env.initial_state(rng),
            terminal: true,
            meter_delta: meter.calls() - start,
        });
    }
    if learn && actions.len() >= 2 {
        let candidates = env.candidates(state, &actions);
        let d = deltas(&candidates, decision.chosen);
        directions.update(&d, lfd_cfg.alpha, iteration);
    }
    Ok(LfdStep {
        next: transition.next,
        terminal: false,
        meter_delta: meter.calls() - start,
    })
}

/// Runs LFD from a fresh episode until every direction is decided.
pub fn run_lfd<E: FeatureEnvironment>(
    env: &E,
    rollout_cfg: &RolloutConfig,
    lfd_cfg: &LfdConfig,
    rng: &mut dyn RngCore,
    meter: &mut CallMeter,
) -> Result<LfdRun, LfdError<E::Error>> {
    lfd_cfg.validate().map_err(LfdError::Config)?;
    rollout_cfg
        .validate()
        .map_err(|e| LfdError::Config(e.to_string()))?;
    let mut directions = DirectionState::new(NUM_FEATURES);
    let mut trace = Vec::new();
    let mut state = env.initial_state(rng);
    let mut iteration = 0u64;
    while !directions.all_decided() {
        if iteration >= lfd_cfg.iteration_cap {
            return Err(LfdError::IterationCap(Box::new(LfdRun {
                state: directions,
                iterations: iteration,
                trace,
            })));
        }
        iteration += 1;
        let step = lfd_iteration(
            env,
            &state,
            &mut directions,
            rollout_cfg,
            lfd_cfg,
            iteration,
            true,
            rng,
            meter,
        )?;
        trace.push(LfdTraceRow {
            iteration,
            n_plus: directions.n_plus.clone(),
            n_minus: directions.n_minus.clone(),
            directions: directions.directions.clone(),
            meter_delta: step.meter_delta,
            terminal: step.terminal,
        });
        state = step.next;
    }
    Ok(LfdRun {
        state: directions,
        iterations: iteration,
        trace,
    })
}
