//! Monte-Carlo action evaluation.
//!
//! `rollout` estimates the value of taking an action and then following a
//! rollout policy for `horizon - 1` more steps, averaged over `rollouts`
//! independent simulations. `rollout_argmax` evaluates every legal action and
//! picks a best one, breaking exact ties uniformly at random.
//!
//! Actions are evaluated sequentially, in the order of the action list, all
//! drawing from the one RNG stream passed in. That order is the substream rule:
//! the same stream position always yields the same estimates.

use rand::RngCore;
use thiserror::Error;

use crate::env::{CallMeter, Environment};
use crate::features::FeatureVector;
use crate::policy::{argmax_random_tie, Policy};

#[derive(Debug, Error)]
pub enum RolloutError<E: std::error::Error + 'static> {
    #[error("state is terminal; the episode must be reset")]
    TerminalState,
    #[error(transparent)]
    Env(#[from] E),
}

#[derive(Debug, Error, Clone, PartialEq)]
#[error("invalid rollout configuration: {0}")]
pub struct RolloutConfigError(String);

/// M rollouts of length T with discount gamma.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RolloutConfig {
    pub rollouts: usize,
    pub horizon: usize,
    pub gamma: f64,
}

impl Default for RolloutConfig {
    fn default() -> Self {
        Self {
            rollouts: 10,
            horizon: 10,
            gamma: 0.9,
        }
    }
}

impl RolloutConfig {
    pub fn new(rollouts: usize, horizon: usize, gamma: f64) -> Result<Self, RolloutConfigError> {
        let cfg = Self {
            rollouts,
            horizon,
            gamma,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), RolloutConfigError> {
        if self.rollouts == 0 {
            return Err(RolloutConfigError("rollouts must be >= 1".into()));
        }
        if self.horizon == 0 {
            return Err(RolloutConfigError("horizon must be >= 1".into()));
        }
        if !(0.0..=1.0).contains(&self.gamma) {
            return Err(RolloutConfigError(format!(
                "gamma must lie in [0, 1], got {}",
                self.gamma
            )));
        }
        Ok(())
    }

    /// Generative calls needed to evaluate `actions` actions, at most.
    pub fn budget(&self, actions: usize) -> u64 {
        (actions * self.rollouts * self.horizon) as u64
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ActionValueEstimate<A> {
    pub action: A,
    /// Mean discounted return over the rollouts.
    pub value: f64,
}

#[derive(Debug, Clone)]
pub struct RolloutDecision<A> {
    /// Index into `estimates` (and the action list that was evaluated).
    pub chosen: usize,
    pub estimates: Vec<ActionValueEstimate<A>>,
}

impl<A: Copy> RolloutDecision<A> {
    pub fn chosen_action(&self) -> A {
        self.estimates[self.chosen].action
    }
}

/// Discounted return of one simulation starting with `action`. Stops early at
/// terminal states.
pub fn single_rollout<E, P>(
    env: &E,
    state: &E::State,
    action: E::Action,
    policy: &P,
    cfg: &RolloutConfig,
    rng: &mut dyn RngCore,
    meter: &mut CallMeter,
) -> Result<f64, E::Error>
where
    E: Environment,
    P: Policy<E> + ?Sized,
{
    let first = env.step(state, action, rng, meter)?;
    let mut total = first.reward;
    if first.terminal {
        return Ok(total);
    }
    let mut s = first.next;
    let mut discount = 1.0;
    for _ in 1..cfg.horizon {
        discount *= cfg.gamma;
        let actions = env.legal_actions(&s);
        if actions.is_empty() {
            break;
        }
        let a = actions[policy.choose(env, &s, &actions, rng)];
        let t = env.step(&s, a, rng, meter)?;
        total += discount * t.reward;
        if t.terminal {
            break;
        }
        s = t.next;
    }
    Ok(total)
}

/// Mean of `cfg.rollouts` discounted returns for `action` in `state`.
pub fn rollout<E, P>(
    env: &E,
    state: &E::State,
    action: E::Action,
    policy: &P,
    cfg: &RolloutConfig,
    rng: &mut dyn RngCore,
    meter: &mut CallMeter,
) -> Result<ActionValueEstimate<E::Action>, E::Error>
where
    E: Environment,
    P: Policy<E> + ?Sized,
{
    let mut sum = 0.0;
    for _ in 0..cfg.rollouts {
        sum += single_rollout(env, state, action, policy, cfg, rng, meter)?;
    }
    Ok(ActionValueEstimate {
        action,
        value: sum / cfg.rollouts as f64,
    })
}

/// Evaluates every legal action and returns a maximizer.
pub fn rollout_argmax<E, P>(
    env: &E,
    state: &E::State,
    policy: &P,
    cfg: &RolloutConfig,
    rng: &mut dyn RngCore,
    meter: &mut CallMeter,
) -> Result<RolloutDecision<E::Action>, RolloutError<E::Error>>
where
    E: Environment,
    P: Policy<E> + ?Sized,
{
    let actions = env.legal_actions(state);
    rollout_argmax_over(env, state, &actions, policy, cfg, rng, meter)
}

/// As [`rollout_argmax`], restricted to a given subset of legal actions.
pub fn rollout_argmax_over<E, P>(
    env: &E,
    state: &E::State,
    actions: &[E::Action],
    policy: &P,
    cfg: &RolloutConfig,
    rng: &mut dyn RngCore,
    meter: &mut CallMeter,
) -> Result<RolloutDecision<E::Action>, RolloutError<E::Error>>
where
    E: Environment,
    P: Policy<E> + ?Sized,
{
    if actions.is_empty() {
        return Err(RolloutError::TerminalState);
    }
    let mut estimates = Vec::with_capacity(actions.len());
    for &a in actions {
        estimates.push(rollout(env, state, a, policy, cfg, rng, meter)?);
    }
    let values: Vec<f64> = estimates.iter().map(|e| e.value).collect();
    let chosen = argmax_random_tie(&values, rng);
    Ok(RolloutDecision { chosen, estimates })
}

/// Indices of the actions not dominated under `directions`: action `a` is
/// dominated if some `b` has `d_i phi_i(b) >= d_i phi_i(a)` for every `i`,
/// strictly for at least one. Returns `None` if a direction is undecided.
pub fn dominance_filter(candidates: &[FeatureVector], directions: &[f64]) -> Option<Vec<usize>> {
    if directions.contains(&0.0) {
        return None;
    }
    let directed: Vec<Vec<f64>> = candidates
        .iter()
        .map(|f| f.0.iter().zip(directions).map(|(x, d)| x * d).collect())
        .collect();
    let dominates = |b: &[f64], a: &[f64]| {
        let mut strict = false;
        for (x, y) in b.iter().zip(a) {
            if x < y {
                return false;
            }
            strict |= x > y;
        }
        strict
    };
    Some(
        (0..candidates.len())
            .filter(|&i| !(0..candidates.len()).any(|j| j != i && dominates(&directed[j], &directed[i])))
            .collect(),
    )
}
