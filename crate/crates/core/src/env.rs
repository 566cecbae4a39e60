//! Generative-model abstraction shared by the rollout engine and the learners.
//!
//! The learners only ever see an environment through [`Environment`] (sample
//! transitions) and [`FeatureEnvironment`] (deterministic per-action feature
//! vectors). Tetris is the shipped implementation; tests plug in small chain
//! MDPs.

use rand::RngCore;

use crate::features::FeatureVector;

/// Cumulative count of generative-model invocations.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct CallMeter {
    calls: u64,
}

impl CallMeter {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn charge(&mut self) {
        self.calls += 1;
    }

    pub fn calls(&self) -> u64 {
        self.calls
    }

    /// Folds a thread-local meter back into this one.
    pub fn merge(&mut self, other: &CallMeter) {
        self.calls += other.calls;
    }
}

/// Outcome of one call to the generative model.
#[derive(Debug, Clone)]
pub struct Transition<S> {
    pub next: S,
    pub reward: f64,
    /// `next` admits no legal action; the episode is over.
    pub terminal: bool,
}

/// A generative model `G(s, a) -> (s', r)` over a finite action set.
pub trait Environment {
    type State: Clone;
    type Action: Copy + PartialEq + std::fmt::Debug;
    type Error: std::error::Error + Send + Sync + 'static;

    fn initial_state(&self, rng: &mut dyn RngCore) -> Self::State;

    /// Legal actions in `state`; empty iff the state is terminal.
    fn legal_actions(&self, state: &Self::State) -> Vec<Self::Action>;

    /// Samples a transition. Charges `meter` exactly once.
    fn step(
        &self,
        state: &Self::State,
        action: Self::Action,
        rng: &mut dyn RngCore,
        meter: &mut CallMeter,
    ) -> Result<Transition<Self::State>, Self::Error>;
}

/// Deterministic information about an action that is known before the
/// stochastic part of the transition is sampled.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Candidate {
    pub features: FeatureVector,
    pub immediate_reward: f64,
}

pub trait FeatureEnvironment: Environment {
    /// One candidate per action, in the order given. Never charges the meter.
    fn candidates(&self, state: &Self::State, actions: &[Self::Action]) -> Vec<Candidate>;
}
