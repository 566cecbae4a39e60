//! Greedy linear policies `argmax_a w . phi(s, a)` with uniform tie-breaking.

use rand::{Rng, RngCore};

use crate::env::{Candidate, Environment, FeatureEnvironment};
use crate::features::NUM_FEATURES;

/// Maps a state and its legal actions to the index of the action to take.
pub trait Policy<E: Environment> {
    /// `actions` is nonempty.
    fn choose(
        &self,
        env: &E,
        state: &E::State,
        actions: &[E::Action],
        rng: &mut dyn RngCore,
    ) -> usize;
}

/// Index of a maximal score, uniform among exact ties. Consumes randomness
/// only when there is a tie.
pub fn argmax_random_tie(scores: &[f64], rng: &mut dyn RngCore) -> usize {
    assert!(!scores.is_empty(), "argmax over an empty set");
    let mut best = f64::NEG_INFINITY;
    let mut ties = 0usize;
    let mut first = 0usize;
    for (i, &s) in scores.iter().enumerate() {
        if s > best {
            best = s;
            ties = 1;
            first = i;
        } else if s == best {
            ties += 1;
        }
    }
    if ties <= 1 {
        return first;
    }
    let pick = rng.gen_range(0..ties);
    scores
        .iter()
        .enumerate()
        .filter(|&(_, &s)| s == best)
        .nth(pick)
        .map(|(i, _)| i)
        .unwrap()
}

/// `pi(s) = argmax_a w . phi(s, a)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearPolicy {
    pub weights: [f64; NUM_FEATURES],
}

impl LinearPolicy {
    pub fn new(weights: [f64; NUM_FEATURES]) -> Self {
        Self { weights }
    }

    pub fn from_slice(weights: &[f64]) -> Self {
        let mut w = [0.0; NUM_FEATURES];
        w.copy_from_slice(weights);
        Self { weights: w }
    }

    pub fn zero() -> Self {
        Self::new([0.0; NUM_FEATURES])
    }

    pub fn scores(&self, candidates: &[Candidate]) -> Vec<f64> {
        candidates
            .iter()
            .map(|c| c.features.dot(&self.weights))
            .collect()
    }

    pub fn choose_among(&self, candidates: &[Candidate], rng: &mut dyn RngCore) -> usize {
        argmax_random_tie(&self.scores(candidates), rng)
    }
}

impl<E: FeatureEnvironment> Policy<E> for LinearPolicy {
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
