//! Iterative policy-space expansion on Tetris.
//!
//! Feature directions are learned first, by counting rollout-backed paired
//! comparisons and applying an exact binomial test, and the weight magnitudes
//! are then refined by a conditional-logit learner whose shrinkage penalty is
//! centered on those directions and relaxed over time.

pub mod choice;
pub mod env;
pub mod features;
pub mod harness;
pub mod learner;
pub mod lfd;
pub mod policy;
pub mod rollout;
pub mod tetris;
