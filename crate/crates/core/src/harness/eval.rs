use rand::RngCore;

use crate::env::{CallMeter, Environment, FeatureEnvironment};
use crate::features::{NUM_FEATURES, ROWS_WITH_HOLES};
use crate::policy::LinearPolicy;
use crate::tetris::Tetris;

pub const DEFAULT_STEP_CAP: u64 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvaluationResult {
    /// Mean lines cleared per game.
    pub mean_score: f64,
    /// Sample standard deviation of the per-game scores (0 for one game).
    pub std_score: f64,
    pub games: usize,
    /// Games stopped by the placement cap; their score is the capped score.
    pub capped_games: usize,
}

/// Plays `games` independent greedy games of Tetris with `weights`.
/// Simulator calls made here are not charged to any learning meter.
pub fn evaluate_policy(
    weights: &[f64; NUM_FEATURES],
    games: usize,
    rng: &mut dyn RngCore,
    step_cap: u64,
) -> EvaluationResult {
    assert!(games >= 1, "at least one evaluation game is required");
    let env = Tetris::new();
    let policy = LinearPolicy::new(*weights);
    let mut scores = Vec::with_capacity(games);
    let mut capped_games = 0;
    for _ in 0..games {
        let (score, capped) = play_game(&env, &policy, rng, step_cap);
        scores.push(score);
        capped_games += capped as usize;
    }
    let n = games as f64;
    let mean_score = scores.iter().sum::<f64>() / n;
    let std_score = if games > 1 {
        (scores.iter().map(|s| (s - mean_score).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    EvaluationResult {
        mean_score,
        std_score,
        games,
        capped_games,
    }
}

fn play_game(env: &Tetris, policy: &LinearPolicy, rng: &mut dyn RngCore, step_cap: u64) -> (f64, bool) {
    let mut meter = CallMeter::new();
    let mut state = env.initial_state(rng);
    let mut score = 0.0;
    for _ in 0..step_cap {
        let actions = env.legal_actions(&state);
        if actions.is_empty() {
            return (score, false);
        }
        let chosen = if actions.len() == 1 {
            0
        } else {
            policy.choose_among(&env.candidates(&state, &actions), rng)
        };
        let t = env
            .step(&state, actions[chosen], rng, &mut meter)
            .expect("legal actions always apply");
        score += t.reward;
        if t.terminal {
            return (score, false);
        }
        state = t.next;
    }
    (score, true)
}

/// Divides `beta` by `|beta_rows_with_holes|`. Returns the input unchanged and
/// `false` when that weight is zero.
pub fn rescale_weights_for_report(beta: &[f64; NUM_FEATURES]) -> ([f64; NUM_FEATURES], bool) {
    let norm = beta[ROWS_WITH_HOLES].abs();
    if norm == 0.0 || !norm.is_finite() {
        return (*beta, false);
    }
    (beta.map(|b| b / norm), true)
}
