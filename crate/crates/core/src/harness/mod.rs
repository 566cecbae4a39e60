//! Experiment orchestration: replicated learner runs, out-of-band policy
//! evaluation, and CSV output.

mod config;
mod eval;
pub mod output;
pub mod seeds;

use std::collections::BTreeMap;

use rayon::prelude::*;
use thiserror::Error;

use crate::env::CallMeter;
use crate::learner::{run_variant, LearnerConfig, LearnerError, LearningTrace, Phase, Variant};
use crate::tetris::Tetris;

pub use config::{ConfigError, ExperimentConfig, KEYS as CONFIG_KEYS};
pub use eval::{evaluate_policy, rescale_weights_for_report, EvaluationResult, DEFAULT_STEP_CAP};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("cannot write output: {0}")]
    Output(#[from] csv::Error),
    #[error("{variant} replication {replication}: {source}")]
    Learner {
        variant: &'static str,
        replication: u32,
        source: LearnerError,
    },
    #[error("cannot set up worker threads: {0}")]
    Threads(#[from] rayon::ThreadPoolBuildError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvePoint {
    pub iteration: u64,
    pub phase: Phase,
    pub eval: EvaluationResult,
}

#[derive(Debug, Clone)]
pub struct ReplicationResult {
    pub variant: Variant,
    pub replication: u32,
    pub trace: LearningTrace,
    pub curve: Vec<CurvePoint>,
}

impl ReplicationResult {
    /// Phase of the policy in force before the first iteration.
    pub fn initial_phase(&self) -> Phase {
        match self.variant {
            Variant::LfdOnly | Variant::Ipse => Phase::Lfd,
            _ => Phase::M,
        }
    }

    pub fn score_at(&self, iteration: u64) -> Option<f64> {
        self.curve
            .iter()
            .find(|p| p.iteration == iteration)
            .map(|p| p.eval.mean_score)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AggregatedPoint {
    pub variant: Variant,
    pub iteration: u64,
    pub replications: usize,
    pub mean_score: f64,
    pub sd_between_replications: f64,
}

#[derive(Debug, Clone)]
pub struct ExperimentOutcome {
    pub results: Vec<ReplicationResult>,
    /// Replications whose direction learner hit its iteration cap.
    pub aborted: Vec<(Variant, u32)>,
}

/// Runs one replication and evaluates its policy at the configured points.
pub fn run_replication(
    cfg: &ExperimentConfig,
    learner: &LearnerConfig,
    replication: u32,
) -> Result<ReplicationResult, LearnerError> {
    let mut rng = seeds::learning_rng(cfg.master_seed, learner.variant, replication);
    let mut meter = CallMeter::new();
    let trace = run_variant(&Tetris::new(), learner, &mut rng, &mut meter)?;
    let mut result = ReplicationResult {
        variant: learner.variant,
        replication,
        trace,
        curve: Vec::new(),
    };
    let completed = result.trace.rows.len() as u64;
    for iteration in cfg.eval_points(learner.total_iterations) {
        if iteration > completed {
            break;
        }
        let weights = result.trace.weights_at(iteration).expect("iteration was completed");
        let phase = match iteration {
            0 => result.initial_phase(),
            i => result.trace.rows[(i - 1) as usize].phase,
        };
        let mut eval_rng = seeds::evaluation_rng(cfg.master_seed, replication, iteration as u32);
        let eval = evaluate_policy(&weights, cfg.eval_games, &mut eval_rng, cfg.eval_step_cap);
        result.curve.push(CurvePoint { iteration, phase, eval });
    }
    Ok(result)
}

/// Runs every (variant, replication) pair and returns the results in
/// (variant, replication) order. Writes nothing.
pub fn run_replications(cfg: &ExperimentConfig) -> Result<ExperimentOutcome, HarnessError> {
    cfg.validate()?;
    let jobs: Vec<(&LearnerConfig, u32)> = cfg
        .learners
        .iter()
        .flat_map(|l| (0..cfg.replications).map(move |r| (l, r)))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.parallelism)
        .build()?;
    let outcomes: Vec<Result<ReplicationResult, HarnessError>> = pool.install(|| {
        jobs.par_iter()
            .map(|&(learner, r)| {
                run_replication(cfg, learner, r).map_err(|source| HarnessError::Learner {
                    variant: learner.variant.as_str(),
                    replication: r,
                    source,
                })
            })
            .collect()
    });
    let results = outcomes.into_iter().collect::<Result<Vec<_>, _>>()?;
    let aborted = results
        .iter()
        .filter(|r| r.trace.aborted)
        .map(|r| (r.variant, r.replication))
        .collect();
    Ok(ExperimentOutcome { results, aborted })
}

/// Runs the experiment and writes all CSV files below `cfg.output_dir`.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutcome, HarnessError> {
    cfg.validate()?;
    std::fs::create_dir_all(&cfg.output_dir).map_err(csv::Error::from)?;
    let outcome = run_replications(cfg)?;
    output::write_all(&cfg.output_dir, &outcome.results)?;
    Ok(outcome)
}

/// Pointwise mean of the replication curves of each variant, in variant then
/// iteration order.
pub fn aggregate_curves(results: &[ReplicationResult]) -> Vec<AggregatedPoint> {
    let mut groups: BTreeMap<(Variant, u64), Vec<f64>> = BTreeMap::new();
    for r in results {
        for p in &r.curve {
            groups.entry((r.variant, p.iteration)).or_default().push(p.eval.mean_score);
        }
    }
    groups
        .into_iter()
        .map(|((variant, iteration), scores)| {
            let n = scores.len() as f64;
            let mean = scores.iter().sum::<f64>() / n;
            let sd = if scores.len() > 1 {
                (scores.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
            } else {
                0.0
            };
            AggregatedPoint {
                variant,
                iteration,
                replications: scores.len(),
                mean_score: mean,
                sd_between_replications: sd,
            }
        })
        .collect()
}
