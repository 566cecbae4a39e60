//! Experiment configuration and its flat `key = value` file format.
//!
//! Blank lines and text after `#` are ignored. Every key is optional; missing
//! keys keep their defaults. Unknown keys, malformed values and repeated keys
//! are all collected and reported together.

use std::collections::BTreeSet;
use std::path::PathBuf;

use thiserror::Error;

use crate::choice::PenaltyKind;
use crate::features::NUM_FEATURES;
use crate::learner::{LearnerConfig, Variant};

use super::eval::DEFAULT_STEP_CAP;

pub const KEYS: &[&str] = &[
    "variants",
    "replications",
    "master_seed",
    "parallelism",
    "output_dir",
    "eval_every",
    "eval_games",
    "eval_step_cap",
    "total_iterations",
    "rollouts",
    "horizon",
    "gamma",
    "alpha",
    "alternative_rollout_policy",
    "lfd_iteration_cap",
    "schedule_c",
    "window_cap",
    "ipse_penalty",
    "known_directions",
    "cv_folds",
    "cv_grid",
    "filter_dominated",
];

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("unknown config keys: {}", .0.join(", "))]
    UnknownKeys(Vec<String>),
    #[error("invalid config: {}", .0.join("; "))]
    Invalid(Vec<String>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    /// One learner per variant to compare.
    pub learners: Vec<LearnerConfig>,
    pub replications: u32,
    pub master_seed: u64,
    /// Maximum number of replications running at once.
    pub parallelism: usize,
    pub output_dir: PathBuf,
    /// Evaluate the policy every this many iterations (and at 0 and the end).
    pub eval_every: u64,
    pub eval_games: usize,
    pub eval_step_cap: u64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            learners: Variant::ALL.iter().map(|&v| LearnerConfig::new(v)).collect(),
            replications: 20,
            master_seed: 0,
            parallelism: 1,
            output_dir: PathBuf::from("out"),
            eval_every: 20,
            eval_games: 30,
            eval_step_cap: DEFAULT_STEP_CAP,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let mut errors = Vec::new();
        if self.learners.is_empty() {
            errors.push("at least one variant is required".to_string());
        }
        let mut seen = BTreeSet::new();
        for l in &self.learners {
            if !seen.insert(l.variant) {
                errors.push(format!("variant {} listed twice", l.variant.as_str()));
            }
            if let Err(e) = l.validate() {
                errors.push(format!("{}: {e}", l.variant.as_str()));
            }
            if l.total_iterations > u32::MAX as u64 {
                errors.push("total_iterations must fit in 32 bits".into());
            }
        }
        if self.replications == 0 {
            errors.push("replications must be >= 1".into());
        }
        if self.parallelism == 0 {
            errors.push("parallelism must be >= 1".into());
        }
        if self.eval_every == 0 {
            errors.push("eval_every must be >= 1".into());
        }
        if self.eval_games == 0 {
            errors.push("eval_games must be >= 1".into());
        }
        if self.eval_step_cap == 0 {
            errors.push("eval_step_cap must be >= 1".into());
        }
        if errors.is_empty() {
            Ok(())
        } else {
            Err(ConfigError::Invalid(errors))
        }
    }

    /// Iterations at which the policy is evaluated: 0, every `eval_every`,
    /// and the last one.
    pub fn eval_points(&self, total_iterations: u64) -> Vec<u64> {
        let mut points: Vec<u64> = (0..=total_iterations).step_by(self.eval_every as usize).collect();
        if points.last() != Some(&total_iterations) {
            points.push(total_iterations);
        }
        points
    }

    /// Parses the flat config format, starting from the defaults.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut entries: Vec<(usize, String, String)> = Vec::new();
        let mut unknown = Vec::new();
        let mut errors = Vec::new();
        let mut seen = BTreeSet::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                errors.push(format!("line {}: expected `key = value`", n + 1));
                continue;
            };
            let key = key.trim().to_string();
            if !KEYS.contains(&key.as_str()) {
                unknown.push(key);
                continue;
            }
            if !seen.insert(key.clone()) {
                errors.push(format!("line {}: `{key}` given twice", n + 1));
                continue;
            }
            entries.push((n + 1, key, value.trim().to_string()));
        }
        if !unknown.is_empty() {
            return Err(ConfigError::UnknownKeys(unknown));
        }

        let mut cfg = ExperimentConfig::default();
        let mut learner = LearnerConfig::new(Variant::Ipse);
        let mut variants: Vec<Variant> = Variant::ALL.to_vec();
        for (line, key, value) in &entries {
            let mut bad = |what: &str| errors.push(format!("line {line}: `{key}` {what}, got `{value}`"));
            match key.as_str() {
                "variants" => match parse_list(value, Variant::parse) {
                    Some(v) if !v.is_empty() => variants = v,
                    _ => bad("must be a comma-separated list of variant names"),
                },
                "replications" => set(&mut cfg.replications, value, &mut bad),
                "master_seed" => set(&mut cfg.master_seed, value, &mut bad),
                "parallelism" => set(&mut cfg.parallelism, value, &mut bad),
                "output_dir" => cfg.output_dir = PathBuf::from(value),
                "eval_every" => set(&mut cfg.eval_every, value, &mut bad),
                "eval_games" => set(&mut cfg.eval_games, value, &mut bad),
                "eval_step_cap" => set(&mut cfg.eval_step_cap, value, &mut bad),
                "total_iterations" => set(&mut learner.total_iterations, value, &mut bad),
                "rollouts" => set(&mut learner.rollout.rollouts, value, &mut bad),
                "horizon" => set(&mut learner.rollout.horizon, value, &mut bad),
                "gamma" => set(&mut learner.rollout.gamma, value, &mut bad),
                "alpha" => set(&mut learner.lfd.alpha, value, &mut bad),
                "alternative_rollout_policy" => {
                    set(&mut learner.lfd.alternative_rollout_policy, value, &mut bad)
                }
                "lfd_iteration_cap" => set(&mut learner.lfd.iteration_cap, value, &mut bad),
                "schedule_c" => set(&mut learner.schedule_c, value, &mut bad),
                "window_cap" => set(&mut learner.window_cap, value, &mut bad),
                "ipse_penalty" => match PenaltyKind::parse(value) {
                    Some(k) => learner.ipse_penalty = k,
                    None => bad("must be none, stew_directed or shrink_to_directions"),
                },
                "known_directions" => match parse_list(value, |s| s.parse::<f64>().ok()) {
                    Some(d) if d.len() == NUM_FEATURES => learner.known_directions.copy_from_slice(&d),
                    _ => bad("must list 8 comma-separated signs"),
                },
                "cv_folds" => set(&mut learner.cv_folds, value, &mut bad),
                "cv_grid" => match parse_list(value, |s| s.parse::<f64>().ok()) {
                    Some(g) => learner.cv_grid = g,
                    None => bad("must be a comma-separated list of numbers"),
                },
                "filter_dominated" => set(&mut learner.filter_dominated, value, &mut bad),
                _ => unreachable!("key was checked against KEYS"),
            }
        }
        if !errors.is_empty() {
            return Err(ConfigError::Invalid(errors));
        }
        cfg.learners = variants
            .into_iter()
            .map(|v| LearnerConfig {
                variant: v,
                ..learner.clone()
            })
            .collect();
        cfg.validate()?;
        Ok(cfg)
    }
}

fn set<T: std::str::FromStr>(slot: &mut T, value: &str, bad: &mut impl FnMut(&str)) {
    match value.parse() {
        Ok(v) => *slot = v,
        Err(_) => bad(&format!("is not a valid {}", short_type_name::<T>())),
    }
}

fn short_type_name<T>() -> &'static str {
    let full = std::any::type_name::<T>();
    full.rsplit("::").next().unwrap_or(full)
}

fn parse_list<T>(value: &str, item: impl Fn(&str) -> Option<T>) -> Option<Vec<T>> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(item)
        .collect()
}
