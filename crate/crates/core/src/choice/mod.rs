//! Conditional-logit policy learning with shrinkage penalties.
//!
//! A choice set records which of `K` alternatives the rollouts picked, along
//! with every alternative's feature vector. The model assigns
//! `P(a) ∝ exp(beta . phi_a)`; fitting minimizes the negative log-likelihood
//! of the recorded choices plus one of two quadratic penalties that pull the
//! weights toward an equal-weights policy along known feature directions.

mod cv;
mod fit;
mod objective;

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::env::Candidate;

pub use cv::{cross_validate_lambda, default_lambda_grid};
pub use fit::{fit, fit_with, FitOptions, FitResult};
pub use objective::{
    nll_and_gradient, nll_gradient_hessian, objective, penalty_and_gradient, penalty_hessian,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ChoiceError {
    #[error("a choice set needs at least two alternatives, got {0}")]
    TooFewAlternatives(usize),
    #[error("chosen index {chosen} out of range for {alternatives} alternatives")]
    ChosenOutOfRange { chosen: usize, alternatives: usize },
    #[error("alternatives have inconsistent feature counts")]
    Ragged,
    #[error("penalty {0:?} requires feature directions")]
    MissingDirections(PenaltyKind),
    #[error("directions have length {found}, expected {expected}")]
    DirectionLength { expected: usize, found: usize },
    #[error("lambda must be finite and >= 0, got {0}")]
    BadLambda(f64),
    #[error("the dataset window is empty")]
    EmptyWindow,
    #[error("cross-validation needs at least 2 folds, got {0}")]
    TooFewFolds(usize),
    #[error("the lambda grid is empty")]
    EmptyGrid,
}

/// One decision: the chosen alternative plus all alternatives' features
/// (one row per alternative).
#[derive(Debug, Clone, PartialEq)]
pub struct ChoiceSet {
    chosen: usize,
    alternatives: DMatrix<f64>,
}

impl ChoiceSet {
    pub fn new(chosen: usize, alternatives: DMatrix<f64>) -> Result<Self, ChoiceError> {
        let k = alternatives.nrows();
        if k < 2 {
            return Err(ChoiceError::TooFewAlternatives(k));
        }
        if chosen >= k {
            return Err(ChoiceError::ChosenOutOfRange {
                chosen,
                alternatives: k,
            });
        }
        Ok(Self {
            chosen,
            alternatives,
        })
    }

    pub fn from_rows(chosen: usize, rows: &[Vec<f64>]) -> Result<Self, ChoiceError> {
        let p = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != p) {
            return Err(ChoiceError::Ragged);
        }
        let m = DMatrix::from_fn(rows.len(), p, |i, j| rows[i][j]);
        Self::new(chosen, m)
    }

    pub fn from_candidates(chosen: usize, candidates: &[Candidate]) -> Result<Self, ChoiceError> {
        let p = crate::features::NUM_FEATURES;
        let m = DMatrix::from_fn(candidates.len(), p, |i, j| candidates[i].features[j]);
        Self::new(chosen, m)
    }

    pub fn chosen(&self) -> usize {
        self.chosen
    }

    pub fn alternatives(&self) -> &DMatrix<f64> {
        &self.alternatives
    }

    pub fn num_alternatives(&self) -> usize {
        self.alternatives.nrows()
    }

    pub fn num_features(&self) -> usize {
        self.alternatives.ncols()
    }
}

/// Choice sets in the order they were collected.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ChoiceDataset {
    sets: Vec<ChoiceSet>,
}

impl ChoiceDataset {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, set: ChoiceSet) {
        self.sets.push(set);
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    pub fn sets(&self) -> &[ChoiceSet] {
        &self.sets
    }

    /// The most recent `n` sets (all of them if fewer exist).
    pub fn window(&self, n: usize) -> &[ChoiceSet] {
        &self.sets[self.sets.len().saturating_sub(n)..]
    }
}

impl FromIterator<ChoiceSet> for ChoiceDataset {
    fn from_iter<I: IntoIterator<Item = ChoiceSet>>(iter: I) -> Self {
        Self {
            sets: iter.into_iter().collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PenaltyKind {
    None,
    /// `lambda * sum_{i<j} (d_i beta_i - d_j beta_j)^2`
    StewDirected,
    /// `lambda * sum_i (beta_i - d_i)^2`
    ShrinkToDirections,
}

impl PenaltyKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            PenaltyKind::None => "none",
            PenaltyKind::StewDirected => "stew_directed",
            PenaltyKind::ShrinkToDirections => "shrink_to_directions",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "none" => Some(PenaltyKind::None),
            "stew_directed" => Some(PenaltyKind::StewDirected),
            "shrink_to_directions" => Some(PenaltyKind::ShrinkToDirections),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PenaltySpec {
    pub kind: PenaltyKind,
    pub lambda: f64,
    pub directions: Option<DVector<f64>>,
}

impl PenaltySpec {
    pub fn none() -> Self {
        Self {
            kind: PenaltyKind::None,
            lambda: 0.0,
            directions: None,
        }
    }

    pub fn stew(lambda: f64, directions: &[f64]) -> Self {
        Self {
            kind: PenaltyKind::StewDirected,
            lambda,
            directions: Some(DVector::from_column_slice(directions)),
        }
    }

    pub fn shrink_to(lambda: f64, directions: &[f64]) -> Self {
        Self {
            kind: PenaltyKind::ShrinkToDirections,
            lambda,
            directions: Some(DVector::from_column_slice(directions)),
        }
    }

    pub fn with_lambda(&self, lambda: f64) -> Self {
        Self {
            lambda,
            ..self.clone()
        }
    }

    /// Zero lambda or kind `None` contributes nothing.
    pub fn is_inactive(&self) -> bool {
        self.kind == PenaltyKind::None || self.lambda == 0.0
    }

    pub fn validate(&self, p: usize) -> Result<(), ChoiceError> {
        if !(self.lambda.is_finite() && self.lambda >= 0.0) {
            return Err(ChoiceError::BadLambda(self.lambda));
        }
        if self.kind == PenaltyKind::None {
            return Ok(());
        }
        match &self.directions {
            None => Err(ChoiceError::MissingDirections(self.kind)),
            Some(d) if d.len() != p => Err(ChoiceError::DirectionLength {
                expected: p,
                found: d.len(),
            }),
            Some(_) => Ok(()),
        }
    }
}
