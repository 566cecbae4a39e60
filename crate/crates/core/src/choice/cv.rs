use nalgebra::DVector;
use rand::seq::SliceRandom;
use rand::RngCore;

use super::fit::fit;
use super::objective::nll_and_gradient;
use super::{ChoiceError, ChoiceSet, PenaltySpec};

/// Eleven log-spaced values from 1e-3 to 1e2.
pub fn default_lambda_grid() -> Vec<f64> {
    (0..=10).map(|i| 10f64.powf(-3.0 + 0.5 * i as f64)).collect()
}

/// k-fold cross-validation of the penalty strength, scored by mean held-out
/// negative log-likelihood. Ties go to the larger lambda. With fewer sets than
/// folds the largest grid value is returned.
pub fn cross_validate_lambda(
    sets: &[ChoiceSet],
    template: &PenaltySpec,
    grid: &[f64],
    folds: usize,
    rng: &mut dyn RngCore,
) -> Result<f64, ChoiceError> {
    if folds < 2 {
        return Err(ChoiceError::TooFewFolds(folds));
    }
    let largest = grid
        .iter()
        .copied()
        .fold(None, |acc: Option<f64>, x| Some(acc.map_or(x, |a| a.max(x))))
        .ok_or(ChoiceError::EmptyGrid)?;
    for &lambda in grid {
        template.with_lambda(lambda).validate(template_dim(sets, template))?;
    }
    if sets.len() < folds {
        return Ok(largest);
    }
    let p = sets[0].num_features();

    let mut order: Vec<usize> = (0..sets.len()).collect();
    order.shuffle(rng);
    let fold_of: Vec<usize> = {
        let mut f = vec![0; sets.len()];
        for (pos, &idx) in order.iter().enumerate() {
            f[idx] = pos % folds;
        }
        f
    };
    let split = |k: usize| -> (Vec<ChoiceSet>, Vec<ChoiceSet>) {
        let mut train = Vec::new();
        let mut test = Vec::new();
        for (i, s) in sets.iter().enumerate() {
            if fold_of[i] == k {
                test.push(s.clone());
            } else {
                train.push(s.clone());
            }
        }
        (train, test)
    };
    let splits: Vec<_> = (0..folds).map(split).collect();

    let mut best: Option<(f64, f64)> = None;
    for &lambda in grid {
        let spec = template.with_lambda(lambda);
        let mut held_out = 0.0;
        for (train, test) in &splits {
            let fitted = fit(train, &spec, &DVector::zeros(p))?;
            held_out += nll_and_gradient(&fitted.beta, test).0;
        }
        let score = held_out / sets.len() as f64;
        best = match best {
            None => Some((lambda, score)),
            Some((bl, bs)) if score < bs || (score == bs && lambda > bl) => Some((lambda, score)),
            keep => keep,
        };
    }
    Ok(best.expect("grid is nonempty").0)
}

fn template_dim(sets: &[ChoiceSet], template: &PenaltySpec) -> usize {
    sets.first()
        .map(|s| s.num_features())
        .or_else(|| template.directions.as_ref().map(|d| d.len()))
        .unwrap_or(0)
}
