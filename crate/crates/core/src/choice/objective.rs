use nalgebra::{DMatrix, DVector};

use super::{ChoiceError, ChoiceSet, PenaltyKind, PenaltySpec};

/// Negative log-likelihood of the recorded choices and its gradient.
/// Log-sum-exp uses max subtraction, so any finite `beta` is safe.
pub fn nll_and_gradient(beta: &DVector<f64>, sets: &[ChoiceSet]) -> (f64, DVector<f64>) {
    let p = beta.len();
    let mut value = 0.0;
    let mut grad = DVector::zeros(p);
    for set in sets {
        let x = set.alternatives();
        let (lse, probs) = softmax(&(x * beta));
        value += lse - x.row(set.chosen()).dot(&beta.transpose());
        // gradient: sum_a p_a phi_a - phi_chosen
        grad += x.tr_mul(&probs);
        grad -= x.row(set.chosen()).transpose();
    }
    (value, grad)
}

/// NLL, gradient and Hessian `sum_sets Cov_p(phi)`.
pub fn nll_gradient_hessian(
    beta: &DVector<f64>,
    sets: &[ChoiceSet],
) -> (f64, DVector<f64>, DMatrix<f64>) {
    let p = beta.len();
    let mut value = 0.0;
    let mut grad = DVector::zeros(p);
    let mut hess = DMatrix::zeros(p, p);
    for set in sets {
        let x = set.alternatives();
        let (lse, probs) = softmax(&(x * beta));
        let chosen = x.row(set.chosen()).transpose();
        value += lse - chosen.dot(beta);
        let mean = x.tr_mul(&probs);
        grad += &mean - &chosen;
        // X^T diag(p) X - mean mean^T
        let mut weighted = x.clone();
        for (mut row, &pa) in weighted.row_iter_mut().zip(probs.iter()) {
            row *= pa;
        }
        hess += x.tr_mul(&weighted);
        hess -= &mean * mean.transpose();
    }
    (value, grad, hess)
}

/// `(log sum exp(s), softmax(s))`.
fn softmax(scores: &DVector<f64>) -> (f64, DVector<f64>) {
    let max = scores.max();
    let exps = scores.map(|s| (s - max).exp());
    let total = exps.sum();
    (max + total.ln(), exps / total)
}

/// Penalty value and gradient.
pub fn penalty_and_gradient(
    beta: &DVector<f64>,
    spec: &PenaltySpec,
) -> Result<(f64, DVector<f64>), ChoiceError> {
    spec.validate(beta.len())?;
    let p = beta.len();
    if spec.kind == PenaltyKind::None {
        return Ok((0.0, DVector::zeros(p)));
    }
    let d = spec.directions.as_ref().expect("validated");
    let lambda = spec.lambda;
    match spec.kind {
        PenaltyKind::None => unreachable!(),
        PenaltyKind::StewDirected => {
            // x = D beta; sum_{i<j} (x_i - x_j)^2 = p |x|^2 - (sum x)^2
            let x = beta.component_mul(d);
            let sum = x.sum();
            let value = lambda * (p as f64 * x.norm_squared() - sum * sum);
            // d/dbeta = 2 lambda D (p x - sum 1)
            let inner = x.map(|xi| p as f64 * xi - sum);
            Ok((value, inner.component_mul(d) * (2.0 * lambda)))
        }
        PenaltyKind::ShrinkToDirections => {
            let diff = beta - d;
            Ok((lambda * diff.norm_squared(), diff * (2.0 * lambda)))
        }
    }
}

/// Constant Hessian of the penalty.
pub fn penalty_hessian(p: usize, spec: &PenaltySpec) -> Result<DMatrix<f64>, ChoiceError> {
    spec.validate(p)?;
    Ok(match spec.kind {
        PenaltyKind::None => DMatrix::zeros(p, p),
        PenaltyKind::StewDirected => {
            let d = spec.directions.as_ref().expect("validated");
            // 2 lambda D (p I - 1 1^T) D
            DMatrix::from_fn(p, p, |i, j| {
                let centered = if i == j { p as f64 - 1.0 } else { -1.0 };
                2.0 * spec.lambda * d[i] * d[j] * centered
            })
        }
        PenaltyKind::ShrinkToDirections => DMatrix::identity(p, p) * (2.0 * spec.lambda),
    })
}

/// Penalized objective value.
pub fn objective(
    beta: &DVector<f64>,
    sets: &[ChoiceSet],
    spec: &PenaltySpec,
) -> Result<f64, ChoiceError> {
    let (nll, _) = nll_and_gradient(beta, sets);
    let (pen, _) = penalty_and_gradient(beta, spec)?;
    Ok(nll + pen)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_weights_give_log_k() {
        for k in 2..8 {
            let rows: Vec<Vec<f64>> = (0..k).map(|i| vec![i as f64, 1.0]).collect();
            let set = ChoiceSet::from_rows(1, &rows).unwrap();
            let (v, _) = nll_and_gradient(&DVector::zeros(2), &[set]);
            assert!((v - (k as f64).ln()).abs() < 1e-12);
        }
    }

    #[test]
    fn binary_logit_closed_form() {
        let set = ChoiceSet::from_rows(0, &[vec![1.5, 2.0], vec![0.5, 2.0]]).unwrap();
        for b in [-3.0, 0.0, 0.7, 4.0] {
            let (v, _) = nll_and_gradient(&DVector::from_vec(vec![b, 0.0]), std::slice::from_ref(&set));
            assert!((v - (1.0 + (-b).exp()).ln()).abs() < 1e-12);
        }
    }

    #[test]
    fn extreme_weights_stay_finite() {
        let set = ChoiceSet::from_rows(1, &[vec![3.0, -2.0], vec![-1.0, 5.0], vec![0.0, 0.0]]).unwrap();
        for beta in [vec![500.0, -500.0], vec![-500.0, 500.0]] {
            let (v, g) = nll_and_gradient(&DVector::from_vec(beta), std::slice::from_ref(&set));
            assert!(v.is_finite());
            assert!(g.iter().all(|x| x.is_finite()));
        }
    }

    #[test]
    fn stew_examples() {
        let d = [1.0, -1.0];
        let spec = PenaltySpec::stew(1.0, &d);
        let (v, _) = penalty_and_gradient(&DVector::from_vec(vec![1.0, -3.0]), &spec).unwrap();
        assert!((v - 4.0).abs() < 1e-12);
        let (v, g) = penalty_and_gradient(&DVector::from_vec(vec![2.5, -2.5]), &spec).unwrap();
        assert_eq!(v, 0.0);
        assert!(g.norm() < 1e-12);
    }

    #[test]
    fn shrink_examples() {
        let d = [1.0, -1.0, -1.0];
        let spec = PenaltySpec::shrink_to(1.0, &d);
        let dv = DVector::from_column_slice(&d);
        assert_eq!(penalty_and_gradient(&dv, &spec).unwrap().0, 0.0);
        assert!((penalty_and_gradient(&(dv * 2.0), &spec).unwrap().0 - 3.0).abs() < 1e-12);
    }

    #[test]
    fn penalty_hessian_matches_gradient_difference() {
        let d = [1.0, -1.0, 1.0];
        for spec in [PenaltySpec::stew(0.7, &d), PenaltySpec::shrink_to(0.7, &d)] {
            let h = penalty_hessian(3, &spec).unwrap();
            let b1 = DVector::from_vec(vec![0.3, -1.0, 2.0]);
            let b2 = DVector::from_vec(vec![1.3, 0.5, -2.0]);
            let g1 = penalty_and_gradient(&b1, &spec).unwrap().1;
            let g2 = penalty_and_gradient(&b2, &spec).unwrap().1;
            assert!(((g2 - g1) - &h * (b2 - b1)).norm() < 1e-12);
        }
    }
}
