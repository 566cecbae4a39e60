//! Two-sided exact binomial test against p = 1/2.

/// Two-sided p-value of observing `n_plus` successes and `n_minus` failures
/// under `Binomial(n_plus + n_minus, 1/2)`: `min(1, 2 P[X >= max(n_plus, n_minus)])`.
/// Returns 1 when there are no observations.
pub fn binomial_p_value(n_plus: u64, n_minus: u64) -> f64 {
    let n = n_plus + n_minus;
    if n == 0 {
        return 1.0;
    }
    let m = n_plus.max(n_minus);
    (2.0 * upper_tail_half(n, m)).min(1.0)
}

/// `P[X >= m]` for `X ~ Binomial(n, 1/2)`, `m >= n / 2`.
///
/// The first term `C(n, m) / 2^n` is built in log space from
/// `ln C(n, m) = sum_{i=1}^{n-m} ln((m + i) / i)`; later terms follow from the
/// ratio `t_{k+1} / t_k = (n - k) / (k + 1)`, which is < 1 past the mode, so
/// the sum is accumulated without cancellation.
fn upper_tail_half(n: u64, m: u64) -> f64 {
    debug_assert!(2 * m >= n);
    let ln_choose: f64 = (1..=(n - m))
        .map(|i| ((m + i) as f64 / i as f64).ln())
        .sum();
    let first = (ln_choose - n as f64 * std::f64::consts::LN_2).exp();
    if first == 0.0 {
        return 0.0;
    }
    let mut term = first;
    let mut sum = first;
    for k in m..n {
        term *= (n - k) as f64 / (k + 1) as f64;
        if term < sum * f64::EPSILON * 1e-3 {
            break;
        }
        sum += term;
    }
    sum.min(1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spot_values() {
        assert_eq!(binomial_p_value(5, 5), 1.0);
        assert_eq!(binomial_p_value(0, 0), 1.0);
        assert!((binomial_p_value(9, 1) - 0.021484375).abs() < 1e-15);
        assert!((binomial_p_value(8, 2) - 0.109375).abs() < 1e-15);
        assert!((binomial_p_value(6, 0) - 0.03125).abs() < 1e-15);
        assert!((binomial_p_value(5, 0) - 0.0625).abs() < 1e-15);
    }

    #[test]
    fn large_counts_stay_finite() {
        let p = binomial_p_value(3000, 2000);
        assert!((0.0..1e-40).contains(&p));
        assert!((binomial_p_value(2500, 2500) - 1.0).abs() < 1e-12);
        assert_eq!(binomial_p_value(5000, 0), 0.0);
    }

    #[test]
    fn smallest_decisive_run_at_five_percent() {
        let k = (1..20).find(|&k| binomial_p_value(k, 0) < 0.05).unwrap();
        assert_eq!(k, 6);
    }
}
