use ipse::lfd::binomial_p_value;

fn choose(n: u64, k: u64) -> u128 {
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

/// Two-sided exact p-value under p = 1/2: total probability of the outcomes
/// no more likely than the observed one, summed term by term.
fn pmf_sum_p_value(n_plus: u64, n_minus: u64) -> f64 {
    let n = n_plus + n_minus;
    let observed = choose(n, n_plus);
    let tail: u128 = (0..=n).map(|i| choose(n, i)).filter(|&c| c <= observed).sum();
    tail as f64 / 2f64.powi(n as i32)
}

#[test]
fn matches_pmf_summation_up_to_thirty() {
    for n in 0..=30u64 {
        for n_plus in 0..=n {
            let got = binomial_p_value(n_plus, n - n_plus);
            let want = pmf_sum_p_value(n_plus, n - n_plus);
            assert!((got - want).abs() < 1e-12, "({n_plus}, {}): {got} vs {want}", n - n_plus);
        }
    }
}

#[test]
fn spot_values() {
    assert!((binomial_p_value(9, 1) - 0.021484375).abs() < 1e-15);
    assert!((binomial_p_value(8, 2) - 0.109375).abs() < 1e-15);
    assert_eq!(binomial_p_value(0, 0), 1.0);
    assert_eq!(binomial_p_value(5, 5), 1.0);
}

#[test]
fn symmetric_in_its_arguments() {
    for a in 0..60 {
        for b in 0..60 {
            assert_eq!(binomial_p_value(a, b), binomial_p_value(b, a));
        }
    }
}

#[test]
fn decreases_as_evidence_accumulates() {
    let mut prev = 1.0;
    for k in 1..200 {
        let p = binomial_p_value(k, 0);
        assert!(p <= prev);
        prev = p;
    }
    // six unanimous instances are the fewest that reject at 0.05
    assert!(binomial_p_value(5, 0) > 0.05);
    assert!(binomial_p_value(6, 0) < 0.05);
}

#[test]
fn large_counts_stay_in_range() {
    for (a, b) in [(5000, 4900), (100_000, 1), (123_456, 123_456), (1_000_000, 999_000)] {
        let p = binomial_p_value(a, b);
        assert!((0.0..=1.0).contains(&p), "{a} {b} {p}");
    }
    assert!(binomial_p_value(100_000, 1) < 1e-100);
}
