use minexp::thresholds::{
    binary_entropy, existence_failure_sum, existence_prob_bound, strong_max_mu, strong_min_degree, weak_max_alpha_with,
};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

fn binom(n: u64, k: u64) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    (0..k).fold(BigInt::one(), |acc, i| acc * BigInt::from(n - i) / BigInt::from(i + 1))
}

fn exact_failure_sum(n: u64, m: u64, r0: u64, d: u64) -> f64 {
    let cmd = binom(m, d);
    let mut sum = BigRational::zero();
    for r in d..=r0 {
        let num = binom(n, r) * binom(m, r) * binom(r, d).pow(r as u32);
        sum += BigRational::new(num, cmd.pow(r as u32));
    }
    sum.to_f64().unwrap()
}

#[test]
fn failure_sum_matches_rational_arithmetic() {
    for (n, m, r0, d) in [(8, 6, 4, 3), (12, 9, 6, 3), (20, 10, 8, 4), (30, 15, 10, 3), (40, 20, 12, 5)] {
        let want = exact_failure_sum(n, m, r0, d);
        let got = existence_failure_sum(n, m, r0, d);
        assert!((got - want).abs() <= 1e-12 * want.max(1.0), "{n} {m} {r0} {d}: {got} vs {want}");
        let bound = existence_prob_bound(n, m, r0, d);
        assert!((bound - (1.0 - want).clamp(0.0, 1.0)).abs() <= 1e-12);
    }
}

#[test]
fn probability_bound_transitions() {
    let first = existence_prob_bound(500, 250, 10, 3);
    let last = existence_prob_bound(500, 250, 120, 3);
    assert!(first > 0.99, "{first}");
    assert_eq!(last, 0.0);
}

#[test]
fn entropy_sandwich_exact() {
    for n in 1..=60u64 {
        let slack = ((n + 1) as f64).log2();
        for k in 0..=n {
            let lc = binom(n, k).to_f64().unwrap().log2();
            let h = n as f64 * binary_entropy(k as f64 / n as f64).unwrap();
            assert!(h - slack <= lc + 1e-9 && lc <= h + slack + 1e-9, "n {n} k {k}");
        }
    }
}

#[test]
fn strong_threshold_directions() {
    for beta in [0.3, 0.5, 0.7] {
        let mut prev = 0.0;
        for d in 3..=12 {
            let mu = strong_max_mu(beta, d).unwrap();
            assert!(mu >= prev && mu > 0.0 && mu < beta);
            prev = mu;
        }
    }
    let mut prev_deg = f64::INFINITY;
    let mut prev_mu = 0.0;
    for beta in [0.2, 0.4, 0.6, 0.8, 0.95] {
        let deg = strong_min_degree(0.1, beta).unwrap();
        assert!(deg < prev_deg);
        prev_deg = deg;
        let mu = strong_max_mu(beta, 5).unwrap();
        assert!(mu > prev_mu);
        prev_mu = mu;
    }
}

#[test]
fn weak_threshold_positive_on_coarse_grid() {
    for beta in [0.1, 0.5, 0.9] {
        for d in [3, 5] {
            assert!(weak_max_alpha_with(beta, d, 100).unwrap() > 0.0);
        }
    }
}
