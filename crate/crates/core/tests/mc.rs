use polytail::mc::{
    clopper_pearson, estimate_tail, mean_with_error, permanent_sample, ryser, Direction, DEFAULT_LEVEL,
};
use polytail::{Distribution, PoweredPolynomial};
use proptest::prelude::*;
use rayon::ThreadPoolBuilder;
use statrs::distribution::{Binomial, DiscreteCDF};

fn in_pool<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> T {
    ThreadPoolBuilder::new().num_threads(threads).build().unwrap().install(f)
}

#[test]
fn second_moment_by_enumeration() {
    for n in 1..=3usize {
        let cells = n * n;
        let mut sum = 0.0;
        for mask in 0u32..(1 << cells) {
            let a: Vec<f64> = (0..cells).map(|i| if mask >> i & 1 == 1 { 1.0 } else { -1.0 }).collect();
            sum += ryser(&a, n).unwrap().powi(2);
        }
        let factorial: f64 = (1..=n).map(|i| i as f64).product();
        assert_eq!(sum / (1u64 << cells) as f64, factorial, "n={n}");
    }
}

#[test]
fn second_moment_monte_carlo() {
    for n in [4usize, 6, 8] {
        let xs = permanent_sample(n, &Distribution::Rademacher {}, false, 2024, 100_000).unwrap();
        let sq: Vec<f64> = xs.iter().map(|x| x * x).collect();
        let est = mean_with_error(&sq);
        let factorial: f64 = (1..=n).map(|i| i as f64).product();
        assert!((est.mean - factorial).abs() <= 4.0 * est.sem, "n={n}: {} +- {} vs {factorial}", est.mean, est.sem);
    }
}

#[test]
fn binomial_sum_tail() {
    let f = PoweredPolynomial::complete_multilinear(100, 1, 1.0).unwrap();
    let d = vec![Distribution::Bernoulli { p: 0.5 }; 100];
    let est = estimate_tail(&f, &d, 15.0, 1_000_000, 5, Direction::Upper).unwrap();
    let exact = Binomial::new(0.5, 100).unwrap().sf(64);
    assert!((2.0 * exact - 0.0035).abs() < 1e-4);
    assert!(est.ci_low <= exact && exact <= est.ci_high, "{est:?} vs {exact}");
    let two = estimate_tail(&f, &d, 15.0, 1_000_000, 5, Direction::TwoSided).unwrap();
    assert!(two.ci_low <= 2.0 * exact && 2.0 * exact <= two.ci_high, "{two:?}");
    assert!(two.exceedances >= est.exceedances);
}

#[test]
fn thread_count_does_not_change_results() {
    let f = PoweredPolynomial::complete_multilinear(12, 2, 1.0).unwrap();
    let d = vec![Distribution::Exponential { rate: 1.0 }; 12];
    let run = || {
        (
            estimate_tail(&f, &d, 20.0, 50_000, 9, Direction::TwoSided).unwrap(),
            permanent_sample(5, &Distribution::Normal { mean: 0.0, sd: 1.0 }, true, 9, 20_000).unwrap(),
        )
    };
    let base = in_pool(1, run);
    for t in [4, 16] {
        let other = in_pool(t, run);
        assert_eq!(base.0, other.0, "threads={t}");
        assert_eq!(base.1.iter().map(|x| x.to_bits()).collect::<Vec<_>>(), other.1.iter().map(|x| x.to_bits()).collect::<Vec<_>>());
    }
    let reseeded = estimate_tail(&f, &d, 20.0, 50_000, 10, Direction::TwoSided).unwrap();
    assert_ne!(reseeded.exceedances, base.0.exceedances);
}

#[test]
fn clopper_pearson_edges() {
    assert_eq!(clopper_pearson(0, 10, 0.95).unwrap().0, 0.0);
    assert_eq!(clopper_pearson(10, 10, 0.95).unwrap().1, 1.0);
    // x = 0: upper end solves (1 - p)^n = alpha / 2.
    let (_, hi) = clopper_pearson(0, 50, 0.99).unwrap();
    assert!((hi - (1.0 - 0.005f64.powf(1.0 / 50.0))).abs() < 1e-10);
    assert!(clopper_pearson(3, 2, 0.9).is_err());
    assert!(clopper_pearson(0, 0, 0.9).is_err());
    assert!(clopper_pearson(1, 2, 1.0).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn clopper_pearson_inverts_the_binomial(n in 1u64..400, frac in 0.0..=1.0f64, level in 0.5..0.999f64) {
        let x = ((n as f64) * frac).round() as u64;
        let (lo, hi) = clopper_pearson(x, n, level).unwrap();
        let a2 = (1.0 - level) / 2.0;
        let p = x as f64 / n as f64;
        prop_assert!(0.0 <= lo && lo <= p && p <= hi && hi <= 1.0);
        if x > 0 {
            // P[X >= x | lo] = alpha/2
            let tail = Binomial::new(lo, n).unwrap().sf(x - 1);
            prop_assert!((tail - a2).abs() < 1e-6, "lo={} tail={}", lo, tail);
        }
        if x < n {
            let cdf = Binomial::new(hi, n).unwrap().cdf(x);
            prop_assert!((cdf - a2).abs() < 1e-6, "hi={} cdf={}", hi, cdf);
        }
        let (lo2, hi2) = clopper_pearson(x, n, (level + 1.0) / 2.0).unwrap();
        prop_assert!(lo2 <= lo + 1e-12 && hi2 >= hi - 1e-12);
    }
}

#[test]
fn default_level() {
    let f = PoweredPolynomial::complete_multilinear(3, 1, 1.0).unwrap();
    let e = estimate_tail(&f, &vec![Distribution::Rademacher {}; 3], 3.0, 1000, 1, Direction::TwoSided).unwrap();
    assert_eq!(e.level, DEFAULT_LEVEL);
    // |sum| = 3 happens with probability 1/4.
    assert!(e.ci_low <= 0.25 && 0.25 <= e.ci_high);
}
