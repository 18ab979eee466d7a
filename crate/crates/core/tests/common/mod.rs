#![allow(dead_code)]

use polytail::tailbounds::suite::three_atom;
use polytail::{Distribution, PoweredHyperedge, PoweredPolynomial};
use proptest::prelude::*;

/// Laws with finite support, so exact enumeration applies.
pub fn finite_law() -> impl Strategy<Value = Distribution> {
    prop_oneof![
        (1u32..10).prop_map(|k| Distribution::Bernoulli { p: k as f64 / 10.0 }),
        Just(Distribution::Rademacher {}),
        Just(three_atom()),
        (1u32..4, prop::sample::select(vec![-2.0, 0.5, 3.0]))
            .prop_map(|(k, value)| Distribution::ScaledBernoulli { p: k as f64 / 4.0, value }),
    ]
}

pub fn any_law() -> impl Strategy<Value = Distribution> {
    prop_oneof![
        3 => finite_law(),
        1 => prop::sample::select(vec![
            Distribution::Uniform { a: 0.0, b: 1.0 },
            Distribution::Uniform { a: -1.0, b: 2.0 },
            Distribution::Exponential { rate: 2.0 },
            Distribution::Normal { mean: 0.5, sd: 1.0 },
            Distribution::Poisson { mean: 1.5 },
            Distribution::Geometric { p: 0.4 },
            Distribution::Binomial { n: 4, p: 0.3 },
        ]),
    ]
}

fn build_term(n: usize, mask: u32, powers: &[u32], q_max: u32) -> PoweredHyperedge {
    let mut vars = Vec::new();
    let mut total = 0;
    for v in 0..n {
        if mask >> v & 1 == 0 {
            continue;
        }
        let p = powers[v].min(q_max - total);
        if p == 0 {
            break;
        }
        vars.push((v as u32, p));
        total += p;
    }
    if vars.is_empty() {
        vars.push((mask.trailing_zeros() as u32 % n as u32, 1));
    }
    PoweredHyperedge::new(vars).unwrap()
}

/// Polynomials on exactly `n` variables: up to `max_terms` monomials, total
/// power at most `q_max`, single powers at most `gamma_max`.
pub fn poly_on(
    n: usize,
    q_max: u32,
    gamma_max: u32,
    max_terms: usize,
    nonneg: bool,
) -> impl Strategy<Value = PoweredPolynomial> {
    let weights = if nonneg { vec![0.5, 1.0, 2.0, 3.0] } else { vec![-2.0, -1.0, -0.5, 0.5, 1.0, 2.0] };
    let term = (1u32..(1u32 << n), prop::collection::vec(1..=gamma_max, n), prop::sample::select(weights));
    prop::collection::vec(term, 1..=max_terms).prop_map(move |ts| {
        let terms: Vec<_> = ts.into_iter().map(|(m, p, w)| (build_term(n, m, &p, q_max), w)).collect();
        PoweredPolynomial::new(n, terms).unwrap()
    })
}

/// A polynomial together with one law per variable.
pub fn instance(
    n_max: usize,
    q_max: u32,
    gamma_max: u32,
    max_terms: usize,
    nonneg: bool,
    law: fn() -> BoxedStrategy<Distribution>,
) -> impl Strategy<Value = (PoweredPolynomial, Vec<Distribution>)> {
    (1..=n_max).prop_flat_map(move |n| {
        (poly_on(n, q_max, gamma_max, max_terms, nonneg), prop::collection::vec(law(), n))
    })
}

pub fn finite() -> BoxedStrategy<Distribution> {
    finite_law().boxed()
}

pub fn any() -> BoxedStrategy<Distribution> {
    any_law().boxed()
}

/// Every point of the joint support with its probability.
pub fn joint_support(dists: &[Distribution]) -> Vec<(Vec<f64>, f64)> {
    let mut out = vec![(Vec::new(), 1.0)];
    for d in dists {
        let atoms = d.atoms().expect("finite support");
        let mut next = Vec::new();
        for (y, p) in &out {
            for &(x, px) in &atoms {
                if px > 0.0 {
                    let mut y2 = y.clone();
                    y2.push(x);
                    next.push((y2, p * px));
                }
            }
        }
        out = next;
    }
    out
}

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1e-300)
}

pub fn choose(n: u64, k: u64) -> f64 {
    if k > n {
        return 0.0;
    }
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}
