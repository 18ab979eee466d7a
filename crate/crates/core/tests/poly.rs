mod common;

use std::collections::BTreeSet;

use polytail::mc::{matrix_from_vars, permanent_vars, ryser};
use polytail::poly::{cycle_count, edge_index, CYCLE_TERM_CAP};
use polytail::rng::StreamFactory;
use polytail::{Distribution, PoweredHyperedge, PoweredPolynomial};
use proptest::prelude::*;

use common::{choose, finite, instance, joint_support, poly_on, rel_close};

fn naive_permanent(a: &[f64], n: usize) -> f64 {
    fn rec(a: &[f64], n: usize, row: usize, used: &mut Vec<bool>) -> f64 {
        if row == n {
            return 1.0;
        }
        let mut s = 0.0;
        for c in 0..n {
            if !used[c] {
                used[c] = true;
                s += a[row * n + c] * rec(a, n, row + 1, used);
                used[c] = false;
            }
        }
        s
    }
    rec(a, n, 0, &mut vec![false; n])
}

/// Simple q-cycles of K_n through vertex 0, each as its set of edge indices.
fn cycles_through_zero(n: usize, q: usize) -> BTreeSet<Vec<u32>> {
    fn walk(n: usize, q: usize, path: &mut Vec<usize>, out: &mut BTreeSet<Vec<u32>>) {
        if path.len() == q {
            let mut edges: Vec<u32> =
                (0..q).map(|i| edge_index(n, path[i], path[(i + 1) % q]) as u32).collect();
            edges.sort_unstable();
            out.insert(edges);
            return;
        }
        for v in 1..n {
            if !path.contains(&v) {
                path.push(v);
                walk(n, q, path, out);
                path.pop();
            }
        }
    }
    let mut out = BTreeSet::new();
    walk(n, q, &mut vec![0], &mut out);
    out
}

#[test]
fn evaluation_examples() {
    let f = PoweredPolynomial::new(
        2,
        [(PoweredHyperedge::new([(0, 3), (1, 3)]).unwrap(), 1.0), (PoweredHyperedge::new([(1, 2)]).unwrap(), 1.0)],
    )
    .unwrap();
    assert_eq!(f.evaluate(&[1.0, 2.0]).unwrap(), 12.0);
    assert_eq!(PoweredPolynomial::zero(3).evaluate(&[4.0, 5.0, 6.0]).unwrap(), 0.0);
    let c = PoweredPolynomial::complete_multilinear(3, 2, 1.0).unwrap();
    assert_eq!(c.evaluate(&[1.0; 3]).unwrap(), 3.0);
}

#[test]
fn expectation_examples() {
    let p = PoweredPolynomial::permanent(2, false).unwrap();
    assert_eq!(p.expectation(&vec![Distribution::Rademacher {}; 4]).unwrap(), 0.0);
    let c = PoweredPolynomial::complete_multilinear(4, 2, 1.0).unwrap();
    let dists = vec![Distribution::Bernoulli { p: 0.5 }; 4];
    let by_enumeration: f64 = joint_support(&dists).iter().map(|(y, pr)| pr * c.evaluate(y).unwrap()).sum();
    assert_eq!(c.expectation(&dists).unwrap(), 1.5);
    assert_eq!(by_enumeration, 1.5);
    let sq = PoweredPolynomial::new(2, [(PoweredHyperedge::new([(1, 2)]).unwrap(), 1.0)]).unwrap();
    assert!(rel_close(sq.expectation(&[Distribution::Rademacher {}, Distribution::Bernoulli { p: 0.3 }]).unwrap(), 0.3, 1e-15));
}

#[test]
fn construction_examples() {
    let one = |v: u32, w: f64| PoweredPolynomial::new(1, [(PoweredHyperedge::multilinear([v]).unwrap(), w)]).unwrap();
    let fg = PoweredPolynomial::product(&one(0, 2.0), &one(0, 3.0));
    assert_eq!(fg.len(), 1);
    assert_eq!(fg.terms()[0].1, 6.0);
    assert!(PoweredPolynomial::product(&PoweredPolynomial::zero(2), &one(0, 1.0)).is_empty());
    let two = PoweredPolynomial::complete_multilinear(2, 1, 1.0).unwrap();
    let three = PoweredPolynomial::complete_multilinear(3, 1, 1.0).unwrap();
    assert_eq!(PoweredPolynomial::product(&two, &three).len(), 6);

    assert_eq!(PoweredPolynomial::complete_multilinear(4, 2, 1.0).unwrap().len(), 6);
    let c = PoweredPolynomial::complete_multilinear(3, 3, 2.0).unwrap();
    assert_eq!(c.len(), 1);
    assert_eq!(c.terms()[0].1, 2.0);
    assert_eq!(PoweredPolynomial::complete_multilinear(5, 1, 1.0).unwrap().len(), 5);

    assert_eq!(PoweredPolynomial::permanent(2, false).unwrap().len(), 2);
    let sym = PoweredPolynomial::permanent(2, true).unwrap();
    assert_eq!(sym.len(), 2);
    assert_eq!(sym.gamma(), 2);
    assert_eq!(PoweredPolynomial::permanent(3, false).unwrap().len(), 6);
}

#[test]
fn duplicate_monomials_merge() {
    let h = PoweredHyperedge::new([(2, 1), (0, 2)]).unwrap();
    let h2 = PoweredHyperedge::new([(0, 2), (2, 1)]).unwrap();
    let f = PoweredPolynomial::new(3, [(h, 1.5), (h2, 2.5)]).unwrap();
    assert_eq!(f.len(), 1);
    assert_eq!(f.terms()[0].1, 4.0);
    assert_eq!(f.terms()[0].0.vars(), &[(0, 2), (2, 1)]);
}

#[test]
fn cycle_examples() {
    for (n, q, want) in [(4, 3, 3), (5, 3, 6), (4, 4, 3)] {
        assert_eq!(PoweredPolynomial::cycles(n, q, CYCLE_TERM_CAP).unwrap().len(), want, "n={n} q={q}");
    }
}

#[test]
fn cycle_polynomial_matches_enumeration_and_formula() {
    for n in 3..=12usize {
        for q in 3..=5usize.min(n) {
            let f = PoweredPolynomial::cycles(n, q, CYCLE_TERM_CAP).unwrap();
            let formula = (1..q as u64).product::<u64>() as f64 * choose(n as u64 - 1, q as u64 - 1) / 2.0;
            assert_eq!(f.len() as f64, formula, "n={n} q={q}");
            assert_eq!(cycle_count(n as u64, q as u64).unwrap() as f64, formula);
            assert!(f.is_multilinear() && f.q() == q as u32);
            if n <= 8 {
                let terms: BTreeSet<Vec<u32>> =
                    f.terms().iter().map(|(h, _)| h.vars().iter().map(|&(v, _)| v).collect()).collect();
                assert_eq!(terms, cycles_through_zero(n, q), "n={n} q={q}");
            }
        }
    }
}

#[test]
fn permanent_polynomial_matches_ryser() {
    let streams = StreamFactory::new(77);
    let entry = Distribution::Normal { mean: 0.0, sd: 1.0 };
    let mut idx = 0;
    for trial in 0..100usize {
        let n = 1 + trial % 8;
        for symmetric in [false, true] {
            let nv = permanent_vars(n, symmetric);
            let vars: Vec<f64> = (0..nv)
                .map(|_| {
                    idx += 1;
                    entry.sample(&mut streams.stream(idx))
                })
                .collect();
            let a = matrix_from_vars(&vars, n, symmetric);
            let by_poly = PoweredPolynomial::permanent(n, symmetric).unwrap().evaluate(&vars).unwrap();
            let by_ryser = ryser(&a, n).unwrap();
            // Cancellation is relative to the permanent of |A|.
            let abs: Vec<f64> = a.iter().map(|x| x.abs()).collect();
            let scale = ryser(&abs, n).unwrap().max(1.0);
            assert!((by_poly - by_ryser).abs() <= 1e-9 * scale, "n={n}: {by_poly} vs {by_ryser}");
            assert!((by_ryser - naive_permanent(&a, n)).abs() <= 1e-9 * scale);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn product_evaluates_to_product(
        f in poly_on(3, 3, 2, 4, false),
        g in poly_on(4, 3, 2, 4, false),
        a in prop::collection::vec(-2.0..2.0f64, 3),
        b in prop::collection::vec(-2.0..2.0f64, 4),
    ) {
        let fg = PoweredPolynomial::product(&f, &g);
        prop_assert_eq!(fg.n(), 7);
        let mut ab = a.clone();
        ab.extend(&b);
        let want = f.evaluate(&a).unwrap() * g.evaluate(&b).unwrap();
        let got = fg.evaluate(&ab).unwrap();
        prop_assert!((got - want).abs() <= 1e-9 * want.abs().max(1.0), "{} vs {}", got, want);
    }

    #[test]
    fn expectation_is_linear(
        (f, dists) in instance(5, 4, 2, 5, false, finite),
        gseed in poly_on(5, 4, 2, 5, false),
        c in -3.0..3.0f64,
    ) {
        // Restrict the second polynomial to f's variables.
        let n = f.n();
        let g = PoweredPolynomial::new(n, gseed.terms().iter().filter_map(|(h, w)| {
            let kept: Vec<(u32, u32)> = h.vars().iter().copied().filter(|&(v, _)| (v as usize) < n).collect();
            (!kept.is_empty()).then(|| (PoweredHyperedge::new(kept).unwrap(), *w))
        })).unwrap();
        let sum = f.add(&g).unwrap();
        let lhs = sum.expectation(&dists).unwrap();
        let rhs = f.expectation(&dists).unwrap() + g.expectation(&dists).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-9 * lhs.abs().max(1.0));
        let scaled = f.scaled(c).expectation(&dists).unwrap();
        prop_assert!((scaled - c * f.expectation(&dists).unwrap()).abs() <= 1e-9 * scaled.abs().max(1.0));
        let shifted = f.plus_constant(c).expectation(&dists).unwrap();
        prop_assert!((shifted - c - f.expectation(&dists).unwrap()).abs() <= 1e-9 * shifted.abs().max(1.0));
    }

    #[test]
    fn expectation_matches_enumeration((f, dists) in instance(6, 4, 3, 6, false, finite)) {
        let by_enumeration: f64 = joint_support(&dists).iter().map(|(y, p)| p * f.evaluate(y).unwrap()).sum();
        let e = f.expectation(&dists).unwrap();
        prop_assert!((e - by_enumeration).abs() <= 1e-9 * e.abs().max(1.0), "{} vs {}", e, by_enumeration);
    }

    #[test]
    fn structure_and_json((f, _) in instance(6, 4, 3, 6, false, finite)) {
        for (h, w) in f.terms() {
            prop_assert!(*w != 0.0);
            prop_assert!(h.total_power() <= f.q() && h.max_power() <= f.gamma());
            prop_assert!(h.vars().windows(2).all(|p| p[0].0 < p[1].0));
            prop_assert!(h.vars().iter().all(|&(v, p)| (v as usize) < f.n() && p >= 1));
        }
        let back: PoweredPolynomial = serde_json::from_str(&serde_json::to_string(&f).unwrap()).unwrap();
        prop_assert_eq!(back, f);
    }
}
