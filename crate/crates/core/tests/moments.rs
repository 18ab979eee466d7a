mod common;

use num_rational::BigRational;
use polytail::moments::{
    center, central_moment_expansion, enumerate_oracle, exact_moment_expansion, exact_moment_expansion_with,
    markov_optimize, moment_lemma_bound, ExactDistribution, ExpansionStrategy, LemmaVariant, MomentBoundParams, PROFILE_CAP,
};
use polytail::rv::to_rational;
use polytail::smoothness::{mu, mu_profile};
use polytail::{Distribution, PoweredHyperedge, PoweredPolynomial};
use proptest::prelude::*;

use common::{any, finite, instance, joint_support, rel_close};

fn ml(n: usize, terms: &[(&[u32], f64)]) -> PoweredPolynomial {
    PoweredPolynomial::new(n, terms.iter().map(|(vs, w)| (PoweredHyperedge::multilinear(vs.iter().copied()).unwrap(), *w)))
        .unwrap()
}

fn params(q: u32, mu: Vec<f64>, constant: f64) -> MomentBoundParams {
    MomentBoundParams { q, gamma: 1, l: 1.0, mu, variant: LemmaVariant::General, constant }
}

/// E(sum_h |w_h h(Y)|)^k by enumeration, the rounding scale for signed
/// expansions.
fn abs_moment_by_enumeration(f: &PoweredPolynomial, dists: &[Distribution], k: u32) -> f64 {
    joint_support(dists)
        .iter()
        .map(|(y, p)| p * f.terms().iter().map(|(h, w)| (w * h.evaluate(y)).abs()).sum::<f64>().powi(k as i32))
        .sum()
}

#[test]
fn centering_examples() {
    let half = vec![Distribution::Bernoulli { p: 0.5 }; 2];
    let c = center(&ml(2, &[(&[0, 1], 1.0)]), &half).unwrap();
    assert_eq!(c.constant, 0.25);
    assert_eq!(c.m(), 2);
    let polys: Vec<_> = c.components.iter().map(|g| g.poly.clone()).collect();
    assert!(polys.contains(&ml(2, &[(&[0, 1], 1.0)])));
    assert!(polys.contains(&ml(2, &[(&[0], 0.5), (&[1], 0.5)])));

    let f = ml(3, &[(&[0, 1], 2.0), (&[1, 2], -1.0), (&[2], 3.0)]);
    let c = center(&f, &vec![Distribution::Rademacher {}; 3]).unwrap();
    assert_eq!(c.constant, 0.0);
    let total = c.components.iter().fold(PoweredPolynomial::zero(3), |acc, g| acc.add(&g.poly).unwrap());
    assert_eq!(total, f);

    let sq = PoweredPolynomial::new(1, [(PoweredHyperedge::new([(0, 2)]).unwrap(), 1.0)]).unwrap();
    let d = [Distribution::Normal { mean: 1.0, sd: 2.0 }];
    let c = center(&sq, &d).unwrap();
    assert_eq!(c.constant, 5.0);
    assert_eq!(c.m(), 1);
    assert_eq!(c.components[0].poly, sq);
}

#[test]
fn expansion_examples() {
    let half = vec![Distribution::Bernoulli { p: 0.5 }; 2];
    let sum = ml(2, &[(&[0], 1.0), (&[1], 1.0)]);
    assert_eq!(exact_moment_expansion(&sum, &half, 2).unwrap(), 1.5);
    let o = enumerate_oracle(&sum, &half, 2, 1.0).unwrap();
    assert_eq!(o.moment, 1.5);
    assert_eq!(o.tail_two_sided, 0.5);

    let prod = ml(2, &[(&[0, 1], 1.0)]);
    let rad = vec![Distribution::Rademacher {}; 2];
    assert_eq!(exact_moment_expansion(&prod, &rad, 2).unwrap(), 1.0);
    assert_eq!(enumerate_oracle(&prod, &rad, 2, 0.5).unwrap().tail_two_sided, 1.0);

    let single = ml(1, &[(&[0], 1.0)]);
    assert_eq!(enumerate_oracle(&single, &[Distribution::Bernoulli { p: 0.375 }], 3, 1.0).unwrap().moment, 0.375);
}

#[test]
fn contraction_counterexample() {
    // The component 0.5 X1 + 0.5 X2 of Y1 Y2 has mu_0 = 0.5 > mu_0(f) = 0.25,
    // so the unweighted contraction mu_r(g_i) <= mu_r(f) cannot hold in
    // general; the factor 2^(q-r) from splitting each term is needed.
    let half = vec![Distribution::Bernoulli { p: 0.5 }; 2];
    let f = ml(2, &[(&[0, 1], 1.0)]);
    let linear = center(&f, &half).unwrap().components.into_iter().find(|g| g.q == 1).unwrap();
    let m0 = mu(&linear.poly, &half, 0).unwrap().value;
    let f0 = mu(&f, &half, 0).unwrap().value;
    assert_eq!((m0, f0), (0.5, 0.25));
    assert!(m0 > f0 && m0 <= 4.0 * f0);
}

#[test]
fn lemma_bound_examples() {
    for r in [0.5, 1.0, 3.0] {
        let ln_b = moment_lemma_bound(&params(1, vec![1.0, 1.0], r), 2).unwrap();
        assert!(rel_close(ln_b.exp(), (2.0 * r).max(4.0 * r * r), 1e-12), "R={r}");
    }
    assert_eq!(moment_lemma_bound(&params(2, vec![0.0; 3], 1.0), 2).unwrap(), f64::NEG_INFINITY);
    assert!(moment_lemma_bound(&params(1, vec![1.0, 1.0], 1.0), 3).is_err());
}

#[test]
fn markov_order_examples() {
    // q=1 with unit parameters: K = min(lambda^2/e^2, lambda/e).
    let p = params(1, vec![1.0, 1.0], 1.0);
    let e = std::f64::consts::E;
    for (big_k, k_star) in [(7.3, 6), (2.0, 2), (2.5, 2), (10.5, 10)] {
        let m = markov_optimize(&p, big_k * e).unwrap();
        assert!(rel_close(m.ln_k_target.exp(), big_k, 1e-12));
        assert_eq!(m.k_star, k_star, "K={big_k}");
        assert!(m.log_bound <= 0.0);
    }
    let m = markov_optimize(&p, 1.2 * e).unwrap();
    assert_eq!((m.k_star, m.log_bound), (2, 0.0));
}

fn lemma_params_strategy() -> impl Strategy<Value = (MomentBoundParams, u32)> {
    (1u32..=4).prop_flat_map(|q| {
        (
            prop::collection::vec(0.01..50.0f64, q as usize + 1),
            1u32..=3,
            0.1..5.0f64,
            0.1..4.0f64,
            prop::bool::ANY,
            (1u32..=10).prop_map(|h| 2 * h),
        )
            .prop_map(move |(mu, gamma, l, c, gv, k)| {
                let variant = if gv { LemmaVariant::GammaVariant } else { LemmaVariant::General };
                (MomentBoundParams { q, gamma, l, mu, variant, constant: c }, k)
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn reconstruction((f, d) in instance(6, 4, 3, 6, false, any), ys in prop::collection::vec(-3.0..3.0f64, 6)) {
        let c = center(&f, &d).unwrap();
        let q = f.q() as usize;
        prop_assert!(c.m() <= 2 * q * q);
        for g in &c.components {
            let uniform = g.poly.terms().iter().all(|(h, w)| {
                h.cardinality() == g.eta && h.total_power() == g.q && (*w > 0.0) == (g.sign > 0)
            });
            prop_assert!(uniform);
        }
        let y = &ys[..f.n()];
        let want = f.evaluate(y).unwrap();
        let got = c.evaluate(y, &d).unwrap();
        let scale = f.terms().iter().map(|(h, w)| w.abs() * h.evaluate(y).abs()).sum::<f64>().max(1.0);
        prop_assert!((got - want).abs() <= 1e-10 * scale, "{} vs {}", got, want);
    }

    #[test]
    fn centering_contracts_up_to_splitting_factor((f, d) in instance(6, 4, 3, 6, false, any)) {
        let c = center(&f, &d).unwrap();
        let pf = mu_profile(&f, &d).unwrap();
        for g in &c.components {
            let pg = mu_profile(&g.poly, &d).unwrap();
            for r in 0..=g.q as usize {
                let cap = 2f64.powi(f.q() as i32 - r as i32) * pf.mu(r);
                prop_assert!(pg.mu(r) <= cap * (1.0 + 1e-12), "r={}: {} > {}", r, pg.mu(r), cap);
            }
        }
    }

    #[test]
    fn expansion_matches_enumeration((f, d) in instance(6, 3, 2, 6, false, finite), k in 1u32..=6) {
        let exact = ExactDistribution::new(&f, &d).unwrap();
        let scale = abs_moment_by_enumeration(&f, &d, k).max(1e-300);
        let collapsed = exact_moment_expansion(&f, &d, k).unwrap();
        let naive = exact_moment_expansion_with(&f, &d, k, ExpansionStrategy::Naive, PROFILE_CAP).unwrap();
        let oracle = exact.moment_f64(k);
        prop_assert!((collapsed - oracle).abs() <= 1e-9 * scale, "{} vs {}", collapsed, oracle);
        prop_assert!((naive - oracle).abs() <= 1e-9 * scale, "{} vs {}", naive, oracle);
        if k % 2 == 0 {
            let central = central_moment_expansion(&f, &d, k).unwrap();
            let want = exact.central_abs_moment_f64(k);
            let cscale = scale + f.expectation(&d).unwrap().abs().powi(k as i32);
            prop_assert!((central - want).abs() <= 1e-8 * cscale.max(1e-300), "{} vs {}", central, want);
        }
        if k == 1 {
            prop_assert!((collapsed - f.expectation(&d).unwrap()).abs() <= 1e-12 * scale.max(1.0));
        }
    }

    #[test]
    fn markov_dominance((f, d) in instance(6, 3, 2, 6, false, finite), lam in 0.01..6.0f64) {
        let exact = ExactDistribution::new(&f, &d).unwrap();
        for k in [2, 4, 6, 8] {
            prop_assert!(exact.markov_holds(k, lam), "k={} lambda={}", k, lam);
        }
    }

    #[test]
    fn minkowski_for_dependent_terms((f, d) in instance(5, 3, 2, 5, false, finite), k in 1u32..=6) {
        // Z_i are the monomials of f: dependent whenever they share variables.
        let support = joint_support(&d);
        let lhs: f64 = support
            .iter()
            .map(|(y, p)| p * f.terms().iter().map(|(h, w)| (w * h.evaluate(y)).abs()).sum::<f64>().powi(k as i32))
            .sum();
        let norms: f64 = f
            .terms()
            .iter()
            .map(|(h, w)| {
                support.iter().map(|(y, p)| p * (w * h.evaluate(y)).abs().powi(k as i32)).sum::<f64>().powf(1.0 / k as f64)
            })
            .sum();
        prop_assert!(lhs <= norms.powi(k as i32) * (1.0 + 1e-12), "{} > {}", lhs, norms.powi(k as i32));
    }

    #[test]
    fn lemma_bound_monotone((p, k) in lemma_params_strategy(), t in 0usize..5, factor in 1.0..3.0f64) {
        let base = moment_lemma_bound(&p, k).unwrap();
        let mut doubled = p.clone();
        doubled.mu.iter_mut().for_each(|m| *m *= 2.0);
        let up = moment_lemma_bound(&doubled, k).unwrap();
        prop_assert!(up >= base + k as f64 * 2f64.ln() - 1e-9);
        let mut bumped = p.clone();
        let t = t.min(p.q as usize);
        bumped.mu[t] *= factor;
        prop_assert!(moment_lemma_bound(&bumped, k).unwrap() >= base - 1e-12);
        let mut bigger_l = p.clone();
        bigger_l.l *= factor;
        prop_assert!(moment_lemma_bound(&bigger_l, k).unwrap() >= base - 1e-12);
    }

    #[test]
    fn markov_choice_is_even_and_capped((p, _) in lemma_params_strategy(), lam in 0.01..1e4f64) {
        let m = markov_optimize(&p, lam).unwrap();
        prop_assert!(m.k_star >= 2 && m.k_star % 2 == 0);
        prop_assert!(m.log_bound <= 0.0);
        let big_k = m.ln_k_target.exp();
        if big_k >= 2.0 {
            prop_assert!((m.k_star as f64) <= big_k && (m.k_star as f64) > big_k - 2.0);
            let direct = moment_lemma_bound(&p, m.k_star as u32).unwrap() - m.k_star as f64 * lam.ln();
            prop_assert!(rel_close(m.log_bound, direct.min(0.0), 1e-9) || (m.log_bound - direct.min(0.0)).abs() < 1e-9);
        } else {
            prop_assert_eq!(m.log_bound, 0.0);
        }
    }
}

#[test]
fn exact_tails_are_rational() {
    let f = ml(3, &[(&[0], 1.0), (&[1], 1.0), (&[2], 1.0)]);
    let d = ExactDistribution::new(&f, &vec![Distribution::Bernoulli { p: 0.5 }; 3]).unwrap();
    // f - 3/2 is in {-3/2, -1/2, 1/2, 3/2} with weights 1, 3, 3, 1 (over 8).
    assert_eq!(d.tail_two_sided(&to_rational(1.0)), BigRational::new(1.into(), 4.into()));
    assert_eq!(d.tail_upper(&to_rational(0.5)), BigRational::new(1.into(), 2.into()));
    assert_eq!(d.central_abs_moment(2), BigRational::new(3.into(), 4.into()));
}
