mod common;

use std::collections::BTreeMap;

use polytail::census::{
    components, enumerate_s2, ordering_nu0, run_census, run_range, s0_bound_u128, verify_ziq1, CensusParams,
    LabeledHypergraph, CENSUS_BUDGET, CENSUS_R0_CAP,
};
use polytail::PoweredHyperedge;
use proptest::prelude::*;

fn params(k: u32, l: u32, q: u32, eta: u32, gamma: u32) -> CensusParams {
    CensusParams { k, l, q, eta, gamma }
}

/// Every powered edge of one slot, built without the library helpers.
fn edges(p: &CensusParams) -> Vec<PoweredHyperedge> {
    let mut out = Vec::new();
    for mask in 0u32..(1 << p.l) {
        if mask.count_ones() != p.eta {
            continue;
        }
        let vs: Vec<u32> = (0..p.l).filter(|v| mask >> v & 1 == 1).collect();
        let mut pw = vec![1u32; vs.len()];
        loop {
            if pw.iter().sum::<u32>() == p.q {
                out.push(PoweredHyperedge::new(vs.iter().copied().zip(pw.iter().copied())).unwrap());
            }
            let mut i = 0;
            while i < pw.len() && pw[i] == p.gamma {
                pw[i] = 1;
                i += 1;
            }
            if i == pw.len() {
                break;
            }
            pw[i] += 1;
        }
    }
    out
}

fn degrees(g: &LabeledHypergraph) -> Vec<u32> {
    let mut d = vec![0u32; g.l as usize];
    for e in &g.edges {
        for &(v, _) in e.vars() {
            d[v as usize] += 1;
        }
    }
    d
}

/// All ordered k-sequences with every degree at least two.
fn brute_force_s2(p: &CensusParams) -> Vec<LabeledHypergraph> {
    let slot = edges(p);
    let mut out = Vec::new();
    if slot.is_empty() {
        return out;
    }
    let mut idx = vec![0usize; p.k as usize];
    loop {
        let g = LabeledHypergraph { l: p.l, edges: idx.iter().map(|&i| slot[i].clone()).collect() };
        if degrees(&g).iter().all(|&d| d >= 2) {
            out.push(g);
        }
        let mut i = 0;
        while i < idx.len() && idx[i] + 1 == slot.len() {
            idx[i] = 0;
            i += 1;
        }
        if i == idx.len() {
            return out;
        }
        idx[i] += 1;
    }
}

/// Components counted by flood fill over shared vertices.
fn component_count(g: &LabeledHypergraph) -> u32 {
    let k = g.edges.len();
    let shares = |a: usize, b: usize| g.edges[a].vars().iter().any(|x| g.edges[b].vars().iter().any(|y| y.0 == x.0));
    let mut seen = vec![false; k];
    let mut c = 0;
    for s in 0..k {
        if seen[s] {
            continue;
        }
        c += 1;
        let mut stack = vec![s];
        seen[s] = true;
        while let Some(a) = stack.pop() {
            for b in 0..k {
                if !seen[b] && shares(a, b) {
                    seen[b] = true;
                    stack.push(b);
                }
            }
        }
    }
    c
}

#[test]
fn enumeration_examples() {
    assert_eq!(enumerate_s2(&params(2, 1, 1, 1, 1), CENSUS_BUDGET).unwrap().len(), 1);
    assert_eq!(enumerate_s2(&params(2, 2, 2, 2, 1), CENSUS_BUDGET).unwrap().len(), 1);
    assert_eq!(enumerate_s2(&params(2, 2, 2, 1, 2), CENSUS_BUDGET).unwrap().len(), 0);
    let three = enumerate_s2(&params(3, 2, 2, 2, 1), CENSUS_BUDGET).unwrap();
    assert_eq!(three.len(), 1);
    assert!(three[0].edges.iter().all(|e| e.vars() == [(0, 1), (1, 1)]));
}

#[test]
fn ordering_examples() {
    let v0 = PoweredHyperedge::new([(0, 1)]).unwrap();
    let two = LabeledHypergraph { l: 1, edges: vec![v0.clone(), v0.clone()] };
    assert_eq!(ordering_nu0(&two).nu, vec![1, 1]);
    let one = LabeledHypergraph { l: 1, edges: vec![v0] };
    assert_eq!(ordering_nu0(&one).nu[0], 1);

    let a = PoweredHyperedge::multilinear([0, 1]).unwrap();
    let b = PoweredHyperedge::multilinear([2, 3]).unwrap();
    let pairs = LabeledHypergraph { l: 4, edges: vec![a.clone(), b.clone(), a.clone(), b] };
    let ord = ordering_nu0(&pairs);
    assert_eq!(ord.nu[0], 2);
    assert_eq!(components(&pairs).len(), 2);
    assert!(verify_ziq1(&pairs, &ord).iter().all(|&x| x));

    // q=2 single component {0,1} twice: (q-1) k_i - sum delta = 2 - 2 = 0 >= 0.
    let g = LabeledHypergraph { l: 2, edges: vec![a.clone(), a] };
    let ord = ordering_nu0(&g);
    assert_eq!(ord.delta, vec![1, 1]);
    assert_eq!(verify_ziq1(&g, &ord), vec![true]);
}

#[test]
fn sequence_bound_examples() {
    for (p, d) in [(params(2, 1, 1, 1, 1), vec![2]), (params(2, 2, 2, 2, 1), vec![2, 2]), (params(3, 2, 2, 2, 1), vec![3, 3])] {
        let c = run_census(&p, CENSUS_BUDGET).unwrap();
        assert_eq!(c.graphs, 1);
        assert_eq!(s0_bound_u128(&p, &d), Some(1));
        assert_eq!(c.s0_failures, 0);
    }
}

#[test]
fn implied_constant_examples() {
    let c = run_census(&params(2, 1, 1, 1, 1), CENSUS_BUDGET).unwrap();
    assert!((c.max_implied_r0 - 0.5f64.sqrt()).abs() < 1e-12, "{}", c.max_implied_r0);
    let c = run_census(&params(2, 2, 2, 2, 1), CENSUS_BUDGET).unwrap();
    assert!((c.max_implied_r0 - 0.5f64.powf(0.25)).abs() < 1e-12, "{}", c.max_implied_r0);
    let empty = run_census(&params(2, 2, 2, 1, 2), CENSUS_BUDGET).unwrap();
    assert_eq!((empty.graphs, empty.max_implied_r0), (0, 0.0));
}

#[test]
fn budget_is_enforced() {
    let err = enumerate_s2(&params(4, 6, 3, 3, 3), 10).unwrap_err();
    assert!(err.is_budget());
}

fn small_params() -> impl Strategy<Value = CensusParams> {
    (1u32..=3, 1u32..=3).prop_flat_map(|(k, q)| {
        (1..=q, 1..=q, 1..=(q * k / 2).max(1)).prop_map(move |(eta, gamma, l)| params(k, l, q, eta, gamma))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(60))]

    #[test]
    fn enumeration_matches_brute_force(p in small_params()) {
        prop_assume!(p.l >= p.eta);
        let got = enumerate_s2(&p, CENSUS_BUDGET).unwrap();
        let mut want = brute_force_s2(&p);
        let mut sorted = got.clone();
        let key = |g: &LabeledHypergraph| format!("{:?}", g.edges);
        sorted.sort_by_key(key);
        want.sort_by_key(key);
        prop_assert_eq!(sorted, want);

        // Per-degree-vector counts stay under the sequence bound; nu_0 = c.
        let mut by_d: BTreeMap<Vec<u32>, u64> = BTreeMap::new();
        for g in &got {
            *by_d.entry(degrees(g)).or_default() += 1;
            let ord = ordering_nu0(g);
            prop_assert_eq!(ord.nu[0], component_count(g) as u64);
            prop_assert_eq!(ord.nu.iter().sum::<u64>(), p.k as u64);
            let mut order = ord.order.clone();
            order.sort_unstable();
            prop_assert_eq!(order, (0..p.k as usize).collect::<Vec<_>>());
        }
        for (d, count) in by_d {
            prop_assert!(count as u128 <= s0_bound_u128(&p, &d).unwrap());
        }
    }
}

#[test]
fn range_up_to_three_edges() {
    let s = run_range(3, 3, CENSUS_BUDGET).unwrap();
    assert!(s.graphs > 0);
    assert_eq!((s.nu0_failures, s.ziq1_failures, s.elementary_failures, s.s0_failures), (0, 0, 0, 0));
    assert!(s.max_implied_r0.is_finite() && s.max_implied_r0 <= CENSUS_R0_CAP);
}
