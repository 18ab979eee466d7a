//! Exhaustive census of labeled powered hypergraphs with all degrees >= 2.
//!
//! Hypergraphs are ordered sequences of k powered hyperedges over the vertex
//! set [l], each of cardinality eta, total power q and max power <= Gamma.
//! No isomorphism reduction: the counting lemmas count labeled objects.

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::logspace::ln_factorial;
use crate::poly::PoweredHyperedge;

/// Default cap on `(edges per slot)^k`.
pub const CENSUS_BUDGET: u128 = 100_000_000;

/// Default ceiling for the implied main-counting constant.
pub const CENSUS_R0_CAP: f64 = 1000.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CensusParams {
    pub k: u32,
    pub l: u32,
    pub q: u32,
    pub eta: u32,
    pub gamma: u32,
}

impl CensusParams {
    pub fn validate(&self) -> Result<()> {
        if self.k == 0 || self.q == 0 || self.eta == 0 || self.gamma == 0 {
            return Err(Error::param("k, q, eta and gamma must be positive"));
        }
        if self.eta > self.q {
            return Err(Error::param(format!("eta={} exceeds q={}", self.eta, self.q)));
        }
        if self.l > 64 {
            return Err(Error::param("l must be at most 64"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabeledHypergraph {
    pub l: u32,
    pub edges: Vec<PoweredHyperedge>,
}

/// Compositions of q into `parts` parts in [1, gamma], lexicographic.
pub fn compositions(q: u32, parts: u32, gamma: u32) -> Vec<Vec<u32>> {
    fn rec(left: u32, parts: u32, gamma: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if parts == 0 {
            if left == 0 {
                out.push(cur.clone());
            }
            return;
        }
        for x in 1..=gamma.min(left) {
            if left - x < parts - 1 {
                break;
            }
            cur.push(x);
            rec(left - x, parts - 1, gamma, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(q, parts, gamma, &mut Vec::new(), &mut out);
    out
}

fn subsets(l: u32, size: u32) -> Vec<Vec<u32>> {
    fn rec(start: u32, l: u32, size: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if cur.len() as u32 == size {
            out.push(cur.clone());
            return;
        }
        for v in start..l {
            cur.push(v);
            rec(v + 1, l, size, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, l, size, &mut Vec::new(), &mut out);
    out
}

/// Every admissible edge for one slot, subsets outer and power vectors inner.
pub fn slot_edges(p: &CensusParams) -> Vec<PoweredHyperedge> {
    let comps = compositions(p.q, p.eta, p.gamma);
    let mut out = Vec::new();
    for s in subsets(p.l, p.eta) {
        for c in &comps {
            out.push(PoweredHyperedge::new(s.iter().copied().zip(c.iter().copied())).expect("distinct vertices"));
        }
    }
    out
}

/// `(edges per slot)^k`, or `None` on overflow.
pub fn raw_space(p: &CensusParams) -> Option<u128> {
    (slot_edges(p).len() as u128).checked_pow(p.k)
}

fn check_budget(p: &CensusParams, budget: u128) -> Result<()> {
    p.validate()?;
    match raw_space(p) {
        Some(n) if n <= budget => Ok(()),
        Some(n) => Err(Error::budget("census", n, budget)),
        None => Err(Error::budget("census", u128::MAX, budget)),
    }
}

/// Depth-first walk over all S2 sequences; prunes once the remaining slots
/// cannot lift every vertex to degree 2.
fn walk(
    edges: &[PoweredHyperedge],
    p: &CensusParams,
    seq: &mut Vec<usize>,
    deg: &mut Vec<u32>,
    visit: &mut dyn FnMut(&[usize]),
) {
    let left = p.k as usize - seq.len();
    let deficit: u32 = deg.iter().map(|&d| 2u32.saturating_sub(d)).sum();
    if deficit > p.eta * left as u32 {
        return;
    }
    if left == 0 {
        visit(seq);
        return;
    }
    for (i, e) in edges.iter().enumerate() {
        for &(v, _) in e.vars() {
            deg[v as usize] += 1;
        }
        seq.push(i);
        walk(edges, p, seq, deg, visit);
        seq.pop();
        for &(v, _) in e.vars() {
            deg[v as usize] -= 1;
        }
    }
}

fn for_each_first(p: &CensusParams, edges: &[PoweredHyperedge], first: usize, visit: &mut dyn FnMut(&[usize])) {
    let mut deg = vec![0u32; p.l as usize];
    for &(v, _) in edges[first].vars() {
        deg[v as usize] += 1;
    }
    let mut seq = vec![first];
    walk(edges, p, &mut seq, &mut deg, visit);
}

/// All S2 hypergraphs, in lexicographic order of slot indices.
pub fn enumerate_s2(p: &CensusParams, budget: u128) -> Result<Vec<LabeledHypergraph>> {
    check_budget(p, budget)?;
    let edges = slot_edges(p);
    let mut out = Vec::new();
    for first in 0..edges.len() {
        for_each_first(p, &edges, first, &mut |seq| {
            out.push(LabeledHypergraph { l: p.l, edges: seq.iter().map(|&i| edges[i].clone()).collect() });
        });
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ordering {
    /// Edge indices in deletion order.
    pub order: Vec<usize>,
    /// Vertices deleted at each step.
    pub v_sets: Vec<Vec<u32>>,
    /// Last power per vertex.
    pub delta: Vec<u32>,
    /// `nu[t]` counts steps whose residual power `q - sum delta` is t.
    pub nu: Vec<u64>,
}

fn line_graph(g: &LabeledHypergraph) -> Vec<Vec<usize>> {
    let k = g.edges.len();
    let masks: Vec<u64> = g.edges.iter().map(|e| e.vars().iter().fold(0u64, |m, &(v, _)| m | 1 << v)).collect();
    (0..k).map(|a| (0..k).filter(|&b| b != a && masks[a] & masks[b] != 0).collect()).collect()
}

/// A deletion that never splits a component of the remaining line graph:
/// the lowest isolated edge if any, otherwise the lowest leaf of a DFS tree
/// rooted at the lowest remaining edge.
fn pick_next(adj: &[Vec<usize>], alive: &[bool]) -> usize {
    let live = |v: usize| alive[v];
    if let Some(v) = (0..adj.len()).find(|&v| live(v) && !adj[v].iter().any(|&u| live(u))) {
        return v;
    }
    let root = (0..adj.len()).find(|&v| live(v)).expect("nonempty");
    let mut seen = vec![false; adj.len()];
    let mut has_child = vec![false; adj.len()];
    let mut stack = vec![root];
    let mut tree = vec![root];
    seen[root] = true;
    while let Some(&v) = stack.last() {
        match adj[v].iter().copied().find(|&u| live(u) && !seen[u]) {
            Some(u) => {
                seen[u] = true;
                has_child[v] = true;
                stack.push(u);
                tree.push(u);
            }
            None => {
                stack.pop();
            }
        }
    }
    tree.into_iter().filter(|&v| !has_child[v]).min().expect("a finite tree has a leaf")
}

fn max_total_power(g: &LabeledHypergraph) -> u32 {
    g.edges.iter().map(|e| e.total_power()).max().unwrap_or(0)
}

pub fn ordering_nu0(g: &LabeledHypergraph) -> Ordering {
    let k = g.edges.len();
    let q = max_total_power(g);
    let adj = line_graph(g);
    let mut alive = vec![true; k];
    let mut order = Vec::with_capacity(k);
    for _ in 0..k {
        let v = pick_next(&adj, &alive);
        alive[v] = false;
        order.push(v);
    }
    let mut delta = vec![0u32; g.l as usize];
    let mut v_sets = Vec::with_capacity(k);
    let mut nu = vec![0u64; q as usize + 1];
    for (s, &e) in order.iter().enumerate() {
        let later = &order[s + 1..];
        let mut vs = Vec::new();
        let mut removed = 0;
        for &(v, p) in g.edges[e].vars() {
            if !later.iter().any(|&f| g.edges[f].vars().iter().any(|x| x.0 == v)) {
                vs.push(v);
                delta[v as usize] = p;
                removed += p;
            }
        }
        nu[(q - removed) as usize] += 1;
        v_sets.push(vs);
    }
    Ordering { order, v_sets, delta, nu }
}

/// Vertex sets and edge indices of the connected components, by lowest vertex.
pub fn components(g: &LabeledHypergraph) -> Vec<(Vec<u32>, Vec<usize>)> {
    let l = g.l as usize;
    let mut parent: Vec<usize> = (0..l).collect();
    fn find(p: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while p[r] != r {
            r = p[r];
        }
        let mut y = x;
        while p[y] != r {
            let n = p[y];
            p[y] = r;
            y = n;
        }
        r
    }
    for e in &g.edges {
        let vs = e.vars();
        for w in vs.windows(2) {
            let (a, b) = (find(&mut parent, w[0].0 as usize), find(&mut parent, w[1].0 as usize));
            parent[a.max(b)] = a.min(b);
        }
    }
    let mut by_root: BTreeMap<usize, (Vec<u32>, Vec<usize>)> = BTreeMap::new();
    let covered: Vec<bool> = (0..l).map(|v| g.edges.iter().any(|e| e.vars().iter().any(|x| x.0 as usize == v))).collect();
    for v in 0..l {
        if covered[v] {
            let r = find(&mut parent, v);
            by_root.entry(r).or_default().0.push(v as u32);
        }
    }
    for (i, e) in g.edges.iter().enumerate() {
        if let Some(&(v, _)) = e.vars().first() {
            let r = find(&mut parent, v as usize);
            by_root.entry(r).or_default().1.push(i);
        }
    }
    by_root.into_values().collect()
}

/// `(q-1) k_i - sum_{v in C_i} delta_v >= q - 2` for every component.
pub fn verify_ziq1(g: &LabeledHypergraph, ord: &Ordering) -> Vec<bool> {
    let q = max_total_power(g) as i64;
    components(g)
        .iter()
        .map(|(vs, es)| {
            let lhs = (q - 1) * es.len() as i64 - vs.iter().map(|&v| ord.delta[v as usize] as i64).sum::<i64>();
            lhs >= q - 2
        })
        .collect()
}

/// `eta <= l_i <= eta k_i / 2`, `eta c <= l <= eta k / 2`, `1 <= c <= k / 2`.
pub fn elementary_facts(g: &LabeledHypergraph, eta: u32) -> bool {
    let comps = components(g);
    let (eta, c, k, l) = (eta as usize, comps.len(), g.edges.len(), g.l as usize);
    comps.iter().all(|(vs, es)| eta <= vs.len() && 2 * vs.len() <= eta * es.len())
        && eta * c <= l
        && 2 * l <= eta * k
        && 1 <= c
        && 2 * c <= k
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ClassKey {
    pub c: u32,
    pub d: Vec<u32>,
    pub big_d: Vec<u32>,
    pub delta: Vec<u32>,
    pub nu: Vec<u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CensusRecord {
    pub k: u32,
    pub l: u32,
    pub c: u32,
    pub d: Vec<u32>,
    pub big_d: Vec<u32>,
    pub delta: Vec<u32>,
    pub nu: Vec<u64>,
    /// Sum of last powers.
    pub big_delta: u32,
    pub count: u64,
    /// Smallest constant satisfying the main counting inequality for the
    /// (c, d, D, delta) class containing this record.
    pub implied_r0: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Census {
    pub params: CensusParams,
    pub graphs: u64,
    pub records: Vec<CensusRecord>,
    /// Hypergraphs where the ordering failed `nu_0 = c`.
    pub nu0_failures: u64,
    pub ziq1_failures: u64,
    pub elementary_failures: u64,
    /// Degree vectors whose total count exceeds the sequence-count bound.
    pub s0_failures: u64,
    pub max_implied_r0: f64,
}

#[derive(Default)]
struct Acc {
    graphs: u64,
    classes: BTreeMap<ClassKey, u64>,
    nu0: u64,
    ziq1: u64,
    elementary: u64,
}

impl Acc {
    fn merge(mut self, other: Acc) -> Result<Acc> {
        self.graphs += other.graphs;
        self.nu0 += other.nu0;
        self.ziq1 += other.ziq1;
        self.elementary += other.elementary;
        for (k, v) in other.classes {
            let e = self.classes.entry(k).or_insert(0);
            *e = e.checked_add(v).ok_or_else(|| Error::SizeLimit("census count overflow".into()))?;
        }
        Ok(self)
    }
}

fn degree_stats(g: &LabeledHypergraph) -> (Vec<u32>, Vec<u32>) {
    let mut d = vec![0u32; g.l as usize];
    let mut big_d = vec![0u32; g.l as usize];
    for e in &g.edges {
        for &(v, p) in e.vars() {
            d[v as usize] += 1;
            big_d[v as usize] += p;
        }
    }
    (d, big_d)
}

fn binom(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::from(0u32);
    }
    let mut r = BigUint::one();
    for i in 0..k {
        r = r * BigUint::from(n - i) / BigUint::from(i + 1);
    }
    r
}

/// `C(q-1, eta-1)^k prod_v C(k, d_v)`.
pub fn s0_bound(p: &CensusParams, d: &[u32]) -> BigUint {
    let mut b = binom(p.q as u64 - 1, p.eta as u64 - 1).pow(p.k);
    for &dv in d {
        b *= binom(p.k as u64, dv as u64);
    }
    b
}

pub fn check_s0_bound(p: &CensusParams, d: &[u32], count: u64) -> bool {
    BigUint::from(count) <= s0_bound(p, d)
}

/// `(count prod D_v!/delta_v! / (Gamma^a k^b))^(1/(qk))` with
/// `a = qk - l - sum delta`, `b = qk - c(q-1) - sum(delta_v - 1)`.
/// An empty class contributes 0.
pub fn implied_r0(p: &CensusParams, c: u32, big_d: &[u32], delta: &[u32], count: u64) -> f64 {
    if count == 0 {
        return 0.0;
    }
    let qk = (p.q * p.k) as f64;
    let sum_delta: f64 = delta.iter().map(|&x| x as f64).sum();
    let l = p.l as f64;
    let mut ln_lhs = (count as f64).ln();
    for (&dv, &dl) in big_d.iter().zip(delta) {
        ln_lhs += ln_factorial(dv as u64) - ln_factorial(dl as u64);
    }
    let a = qk - l - sum_delta;
    let b = qk - c as f64 * (p.q as f64 - 1.0) - (sum_delta - l);
    let ln_rhs = a * (p.gamma as f64).ln() + b * (p.k as f64).ln();
    ((ln_lhs - ln_rhs) / qk).exp()
}

fn record_graph(g: &LabeledHypergraph, p: &CensusParams, acc: &mut Acc) {
    let ord = ordering_nu0(g);
    let c = components(g).len() as u32;
    let (d, big_d) = degree_stats(g);
    acc.graphs += 1;
    if ord.nu[0] != c as u64 {
        acc.nu0 += 1;
    }
    if !verify_ziq1(g, &ord).iter().all(|&b| b) {
        acc.ziq1 += 1;
    }
    if !elementary_facts(g, p.eta) {
        acc.elementary += 1;
    }
    let key = ClassKey { c, d, big_d, delta: ord.delta, nu: ord.nu };
    *acc.classes.entry(key).or_insert(0) += 1;
}

/// Enumerates S2 for one parameter tuple and evaluates every check.
pub fn run_census(p: &CensusParams, budget: u128) -> Result<Census> {
    check_budget(p, budget)?;
    let edges = slot_edges(p);
    let acc = (0..edges.len())
        .into_par_iter()
        .map(|first| {
            let mut acc = Acc::default();
            for_each_first(p, &edges, first, &mut |seq| {
                let g = LabeledHypergraph { l: p.l, edges: seq.iter().map(|&i| edges[i].clone()).collect() };
                record_graph(&g, p, &mut acc);
            });
            Ok(acc)
        })
        .try_reduce(Acc::default, |a, b| a.merge(b))?;

    // Counting-lemma classes ignore the ordering statistics.
    let mut by_class: BTreeMap<(u32, &[u32], &[u32], &[u32]), u64> = BTreeMap::new();
    let mut by_degree: BTreeMap<&[u32], u64> = BTreeMap::new();
    for (k, &n) in &acc.classes {
        *by_class.entry((k.c, &k.d, &k.big_d, &k.delta)).or_insert(0) += n;
        *by_degree.entry(&k.d).or_insert(0) += n;
    }
    let s0_failures = by_degree.iter().filter(|(d, &n)| !check_s0_bound(p, d, n)).count() as u64;
    let mut max_r0: f64 = 0.0;
    let records = acc
        .classes
        .iter()
        .map(|(key, &count)| {
            let class_count = by_class[&(key.c, key.d.as_slice(), key.big_d.as_slice(), key.delta.as_slice())];
            let r0 = implied_r0(p, key.c, &key.big_d, &key.delta, class_count);
            max_r0 = max_r0.max(r0);
            CensusRecord {
                k: p.k,
                l: p.l,
                c: key.c,
                d: key.d.clone(),
                big_d: key.big_d.clone(),
                delta: key.delta.clone(),
                nu: key.nu.clone(),
                big_delta: key.delta.iter().sum(),
                count,
                implied_r0: r0,
            }
        })
        .collect();
    Ok(Census {
        params: *p,
        graphs: acc.graphs,
        records,
        nu0_failures: acc.nu0,
        ziq1_failures: acc.ziq1,
        elementary_failures: acc.elementary,
        s0_failures,
        max_implied_r0: max_r0,
    })
}

fn join<T: ToString>(v: &[T]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(";")
}

impl Census {
    /// Columns k,l,c,dbar,Dbar,deltabar,nubar,count,implied_R0; vector
    /// cells are `;`-separated.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("k,l,c,dbar,Dbar,deltabar,nubar,count,implied_R0\n");
        for r in &self.records {
            s.push_str(&format!(
                "{},{},{},{},{},{},{},{},{:e}\n",
                r.k,
                r.l,
                r.c,
                join(&r.d),
                join(&r.big_d),
                join(&r.delta),
                join(&r.nu),
                r.count,
                r.implied_r0
            ));
        }
        s
    }

    pub fn total(&self) -> u64 {
        self.records.iter().map(|r| r.count).sum()
    }
}

/// Every tuple of the validation range: k <= k_max, q <= q_max, eta <= q,
/// Gamma <= q, l <= qk/2 (empty tuples skipped).
pub fn validation_range(k_max: u32, q_max: u32) -> Vec<CensusParams> {
    let mut out = Vec::new();
    for k in 1..=k_max {
        for q in 1..=q_max {
            for eta in 1..=q {
                for gamma in 1..=q {
                    if compositions(q, eta, gamma).is_empty() {
                        continue;
                    }
                    for l in 1..=(q * k / 2) {
                        if l < eta {
                            continue;
                        }
                        out.push(CensusParams { k, l, q, eta, gamma });
                    }
                }
            }
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RangeSummary {
    pub tuples: usize,
    pub graphs: u64,
    pub nu0_failures: u64,
    pub ziq1_failures: u64,
    pub elementary_failures: u64,
    pub s0_failures: u64,
    pub max_implied_r0: f64,
    pub argmax: Option<CensusParams>,
}

pub fn run_range(k_max: u32, q_max: u32, budget: u128) -> Result<RangeSummary> {
    let mut s = RangeSummary {
        tuples: 0,
        graphs: 0,
        nu0_failures: 0,
        ziq1_failures: 0,
        elementary_failures: 0,
        s0_failures: 0,
        max_implied_r0: 0.0,
        argmax: None,
    };
    for p in validation_range(k_max, q_max) {
        let c = run_census(&p, budget)?;
        s.tuples += 1;
        s.graphs += c.graphs;
        s.nu0_failures += c.nu0_failures;
        s.ziq1_failures += c.ziq1_failures;
        s.elementary_failures += c.elementary_failures;
        s.s0_failures += c.s0_failures;
        if c.max_implied_r0 > s.max_implied_r0 {
            s.max_implied_r0 = c.max_implied_r0;
            s.argmax = Some(p);
        }
    }
    Ok(s)
}

/// Exact class sizes as integers, for callers comparing against formulas.
pub fn s0_bound_u128(p: &CensusParams, d: &[u32]) -> Option<u128> {
    s0_bound(p, d).to_u128()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(k: u32, l: u32, q: u32, eta: u32, gamma: u32) -> CensusParams {
        CensusParams { k, l, q, eta, gamma }
    }

    #[test]
    fn enumeration_examples() {
        assert_eq!(enumerate_s2(&p(2, 1, 1, 1, 1), CENSUS_BUDGET).unwrap().len(), 1);
        assert_eq!(enumerate_s2(&p(2, 2, 2, 2, 1), CENSUS_BUDGET).unwrap().len(), 1);
        assert_eq!(enumerate_s2(&p(2, 2, 2, 1, 2), CENSUS_BUDGET).unwrap().len(), 0);
    }

    #[test]
    fn compositions_lex() {
        assert_eq!(compositions(4, 2, 3), vec![vec![1, 3], vec![2, 2], vec![3, 1]]);
        assert!(compositions(3, 1, 2).is_empty());
    }

    #[test]
    fn ordering_examples() {
        let e = PoweredHyperedge::multilinear([0]).unwrap();
        let g = LabeledHypergraph { l: 1, edges: vec![e.clone(), e.clone()] };
        assert_eq!(ordering_nu0(&g).nu, vec![1, 1]);

        let single = LabeledHypergraph { l: 1, edges: vec![e] };
        assert_eq!(ordering_nu0(&single).nu[0], 1);

        let a = PoweredHyperedge::multilinear([0, 1]).unwrap();
        let b = PoweredHyperedge::multilinear([2, 3]).unwrap();
        let g = LabeledHypergraph { l: 4, edges: vec![a.clone(), b.clone(), a, b] };
        assert_eq!(ordering_nu0(&g).nu[0], 2);
        assert_eq!(components(&g).len(), 2);
    }

    #[test]
    fn ziq1_examples() {
        let e = PoweredHyperedge::multilinear([0, 1]).unwrap();
        let g = LabeledHypergraph { l: 2, edges: vec![e.clone(), e] };
        let ord = ordering_nu0(&g);
        assert_eq!(ord.delta, vec![1, 1]);
        assert_eq!(verify_ziq1(&g, &ord), vec![true]);
    }

    #[test]
    fn s0_examples() {
        assert_eq!(s0_bound_u128(&p(2, 1, 1, 1, 1), &[2]), Some(1));
        assert_eq!(s0_bound_u128(&p(2, 2, 2, 2, 1), &[2, 2]), Some(1));
        let c = run_census(&p(3, 2, 2, 2, 1), CENSUS_BUDGET).unwrap();
        assert_eq!(c.total(), 1);
        assert_eq!(s0_bound_u128(&p(3, 2, 2, 2, 1), &[3, 3]), Some(1));
    }

    #[test]
    fn implied_r0_examples() {
        let c = run_census(&p(2, 1, 1, 1, 1), CENSUS_BUDGET).unwrap();
        assert!((c.max_implied_r0 - 0.5f64.sqrt()).abs() < 1e-12);
        let c = run_census(&p(2, 2, 2, 2, 1), CENSUS_BUDGET).unwrap();
        assert!((c.max_implied_r0 - 0.5f64.powf(0.25)).abs() < 1e-12);
        assert_eq!(implied_r0(&p(2, 2, 2, 2, 1), 1, &[2, 2], &[1, 1], 0), 0.0);
    }

    #[test]
    fn budget() {
        assert!(run_census(&p(6, 8, 3, 3, 1), 1000).unwrap_err().is_budget());
    }
}
