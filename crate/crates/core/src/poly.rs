//! Polynomials as weighted powered hypergraphs:
//! `f(x) = sum_h w_h prod_{v in h} x_v^tau_hv`.

use itertools::Itertools;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::rv::Distribution;

/// Default cap on generated cycle terms.
pub const CYCLE_TERM_CAP: u64 = 10_000_000;

/// Largest n for which the permanent is expanded into monomials.
pub const PERMANENT_POLY_MAX_N: usize = 8;

/// A monomial: sorted distinct vertices, each with a power >= 1.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PoweredHyperedge {
    vars: Vec<(u32, u32)>,
}

impl PoweredHyperedge {
    pub fn empty() -> Self {
        Self::default()
    }

    /// Builds a hyperedge, merging repeated vertices by adding powers.
    pub fn new(vars: impl IntoIterator<Item = (u32, u32)>) -> Result<Self> {
        let mut map: BTreeMap<u32, u32> = BTreeMap::new();
        for (v, p) in vars {
            if p == 0 {
                return Err(Error::param(format!("vertex {v} has power 0")));
            }
            *map.entry(v).or_default() += p;
        }
        Ok(PoweredHyperedge { vars: map.into_iter().collect() })
    }

    /// Wraps pairs already sorted by vertex with positive powers.
    pub(crate) fn from_sorted(vars: Vec<(u32, u32)>) -> Self {
        debug_assert!(vars.windows(2).all(|w| w[0].0 < w[1].0));
        debug_assert!(vars.iter().all(|v| v.1 > 0));
        PoweredHyperedge { vars }
    }

    pub fn multilinear(vertices: impl IntoIterator<Item = u32>) -> Result<Self> {
        Self::new(vertices.into_iter().map(|v| (v, 1)))
    }

    pub fn vars(&self) -> &[(u32, u32)] {
        &self.vars
    }

    pub fn cardinality(&self) -> usize {
        self.vars.len()
    }

    pub fn total_power(&self) -> u32 {
        self.vars.iter().map(|v| v.1).sum()
    }

    pub fn max_power(&self) -> u32 {
        self.vars.iter().map(|v| v.1).max().unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.vars.is_empty()
    }

    /// The sub-hyperedge keeping the pairs whose bit is set in `mask`.
    pub fn restrict(&self, mask: u64) -> Self {
        PoweredHyperedge {
            vars: self
                .vars
                .iter()
                .enumerate()
                .filter(|(i, _)| mask >> i & 1 == 1)
                .map(|(_, &x)| x)
                .collect(),
        }
    }

    /// `self` extends `base`: contains its vertices with equal powers there.
    pub fn extends(&self, base: &PoweredHyperedge) -> bool {
        base.vars.iter().all(|b| self.vars.binary_search(b).is_ok())
    }

    fn shifted(&self, by: u32) -> Self {
        PoweredHyperedge { vars: self.vars.iter().map(|&(v, p)| (v + by, p)).collect() }
    }

    pub fn evaluate(&self, x: &[f64]) -> f64 {
        self.vars.iter().map(|&(v, p)| x[v as usize].powi(p as i32)).product()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PolyJson", into = "PolyJson")]
pub struct PoweredPolynomial {
    n: usize,
    terms: Vec<(PoweredHyperedge, f64)>,
    q: u32,
    gamma: u32,
}

#[derive(Serialize, Deserialize)]
struct TermJson {
    vars: Vec<(u32, u32)>,
    w: f64,
}

#[derive(Serialize, Deserialize)]
struct PolyJson {
    n: usize,
    terms: Vec<TermJson>,
}

impl TryFrom<PolyJson> for PoweredPolynomial {
    type Error = Error;
    fn try_from(j: PolyJson) -> Result<Self> {
        let terms = j
            .terms
            .into_iter()
            .map(|t| Ok((PoweredHyperedge::new(t.vars)?, t.w)))
            .collect::<Result<Vec<_>>>()?;
        PoweredPolynomial::new(j.n, terms)
    }
}

impl From<PoweredPolynomial> for PolyJson {
    fn from(p: PoweredPolynomial) -> Self {
        PolyJson {
            n: p.n,
            terms: p.terms.into_iter().map(|(h, w)| TermJson { vars: h.vars, w }).collect(),
        }
    }
}

impl PoweredPolynomial {
    /// Builds a polynomial over `n` vertices; repeated monomials are merged
    /// by adding weights and terms that cancel to zero are dropped.
    pub fn new(n: usize, terms: impl IntoIterator<Item = (PoweredHyperedge, f64)>) -> Result<Self> {
        let mut map: BTreeMap<PoweredHyperedge, f64> = BTreeMap::new();
        for (h, w) in terms {
            if !w.is_finite() {
                return Err(Error::param(format!("non-finite weight {w}")));
            }
            if let Some(&(v, _)) = h.vars.last() {
                if v as usize >= n {
                    return Err(Error::param(format!("vertex {v} out of range for n={n}")));
                }
            }
            *map.entry(h).or_default() += w;
        }
        Ok(Self::from_merged(n, map.into_iter().filter(|t| t.1 != 0.0).collect()))
    }

    fn from_merged(n: usize, terms: Vec<(PoweredHyperedge, f64)>) -> Self {
        let q = terms.iter().map(|t| t.0.total_power()).max().unwrap_or(0);
        let gamma = terms.iter().map(|t| t.0.max_power()).max().unwrap_or(0);
        PoweredPolynomial { n, terms, q, gamma }
    }

    pub fn zero(n: usize) -> Self {
        Self::from_merged(n, Vec::new())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> &[(PoweredHyperedge, f64)] {
        &self.terms
    }

    /// Maximum total power over the terms.
    pub fn q(&self) -> u32 {
        self.q
    }

    /// Maximum single-variable power.
    pub fn gamma(&self) -> u32 {
        self.gamma
    }

    pub fn is_multilinear(&self) -> bool {
        self.gamma <= 1
    }

    pub fn has_nonnegative_weights(&self) -> bool {
        self.terms.iter().all(|t| t.1 >= 0.0)
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self::from_merged(self.n, self.terms.iter().map(|(h, w)| (h.clone(), w * c)).filter(|t| t.1 != 0.0).collect())
    }

    /// Adds `c` to the constant term.
    pub fn plus_constant(&self, c: f64) -> Self {
        let mut terms = self.terms.clone();
        terms.push((PoweredHyperedge::empty(), c));
        Self::new(self.n, terms).expect("valid terms")
    }

    /// Term-list concatenation followed by merging.
    pub fn add(&self, other: &PoweredPolynomial) -> Result<Self> {
        let n = self.n.max(other.n);
        Self::new(n, self.terms.iter().chain(other.terms.iter()).cloned())
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: len });
        }
        Ok(())
    }

    pub fn evaluate(&self, x: &[f64]) -> Result<f64> {
        self.check_len(x.len())?;
        Ok(self.terms.iter().map(|(h, w)| w * h.evaluate(x)).sum())
    }

    /// E f(Y) for independent Y_v with the given laws.
    pub fn expectation(&self, dists: &[Distribution]) -> Result<f64> {
        self.check_len(dists.len())?;
        let mut total = 0.0;
        for (h, w) in &self.terms {
            let mut m = *w;
            for &(v, p) in h.vars() {
                m *= dists[v as usize].raw_moment(p)?;
            }
            total += m;
        }
        Ok(total)
    }

    /// The product of `f` with a copy of `g` whose vertices are shifted past
    /// those of `f`, so the two factors are independent.
    pub fn product(f: &PoweredPolynomial, g: &PoweredPolynomial) -> Self {
        let shift = f.n as u32;
        let mut terms = Vec::with_capacity(f.terms.len() * g.terms.len());
        for (hf, wf) in &f.terms {
            for (hg, wg) in &g.terms {
                let mut vars = hf.vars.clone();
                vars.extend(hg.shifted(shift).vars);
                terms.push((PoweredHyperedge::from_sorted(vars), wf * wg));
            }
        }
        // Unions of distinct sorted pairs stay distinct and sorted.
        Self::from_merged(f.n + g.n, terms)
    }

    /// `scale` times the sum of all C(n, q) multilinear monomials of degree q.
    pub fn complete_multilinear(n: usize, q: usize, scale: f64) -> Result<Self> {
        if q < 1 || q > n {
            return Err(Error::param(format!("complete_multilinear needs 1 <= q <= n, got q={q}, n={n}")));
        }
        let terms = (0..n as u32)
            .combinations(q)
            .map(|c| (PoweredHyperedge::from_sorted(c.into_iter().map(|v| (v, 1)).collect()), scale))
            .collect();
        Ok(Self::from_merged(n, terms))
    }

    /// Permanent of an n x n matrix of variables. General case: variable
    /// `i*n + j` for entry (i, j). Symmetric case: one variable per pair
    /// `i <= j`, numbered row-major over the upper triangle.
    pub fn permanent(n: usize, symmetric: bool) -> Result<Self> {
        if n == 0 || n > PERMANENT_POLY_MAX_N {
            return Err(Error::SizeLimit(format!(
                "permanent polynomial supports 1 <= n <= {PERMANENT_POLY_MAX_N}, got {n}"
            )));
        }
        let nvars = if symmetric { n * (n + 1) / 2 } else { n * n };
        let terms = (0..n).permutations(n).map(|perm| {
            let vars = perm.iter().enumerate().map(|(i, &j)| {
                let v = if symmetric { sym_index(n, i.min(j), i.max(j)) } else { i * n + j };
                (v as u32, 1)
            });
            (PoweredHyperedge::new(vars).expect("positive powers"), 1.0)
        });
        Self::new(nvars, terms)
    }

    /// Simple q-cycles through vertex 0 in K_n, one variable per edge
    /// (numbered by [`edge_index`]).
    pub fn cycles(n: usize, q: usize, cap: u64) -> Result<Self> {
        if q < 3 || q > n {
            return Err(Error::param(format!("cycles need 3 <= q <= n, got q={q}, n={n}")));
        }
        let count = cycle_count(n as u64, q as u64)
            .ok_or_else(|| Error::SizeLimit("cycle count overflows".into()))?;
        if count > cap as u128 {
            return Err(Error::SizeLimit(format!("{count} cycles exceed the cap {cap}")));
        }
        let mut terms = Vec::with_capacity(count as usize);
        for path in (1..n).permutations(q - 1) {
            if path[0] > path[q - 2] {
                continue;
            }
            let mut edges = Vec::with_capacity(q);
            edges.push(edge_index(n, 0, path[0]));
            for w in path.windows(2) {
                edges.push(edge_index(n, w[0], w[1]));
            }
            edges.push(edge_index(n, 0, path[q - 2]));
            terms.push((PoweredHyperedge::multilinear(edges.into_iter().map(|e| e as u32))?, 1.0));
        }
        Ok(Self::from_merged(n * (n - 1) / 2, {
            terms.sort_by(|a, b| a.0.cmp(&b.0));
            terms
        }))
    }
}

/// Index of the unordered pair (i, j), i <= j, in the row-major upper
/// triangle of an n x n matrix including the diagonal.
pub fn sym_index(n: usize, i: usize, j: usize) -> usize {
    debug_assert!(i <= j && j < n);
    i * n - i * i.saturating_sub(1) / 2 + (j - i)
}

/// Index of edge {a, b} of K_n, a != b, in lexicographic pair order.
pub fn edge_index(n: usize, a: usize, b: usize) -> usize {
    let (i, j) = if a < b { (a, b) } else { (b, a) };
    i * (2 * n - i - 1) / 2 + (j - i - 1)
}

/// Number of simple q-cycles through a fixed vertex of K_n:
/// (q-1)! C(n-1, q-1) / 2.
pub fn cycle_count(n: u64, q: u64) -> Option<u128> {
    if q < 3 || q > n {
        return Some(0);
    }
    let mut c: u128 = 1;
    for i in 0..(q - 1) {
        c = c.checked_mul((n - 1 - i) as u128)?;
    }
    Some(c / 2)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn he(v: &[(u32, u32)]) -> PoweredHyperedge {
        PoweredHyperedge::new(v.iter().cloned()).unwrap()
    }

    #[test]
    fn evaluate_examples() {
        let f = PoweredPolynomial::new(2, [(he(&[(0, 3), (1, 3)]), 1.0), (he(&[(1, 2)]), 1.0)]).unwrap();
        assert_eq!(f.evaluate(&[1.0, 2.0]).unwrap(), 12.0);
        assert_eq!(PoweredPolynomial::zero(3).evaluate(&[1.0, 2.0, 3.0]).unwrap(), 0.0);
        let c = PoweredPolynomial::complete_multilinear(3, 2, 1.0).unwrap();
        assert_eq!(c.evaluate(&[1.0, 1.0, 1.0]).unwrap(), 3.0);
        assert!(c.evaluate(&[1.0]).is_err());
        assert_eq!((f.q(), f.gamma()), (6, 3));
    }

    #[test]
    fn merging_and_json() {
        let f = PoweredPolynomial::new(3, [(he(&[(2, 1), (0, 1)]), 1.0), (he(&[(0, 1), (2, 1)]), 2.0)]).unwrap();
        assert_eq!(f.len(), 1);
        assert_eq!(f.terms()[0].1, 3.0);
        let s = serde_json::to_string(&f).unwrap();
        assert_eq!(s, r#"{"n":3,"terms":[{"vars":[[0,1],[2,1]],"w":3.0}]}"#);
        let g: PoweredPolynomial = serde_json::from_str(&s).unwrap();
        assert_eq!(f, g);
        assert!(serde_json::from_str::<PoweredPolynomial>(r#"{"n":1,"terms":[{"vars":[[3,1]],"w":1}]}"#).is_err());
    }

    #[test]
    fn expectation_examples() {
        use Distribution::*;
        let p = PoweredPolynomial::permanent(2, false).unwrap();
        assert_eq!(p.expectation(&vec![Rademacher {}; 4]).unwrap(), 0.0);
        let c = PoweredPolynomial::complete_multilinear(4, 2, 1.0).unwrap();
        assert_eq!(c.expectation(&vec![Bernoulli { p: 0.5 }; 4]).unwrap(), 1.5);
        let s = PoweredPolynomial::new(2, [(he(&[(1, 2)]), 1.0)]).unwrap();
        assert_eq!(s.expectation(&vec![Bernoulli { p: 0.3 }; 2]).unwrap(), 0.3);
    }

    #[test]
    fn product_examples() {
        let f = PoweredPolynomial::new(2, [(he(&[(0, 1)]), 2.0), (he(&[(1, 2)]), 1.0)]).unwrap();
        let g = PoweredPolynomial::new(3, [(he(&[(0, 1)]), 3.0), (he(&[(1, 1)]), 1.0), (he(&[(2, 1)]), 1.0)])
            .unwrap();
        let fg = PoweredPolynomial::product(&f, &g);
        assert_eq!((fg.n(), fg.len()), (5, 6));
        let one = PoweredPolynomial::product(
            &PoweredPolynomial::new(1, [(he(&[(0, 1)]), 2.0)]).unwrap(),
            &PoweredPolynomial::new(1, [(he(&[(0, 1)]), 3.0)]).unwrap(),
        );
        assert_eq!(one.terms(), &[(he(&[(0, 1), (1, 1)]), 6.0)]);
        assert!(PoweredPolynomial::product(&PoweredPolynomial::zero(2), &g).is_empty());
    }

    #[test]
    fn complete_multilinear_counts() {
        assert_eq!(PoweredPolynomial::complete_multilinear(4, 2, 1.0).unwrap().len(), 6);
        let c = PoweredPolynomial::complete_multilinear(3, 3, 2.0).unwrap();
        assert_eq!(c.terms(), &[(he(&[(0, 1), (1, 1), (2, 1)]), 2.0)]);
        assert_eq!(PoweredPolynomial::complete_multilinear(5, 1, 1.0).unwrap().len(), 5);
        assert!(PoweredPolynomial::complete_multilinear(2, 3, 1.0).is_err());
    }

    #[test]
    fn permanent_examples() {
        let g = PoweredPolynomial::permanent(2, false).unwrap();
        assert_eq!(g.terms(), &[(he(&[(0, 1), (3, 1)]), 1.0), (he(&[(1, 1), (2, 1)]), 1.0)]);
        let s = PoweredPolynomial::permanent(2, true).unwrap();
        // pairs: (0,0)->0, (0,1)->1, (1,1)->2
        assert_eq!(s.terms(), &[(he(&[(0, 1), (2, 1)]), 1.0), (he(&[(1, 2)]), 1.0)]);
        assert_eq!(s.gamma(), 2);
        assert_eq!(PoweredPolynomial::permanent(3, false).unwrap().len(), 6);
        assert!(PoweredPolynomial::permanent(9, false).is_err());
    }

    #[test]
    fn symmetric_indices_cover_triangle() {
        for n in 1..8 {
            let mut seen = vec![];
            for i in 0..n {
                for j in i..n {
                    seen.push(sym_index(n, i, j));
                }
            }
            assert_eq!(seen, (0..n * (n + 1) / 2).collect::<Vec<_>>());
        }
    }

    #[test]
    fn cycle_examples() {
        assert_eq!(PoweredPolynomial::cycles(4, 3, CYCLE_TERM_CAP).unwrap().len(), 3);
        assert_eq!(PoweredPolynomial::cycles(5, 3, CYCLE_TERM_CAP).unwrap().len(), 6);
        assert_eq!(PoweredPolynomial::cycles(4, 4, CYCLE_TERM_CAP).unwrap().len(), 3);
        assert!(PoweredPolynomial::cycles(12, 5, 10).is_err());
    }
}
