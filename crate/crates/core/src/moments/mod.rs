//! Centering, exact moment expansion, moment-bound formulas and the
//! Markov-step choice of the moment order.

mod exact;

pub use exact::{enumerate_oracle, Dyadic, ExactDistribution, OracleResult, ENUMERATION_BUDGET};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::poly::{PoweredHyperedge, PoweredPolynomial};
use crate::rv::Distribution;

/// Default cap on distinct per-vertex power profiles during expansion.
pub const PROFILE_CAP: u128 = 10_000_000;
/// Default cap on term tuples for the naive expansion.
pub const TUPLE_CAP: u128 = 10_000_000;
/// Default cap on sub-hyperedges visited while centering.
pub const CENTER_BUDGET: u128 = 10_000_000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CenteredComponent {
    pub eta: usize,
    pub q: u32,
    pub sign: i8,
    /// Monomials over the centered variables `X_{v,tau} = Y_v^tau - E[Y_v^tau]`:
    /// a pair (v, tau) stands for the single variable `X_{v,tau}`.
    pub poly: PoweredPolynomial,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CenteredDecomposition {
    pub constant: f64,
    pub components: Vec<CenteredComponent>,
}

impl CenteredDecomposition {
    pub fn m(&self) -> usize {
        self.components.len()
    }

    /// Value of `constant + sum_i g_i` at the point `y`.
    pub fn evaluate(&self, y: &[f64], dists: &[Distribution]) -> Result<f64> {
        let mut total = self.constant;
        for c in &self.components {
            total += evaluate_centered(&c.poly, y, dists)?;
        }
        Ok(total)
    }
}

/// Evaluates a polynomial whose pairs (v, tau) denote `y_v^tau - E[Y_v^tau]`.
pub fn evaluate_centered(poly: &PoweredPolynomial, y: &[f64], dists: &[Distribution]) -> Result<f64> {
    if y.len() != poly.n() || dists.len() != poly.n() {
        return Err(Error::DimensionMismatch { expected: poly.n(), got: y.len().min(dists.len()) });
    }
    let mut total = 0.0;
    for (h, w) in poly.terms() {
        let mut m = *w;
        for &(v, p) in h.vars() {
            m *= y[v as usize].powi(p as i32) - dists[v as usize].raw_moment(p)?;
        }
        total += m;
    }
    Ok(total)
}

/// Rewrites f over centered variables and groups the nonconstant monomials
/// by (cardinality, total power, sign).
pub fn center(poly: &PoweredPolynomial, dists: &[Distribution]) -> Result<CenteredDecomposition> {
    center_with_budget(poly, dists, CENTER_BUDGET)
}

pub fn center_with_budget(
    poly: &PoweredPolynomial,
    dists: &[Distribution],
    budget: u128,
) -> Result<CenteredDecomposition> {
    if dists.len() != poly.n() {
        return Err(Error::DimensionMismatch { expected: poly.n(), got: dists.len() });
    }
    let mut visits: u128 = 0;
    for (h, _) in poly.terms() {
        if h.cardinality() >= 64 {
            return Err(Error::budget("centering", u128::MAX, budget));
        }
        visits += 1u128 << h.cardinality();
    }
    if visits > budget {
        return Err(Error::budget("centering", visits, budget));
    }
    let mut w_prime: BTreeMap<PoweredHyperedge, f64> = BTreeMap::new();
    for (h, w) in poly.terms() {
        let means: Vec<f64> = h
            .vars()
            .iter()
            .map(|&(v, p)| dists[v as usize].raw_moment(p))
            .collect::<Result<_>>()?;
        for mask in 0u64..(1u64 << h.cardinality()) {
            let mut c = *w;
            for (i, m) in means.iter().enumerate() {
                if mask >> i & 1 == 0 {
                    c *= m;
                }
            }
            *w_prime.entry(h.restrict(mask)).or_insert(0.0) += c;
        }
    }
    let constant = w_prime.remove(&PoweredHyperedge::empty()).unwrap_or(0.0);
    let mut groups: BTreeMap<(usize, u32, i8), Vec<(PoweredHyperedge, f64)>> = BTreeMap::new();
    for (h, w) in w_prime {
        if w == 0.0 {
            continue;
        }
        let sign = if w > 0.0 { 1 } else { -1 };
        groups.entry((h.cardinality(), h.total_power(), sign)).or_default().push((h, w));
    }
    let components = groups
        .into_iter()
        .map(|((eta, q, sign), terms)| {
            Ok(CenteredComponent { eta, q, sign, poly: PoweredPolynomial::new(poly.n(), terms)? })
        })
        .collect::<Result<_>>()?;
    Ok(CenteredDecomposition { constant, components })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExpansionStrategy {
    /// Accumulate by per-vertex power profile.
    Collapsed,
    /// List every k-tuple of terms.
    Naive,
}

fn merge_profile(a: &PoweredHyperedge, b: &PoweredHyperedge) -> PoweredHyperedge {
    let (x, y) = (a.vars(), b.vars());
    let mut out = Vec::with_capacity(x.len() + y.len());
    let (mut i, mut j) = (0, 0);
    while i < x.len() || j < y.len() {
        if j == y.len() || (i < x.len() && x[i].0 < y[j].0) {
            out.push(x[i]);
            i += 1;
        } else if i == x.len() || y[j].0 < x[i].0 {
            out.push(y[j]);
            j += 1;
        } else {
            out.push((x[i].0, x[i].1 + y[j].1));
            i += 1;
            j += 1;
        }
    }
    PoweredHyperedge::from_sorted(out)
}

fn profile_expectation(p: &PoweredHyperedge, dists: &[Distribution]) -> Result<f64> {
    let mut m = 1.0;
    for &(v, d) in p.vars() {
        m *= dists[v as usize].raw_moment(d)?;
        if m == 0.0 {
            break;
        }
    }
    Ok(m)
}

/// E[f(Y)^k] by expanding the power and using independence.
pub fn exact_moment_expansion(poly: &PoweredPolynomial, dists: &[Distribution], k: u32) -> Result<f64> {
    exact_moment_expansion_with(poly, dists, k, ExpansionStrategy::Collapsed, PROFILE_CAP)
}

pub fn exact_moment_expansion_with(
    poly: &PoweredPolynomial,
    dists: &[Distribution],
    k: u32,
    strategy: ExpansionStrategy,
    cap: u128,
) -> Result<f64> {
    if dists.len() != poly.n() {
        return Err(Error::DimensionMismatch { expected: poly.n(), got: dists.len() });
    }
    if k == 0 {
        return Ok(1.0);
    }
    match strategy {
        ExpansionStrategy::Collapsed => collapsed_expansion(poly, dists, k, cap),
        ExpansionStrategy::Naive => naive_expansion(poly, dists, k, cap),
    }
}

fn collapsed_expansion(poly: &PoweredPolynomial, dists: &[Distribution], k: u32, cap: u128) -> Result<f64> {
    let mut cur: BTreeMap<PoweredHyperedge, f64> = BTreeMap::new();
    cur.insert(PoweredHyperedge::empty(), 1.0);
    for _ in 0..k {
        let mut next: BTreeMap<PoweredHyperedge, f64> = BTreeMap::new();
        for (p, c) in &cur {
            for (h, w) in poly.terms() {
                *next.entry(merge_profile(p, h)).or_insert(0.0) += c * w;
            }
            if next.len() as u128 > cap {
                return Err(Error::budget("moment expansion profiles", next.len() as u128, cap));
            }
        }
        cur = next;
    }
    let mut total = 0.0;
    for (p, c) in &cur {
        if *c != 0.0 {
            total += c * profile_expectation(p, dists)?;
        }
    }
    Ok(total)
}

fn naive_expansion(poly: &PoweredPolynomial, dists: &[Distribution], k: u32, cap: u128) -> Result<f64> {
    let t = poly.len() as u128;
    let tuples = t.checked_pow(k).unwrap_or(u128::MAX);
    if tuples > cap {
        return Err(Error::budget("moment expansion tuples", tuples, cap));
    }
    if t == 0 {
        return Ok(0.0);
    }
    let terms = poly.terms();
    // Each leading index is summed sequentially; the partial sums are then
    // added in index order so the result does not depend on scheduling.
    let partial: Vec<Result<f64>> = (0..terms.len())
        .into_par_iter()
        .map(|first| {
            let mut idx = vec![0usize; k as usize - 1];
            let mut sum = 0.0;
            loop {
                let mut prof = terms[first].0.clone();
                let mut w = terms[first].1;
                for &i in &idx {
                    prof = merge_profile(&prof, &terms[i].0);
                    w *= terms[i].1;
                }
                sum += w * profile_expectation(&prof, dists)?;
                let mut pos = 0;
                loop {
                    if pos == idx.len() {
                        return Ok(sum);
                    }
                    idx[pos] += 1;
                    if idx[pos] < terms.len() {
                        break;
                    }
                    idx[pos] = 0;
                    pos += 1;
                }
            }
        })
        .collect();
    let mut total = 0.0;
    for p in partial {
        total += p?;
    }
    Ok(total)
}

/// E[(f - Ef)^k] for even k, by expanding `f - Ef` as a polynomial with a
/// constant term.
pub fn central_moment_expansion(poly: &PoweredPolynomial, dists: &[Distribution], k: u32) -> Result<f64> {
    if k % 2 == 1 {
        return Err(Error::param(format!("central moments need even k, got {k}")));
    }
    let mean = poly.expectation(dists)?;
    exact_moment_expansion(&poly.plus_constant(-mean), dists, k)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LemmaVariant {
    /// Constant enters as R^q.
    General,
    /// Constant enters as R^t with R = C^(Gamma+1).
    GammaVariant,
}

/// Everything the moment-bound formula needs besides k.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentBoundParams {
    pub q: u32,
    pub gamma: u32,
    #[serde(rename = "L")]
    pub l: f64,
    pub mu: Vec<f64>,
    pub variant: LemmaVariant,
    pub constant: f64,
}

impl MomentBoundParams {
    /// ln of the constant factor attached to index t.
    fn ln_r(&self, t: u32) -> f64 {
        match self.variant {
            LemmaVariant::General => self.q as f64 * self.constant.ln(),
            LemmaVariant::GammaVariant => t as f64 * (self.gamma as f64 + 1.0) * self.constant.ln(),
        }
    }

    /// ln of `R Gamma^t L^t mu_t` (the common factor of both term families).
    fn ln_base(&self, t: u32) -> f64 {
        let mu_t = self.mu.get(t as usize).copied().unwrap_or(0.0);
        self.ln_r(t) + t as f64 * (self.gamma.max(1) as f64).ln() + t as f64 * self.l.ln() + mu_t.ln()
    }

    fn mu0(&self) -> f64 {
        self.mu.first().copied().unwrap_or(0.0)
    }

    fn validate(&self) -> Result<()> {
        if !(self.constant > 0.0) || !(self.l > 0.0) {
            return Err(Error::param("constant and L must be positive"));
        }
        Ok(())
    }
}

/// ln of the moment bound
/// `max_t max{ (k R Gamma^t L^t mu_t mu_0)^(k/2), (k^t R Gamma^t L^t mu_t)^k }`,
/// t = 1..q. Returns -inf when every term vanishes.
pub fn moment_lemma_bound(params: &MomentBoundParams, k: u32) -> Result<f64> {
    if k < 2 || k % 2 == 1 {
        return Err(Error::param(format!("k must be even and >= 2, got {k}")));
    }
    params.validate()?;
    Ok(ln_lemma(params, k as f64))
}

fn ln_lemma(params: &MomentBoundParams, k: f64) -> f64 {
    let ln_mu0 = params.mu0().ln();
    let mut best = f64::NEG_INFINITY;
    for t in 1..=params.q {
        let base = params.ln_base(t);
        if base == f64::NEG_INFINITY {
            continue;
        }
        let a = 0.5 * k * (k.ln() + base + ln_mu0);
        let b = k * (t as f64 * k.ln() + base);
        best = best.max(a).max(b);
    }
    best
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MarkovChoice {
    /// ln K; +inf when no term is active.
    pub ln_k_target: f64,
    pub k_star: u64,
    pub log_bound: f64,
}

/// Picks the largest even k* in (K-2, K] and returns the Markov bound
/// `E|f - Ef|^k* / lambda^k*` in log space, capped at 0. When K < 2 no
/// useful even order exists and the bound is 1.
pub fn markov_optimize(params: &MomentBoundParams, lambda: f64) -> Result<MarkovChoice> {
    params.validate()?;
    if !(lambda > 0.0) {
        return Ok(MarkovChoice { ln_k_target: f64::NEG_INFINITY, k_star: 2, log_bound: 0.0 });
    }
    let ln_l = lambda.ln();
    let ln_mu0 = params.mu0().ln();
    let mut ln_k = f64::INFINITY;
    for t in 1..=params.q {
        let base = params.ln_base(t);
        if base == f64::NEG_INFINITY {
            continue;
        }
        if ln_mu0 > f64::NEG_INFINITY {
            ln_k = ln_k.min(2.0 * ln_l - 2.0 - base - ln_mu0);
        }
        ln_k = ln_k.min((ln_l - 1.0 - base) / t as f64);
    }
    if ln_k == f64::INFINITY {
        // f is constant: the deviation is zero surely.
        return Ok(MarkovChoice { ln_k_target: ln_k, k_star: 2, log_bound: f64::NEG_INFINITY });
    }
    let big_k = ln_k.exp();
    if big_k < 2.0 {
        return Ok(MarkovChoice { ln_k_target: ln_k, k_star: 2, log_bound: 0.0 });
    }
    let k_star = 2.0 * (big_k / 2.0).floor();
    let log_bound = (ln_lemma(params, k_star) - k_star * ln_l).min(0.0);
    Ok(MarkovChoice { ln_k_target: ln_k, k_star: k_star.min(u64::MAX as f64) as u64, log_bound })
}

/// The even integer in (K-2, K] for K >= 2, and 2 otherwise.
pub fn even_order(big_k: f64) -> u64 {
    if big_k < 2.0 {
        2
    } else {
        2 * (big_k / 2.0).floor() as u64
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rv::Distribution::*;

    fn he(v: &[(u32, u32)]) -> PoweredHyperedge {
        PoweredHyperedge::new(v.iter().cloned()).unwrap()
    }

    #[test]
    fn center_product_of_two() {
        let f = PoweredPolynomial::new(2, [(he(&[(0, 1), (1, 1)]), 1.0)]).unwrap();
        let c = center(&f, &vec![Bernoulli { p: 0.5 }; 2]).unwrap();
        assert_eq!(c.constant, 0.25);
        assert_eq!(c.m(), 2);
        let lin = c.components.iter().find(|g| g.eta == 1).unwrap();
        assert_eq!(lin.poly.terms(), &[(he(&[(0, 1)]), 0.5), (he(&[(1, 1)]), 0.5)]);
        let quad = c.components.iter().find(|g| g.eta == 2).unwrap();
        assert_eq!(quad.poly.terms(), &[(he(&[(0, 1), (1, 1)]), 1.0)]);
    }

    #[test]
    fn center_zero_mean_is_identity() {
        let f = PoweredPolynomial::complete_multilinear(4, 2, 1.5).unwrap();
        let c = center(&f, &vec![Rademacher {}; 4]).unwrap();
        assert_eq!(c.constant, 0.0);
        assert_eq!(c.m(), 1);
        assert_eq!(c.components[0].poly, f);
    }

    #[test]
    fn center_square() {
        let f = PoweredPolynomial::new(1, [(he(&[(0, 2)]), 1.0)]).unwrap();
        let d = vec![Exponential { rate: 1.0 }];
        let c = center(&f, &d).unwrap();
        assert_eq!(c.constant, 2.0);
        assert_eq!(c.m(), 1);
        assert_eq!(c.components[0].poly, f);
        assert_eq!(c.evaluate(&[3.0], &d).unwrap(), 9.0);
    }

    #[test]
    fn expansion_examples() {
        let f = PoweredPolynomial::new(2, [(he(&[(0, 1)]), 1.0), (he(&[(1, 1)]), 1.0)]).unwrap();
        let b = vec![Bernoulli { p: 0.5 }; 2];
        assert_eq!(exact_moment_expansion(&f, &b, 2).unwrap(), 1.5);
        let g = PoweredPolynomial::new(2, [(he(&[(0, 1), (1, 1)]), 1.0)]).unwrap();
        assert_eq!(exact_moment_expansion(&g, &vec![Rademacher {}; 2], 2).unwrap(), 1.0);
        assert_eq!(exact_moment_expansion(&f, &b, 1).unwrap(), f.expectation(&b).unwrap());
    }

    #[test]
    fn strategies_agree() {
        let f = PoweredPolynomial::complete_multilinear(5, 2, 0.5).unwrap();
        let d = vec![Bernoulli { p: 0.3 }; 5];
        for k in 1..=4 {
            let a = exact_moment_expansion_with(&f, &d, k, ExpansionStrategy::Collapsed, PROFILE_CAP).unwrap();
            let b = exact_moment_expansion_with(&f, &d, k, ExpansionStrategy::Naive, TUPLE_CAP).unwrap();
            assert!((a - b).abs() <= 1e-12 * a.abs());
        }
        assert!(exact_moment_expansion_with(&f, &d, 8, ExpansionStrategy::Naive, 1000).unwrap_err().is_budget());
    }

    #[test]
    fn odd_central_rejected() {
        let f = PoweredPolynomial::complete_multilinear(3, 1, 1.0).unwrap();
        assert!(central_moment_expansion(&f, &vec![Rademacher {}; 3], 3).is_err());
    }

    fn params(mu: Vec<f64>, r: f64) -> MomentBoundParams {
        MomentBoundParams { q: mu.len() as u32 - 1, gamma: 1, l: 1.0, mu, variant: LemmaVariant::General, constant: r }
    }

    #[test]
    fn lemma_linear_case() {
        for r in [1.0, 3.0, 10.0] {
            let b = moment_lemma_bound(&params(vec![1.0, 1.0], r), 2).unwrap();
            let want = (2.0 * r).max(4.0 * r * r).ln();
            assert!((b - want).abs() < 1e-12);
        }
        assert_eq!(moment_lemma_bound(&params(vec![0.0, 0.0], 2.0), 2).unwrap(), f64::NEG_INFINITY);
        assert!(moment_lemma_bound(&params(vec![1.0, 1.0], 2.0), 3).is_err());
    }

    #[test]
    fn lemma_monotone_in_mu() {
        let a = moment_lemma_bound(&params(vec![3.0, 2.0, 1.0], 2.0), 6).unwrap();
        let b = moment_lemma_bound(&params(vec![6.0, 4.0, 2.0], 2.0), 6).unwrap();
        assert!(b - a >= 6.0 * 2f64.ln() - 1e-12);
    }

    #[test]
    fn even_orders() {
        assert_eq!(even_order(7.3), 6);
        assert_eq!(even_order(2.0), 2);
        assert_eq!(even_order(1.2), 2);
    }

    #[test]
    fn markov_small_target_is_trivial() {
        let m = markov_optimize(&params(vec![10.0, 1.0], 2.0), 1.0).unwrap();
        assert!(m.ln_k_target.exp() < 2.0);
        assert_eq!((m.k_star, m.log_bound), (2, 0.0));
        let m = markov_optimize(&params(vec![10.0, 1.0], 1.0), 1000.0).unwrap();
        assert!(m.k_star >= 2 && m.log_bound < -1.0);
    }
}
