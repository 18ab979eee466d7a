//! Smoothness parameters.
//!
//! For a sub-hyperedge `h0` of total power r, the extension mass is
//! `sum_{h extends h0} |w_h| prod_{v in h \ h0} E|Y_v^tau_hv|`, where
//! "extends" means h contains h0's vertices with exactly h0's powers. `mu_r`
//! is the largest extension mass over all `h0` of power r. Any `h0` that is
//! not a sub-hyperedge of some term has no extensions, so only term subsets
//! are visited.

use serde::{Deserialize, Serialize};
use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::poly::{PoweredHyperedge, PoweredPolynomial};
use crate::rv::Distribution;

/// Default cap on visited sub-hyperedges.
pub const MU_BUDGET: u128 = 10_000_000;

/// Two extension masses within this relative distance count as a tie.
const TIE_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MuProfile {
    pub q: u32,
    pub values: Vec<f64>,
    pub witnesses: Vec<Option<PoweredHyperedge>>,
}

impl MuProfile {
    pub fn mu(&self, r: usize) -> f64 {
        self.values.get(r).copied().unwrap_or(0.0)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MuValue {
    pub r: u32,
    pub value: f64,
    pub witness: Option<PoweredHyperedge>,
}

/// Per-term absolute moments `E|Y_v^tau|`, aligned with the term's pairs.
fn term_abs_moments(h: &PoweredHyperedge, dists: &[Distribution]) -> Result<Vec<f64>> {
    h.vars().iter().map(|&(v, p)| dists[v as usize].abs_moment(p)).collect()
}

fn check_inputs(poly: &PoweredPolynomial, dists: &[Distribution]) -> Result<()> {
    if dists.len() != poly.n() {
        return Err(Error::DimensionMismatch { expected: poly.n(), got: dists.len() });
    }
    Ok(())
}

fn subset_count(poly: &PoweredPolynomial, budget: u128) -> Result<u128> {
    let mut total: u128 = 0;
    for (h, _) in poly.terms() {
        let c = h.cardinality();
        if c >= 64 {
            return Err(Error::budget("smoothness", u128::MAX, budget));
        }
        total += 1u128 << c;
    }
    if total > budget {
        return Err(Error::budget("smoothness", total, budget));
    }
    Ok(total)
}

/// Accumulates extension masses for every sub-hyperedge whose power passes
/// `keep`, keyed by the sub-hyperedge.
fn accumulate(
    poly: &PoweredPolynomial,
    dists: &[Distribution],
    keep: impl Fn(u32) -> bool,
) -> Result<HashMap<PoweredHyperedge, f64>> {
    let mut acc: HashMap<PoweredHyperedge, f64> = HashMap::new();
    for (h, w) in poly.terms() {
        let m = term_abs_moments(h, dists)?;
        let c = h.cardinality();
        let vars = h.vars();
        for mask in 0u64..(1u64 << c) {
            let mut power = 0;
            let mut mass = w.abs();
            for (i, &(_, p)) in vars.iter().enumerate() {
                if mask >> i & 1 == 1 {
                    power += p;
                } else {
                    mass *= m[i];
                }
            }
            if keep(power) {
                *acc.entry(h.restrict(mask)).or_insert(0.0) += mass;
            }
        }
    }
    Ok(acc)
}

/// Max with ties broken toward the lexicographically smallest key.
fn best<'a>(it: impl Iterator<Item = (&'a PoweredHyperedge, &'a f64)>) -> Option<(f64, PoweredHyperedge)> {
    let items: Vec<_> = it.collect();
    let max = items.iter().map(|x| *x.1).fold(f64::NEG_INFINITY, f64::max);
    if items.is_empty() {
        return None;
    }
    let witness = items
        .iter()
        .filter(|x| *x.1 >= max - TIE_TOL * max.abs())
        .map(|x| x.0)
        .min()
        .expect("nonempty");
    Some((max, witness.clone()))
}

/// `mu_r` and its witness, visiting at most `budget` sub-hyperedges.
pub fn mu_with_budget(poly: &PoweredPolynomial, dists: &[Distribution], r: u32, budget: u128) -> Result<MuValue> {
    check_inputs(poly, dists)?;
    if r > poly.q() {
        return Err(Error::param(format!("r={r} exceeds q={}", poly.q())));
    }
    subset_count(poly, budget)?;
    let acc = accumulate(poly, dists, |p| p == r)?;
    Ok(match best(acc.iter()) {
        Some((value, w)) => MuValue { r, value, witness: Some(w) },
        None => MuValue { r, value: 0.0, witness: None },
    })
}

pub fn mu(poly: &PoweredPolynomial, dists: &[Distribution], r: u32) -> Result<MuValue> {
    mu_with_budget(poly, dists, r, MU_BUDGET)
}

pub fn mu_profile_with_budget(poly: &PoweredPolynomial, dists: &[Distribution], budget: u128) -> Result<MuProfile> {
    check_inputs(poly, dists)?;
    subset_count(poly, budget)?;
    let q = poly.q();
    let acc = accumulate(poly, dists, |_| true)?;
    let mut by_power: Vec<Vec<(&PoweredHyperedge, &f64)>> = vec![Vec::new(); q as usize + 1];
    for (h, v) in &acc {
        by_power[h.total_power() as usize].push((h, v));
    }
    let mut values = Vec::with_capacity(q as usize + 1);
    let mut witnesses = Vec::with_capacity(q as usize + 1);
    for group in by_power {
        match best(group.into_iter()) {
            Some((v, w)) => {
                values.push(v);
                witnesses.push(Some(w));
            }
            None => {
                values.push(0.0);
                witnesses.push(None);
            }
        }
    }
    Ok(MuProfile { q, values, witnesses })
}

pub fn mu_profile(poly: &PoweredPolynomial, dists: &[Distribution]) -> Result<MuProfile> {
    mu_profile_with_budget(poly, dists, MU_BUDGET)
}

/// `mu_i` of a product of independent factors from the factor profiles:
/// `max over i1 + i2 = i of mu_i1(f) mu_i2(g)`.
pub fn product_profile(f: &[f64], g: &[f64]) -> Vec<f64> {
    if f.is_empty() || g.is_empty() {
        return Vec::new();
    }
    let q = f.len() + g.len() - 2;
    (0..=q)
        .map(|i| {
            (0..f.len())
                .filter(|&a| i >= a && i - a < g.len())
                .map(|a| f[a] * g[i - a])
                .fold(0.0, f64::max)
        })
        .collect()
}
