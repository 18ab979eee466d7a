//! Brute-force value distribution of a polynomial of finitely supported
//! variables, in exact arithmetic.
//!
//! Every finite f64 is a dyadic rational m * 2^e, so weights, atoms and
//! probabilities given as f64 are exact dyadics, and so is every value and
//! every outcome probability. Outcomes are enumerated with integer
//! arithmetic at a fixed binary scale; the grouped law is then normalized by
//! its exact total mass, so atoms whose f64 probabilities do not sum to
//! exactly 1 are still handled exactly.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::poly::PoweredPolynomial;
use crate::rv::Distribution;

/// Default cap on enumerated outcomes.
pub const ENUMERATION_BUDGET: u128 = 1 << 24;

/// An exact dyadic rational `num * 2^exp`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Dyadic {
    num: BigInt,
    exp: i64,
}

impl Dyadic {
    pub fn from_f64(x: f64) -> Option<Self> {
        if !x.is_finite() {
            return None;
        }
        if x == 0.0 {
            return Some(Dyadic { num: BigInt::zero(), exp: 0 });
        }
        let bits = x.to_bits();
        let sign = if bits >> 63 == 0 { 1i64 } else { -1 };
        let exponent = ((bits >> 52) & 0x7ff) as i64;
        let mantissa = if exponent == 0 { (bits & 0xfffffffffffff) << 1 } else { (bits & 0xfffffffffffff) | 0x10000000000000 };
        let d = Dyadic { num: BigInt::from(sign) * BigInt::from(mantissa), exp: exponent - 1075 };
        Some(d.normalized())
    }

    fn normalized(mut self) -> Self {
        if self.num.is_zero() {
            self.exp = 0;
            return self;
        }
        let tz = self.num.trailing_zeros().unwrap_or(0);
        if tz > 0 {
            self.num >>= tz;
            self.exp += tz as i64;
        }
        self
    }

    pub fn to_rational(&self) -> BigRational {
        if self.exp >= 0 {
            BigRational::from_integer(&self.num << self.exp as usize)
        } else {
            BigRational::new(self.num.clone(), BigInt::one() << (-self.exp) as usize)
        }
    }

    /// Integer numerator at scale `2^scale`; requires `scale <= exp`.
    fn at_scale(&self, scale: i64) -> BigInt {
        debug_assert!(scale <= self.exp || self.num.is_zero());
        if self.num.is_zero() {
            return BigInt::zero();
        }
        &self.num << (self.exp - scale) as usize
    }
}

impl PartialOrd for Dyadic {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Dyadic {
    fn cmp(&self, other: &Self) -> Ordering {
        let s = self.exp.min(other.exp);
        let a = if self.num.is_zero() { BigInt::zero() } else { &self.num << (self.exp - s) as usize };
        let b = if other.num.is_zero() { BigInt::zero() } else { &other.num << (other.exp - s) as usize };
        a.cmp(&b)
    }
}

/// Integer arithmetic used by the enumerator: a fast checked i128 path and
/// an unbounded fallback.
trait Int: Clone + Sized {
    fn from_big(x: &BigInt) -> Option<Self>;
    fn nil() -> Self;
    fn add(&self, o: &Self) -> Option<Self>;
    fn mul(&self, o: &Self) -> Option<Self>;
    fn shl(&self, s: u32) -> Option<Self>;
    fn to_big(&self) -> BigInt;
}

impl Int for i128 {
    fn from_big(x: &BigInt) -> Option<Self> {
        x.to_i128()
    }
    fn nil() -> Self {
        0
    }
    fn add(&self, o: &Self) -> Option<Self> {
        self.checked_add(*o)
    }
    fn mul(&self, o: &Self) -> Option<Self> {
        self.checked_mul(*o)
    }
    fn shl(&self, s: u32) -> Option<Self> {
        if s >= 127 {
            return if *self == 0 { Some(0) } else { None };
        }
        let r = self.checked_mul(1i128 << s)?;
        Some(r)
    }
    fn to_big(&self) -> BigInt {
        BigInt::from(*self)
    }
}

impl Int for BigInt {
    fn from_big(x: &BigInt) -> Option<Self> {
        Some(x.clone())
    }
    fn nil() -> Self {
        Zero::zero()
    }
    fn add(&self, o: &Self) -> Option<Self> {
        Some(self + o)
    }
    fn mul(&self, o: &Self) -> Option<Self> {
        Some(self * o)
    }
    fn shl(&self, s: u32) -> Option<Self> {
        Some(self << s as usize)
    }
    fn to_big(&self) -> BigInt {
        self.clone()
    }
}

/// Exact law of f(Y): distinct values with their probabilities.
#[derive(Clone, Debug)]
pub struct ExactDistribution {
    /// Sorted by value; probabilities sum to exactly 1.
    atoms: Vec<(BigRational, BigRational)>,
    mean: BigRational,
}

struct Prepared {
    /// Per vertex: atom values as integers at scale 2^value_scale.
    values: Vec<Vec<BigInt>>,
    value_scale: i64,
    /// Per vertex: atom probabilities as integers at a per-vertex scale.
    /// The common factor cancels when normalizing by the total mass.
    probs: Vec<Vec<BigInt>>,
    /// Weights as integers at scale 2^weight_scale.
    weights: Vec<BigInt>,
    weight_scale: i64,
}

fn prepare(poly: &PoweredPolynomial, dists: &[Distribution]) -> Result<Prepared> {
    let mut atom_vals = Vec::with_capacity(dists.len());
    let mut atom_probs = Vec::with_capacity(dists.len());
    for (v, d) in dists.iter().enumerate() {
        d.validate()?;
        let atoms = d
            .atoms()
            .ok_or_else(|| Error::NonFiniteSupport(format!("vertex {v} has a {} law", d.name())))?;
        let atoms: Vec<(f64, f64)> = atoms.into_iter().filter(|a| a.1 > 0.0).collect();
        atom_vals.push(atoms.iter().map(|a| Dyadic::from_f64(a.0).expect("finite")).collect::<Vec<_>>());
        atom_probs.push(atoms.iter().map(|a| Dyadic::from_f64(a.1).expect("finite")).collect::<Vec<_>>());
    }
    let min_exp = |xs: &mut dyn Iterator<Item = &Dyadic>| xs.filter(|d| !d.num.is_zero()).map(|d| d.exp).min().unwrap_or(0).min(0);
    let value_scale = min_exp(&mut atom_vals.iter().flatten());
    let values = atom_vals.iter().map(|vs| vs.iter().map(|d| d.at_scale(value_scale)).collect()).collect();
    let mut probs = Vec::with_capacity(dists.len());
    for ps in &atom_probs {
        let s = min_exp(&mut ps.iter());
        probs.push(ps.iter().map(|d| d.at_scale(s)).collect());
    }
    let wd: Vec<Dyadic> = poly
        .terms()
        .iter()
        .map(|t| Dyadic::from_f64(t.1).expect("finite weight"))
        .collect();
    let weight_scale = min_exp(&mut wd.iter());
    let weights = wd.iter().map(|d| d.at_scale(weight_scale)).collect();
    Ok(Prepared { values, value_scale, probs, weights, weight_scale })
}

/// Enumerates all outcomes, returning value numerator -> probability
/// numerator, or None if the integer type overflows.
fn enumerate<I: Int + Eq + std::hash::Hash>(poly: &PoweredPolynomial, prep: &Prepared) -> Option<HashMap<I, BigInt>> {
    let n = prep.values.len();
    let q = poly.q();
    let vals: Vec<Vec<I>> = prep.values.iter().map(|vs| vs.iter().map(I::from_big).collect()).collect::<Option<_>>()?;
    let weights: Vec<I> = prep.weights.iter().map(I::from_big).collect::<Option<_>>()?;
    // Terms of total power below q are shifted so every term sits at scale
    // 2^(weight_scale + q * value_scale).
    let shifts: Vec<u32> = poly
        .terms()
        .iter()
        .map(|t| ((q - t.0.total_power()) as i64 * -prep.value_scale) as u32)
        .collect();
    let mut out: HashMap<I, BigInt> = HashMap::new();
    let mut idx = vec![0usize; n];
    // prefix[v] = product of the chosen probabilities of vertices < v.
    let mut prefix: Vec<BigInt> = vec![BigInt::one(); n + 1];
    for v in 0..n {
        prefix[v + 1] = &prefix[v] * &prep.probs[v][0];
    }
    let mut x: Vec<I> = (0..n).map(|v| vals[v][0].clone()).collect();
    loop {
        let mut total = I::nil();
        for (ti, (h, _)) in poly.terms().iter().enumerate() {
            let mut m = weights[ti].clone();
            for &(v, p) in h.vars() {
                for _ in 0..p {
                    m = m.mul(&x[v as usize])?;
                }
            }
            total = total.add(&m.shl(shifts[ti])?)?;
        }
        let prob = &prefix[n];
        match out.get_mut(&total) {
            Some(acc) => *acc += prob,
            None => {
                out.insert(total, prob.clone());
            }
        }
        // Odometer step, least significant digit last.
        let mut v = n;
        loop {
            if v == 0 {
                return Some(out);
            }
            v -= 1;
            idx[v] += 1;
            if idx[v] < vals[v].len() {
                break;
            }
            idx[v] = 0;
        }
        for u in v..n {
            x[u] = vals[u][idx[u]].clone();
            prefix[u + 1] = &prefix[u] * &prep.probs[u][idx[u]];
        }
    }
}

fn scale_rational(e: i64) -> BigRational {
    if e >= 0 {
        BigRational::from_integer(BigInt::one() << e as usize)
    } else {
        BigRational::new(BigInt::one(), BigInt::one() << (-e) as usize)
    }
}

fn rational_pow(x: &BigRational, k: u32) -> BigRational {
    num_traits::pow(x.clone(), k as usize)
}

fn rat_to_f64(x: &BigRational) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

impl ExactDistribution {
    pub fn new(poly: &PoweredPolynomial, dists: &[Distribution]) -> Result<Self> {
        Self::with_budget(poly, dists, ENUMERATION_BUDGET)
    }

    pub fn with_budget(poly: &PoweredPolynomial, dists: &[Distribution], budget: u128) -> Result<Self> {
        if dists.len() != poly.n() {
            return Err(Error::DimensionMismatch { expected: poly.n(), got: dists.len() });
        }
        let prep = prepare(poly, dists)?;
        let mut outcomes: u128 = 1;
        for p in &prep.probs {
            outcomes = outcomes.saturating_mul(p.len() as u128);
        }
        if outcomes > budget {
            return Err(Error::budget("support enumeration", outcomes, budget));
        }
        let raw: Vec<(BigInt, BigInt)> = match enumerate::<i128>(poly, &prep) {
            Some(m) => m.into_iter().map(|(v, p)| (v.to_big(), p)).collect(),
            None => enumerate::<BigInt>(poly, &prep).expect("unbounded integers").into_iter().collect(),
        };
        let vscale = scale_rational(prep.weight_scale + poly.q() as i64 * prep.value_scale);
        let mass: BigInt = raw.iter().map(|x| &x.1).sum();
        let mut atoms: Vec<(BigRational, BigRational)> = raw
            .into_iter()
            .map(|(v, p)| (BigRational::from_integer(v) * &vscale, BigRational::new(p, mass.clone())))
            .collect();
        atoms.sort_by(|a, b| a.0.cmp(&b.0));
        let mean = atoms.iter().map(|(v, p)| v * p).sum();
        Ok(ExactDistribution { atoms, mean })
    }

    pub fn atoms(&self) -> &[(BigRational, BigRational)] {
        &self.atoms
    }

    pub fn mean(&self) -> &BigRational {
        &self.mean
    }

    /// E[f^k].
    pub fn moment(&self, k: u32) -> BigRational {
        self.atoms.iter().map(|(v, p)| rational_pow(v, k) * p).sum()
    }

    /// E|f - Ef|^k.
    pub fn central_abs_moment(&self, k: u32) -> BigRational {
        self.atoms.iter().map(|(v, p)| rational_pow(&(v - &self.mean).abs(), k) * p).sum()
    }

    /// P[|f - Ef| >= lambda].
    pub fn tail_two_sided(&self, lambda: &BigRational) -> BigRational {
        self.atoms.iter().filter(|(v, _)| &(v - &self.mean).abs() >= lambda).map(|x| &x.1).sum()
    }

    /// P[f - Ef >= lambda].
    pub fn tail_upper(&self, lambda: &BigRational) -> BigRational {
        self.atoms.iter().filter(|(v, _)| &(v - &self.mean) >= lambda).map(|x| &x.1).sum()
    }

    pub fn variance(&self) -> BigRational {
        self.central_abs_moment(2)
    }

    pub fn moment_f64(&self, k: u32) -> f64 {
        rat_to_f64(&self.moment(k))
    }

    pub fn central_abs_moment_f64(&self, k: u32) -> f64 {
        rat_to_f64(&self.central_abs_moment(k))
    }

    pub fn tail_two_sided_f64(&self, lambda: f64) -> f64 {
        rat_to_f64(&self.tail_two_sided(&crate::rv::to_rational(lambda)))
    }

    pub fn tail_upper_f64(&self, lambda: f64) -> f64 {
        rat_to_f64(&self.tail_upper(&crate::rv::to_rational(lambda)))
    }

    /// Exact check of `P[|f - Ef| >= lambda] <= E|f - Ef|^k / lambda^k`.
    pub fn markov_holds(&self, k: u32, lambda: f64) -> bool {
        let l = crate::rv::to_rational(lambda);
        if !l.is_positive() {
            return true;
        }
        self.tail_two_sided(&l) * rational_pow(&l, k) <= self.central_abs_moment(k)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleResult {
    pub moment: f64,
    pub central_moment: f64,
    pub tail_two_sided: f64,
}

/// Exact E[f^k], E|f - Ef|^k and P[|f - Ef| >= lambda] by enumerating the
/// joint support.
pub fn enumerate_oracle(poly: &PoweredPolynomial, dists: &[Distribution], k: u32, lambda: f64) -> Result<OracleResult> {
    let d = ExactDistribution::new(poly, dists)?;
    Ok(OracleResult {
        moment: d.moment_f64(k),
        central_moment: d.central_abs_moment_f64(k),
        tail_two_sided: d.tail_two_sided_f64(lambda),
    })
}
