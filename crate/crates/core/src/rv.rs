//! Distribution families with analytic moments, sampling, and
//! moment-boundedness certificates.
//!
//! A variable Z is moment bounded with parameter L when
//! `E|Z|^i <= i * L * E|Z|^(i-1)` for every integer `i >= 1`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, Signed, ToPrimitive, Zero};
use rand_distr::Distribution as _;
use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;
use std::f64::consts::{LN_2, PI, SQRT_2};

use crate::error::{Error, Result};
use crate::rng::RandomStream;

/// Largest moment order the analytic formulas are asked for.
pub const D_MAX: u32 = 64;

/// Relative slack used when checking the moment-boundedness inequality.
pub const MOMENT_BOUND_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum Distribution {
    Bernoulli { p: f64 },
    ScaledBernoulli { p: f64, value: f64 },
    Rademacher {},
    Uniform { a: f64, b: f64 },
    Exponential { rate: f64 },
    Normal { mean: f64, sd: f64 },
    Poisson { mean: f64 },
    /// Support {1, 2, ...} with P(i) = (1-p)^(i-1) p.
    Geometric { p: f64 },
    Binomial { n: u64, p: f64 },
    FiniteSupport { atoms: Vec<(f64, f64)> },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundRule {
    /// |Z| <= L surely.
    Bounded,
    /// Nonnegative log-concave density, L = E[X].
    NonnegativeLogConcave,
    /// Log-concave density, L = E|X| / ln 2.
    LogConcave,
    /// Nonnegative integer log-concave pmf, L = 1 + E[X].
    NonnegativeIntegerLogConcave,
    /// Integer log-concave pmf on both signs, L = max of the two
    /// conditional absolute means. Stated without proof in the source.
    IntegerLogConcave,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundCertificate {
    #[serde(rename = "L")]
    pub l: f64,
    pub rule: BoundRule,
    pub unproven: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentBoundReport {
    #[serde(rename = "L")]
    pub l: f64,
    pub i_max: u32,
    pub holds: bool,
    pub worst_index: u32,
    pub worst_ratio: f64,
}

fn check_prob(p: f64, what: &str) -> Result<()> {
    if !(0.0..=1.0).contains(&p) || p.is_nan() {
        return Err(Error::param(format!("{what}: probability {p} outside [0,1]")));
    }
    Ok(())
}

fn check_finite(x: f64, what: &str) -> Result<()> {
    if !x.is_finite() {
        return Err(Error::param(format!("{what}: non-finite value {x}")));
    }
    Ok(())
}

/// Stirling numbers of the second kind S(n, k) for n, k <= D_MAX.
fn stirling2() -> &'static Vec<Vec<f64>> {
    use std::sync::OnceLock;
    static TABLE: OnceLock<Vec<Vec<f64>>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let n = D_MAX as usize + 1;
        let mut s = vec![vec![0.0; n]; n];
        s[0][0] = 1.0;
        for i in 1..n {
            for k in 1..=i {
                s[i][k] = k as f64 * s[i - 1][k] + s[i - 1][k - 1];
            }
        }
        s
    })
}

fn factorial(d: u32) -> f64 {
    (1..=d).fold(1.0, |a, i| a * i as f64)
}

fn std_normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}

/// Upper tail of the standard normal, accurate far into the tail.
fn std_normal_sf(x: f64) -> f64 {
    0.5 * erfc(x / SQRT_2)
}

/// E[Z^j ; Z > a] for standard normal Z, j = 0..=d.
fn truncated_normal_moments(a: f64, d: u32) -> Vec<f64> {
    let mut t = vec![0.0; d as usize + 1];
    t[0] = std_normal_sf(a);
    if d >= 1 {
        t[1] = std_normal_pdf(a);
    }
    let phi = std_normal_pdf(a);
    for j in 2..=d as usize {
        t[j] = a.powi(j as i32 - 1) * phi + (j - 1) as f64 * t[j - 2];
    }
    t
}

fn binom_f64(n: u32, k: u32) -> f64 {
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// E[(m + sd Z)^d ; Z > a].
fn shifted_truncated_moment(m: f64, sd: f64, a: f64, d: u32) -> f64 {
    let t = truncated_normal_moments(a, d);
    (0..=d)
        .map(|j| binom_f64(d, j) * m.powi((d - j) as i32) * sd.powi(j as i32) * t[j as usize])
        .sum()
}

/// Sum over j of S(d, j) times the j-th factorial moment.
fn from_factorial_moments(d: u32, fact: impl Fn(u32) -> f64) -> f64 {
    if d == 0 {
        return 1.0;
    }
    let s = stirling2();
    (1..=d).map(|j| s[d as usize][j as usize] * fact(j)).sum()
}

fn ln_from_factorial_moments(d: u32, ln_fact: impl Fn(u32) -> f64) -> f64 {
    if d == 0 {
        return 0.0;
    }
    let s = stirling2();
    let terms: Vec<f64> = (1..=d)
        .filter(|&j| s[d as usize][j as usize] > 0.0)
        .map(|j| s[d as usize][j as usize].ln() + ln_fact(j))
        .collect();
    crate::logspace::log_sum_exp(&terms)
}

fn ln_falling(n: u64, j: u32) -> f64 {
    (0..j as u64).map(|i| ((n - i) as f64).ln()).sum()
}

impl Distribution {
    pub fn validate(&self) -> Result<()> {
        use Distribution::*;
        match self {
            Bernoulli { p } => check_prob(*p, "bernoulli"),
            ScaledBernoulli { p, value } => {
                check_prob(*p, "scaled_bernoulli")?;
                check_finite(*value, "scaled_bernoulli")
            }
            Rademacher {} => Ok(()),
            Uniform { a, b } => {
                check_finite(*a, "uniform")?;
                check_finite(*b, "uniform")?;
                if a >= b {
                    return Err(Error::param(format!("uniform: need a < b, got [{a}, {b}]")));
                }
                Ok(())
            }
            Exponential { rate } => {
                if !(*rate > 0.0) || !rate.is_finite() {
                    return Err(Error::param(format!("exponential: rate {rate} must be > 0")));
                }
                Ok(())
            }
            Normal { mean, sd } => {
                check_finite(*mean, "normal")?;
                if !(*sd > 0.0) || !sd.is_finite() {
                    return Err(Error::param(format!("normal: sd {sd} must be > 0")));
                }
                Ok(())
            }
            Poisson { mean } => {
                if !(*mean > 0.0) || !mean.is_finite() {
                    return Err(Error::param(format!("poisson: mean {mean} must be > 0")));
                }
                Ok(())
            }
            Geometric { p } => {
                if !(*p > 0.0 && *p <= 1.0) {
                    return Err(Error::param(format!("geometric: p {p} must be in (0,1]")));
                }
                Ok(())
            }
            Binomial { p, .. } => check_prob(*p, "binomial"),
            FiniteSupport { atoms } => {
                if atoms.is_empty() {
                    return Err(Error::param("finite_support: no atoms"));
                }
                let mut total = 0.0;
                for &(v, p) in atoms {
                    check_finite(v, "finite_support")?;
                    check_prob(p, "finite_support")?;
                    total += p;
                }
                if (total - 1.0).abs() > 1e-12 {
                    return Err(Error::param(format!(
                        "finite_support: probabilities sum to {total}, not 1"
                    )));
                }
                Ok(())
            }
        }
    }

    pub fn name(&self) -> &'static str {
        use Distribution::*;
        match self {
            Bernoulli { .. } => "bernoulli",
            ScaledBernoulli { .. } => "scaled_bernoulli",
            Rademacher {} => "rademacher",
            Uniform { .. } => "uniform",
            Exponential { .. } => "exponential",
            Normal { .. } => "normal",
            Poisson { .. } => "poisson",
            Geometric { .. } => "geometric",
            Binomial { .. } => "binomial",
            FiniteSupport { .. } => "finite_support",
        }
    }

    /// Atoms of a distribution with finite support, or None for the
    /// families with infinite support.
    pub fn atoms(&self) -> Option<Vec<(f64, f64)>> {
        use Distribution::*;
        match self {
            Bernoulli { p } => Some(vec![(0.0, 1.0 - p), (1.0, *p)]),
            ScaledBernoulli { p, value } => Some(vec![(0.0, 1.0 - p), (*value, *p)]),
            Rademacher {} => Some(vec![(-1.0, 0.5), (1.0, 0.5)]),
            FiniteSupport { atoms } => Some(atoms.clone()),
            Binomial { n, p } => Some(
                (0..=*n)
                    .map(|k| (k as f64, crate::logspace::ln_binom_pmf(*n, *p, k).exp()))
                    .collect(),
            ),
            _ => None,
        }
    }

    fn check_order(d: u32) -> Result<()> {
        if d > D_MAX {
            return Err(Error::UnsupportedMoment(format!("order {d} exceeds d_max {D_MAX}")));
        }
        Ok(())
    }

    /// E|Y|^d.
    pub fn abs_moment(&self, d: u32) -> Result<f64> {
        self.validate()?;
        Self::check_order(d)?;
        if d == 0 {
            return Ok(1.0);
        }
        use Distribution::*;
        let v = match self {
            Bernoulli { p } => *p,
            ScaledBernoulli { p, value } => p * value.abs().powi(d as i32),
            Rademacher {} => 1.0,
            Uniform { a, b } => {
                let (a, b) = (*a, *b);
                let e = d as i32 + 1;
                let w = (d + 1) as f64 * (b - a);
                if a >= 0.0 {
                    (b.powi(e) - a.powi(e)) / w
                } else if b <= 0.0 {
                    (a.abs().powi(e) - b.abs().powi(e)) / w
                } else {
                    (a.abs().powi(e) + b.powi(e)) / w
                }
            }
            Exponential { rate } => factorial(d) / rate.powi(d as i32),
            Normal { mean, sd } => {
                let a = -mean / sd;
                shifted_truncated_moment(*mean, *sd, a, d)
                    + shifted_truncated_moment(-mean, *sd, -a, d)
            }
            Poisson { .. } | Geometric { .. } | Binomial { .. } => self.raw_moment(d)?,
            FiniteSupport { atoms } => exact_atom_sum(atoms, d, true),
        };
        Ok(v)
    }

    /// Signed E[Y^d].
    pub fn raw_moment(&self, d: u32) -> Result<f64> {
        self.validate()?;
        Self::check_order(d)?;
        if d == 0 {
            return Ok(1.0);
        }
        use Distribution::*;
        let v = match self {
            Bernoulli { p } => *p,
            ScaledBernoulli { p, value } => p * value.powi(d as i32),
            Rademacher {} => {
                if d % 2 == 0 {
                    1.0
                } else {
                    0.0
                }
            }
            Uniform { a, b } => {
                let e = d as i32 + 1;
                (b.powi(e) - a.powi(e)) / ((d + 1) as f64 * (b - a))
            }
            Exponential { rate } => factorial(d) / rate.powi(d as i32),
            Normal { mean, sd } => {
                // Sum over even j of C(d,j) mean^(d-j) sd^j (j-1)!!
                let mut total = 0.0;
                let mut dfact = 1.0;
                for j in (0..=d).step_by(2) {
                    if j >= 2 {
                        dfact *= (j - 1) as f64;
                    }
                    total += binom_f64(d, j) * mean.powi((d - j) as i32) * sd.powi(j as i32) * dfact;
                }
                total
            }
            Poisson { mean } => from_factorial_moments(d, |j| mean.powi(j as i32)),
            Geometric { p } => {
                let p = *p;
                from_factorial_moments(d, |j| factorial(j) * (1.0 - p).powi(j as i32 - 1) / p.powi(j as i32))
            }
            Binomial { n, p } => {
                let (n, p) = (*n, *p);
                from_factorial_moments(d, |j| {
                    if j as u64 > n {
                        0.0
                    } else {
                        (0..j as u64).map(|i| (n - i) as f64).product::<f64>() * p.powi(j as i32)
                    }
                })
            }
            FiniteSupport { atoms } => exact_atom_sum(atoms, d, false),
        };
        Ok(v)
    }

    /// ln E|Y|^d, switching to log-space summation when the direct value
    /// leaves the comfortable floating-point range.
    pub fn ln_abs_moment(&self, d: u32) -> Result<f64> {
        let direct = self.abs_moment(d)?;
        if direct == 0.0 {
            return Ok(f64::NEG_INFINITY);
        }
        if direct.is_finite() && direct < 1e300 && direct > 1e-300 {
            return Ok(direct.ln());
        }
        use Distribution::*;
        let v = match self {
            Bernoulli { p } => p.ln(),
            ScaledBernoulli { p, value } => p.ln() + d as f64 * value.abs().ln(),
            Uniform { a, b } => {
                let m = a.abs().max(b.abs());
                // E|Y|^d <= m^d, and the leading term dominates for large d.
                let e = d as i32 + 1;
                let (lo, hi) = (a.abs() / m, b.abs() / m);
                let inner = if *a >= 0.0 {
                    hi.powi(e) - lo.powi(e)
                } else if *b <= 0.0 {
                    lo.powi(e) - hi.powi(e)
                } else {
                    lo.powi(e) + hi.powi(e)
                };
                (d + 1) as f64 * m.ln() + inner.ln() - ((d + 1) as f64 * (b - a)).ln()
            }
            Exponential { rate } => (1..=d).map(|i| (i as f64).ln()).sum::<f64>() - d as f64 * rate.ln(),
            Poisson { mean } => ln_from_factorial_moments(d, |j| j as f64 * mean.ln()),
            Geometric { p } => ln_from_factorial_moments(d, |j| {
                (1..=j).map(|i| (i as f64).ln()).sum::<f64>() + (j as f64 - 1.0) * (1.0 - p).ln()
                    - j as f64 * p.ln()
            }),
            Binomial { n, p } => ln_from_factorial_moments(d, |j| {
                if j as u64 > *n {
                    f64::NEG_INFINITY
                } else {
                    ln_falling(*n, j) + j as f64 * p.ln()
                }
            }),
            FiniteSupport { atoms } => {
                let terms: Vec<f64> = atoms
                    .iter()
                    .filter(|&&(v, p)| p > 0.0 && v != 0.0)
                    .map(|&(v, p)| p.ln() + d as f64 * v.abs().ln())
                    .collect();
                crate::logspace::log_sum_exp(&terms)
            }
            Rademacher {} => 0.0,
            Normal { .. } => {
                return Err(Error::UnsupportedMoment(format!(
                    "normal absolute moment of order {d} overflows"
                )))
            }
        };
        Ok(v)
    }

    pub fn mean(&self) -> Result<f64> {
        self.raw_moment(1)
    }

    /// Every certified moment-bound parameter that applies to this family.
    pub fn bound_certificates(&self) -> Result<Vec<BoundCertificate>> {
        self.validate()?;
        use BoundRule::*;
        use Distribution::*;
        let cert = |l: f64, rule: BoundRule| BoundCertificate { l, rule, unproven: rule == IntegerLogConcave };
        let mut out = Vec::new();
        match self {
            Bernoulli { p } => {
                out.push(cert(1.0, Bounded));
                out.push(cert(1.0 + p, NonnegativeIntegerLogConcave));
            }
            ScaledBernoulli { value, .. } => out.push(cert(value.abs(), Bounded)),
            Rademacher {} => out.push(cert(1.0, Bounded)),
            Uniform { a, b } => {
                out.push(cert(a.abs().max(b.abs()), Bounded));
                if *a >= 0.0 {
                    out.push(cert((a + b) / 2.0, NonnegativeLogConcave));
                } else {
                    out.push(cert(self.abs_moment(1)? / LN_2, LogConcave));
                }
            }
            Exponential { rate } => out.push(cert(1.0 / rate, NonnegativeLogConcave)),
            Normal { .. } => out.push(cert(self.abs_moment(1)? / LN_2, LogConcave)),
            Poisson { mean } => out.push(cert(1.0 + mean, NonnegativeIntegerLogConcave)),
            Geometric { p } => out.push(cert(1.0 + 1.0 / p, NonnegativeIntegerLogConcave)),
            Binomial { n, p } => {
                out.push(cert(1.0 + *n as f64 * p, NonnegativeIntegerLogConcave));
                out.push(cert(*n as f64, Bounded));
            }
            FiniteSupport { atoms } => {
                let sup = atoms.iter().filter(|a| a.1 > 0.0).map(|a| a.0.abs()).fold(0.0, f64::max);
                out.push(cert(sup, Bounded));
                if let Some(c) = integer_log_concave_certificate(atoms) {
                    out.push(c);
                }
            }
        }
        Ok(out)
    }

    /// The family's designated certificate: the first entry of
    /// [`Self::bound_certificates`]. Alternatives may give a smaller L.
    pub fn bound_certificate(&self) -> Result<BoundCertificate> {
        self.bound_certificates()?
            .into_iter()
            .find(|c| !c.unproven)
            .ok_or_else(|| Error::param("no certificate applies"))
    }

    pub fn moment_bound_parameter(&self) -> Result<f64> {
        Ok(self.bound_certificate()?.l)
    }

    /// Checks `E|Z|^i <= i L E|Z|^(i-1)` for `1 <= i <= i_max`.
    pub fn check_moment_bounded(&self, l: f64, i_max: u32) -> Result<MomentBoundReport> {
        if !(l > 0.0) {
            return Err(Error::param(format!("L must be positive, got {l}")));
        }
        if i_max < 1 || i_max > D_MAX {
            return Err(Error::param(format!("i_max {i_max} outside [1, {D_MAX}]")));
        }
        let mut worst = (1u32, f64::NEG_INFINITY);
        let mut prev = self.ln_abs_moment(0)?;
        for i in 1..=i_max {
            let cur = self.ln_abs_moment(i)?;
            let ratio = if cur == f64::NEG_INFINITY {
                0.0
            } else {
                (cur - prev - (i as f64 * l).ln()).exp()
            };
            if ratio > worst.1 {
                worst = (i, ratio);
            }
            prev = cur;
        }
        Ok(MomentBoundReport {
            l,
            i_max,
            holds: worst.1 <= 1.0 + MOMENT_BOUND_TOL,
            worst_index: worst.0,
            worst_ratio: worst.1,
        })
    }

    /// One draw from the stream.
    pub fn sample(&self, s: &mut RandomStream) -> f64 {
        use Distribution::*;
        match self {
            Bernoulli { p } => (s.uniform() < *p) as u8 as f64,
            ScaledBernoulli { p, value } => {
                if s.uniform() < *p {
                    *value
                } else {
                    0.0
                }
            }
            Rademacher {} => {
                if s.uniform() < 0.5 {
                    -1.0
                } else {
                    1.0
                }
            }
            Uniform { a, b } => a + (b - a) * s.uniform(),
            Exponential { rate } => rand_distr::Exp::new(*rate).expect("validated").sample(s),
            Normal { mean, sd } => rand_distr::Normal::new(*mean, *sd).expect("validated").sample(s),
            Poisson { mean } => rand_distr::Poisson::new(*mean).expect("validated").sample(s),
            Geometric { p } => rand_distr::Geometric::new(*p).expect("validated").sample(s) as f64 + 1.0,
            Binomial { n, p } => rand_distr::Binomial::new(*n, *p).expect("validated").sample(s) as f64,
            FiniteSupport { atoms } => {
                let u = s.uniform();
                let mut acc = 0.0;
                for &(v, p) in atoms {
                    acc += p;
                    if u < acc {
                        return v;
                    }
                }
                atoms.iter().rev().find(|a| a.1 > 0.0).map(|a| a.0).unwrap_or(0.0)
            }
        }
    }
}

/// Exact sum of p_i * v_i^d (or |v_i|^d) in rational arithmetic, rounded
/// once at the end.
fn exact_atom_sum(atoms: &[(f64, f64)], d: u32, absolute: bool) -> f64 {
    let mut total = BigRational::zero();
    for &(v, p) in atoms {
        let v = BigRational::from_f64(v).expect("finite atom");
        let v = if absolute { v.abs() } else { v };
        let p = BigRational::from_f64(p).expect("finite probability");
        total += p * num_traits::pow(v, d as usize);
    }
    total.to_f64().unwrap_or(f64::NAN)
}

/// Certificate for integer-valued atoms with a log-concave pmf on a
/// contiguous range.
fn integer_log_concave_certificate(atoms: &[(f64, f64)]) -> Option<BoundCertificate> {
    let mut pts: Vec<(i64, f64)> = Vec::new();
    for &(v, p) in atoms {
        if p == 0.0 {
            continue;
        }
        if v.fract() != 0.0 || v.abs() > 1e15 {
            return None;
        }
        pts.push((v as i64, p));
    }
    pts.sort_by_key(|x| x.0);
    pts.dedup_by(|a, b| {
        if a.0 == b.0 {
            b.1 += a.1;
            true
        } else {
            false
        }
    });
    if pts.windows(2).any(|w| w[1].0 != w[0].0 + 1) {
        return None;
    }
    if pts.windows(3).any(|w| w[1].1 * w[1].1 < w[0].1 * w[2].1) {
        return None;
    }
    let lo = pts.first()?.0;
    if lo >= 0 {
        let mean: f64 = pts.iter().map(|&(v, p)| v as f64 * p).sum();
        return Some(BoundCertificate { l: 1.0 + mean, rule: BoundRule::NonnegativeIntegerLogConcave, unproven: false });
    }
    let cond = |pred: &dyn Fn(i64) -> bool| {
        let (m, w) = pts
            .iter()
            .filter(|x| pred(x.0))
            .fold((0.0, 0.0), |(m, w), &(v, p)| (m + (v as f64).abs() * p, w + p));
        if w > 0.0 {
            m / w
        } else {
            0.0
        }
    };
    let l = cond(&|v| v >= 0).max(cond(&|v| v < 0));
    Some(BoundCertificate { l, rule: BoundRule::IntegerLogConcave, unproven: true })
}

/// Exact rational value of an f64, exposed for oracle code.
pub fn to_rational(x: f64) -> BigRational {
    BigRational::from_f64(x).unwrap_or_else(|| BigRational::from_integer(BigInt::zero()))
}
