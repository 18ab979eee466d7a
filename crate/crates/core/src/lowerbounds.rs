//! Tightness constructions over 0/1 variables and certified tail lower
//! bounds for them.
//!
//! Every construction has a binomial value law, so tails are sums of
//! binomial point masses in log space. Sums only ever drop terms (far tails,
//! atoms past the cutoff), and thresholds are rounded upward, so the
//! reported tail is a lower bound on the true one.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::logspace::{ln_binom_pmf, ln_binom_upper_tail, ln_choose, log_add};
use crate::poly::{PoweredHyperedge, PoweredPolynomial};
use crate::rv::Distribution;
use crate::smoothness;

/// Terms this far below the running sum are dropped.
const CUTOFF: f64 = 60.0;

/// Relative slack added to thresholds before rounding up.
const ROUND_SLACK: f64 = 1e-12;

/// Relative tolerance for the smoothness caps.
pub const CAP_TOL: f64 = 1e-12;

/// Largest materialized polynomial (terms).
pub const MATERIALIZE_CAP: usize = 200_000;

/// Rounding up with slack, so the returned integer threshold is never below
/// the true one.
fn ceil_up(x: f64) -> u64 {
    if x <= 0.0 {
        return 0;
    }
    (x * (1.0 + ROUND_SLACK)).ceil() as u64
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CaseId {
    LbOneSmall,
    LbOneLarge,
    LbTwo,
    Lifted,
}

/// The base polynomial over i.i.d. Bernoulli(p) variables.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Base {
    /// `scale * sum_{|I| = q, I in [m]} prod x_i`, so f = scale * C(S, q)
    /// with S ~ Bin(m, p).
    Complete { m: u64, q: u32, p: f64, scale: f64 },
    /// `scale * sum over n disjoint q-blocks of prod x_i`, so
    /// f = scale * Bin(n, p^q).
    Blocks { n: u64, q: u32, p: f64, scale: f64 },
}

impl Base {
    pub fn q(&self) -> u32 {
        match *self {
            Base::Complete { q, .. } | Base::Blocks { q, .. } => q,
        }
    }

    pub fn mean(&self) -> f64 {
        match *self {
            Base::Complete { m, q, p, scale } => scale * (ln_choose(m, q as u64) + q as f64 * p.ln()).exp(),
            Base::Blocks { n, q, p, scale } => scale * n as f64 * p.powi(q as i32),
        }
    }

    /// Closed-form smoothness profile.
    pub fn mu(&self) -> Vec<f64> {
        match *self {
            Base::Complete { m, q, p, scale } => (0..=q)
                .map(|j| scale * (ln_choose(m - j as u64, (q - j) as u64) + (q - j) as f64 * p.ln()).exp())
                .collect(),
            Base::Blocks { n, q, p, scale } => (0..=q)
                .map(|j| if j == 0 { scale * n as f64 * p.powi(q as i32) } else { scale * p.powi((q - j) as i32) })
                .collect(),
        }
    }

    /// Support point `scale * g(s)` for count s, and the count law.
    fn value(&self, s: u64) -> f64 {
        match *self {
            Base::Complete { q, scale, .. } => {
                if s < q as u64 {
                    0.0
                } else {
                    scale * ln_choose(s, q as u64).exp().round()
                }
            }
            Base::Blocks { scale, .. } => scale * s as f64,
        }
    }

    fn count_law(&self) -> (u64, f64) {
        match *self {
            Base::Complete { m, p, .. } => (m, p),
            Base::Blocks { n, q, p, .. } => (n, p.powi(q as i32)),
        }
    }

    /// Smallest count whose value reaches `x` (rounded conservatively).
    fn first_count_at_least(&self, x: f64) -> u64 {
        let (n, _) = self.count_law();
        match *self {
            Base::Blocks { scale, .. } => ceil_up(x / scale),
            Base::Complete { .. } => {
                let (mut lo, mut hi) = (0u64, n + 1);
                let target = x * (1.0 + ROUND_SLACK);
                while lo < hi {
                    let mid = lo + (hi - lo) / 2;
                    if self.value(mid) >= target {
                        hi = mid;
                    } else {
                        lo = mid + 1;
                    }
                }
                lo
            }
        }
    }

    fn materialize(&self) -> Result<(PoweredPolynomial, Vec<Distribution>)> {
        match *self {
            Base::Complete { m, q, p, scale } => {
                let terms = ln_choose(m, q as u64).exp();
                if terms > MATERIALIZE_CAP as f64 {
                    return Err(Error::SizeLimit(format!("{terms} terms exceed {MATERIALIZE_CAP}")));
                }
                Ok((
                    PoweredPolynomial::complete_multilinear(m as usize, q as usize, scale)?,
                    vec![Distribution::Bernoulli { p }; m as usize],
                ))
            }
            Base::Blocks { n, q, p, scale } => {
                if n as usize > MATERIALIZE_CAP {
                    return Err(Error::SizeLimit(format!("{n} blocks exceed {MATERIALIZE_CAP}")));
                }
                let nv = n as usize * q as usize;
                let terms = (0..n as u32).map(|b| {
                    (PoweredHyperedge::multilinear((0..q).map(|j| b * q + j)).expect("distinct"), scale)
                });
                Ok((PoweredPolynomial::new(nv, terms)?, vec![Distribution::Bernoulli { p }; nv]))
            }
        }
    }
}

/// `g = prod_{j=1}^{extra} (2/m) sum_i Y_{j,i}` with Y ~ Bernoulli(1/2).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Lift {
    pub extra: u32,
    pub m: u64,
}

impl Lift {
    /// Profile of one linear factor: (1, 2/m).
    pub fn factor_mu(&self) -> Vec<f64> {
        vec![1.0, 2.0 / self.m as f64]
    }

    fn factor_poly(&self) -> PoweredPolynomial {
        let w = 2.0 / self.m as f64;
        PoweredPolynomial::new(self.m as usize, (0..self.m as u32).map(|i| (PoweredHyperedge::multilinear([i]).unwrap(), w)))
            .expect("valid")
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CaseConstants {
    #[serde(rename = "C1", skip_serializing_if = "Option::is_none")]
    pub c1: Option<f64>,
    #[serde(rename = "C2", skip_serializing_if = "Option::is_none")]
    pub c2: Option<f64>,
    /// ln C3; C3 and C4 = C3^27 overflow f64 quickly.
    #[serde(rename = "ln_C3", skip_serializing_if = "Option::is_none")]
    pub ln_c3: Option<f64>,
    #[serde(rename = "ln_C4", skip_serializing_if = "Option::is_none")]
    pub ln_c4: Option<f64>,
    #[serde(rename = "C5", skip_serializing_if = "Option::is_none")]
    pub c5: Option<f64>,
    #[serde(rename = "Lambda1")]
    pub lambda1: f64,
    #[serde(rename = "Lambda2")]
    pub lambda2: f64,
    #[serde(rename = "Lambda3")]
    pub lambda3: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LowerBoundInstance {
    pub case_id: CaseId,
    /// The case of the base construction when `case_id` is `lifted`.
    pub base_case: CaseId,
    pub base: Base,
    pub lift: Option<Lift>,
    pub q: u32,
    pub epsilon: f64,
    pub lambda: f64,
    /// Caps the smoothness profile must respect.
    pub mu_star: Vec<f64>,
    /// The instance's profile.
    pub mu: Vec<f64>,
    /// How `mu` was obtained: "smoothness" on the materialized polynomial,
    /// or "closed_form" via the product identity.
    pub mu_source: String,
    /// ln of the bound certified by the construction lemma(s) alone.
    pub ln_lemma_bound: f64,
}

impl LowerBoundInstance {
    pub fn mean(&self) -> f64 {
        self.base.mean()
    }

    pub fn caps_hold(&self) -> bool {
        self.mu.iter().zip(&self.mu_star).all(|(&m, &s)| m <= s * (1.0 + CAP_TOL))
    }

    pub fn n_vars(&self) -> u64 {
        let base = match self.base {
            Base::Complete { m, .. } => m,
            Base::Blocks { n, q, .. } => n * q as u64,
        };
        base + self.lift.map_or(0, |l| l.extra as u64 * l.m)
    }

    /// The full polynomial and its laws, if small enough.
    pub fn materialize(&self) -> Result<(PoweredPolynomial, Vec<Distribution>)> {
        let (mut f, mut d) = self.base.materialize()?;
        if let Some(l) = self.lift {
            let size = f.len() as f64 * (l.m as f64).powi(l.extra as i32);
            if size > MATERIALIZE_CAP as f64 {
                return Err(Error::SizeLimit(format!("{size} terms exceed {MATERIALIZE_CAP}")));
            }
            let g = l.factor_poly();
            for _ in 0..l.extra {
                f = PoweredPolynomial::product(&f, &g);
                d.extend(std::iter::repeat_n(Distribution::Bernoulli { p: 0.5 }, l.m as usize));
            }
        }
        Ok((f, d))
    }

    /// ln of a certified lower bound on `P[f - Ef >= lambda]`.
    pub fn ln_tail(&self) -> f64 {
        ln_tail(&self.base, self.lift.as_ref(), self.lambda)
    }
}

/// `ln P[G >= t]` for G the product of `r` factors `(2/m) Bin(m, 1/2)`,
/// restricted to kept atoms.
struct LiftLaw {
    m: u64,
    /// (count b, ln pmf) for the kept atoms, ascending in b.
    atoms: Vec<(u64, f64)>,
    /// ln P[B >= atoms[i].0] over kept atoms.
    suffix: Vec<f64>,
}

impl LiftLaw {
    fn new(m: u64) -> Self {
        let mode = m / 2;
        let top = ln_binom_pmf(m, 0.5, mode);
        let mut lo = mode;
        while lo > 0 && ln_binom_pmf(m, 0.5, lo - 1) > top - CUTOFF {
            lo -= 1;
        }
        let mut hi = mode;
        while hi < m && ln_binom_pmf(m, 0.5, hi + 1) > top - CUTOFF {
            hi += 1;
        }
        let atoms: Vec<(u64, f64)> = (lo..=hi).map(|b| (b, ln_binom_pmf(m, 0.5, b))).collect();
        let mut suffix = vec![f64::NEG_INFINITY; atoms.len()];
        let mut acc = f64::NEG_INFINITY;
        for i in (0..atoms.len()).rev() {
            acc = log_add(acc, atoms[i].1);
            suffix[i] = acc;
        }
        LiftLaw { m, atoms, suffix }
    }

    fn ln_tail(&self, r: u32, t: f64) -> f64 {
        if r == 0 {
            return if t <= 1.0 { 0.0 } else { f64::NEG_INFINITY };
        }
        if t <= 0.0 {
            return 0.0;
        }
        if r == 1 {
            let k = ceil_up(t * self.m as f64 / 2.0);
            let idx = self.atoms.partition_point(|a| a.0 < k);
            return self.suffix.get(idx).copied().unwrap_or(f64::NEG_INFINITY);
        }
        let mut acc = f64::NEG_INFINITY;
        for &(b, lp) in &self.atoms {
            if b == 0 {
                continue;
            }
            let factor = 2.0 * b as f64 / self.m as f64;
            acc = log_add(acc, lp + self.ln_tail(r - 1, t / factor * (1.0 + ROUND_SLACK)));
        }
        acc
    }
}

fn ln_tail(base: &Base, lift: Option<&Lift>, lambda: f64) -> f64 {
    let target = base.mean() + lambda;
    let (n, p) = base.count_law();
    let (r, law) = match lift {
        Some(l) if l.extra > 0 => (l.extra, Some(LiftLaw::new(l.m))),
        _ => (0, None),
    };
    // G <= 2^r, so smaller base values cannot reach the target.
    let start = base.first_count_at_least(target / 2f64.powi(r as i32)).max(1);
    let mut acc = f64::NEG_INFINITY;
    let mut s = start;
    while s <= n {
        let a = base.value(s);
        let lp = ln_binom_pmf(n, p, s);
        if a > 0.0 {
            let term = match &law {
                None => lp,
                Some(law) => lp + law.ln_tail(r, target / a),
            };
            acc = log_add(acc, term);
        }
        // Past the mode every later term is below the current point mass.
        let past_mode = s as f64 > (n as f64 + 1.0) * p;
        if past_mode && lp < acc.max(-5000.0) - CUTOFF {
            break;
        }
        s += 1;
    }
    acc
}

/// ln of the second part of the small-support construction bound:
/// `-2 eps + 4 q x ln(eps / (4 q x))`, x = (lambda / mu_q*)^(1/q).
pub fn ln_lb_one_second(q: u32, eps: f64, lambda: f64, mu_star: f64) -> f64 {
    let x = 4.0 * q as f64 * (lambda / mu_star).powf(1.0 / q as f64);
    -2.0 * eps + x * (eps / x).ln()
}

/// ln of the third part of the small-support construction bound:
/// `-2 eps + (q+1) ln(eps / (q+1))`.
pub fn ln_lb_one_third(q: u32, eps: f64) -> f64 {
    let c = q as f64 + 1.0;
    -2.0 * eps + c * (eps / c).ln()
}

fn check_eps(eps: f64) -> Result<()> {
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(Error::param(format!("epsilon must lie in (0, 1], got {eps}")));
    }
    Ok(())
}

/// Complete q-uniform polynomial with weight `mu_star` on
/// m = ceil(4 q max(lambda/mu_star, 1)^(1/q)) Bernoulli(eps/m) variables.
/// For lambda <= mu_star the size is clamped so m >= 4q, which keeps
/// m >= q + 1 and eps/m <= 1/2 for the small-deviation part.
pub fn lb_one(q: u32, eps: f64, lambda: f64, mu_star: f64) -> Result<LowerBoundInstance> {
    check_eps(eps)?;
    if q == 0 || !(mu_star > 0.0) || !(lambda > 0.0) {
        return Err(Error::param("lb_one needs q >= 1, mu_star > 0 and lambda > 0"));
    }
    let ratio = (lambda / mu_star).max(1.0);
    let m = (4.0 * q as f64 * ratio.powf(1.0 / q as f64)).ceil() as u64;
    let base = Base::Complete { m, q, p: eps / m as f64, scale: mu_star };
    let (case, ln_lemma) = if lambda <= mu_star {
        (CaseId::LbOneSmall, ln_lb_one_third(q, eps))
    } else {
        (CaseId::LbOneLarge, ln_lb_one_second(q, eps, lambda, mu_star))
    };
    let mu_star_vec: Vec<f64> = (0..=q).map(|j| eps.powi((q - j) as i32) * mu_star).collect();
    finish(case, case, base, None, q, eps, lambda, mu_star_vec, ln_lemma)
}

/// Smallest power-of-two block count with `(mu0*/(n muq*))^(1/q) <= min(eps, 1/2)`.
pub fn lb_two_blocks(q: u32, mu0_star: f64, muq_star: f64, eps: f64) -> u64 {
    let cap = eps.min(0.5);
    let mut n: u64 = 1;
    while (mu0_star / (n as f64 * muq_star)).powf(1.0 / q as f64) > cap {
        n *= 2;
    }
    n
}

/// Disjoint q-blocks of Bernoulli(p) variables with weight `muq_star`, so
/// `f / muq_star ~ Bin(n, p^q)` with mean `mu0_star / muq_star`.
pub fn lb_two(q: u32, mu0_star: f64, muq_star: f64, lambda: f64, eps: f64) -> Result<LowerBoundInstance> {
    check_eps(eps)?;
    if q == 0 || !(muq_star > 0.0) {
        return Err(Error::param("lb_two needs q >= 1 and mu_q* > 0"));
    }
    if mu0_star < 27.0 * muq_star {
        return Err(Error::param(format!("lb_two needs mu_0* >= 27 mu_q*, got {mu0_star} < 27 * {muq_star}")));
    }
    if !(lambda > 0.0 && lambda <= mu0_star) {
        return Err(Error::param(format!("lb_two needs 0 < lambda <= mu_0*, got {lambda}")));
    }
    let n = lb_two_blocks(q, mu0_star, muq_star, eps);
    let p = (mu0_star / (n as f64 * muq_star)).powf(1.0 / q as f64);
    let base = Base::Blocks { n, q, p, scale: muq_star };
    let mut caps: Vec<f64> = (0..=q).map(|_| eps * muq_star).collect();
    caps[0] = mu0_star;
    caps[q as usize] = muq_star;
    let ln_lemma = -100.0 - lambda * lambda / (mu0_star * muq_star);
    finish(CaseId::LbTwo, CaseId::LbTwo, base, None, q, eps, lambda, caps, ln_lemma)
}

/// Profile by brute-force smoothness when the polynomial is small enough,
/// otherwise closed form plus the product identity.
fn profile(base: &Base, lift: Option<&Lift>) -> (Vec<f64>, String) {
    let inst_mu = {
        let mut mu = base.mu();
        if let Some(l) = lift {
            for _ in 0..l.extra {
                mu = smoothness::product_profile(&mu, &l.factor_mu());
            }
        }
        mu
    };
    let probe = LowerBoundInstance {
        case_id: CaseId::Lifted,
        base_case: CaseId::Lifted,
        base: base.clone(),
        lift: lift.copied(),
        q: 0,
        epsilon: 1.0,
        lambda: 0.0,
        mu_star: Vec::new(),
        mu: Vec::new(),
        mu_source: String::new(),
        ln_lemma_bound: 0.0,
    };
    if let Ok((f, d)) = probe.materialize() {
        if let Ok(p) = smoothness::mu_profile(&f, &d) {
            return (p.values, "smoothness".into());
        }
    }
    (inst_mu, "closed_form".into())
}

#[allow(clippy::too_many_arguments)]
fn finish(
    case_id: CaseId,
    base_case: CaseId,
    base: Base,
    lift: Option<Lift>,
    q: u32,
    epsilon: f64,
    lambda: f64,
    mu_star: Vec<f64>,
    ln_lemma_bound: f64,
) -> Result<LowerBoundInstance> {
    let (mu, mu_source) = profile(&base, lift.as_ref());
    Ok(LowerBoundInstance { case_id, base_case, base, lift, q, epsilon, lambda, mu_star, mu, mu_source, ln_lemma_bound })
}

/// Multiplies by `extra = q' - q` linear factors concentrated at 1.
pub fn lift_degree(inst: &LowerBoundInstance, q_prime: u32, eps: f64) -> Result<LowerBoundInstance> {
    check_eps(eps)?;
    let q = inst.base.q() + inst.lift.map_or(0, |l| l.extra);
    if q_prime <= q {
        return Err(Error::param(format!("q' = {q_prime} must exceed q = {q}")));
    }
    if inst.lift.is_some() {
        return Err(Error::param("instance is already lifted"));
    }
    let mu = &inst.mu;
    let (lo, hi) = mu.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &x| (a.min(x), b.max(x)));
    if !(lo > 0.0) {
        return Err(Error::param("lifting needs a positive smoothness profile"));
    }
    let m = (2.0 / eps).max(2.0 * hi / lo).ceil() as u64;
    let lift = Lift { extra: q_prime - q, m };
    let mut caps = inst.mu.clone();
    caps.extend(std::iter::repeat_n(eps * inst.mu[q as usize], (q_prime - q) as usize));
    let ln_lemma = inst.ln_lemma_bound - (q_prime - q) as f64 * 2f64.ln();
    finish(CaseId::Lifted, inst.base_case, inst.base.clone(), Some(lift), q_prime, eps, inst.lambda, caps, ln_lemma)
}

/// The certified lower bound of the case analysis.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LowerBoundCertificate {
    pub instance: LowerBoundInstance,
    pub dominant_i: u32,
    pub epsilon: f64,
    pub constants: CaseConstants,
    /// ln of the case-specific expression `max{e^{-(a+1) ln C}, e^{-(b+1) ln C}}`.
    pub ln_case_bound: f64,
    /// ln of the certified lower bound on the exact tail.
    pub ln_tail: f64,
    /// The caps are the input profile.
    pub caps_hold: bool,
    pub tail_holds: bool,
}

/// Two-family expression `max{e^{-(a+1) ln C}, e^{-(b+1) ln C}}`.
fn case_expr(ln_c: f64, a: f64, b: f64) -> f64 {
    -(a.min(b) + 1.0) * ln_c
}

/// Builds the tightness instance for `(q, mu*, lambda)` by the three-case
/// analysis and certifies its tail.
pub fn construct_thm_lb(q: u32, mu_star: &[f64], lambda: f64) -> Result<LowerBoundCertificate> {
    if q == 0 || mu_star.len() != q as usize + 1 {
        return Err(Error::param(format!("mu_star needs q+1 = {} entries", q + 1)));
    }
    if mu_star.iter().any(|&m| !(m > 0.0) || !m.is_finite()) || !(lambda > 0.0) {
        return Err(Error::param("all mu_i* and lambda must be positive"));
    }
    let (lo, hi) = mu_star.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &x| (a.min(x), b.max(x)));
    let eps = lo / hi;
    let mu0 = mu_star[0];
    let score = |i: u32| {
        let mi = mu_star[i as usize];
        let a = lambda * lambda / (mu0 * mi);
        let b = (lambda / mi).powf(1.0 / i as f64);
        (a, b)
    };
    let mut dom = 1u32;
    for i in 2..=q {
        let (a, b) = score(i);
        let (da, db) = score(dom);
        if a.min(b) < da.min(db) {
            dom = i;
        }
    }
    let i = dom;
    let mi = mu_star[i as usize];
    let (a, b) = score(i);
    let qf = q as f64;
    let mut constants = CaseConstants {
        c1: None,
        c2: None,
        ln_c3: None,
        ln_c4: None,
        c5: None,
        lambda1: eps.powf(-qf),
        lambda2: (1..=q).map(|j| lambda / mu_star[j as usize]).fold(0.0, f64::max),
        lambda3: qf.powf(qf),
    };
    let (base_inst, ln_case) = if lambda <= mi {
        let ln_c1 = qf * 2f64.ln() + 2.0 + (qf + 1.0) * ((qf + 1.0) / eps).ln();
        constants.c1 = Some(ln_c1.exp());
        (lb_one(i, eps, lambda, mi)?, case_expr(ln_c1, a, b))
    } else if 27.0 * a >= b {
        let ln_c2 = 2.0 + qf * 2f64.ln();
        let ln_c3 = 4.0 * (lambda / mi).ln() + 4.0 * i as f64 * (4.0 * i as f64 / eps).ln();
        let ln_c4 = 27.0 * ln_c3;
        constants.c2 = Some(ln_c2.exp());
        constants.ln_c3 = Some(ln_c3);
        constants.ln_c4 = Some(ln_c4);
        (lb_one(i, eps, lambda, mi)?, case_expr(ln_c2.max(ln_c4), a, b))
    } else {
        let ln_c5 = 100.0 + qf * 2f64.ln();
        constants.c5 = Some(ln_c5.exp());
        (lb_two(i, mu0, mi, lambda, eps)?, case_expr(ln_c5, a, b))
    };
    let mut inst = if i < q { lift_degree(&base_inst, q, eps)? } else { base_inst };
    // The caps of the theorem are the requested profile itself.
    inst.mu_star = mu_star.to_vec();
    let ln_tail = inst.ln_tail();
    let caps_hold = inst.caps_hold();
    Ok(LowerBoundCertificate {
        tail_holds: ln_tail >= ln_case,
        instance: inst,
        dominant_i: i,
        epsilon: eps,
        constants,
        ln_case_bound: ln_case,
        ln_tail,
        caps_hold,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BinomTailCheck {
    pub ln_lhs: f64,
    pub ln_rhs: f64,
}

impl BinomTailCheck {
    pub fn holds(&self) -> bool {
        self.ln_lhs >= self.ln_rhs
    }
}

/// `ln P[Z >= mu + lambda]` for Z ~ Bin(n, mu/n), against `-100 - lambda^2/mu`.
pub fn binom_tail_lb(mu: f64, lambda: f64, n: u64) -> Result<BinomTailCheck> {
    if !(mu >= 27.0) {
        return Err(Error::param(format!("mu must be at least 27, got {mu}")));
    }
    if !(lambda > 0.0 && lambda <= mu) {
        return Err(Error::param(format!("lambda must lie in (0, mu], got {lambda}")));
    }
    if (n as f64) < mu {
        return Err(Error::param(format!("n = {n} is below mu = {mu}")));
    }
    // The threshold is exact input, so no slack; bump only if the sum rounded down.
    let mut k = (mu + lambda).ceil();
    if k - mu < lambda {
        k += 1.0;
    }
    let k = k as u64;
    Ok(BinomTailCheck { ln_lhs: ln_binom_upper_tail(n, mu / n as f64, k), ln_rhs: -100.0 - lambda * lambda / mu })
}

/// `ln P[S = c]` for S ~ Bin(n, p) against `-2np + c ln(np/c)`.
pub fn pmf_lower_bound(n: u64, p: f64, c: u64) -> Result<BinomTailCheck> {
    if !(p > 0.0 && p <= 0.5) || c > n {
        return Err(Error::param("need 0 < p <= 1/2 and c <= n"));
    }
    let np = n as f64 * p;
    let rhs = if c == 0 { -2.0 * np } else { -2.0 * np + c as f64 * (np / c as f64).ln() };
    Ok(BinomTailCheck { ln_lhs: ln_binom_pmf(n, p, c), ln_rhs: rhs })
}

/// `P[(2/m) Bin(m, 1/2) >= 1] >= 1/2`, as an exact integer count.
pub fn lift_factor_symmetric(m: u64) -> bool {
    if m > 60 {
        return true;
    }
    let mut c: u128 = 1;
    let mut at_least: u128 = 0;
    for k in 0..=m {
        if 2 * k >= m {
            at_least += c;
        }
        c = c * (m - k) as u128 / (k + 1) as u128;
    }
    2 * at_least >= 1u128 << m
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lb_one_example() {
        let inst = lb_one(2, 1.0, 4.0, 1.0).unwrap();
        assert_eq!(inst.base, Base::Complete { m: 16, q: 2, p: 1.0 / 16.0, scale: 1.0 });
        assert!((inst.mu[1] - 15.0 / 16.0).abs() < 1e-12);
        assert!(inst.caps_hold());
        assert_eq!(inst.mu_source, "smoothness");
    }

    #[test]
    fn lb_one_linear_mean() {
        let inst = lb_one(1, 0.5, 3.0, 2.0).unwrap();
        assert!((inst.mu[0] - 0.5 * 2.0).abs() < 1e-12);
    }

    #[test]
    fn lb_one_third_part_point_mass() {
        for q in 1..=3 {
            let inst = lb_one(q, 0.5, 1.0, 1.0).unwrap();
            assert_eq!(inst.case_id, CaseId::LbOneSmall);
            assert!(inst.ln_tail() >= ln_lb_one_third(q, 0.5));
        }
    }

    #[test]
    fn lb_two_profile() {
        let inst = lb_two(2, 27.0, 1.0, 10.0, 0.5).unwrap();
        assert!((inst.mu[0] - 27.0).abs() < 1e-9);
        assert!((inst.mu[2] - 1.0).abs() < 1e-12);
        let Base::Blocks { n, .. } = inst.base else { panic!() };
        assert_eq!(n, 128);
        assert!(inst.ln_tail() >= -100.0 - 100.0 / 27.0);
    }

    #[test]
    fn binom_examples() {
        let c = binom_tail_lb(27.0, 27.0, 100_000).unwrap();
        assert!((c.ln_lhs + 12.6885).abs() < 1e-3, "{}", c.ln_lhs);
        assert!((c.ln_rhs + 127.0).abs() < 1e-12);
        let c = binom_tail_lb(27.0, 1.0, 100_000).unwrap();
        assert!(c.ln_lhs.exp() > 0.3 && c.ln_lhs.exp() < 0.5);
        assert!(binom_tail_lb(26.0, 1.0, 100).is_err());
    }

    #[test]
    fn lifting_halves() {
        let inst = lb_one(1, 0.5, 1.0, 1.0).unwrap();
        let up = lift_degree(&inst, 2, 0.5).unwrap();
        assert!((up.ln_lemma_bound - (inst.ln_lemma_bound - 2f64.ln())).abs() < 1e-12);
        assert!(up.caps_hold());
    }

    #[test]
    fn factor_symmetry() {
        assert!((1..=20).all(lift_factor_symmetric));
    }
}
