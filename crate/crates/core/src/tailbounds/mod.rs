//! Tail-bound evaluators, all in natural-log space and capped at 0.

pub mod suite;

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::moments::{self, ExactDistribution, LemmaVariant, MomentBoundParams};
use crate::poly::PoweredPolynomial;
use crate::rv::Distribution;
use crate::smoothness;

/// Absolute constants of the bounds. Defaults for `R_main`, `Q_main2` and
/// `R3_moment` come from [`suite::calibrate`] over the frozen oracle suite:
/// the smallest power of two that holds everywhere, doubled. The comparator
/// constants follow the same protocol on the instances where each applies.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConstantsConfig {
    #[serde(rename = "R_main")]
    pub r_main: f64,
    #[serde(rename = "Q_main2")]
    pub q_main2: f64,
    #[serde(rename = "R3_moment")]
    pub r3_moment: f64,
    #[serde(rename = "R_hyper")]
    pub r_hyper: f64,
    #[serde(rename = "R_bblm")]
    pub r_bblm: f64,
    #[serde(rename = "R_cw")]
    pub r_cw: f64,
    pub c_perm: f64,
    pub c_cycles: f64,
}

impl Default for ConstantsConfig {
    fn default() -> Self {
        ConstantsConfig {
            r_main: suite::SHIPPED.r_main,
            q_main2: suite::SHIPPED.q_main2,
            r3_moment: suite::SHIPPED.r3_moment,
            r_hyper: suite::SHIPPED.r_hyper,
            r_bblm: suite::SHIPPED.r_bblm,
            r_cw: suite::SHIPPED.r_cw,
            c_perm: suite::SHIPPED.c_perm,
            c_cycles: suite::SHIPPED.c_cycles,
        }
    }
}

impl ConstantsConfig {
    pub fn validate(&self) -> Result<()> {
        let all = [
            ("R_main", self.r_main),
            ("Q_main2", self.q_main2),
            ("R3_moment", self.r3_moment),
            ("R_hyper", self.r_hyper),
            ("R_bblm", self.r_bblm),
            ("R_cw", self.r_cw),
            ("c_perm", self.c_perm),
            ("c_cycles", self.c_cycles),
        ];
        for (name, v) in all {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::param(format!("constant {name} must be positive, got {v}")));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TheoremId {
    Main1special,
    Main1,
    Main2,
    Kimvu,
    Bblm,
    Hyper,
    CarberyWright,
    Permanent,
    PermanentSymmetric,
    Cycles,
    /// Markov's inequality applied to the moment bound at the chosen order.
    MomentMarkov,
}

impl TheoremId {
    pub const ALL: [TheoremId; 11] = [
        TheoremId::Main1special,
        TheoremId::Main1,
        TheoremId::Main2,
        TheoremId::Kimvu,
        TheoremId::Bblm,
        TheoremId::Hyper,
        TheoremId::CarberyWright,
        TheoremId::Permanent,
        TheoremId::PermanentSymmetric,
        TheoremId::Cycles,
        TheoremId::MomentMarkov,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            TheoremId::Main1special => "main1special",
            TheoremId::Main1 => "main1",
            TheoremId::Main2 => "main2",
            TheoremId::Kimvu => "kimvu",
            TheoremId::Bblm => "bblm",
            TheoremId::Hyper => "hyper",
            TheoremId::CarberyWright => "carbery_wright",
            TheoremId::Permanent => "permanent",
            TheoremId::PermanentSymmetric => "permanent_symmetric",
            TheoremId::Cycles => "cycles",
            TheoremId::MomentMarkov => "moment_markov",
        }
    }

    /// One-sided statements bound `P[f - Ef >= lambda]` only.
    pub fn is_one_sided(&self) -> bool {
        matches!(self, TheoremId::Bblm | TheoremId::Cycles)
    }
}

impl fmt::Display for TheoremId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TheoremId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        TheoremId::ALL
            .iter()
            .find(|t| t.as_str() == s)
            .copied()
            .ok_or_else(|| Error::param(format!("unknown theorem id '{s}'")))
    }
}

/// The symbols a bound may need. Unknown facts are `None`; a known-false
/// applicability flag makes the matching bound report `NotApplicable`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BoundInputs {
    pub mu: Option<Vec<f64>>,
    pub q: Option<u32>,
    pub gamma: Option<u32>,
    #[serde(rename = "L")]
    pub l: Option<f64>,
    pub variance: Option<f64>,
    /// Variable count (Kim-Vu), matrix order (permanents) or graph order
    /// (cycles).
    pub n: Option<u64>,
    pub e_vector: Option<Vec<f64>>,
    pub derivative_expectations: Option<Vec<f64>>,
    pub epsilon: Option<f64>,
    pub multilinear: Option<bool>,
    pub nonnegative_weights: Option<bool>,
    /// Every variable takes values in {0, 1}.
    pub boolean: Option<bool>,
    /// Every variable is Rademacher or a centered normal.
    pub gaussian_or_rademacher: Option<bool>,
    /// Every variable has a log-concave density.
    pub log_concave: Option<bool>,
    /// Weights and variables lie in [0, 1].
    pub unit_interval: Option<bool>,
}

fn is_boolean(d: &Distribution) -> bool {
    match d {
        Distribution::Bernoulli { .. } => true,
        Distribution::ScaledBernoulli { value, .. } => *value == 1.0 || *value == 0.0,
        Distribution::FiniteSupport { atoms } => atoms.iter().all(|a| a.1 == 0.0 || a.0 == 0.0 || a.0 == 1.0),
        Distribution::Binomial { n, .. } => *n <= 1,
        _ => false,
    }
}

fn in_unit_interval(d: &Distribution) -> bool {
    match d {
        Distribution::Uniform { a, b } => *a >= 0.0 && *b <= 1.0,
        _ => d.atoms().is_some_and(|a| a.iter().all(|x| x.1 == 0.0 || (0.0..=1.0).contains(&x.0))),
    }
}

impl BoundInputs {
    /// Derives every input computable from the instance. The variance is
    /// left empty when its expansion exceeds the budget.
    pub fn from_instance(poly: &PoweredPolynomial, dists: &[Distribution]) -> Result<Self> {
        let prof = smoothness::mu_profile(poly, dists)?;
        let mut l: f64 = 0.0;
        for d in dists {
            l = l.max(d.moment_bound_parameter()?);
        }
        let variance = match moments::central_moment_expansion(poly, dists, 2) {
            Ok(v) => Some(v.max(0.0)),
            Err(e) if e.is_budget() => None,
            Err(e) => return Err(e),
        };
        Ok(BoundInputs {
            mu: Some(prof.values),
            q: Some(poly.q()),
            gamma: Some(poly.gamma().max(1)),
            l: Some(l),
            variance,
            n: Some(poly.n() as u64),
            multilinear: Some(poly.is_multilinear()),
            nonnegative_weights: Some(poly.has_nonnegative_weights()),
            boolean: Some(dists.iter().all(is_boolean)),
            gaussian_or_rademacher: Some(dists.iter().all(|d| match d {
                Distribution::Rademacher {} => true,
                Distribution::Normal { mean, .. } => *mean == 0.0,
                _ => false,
            })),
            log_concave: Some(dists.iter().all(|d| {
                matches!(d, Distribution::Uniform { .. } | Distribution::Exponential { .. } | Distribution::Normal { .. })
            })),
            unit_interval: Some(
                dists.iter().all(in_unit_interval) && poly.terms().iter().all(|t| (0.0..=1.0).contains(&t.1)),
            ),
            ..Default::default()
        })
    }

    fn need<T: Clone>(v: &Option<T>, name: &str) -> Result<T> {
        v.clone().ok_or_else(|| Error::MissingInput(name.to_string()))
    }

    fn forbid(flag: Option<bool>, what: &str) -> Result<()> {
        if flag == Some(false) {
            return Err(Error::NotApplicable(what.to_string()));
        }
        Ok(())
    }

    fn mu_q(&self) -> Result<(Vec<f64>, u32)> {
        let mu = Self::need(&self.mu, "mu")?;
        let q = self.q.unwrap_or(mu.len().saturating_sub(1) as u32);
        if mu.len() < q as usize + 1 {
            return Err(Error::MissingInput(format!("mu needs {} entries", q + 1)));
        }
        Ok((mu, q))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundTerm {
    pub family: String,
    pub r: u32,
    pub log_value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailBoundReport {
    pub theorem_id: TheoremId,
    pub lambda: f64,
    pub log_bound: f64,
    pub terms: Vec<BoundTerm>,
    pub constants: BTreeMap<String, f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k_star: Option<u64>,
    /// Deviation threshold of the Kim-Vu statement.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threshold: Option<f64>,
}

impl TailBoundReport {
    pub fn bound(&self) -> f64 {
        self.log_bound.exp()
    }
}

/// Collects terms and applies the `e^2 max(...)` prefix with the cap at 1.
struct TermSet {
    terms: Vec<BoundTerm>,
}

impl TermSet {
    fn new() -> Self {
        TermSet { terms: Vec::new() }
    }

    fn push(&mut self, family: &str, r: u32, log_value: f64) {
        self.terms.push(BoundTerm { family: family.to_string(), r, log_value });
    }

    fn max(&self) -> f64 {
        self.terms.iter().map(|t| t.log_value).fold(f64::NEG_INFINITY, f64::max)
    }
}

/// `-x` where `ln x = ln_x`, tolerant of infinities.
fn neg_exp(ln_x: f64) -> f64 {
    if ln_x == f64::NEG_INFINITY {
        0.0
    } else {
        -ln_x.exp()
    }
}

fn cap(x: f64) -> f64 {
    if x.is_nan() {
        0.0
    } else {
        x.min(0.0)
    }
}

/// The shared shape of the three main theorems:
/// `e^2 max_r max{ exp(-lambda^2 / (mu_0 mu_r S_r)), exp(-(lambda / (mu_r S_r))^(1/r)) }`
/// where `ln S_r` is supplied per r.
fn main_family(lambda: f64, mu: &[f64], q: u32, ln_scale: impl Fn(u32) -> f64, out: &mut TermSet) {
    let ln_l = lambda.ln();
    let ln_mu0 = mu[0].ln();
    for r in 1..=q {
        let ln_mu_r = mu[r as usize].ln();
        if ln_mu_r == f64::NEG_INFINITY {
            continue;
        }
        let s = ln_scale(r);
        let quad = if ln_mu0 == f64::NEG_INFINITY { f64::NEG_INFINITY } else { neg_exp(2.0 * ln_l - ln_mu0 - ln_mu_r - s) };
        let root = neg_exp((ln_l - ln_mu_r - s) / r as f64);
        out.push("quadratic", r, quad);
        out.push("root", r, root);
    }
}

fn constants_map(pairs: &[(&str, f64)]) -> BTreeMap<String, f64> {
    pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

/// Kim-Vu constants c_q = q^(q/2), d_q = q^q.
pub fn kim_vu_constants(q: u32) -> (f64, f64) {
    let q = q.max(1) as f64;
    (q.powf(q / 2.0), q.powf(q))
}

/// Validates the Kim-Vu hypotheses for an E-vector and parameter lambda.
pub fn check_kim_vu(inputs: &BoundInputs, lambda: f64) -> Result<(Vec<f64>, u32, u64)> {
    BoundInputs::forbid(inputs.unit_interval, "Kim-Vu needs weights and variables in [0,1]")?;
    let e = BoundInputs::need(&inputs.e_vector, "e_vector")?;
    let n = BoundInputs::need(&inputs.n, "n")?;
    let q = inputs.q.unwrap_or(e.len().saturating_sub(1) as u32);
    if e.len() != q as usize + 1 || q == 0 {
        return Err(Error::MissingInput(format!("e_vector needs q+1 = {} entries", q + 1)));
    }
    if (e[q as usize] - 1.0).abs() > 1e-12 {
        return Err(Error::KimVuConditionViolated(format!("E_q = {} but must equal 1", e[q as usize])));
    }
    for j in 0..q as usize {
        if e[j] < e[j + 1] {
            return Err(Error::KimVuConditionViolated(format!("E_{j} < E_{}: the vector must be nonincreasing", j + 1)));
        }
    }
    if let Some(mu) = &inputs.mu {
        for (j, (&ej, &mj)) in e.iter().zip(mu).enumerate() {
            if ej < mj {
                return Err(Error::KimVuConditionViolated(format!(
                    "condition (1): E_{j} = {ej} is below mu_{j} = {mj}, so it cannot dominate E_{j}[f]"
                )));
            }
        }
    }
    if let Some(de) = &inputs.derivative_expectations {
        for (j, (&ej, &dj)) in e.iter().zip(de).enumerate() {
            if ej < dj {
                return Err(Error::KimVuConditionViolated(format!("condition (1): E_{j} = {ej} < E_{j}[f] = {dj}")));
            }
        }
    }
    for j in 0..q as usize {
        let need = lambda + 4.0 * j as f64 * (n.max(1) as f64).ln();
        if e[j] / e[j + 1] < need {
            return Err(Error::KimVuConditionViolated(format!(
                "condition (2): E_{j}/E_{} = {} < lambda + 4*{j}*ln n = {need}",
                j + 1,
                e[j] / e[j + 1]
            )));
        }
    }
    Ok((e, q, n))
}

pub fn evaluate_bound(
    id: TheoremId,
    inputs: &BoundInputs,
    lambda: f64,
    constants: &ConstantsConfig,
) -> Result<TailBoundReport> {
    constants.validate()?;
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return Err(Error::param(format!("lambda must be finite and >= 0, got {lambda}")));
    }
    let mut ts = TermSet::new();
    let mut k_star = None;
    let mut threshold = None;
    let (log_bound, used) = match id {
        TheoremId::Main1special => {
            BoundInputs::forbid(inputs.multilinear, "main1special needs a multilinear polynomial")?;
            BoundInputs::forbid(inputs.nonnegative_weights, "main1special needs nonnegative weights")?;
            let (mu, q) = inputs.mu_q()?;
            let l = BoundInputs::need(&inputs.l, "L")?;
            let r_c = constants.r_main;
            main_family(lambda, &mu, q, |r| r as f64 * (l.ln() + r_c.ln()), &mut ts);
            (cap(2.0 + ts.max()), constants_map(&[("R_main", r_c)]))
        }
        TheoremId::Main1 => {
            let (mu, q) = inputs.mu_q()?;
            let l = BoundInputs::need(&inputs.l, "L")?;
            let g = BoundInputs::need(&inputs.gamma, "gamma")?.max(1) as f64;
            let r_c = constants.r_main;
            main_family(lambda, &mu, q, |r| r as f64 * (l.ln() + g.ln()) + q as f64 * r_c.ln(), &mut ts);
            (cap(2.0 + ts.max()), constants_map(&[("R_main", r_c)]))
        }
        TheoremId::Main2 => {
            let (mu, q) = inputs.mu_q()?;
            let l = BoundInputs::need(&inputs.l, "L")?;
            let g = BoundInputs::need(&inputs.gamma, "gamma")?.max(1) as f64;
            let ln_r = (g + 1.0) * constants.q_main2.ln();
            main_family(lambda, &mu, q, |r| r as f64 * (l.ln() + g.ln() + ln_r), &mut ts);
            (cap(2.0 + ts.max()), constants_map(&[("Q_main2", constants.q_main2), ("R", ln_r.exp())]))
        }
        TheoremId::Kimvu => {
            let (e, q, _) = check_kim_vu(inputs, lambda)?;
            let (c_q, d_q) = kim_vu_constants(q);
            threshold = Some(c_q * (lambda * e[0] * e[1]).sqrt());
            let v = d_q.ln() - lambda / 4.0;
            ts.push("kim_vu", q, v);
            (cap(v), constants_map(&[("c_q", c_q), ("d_q", d_q)]))
        }
        TheoremId::Bblm => {
            BoundInputs::forbid(inputs.multilinear, "bblm needs a multilinear polynomial")?;
            BoundInputs::forbid(inputs.boolean, "bblm needs boolean variables")?;
            let (mu, q) = inputs.mu_q()?;
            let qf = q.max(1) as f64;
            let ln_l = lambda.ln();
            let ln_mu0 = mu[0].ln();
            for r in 1..=q {
                let ln_mu_r = mu[r as usize].ln();
                if ln_mu_r == f64::NEG_INFINITY {
                    continue;
                }
                let quad = if ln_mu0 == f64::NEG_INFINITY {
                    f64::NEG_INFINITY
                } else {
                    neg_exp((2.0 * ln_l - (16.0 * qf * qf).ln() - ln_mu0 - ln_mu_r) / r as f64)
                };
                ts.push("quadratic", r, quad);
                ts.push("root", r, neg_exp((ln_l - (4.0 * qf).ln() - ln_mu_r) / r as f64));
            }
            let pre = -1.0 / (constants.r_bblm * qf);
            (cap(pre + ts.max()), constants_map(&[("R_bblm", constants.r_bblm)]))
        }
        TheoremId::Hyper => {
            BoundInputs::forbid(inputs.gaussian_or_rademacher, "hyper needs centered Gaussian or Rademacher variables")?;
            let var = BoundInputs::need(&inputs.variance, "variance")?;
            let q = BoundInputs::need(&inputs.q, "q")?.max(1) as f64;
            let v = 2.0 + neg_exp((2.0 * lambda.ln() - constants.r_hyper.ln() - var.ln()) / q);
            ts.push("hyper", q as u32, v);
            (cap(v), constants_map(&[("R_hyper", constants.r_hyper)]))
        }
        TheoremId::CarberyWright => {
            BoundInputs::forbid(inputs.log_concave, "carbery_wright needs a log-concave law")?;
            let var = BoundInputs::need(&inputs.variance, "variance")?;
            let q = BoundInputs::need(&inputs.q, "q")?.max(1) as f64;
            let v = 2.0 + neg_exp((lambda.ln() - constants.r_cw.ln() - 0.5 * var.ln()) / q);
            ts.push("carbery_wright", q as u32, v);
            (cap(v), constants_map(&[("R_cw", constants.r_cw)]))
        }
        TheoremId::Permanent | TheoremId::PermanentSymmetric => {
            let n = BoundInputs::need(&inputs.n, "n")?.max(1) as f64;
            let body = 2.0 + neg_exp(constants.c_perm.ln() + 2.0 / n * lambda.ln());
            ts.push("floor", 0, -n);
            ts.push("stretched", 0, body);
            (cap(ts.max()), constants_map(&[("c_perm", constants.c_perm)]))
        }
        TheoremId::Cycles => {
            let n = BoundInputs::need(&inputs.n, "n")?;
            let q = BoundInputs::need(&inputs.q, "q")?.max(1);
            if n < 3 {
                return Err(Error::param("cycles bound needs n >= 3"));
            }
            let ln_n = (n as f64).ln();
            let eps = inputs.epsilon.unwrap_or(q as f64 * ln_n.ln() / ln_n);
            if !(eps > 0.0) {
                return Err(Error::param(format!("epsilon must be positive, got {eps}")));
            }
            let v = 2.0 + neg_exp(constants.c_cycles.ln() + lambda.ln() / q as f64 + ln_n.ln() / eps);
            ts.push("cycles", q, v);
            (cap(v), constants_map(&[("c_cycles", constants.c_cycles), ("epsilon", eps)]))
        }
        TheoremId::MomentMarkov => {
            let (mu, q) = inputs.mu_q()?;
            let params = MomentBoundParams {
                q,
                gamma: BoundInputs::need(&inputs.gamma, "gamma")?.max(1),
                l: BoundInputs::need(&inputs.l, "L")?,
                mu,
                variant: LemmaVariant::General,
                constant: constants.r3_moment,
            };
            let m = moments::markov_optimize(&params, lambda)?;
            k_star = Some(m.k_star);
            ts.push("markov", 0, m.log_bound);
            (m.log_bound, constants_map(&[("R3_moment", constants.r3_moment)]))
        }
    };
    let log_bound = if lambda == 0.0 { 0.0 } else { log_bound };
    Ok(TailBoundReport { theorem_id: id, lambda, log_bound, terms: ts.terms, constants: used, k_star, threshold })
}

/// Kim-Vu read as a bound at deviation x: the parameter solving
/// `c_q sqrt(lambda E0 E1) = x`, if the hypotheses hold for it.
pub fn kim_vu_at_deviation(inputs: &BoundInputs, x: f64) -> Result<f64> {
    let e = BoundInputs::need(&inputs.e_vector, "e_vector")?;
    let q = inputs.q.unwrap_or(e.len().saturating_sub(1) as u32);
    let (c_q, _) = kim_vu_constants(q);
    let lam = x * x / (c_q * c_q * e[0] * e.get(1).copied().unwrap_or(1.0));
    let r = evaluate_bound(TheoremId::Kimvu, inputs, lam, &ConstantsConfig::default())?;
    Ok(r.log_bound)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompareTable {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Option<f64>>>,
}

impl CompareTable {
    pub fn column(&self, name: &str) -> Option<Vec<Option<f64>>> {
        let i = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }

    pub fn to_csv(&self) -> String {
        let mut s = self.columns.join(",");
        s.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|c| c.map(fmt_num).unwrap_or_default()).collect();
            s.push_str(&cells.join(","));
            s.push('\n');
        }
        s
    }
}

/// Shortest round-trip formatting, stable across platforms.
pub fn fmt_num(x: f64) -> String {
    format!("{x:e}")
}

#[derive(Clone, Debug, Default)]
pub struct CompareOptions {
    /// Include the exact tail when the support is small enough.
    pub exact_budget: Option<u128>,
    pub e_vector: Option<Vec<f64>>,
}

/// One row per lambda with every applicable bound, as probabilities.
pub fn compare_bounds(
    poly: &PoweredPolynomial,
    dists: &[Distribution],
    lambdas: &[f64],
    constants: &ConstantsConfig,
    opts: &CompareOptions,
) -> Result<CompareTable> {
    let mut inputs = BoundInputs::from_instance(poly, dists)?;
    inputs.e_vector = opts.e_vector.clone();
    let exact = match ExactDistribution::with_budget(poly, dists, opts.exact_budget.unwrap_or(moments::ENUMERATION_BUDGET)) {
        Ok(d) => Some(d),
        Err(Error::NonFiniteSupport(_)) => None,
        Err(e) if e.is_budget() => None,
        Err(e) => return Err(e),
    };
    let mut columns = vec!["lambda".to_string()];
    if exact.is_some() {
        columns.push("exact_tail".into());
        columns.push("exact_upper_tail".into());
    }
    let candidates = [
        TheoremId::Main1special,
        TheoremId::Main1,
        TheoremId::Main2,
        TheoremId::MomentMarkov,
        TheoremId::Kimvu,
        TheoremId::Hyper,
        TheoremId::Bblm,
        TheoremId::CarberyWright,
    ];
    let probe = lambdas.iter().copied().find(|&l| l > 0.0).unwrap_or(1.0);
    let mut ids = Vec::new();
    for id in candidates {
        let ok = if id == TheoremId::Kimvu {
            inputs.e_vector.is_some() && inputs.unit_interval != Some(false)
        } else {
            evaluate_bound(id, &inputs, probe, constants).is_ok()
        };
        if ok {
            ids.push(id);
            columns.push(id.as_str().to_string());
        }
    }
    let mut rows = Vec::with_capacity(lambdas.len());
    for &lam in lambdas {
        let mut row = vec![Some(lam)];
        if let Some(d) = &exact {
            row.push(Some(d.tail_two_sided_f64(lam)));
            row.push(Some(d.tail_upper_f64(lam)));
        }
        for &id in &ids {
            let v = if id == TheoremId::Kimvu {
                kim_vu_at_deviation(&inputs, lam).ok().map(f64::exp)
            } else {
                Some(evaluate_bound(id, &inputs, lam, constants)?.bound())
            };
            row.push(v);
        }
        rows.push(row);
    }
    Ok(CompareTable { columns, rows })
}
