//! Experiment scenarios: linear sums, cycles in G(n, p) and random
//! permanents. Each run writes one CSV plus a JSON manifest next to it.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use polytail::mc::{self, Direction};
use polytail::poly::{cycle_count, CYCLE_TERM_CAP};
use polytail::smoothness;
use polytail::tailbounds::{
    compare_bounds, evaluate_bound, BoundInputs, CompareOptions, CompareTable, ConstantsConfig, TheoremId,
};
use polytail::{Distribution, PoweredPolynomial};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

/// Column order of every scenario CSV; absent columns are dropped and
/// listed in the manifest.
pub const SCHEMA: [&str; 17] = [
    "lambda",
    "exact_tail",
    "exact_upper_tail",
    "mc_phat",
    "mc_ci_low",
    "mc_ci_high",
    "main1special",
    "main1",
    "main2",
    "moment_markov",
    "kimvu",
    "hyper",
    "bblm",
    "carbery_wright",
    "permanent",
    "permanent_symmetric",
    "cycles",
];

const ONE_SIDED: [&str; 2] = ["bblm", "cycles"];

/// Relative slack for comparing a floating bound against a tail.
const CHECK_TOL: f64 = 1e-12;

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "scenario", rename_all = "snake_case")]
pub enum Scenario {
    /// Sum of n i.i.d. variables with a common weight.
    Linear {
        n: usize,
        dist: Distribution,
        #[serde(default = "unit")]
        weight: f64,
        lambdas: Vec<f64>,
        samples: u64,
        #[serde(default)]
        e_vector: Option<Vec<f64>>,
    },
    /// q-cycles through a fixed vertex of G(n, p); p defaults to ln(n)/n.
    Cycles {
        n: usize,
        q: usize,
        #[serde(default)]
        p: Option<f64>,
        #[serde(default)]
        epsilon: Option<f64>,
        lambdas: Vec<f64>,
        samples: u64,
    },
    /// Permanent of a random n x n matrix; the grid is in units of sqrt(n!).
    Permanent {
        n: usize,
        dist: Distribution,
        #[serde(default)]
        symmetric: bool,
        t_grid: Vec<f64>,
        samples: u64,
    },
}

fn unit() -> f64 {
    1.0
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExperimentConfig {
    #[serde(flatten)]
    pub scenario: Scenario,
    pub seed: u64,
    #[serde(default)]
    pub constants: Option<PathBuf>,
    /// CSV path, relative to the config file.
    pub output: PathBuf,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        let grid = match &self.scenario {
            Scenario::Linear { lambdas, samples, .. } | Scenario::Cycles { lambdas, samples, .. } => {
                check_samples(*samples)?;
                lambdas
            }
            Scenario::Permanent { t_grid, samples, .. } => {
                check_samples(*samples)?;
                t_grid
            }
        };
        if grid.is_empty() {
            bail!("the lambda grid is empty");
        }
        if grid.iter().any(|x| !x.is_finite() || *x < 0.0) {
            bail!("lambda values must be finite and nonnegative");
        }
        if grid.windows(2).any(|w| w[0] >= w[1]) {
            bail!("the lambda grid must be strictly increasing");
        }
        Ok(())
    }
}

fn check_samples(s: u64) -> Result<()> {
    if s == 0 {
        bail!("samples must be at least 1");
    }
    Ok(())
}

/// Outcome of one scenario run.
pub struct Outcome {
    pub table: CompareTable,
    pub checks: Vec<Value>,
    pub violations: Vec<String>,
}

fn insert_column(t: &mut CompareTable, at: usize, name: &str, values: &[Option<f64>]) {
    t.columns.insert(at, name.to_string());
    for (row, v) in t.rows.iter_mut().zip(values) {
        row.insert(at, *v);
    }
}

/// Monte Carlo columns for a tail direction, inserted after `after`.
fn add_mc_columns(t: &mut CompareTable, after: &str, ests: &[mc::TailEstimate]) {
    let at = t.columns.iter().position(|c| c == after).map_or(1, |i| i + 1);
    let col = |f: fn(&mc::TailEstimate) -> f64| ests.iter().map(|e| Some(f(e))).collect::<Vec<_>>();
    insert_column(t, at, "mc_ci_high", &col(|e| e.ci_high));
    insert_column(t, at, "mc_ci_low", &col(|e| e.ci_low));
    insert_column(t, at, "mc_phat", &col(|e| e.p_hat));
}

/// Bound columns are capped at 1, nonincreasing down the grid and at least
/// the exact tail of the matching direction. A Monte Carlo interval lying
/// entirely above a bound also counts as a violation, unless the interval
/// is two-sided and the bound one-sided.
pub fn check_table(t: &CompareTable, mc_dir: Direction) -> Vec<String> {
    let mut out = Vec::new();
    let get = |name: &str| t.column(name);
    let exact_two = get("exact_tail");
    let exact_up = get("exact_upper_tail");
    let mc_low = get("mc_ci_low");
    let lambdas = get("lambda").unwrap_or_default();
    for (ci, name) in t.columns.iter().enumerate() {
        if name == "lambda" || name.starts_with("exact") || name.starts_with("mc_") {
            continue;
        }
        let col: Vec<Option<f64>> = t.rows.iter().map(|r| r[ci]).collect();
        let mut prev = f64::INFINITY;
        for (i, v) in col.iter().enumerate() {
            let Some(b) = *v else { continue };
            let lam = lambdas[i].unwrap_or(f64::NAN);
            if b > 1.0 {
                out.push(format!("{name} exceeds 1 at lambda={lam}: {b}"));
            }
            if b > prev * (1.0 + CHECK_TOL) {
                out.push(format!("{name} increases at lambda={lam}: {prev} -> {b}"));
            }
            prev = b;
            let one_sided = ONE_SIDED.contains(&name.as_str());
            let exact = if one_sided { &exact_up } else { &exact_two };
            if let Some(Some(e)) = exact.as_ref().map(|c| c[i]) {
                if b < e * (1.0 - CHECK_TOL) {
                    out.push(format!("{name} = {b} is below the exact tail {e} at lambda={lam}"));
                }
            }
            if one_sided && mc_dir == Direction::TwoSided {
                continue;
            }
            if let Some(Some(lo)) = mc_low.as_ref().map(|c| c[i]) {
                if lo > b * (1.0 + CHECK_TOL) {
                    out.push(format!("{name} = {b} is below the Monte Carlo interval (low {lo}) at lambda={lam}"));
                }
            }
        }
    }
    out
}

fn estimates(
    poly: &PoweredPolynomial,
    dists: &[Distribution],
    thresholds: &[f64],
    samples: u64,
    seed: u64,
    dir: Direction,
) -> Result<Vec<mc::TailEstimate>> {
    Ok(mc::estimate_tails(poly, dists, thresholds, samples, seed, dir, mc::DEFAULT_LEVEL)?)
}

pub fn run(cfg: &ExperimentConfig, constants: &ConstantsConfig, budget: Option<u128>) -> Result<Outcome> {
    cfg.validate()?;
    match &cfg.scenario {
        Scenario::Linear { n, dist, weight, lambdas, samples, e_vector } => {
            let poly = PoweredPolynomial::complete_multilinear(*n, 1, *weight)?;
            let dists = vec![dist.clone(); *n];
            let opts = CompareOptions { exact_budget: budget, e_vector: e_vector.clone() };
            let mut table = compare_bounds(&poly, &dists, lambdas, constants, &opts)?;
            let ests = estimates(&poly, &dists, lambdas, *samples, cfg.seed, Direction::TwoSided)?;
            let after = if table.columns.iter().any(|c| c == "exact_upper_tail") { "exact_upper_tail" } else { "lambda" };
            add_mc_columns(&mut table, after, &ests);
            let violations = check_table(&table, Direction::TwoSided);
            Ok(Outcome { table, checks: Vec::new(), violations })
        }
        Scenario::Cycles { n, q, p, epsilon, lambdas, samples } => cycles(*n, *q, *p, *epsilon, lambdas, *samples, cfg.seed, constants),
        Scenario::Permanent { n, dist, symmetric, t_grid, samples } => {
            permanent(*n, dist, *symmetric, t_grid, *samples, cfg.seed, constants)
        }
    }
}

/// Facts about the cycles instance that do not depend on lambda.
pub struct CyclesFacts {
    pub poly: PoweredPolynomial,
    pub p: f64,
    pub term_count: u128,
    pub expectation: f64,
    pub closed_form: f64,
    pub mu: Vec<f64>,
    pub checks: Vec<Value>,
    pub failures: Vec<String>,
}

/// Builds the cycles polynomial and checks `E[X] = #cycles * p^q`, and
/// `mu_t <= ln^(q-t) n / n` for `0 <= t < q` (at t = 0 this is
/// `E[X] <= n^(eps - 1)` with the default eps).
pub fn cycles_facts(n: usize, q: usize, p: Option<f64>) -> Result<CyclesFacts> {
    let p = p.unwrap_or((n as f64).ln() / n as f64);
    let poly = PoweredPolynomial::cycles(n, q, CYCLE_TERM_CAP)?;
    let dists = vec![Distribution::Bernoulli { p }; poly.n()];
    let term_count = cycle_count(n as u64, q as u64).context("cycle count overflows")?;
    let expectation = poly.expectation(&dists)?;
    let closed_form = term_count as f64 * p.powi(q as i32);
    let mu = smoothness::mu_profile(&poly, &dists)?.values;
    let mut checks = Vec::new();
    let mut failures = Vec::new();
    let terms_ok = poly.len() as u128 == term_count;
    let mean_ok = (expectation - closed_form).abs() <= 1e-12 * closed_form.abs();
    checks.push(json!({"check": "term_count", "value": poly.len(), "expected": term_count.to_string(), "holds": terms_ok}));
    checks.push(json!({"check": "expectation", "value": expectation, "expected": closed_form, "holds": mean_ok}));
    if !terms_ok {
        failures.push(format!("cycles polynomial has {} terms, expected {term_count}", poly.len()));
    }
    if !mean_ok {
        failures.push(format!("E[X] = {expectation} differs from {closed_form}"));
    }
    let ln_n = (n as f64).ln();
    for t in 0..q {
        let cap = ln_n.powi((q - t) as i32) / n as f64;
        let holds = mu[t] <= cap * (1.0 + CHECK_TOL);
        checks.push(json!({"check": "mu_cap", "t": t, "mu": mu[t], "cap": cap, "holds": holds}));
        if !holds {
            failures.push(format!("mu_{t} = {} exceeds ln^{}(n)/n = {cap}", mu[t], q - t));
        }
    }
    Ok(CyclesFacts { poly, p, term_count, expectation, closed_form, mu, checks, failures })
}

#[allow(clippy::too_many_arguments)]
fn cycles(
    n: usize,
    q: usize,
    p: Option<f64>,
    epsilon: Option<f64>,
    lambdas: &[f64],
    samples: u64,
    seed: u64,
    constants: &ConstantsConfig,
) -> Result<Outcome> {
    let facts = cycles_facts(n, q, p)?;
    let dists = vec![Distribution::Bernoulli { p: facts.p }; facts.poly.n()];
    let inputs = BoundInputs::from_instance(&facts.poly, &dists)?;
    // The cycles statement is about the graph order, not the edge count.
    let mut cyc_inputs = BoundInputs { n: Some(n as u64), q: Some(q as u32), epsilon, ..Default::default() };
    cyc_inputs.mu = inputs.mu.clone();
    let mean = facts.expectation;
    // X >= lambda  iff  X - EX >= lambda - EX.
    let shifted: Vec<f64> = lambdas.iter().map(|l| l - mean).collect();
    let ests = estimates(&facts.poly, &dists, &shifted, samples, seed, Direction::Upper)?;
    let mains = [TheoremId::Main1special, TheoremId::Main1, TheoremId::Main2];
    let mut columns: Vec<String> = ["lambda", "mc_phat", "mc_ci_low", "mc_ci_high"].iter().map(|s| s.to_string()).collect();
    columns.extend(mains.iter().map(|m| m.as_str().to_string()));
    columns.push("cycles".into());
    let mut rows = Vec::new();
    for ((&lam, &dev), e) in lambdas.iter().zip(&shifted).zip(&ests) {
        let mut row = vec![Some(lam), Some(e.p_hat), Some(e.ci_low), Some(e.ci_high)];
        for m in mains {
            row.push(Some(evaluate_bound(m, &inputs, dev.max(0.0), constants)?.bound()));
        }
        row.push(Some(evaluate_bound(TheoremId::Cycles, &cyc_inputs, lam, constants)?.bound()));
        rows.push(row);
    }
    let table = CompareTable { columns, rows };
    let mut violations = facts.failures.clone();
    violations.extend(check_table(&table, Direction::Upper));
    let mut checks = facts.checks;
    checks.push(json!({"check": "mu_profile", "mu": facts.mu}));
    Ok(Outcome { table, checks, violations })
}

/// ln n! for small n.
fn ln_factorial(n: usize) -> f64 {
    (1..=n).map(|i| (i as f64).ln()).sum()
}

fn permanent(
    n: usize,
    dist: &Distribution,
    symmetric: bool,
    t_grid: &[f64],
    samples: u64,
    seed: u64,
    constants: &ConstantsConfig,
) -> Result<Outcome> {
    let values = mc::permanent_sample(n, dist, symmetric, seed, samples)?;
    let scale = (0.5 * ln_factorial(n)).exp();
    let id = if symmetric { TheoremId::PermanentSymmetric } else { TheoremId::Permanent };
    let inputs = BoundInputs { n: Some(n as u64), ..Default::default() };
    let mut rows = Vec::new();
    for &t in t_grid {
        let hits = values.iter().filter(|v| v.abs() >= t * scale).count() as u64;
        let (lo, hi) = mc::clopper_pearson(hits, samples, mc::DEFAULT_LEVEL)?;
        let bound = evaluate_bound(id, &inputs, t, constants)?.bound();
        rows.push(vec![Some(t), Some(hits as f64 / samples as f64), Some(lo), Some(hi), Some(bound)]);
    }
    let columns = ["lambda", "mc_phat", "mc_ci_low", "mc_ci_high", id.as_str()].iter().map(|s| s.to_string()).collect();
    let table = CompareTable { columns, rows };
    let violations = check_table(&table, Direction::TwoSided);
    let squares: Vec<f64> = values.iter().map(|v| v * v).collect();
    let second = mc::mean_with_error(&squares);
    let first = mc::mean_with_error(&values);
    let checks = vec![
        json!({"check": "mean", "value": first.mean, "sem": first.sem}),
        json!({"check": "second_moment", "value": second.mean, "sem": second.sem, "n_factorial": scale * scale}),
    ];
    Ok(Outcome { table, checks, violations })
}

/// Manifest written next to the CSV.
pub fn manifest(cfg: &ExperimentConfig, outcome: Option<&Outcome>, error: Option<&str>) -> Value {
    let (columns, omitted, checks, violations) = match outcome {
        Some(o) => {
            let omitted: Vec<&str> = SCHEMA.iter().copied().filter(|s| !o.table.columns.iter().any(|c| c == s)).collect();
            (json!(o.table.columns), json!(omitted), json!(o.checks), json!(o.violations))
        }
        None => (json!([]), json!(SCHEMA), json!([]), json!([])),
    };
    let status = match (error, outcome) {
        (Some(_), _) => "failed",
        (None, Some(o)) if !o.violations.is_empty() => "violation",
        _ => "ok",
    };
    json!({
        "config": cfg,
        "status": status,
        "error": error,
        "columns": columns,
        "omitted_columns": omitted,
        "checks": checks,
        "violations": violations,
    })
}

pub fn manifest_path(csv: &Path) -> PathBuf {
    let mut s = csv.as_os_str().to_owned();
    s.push(".manifest.json");
    PathBuf::from(s)
}

/// Runs the scenario and writes CSV and manifest. On error the manifest is
/// still written, with the failure recorded.
pub fn run_and_write(cfg: &ExperimentConfig, out: &Path, constants: &ConstantsConfig, budget: Option<u128>) -> Result<Outcome> {
    let result = run(cfg, constants, budget);
    let mpath = manifest_path(out);
    match result {
        Ok(o) => {
            fs::write(out, o.table.to_csv()).with_context(|| format!("writing {}", out.display()))?;
            fs::write(&mpath, crate::io::to_json(&manifest(cfg, Some(&o), None))?)?;
            Ok(o)
        }
        Err(e) => {
            let msg = format!("{e:#}");
            fs::write(&mpath, crate::io::to_json(&manifest(cfg, None, Some(&msg)))?)?;
            Err(e)
        }
    }
}
