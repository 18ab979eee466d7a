mod io;
mod scenario;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use polytail::census::{run_census, CensusParams, CENSUS_BUDGET};
use polytail::lowerbounds::construct_thm_lb;
use polytail::mc::{self, Direction};
use polytail::moments::{self, ExactDistribution, ExpansionStrategy, ENUMERATION_BUDGET, PROFILE_CAP};
use polytail::rv::to_rational;
use polytail::smoothness::{self, MU_BUDGET};
use polytail::tailbounds::suite::{lemma_params, SUITE_SHA256};
use polytail::tailbounds::{compare_bounds, evaluate_bound, BoundInputs, CompareOptions, TheoremId};
use polytail::Distribution;
use serde_json::json;

use crate::io::{emit, load_constants, load_instance, load_json, to_json};
use crate::scenario::ExperimentConfig;

#[derive(Parser)]
#[command(name = "polytail", version, about = "Tail bounds for polynomials of independent random variables")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct Global {
    /// Seed for every random stream.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads; defaults to one per core.
    #[arg(long, global = true, env = "POLYTAIL_THREADS")]
    threads: Option<usize>,
    /// JSON file overriding the shipped constants.
    #[arg(long, global = true)]
    constants: Option<PathBuf>,
    /// Cap on enumerated support points, expansion terms or census graphs.
    #[arg(long, global = true)]
    budget: Option<u128>,
}

/// Polynomial and distributions, each a JSON file or an inline literal.
/// The distributions may be a single object applied to every variable.
#[derive(Args)]
struct Instance {
    #[arg(long)]
    poly: String,
    #[arg(long)]
    dists: String,
}

#[derive(Clone, Copy, ValueEnum)]
enum Oracle {
    Enum,
    Expand,
}

#[derive(Subcommand)]
enum Cmd {
    /// Smoothness parameter mu_r, or the whole profile without --r.
    Mu {
        #[command(flatten)]
        inst: Instance,
        #[arg(long)]
        r: Option<u32>,
    },
    /// Evaluate one tail bound.
    Bound {
        #[arg(long)]
        theorem: TheoremId,
        #[arg(long)]
        lambda: f64,
        /// Derive the inputs from an instance.
        #[arg(long, requires = "dists", conflicts_with = "inputs")]
        poly: Option<String>,
        #[arg(long)]
        dists: Option<String>,
        /// Supply the inputs directly (JSON); overrides derived fields.
        #[arg(long)]
        inputs: Option<String>,
        #[arg(long, value_delimiter = ',')]
        e_vector: Option<Vec<f64>>,
    },
    /// Every applicable bound across a lambda grid, as CSV.
    Compare {
        #[command(flatten)]
        inst: Instance,
        #[arg(long, value_delimiter = ',', required = true)]
        lambdas: Vec<f64>,
        #[arg(long, value_delimiter = ',')]
        e_vector: Option<Vec<f64>>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exact k-th moment, raw or central.
    Moment {
        #[command(flatten)]
        inst: Instance,
        #[arg(long)]
        k: u32,
        #[arg(long)]
        central: bool,
        #[arg(long, value_enum, default_value = "expand")]
        oracle: Oracle,
    },
    /// Monte Carlo tail estimate with an exact binomial interval.
    TailMc {
        #[command(flatten)]
        inst: Instance,
        #[arg(long)]
        lambda: f64,
        #[arg(long)]
        samples: u64,
        /// P[f - Ef >= lambda] instead of the two-sided tail.
        #[arg(long)]
        upper: bool,
    },
    /// Exact tail by enumerating the joint support.
    TailExact {
        #[command(flatten)]
        inst: Instance,
        #[arg(long)]
        lambda: f64,
        #[arg(long)]
        upper: bool,
    },
    /// Enumerate S2 hypergraphs and report class counts.
    Census {
        #[arg(long)]
        k: u32,
        #[arg(long)]
        l: u32,
        #[arg(long)]
        q: u32,
        #[arg(long)]
        eta: u32,
        #[arg(long)]
        gamma: u32,
        /// Write the per-class CSV here.
        #[arg(long)]
        dump: Option<PathBuf>,
    },
    /// Build and certify the lower-bound instance for a target mu profile.
    Lowerbound {
        #[arg(long)]
        q: u32,
        /// JSON array of mu_0*, ..., mu_q*.
        #[arg(long)]
        mustar: String,
        #[arg(long)]
        lambda: f64,
    },
    /// Empirical permanent tails against the permanent bound, as CSV.
    Perm {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        dist: String,
        #[arg(long)]
        symmetric: bool,
        #[arg(long)]
        samples: u64,
        /// Thresholds in units of sqrt(n!).
        #[arg(long, value_delimiter = ',', required = true)]
        t_grid: Vec<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Checks on the cycles-through-a-vertex instance of G(n, p).
    Cycles {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        q: usize,
        /// Edge probability; defaults to ln(n)/n.
        #[arg(long)]
        p: Option<f64>,
    },
    /// Moment-boundedness certificate of a distribution.
    CheckRv {
        #[arg(long)]
        dist: String,
        /// Check this L instead of the designated certificate.
        #[arg(long)]
        l: Option<f64>,
        #[arg(long, default_value_t = 16)]
        i_max: u32,
    },
    /// Run a scenario config; writes CSV and manifest.
    Run {
        config: PathBuf,
        /// Output CSV; overrides the config's output path.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// A detected invariant violation, reported with exit code 2.
#[derive(Debug)]
struct Violation(Vec<String>);

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "invariant violated: {}", self.0.join("; "))
    }
}

impl std::error::Error for Violation {}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<Violation>().is_some() {
                ExitCode::from(2)
            } else if e.downcast_ref::<polytail::Error>().is_some_and(|e| e.is_budget()) {
                ExitCode::from(3)
            } else {
                ExitCode::FAILURE
            }
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    let g = cli.global;
    if let Some(t) = g.threads {
        if t == 0 {
            bail!("--threads must be at least 1");
        }
        rayon::ThreadPoolBuilder::new().num_threads(t).build_global()?;
    }
    match cli.cmd {
        Cmd::Mu { inst, r } => {
            let (f, d) = load_instance(&inst.poly, &inst.dists)?;
            let budget = g.budget.unwrap_or(MU_BUDGET);
            let text = match r {
                Some(r) => to_json(&smoothness::mu_with_budget(&f, &d, r, budget)?)?,
                None => to_json(&smoothness::mu_profile_with_budget(&f, &d, budget)?)?,
            };
            emit(None, &text)
        }
        Cmd::Bound { theorem, lambda, poly, dists, inputs, e_vector } => {
            let constants = load_constants(g.constants.as_deref())?;
            let mut bi = match (poly, dists) {
                (Some(p), Some(d)) => {
                    let (f, d) = load_instance(&p, &d)?;
                    BoundInputs::from_instance(&f, &d)?
                }
                _ => BoundInputs::default(),
            };
            if let Some(i) = inputs {
                bi = load_json(&i)?;
            }
            if e_vector.is_some() {
                bi.e_vector = e_vector;
            }
            emit(None, &to_json(&evaluate_bound(theorem, &bi, lambda, &constants)?)?)
        }
        Cmd::Compare { inst, lambdas, e_vector, out } => {
            let constants = load_constants(g.constants.as_deref())?;
            let (f, d) = load_instance(&inst.poly, &inst.dists)?;
            let opts = CompareOptions { exact_budget: g.budget, e_vector };
            let table = compare_bounds(&f, &d, &lambdas, &constants, &opts)?;
            emit(out.as_deref(), &table.to_csv())?;
            let sorted = lambdas.windows(2).all(|w| w[0] < w[1]);
            let v = scenario::check_table(&table, Direction::TwoSided);
            if sorted && !v.is_empty() {
                return Err(Violation(v).into());
            }
            Ok(())
        }
        Cmd::Moment { inst, k, central, oracle } => {
            let (f, d) = load_instance(&inst.poly, &inst.dists)?;
            let value = match oracle {
                Oracle::Enum => {
                    let ex = ExactDistribution::with_budget(&f, &d, g.budget.unwrap_or(ENUMERATION_BUDGET))?;
                    if central {
                        if k % 2 == 1 {
                            bail!("odd central moments need --oracle expand");
                        }
                        ex.central_abs_moment_f64(k)
                    } else {
                        ex.moment_f64(k)
                    }
                }
                Oracle::Expand => {
                    let cap = g.budget.unwrap_or(PROFILE_CAP);
                    let target = if central { f.plus_constant(-f.expectation(&d)?) } else { f.clone() };
                    moments::exact_moment_expansion_with(&target, &d, k, ExpansionStrategy::Collapsed, cap)?
                }
            };
            let mut out = json!({"k": k, "central": central, "value": value});
            if central && k >= 2 && k % 2 == 0 {
                let constants = load_constants(g.constants.as_deref())?;
                let inputs = BoundInputs::from_instance(&f, &d)?;
                let params = lemma_params(&inputs, constants.r3_moment);
                out["ln_moment_bound"] = json!(moments::moment_lemma_bound(&params, k)?);
            }
            emit(None, &to_json(&out)?)
        }
        Cmd::TailMc { inst, lambda, samples, upper } => {
            let (f, d) = load_instance(&inst.poly, &inst.dists)?;
            let dir = if upper { Direction::Upper } else { Direction::TwoSided };
            emit(None, &to_json(&mc::estimate_tail(&f, &d, lambda, samples, g.seed, dir)?)?)
        }
        Cmd::TailExact { inst, lambda, upper } => {
            let (f, d) = load_instance(&inst.poly, &inst.dists)?;
            let ex = ExactDistribution::with_budget(&f, &d, g.budget.unwrap_or(ENUMERATION_BUDGET))?;
            let lam = to_rational(lambda);
            let tail = if upper { ex.tail_upper(&lam) } else { ex.tail_two_sided(&lam) };
            let value = if upper { ex.tail_upper_f64(lambda) } else { ex.tail_two_sided_f64(lambda) };
            let out = json!({
                "lambda": lambda,
                "direction": if upper { "upper" } else { "two_sided" },
                "tail": value,
                "tail_exact": tail.to_string(),
                "support_size": ex.atoms().len(),
            });
            emit(None, &to_json(&out)?)
        }
        Cmd::Census { k, l, q, eta, gamma, dump } => {
            let p = CensusParams { k, l, q, eta, gamma };
            let c = run_census(&p, g.budget.unwrap_or(CENSUS_BUDGET))?;
            if let Some(path) = dump {
                fs::write(&path, c.to_csv()).with_context(|| format!("writing {}", path.display()))?;
            }
            let out = json!({
                "params": p,
                "graphs": c.graphs,
                "classes": c.records.len(),
                "nu0_failures": c.nu0_failures,
                "ziq1_failures": c.ziq1_failures,
                "elementary_failures": c.elementary_failures,
                "s0_failures": c.s0_failures,
                "max_implied_r0": c.max_implied_r0,
                "suite_sha256": SUITE_SHA256,
            });
            emit(None, &to_json(&out)?)?;
            let failures = c.nu0_failures + c.ziq1_failures + c.elementary_failures + c.s0_failures;
            if failures > 0 {
                return Err(Violation(vec![format!("{failures} census checks failed")]).into());
            }
            Ok(())
        }
        Cmd::Lowerbound { q, mustar, lambda } => {
            let mu: Vec<f64> = load_json(&mustar)?;
            let cert = construct_thm_lb(q, &mu, lambda)?;
            emit(None, &to_json(&cert)?)?;
            if !(cert.caps_hold && cert.tail_holds) {
                return Err(Violation(vec!["lower-bound certificate failed".into()]).into());
            }
            Ok(())
        }
        Cmd::Perm { n, dist, symmetric, samples, t_grid, out } => {
            let d: Distribution = load_json(&dist)?;
            let cfg = ExperimentConfig {
                scenario: scenario::Scenario::Permanent { n, dist: d, symmetric, t_grid, samples },
                seed: g.seed,
                constants: g.constants.clone(),
                output: PathBuf::new(),
            };
            let constants = load_constants(g.constants.as_deref())?;
            let o = scenario::run(&cfg, &constants, g.budget)?;
            emit(out.as_deref(), &o.table.to_csv())?;
            if !o.violations.is_empty() {
                return Err(Violation(o.violations).into());
            }
            Ok(())
        }
        Cmd::Cycles { n, q, p } => {
            let facts = scenario::cycles_facts(n, q, p)?;
            let out = json!({
                "n": n,
                "q": q,
                "p": facts.p,
                "term_count": facts.term_count.to_string(),
                "expectation": facts.expectation,
                "closed_form": facts.closed_form,
                "mu": facts.mu,
                "checks": facts.checks,
            });
            emit(None, &to_json(&out)?)?;
            if !facts.failures.is_empty() {
                return Err(Violation(facts.failures).into());
            }
            Ok(())
        }
        Cmd::CheckRv { dist, l, i_max } => {
            let d: Distribution = load_json(&dist)?;
            let certs = d.bound_certificates()?;
            let l = match l {
                Some(l) => l,
                None => d.moment_bound_parameter()?,
            };
            let report = d.check_moment_bounded(l, i_max)?;
            let holds = report.holds;
            emit(None, &to_json(&json!({"family": d.name(), "certificates": certs, "report": report}))?)?;
            if !holds {
                return Err(Violation(vec![format!("{} is not moment bounded with L = {l}", d.name())]).into());
            }
            Ok(())
        }
        Cmd::Run { config, out } => {
            let cfg: ExperimentConfig = load_json(config.to_str().context("config path is not UTF-8")?)?;
            let base = config.parent().unwrap_or(Path::new("."));
            let resolve = |p: &Path| if p.is_absolute() { p.to_path_buf() } else { base.join(p) };
            let csv = out.unwrap_or_else(|| resolve(&cfg.output));
            let constants = load_constants(cfg.constants.as_deref().map(resolve).as_deref())?;
            let o = scenario::run_and_write(&cfg, &csv, &constants, g.budget)?;
            emit(None, &to_json(&scenario::manifest(&cfg, Some(&o), None))?)?;
            if !o.violations.is_empty() {
                return Err(Violation(o.violations).into());
            }
            Ok(())
        }
    }
}
