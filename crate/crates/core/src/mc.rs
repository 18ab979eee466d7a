//! Monte Carlo tails and permanent sampling.
//!
//! Sample s draws vertex v from stream `s * n + v`, so results depend only
//! on the seed and sample count, never on the thread schedule.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{Beta, ContinuousCDF};

use crate::error::{Error, Result};
use crate::poly::{sym_index, PoweredPolynomial};
use crate::rng::StreamFactory;
use crate::rv::Distribution;

pub const DEFAULT_LEVEL: f64 = 0.99;

/// Largest matrix order for Ryser sampling.
pub const RYSER_MAX_N: usize = 24;

/// Samples per parallel work unit; fixed so chunking never depends on the
/// worker count.
const CHUNK: u64 = 4096;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    TwoSided,
    Upper,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailEstimate {
    pub p_hat: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub level: f64,
    pub exceedances: u64,
    pub n_samples: u64,
    pub seed: u64,
    pub lambda: f64,
    pub direction: Direction,
}

/// Exact (Clopper-Pearson) interval for x successes in n trials.
pub fn clopper_pearson(x: u64, n: u64, level: f64) -> Result<(f64, f64)> {
    if n == 0 || x > n {
        return Err(Error::param(format!("need 0 <= x <= n and n >= 1, got x={x}, n={n}")));
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::param(format!("level must lie in (0, 1), got {level}")));
    }
    let alpha = 1.0 - level;
    let (xf, nf) = (x as f64, n as f64);
    let lo = if x == 0 {
        0.0
    } else {
        Beta::new(xf, nf - xf + 1.0).map_err(|e| Error::param(e.to_string()))?.inverse_cdf(alpha / 2.0)
    };
    let hi = if x == n {
        1.0
    } else {
        Beta::new(xf + 1.0, nf - xf).map_err(|e| Error::param(e.to_string()))?.inverse_cdf(1.0 - alpha / 2.0)
    };
    let p = xf / nf;
    Ok((lo.min(p), hi.max(p)))
}

fn check_dims(poly: &PoweredPolynomial, dists: &[Distribution]) -> Result<()> {
    if poly.n() != dists.len() {
        return Err(Error::DimensionMismatch { expected: poly.n(), got: dists.len() });
    }
    for d in dists {
        d.validate()?;
    }
    Ok(())
}

pub fn estimate_tail(
    poly: &PoweredPolynomial,
    dists: &[Distribution],
    lambda: f64,
    n_samples: u64,
    seed: u64,
    direction: Direction,
) -> Result<TailEstimate> {
    estimate_tail_with_level(poly, dists, lambda, n_samples, seed, direction, DEFAULT_LEVEL)
}

pub fn estimate_tail_with_level(
    poly: &PoweredPolynomial,
    dists: &[Distribution],
    lambda: f64,
    n_samples: u64,
    seed: u64,
    direction: Direction,
    level: f64,
) -> Result<TailEstimate> {
    let mut v = estimate_tails(poly, dists, &[lambda], n_samples, seed, direction, level)?;
    Ok(v.remove(0))
}

/// Tail estimates at several thresholds from one set of samples, so every
/// threshold sees the same draws.
pub fn estimate_tails(
    poly: &PoweredPolynomial,
    dists: &[Distribution],
    lambdas: &[f64],
    n_samples: u64,
    seed: u64,
    direction: Direction,
    level: f64,
) -> Result<Vec<TailEstimate>> {
    check_dims(poly, dists)?;
    if n_samples == 0 {
        return Err(Error::param("n_samples must be at least 1"));
    }
    let mean = poly.expectation(dists)?;
    let factory = StreamFactory::new(seed);
    let n = dists.len() as u64;
    let chunks = n_samples.div_ceil(CHUNK);
    let hits: Vec<u64> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut y = vec![0.0; n as usize];
            let mut hits = vec![0u64; lambdas.len()];
            for s in c * CHUNK..((c + 1) * CHUNK).min(n_samples) {
                for (v, d) in dists.iter().enumerate() {
                    y[v] = d.sample(&mut factory.stream(s * n + v as u64));
                }
                let dev = poly.evaluate(&y).expect("dimensions checked") - mean;
                let dev = match direction {
                    Direction::TwoSided => dev.abs(),
                    Direction::Upper => dev,
                };
                for (h, &l) in hits.iter_mut().zip(lambdas) {
                    *h += (dev >= l) as u64;
                }
            }
            hits
        })
        .reduce(
            || vec![0u64; lambdas.len()],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        );
    lambdas
        .iter()
        .zip(hits)
        .map(|(&lambda, x)| {
            let (ci_low, ci_high) = clopper_pearson(x, n_samples, level)?;
            Ok(TailEstimate {
                p_hat: x as f64 / n_samples as f64,
                ci_low,
                ci_high,
                level,
                exceedances: x,
                n_samples,
                seed,
                lambda,
                direction,
            })
        })
        .collect()
}

/// Permanent of a row-major n x n matrix by Ryser's formula, visiting
/// column subsets in Gray-code order so each step updates the row sums by
/// one column.
pub fn ryser(a: &[f64], n: usize) -> Result<f64> {
    if a.len() != n * n {
        return Err(Error::DimensionMismatch { expected: n * n, got: a.len() });
    }
    if n == 0 {
        return Ok(1.0);
    }
    if n > RYSER_MAX_N {
        return Err(Error::SizeLimit(format!("Ryser supports n <= {RYSER_MAX_N}, got {n}")));
    }
    let mut row = vec![0.0; n];
    let mut total = 0.0;
    let mut gray: u64 = 0;
    for step in 1u64..(1u64 << n) {
        let col = step.trailing_zeros() as usize;
        gray ^= 1 << col;
        let sign = if gray >> col & 1 == 1 { 1.0 } else { -1.0 };
        for (i, r) in row.iter_mut().enumerate() {
            *r += sign * a[i * n + col];
        }
        let prod: f64 = row.iter().product();
        let parity = if gray.count_ones() % 2 == 0 { 1.0 } else { -1.0 };
        total += parity * prod;
    }
    Ok(if n % 2 == 0 { total } else { -total })
}

/// Variables per sampled matrix.
pub fn permanent_vars(n: usize, symmetric: bool) -> usize {
    if symmetric {
        n * (n + 1) / 2
    } else {
        n * n
    }
}

/// Fills a matrix from its variables: entry (i, j) is variable `i*n + j`,
/// or the upper-triangle variable of {i, j} when symmetric.
pub fn matrix_from_vars(vars: &[f64], n: usize, symmetric: bool) -> Vec<f64> {
    let mut a = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            a[i * n + j] = if symmetric { vars[sym_index(n, i.min(j), i.max(j))] } else { vars[i * n + j] };
        }
    }
    a
}

/// Permanents of `n_samples` random matrices, in sample order.
pub fn permanent_sample(
    n: usize,
    entry: &Distribution,
    symmetric: bool,
    seed: u64,
    n_samples: u64,
) -> Result<Vec<f64>> {
    if n == 0 || n > RYSER_MAX_N {
        return Err(Error::SizeLimit(format!("permanent sampling supports 1 <= n <= {RYSER_MAX_N}, got {n}")));
    }
    entry.validate()?;
    let nv = permanent_vars(n, symmetric) as u64;
    let factory = StreamFactory::new(seed);
    let chunks = n_samples.div_ceil(CHUNK);
    let parts: Vec<Vec<f64>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut vars = vec![0.0; nv as usize];
            ((c * CHUNK)..((c + 1) * CHUNK).min(n_samples))
                .map(|s| {
                    for (v, x) in vars.iter_mut().enumerate() {
                        *x = entry.sample(&mut factory.stream(s * nv + v as u64));
                    }
                    ryser(&matrix_from_vars(&vars, n, symmetric), n).expect("size checked")
                })
                .collect()
        })
        .collect();
    Ok(parts.concat())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentEstimate {
    pub mean: f64,
    /// Standard error of the mean.
    pub sem: f64,
    pub n_samples: u64,
}

/// Sample mean with its standard error.
pub fn mean_with_error(xs: &[f64]) -> MomentEstimate {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0).max(1.0);
    MomentEstimate { mean, sem: (var / n).sqrt(), n_samples: xs.len() as u64 }
}
