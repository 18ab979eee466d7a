//! Log-space probability arithmetic.

use statrs::function::factorial::ln_binomial;
pub use statrs::function::factorial::ln_factorial;

/// ln(sum(exp(x_i))), with an empty or all-minus-infinity input giving -inf.
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let m = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    if m == f64::INFINITY {
        return f64::INFINITY;
    }
    m + xs.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

/// ln(exp(a) + exp(b)).
pub fn log_add(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if lo == f64::NEG_INFINITY {
        return hi;
    }
    hi + (lo - hi).exp().ln_1p()
}

pub fn ln_choose(n: u64, k: u64) -> f64 {
    if k > n {
        return f64::NEG_INFINITY;
    }
    ln_binomial(n, k)
}

/// ln P[Bin(n, p) = k].
pub fn ln_binom_pmf(n: u64, p: f64, k: u64) -> f64 {
    if k > n {
        return f64::NEG_INFINITY;
    }
    if p == 0.0 {
        return if k == 0 { 0.0 } else { f64::NEG_INFINITY };
    }
    if p == 1.0 {
        return if k == n { 0.0 } else { f64::NEG_INFINITY };
    }
    ln_choose(n, k) + k as f64 * p.ln() + (n - k) as f64 * (-p).ln_1p()
}

/// Terms below the running total by this many nats are dropped once the
/// pmf is decreasing; e^-60 relative is far below f64 resolution.
const TAIL_CUTOFF: f64 = 60.0;

/// ln P[Bin(n, p) >= k], summed upward with the pmf ratio recurrence.
pub fn ln_binom_upper_tail(n: u64, p: f64, k: u64) -> f64 {
    if k == 0 {
        return 0.0;
    }
    if k > n || p == 0.0 {
        return f64::NEG_INFINITY;
    }
    if p == 1.0 {
        return 0.0;
    }
    let ratio = p.ln() - (-p).ln_1p();
    let mut term = ln_binom_pmf(n, p, k);
    let mut acc = term;
    let mut j = k;
    while j < n {
        term += ((n - j) as f64).ln() - ((j + 1) as f64).ln() + ratio;
        j += 1;
        acc = log_add(acc, term);
        let past_mode = (j as f64) > (n as f64 + 1.0) * p;
        if past_mode && term < acc - TAIL_CUTOFF {
            break;
        }
    }
    acc
}

/// ln P[Bin(n, p) <= k], summed downward.
pub fn ln_binom_lower_tail(n: u64, p: f64, k: u64) -> f64 {
    if k >= n {
        return 0.0;
    }
    ln_binom_upper_tail(n, 1.0 - p, n - k)
}
