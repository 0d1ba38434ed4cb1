//! Exact binomial probabilities in log space and their Gaussian approximations.
//!
//! The point probabilities use Loader's saddle-point decomposition
//! (`stirlerr` + `bd0`), which keeps full relative precision far into the
//! tails where naive `lgamma` differences lose digits to cancellation. Tails
//! are summed from the far end of the relevant side, so thresholds many
//! standard deviations out neither underflow nor cancel.

use std::f64::consts::{PI, SQRT_2};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

const LN_2PI: f64 = 1.837_877_066_409_345_5;
const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

/// Terms smaller than `exp(-TAIL_CUTOFF)` times the leading term are dropped.
const TAIL_CUTOFF: f64 = 46.0;

/// Parameters of `Bin(trials, q)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BinomialParams {
    trials: u64,
    q: f64,
}

impl BinomialParams {
    pub fn new(trials: u64, q: f64) -> Result<Self> {
        if !(q > 0.0 && q < 1.0) {
            return Err(Error::InvalidProbability(q, "(0, 1)"));
        }
        Ok(BinomialParams { trials, q })
    }

    pub fn trials(&self) -> u64 {
        self.trials
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn mean(&self) -> f64 {
        self.trials as f64 * self.q
    }

    pub fn variance(&self) -> f64 {
        self.trials as f64 * self.q * (1.0 - self.q)
    }

    fn mode(&self) -> u64 {
        (((self.trials + 1) as f64 * self.q).floor() as u64).min(self.trials)
    }
}

/// Error term of Stirling's formula: `ln n! - (n + 1/2) ln n + n - ln sqrt(2π)`.
fn stirlerr(n: u64) -> f64 {
    const S0: f64 = 1.0 / 12.0;
    const S1: f64 = 1.0 / 360.0;
    const S2: f64 = 1.0 / 1260.0;
    const S3: f64 = 1.0 / 1680.0;
    const S4: f64 = 1.0 / 1188.0;
    if n <= 15 {
        if n == 0 {
            return 0.0;
        }
        let ln_fact = (1..=n).map(|i| i as f64).product::<f64>().ln();
        let nf = n as f64;
        return ln_fact - (nf + 0.5) * nf.ln() + nf - LN_SQRT_2PI;
    }
    let nf = n as f64;
    let nn = nf * nf;
    if n > 500 {
        (S0 - S1 / nn) / nf
    } else if n > 80 {
        (S0 - (S1 - S2 / nn) / nn) / nf
    } else if n > 35 {
        (S0 - (S1 - (S2 - S3 / nn) / nn) / nn) / nf
    } else {
        (S0 - (S1 - (S2 - (S3 - S4 / nn) / nn) / nn) / nn) / nf
    }
}

/// Deviance term `x ln(x / np) + np - x`, evaluated by series near `x = np`.
fn bd0(x: f64, np: f64) -> f64 {
    if (x - np).abs() < 0.1 * (x + np) {
        let mut v = (x - np) / (x + np);
        let mut s = (x - np) * v;
        let mut ej = 2.0 * x * v;
        v *= v;
        for j in 1..1000 {
            ej *= v;
            let s1 = s + ej / (2 * j + 1) as f64;
            if s1 == s {
                return s1;
            }
            s = s1;
        }
        s
    } else {
        x * (x / np).ln() + np - x
    }
}

/// `ln P(ξ = a)` for `ξ ~ Bin(trials, q)`.
pub fn log_binom_pmf(bp: BinomialParams, a: u64) -> Result<f64> {
    let n = bp.trials;
    if a > n {
        return Err(invalid(format!("a={a} exceeds trials={n}")));
    }
    Ok(log_pmf_unchecked(bp, a))
}

fn log_pmf_unchecked(bp: BinomialParams, a: u64) -> f64 {
    let n = bp.trials;
    let q = bp.q;
    if a == 0 {
        return n as f64 * (-q).ln_1p();
    }
    if a == n {
        return n as f64 * q.ln();
    }
    let (nf, af) = (n as f64, a as f64);
    let lc = stirlerr(n)
        - stirlerr(a)
        - stirlerr(n - a)
        - bd0(af, nf * q)
        - bd0(nf - af, nf * (1.0 - q));
    let lf = LN_2PI + af.ln() + (-af / nf).ln_1p();
    lc - 0.5 * lf
}

/// Neumaier-compensated sum, smallest terms first.
fn compensated_sum_rev(terms: &[f64]) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for &t in terms.iter().rev() {
        let s = sum + t;
        if sum.abs() >= t.abs() {
            comp += (sum - s) + t;
        } else {
            comp += (t - s) + sum;
        }
        sum = s;
    }
    sum + comp
}

/// `ln Σ P(ξ = j)` over `j = start, start ± 1, …` moving away from the mode
/// until the terms become negligible or the support ends.
fn log_run_sum(bp: BinomialParams, start: u64, upward: bool) -> f64 {
    let n = bp.trials;
    let lead = log_pmf_unchecked(bp, start);
    let log_odds = bp.q.ln() - (-bp.q).ln_1p();
    let mut rel = vec![1.0f64];
    let mut offset = 0.0f64;
    let mut j = start;
    loop {
        if upward {
            if j == n {
                break;
            }
            offset += ((n - j) as f64).ln() - ((j + 1) as f64).ln() + log_odds;
            j += 1;
        } else {
            if j == 0 {
                break;
            }
            offset += (j as f64).ln() - ((n - j + 1) as f64).ln() - log_odds;
            j -= 1;
        }
        if offset < -TAIL_CUTOFF {
            break;
        }
        rel.push(offset.exp());
    }
    lead + compensated_sum_rev(&rel).ln()
}

/// `ln(1 - exp(x))` for `x <= 0`.
fn log1m_exp(x: f64) -> f64 {
    if x > -std::f64::consts::LN_2 {
        (-x.exp_m1()).ln()
    } else {
        (-x.exp()).ln_1p()
    }
}

/// `ln P(ξ > threshold)`.
pub fn log_binom_tail(bp: BinomialParams, threshold: f64) -> f64 {
    if threshold.is_nan() {
        return f64::NAN;
    }
    if threshold < 0.0 {
        return 0.0;
    }
    if threshold >= bp.trials as f64 {
        return f64::NEG_INFINITY;
    }
    let first = threshold.floor() as u64 + 1;
    if first > bp.mode() {
        log_run_sum(bp, first, true)
    } else {
        log1m_exp(log_run_sum(bp, first - 1, false).min(0.0))
    }
}

/// `P(ξ > threshold)` with the strict inequality on a real threshold.
pub fn binom_tail(bp: BinomialParams, threshold: f64) -> f64 {
    log_binom_tail(bp, threshold).exp().clamp(0.0, 1.0)
}

/// `ln P(ξ < threshold)`.
pub fn log_binom_lower_tail(bp: BinomialParams, threshold: f64) -> f64 {
    if threshold.is_nan() {
        return f64::NAN;
    }
    if threshold <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if threshold > bp.trials as f64 {
        return 0.0;
    }
    let last = threshold.ceil() as u64 - 1;
    if last < bp.mode() {
        log_run_sum(bp, last, false)
    } else {
        log1m_exp(log_run_sum(bp, last + 1, true).min(0.0))
    }
}

/// `P(ξ < threshold)`.
pub fn binom_lower_tail(bp: BinomialParams, threshold: f64) -> f64 {
    log_binom_lower_tail(bp, threshold).exp().clamp(0.0, 1.0)
}

/// `P(|ξ - trials·q| > t)`.
pub fn two_sided_tail(bp: BinomialParams, t: f64) -> f64 {
    let mu = bp.mean();
    (binom_tail(bp, mu + t) + binom_lower_tail(bp, mu - t)).min(1.0)
}

/// De Moivre–Laplace point approximation
/// `exp(-(a - nq)^2 / (2nq(1-q))) / sqrt(2π nq(1-q))`.
pub fn demoivre_pmf_approx(bp: BinomialParams, a: u64) -> f64 {
    let var = bp.variance();
    let d = a as f64 - bp.mean();
    (-d * d / (2.0 * var)).exp() / (2.0 * PI * var).sqrt()
}

/// The threshold `nq + x sqrt(n ln(N) q(1-q))` with `N = n_for_log`.
pub fn deviation_threshold(bp: BinomialParams, x: f64, n_for_log: u64) -> f64 {
    bp.mean() + x * (bp.variance() * (n_for_log as f64).ln()).sqrt()
}

/// Inverse of [`deviation_threshold`]: the `x` at which `threshold` sits.
pub fn deviation_x(bp: BinomialParams, threshold: f64, n_for_log: u64) -> f64 {
    (threshold - bp.mean()) / (bp.variance() * (n_for_log as f64).ln()).sqrt()
}

/// Asymptotic tail `exp(-x² ln N / 2) / (x sqrt(2π ln N))` for
/// `P(ξ > nq + x sqrt(n ln N q(1-q)))`; the same value approximates the
/// mirrored lower tail.
///
/// Evaluated whether or not the regime conditions hold; see [`tail_validity`].
pub fn tail_approx(bp: BinomialParams, x: f64, n_for_log: u64) -> Result<f64> {
    let _ = bp;
    if !(x > 0.0) {
        return Err(invalid(format!("x must be positive, got {x}")));
    }
    if n_for_log < 2 {
        return Err(invalid("n_for_log must be at least 2"));
    }
    let ln_n = (n_for_log as f64).ln();
    Ok((-x * x * ln_n / 2.0).exp() / (x * (2.0 * PI * ln_n).sqrt()))
}

/// Default cut-offs for [`tail_validity`]: `x sqrt(ln N)` counts as large at 3
/// and the cubic correction as small at 0.1.
pub const TAIL_LARGE_DEVIATION_MIN: f64 = 3.0;
pub const TAIL_CUBIC_TERM_MAX: f64 = 0.1;

/// Whether the Gaussian tail form is plausibly accurate at `(bp, x, N)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailValidity {
    /// `x sqrt(ln N)`; should be large.
    pub deviation: f64,
    /// `x³ sqrt(ln³N / (n q(1-q)))`; should be small.
    pub cubic_term: f64,
    pub plausible: bool,
}

pub fn tail_validity(bp: BinomialParams, x: f64, n_for_log: u64) -> TailValidity {
    let ln_n = (n_for_log as f64).ln();
    let deviation = x * ln_n.sqrt();
    let cubic_term = x.powi(3) * (ln_n.powi(3) / bp.variance()).sqrt();
    TailValidity {
        deviation,
        cubic_term,
        plausible: deviation >= TAIL_LARGE_DEVIATION_MIN && cubic_term <= TAIL_CUBIC_TERM_MAX,
    }
}

/// `2 exp(-t² / (2(nq + t/3)))`, an upper bound on `P(|ξ - nq| > t)`.
pub fn chernoff_tail_bound(bp: BinomialParams, t: f64) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(invalid(format!("t must be nonnegative, got {t}")));
    }
    if t == 0.0 {
        return Ok(2.0);
    }
    Ok(2.0 * (-t * t / (2.0 * (bp.mean() + t / 3.0))).exp())
}

/// Exact vs approximate probability, with the relative error when defined.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailComparison {
    pub exact: f64,
    pub approx: f64,
    /// `|approx - exact| / exact`; `None` when `exact == 0`.
    pub rel_error: Option<f64>,
}

impl TailComparison {
    pub fn new(exact: f64, approx: f64) -> Self {
        let rel_error = (exact != 0.0).then(|| (approx - exact).abs() / exact);
        TailComparison {
            exact,
            approx,
            rel_error,
        }
    }
}

/// Standard normal CDF, `Φ(t) = erfc(-t/√2) / 2`.
pub fn normal_cdf(t: f64) -> f64 {
    0.5 * libm::erfc(-t / SQRT_2)
}

/// Mills-ratio form of the upper normal tail, `exp(-t²/2) / (t sqrt(2π))`.
pub fn mills_tail(t: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(invalid(format!("t must be positive, got {t}")));
    }
    Ok((-t * t / 2.0).exp() / (t * (2.0 * PI).sqrt()))
}
