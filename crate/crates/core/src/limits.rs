//! Normalization constants, limiting distribution and finite-`n` references
//! for the maximum common-neighbor count.
//!
//! With `q = p^k` and `L = ln n`,
//!
//! ```text
//! a_{k;n} = n q + sqrt(2k q(1-q) n L) (1 - ln(k!)/(2kL) - ln(4πkL)/(4kL))
//! σ_{k;n} = sqrt(q(1-q) n / (2kL))
//! ```
//!
//! and `(Δ^m_{k;n} - a_{k;n}) / σ_{k;n}` converges to the law with CDF
//! `exp(-e^{-y}) Σ_{i<m} e^{-yi}/i!`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::binomial::{log_binom_tail, BinomialParams};
use crate::error::{invalid, Error, Result};

/// `(p^k, 1 - p^k)` with the complement taken as `-expm1(k ln p)`, which
/// stays accurate when `p` is close to 1.
pub fn power_and_complement(p: f64, k: u32) -> (f64, f64) {
    let log_q = k as f64 * p.ln();
    (log_q.exp(), -log_q.exp_m1())
}

fn ln_factorial(k: u32) -> f64 {
    (2..=k).map(|i| (i as f64).ln()).sum()
}

/// `ln C(n, k)` as a sum of `k` logarithms.
pub fn ln_choose(n: u64, k: u64) -> f64 {
    let k = k.min(n - k);
    (0..k)
        .map(|i| ((n - i) as f64).ln() - ((i + 1) as f64).ln())
        .sum()
}

fn check_p_open(p: f64) -> Result<()> {
    if p > 0.0 && p < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidProbability(p, "(0, 1)"))
    }
}

fn check_common(n: u64, p: f64, k: u32) -> Result<()> {
    if n < 3 {
        return Err(invalid(format!("n must be at least 3, got {n}")));
    }
    check_p_open(p)?;
    if k < 1 {
        return Err(invalid("k must be at least 1"));
    }
    Ok(())
}

/// Centering `a` and scale `sigma` for `k`-set maxima in `G(n, p)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalizationParams {
    pub n: u64,
    pub p: f64,
    pub k: u32,
    pub a: f64,
    pub sigma: f64,
}

impl NormalizationParams {
    /// `b(y) = a + y σ`.
    pub fn threshold(&self, y: f64) -> f64 {
        self.a + y * self.sigma
    }

    /// `(value - a) / σ`.
    pub fn normalize(&self, value: f64) -> f64 {
        (value - self.a) / self.sigma
    }
}

/// `a_{k;n}` and `σ_{k;n}`.
///
/// Fails when the bracketed correction factor is not positive, which happens
/// only for very small `n` relative to `k`.
pub fn normalization(n: u64, p: f64, k: u32) -> Result<NormalizationParams> {
    check_common(n, p, k)?;
    let (q, q_c) = power_and_complement(p, k);
    let nf = n as f64;
    let kf = k as f64;
    let ln_n = nf.ln();
    let correction = 1.0
        - ln_factorial(k) / (2.0 * kf * ln_n)
        - (4.0 * PI * kf * ln_n).ln() / (4.0 * kf * ln_n);
    if !(correction > 0.0) {
        return Err(invalid(format!(
            "normalization correction factor {correction} is not positive at n={n}, k={k}"
        )));
    }
    let a = nf * q + (2.0 * kf * q * q_c * nf * ln_n).sqrt() * correction;
    let sigma = (q * q_c * nf / (2.0 * kf * ln_n)).sqrt();
    if !(sigma > 0.0) || !(a > nf * q) {
        return Err(invalid(format!("degenerate normalization at n={n}, p={p}, k={k}")));
    }
    Ok(NormalizationParams { n, p, k, a, sigma })
}

/// The classical maximum-degree constants `a_n`, `σ_n`, written out in
/// their own form (`ln ln n` and `ln(2√π)` rather than `ln(4π ln n)`).
pub fn bollobas_normalization(n: u64, p: f64) -> Result<NormalizationParams> {
    check_common(n, p, 1)?;
    let nf = n as f64;
    let ln_n = nf.ln();
    let a = p * nf
        + (2.0 * p * (1.0 - p) * nf * ln_n).sqrt()
            * (1.0 - ln_n.ln() / (4.0 * ln_n) - (2.0 * PI.sqrt()).ln() / (2.0 * ln_n));
    let sigma = (p * (1.0 - p) * nf / (2.0 * ln_n)).sqrt();
    Ok(NormalizationParams { n, p, k: 1, a, sigma })
}

pub fn threshold_b(params: &NormalizationParams, y: f64) -> f64 {
    params.threshold(y)
}

/// Limiting CDF of the `m`-th normalized maximum:
/// `exp(-e^{-y}) Σ_{i=0}^{m-1} e^{-yi} / i!`.
pub fn gumbel_limit_cdf(y: f64, m: u32) -> Result<f64> {
    if m < 1 {
        return Err(invalid("m must be at least 1"));
    }
    if y.is_nan() {
        return Ok(f64::NAN);
    }
    // P(Poisson(μ) <= m - 1) with μ = e^{-y}.
    let mu = (-y).exp();
    let log_mu = -y;
    let log_term = |i: u32, log_fact: f64| -mu + i as f64 * log_mu - log_fact;
    if mu < 1.0 {
        // Sum the upper tail and complement it, so the result is monotone
        // where it rounds toward 1.
        let mut log_fact: f64 = (2..=m).map(|j| (j as f64).ln()).sum();
        let mut tail = 0.0;
        let mut i = m;
        loop {
            let t = log_term(i, log_fact).exp();
            tail += t;
            if t <= tail * 1e-17 || i > m + 200 {
                break;
            }
            i += 1;
            log_fact += (i as f64).ln();
        }
        return Ok((1.0 - tail).max(0.0));
    }
    let mut total = 0.0;
    let mut log_fact = 0.0;
    for i in 0..m {
        if i > 0 {
            log_fact += (i as f64).ln();
        }
        total += log_term(i, log_fact).exp();
    }
    Ok(total.min(1.0))
}

/// `Γ_ℓ = n p^ℓ + sqrt(2ℓ) sqrt(n p^ℓ (1 - p^ℓ) ln n)`.
pub fn gamma_ell(n: u64, p: f64, ell: u32) -> Result<f64> {
    check_common(n, p, ell)?;
    let (q, q_c) = power_and_complement(p, ell);
    let nf = n as f64;
    Ok(nf * q + (2.0 * ell as f64).sqrt() * (nf * q * q_c * nf.ln()).sqrt())
}

/// Cut-offs above which the growth conditions count as plausibly met.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConditionThresholds {
    pub ratio1_min: f64,
    pub ratio2_min: f64,
}

impl Default for ConditionThresholds {
    fn default() -> Self {
        ConditionThresholds {
            ratio1_min: 10.0,
            ratio2_min: 3.0,
        }
    }
}

/// How far `(n, p, k)` sits inside the regime `p^k ≫ ln³n / n`,
/// `1 - p ≫ sqrt(ln ln n / ln n)`. Advisory only.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    /// `p^k n / ln³ n`.
    pub ratio1: f64,
    /// `(1 - p) sqrt(ln n / ln ln n)`.
    pub ratio2: f64,
    pub ratio1_satisfied: bool,
    pub ratio2_satisfied: bool,
    pub thresholds: ConditionThresholds,
}

pub fn check_conditions(n: u64, p: f64, k: u32) -> Result<ConditionReport> {
    check_conditions_with(n, p, k, ConditionThresholds::default())
}

pub fn check_conditions_with(
    n: u64,
    p: f64,
    k: u32,
    thresholds: ConditionThresholds,
) -> Result<ConditionReport> {
    if n < 16 {
        return Err(invalid(format!("condition check needs n >= 16, got {n}")));
    }
    check_common(n, p, k)?;
    let (q, _) = power_and_complement(p, k);
    let ln_n = (n as f64).ln();
    let ratio1 = q * n as f64 / ln_n.powi(3);
    let ratio2 = (1.0 - p) * (ln_n / ln_n.ln()).sqrt();
    Ok(ConditionReport {
        ratio1,
        ratio2,
        ratio1_satisfied: ratio1 >= thresholds.ratio1_min,
        ratio2_satisfied: ratio2 >= thresholds.ratio2_min,
        thresholds,
    })
}

/// Expected number `λ` of `k`-sets above `b(y)` and the resulting
/// `exp(-λ)` reference for `P(Δ_{k;n} ≤ b(y))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JansonReport {
    pub y: f64,
    pub b: f64,
    pub lambda: f64,
    /// `exp(-λ)`.
    pub lower_bound: f64,
    /// `exp(-e^{-y})`.
    pub gumbel_ref: f64,
}

/// `λ = C(n, k) P(Bin(n - k, p^k) > b(y))`, assembled in log space.
pub fn lambda_exact(n: u64, p: f64, k: u32, y: f64) -> Result<JansonReport> {
    let params = normalization(n, p, k)?;
    lambda_for(&params, y)
}

/// [`lambda_exact`] for precomputed constants.
pub fn lambda_for(params: &NormalizationParams, y: f64) -> Result<JansonReport> {
    let (n, k) = (params.n, params.k as u64);
    if k >= n {
        return Err(invalid(format!("k={k} must be below n={n}")));
    }
    let (q, _) = power_and_complement(params.p, params.k);
    let bp = BinomialParams::new(n - k, q)?;
    let b = params.threshold(y);
    let log_lambda = ln_choose(n, k) + log_binom_tail(bp, b);
    let lambda = log_lambda.exp();
    Ok(JansonReport {
        y,
        b,
        lambda,
        lower_bound: (-lambda).exp(),
        gumbel_ref: (-(-y).exp()).exp(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    // Oracle values below come from 40-digit mpmath evaluations of the
    // closed forms (and scipy's binomial survival function for λ).

    #[test]
    fn normalization_reference_values() {
        let np = normalization(1000, 0.5, 2).unwrap();
        assert_relative_eq!(np.a, 313.455_596_313_374_58, max_relative = 1e-13);
        assert_relative_eq!(np.sigma, 2.604_966_656_166_314_5, max_relative = 1e-13);
        assert_relative_eq!(threshold_b(&np, 1.0), 316.060_562_969_540_89, max_relative = 1e-13);
        assert_eq!(threshold_b(&np, 0.0), np.a);
    }

    #[test]
    fn bollobas_reference_values() {
        let b = bollobas_normalization(10_000, 0.5).unwrap();
        assert_relative_eq!(b.a, 5_186.920_540_921_000_6, max_relative = 1e-13);
        assert_relative_eq!(b.sigma, 11.649_765_044_616_402, max_relative = 1e-13);
    }

    #[test]
    fn k_one_matches_bollobas() {
        for e in 2..=6 {
            let n = 10u64.pow(e);
            for p in [0.1, 0.5, 0.9] {
                let ours = normalization(n, p, 1).unwrap();
                let theirs = bollobas_normalization(n, p).unwrap();
                assert_relative_eq!(ours.a, theirs.a, max_relative = 1e-12);
                assert_relative_eq!(ours.sigma, theirs.sigma, max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn sigma_scales_like_sqrt_n_over_log() {
        let mut prev = 0.0;
        for e in [3, 6, 9, 12, 15] {
            let n = 10u64.pow(e);
            let r = normalization(4 * n, 0.5, 2).unwrap().sigma / normalization(n, 0.5, 2).unwrap().sigma;
            assert!(r < 2.0 && r > prev);
            prev = r;
        }
        assert!(2.0 - prev < 0.05);
    }

    #[test]
    fn parameter_errors() {
        assert!(normalization(2, 0.5, 1).is_err());
        assert!(normalization(100, 0.0, 1).is_err());
        assert!(normalization(100, 1.0, 1).is_err());
        assert!(normalization(100, 0.5, 0).is_err());
        assert!(bollobas_normalization(100, 1.5).is_err());
        assert!(gamma_ell(100, 0.5, 0).is_err());
        assert!(check_conditions(15, 0.5, 1).is_err());
        assert!(gumbel_limit_cdf(0.0, 0).is_err());
        // Correction factor turns negative for tiny n and large k.
        assert!(normalization(3, 0.5, 40).is_err());
    }

    #[test]
    fn limit_cdf_examples() {
        assert_relative_eq!(gumbel_limit_cdf(0.0, 1).unwrap(), 0.367_879_441_171_442_32, max_relative = 1e-15);
        assert_relative_eq!(gumbel_limit_cdf(0.0, 2).unwrap(), 0.735_758_882_342_884_64, max_relative = 1e-15);
        for m in 1..6 {
            let v = gumbel_limit_cdf(30.0, m).unwrap();
            assert!(1.0 - v < 1e-12 && v <= 1.0);
        }
        assert_eq!(gumbel_limit_cdf(-800.0, 3).unwrap(), 0.0);
    }

    #[test]
    fn limit_cdf_increments() {
        for m in 2..8u32 {
            for i in -40..=60 {
                let y = i as f64 * 0.1;
                let diff = gumbel_limit_cdf(y, m).unwrap() - gumbel_limit_cdf(y, m - 1).unwrap();
                let fact: f64 = (1..m).map(|j| j as f64).product();
                let expected = (-(-y).exp()).exp() * (-y * (m - 1) as f64).exp() / fact;
                assert!((diff - expected).abs() < 1e-14, "m={m} y={y}");
                assert!(diff >= 0.0);
            }
        }
    }

    #[test]
    fn gamma_examples() {
        assert_relative_eq!(gamma_ell(1000, 0.5, 1).unwrap(), 558.769_700_011_919_99, max_relative = 1e-13);
        for ell in 1..5 {
            for p in [0.1, 0.5, 0.9] {
                assert!(gamma_ell(1000, p, ell).unwrap() > 1000.0 * p.powi(ell as i32));
            }
        }
    }

    #[test]
    fn condition_examples() {
        let r = check_conditions(1_000_000, 0.5, 2).unwrap();
        assert_relative_eq!(r.ratio1, 94.806_735_225_175_906, max_relative = 1e-12);
        assert!(r.ratio1_satisfied);
        let r = check_conditions(1_000_000, 0.999, 1).unwrap();
        assert_relative_eq!(r.ratio2, 0.002_293_788_210_273_888, max_relative = 1e-9);
        assert!(!r.ratio2_satisfied);
        let r2 = check_conditions(2_000_000, 0.999, 1).unwrap();
        let r1 = check_conditions(1_000_000, 0.999, 1).unwrap();
        let ln_ratio = (1e6f64.ln() / 2e6f64.ln()).powi(3);
        assert_relative_eq!(r2.ratio1 / r1.ratio1, 2.0 * ln_ratio, max_relative = 1e-12);
        let custom = check_conditions_with(
            1_000_000,
            0.5,
            2,
            ConditionThresholds { ratio1_min: 100.0, ratio2_min: 0.1 },
        )
        .unwrap();
        assert!(!custom.ratio1_satisfied && custom.ratio2_satisfied);
    }

    #[test]
    fn stable_complement_near_one() {
        let (q, qc) = power_and_complement(1.0 - 1e-12, 3);
        assert_relative_eq!(qc, 3e-12, max_relative = 1e-6);
        assert!(q < 1.0);
    }

    #[test]
    fn lambda_small_n() {
        let r = lambda_exact(100, 0.5, 1, 0.0).unwrap();
        assert_relative_eq!(r.lambda, 0.771_618_225_365_435_6, max_relative = 1e-9);
        assert_relative_eq!(r.lower_bound, (-0.771_618_225_365_435_6f64).exp(), max_relative = 1e-9);
        assert_relative_eq!(r.gumbel_ref, (-1.0f64).exp(), max_relative = 1e-15);
    }

    #[test]
    fn lambda_reference_k2() {
        // |λ - e^{-y}| at p = 0.3, k = 2 from scipy.stats.binom.logsf.
        let reference = [
            (1_000u64, -1.0, 2.491_697_933_854_81),
            (10_000, 0.0, 0.862_832_671_150_628),
            (100_000, 1.0, 0.144_783_189_236_361_58),
        ];
        for (n, y, gap) in reference {
            let r = lambda_exact(n, 0.3, 2, y).unwrap();
            assert_relative_eq!((r.lambda - (-y).exp()).abs(), gap, max_relative = 1e-8);
        }
    }

    #[test]
    fn lambda_vanishes_beyond_support() {
        let r = lambda_exact(100, 0.5, 2, 1000.0).unwrap();
        assert!(r.b >= 98.0);
        assert_eq!(r.lambda, 0.0);
        assert_eq!(r.lower_bound, 1.0);
    }

    #[test]
    fn ln_choose_small() {
        assert_relative_eq!(ln_choose(10, 3), 120f64.ln(), max_relative = 1e-14);
        assert_eq!(ln_choose(5, 5), 0.0);
    }

    proptest! {
        #[test]
        fn k_one_identity_random(e in 2.0f64..8.0, p in 0.01f64..0.99) {
            let n = 10f64.powf(e) as u64;
            let ours = normalization(n, p, 1).unwrap();
            let theirs = bollobas_normalization(n, p).unwrap();
            prop_assert!((ours.a / theirs.a - 1.0).abs() < 1e-12);
            prop_assert!((ours.sigma / theirs.sigma - 1.0).abs() < 1e-12);
        }

        #[test]
        fn threshold_is_affine(y1 in -10.0f64..10.0, y2 in -10.0f64..10.0) {
            let np = normalization(1000, 0.5, 2).unwrap();
            let lhs = threshold_b(&np, y1) + threshold_b(&np, y2);
            let rhs = 2.0 * threshold_b(&np, (y1 + y2) / 2.0);
            prop_assert!((lhs - rhs).abs() < 1e-10);
        }

        #[test]
        fn limit_cdf_is_monotone(y in -10.0f64..20.0, dy in 0.0f64..3.0, m in 1u32..6) {
            let f = gumbel_limit_cdf(y, m).unwrap();
            prop_assert!((0.0..=1.0).contains(&f));
            prop_assert!(gumbel_limit_cdf(y + dy, m).unwrap() >= f - 1e-15);
            prop_assert!(gumbel_limit_cdf(y, m + 1).unwrap() >= f - 1e-15);
        }

        #[test]
        fn lambda_decreases_in_y(y in -3.0f64..5.0, dy in 0.0f64..2.0) {
            let a = lambda_exact(500, 0.4, 2, y).unwrap().lambda;
            let b = lambda_exact(500, 0.4, 2, y + dy).unwrap().lambda;
            prop_assert!(b <= a * (1.0 + 1e-12));
        }
    }
}
