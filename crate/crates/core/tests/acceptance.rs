//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.
//!
//! Run with `cargo test --release -p gnpx-core --test acceptance`.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use gnpx_core::binomial::{binom_tail, chernoff_tail_bound, deviation_threshold, tail_approx, two_sided_tail};
use gnpx_core::extremes::{brute_force_top_m, count_ell_exceedances, top_m_common_neighbors};
use gnpx_core::limits::{bollobas_normalization, gamma_ell, lambda_exact, normalization};
use gnpx_core::montecarlo::{run_experiment, Threads};
use gnpx_core::{BinomialParams, ExperimentConfig, Graph, TailComparison};
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

struct Outcome {
    pass: bool,
    detail: String,
}

fn check(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn within_budget(elapsed: Duration, limit: Duration, outcome: Outcome) -> Outcome {
    if elapsed > limit {
        check(false, format!("{}; over time budget {:?}", outcome.detail, limit))
    } else {
        outcome
    }
}

fn oracle_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut mismatches = Vec::new();
    for case in 0..200 {
        let n = 4 + (rng.next_u64() % 9) as usize;
        let p = [0.2, 0.5, 0.8][(rng.next_u64() % 3) as usize];
        let k = 1 + (rng.next_u64() % 3) as usize;
        let m = 1 + (rng.next_u64() % 3) as usize;
        let seed = rng.next_u64();
        let g = Graph::sample_gnp(n, p, seed).unwrap();
        let fast = top_m_common_neighbors(&g, k, m).unwrap();
        let slow = brute_force_top_m(&g, k, m).unwrap();
        if fast != slow {
            mismatches.push(format!("case {case}: n={n} p={p} k={k} m={m} seed={seed}"));
        }
    }
    check(mismatches.is_empty(), format!("200 configurations, {} mismatches {:?}", mismatches.len(), mismatches))
}

fn analytic_identity() -> Outcome {
    let mut worst: f64 = 0.0;
    for n in [100u64, 1_000, 10_000, 100_000, 1_000_000] {
        for p in [0.1, 0.5, 0.9] {
            let ours = normalization(n, p, 1).unwrap();
            let reference = bollobas_normalization(n, p).unwrap();
            worst = worst
                .max(((ours.a - reference.a) / reference.a).abs())
                .max(((ours.sigma - reference.sigma) / reference.sigma).abs());
        }
    }
    check(worst <= 1e-12, format!("max relative error {worst:.3e} (tolerance 1e-12)"))
}

fn exact_vs_asymptotic_tails() -> Outcome {
    let x = std::f64::consts::SQRT_2;
    let mut errors = Vec::new();
    for n in [10_000u64, 100_000, 1_000_000] {
        let bp = BinomialParams::new(n, 0.5).unwrap();
        let exact = binom_tail(bp, deviation_threshold(bp, x, n));
        let approx = tail_approx(bp, x, n).unwrap();
        errors.push(TailComparison::new(exact, approx).rel_error.unwrap());
    }
    let decreasing = errors.windows(2).all(|w| w[1] < w[0]);
    let last_ok = errors[2] < 0.2;

    let bp = BinomialParams::new(100, 0.5).unwrap();
    let mut violations = Vec::new();
    for i in 1..=10 {
        let t = 5.0 * i as f64;
        if chernoff_tail_bound(bp, t).unwrap() < two_sided_tail(bp, t) {
            violations.push(t);
        }
    }
    check(
        decreasing && last_ok && violations.is_empty(),
        format!(
            "relative errors n=1e4,1e5,1e6: {:.6}, {:.6}, {:.6} (strictly decreasing: {decreasing}, last < 0.2: {last_ok}); \
             Chernoff violations on t=5..50: {violations:?}",
            errors[0], errors[1], errors[2]
        ),
    )
}

fn lambda_convergence() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for y in [-1.0f64, 0.0, 1.0] {
        let gaps: Vec<f64> = [1_000u64, 10_000, 100_000]
            .iter()
            .map(|&n| (lambda_exact(n, 0.3, 2, y).unwrap().lambda - (-y).exp()).abs())
            .collect();
        let decreasing = gaps.windows(2).all(|w| w[1] < w[0]);
        let small = gaps[2] < 0.15;
        pass &= decreasing && small;
        parts.push(format!(
            "y={y}: {:.4}, {:.4}, {:.4} (decreasing: {decreasing}, last < 0.15: {small})",
            gaps[0], gaps[1], gaps[2]
        ));
    }
    check(pass, parts.join("; "))
}

fn distributional_convergence() -> Outcome {
    let mut cfg = ExperimentConfig::new(1000, 0.3, 2, 1, 1000, 1);
    let first = run_experiment(&cfg).unwrap().summary;
    cfg.m = 2;
    let second = run_experiment(&cfg).unwrap().summary;

    let ks_janson = first.ks_vs_janson.unwrap();
    let ks_gumbel = first.ks_vs_gumbel;
    let fit = first.gumbel_fit.unwrap();
    let ks_gumbel_2 = second.ks_vs_gumbel;
    let checks = [
        ks_janson <= 0.10,
        ks_gumbel <= 0.20,
        (-0.5..=0.5).contains(&fit.location),
        (0.7..=1.3).contains(&fit.scale),
        ks_gumbel_2 <= 0.25,
    ];
    check(
        checks.iter().all(|&c| c),
        format!(
            "m=1: ks_vs_janson {ks_janson:.4} (<= 0.10: {}), ks_vs_gumbel {ks_gumbel:.4} (<= 0.20: {}), \
             fit location {:.4} (in [-0.5,0.5]: {}), scale {:.4} (in [0.7,1.3]: {}); m=2: ks_vs_gumbel {ks_gumbel_2:.4} (<= 0.25: {})",
            checks[0], checks[1], fit.location, checks[2], fit.scale, checks[3], checks[4]
        ),
    )
}

fn gamma_exceedance() -> Outcome {
    let mut rates = Vec::new();
    for n in [200usize, 500, 1000] {
        let gamma = gamma_ell(n as u64, 0.5, 1).unwrap();
        let mut hits = 0;
        for t in 0..200u64 {
            let seed = gnpx_core::montecarlo::trial_seed(1, t);
            let g = Graph::sample_gnp(n, 0.5, seed).unwrap();
            if count_ell_exceedances(&g, 1, gamma).unwrap().count > 0 {
                hits += 1;
            }
        }
        rates.push(hits as f64 / 200.0);
    }
    let decreasing = rates.windows(2).all(|w| w[1] < w[0]);
    let last_ok = rates[2] <= 0.25;
    check(
        decreasing && last_ok,
        format!(
            "rates n=200,500,1000: {}, {}, {} (decreasing: {decreasing}, last <= 0.25: {last_ok})",
            rates[0], rates[1], rates[2]
        ),
    )
}

fn reproducibility() -> Outcome {
    let mut cfg = ExperimentConfig::new(150, 0.4, 2, 2, 40, 1);
    let serialize = |c: &ExperimentConfig| {
        let run = run_experiment(c).unwrap();
        (gnpx_core::json::to_string(&run.summary).unwrap(), run.records)
    };
    cfg.threads = Threads::Fixed(1);
    let a = serialize(&cfg);
    let b = serialize(&cfg);
    cfg.threads = Threads::Fixed(4);
    let c = serialize(&cfg);
    // The config echo carries the thread count; compare everything else.
    let strip = |s: &str| s.replace("\"threads\": 1", "").replace("\"threads\": 4", "");
    let same_runs = a == b;
    let same_threads = strip(&a.0) == strip(&c.0) && a.1 == c.1;
    check(
        same_runs && same_threads,
        format!("repeat identical: {same_runs}; threads 1 vs 4 identical: {same_threads}"),
    )
}

type Criterion = (&'static str, fn() -> Outcome, Duration);

fn main() -> ExitCode {
    let criteria: [Criterion; 7] = [
        ("C1 oracle equivalence", oracle_equivalence, Duration::from_secs(10)),
        ("C2 analytic identity", analytic_identity, Duration::from_secs(1)),
        ("C3 exact vs asymptotic tails", exact_vs_asymptotic_tails, Duration::from_secs(30)),
        ("C4 lambda convergence", lambda_convergence, Duration::from_secs(60)),
        ("C5 distributional convergence", distributional_convergence, Duration::from_secs(600)),
        ("C6 gamma exceedance", gamma_exceedance, Duration::from_secs(120)),
        ("C7 reproducibility", reproducibility, Duration::from_secs(60)),
    ];
    let mut failed = 0;
    for (name, run, limit) in criteria {
        let start = Instant::now();
        let outcome = run();
        let elapsed = start.elapsed();
        let outcome = within_budget(elapsed, limit, outcome);
        let status = if outcome.pass { "PASS" } else { "FAIL" };
        println!("{status} {name}: {} [{:.2?}]", outcome.detail, elapsed);
        if !outcome.pass {
            failed += 1;
        }
    }
    println!("{} of 7 criteria passed", 7 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
