//! Reproducible Monte Carlo experiments on the normalized maxima.
//!
//! Trial `t` samples its graph from `trial_seed(master_seed, t)`, so a run is
//! a pure function of the configuration: thread count and scheduling only
//! change how fast the trials finish, never what they produce. Records are
//! merged in trial order before any aggregation.

use std::io::Write;
use std::sync::atomic::{AtomicUsize, Ordering};

use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{invalid, Error, Result};
use crate::extremes::{binomial_coefficient, count_ell_exceedances, top_m_common_neighbors};
use crate::graph::{Graph, SamplingMethod, GEOMETRIC_SKIP_BELOW};
use crate::json::fmt_f64;
use crate::limits::{gamma_ell, gumbel_limit_cdf, lambda_for, normalization, NormalizationParams};

/// Euler–Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// SplitMix64 finalizer (Steele, Lea & Flood 2014).
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for trial `index`: `splitmix64(master ^ splitmix64(index))`.
pub fn trial_seed(master: u64, index: u64) -> u64 {
    splitmix64(master ^ splitmix64(index))
}

/// Worker count: a fixed number or the rayon default.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Threads {
    #[default]
    Auto,
    Fixed(usize),
}

impl Serialize for Threads {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Threads::Auto => s.serialize_str("auto"),
            Threads::Fixed(n) => s.serialize_u64(*n as u64),
        }
    }
}

impl<'de> Deserialize<'de> for Threads {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Count(usize),
            Word(String),
        }
        match Repr::deserialize(d)? {
            Repr::Count(0) => Err(serde::de::Error::custom("threads must be positive")),
            Repr::Count(n) => Ok(Threads::Fixed(n)),
            Repr::Word(w) if w == "auto" => Ok(Threads::Auto),
            Repr::Word(w) => w
                .parse::<usize>()
                .ok()
                .filter(|&n| n > 0)
                .map(Threads::Fixed)
                .ok_or_else(|| serde::de::Error::custom(format!("invalid thread count {w:?}"))),
        }
    }
}

impl std::str::FromStr for Threads {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "auto" => Ok(Threads::Auto),
            _ => match s.parse::<usize>() {
                Ok(n) if n > 0 => Ok(Threads::Fixed(n)),
                _ => Err(invalid(format!("invalid thread count {s:?}"))),
            },
        }
    }
}

/// `lo, lo + step, …` up to `hi` (inclusive, with a little slack for rounding).
pub fn uniform_grid(lo: f64, hi: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0) || !(hi >= lo) || !lo.is_finite() || !hi.is_finite() {
        return Err(invalid(format!("bad grid {lo}..{hi} step {step}")));
    }
    let count = ((hi - lo) / step + 1e-9).floor() as usize + 1;
    Ok((0..count).map(|i| lo + i as f64 * step).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub n: usize,
    pub p: f64,
    pub k: usize,
    pub m: usize,
    pub trials: usize,
    pub y_grid: Vec<f64>,
    pub master_seed: u64,
    #[serde(default)]
    pub threads: Threads,
}

impl ExperimentConfig {
    /// Default evaluation grid, `-2, -1.75, …, 4`.
    pub fn default_grid() -> Vec<f64> {
        uniform_grid(-2.0, 4.0, 0.25).expect("static grid")
    }

    pub fn new(n: usize, p: f64, k: usize, m: usize, trials: usize, master_seed: u64) -> Self {
        ExperimentConfig {
            n,
            p,
            k,
            m,
            trials,
            y_grid: Self::default_grid(),
            master_seed,
            threads: Threads::Auto,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 3 {
            return Err(invalid(format!("n must be at least 3, got {}", self.n)));
        }
        if !(0.0..=1.0).contains(&self.p) {
            return Err(Error::InvalidProbability(self.p, "[0, 1]"));
        }
        if self.k == 0 || self.k >= self.n {
            return Err(Error::InvalidSubsetSize { k: self.k, n: self.n });
        }
        if self.m == 0 {
            return Err(Error::InvalidOrderCount);
        }
        if binomial_coefficient(self.n, self.k).is_some_and(|c| c < self.m as u128) {
            return Err(invalid(format!("m={} exceeds C(n, k)", self.m)));
        }
        if self.trials == 0 {
            return Err(invalid("trials must be at least 1"));
        }
        if self.y_grid.is_empty() {
            return Err(invalid("y_grid is empty"));
        }
        if self.y_grid.iter().any(|y| !y.is_finite()) || self.y_grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(invalid("y_grid must be finite and strictly increasing"));
        }
        if self.threads == Threads::Fixed(0) {
            return Err(invalid("threads must be positive"));
        }
        Ok(())
    }
}

/// Raw and normalized order statistics of one sampled graph.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial_index: usize,
    pub seed_used: u64,
    /// `Δ^1 ≥ … ≥ Δ^m`.
    pub delta_values: Vec<usize>,
    /// `(Δ^j - a) / σ`.
    pub normalized: Vec<f64>,
    /// For `ℓ = 1..k-1`, the number of `ℓ`-sets above `Γ_ℓ`.
    pub gamma_exceedances: Vec<u64>,
}

/// The centering actually used to normalize trial maxima. For `p` in
/// `{0, 1}` the closed form degenerates to `a = n p^k`, `σ = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Centering {
    pub a: f64,
    pub sigma: f64,
    pub degenerate: bool,
}

impl Centering {
    fn normalize(&self, value: usize) -> f64 {
        (value as f64 - self.a) / self.sigma
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CdfRow {
    pub y: f64,
    pub empirical: f64,
    pub gumbel: f64,
    /// `exp(-λ(y))`, reported for `m = 1` only.
    pub janson: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GumbelFit {
    pub location: f64,
    pub scale: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSummary {
    pub config: ExperimentConfig,
    pub normalization: Centering,
    pub sampling_method: SamplingMethod,
    pub cdf: Vec<CdfRow>,
    pub ks_vs_gumbel: f64,
    pub ks_vs_janson: Option<f64>,
    pub gumbel_fit: Option<GumbelFit>,
    /// Fraction of trials with some `ℓ`-set above `Γ_ℓ`; absent for `k = 1`.
    pub gamma_exceedance_rate: Option<f64>,
}

/// Summary plus the per-trial records it was built from.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentRun {
    pub summary: ExperimentSummary,
    pub records: Vec<TrialRecord>,
}

/// Empirical CDF evaluated on a fixed grid.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalCdf {
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
}

impl EmpiricalCdf {
    /// `F̂(y) = #{s ≤ y} / len` at each grid point. `NaN` samples never count.
    pub fn from_samples(samples: &[f64], grid: &[f64]) -> Result<Self> {
        if grid.is_empty() {
            return Err(invalid("empty evaluation grid"));
        }
        if samples.is_empty() {
            return Err(invalid("no samples"));
        }
        let len = samples.len() as f64;
        let values = grid
            .iter()
            .map(|&y| samples.iter().filter(|&&s| s <= y).count() as f64 / len)
            .collect();
        Ok(EmpiricalCdf {
            grid: grid.to_vec(),
            values,
        })
    }
}

/// Grid-restricted Kolmogorov–Smirnov distance `max_y |F̂(y) - F(y)|`.
pub fn ks_distance<F: FnMut(f64) -> f64>(empirical: &EmpiricalCdf, mut reference: F) -> Result<f64> {
    if empirical.grid.is_empty() {
        return Err(invalid("empty evaluation grid"));
    }
    if empirical.grid.len() != empirical.values.len() {
        return Err(invalid("grid and values differ in length"));
    }
    Ok(empirical
        .grid
        .iter()
        .zip(&empirical.values)
        .map(|(&y, &f)| (f - reference(y)).abs())
        .fold(0.0, f64::max))
}

/// Method-of-moments Gumbel fit: `scale = √6 s / π`, `location = mean - γ scale`,
/// with `s` the sample standard deviation.
pub fn fit_gumbel(samples: &[f64]) -> Result<GumbelFit> {
    if samples.len() < 10 {
        return Err(invalid(format!("need at least 10 samples, got {}", samples.len())));
    }
    if samples.iter().any(|s| !s.is_finite()) {
        return Err(invalid("samples must be finite"));
    }
    let len = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / len;
    let var = samples.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (len - 1.0);
    if !(var > 0.0) {
        return Err(invalid("samples have zero variance"));
    }
    let scale = 6f64.sqrt() * var.sqrt() / std::f64::consts::PI;
    Ok(GumbelFit {
        location: mean - EULER_GAMMA * scale,
        scale,
    })
}

fn centering(cfg: &ExperimentConfig) -> Result<(Centering, Option<NormalizationParams>)> {
    if cfg.p > 0.0 && cfg.p < 1.0 {
        let np = normalization(cfg.n as u64, cfg.p, cfg.k as u32)?;
        Ok((
            Centering {
                a: np.a,
                sigma: np.sigma,
                degenerate: false,
            },
            Some(np),
        ))
    } else {
        Ok((
            Centering {
                a: cfg.n as f64 * cfg.p.powi(cfg.k as i32),
                sigma: 0.0,
                degenerate: true,
            },
            None,
        ))
    }
}

fn run_trial(cfg: &ExperimentConfig, centre: &Centering, gammas: &[f64], index: usize) -> TrialRecord {
    let seed = trial_seed(cfg.master_seed, index as u64);
    let g = Graph::sample_gnp(cfg.n, cfg.p, seed).expect("validated configuration");
    let top = top_m_common_neighbors(&g, cfg.k, cfg.m).expect("validated configuration");
    let normalized = top.values.iter().map(|&v| centre.normalize(v)).collect();
    let gamma_exceedances = gammas
        .iter()
        .enumerate()
        .map(|(i, &gamma)| {
            count_ell_exceedances(&g, i + 1, gamma)
                .expect("ell < k < n")
                .count
        })
        .collect();
    TrialRecord {
        trial_index: index,
        seed_used: seed,
        delta_values: top.values,
        normalized,
        gamma_exceedances,
    }
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentRun> {
    run_experiment_with_progress(cfg, &|_| {})
}

/// [`run_experiment`], calling `progress(done)` as trials complete. The
/// callback may run on worker threads and in any order.
pub fn run_experiment_with_progress(
    cfg: &ExperimentConfig,
    progress: &(dyn Fn(usize) + Sync),
) -> Result<ExperimentRun> {
    cfg.validate()?;
    let (centre, params) = centering(cfg)?;
    let gammas: Vec<f64> = match params {
        Some(_) => (1..cfg.k)
            .map(|ell| gamma_ell(cfg.n as u64, cfg.p, ell as u32))
            .collect::<Result<_>>()?,
        None => Vec::new(),
    };

    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Threads::Fixed(t) = cfg.threads {
        builder = builder.num_threads(t);
    }
    let pool = builder
        .build()
        .map_err(|e| invalid(format!("thread pool: {e}")))?;
    let done = AtomicUsize::new(0);
    let records: Vec<TrialRecord> = pool.install(|| {
        (0..cfg.trials)
            .into_par_iter()
            .map(|t| {
                let r = run_trial(cfg, &centre, &gammas, t);
                progress(done.fetch_add(1, Ordering::Relaxed) + 1);
                r
            })
            .collect()
    });

    let summary = summarize(cfg, centre, params.as_ref(), &records)?;
    Ok(ExperimentRun { summary, records })
}

fn summarize(
    cfg: &ExperimentConfig,
    centre: Centering,
    params: Option<&NormalizationParams>,
    records: &[TrialRecord],
) -> Result<ExperimentSummary> {
    let m = cfg.m;
    let mth: Vec<f64> = records.iter().map(|r| r.normalized[m - 1]).collect();
    let empirical = EmpiricalCdf::from_samples(&mth, &cfg.y_grid)?;
    let gumbel: Vec<f64> = cfg
        .y_grid
        .iter()
        .map(|&y| gumbel_limit_cdf(y, m as u32))
        .collect::<Result<_>>()?;
    let janson: Option<Vec<f64>> = match params {
        Some(np) if m == 1 => Some(
            cfg.y_grid
                .iter()
                .map(|&y| lambda_for(np, y).map(|r| r.lower_bound))
                .collect::<Result<_>>()?,
        ),
        _ => None,
    };

    let ks_vs_gumbel = ks_against(&empirical, &gumbel)?;
    let ks_vs_janson = janson.as_deref().map(|j| ks_against(&empirical, j)).transpose()?;
    let gumbel_fit = if m == 1 { fit_gumbel(&mth).ok() } else { None };
    let gamma_exceedance_rate = (cfg.k > 1 && params.is_some()).then(|| {
        let hit = records
            .iter()
            .filter(|r| r.gamma_exceedances.iter().any(|&c| c > 0))
            .count();
        hit as f64 / records.len() as f64
    });

    let cdf = cfg
        .y_grid
        .iter()
        .enumerate()
        .map(|(i, &y)| CdfRow {
            y,
            empirical: empirical.values[i],
            gumbel: gumbel[i],
            janson: janson.as_ref().map(|j| j[i]),
        })
        .collect();

    Ok(ExperimentSummary {
        config: cfg.clone(),
        normalization: centre,
        sampling_method: if cfg.p < GEOMETRIC_SKIP_BELOW {
            SamplingMethod::GeometricSkip
        } else {
            SamplingMethod::PerPair
        },
        cdf,
        ks_vs_gumbel,
        ks_vs_janson,
        gumbel_fit,
        gamma_exceedance_rate,
    })
}

fn ks_against(empirical: &EmpiricalCdf, reference: &[f64]) -> Result<f64> {
    let mut it = reference.iter();
    ks_distance(empirical, |_| *it.next().expect("reference matches grid"))
}

/// CSV `y,empirical,gumbel,janson`; the janson column is empty when absent.
pub fn write_cdf_csv<W: Write>(summary: &ExperimentSummary, mut out: W) -> Result<()> {
    writeln!(out, "y,empirical,gumbel,janson")?;
    for row in &summary.cdf {
        writeln!(
            out,
            "{},{},{},{}",
            fmt_f64(row.y),
            fmt_f64(row.empirical),
            fmt_f64(row.gumbel),
            row.janson.map(fmt_f64).unwrap_or_default()
        )?;
    }
    out.flush()?;
    Ok(())
}

/// CSV `trial,seed,delta_1..delta_m,normalized_1..normalized_m`.
pub fn write_trials_csv<W: Write>(records: &[TrialRecord], m: usize, mut out: W) -> Result<()> {
    let mut header = vec!["trial".to_string(), "seed".to_string()];
    header.extend((1..=m).map(|j| format!("delta_{j}")));
    header.extend((1..=m).map(|j| format!("normalized_{j}")));
    writeln!(out, "{}", header.join(","))?;
    for r in records {
        let mut fields = vec![r.trial_index.to_string(), r.seed_used.to_string()];
        fields.extend(r.delta_values.iter().map(|d| d.to_string()));
        fields.extend(r.normalized.iter().map(|&x| fmt_f64(x)));
        writeln!(out, "{}", fields.join(","))?;
    }
    out.flush()?;
    Ok(())
}
