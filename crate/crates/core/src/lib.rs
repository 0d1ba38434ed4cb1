//! Extreme-value statistics of common-neighbor counts in the binomial random
//! graph `G(n, p)`.
//!
//! The crate is split along the lines of the computation:
//!
//! - [`graph`]: seeded `G(n, p)` sampling with bitset adjacency rows and
//!   common-neighbor queries.
//! - [`extremes`]: exact order statistics `Δ^1 ≥ … ≥ Δ^m` of common-neighbor
//!   counts over all `k`-subsets, exceedance counting, and a brute-force oracle.
//! - [`binomial`]: exact log-space binomial probabilities and the Gaussian
//!   approximations used to reason about their tails.
//! - [`limits`]: normalization constants `a_{k;n}`, `σ_{k;n}`, the limiting
//!   CDF, the `Γ_ℓ` cutoffs and the expected exceedance count `λ`.
//! - [`montecarlo`]: reproducible parallel experiments comparing the sampled
//!   maxima to the limit law and to `exp(-λ)`.

pub mod binomial;
mod error;
pub mod extremes;
pub mod graph;
pub mod json;
pub mod limits;
pub mod montecarlo;

pub use binomial::{BinomialParams, TailComparison};
pub use error::{Error, Result};
pub use extremes::{ExceedanceCount, TopM};
pub use graph::{Graph, SamplingMethod, VertexSet};
pub use limits::{ConditionReport, ConditionThresholds, JansonReport, NormalizationParams};
pub use montecarlo::{ExperimentConfig, ExperimentRun, ExperimentSummary, Threads, TrialRecord};
