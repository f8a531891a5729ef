//! Path sampling, additive functionals, barrier hitting and Monte Carlo checks
//! of the stopped law.

mod embedding;
mod hitting;
mod path;
mod stable;
mod stats;

pub use embedding::{
    path_rng, run_embedding, simulate_hits, summarise, AtomFrequency, EmpiricalStats, PathOutcome, SimOptions,
    StablePolicy, QUANTILE_LEVELS,
};
pub use hitting::{first_hitting, Clock, HittingResult};
pub use path::{accumulate_additive, sample_path, sample_path_with, PathSample};
pub use stable::{sample_symmetric_stable, stable_no_return_prob};
pub use stats::{
    ks_critical_1pct, ks_statistic, ks_statistic_with_left, ks_two_sample, ks_two_sample_critical_1pct, quantile_table,
    QuantileRow,
};
