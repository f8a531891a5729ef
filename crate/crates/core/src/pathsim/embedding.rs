use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::hitting::{Clock, HitScanner, HittingResult};
use super::path::{AdditiveClock, PathGen};
use super::stable::stable_no_return_prob;
use super::stats::{ks_critical_1pct, ks_statistic_with_left, quantile_table, QuantileRow};
use crate::barrier::Barrier;
use crate::error::{invalid, Result};
use crate::measure::Measure;
use crate::process::{ProcessSpec, RateFunction};

/// Treatment of stable paths that have jumped far from the barrier.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum StablePolicy {
    /// Keep simulating to `t_max`.
    #[default]
    Simulate,
    /// On the first visit to `|x| > x_far`, stop the path as a miss with the
    /// probability of never returning to `(-1, 1)`; otherwise keep simulating.
    /// Faster, but biased towards misses since surviving paths are not
    /// conditioned on returning.
    Absorb { x_far: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimOptions {
    pub n_paths: usize,
    #[serde(alias = "sim_dt")]
    pub dt: f64,
    pub t_max: f64,
    pub seed: u64,
    #[serde(default)]
    pub clock: Clock,
    #[serde(default)]
    pub stable_policy: StablePolicy,
}

/// Outcome of one simulated path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathOutcome {
    pub x0: f64,
    pub hit: HittingResult,
    /// State at the end of the simulation (hit, horizon, or absorption).
    pub x_end: f64,
    pub absorbed: bool,
}

/// RNG of path `i`: the master seed selects the key, the path index the stream.
pub fn path_rng(seed: u64, i: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(i as u64);
    rng
}

fn simulate_one<R: Rng>(
    spec: &ProcessSpec,
    mu: &Measure,
    b: &Barrier,
    opts: &SimOptions,
    rate: Option<&RateFunction>,
    rng: &mut R,
) -> Result<PathOutcome> {
    let x0 = mu.sample(rng);
    let base = spec.base();
    let holding = matches!(base, ProcessSpec::CtmcRandomWalk { .. });
    let mut gen = PathGen::new(base, x0, opts.dt, opts.t_max)?;
    let mut clock = rate.map(AdditiveClock::new);
    let mut scan = HitScanner::new(b, holding, clock.is_some());
    let (alpha, x_far) = match (base, opts.stable_policy) {
        (ProcessSpec::Stable { alpha }, StablePolicy::Absorb { x_far }) => (*alpha, Some(x_far)),
        _ => (0.0, None),
    };
    let mut x_end = x0;
    while let Some((t, x)) = gen.next(rng) {
        x_end = x;
        let c = match clock.as_mut() {
            Some(a) => a.advance(t, x)?,
            None => t,
        };
        if let Some(hit) = scan.push(t, c, x) {
            return Ok(PathOutcome { x0, hit, x_end, absorbed: false });
        }
        if let Some(far) = x_far {
            if x.abs() > far {
                let u: f64 = rng.random();
                if u < stable_no_return_prob(alpha, x.abs()) {
                    return Ok(PathOutcome { x0, hit: HittingResult::MISS, x_end, absorbed: true });
                }
            }
        }
    }
    Ok(PathOutcome { x0, hit: HittingResult::MISS, x_end, absorbed: false })
}

/// Runs `n_paths` independent paths from `μ` until they enter the barrier.
/// Deterministic in `opts.seed` regardless of the thread count.
pub fn simulate_hits(spec: &ProcessSpec, mu: &Measure, b: &Barrier, opts: &SimOptions) -> Result<Vec<PathOutcome>> {
    if opts.n_paths == 0 {
        return Err(invalid("need at least one path"));
    }
    let rate = match opts.clock {
        Clock::Physical => None,
        Clock::Additive => Some(spec.rate().cloned().unwrap_or(RateFunction::Constant { value: 1.0 })),
    };
    (0..opts.n_paths)
        .into_par_iter()
        .map(|i| simulate_one(spec, mu, b, opts, rate.as_ref(), &mut path_rng(opts.seed, i)))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AtomFrequency {
    pub x: f64,
    /// Fraction of all paths stopped at `x`.
    pub empirical: f64,
    pub target: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalStats {
    pub n_paths: usize,
    pub n_hit: usize,
    pub hit_fraction: f64,
    pub stopped_values: Vec<f64>,
    pub hit_times: Vec<f64>,
    pub mean_hit_time: f64,
    /// Mean of the additive clock at hitting, for time-changed runs.
    pub mean_additive_hit: Option<f64>,
    /// KS distance of the stopped values to the normalised target.
    pub ks_stat: f64,
    pub ks_critical_1pct: f64,
    pub quantile_table: Vec<QuantileRow>,
    pub atom_frequencies: Vec<AtomFrequency>,
    pub n_absorbed: usize,
    /// Probability mass of paths that missed within the horizon but would
    /// still return to `(-1, 1)` (stable runs only), i.e. a bound on the
    /// horizon truncation of the hit fraction.
    pub truncation_bound: Option<f64>,
}

pub const QUANTILE_LEVELS: [f64; 19] = [
    0.05, 0.1, 0.15, 0.2, 0.25, 0.3, 0.35, 0.4, 0.45, 0.5, 0.55, 0.6, 0.65, 0.7, 0.75, 0.8, 0.85, 0.9, 0.95,
];

pub fn summarise(spec: &ProcessSpec, outcomes: &[PathOutcome], target: &Measure) -> Result<EmpiricalStats> {
    let n = outcomes.len();
    let hits: Vec<&HittingResult> = outcomes.iter().map(|o| &o.hit).filter(|h| h.hit).collect();
    let stopped: Vec<f64> = hits.iter().map(|h| h.x_hit).collect();
    let hit_times: Vec<f64> = hits.iter().map(|h| h.t_hit).collect();
    let mean = |v: &[f64]| if v.is_empty() { f64::NAN } else { v.iter().sum::<f64>() / v.len() as f64 };
    let additive: Vec<f64> = hits.iter().filter_map(|h| h.a_hit).collect();
    let (ks_stat, table) = if stopped.is_empty() {
        (1.0, Vec::new())
    } else {
        (
            ks_statistic_with_left(&stopped, |x| target.cdf(x), |x| target.cdf_left(x))?,
            quantile_table(&stopped, |q| target.quantile(q), &QUANTILE_LEVELS)?,
        )
    };
    let atom_frequencies = target
        .atoms
        .iter()
        .map(|a| AtomFrequency {
            x: a.location,
            empirical: stopped.iter().filter(|&&x| x == a.location).count() as f64 / n as f64,
            target: a.weight,
        })
        .collect();
    let truncation_bound = match spec.base() {
        ProcessSpec::Stable { alpha } => Some(
            outcomes
                .iter()
                .filter(|o| !o.hit.hit && !o.absorbed)
                .map(|o| 1.0 - stable_no_return_prob(*alpha, o.x_end.abs()))
                .sum::<f64>()
                / n as f64,
        ),
        _ => None,
    };
    Ok(EmpiricalStats {
        n_paths: n,
        n_hit: hits.len(),
        hit_fraction: hits.len() as f64 / n as f64,
        mean_hit_time: mean(&hit_times),
        mean_additive_hit: (!additive.is_empty()).then(|| mean(&additive)),
        ks_stat,
        ks_critical_1pct: ks_critical_1pct(stopped.len().max(1)),
        quantile_table: table,
        atom_frequencies,
        n_absorbed: outcomes.iter().filter(|o| o.absorbed).count(),
        truncation_bound,
        stopped_values: stopped,
        hit_times,
    })
}

/// Samples `X_0 ~ μ`, runs the paths into the barrier and compares the stopped
/// law with `target`.
pub fn run_embedding(
    spec: &ProcessSpec,
    mu: &Measure,
    b: &Barrier,
    target: &Measure,
    opts: &SimOptions,
) -> Result<EmpiricalStats> {
    summarise(spec, &simulate_hits(spec, mu, b, opts)?, target)
}
