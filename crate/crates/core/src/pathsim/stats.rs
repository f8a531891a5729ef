use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

fn sorted(samples: &[f64]) -> Result<Vec<f64>> {
    if samples.is_empty() {
        return Err(Error::EmptySamples);
    }
    let mut s = samples.to_vec();
    s.sort_by(f64::total_cmp);
    Ok(s)
}

/// One-sample Kolmogorov–Smirnov distance `sup |F_n − F|` to a continuous CDF.
pub fn ks_statistic(samples: &[f64], target_cdf: impl Fn(f64) -> f64) -> Result<f64> {
    ks_statistic_with_left(samples, &target_cdf, &target_cdf)
}

/// KS distance for targets with atoms: `target_cdf_left(x) = F(x−)`.
pub fn ks_statistic_with_left(
    samples: &[f64],
    target_cdf: impl Fn(f64) -> f64,
    target_cdf_left: impl Fn(f64) -> f64,
) -> Result<f64> {
    let s = sorted(samples)?;
    let n = s.len() as f64;
    let mut d = 0.0f64;
    let mut i = 0;
    while i < s.len() {
        let x = s[i];
        let mut j = i;
        while j < s.len() && s[j] == x {
            j += 1;
        }
        // F_n jumps from i/n to j/n at x
        d = d.max((target_cdf_left(x) - i as f64 / n).abs());
        d = d.max((target_cdf(x) - j as f64 / n).abs());
        i = j;
    }
    Ok(d)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuantileRow {
    pub q: f64,
    pub empirical: f64,
    pub target: f64,
}

/// Empirical quantile `F_n^{-1}(q) = x_(⌈nq⌉)` next to the target quantile.
pub fn quantile_table(samples: &[f64], target_quantile: impl Fn(f64) -> f64, qs: &[f64]) -> Result<Vec<QuantileRow>> {
    let s = sorted(samples)?;
    Ok(qs
        .iter()
        .map(|&q| {
            let k = ((q * s.len() as f64).ceil() as usize).clamp(1, s.len()) - 1;
            QuantileRow { q, empirical: s[k], target: target_quantile(q) }
        })
        .collect())
}

/// 1% critical value of the one-sample KS statistic (asymptotic).
pub fn ks_critical_1pct(n: usize) -> f64 {
    1.63 / (n as f64).sqrt()
}

/// Two-sample KS distance `sup |F_a − F_b|` between empirical CDFs.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<f64> {
    let (a, b) = (sorted(a)?, sorted(b)?);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j, mut d) = (0usize, 0usize, 0.0f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    Ok(d)
}

/// 1% critical value of the two-sample KS statistic (asymptotic).
pub fn ks_two_sample_critical_1pct(n: usize, m: usize) -> f64 {
    1.63 * ((n + m) as f64 / (n as f64 * m as f64)).sqrt()
}
