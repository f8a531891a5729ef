//! Root barrier `R = {(t, x) : t ≥ r(x)}` read off the contact set of a value surface.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::grid::GridSpec1D;
use crate::potential::{fmt_value, PotentialFn};
use crate::reduite::ValueSurface;

/// Entry-time function `r(x_j) ∈ [0, ∞]` on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Barrier {
    pub grid: GridSpec1D,
    pub entry_time: Vec<f64>,
    pub tol_used: f64,
    /// Last time slice of the surface the barrier was read from.
    pub horizon: f64,
}

#[derive(Serialize, Deserialize)]
struct BarrierJson {
    schema: String,
    grid: GridSpec1D,
    tol_used: f64,
    horizon: f64,
    entry_time: Vec<Option<f64>>,
}

impl Barrier {
    pub fn new(grid: GridSpec1D, entry_time: Vec<f64>, tol_used: f64, horizon: f64) -> Result<Self> {
        if entry_time.len() != grid.n_points {
            return Err(invalid(format!("{} entry times for {} grid points", entry_time.len(), grid.n_points)));
        }
        if entry_time.iter().any(|t| t.is_nan() || *t < 0.0) {
            return Err(invalid("entry times must lie in [0, ∞]"));
        }
        Ok(Self { grid, entry_time, tol_used, horizon })
    }

    /// Entry time at the node nearest to `x`, `∞` off the grid.
    pub fn entry_at(&self, x: f64) -> f64 {
        self.grid.locate(x).map_or(f64::INFINITY, |j| self.entry_time[j])
    }

    pub fn min_entry(&self) -> f64 {
        self.entry_time.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Nodes with a finite entry time.
    pub fn finite_nodes(&self) -> Vec<f64> {
        (0..self.grid.n_points)
            .filter(|&j| self.entry_time[j].is_finite())
            .map(|j| self.grid.x(j as isize))
            .collect()
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "x,entry_time")?;
        for (j, t) in self.entry_time.iter().enumerate() {
            writeln!(w, "{},{}", self.grid.x(j as isize), fmt_value(*t))?;
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        let js = BarrierJson {
            schema: "rootsep.barrier.v1".into(),
            grid: self.grid,
            tol_used: self.tol_used,
            horizon: self.horizon,
            entry_time: self.entry_time.iter().map(|t| t.is_finite().then_some(*t)).collect(),
        };
        Ok(serde_json::to_string_pretty(&js)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let js: BarrierJson = serde_json::from_str(s)?;
        let entry = js.entry_time.into_iter().map(|t| t.unwrap_or(f64::INFINITY)).collect();
        Self::new(js.grid, entry, js.tol_used, js.horizon)
    }
}

/// `r(x_j) = min{t_k : f(t_k, x_j) − νÛ(x_j) ≤ tol}`, `∞` if no contact up to the horizon.
pub fn extract_barrier(surface: &ValueSurface, target: &PotentialFn, tol: f64) -> Result<Barrier> {
    if !(tol > 0.0) {
        return Err(invalid(format!("contact tolerance must be positive, got {tol}")));
    }
    surface.grid.ensure_same(&target.grid)?;
    let (nu, _) = target.capped();
    let n = surface.grid.n_points;
    let mut entry = vec![f64::INFINITY; n];
    let mut open = n;
    for k in 0..=surface.n_steps {
        let row = surface.slice(k);
        for j in 0..n {
            if entry[j].is_infinite() && row[j] - nu.values[j] <= tol {
                entry[j] = surface.time(k);
                open -= 1;
            }
        }
        if open == 0 {
            break;
        }
    }
    Barrier::new(surface.grid, entry, tol, surface.horizon())
}

/// `t ≥ r(x)` at the node nearest to `x`; points off the grid are never in the barrier.
pub fn barrier_contains(b: &Barrier, t: f64, x: f64) -> bool {
    t >= b.entry_at(x)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BarrierReport {
    /// Membership is monotone in `t` at every node (structural for entry-time barriers).
    pub monotone: bool,
    /// Nodes with finite entry time outside the target support.
    pub outside_support: Vec<f64>,
    /// Fraction of support nodes whose entry time is `∞` or the last slice.
    pub truncation_fraction: f64,
    pub ok: bool,
}

/// Checks a barrier against the target support (closed intervals).
pub fn validate_barrier(b: &Barrier, target_support: &[(f64, f64)]) -> BarrierReport {
    let half = 0.5 * b.grid.dx() + 1e-12;
    let in_support = |x: f64| target_support.iter().any(|&(lo, hi)| x >= lo - half && x <= hi + half);
    let monotone = b.entry_time.iter().all(|t| *t >= 0.0 && !t.is_nan());
    let mut outside = Vec::new();
    let (mut n_support, mut truncated) = (0usize, 0usize);
    for (j, &t) in b.entry_time.iter().enumerate() {
        let x = b.grid.x(j as isize);
        if in_support(x) {
            n_support += 1;
            if t.is_infinite() || (b.horizon > 0.0 && t >= b.horizon) {
                truncated += 1;
            }
        } else if t.is_finite() && t > 0.0 {
            outside.push(x);
        }
    }
    let truncation_fraction = if n_support == 0 { 0.0 } else { truncated as f64 / n_support as f64 };
    BarrierReport { monotone, ok: monotone && outside.is_empty() && truncated == 0, outside_support: outside, truncation_fraction }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn toy(entries: Vec<f64>) -> Barrier {
        let g = GridSpec1D::integer(0, entries.len() as i64 - 1).unwrap();
        Barrier::new(g, entries, 1e-8, 4.0).unwrap()
    }

    fn surface_from(rows: &[&[f64]], dt: f64) -> ValueSurface {
        let n = rows[0].len();
        ValueSurface {
            grid: GridSpec1D::integer(0, n as i64 - 1).unwrap(),
            dt,
            n_steps: rows.len() - 1,
            values: rows.concat(),
            clamp_max: 0.0,
        }
    }

    #[test]
    fn threshold_semantics() {
        let b = toy(vec![f64::INFINITY, 0.5, 2.0]);
        assert!(barrier_contains(&b, 0.5, 1.0));
        assert!(!barrier_contains(&b, 0.499, 1.0));
        assert!(barrier_contains(&b, 0.7, 1.3));
        assert!(!barrier_contains(&b, 100.0, 0.0));
        assert!(!barrier_contains(&b, 100.0, 7.0));
        assert!(!barrier_contains(&b, 0.1, 2.0));
        assert_eq!(b.min_entry(), 0.5);
        assert_eq!(b.finite_nodes(), vec![1.0, 2.0]);
    }

    #[test]
    fn extraction() {
        let nu = PotentialFn::new(GridSpec1D::integer(0, 2).unwrap(), vec![1.0, 1.0, 1.0]).unwrap();
        let s = surface_from(&[&[3.0, 2.0, 1.0], &[2.0, 1.5, 1.0], &[2.0, 1.0, 1.0]], 0.25);
        let b = extract_barrier(&s, &nu, 1e-9).unwrap();
        assert_eq!(b.entry_time, vec![f64::INFINITY, 0.5, 0.0]);
        assert_eq!(b.horizon, 0.5);
        assert!(extract_barrier(&s, &nu, 0.0).is_err());
        // coarser tolerance, earlier entries
        let loose = extract_barrier(&s, &nu, 0.6).unwrap();
        assert_eq!(loose.entry_time, vec![f64::INFINITY, 0.25, 0.0]);
    }

    #[test]
    fn equal_measures_barrier() {
        let nu = PotentialFn::new(GridSpec1D::integer(0, 2).unwrap(), vec![1.0, 2.0, 3.0]).unwrap();
        let s = surface_from(&[&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]], 0.5);
        let b = extract_barrier(&s, &nu, 1e-9).unwrap();
        assert_eq!(b.entry_time, vec![0.0; 3]);
        for x in [0.0, 1.0, 2.0] {
            assert!(barrier_contains(&b, 1e-9, x));
        }
        let r = validate_barrier(&b, &[(0.0, 2.0)]);
        assert!(r.ok && r.truncation_fraction == 0.0);
    }

    #[test]
    fn validation_reports() {
        let b = toy(vec![f64::INFINITY, 1.0, f64::INFINITY, 3.0, 0.0]);
        let r = validate_barrier(&b, &[(1.0, 1.0), (3.0, 3.0)]);
        assert!(r.ok, "{r:?}");
        let r = validate_barrier(&b, &[(1.0, 1.0)]);
        assert_eq!(r.outside_support, vec![3.0]);
        let r = validate_barrier(&b, &[(1.0, 2.0)]);
        assert_eq!(r.truncation_fraction, 0.5);
        assert!(!r.ok);
    }

    #[test]
    fn io_round_trip() {
        let b = toy(vec![f64::INFINITY, 0.25, 0.0]);
        assert_eq!(Barrier::from_json(&b.to_json().unwrap()).unwrap(), b);
        let mut csv = Vec::new();
        b.write_csv(&mut csv).unwrap();
        assert_eq!(String::from_utf8(csv).unwrap(), "x,entry_time\n0,inf\n1,0.25\n2,0\n");
    }

    proptest! {
        #[test]
        fn membership_is_monotone(r in 0.0f64..5.0, s in 0.0f64..5.0, ds in 0.0f64..5.0) {
            let b = toy(vec![r, f64::INFINITY]);
            if barrier_contains(&b, s, 0.0) {
                prop_assert!(barrier_contains(&b, s + ds, 0.0));
            }
        }

        #[test]
        fn smaller_tolerance_later_entries(
            rows in prop::collection::vec(prop::collection::vec(0.0f64..1.0, 4), 2..8),
            t1 in 1e-6f64..0.5, extra in 0.0f64..0.5,
        ) {
            // build a surface non-increasing in time above νÛ ≡ 0
            let mut acc = vec![2.0; 4];
            let mut flat = Vec::new();
            for r in &rows {
                for (a, d) in acc.iter_mut().zip(r) {
                    *a = (*a - d).max(0.0);
                }
                flat.extend_from_slice(&acc);
            }
            let s = ValueSurface {
                grid: GridSpec1D::integer(0, 3).unwrap(),
                dt: 0.1,
                n_steps: rows.len() - 1,
                values: flat,
                clamp_max: 0.0,
            };
            let nu = PotentialFn::new(s.grid, vec![0.0; 4]).unwrap();
            let tight = extract_barrier(&s, &nu, t1).unwrap();
            let loose = extract_barrier(&s, &nu, t1 + extra).unwrap();
            for (a, b) in tight.entry_time.iter().zip(&loose.entry_time) {
                prop_assert!(a >= b);
            }
        }
    }
}
