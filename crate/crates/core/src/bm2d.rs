//! Two-dimensional Brownian demo on the unit disc: discrete potentials, the
//! réduite recursion and barrier hitting on a square grid clipped to the disc.
//!
//! Everything uses the 5-point Laplacian `½Δ_h` with zero values outside the
//! disc, so the discrete potential of `ρ` is `(−½Δ_h)^{-1} ρ`.

use rand::Rng;
use rayon::prelude::*;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::densities::bm2d_target_density;
use crate::error::{invalid, Error, Result};
use crate::pathsim::{ks_statistic, path_rng};
use crate::reduite::{InvariantReport, InvariantTracker};

/// Nodes `(x_i, x_j)`, `x_i = -1 + i h`, of `[-1, 1]²`; only nodes with
/// `x_i² + x_j² < 1` are active.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscGrid {
    pub n: usize,
    pub h: f64,
    inside: Vec<bool>,
}

impl DiscGrid {
    /// `n` nodes per side; `n` must be odd so that the origin is a node.
    pub fn new(n: usize) -> Result<Self> {
        if n < 5 || n % 2 == 0 {
            return Err(invalid(format!("disc grid needs an odd number ≥ 5 of nodes per side, got {n}")));
        }
        let h = 2.0 / (n - 1) as f64;
        let mut inside = vec![false; n * n];
        for i in 0..n {
            for j in 0..n {
                let (x, y) = (-1.0 + i as f64 * h, -1.0 + j as f64 * h);
                inside[i * n + j] = x * x + y * y < 1.0 - 1e-12;
            }
        }
        Ok(Self { n, h, inside })
    }

    pub fn len(&self) -> usize {
        self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn coord(&self, k: usize) -> [f64; 2] {
        [-1.0 + (k / self.n) as f64 * self.h, -1.0 + (k % self.n) as f64 * self.h]
    }

    pub fn is_inside(&self, k: usize) -> bool {
        self.inside[k]
    }

    pub fn origin(&self) -> usize {
        let c = self.n / 2;
        c * self.n + c
    }

    /// Active node nearest to `x`, if any.
    pub fn locate(&self, x: [f64; 2]) -> Option<usize> {
        let idx = |v: f64| {
            let s = ((v + 1.0) / self.h).round();
            (s >= 0.0 && s < self.n as f64).then_some(s as usize)
        };
        let k = idx(x[0])? * self.n + idx(x[1])?;
        self.inside[k].then_some(k)
    }

    /// `out = ½Δ_h f` on active nodes, `f` taken as zero outside the disc.
    pub fn half_laplacian(&self, f: &[f64], out: &mut [f64]) {
        let (n, c) = (self.n, 0.5 / (self.h * self.h));
        for i in 0..n {
            for j in 0..n {
                let k = i * n + j;
                if !self.inside[k] {
                    out[k] = 0.0;
                    continue;
                }
                let v = |ii: usize, jj: usize| {
                    let q = ii * n + jj;
                    if self.inside[q] { f[q] } else { 0.0 }
                };
                // active nodes are never on the square's edge
                out[k] = c * (v(i - 1, j) + v(i + 1, j) + v(i, j - 1) + v(i, j + 1) - 4.0 * f[k]);
            }
        }
    }

    /// Mass `h² Σ ρ` of a node density.
    pub fn mass(&self, rho: &[f64]) -> f64 {
        self.h * self.h * rho.iter().sum::<f64>()
    }
}

/// Solves `−½Δ_h v = ρ` with `v = 0` off the disc by conjugate gradients.
pub fn discrete_potential(grid: &DiscGrid, rho: &[f64]) -> Result<Vec<f64>> {
    let m = grid.len();
    if rho.len() != m {
        return Err(invalid("density length does not match the grid"));
    }
    let apply = |x: &[f64], out: &mut [f64]| {
        grid.half_laplacian(x, out);
        out.iter_mut().for_each(|v| *v = -*v);
    };
    let mask = |v: &mut [f64]| {
        for (k, x) in v.iter_mut().enumerate() {
            if !grid.is_inside(k) {
                *x = 0.0;
            }
        }
    };
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    let mut r = rho.to_vec();
    mask(&mut r);
    let mut x = vec![0.0; m];
    let mut p = r.clone();
    let mut ap = vec![0.0; m];
    let mut rr = dot(&r, &r);
    let stop = 1e-26 * rr.max(f64::MIN_POSITIVE);
    for _ in 0..20 * grid.n {
        if rr <= stop {
            return Ok(x);
        }
        apply(&p, &mut ap);
        let a = rr / dot(&p, &ap);
        for k in 0..m {
            x[k] += a * p[k];
            r[k] -= a * ap[k];
        }
        let rr_new = dot(&r, &r);
        let beta = rr_new / rr;
        for k in 0..m {
            p[k] = r[k] + beta * p[k];
        }
        rr = rr_new;
    }
    Err(invalid("conjugate gradients did not converge"))
}

/// Unit point mass at the origin as a node density.
pub fn point_mass(grid: &DiscGrid) -> Vec<f64> {
    let mut rho = vec![0.0; grid.len()];
    rho[grid.origin()] = 1.0 / (grid.h * grid.h);
    rho
}

/// Density at time `t` of Brownian motion from the origin run with the clock
/// `∫ a(B_s) ds` (generator `a⁻¹ ½Δ`) and killed on leaving the disc, by the
/// explicit forward scheme `p ← p + dt ½Δ_h(p / a)`.
pub fn time_changed_marginal(grid: &DiscGrid, rate: impl Fn([f64; 2]) -> f64, t: f64) -> Result<Vec<f64>> {
    let m = grid.len();
    let mut inv_a = vec![0.0; m];
    let mut max_inv = 0.0f64;
    for k in 0..m {
        if grid.is_inside(k) {
            let a = rate(grid.coord(k));
            if !(a > 0.0 && a.is_finite()) {
                return Err(Error::OutsideDomain { x: grid.coord(k)[0], lo: f64::NAN, hi: f64::NAN });
            }
            inv_a[k] = 1.0 / a;
            max_inv = max_inv.max(1.0 / a);
        }
    }
    let dt_max = 0.5 * grid.h * grid.h / max_inv;
    let steps = (t / (0.9 * dt_max)).ceil().max(1.0) as usize;
    let dt = t / steps as f64;
    let mut p = point_mass(grid);
    let (mut q, mut lap) = (vec![0.0; m], vec![0.0; m]);
    for _ in 0..steps {
        for k in 0..m {
            q[k] = p[k] * inv_a[k];
        }
        grid.half_laplacian(&q, &mut lap);
        for k in 0..m {
            p[k] += dt * lap[k];
        }
    }
    Ok(p)
}

/// The rotated anisotropic Gaussian restricted to the disc.
pub fn gaussian_target(grid: &DiscGrid) -> Vec<f64> {
    (0..grid.len())
        .map(|k| if grid.is_inside(k) { let [x, y] = grid.coord(k); bm2d_target_density(x, y) } else { 0.0 })
        .collect()
}

/// `min (μÛ − νÛ)` over active nodes and where it is attained.
pub fn balayage_margin(grid: &DiscGrid, mu_u: &[f64], nu_u: &[f64]) -> (f64, [f64; 2]) {
    let mut best = (f64::INFINITY, [0.0; 2]);
    for k in (0..grid.len()).filter(|&k| grid.is_inside(k)) {
        let d = mu_u[k] - nu_u[k];
        if d < best.0 {
            best = (d, grid.coord(k));
        }
    }
    best
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dp2dResult {
    pub dt: f64,
    pub n_steps: usize,
    /// Entry time per node, `∞` off the disc or without contact.
    pub entry_time: Vec<f64>,
    pub invariants: InvariantReport,
    pub clamp_max: f64,
    /// `(t, f(t, ·))` at the requested snapshot times.
    pub snapshots: Vec<(f64, Vec<f64>)>,
}

/// Runs `f ← min(μÛ, max(f + dt ½Δ_h f, νÛ))` and records contact times.
pub fn dp_barrier_2d(
    grid: &DiscGrid,
    mu_u: &[f64],
    nu_u: &[f64],
    dt: f64,
    n_steps: usize,
    tol: f64,
    snapshot_every: usize,
) -> Result<Dp2dResult> {
    if dt * 2.0 / (grid.h * grid.h) > 1.0 {
        return Err(Error::Stability(format!(
            "explicit 2-d heat step needs dt ≤ h²/2 = {:.3e}, got {dt:.3e}",
            0.5 * grid.h * grid.h
        )));
    }
    let (margin, at) = balayage_margin(grid, mu_u, nu_u);
    if margin < -tol {
        return Err(Error::Balayage { min_margin: margin, argmin: at[0] });
    }
    let m = grid.len();
    let mut f = mu_u.to_vec();
    let mut lap = vec![0.0; m];
    let mut entry = vec![f64::INFINITY; m];
    let mut tracker = InvariantTracker::new(mu_u, nu_u, tol);
    let mut clamp_max = 0.0f64;
    let mut snapshots = Vec::new();
    let every = snapshot_every.max(1);
    for k in 0..=n_steps {
        if k > 0 {
            grid.half_laplacian(&f, &mut lap);
            for q in 0..m {
                if !grid.is_inside(q) {
                    continue;
                }
                let v = (f[q] + dt * lap[q]).max(nu_u[q]);
                if v > mu_u[q] {
                    clamp_max = clamp_max.max(v - mu_u[q]);
                }
                f[q] = v.min(mu_u[q]);
            }
        }
        tracker.push(&f);
        let t = k as f64 * dt;
        for q in 0..m {
            if grid.is_inside(q) && entry[q].is_infinite() && f[q] - nu_u[q] <= tol {
                entry[q] = t;
            }
        }
        if k % every == 0 || k == n_steps {
            snapshots.push((t, f.clone()));
        }
    }
    Ok(Dp2dResult { dt, n_steps, entry_time: entry, invariants: tracker.finish(), clamp_max, snapshots })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Hit2d {
    pub hit: bool,
    pub t: f64,
    pub x: [f64; 2],
}

/// Brownian paths from the origin, stopped on entering the barrier
/// `{t ≥ r(node)}` or killed on leaving the disc.
pub fn simulate_2d(
    grid: &DiscGrid,
    entry_time: &[f64],
    dt: f64,
    t_max: f64,
    n_paths: usize,
    seed: u64,
) -> Result<Vec<Hit2d>> {
    if n_paths == 0 {
        return Err(invalid("need at least one path"));
    }
    if !(dt > 0.0 && t_max > 0.0) {
        return Err(invalid("need dt > 0 and t_max > 0"));
    }
    let sd = dt.sqrt();
    let steps = (t_max / dt + 1e-9).floor() as u64;
    Ok((0..n_paths)
        .into_par_iter()
        .map(|i| {
            let mut rng = path_rng(seed, i);
            let mut x = [0.0f64; 2];
            for s in 0..=steps {
                if s > 0 {
                    x[0] += sd * rng.sample::<f64, _>(StandardNormal);
                    x[1] += sd * rng.sample::<f64, _>(StandardNormal);
                }
                if x[0] * x[0] + x[1] * x[1] >= 1.0 {
                    break;
                }
                let t = s as f64 * dt;
                if let Some(k) = grid.locate(x) {
                    if t >= entry_time[k] {
                        return Hit2d { hit: true, t, x };
                    }
                }
            }
            Hit2d { hit: false, t: f64::NAN, x }
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Stats2d {
    pub n_paths: usize,
    pub hit_fraction: f64,
    pub target_mass: f64,
    pub mean_hit_time: f64,
    pub stopped_mean: [f64; 2],
    pub target_mean: [f64; 2],
    /// KS distances of the stopped coordinates to the target's marginals.
    pub ks_marginals: [f64; 2],
}

/// Compares stopped positions with the node density `nu` (each node spread
/// uniformly over its cell for the marginal CDFs).
pub fn summarise_2d(grid: &DiscGrid, hits: &[Hit2d], nu: &[f64]) -> Result<Stats2d> {
    let stopped: Vec<[f64; 2]> = hits.iter().filter(|h| h.hit).map(|h| h.x).collect();
    let mass = grid.mass(nu);
    let mut marg = [vec![0.0; grid.n], vec![0.0; grid.n]];
    let mut target_mean = [0.0; 2];
    for k in 0..grid.len() {
        let w = nu[k] * grid.h * grid.h / mass;
        marg[0][k / grid.n] += w;
        marg[1][k % grid.n] += w;
        let c = grid.coord(k);
        target_mean[0] += w * c[0];
        target_mean[1] += w * c[1];
    }
    let cdf = |m: &[f64], x: f64| {
        let s = (x + 1.0) / grid.h + 0.5;
        let i = s.floor();
        if i < 0.0 {
            return 0.0;
        }
        let i = i as usize;
        if i >= m.len() {
            return 1.0;
        }
        m[..i].iter().sum::<f64>() + (s - i as f64) * m[i]
    };
    let mut ks = [1.0; 2];
    let mut stopped_mean = [f64::NAN; 2];
    if !stopped.is_empty() {
        for d in 0..2 {
            let xs: Vec<f64> = stopped.iter().map(|p| p[d]).collect();
            ks[d] = ks_statistic(&xs, |x| cdf(&marg[d], x))?;
            stopped_mean[d] = xs.iter().sum::<f64>() / xs.len() as f64;
        }
    }
    let times: Vec<f64> = hits.iter().filter(|h| h.hit).map(|h| h.t).collect();
    Ok(Stats2d {
        n_paths: hits.len(),
        hit_fraction: stopped.len() as f64 / hits.len().max(1) as f64,
        target_mass: mass,
        mean_hit_time: if times.is_empty() { f64::NAN } else { times.iter().sum::<f64>() / times.len() as f64 },
        stopped_mean,
        target_mean,
        ks_marginals: ks,
    })
}

/// `a(x) = exp(x₁ + x₂)`.
pub fn exp_sum_rate(x: [f64; 2]) -> f64 {
    (x[0] + x[1]).exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::disc_green_2d;

    #[test]
    fn grid_geometry() {
        let g = DiscGrid::new(41).unwrap();
        assert_eq!(g.coord(g.origin()), [0.0, 0.0]);
        assert_eq!(g.locate([0.0, 0.0]), Some(g.origin()));
        assert_eq!(g.locate([0.99, 0.99]), None);
        assert!(DiscGrid::new(40).is_err());
        // active area approaches π
        let area = (0..g.len()).filter(|&k| g.is_inside(k)).count() as f64 * g.h * g.h;
        assert!((area - std::f64::consts::PI).abs() < 0.05);
    }

    #[test]
    fn point_potential_approaches_disc_green_function() {
        let g = DiscGrid::new(101).unwrap();
        let v = discrete_potential(&g, &point_mass(&g)).unwrap();
        for x in [[0.5, 0.0], [0.3, -0.3], [0.0, 0.7]] {
            let k = g.locate(x).unwrap();
            let exact = disc_green_2d([0.0, 0.0], x);
            assert!((v[k] - exact).abs() < 0.02 * exact.max(0.05), "{x:?}: {} vs {exact}", v[k]);
        }
    }

    #[test]
    fn potential_solves_the_poisson_problem() {
        let g = DiscGrid::new(31).unwrap();
        let rho: Vec<f64> = (0..g.len()).map(|k| if g.is_inside(k) { 1.0 + g.coord(k)[0] } else { 0.0 }).collect();
        let v = discrete_potential(&g, &rho).unwrap();
        let mut lap = vec![0.0; g.len()];
        g.half_laplacian(&v, &mut lap);
        for k in (0..g.len()).filter(|&k| g.is_inside(k)) {
            assert!((lap[k] + rho[k]).abs() < 1e-9);
        }
    }

    #[test]
    fn time_changed_law_is_in_balayage_order() {
        let g = DiscGrid::new(41).unwrap();
        let nu = time_changed_marginal(&g, exp_sum_rate, 0.1).unwrap();
        assert!(nu.iter().all(|v| *v >= 0.0));
        let m = g.mass(&nu);
        assert!(m > 0.5 && m < 1.0, "{m}");
        let mu_u = discrete_potential(&g, &point_mass(&g)).unwrap();
        let nu_u = discrete_potential(&g, &nu).unwrap();
        assert!(balayage_margin(&g, &mu_u, &nu_u).0 > -1e-10);
        // the shifted Gaussian is not: its mean is off the origin
        let gauss = gaussian_target(&g);
        let gu = discrete_potential(&g, &gauss).unwrap();
        assert!(balayage_margin(&g, &mu_u, &gu).0 < -1e-2);
    }

    #[test]
    fn dp_invariants_and_simulation() {
        let g = DiscGrid::new(41).unwrap();
        let nu = time_changed_marginal(&g, exp_sum_rate, 0.1).unwrap();
        let mu_u = discrete_potential(&g, &point_mass(&g)).unwrap();
        let nu_u = discrete_potential(&g, &nu).unwrap();
        let dt = 0.25 * g.h * g.h;
        let r = dp_barrier_2d(&g, &mu_u, &nu_u, dt, (0.6 / dt) as usize, 1e-10, 100).unwrap();
        assert!(r.invariants.passes(1e-12), "{:?}", r.invariants);
        assert!(r.entry_time[g.origin()].is_finite());
        assert!(dp_barrier_2d(&g, &mu_u, &nu_u, g.h * g.h, 4, 1e-10, 1).is_err());
        let hits = simulate_2d(&g, &r.entry_time, dt / 4.0, 3.0, 400, 7).unwrap();
        let s = summarise_2d(&g, &hits, &nu).unwrap();
        assert!((s.hit_fraction - s.target_mass).abs() < 0.1, "{s:?}");
    }
}
