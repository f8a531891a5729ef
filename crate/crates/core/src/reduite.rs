//! Dynamic-programming réduite `f(t + dt) = max(P̂_dt f(t), νÛ)`, `f(0) = μÛ`,
//! and an exact backward-induction optimal-stopping oracle for the random walk.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::generators::StepOperator;
use crate::grid::{GridFn, GridSpec1D};
use crate::potential::{check_balayage, BalayageReport, PotentialFn};
use crate::process::ProcessSpec;

/// Relative contact tolerance: `tol = CONTACT_REL_TOL · scale(νÛ)`.
pub const CONTACT_REL_TOL: f64 = 1e-8;

/// The obstacle `μÛ 1_{t ≤ 0} + νÛ 1_{t > 0}`, with infinite potential values capped.
#[derive(Debug, Clone)]
pub struct Obstacle {
    pub initial: PotentialFn,
    pub target: PotentialFn,
    pub balayage: BalayageReport,
    mu: GridFn,
    nu: GridFn,
    /// Grid indices whose infinite values were capped.
    pub capped: Vec<usize>,
}

impl Obstacle {
    /// Fails with [`Error::Balayage`] unless `μÛ ≥ νÛ - tol` on the grid.
    pub fn new(initial: PotentialFn, target: PotentialFn, tol: f64) -> Result<Self> {
        let balayage = check_balayage(&initial, &target, tol)?;
        if !balayage.ok {
            return Err(Error::Balayage { min_margin: balayage.min_margin, argmin: balayage.argmin });
        }
        let (mu, mut capped) = initial.capped();
        let (mut nu, c2) = target.capped();
        // rounding can leave νÛ a few ulps above μÛ where they agree exactly;
        // the accepted margin is at most `tol`, so take the lower envelope
        for (n, m) in nu.values.iter_mut().zip(&mu.values) {
            *n = n.min(*m);
        }
        capped.extend(c2);
        capped.sort_unstable();
        capped.dedup();
        if !capped.is_empty() {
            log::info!("capped {} infinite potential value(s) before stepping", capped.len());
        }
        Ok(Self { initial, target, balayage, mu, nu, capped })
    }

    pub fn grid(&self) -> &GridSpec1D {
        &self.initial.grid
    }

    /// Finite `μÛ` used by the recursion.
    pub fn mu(&self) -> &GridFn {
        &self.mu
    }

    /// Finite `νÛ` used by the recursion.
    pub fn nu(&self) -> &GridFn {
        &self.nu
    }

    pub fn default_tol(&self) -> f64 {
        CONTACT_REL_TOL * self.target.scale().max(f64::MIN_POSITIVE)
    }
}

/// DP iterates `f(t_k, x_j)`, `t_k = k dt`, stored row-major in `(k, j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ValueSurface {
    pub grid: GridSpec1D,
    pub dt: f64,
    pub n_steps: usize,
    pub values: Vec<f64>,
    /// Largest amount by which a step exceeded `μÛ` and was projected back.
    pub clamp_max: f64,
}

#[derive(Serialize, Deserialize)]
struct SurfaceHeader {
    schema: String,
    grid: GridSpec1D,
    dt: f64,
    n_steps: usize,
    rows: usize,
    cols: usize,
    dtype: String,
    order: String,
    clamp_max: f64,
}

impl ValueSurface {
    pub fn slice(&self, k: usize) -> &[f64] {
        let n = self.grid.n_points;
        &self.values[k * n..(k + 1) * n]
    }

    pub fn value(&self, k: usize, j: usize) -> f64 {
        self.values[k * self.grid.n_points + j]
    }

    pub fn time(&self, k: usize) -> f64 {
        k as f64 * self.dt
    }

    pub fn horizon(&self) -> f64 {
        self.time(self.n_steps)
    }

    /// Slice at the largest grid time `≤ t`.
    pub fn at_time(&self, t: f64) -> &[f64] {
        let k = ((t / self.dt) + 1e-9).floor().clamp(0.0, self.n_steps as f64) as usize;
        self.slice(k)
    }

    /// `{j : f(t_k, x_j) - νÛ(x_j) ≤ tol}`.
    pub fn contact_set(&self, k: usize, nu: &[f64], tol: f64) -> Vec<bool> {
        self.slice(k).iter().zip(nu).map(|(f, v)| f - v <= tol).collect()
    }

    /// CSV `t,x,value`, keeping every `t_stride`-th slice and `x_stride`-th node.
    pub fn write_csv<W: Write>(&self, mut w: W, t_stride: usize, x_stride: usize) -> Result<()> {
        let (ts, xs) = (t_stride.max(1), x_stride.max(1));
        writeln!(w, "t,x,value")?;
        let mut ks: Vec<usize> = (0..=self.n_steps).step_by(ts).collect();
        if *ks.last().unwrap() != self.n_steps {
            ks.push(self.n_steps);
        }
        for k in ks {
            for j in (0..self.grid.n_points).step_by(xs) {
                writeln!(w, "{},{},{}", self.time(k), self.grid.x(j as isize), self.value(k, j))?;
            }
        }
        Ok(())
    }

    /// Raw little-endian `f64` dump (row-major `(t, x)`) plus a JSON header.
    pub fn write_binary(&self, bin: &Path, header: &Path) -> Result<()> {
        let mut w = BufWriter::new(File::create(bin)?);
        for v in &self.values {
            w.write_all(&v.to_le_bytes())?;
        }
        w.flush()?;
        let h = SurfaceHeader {
            schema: "rootsep.surface.v1".into(),
            grid: self.grid,
            dt: self.dt,
            n_steps: self.n_steps,
            rows: self.n_steps + 1,
            cols: self.grid.n_points,
            dtype: "f64-le".into(),
            order: "row-major (t, x)".into(),
            clamp_max: self.clamp_max,
        };
        std::fs::write(header, serde_json::to_string_pretty(&h)?)?;
        Ok(())
    }

    pub fn read_binary(bin: &Path, header: &Path) -> Result<Self> {
        let h: SurfaceHeader = serde_json::from_str(&std::fs::read_to_string(header)?)?;
        let bytes = std::fs::read(bin)?;
        if bytes.len() != 8 * h.rows * h.cols {
            return Err(invalid(format!("surface dump has {} bytes, header expects {}", bytes.len(), 8 * h.rows * h.cols)));
        }
        let values = bytes.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect();
        Ok(Self { grid: h.grid, dt: h.dt, n_steps: h.n_steps, values, clamp_max: h.clamp_max })
    }
}

/// Runs the recursion for `n_steps` steps. Each slice is projected onto
/// `[νÛ, μÛ]`: the lower bound is the obstacle, the upper bound holds for the
/// exact réduite and absorbs the consistency error of the discrete generator.
pub fn dp_reduite(obstacle: &Obstacle, step: &StepOperator, n_steps: usize) -> Result<ValueSurface> {
    let grid = *obstacle.grid();
    grid.ensure_same(step.grid())?;
    if n_steps == 0 {
        return Err(invalid("need at least one time step"));
    }
    let n = grid.n_points;
    let (mu, nu) = (&obstacle.mu().values, &obstacle.nu().values);
    let mut values = Vec::with_capacity((n_steps + 1) * n);
    values.extend_from_slice(mu);
    let mut buf = vec![0.0; n];
    let mut clamp_max = 0.0f64;
    for k in 0..n_steps {
        step.apply(&values[k * n..(k + 1) * n], &mut buf);
        for j in 0..n {
            let v = buf[j].max(nu[j]);
            if v > mu[j] {
                clamp_max = clamp_max.max(v - mu[j]);
                buf[j] = mu[j];
            } else {
                buf[j] = v;
            }
        }
        values.extend_from_slice(&buf);
    }
    if clamp_max > 0.0 {
        log::debug!("projection onto μÛ corrected at most {clamp_max:.3e}");
    }
    Ok(ValueSurface { grid, dt: step.dt(), n_steps, values, clamp_max })
}

/// Value at time `t` of the discrete optimal stopping problem for the dual walk,
/// `sup_τ E[μÛ(X̂_τ) 1_{τ = t} + νÛ(X̂_τ) 1_{τ < t}]`, over `n` slices of the exact
/// transition kernel `P̂_{t/n}` (uniformised Poisson series) on a lattice
/// extending `margin` sites beyond the grid, frozen at `μÛ` outside it.
pub fn ost_value_oracle(
    obstacle: &Obstacle,
    spec: &ProcessSpec,
    mu_potential: impl Fn(f64) -> f64,
    nu_potential: impl Fn(f64) -> f64,
    t: f64,
    n: usize,
) -> Result<GridFn> {
    let ProcessSpec::CtmcRandomWalk { p, lambda } = *spec else {
        return Err(Error::Unsupported("the stopping oracle is exact only for the random walk".into()));
    };
    let grid = *obstacle.grid();
    if (grid.dx() - 1.0).abs() > 1e-12 {
        return Err(invalid("random-walk grid must have unit spacing"));
    }
    if t == 0.0 || n == 0 {
        return Ok(obstacle.mu().clone());
    }
    let margin = 48usize;
    let lo = grid.x_min - margin as f64;
    let m = grid.n_points + 2 * margin;
    let xs: Vec<f64> = (0..m).map(|i| lo + i as f64).collect();
    let mu: Vec<f64> = xs.iter().map(|&x| mu_potential(x)).collect();
    let nu: Vec<f64> = xs.iter().map(|&x| nu_potential(x)).collect();
    let q = 1.0 - p;

    // Poisson weights of the number of jumps in one slice
    let rate = lambda * t / n as f64;
    let mut poisson = vec![(-rate).exp()];
    let mut tail = 1.0 - poisson[0];
    while tail > 1e-17 && poisson.len() < 400 {
        let k = poisson.len() as f64;
        let next = poisson[poisson.len() - 1] * rate / k;
        tail -= next;
        poisson.push(next);
    }

    // one jump of the dual chain: y → y-1 w.p. p, y → y+1 w.p. q; frozen outside
    let jump = |f: &[f64]| -> Vec<f64> {
        (0..m)
            .map(|i| {
                let down = if i == 0 { mu_potential(xs[0] - 1.0) } else { f[i - 1] };
                let up = if i + 1 == m { mu_potential(xs[m - 1] + 1.0) } else { f[i + 1] };
                p * down + q * up
            })
            .collect()
    };

    let mut v = mu.clone();
    for _ in 0..n {
        let mut acc: Vec<f64> = v.iter().map(|x| x * poisson[0]).collect();
        let mut cur = v.clone();
        for w in &poisson[1..] {
            cur = jump(&cur);
            for (a, c) in acc.iter_mut().zip(&cur) {
                *a += w * c;
            }
        }
        v = acc.iter().zip(&nu).map(|(a, b)| a.max(*b)).collect();
    }
    let values = (0..grid.n_points).map(|j| v[j + margin]).collect();
    GridFn::new(grid, values)
}

/// Sup-norm gap between two surfaces on their common `(t, x)` nodes; the finer
/// one must have half the time step.
pub fn grid_refinement_check(surface_n: &ValueSurface, surface_2n: &ValueSurface) -> Result<f64> {
    surface_n.grid.ensure_same(&surface_2n.grid)?;
    let ratio = surface_n.dt / surface_2n.dt;
    let r = ratio.round() as usize;
    if (ratio - r as f64).abs() > 1e-9 || !(r == 1 || r == 2) {
        return Err(invalid(format!("time steps {} and {} are not a dyadic refinement", surface_n.dt, surface_2n.dt)));
    }
    let k_max = surface_n.n_steps.min(surface_2n.n_steps / r);
    let mut gap = 0.0f64;
    for k in 0..=k_max {
        for (a, b) in surface_n.slice(k).iter().zip(surface_2n.slice(r * k)) {
            gap = gap.max((a - b).abs());
        }
    }
    Ok(gap)
}

/// Result of checking the recursion's structural properties slice by slice.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InvariantReport {
    /// `f(0, ·) = μÛ` bit for bit.
    pub initial_exact: bool,
    /// `max(νÛ − f, f − μÛ, 0)` over all slices.
    pub sandwich_violation: f64,
    /// `max(f(t_{k+1}) − f(t_k), 0)` over all slices.
    pub monotone_violation: f64,
    /// Contact sets `{f − νÛ ≤ tol}` are nested increasing in `k`.
    pub contact_growth: bool,
    pub tol_contact: f64,
}

impl InvariantReport {
    /// Passes with `tol` on the sandwich and monotonicity violations.
    pub fn passes(&self, tol: f64) -> bool {
        self.initial_exact && self.sandwich_violation <= tol && self.monotone_violation <= tol && self.contact_growth
    }
}

/// Incremental invariant checker for slices fed in time order.
#[derive(Debug, Clone)]
pub struct InvariantTracker<'a> {
    mu: &'a [f64],
    nu: &'a [f64],
    prev: Option<Vec<f64>>,
    contact: Vec<bool>,
    report: InvariantReport,
}

impl<'a> InvariantTracker<'a> {
    pub fn new(mu: &'a [f64], nu: &'a [f64], tol_contact: f64) -> Self {
        Self {
            mu,
            nu,
            prev: None,
            contact: vec![false; mu.len()],
            report: InvariantReport {
                initial_exact: true,
                sandwich_violation: 0.0,
                monotone_violation: 0.0,
                contact_growth: true,
                tol_contact,
            },
        }
    }

    pub fn push(&mut self, slice: &[f64]) {
        let r = &mut self.report;
        match &self.prev {
            None => r.initial_exact = slice.iter().zip(self.mu).all(|(a, b)| a.to_bits() == b.to_bits()),
            Some(prev) => {
                for (a, b) in slice.iter().zip(prev) {
                    r.monotone_violation = r.monotone_violation.max(a - b);
                }
            }
        }
        for j in 0..slice.len() {
            let f = slice[j];
            r.sandwich_violation = r.sandwich_violation.max(self.nu[j] - f).max(f - self.mu[j]);
            let c = f - self.nu[j] <= r.tol_contact;
            if self.contact[j] && !c {
                r.contact_growth = false;
            }
            self.contact[j] = c;
        }
        match &mut self.prev {
            Some(p) => p.copy_from_slice(slice),
            None => self.prev = Some(slice.to_vec()),
        }
    }

    pub fn finish(self) -> InvariantReport {
        self.report
    }
}

/// Checks every slice of `surface` against the obstacle.
pub fn check_invariants(surface: &ValueSurface, obstacle: &Obstacle, tol_contact: f64) -> InvariantReport {
    let mut t = InvariantTracker::new(&obstacle.mu().values, &obstacle.nu().values, tol_contact);
    for k in 0..=surface.n_steps {
        t.push(surface.slice(k));
    }
    t.finish()
}
