//! Potential kernels `u(x, y)` and potential functions `μÛ(y) = ∫ u(x, y) μ(dx)`
//! of the supported processes, plus the balayage-order check.

use std::f64::consts::PI;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::grid::{GridFn, GridSpec1D};
use crate::measure::{Density, Measure};
use crate::process::ProcessSpec;
use crate::special::gamma;

/// `C_{1,α}` of the symmetric stable potential kernel `C_{1,α} |x - y|^{α-1}`.
pub fn stable_c1(alpha: f64) -> f64 {
    gamma((1.0 - alpha) / 2.0) / (2f64.powf(alpha) * PI.sqrt() * gamma(alpha / 2.0).powi(2))
}

/// `C_{2,α}` normalising the fractional Laplacian so that its symbol is `|θ|^α`.
pub fn stable_c2(alpha: f64) -> f64 {
    alpha * 2f64.powf(alpha - 1.0) * gamma((1.0 + alpha) / 2.0) / (PI.sqrt() * gamma(1.0 - alpha / 2.0))
}

/// Potential kernel `u(x, y)` of a plain (not time-changed) process.
///
/// The stable kernel diverges on the diagonal; `+∞` is returned there.
pub fn potential_kernel(spec: &ProcessSpec, x: f64, y: f64) -> Result<f64> {
    match *spec {
        ProcessSpec::CtmcRandomWalk { p, .. } => {
            let q = 1.0 - p;
            let c = 1.0 / (p - q);
            let d = y - x;
            if d >= 0.0 {
                Ok(c)
            } else {
                Ok(c * (p / q).powf(d))
            }
        }
        ProcessSpec::BmLine => Ok(-(x - y).abs()),
        ProcessSpec::BmInterval { a, b } => {
            for z in [x, y] {
                if !(z > a && z < b) {
                    return Err(Error::OutsideDomain { x: z, lo: a, hi: b });
                }
            }
            Ok(2.0 * (x.min(y) - a) * (b - x.max(y)) / (b - a))
        }
        ProcessSpec::Stable { alpha } => {
            let r = (x - y).abs();
            if r == 0.0 {
                Ok(f64::INFINITY)
            } else {
                Ok(stable_c1(alpha) * r.powf(alpha - 1.0))
            }
        }
        ProcessSpec::TimeChanged { .. } => Err(Error::Unsupported(
            "time-changed processes share the base potential; pass the base process".into(),
        )),
    }
}

/// Closed-form potential of the uniform law on `[-1, 1]` under the stable kernel.
pub fn stable_uniform_potential_closed(alpha: f64, y: f64) -> f64 {
    let c = stable_c1(alpha) / (2.0 * alpha);
    let ay = y.abs();
    if ay < 1.0 {
        c * ((1.0 - y).powf(alpha) + (1.0 + y).powf(alpha))
    } else {
        c * ((ay + 1.0).powf(alpha) - (ay - 1.0).powf(alpha))
    }
}

/// Brownian potential kernel in `ℝ^d` (d = 1, 2 without killing correction, d ≥ 3 Newtonian).
pub fn brownian_kernel(x: &[f64], y: &[f64]) -> f64 {
    let d = x.len();
    let r = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
    match d {
        1 => -r,
        2 => (1.0 / r).ln() / PI,
        _ => {
            let cd = 0.5 * PI.powf(-(d as f64) / 2.0) * gamma(0.5 * (d as f64 - 2.0));
            cd * r.powf(2.0 - d as f64)
        }
    }
}

/// Green function of `½Δ` on the unit disc with Dirichlet boundary:
/// `(1/π) log(|1 - x ȳ| / |x - y|)` in complex notation.
pub fn disc_green_2d(x: [f64; 2], y: [f64; 2]) -> f64 {
    let dx = ((x[0] - y[0]).powi(2) + (x[1] - y[1]).powi(2)).sqrt();
    // 1 - x * conj(y)
    let re = 1.0 - (x[0] * y[0] + x[1] * y[1]);
    let im = -(x[1] * y[0] - x[0] * y[1]);
    ((re * re + im * im).sqrt() / dx).ln() / PI
}

/// Potential of a measure under a fixed process, evaluable at any point.
#[derive(Debug, Clone)]
pub struct MeasurePotential {
    spec: ProcessSpec,
    measure: Measure,
}

impl MeasurePotential {
    pub fn new(spec: &ProcessSpec, measure: &Measure) -> Result<Self> {
        let spec = spec.base().clone();
        match spec {
            ProcessSpec::CtmcRandomWalk { .. } => {
                if measure.density.is_some() {
                    return Err(invalid("random-walk measures must be atomic"));
                }
                if let Some(a) = measure.atoms.iter().find(|a| a.location.fract() != 0.0) {
                    return Err(invalid(format!("random-walk atom off the lattice: {}", a.location)));
                }
            }
            ProcessSpec::BmInterval { a, b } => {
                let (lo, hi) = measure.support();
                let atoms_ok = measure.atoms.iter().all(|x| x.location > a && x.location < b);
                let dens_ok = measure.density.as_ref().map_or(true, |_| lo >= a && hi <= b);
                if !(atoms_ok && dens_ok) {
                    return Err(Error::OutsideDomain { x: if lo < a { lo } else { hi }, lo: a, hi: b });
                }
            }
            _ => {}
        }
        Ok(Self { spec, measure: measure.clone() })
    }

    pub fn measure(&self) -> &Measure {
        &self.measure
    }

    pub fn spec(&self) -> &ProcessSpec {
        &self.spec
    }

    /// `μÛ(y)`; may be `+∞` at an atom of a stable measure.
    pub fn eval(&self, y: f64) -> f64 {
        let mut acc = 0.0;
        for a in &self.measure.atoms {
            acc += a.weight * self.kernel(a.location, y);
        }
        if let Some(d) = &self.measure.density {
            acc += self.density_part(d, y);
        }
        acc
    }

    fn kernel(&self, x: f64, y: f64) -> f64 {
        match self.spec {
            ProcessSpec::BmInterval { a, b } if !(y > a && y < b) || !(x > a && x < b) => 0.0,
            _ => potential_kernel(&self.spec, x, y).expect("base process"),
        }
    }

    fn density_part(&self, d: &Density, y: f64) -> f64 {
        match self.spec {
            ProcessSpec::Stable { alpha } => stable_c1(alpha) * power_kernel_integral(d, y, alpha - 1.0),
            ProcessSpec::BmLine => -power_kernel_integral(d, y, 1.0),
            ProcessSpec::BmInterval { a, b } => {
                if !(y > a && y < b) {
                    return 0.0;
                }
                // Kernel is linear on each side of y: Simpson on each piece is exact.
                let k = |x: f64| 2.0 * (x.min(y) - a) * (b - x.max(y)) / (b - a);
                let h = d.grid.dx();
                let mut acc = 0.0;
                for j in 0..d.grid.n_points - 1 {
                    let (x0, x1) = (d.grid.x_at(j), d.grid.x_at(j + 1));
                    let pieces: &[(f64, f64)] = if y > x0 && y < x1 { &[(x0, y), (y, x1)] } else { &[(x0, x1)] };
                    for &(l, r) in pieces {
                        let m = 0.5 * (l + r);
                        let f = |x: f64| d.eval(x.clamp(x0, x1)) * k(x);
                        acc += (r - l) / 6.0 * (f(l) + 4.0 * f(m) + f(r));
                    }
                }
                let _ = h;
                acc
            }
            ProcessSpec::CtmcRandomWalk { .. } | ProcessSpec::TimeChanged { .. } => 0.0,
        }
    }
}

/// `∫ ρ(x) |x - y|^β dx` for the piecewise-linear density `ρ`, integrated
/// exactly cell by cell with the antiderivatives of `|z|^β` and `z|z|^β`.
fn power_kernel_integral(d: &Density, y: f64, beta: f64) -> f64 {
    let p0 = |z: f64| z.signum() * z.abs().powf(beta + 1.0) / (beta + 1.0);
    let p1 = |z: f64| z.abs().powf(beta + 2.0) / (beta + 2.0);
    let h = d.grid.dx();
    let mut acc = 0.0;
    let mut z0 = d.grid.x_min - y;
    let (mut a0, mut b0) = (p0(z0), p1(z0));
    for j in 0..d.grid.n_points - 1 {
        let z1 = d.grid.x_at(j + 1) - y;
        let (a1, b1) = (p0(z1), p1(z1));
        let (f0, f1) = (d.values[j], d.values[j + 1]);
        if f0 != 0.0 || f1 != 0.0 {
            let slope = (f1 - f0) / h;
            // ρ = f0 + slope (z - z0)
            acc += f0 * (a1 - a0) + slope * ((b1 - b0) - z0 * (a1 - a0));
        }
        z0 = z1;
        a0 = a1;
        b0 = b1;
    }
    acc
}

/// Grid samples of a potential function; entries may be `+∞`.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialFn {
    pub grid: GridSpec1D,
    pub values: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct PotentialFnJson {
    schema: String,
    grid: GridSpec1D,
    /// `null` encodes `+∞`.
    values: Vec<Option<f64>>,
}

impl PotentialFn {
    pub fn new(grid: GridSpec1D, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.n_points {
            return Err(Error::GridMismatch(format!("{} values for {} points", values.len(), grid.n_points)));
        }
        Ok(Self { grid, values })
    }

    pub fn has_infinite(&self) -> bool {
        self.values.iter().any(|v| v.is_infinite())
    }

    /// Scale used for contact tolerances: the largest finite magnitude.
    pub fn scale(&self) -> f64 {
        self.values.iter().filter(|v| v.is_finite()).fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// Replace `+∞` entries by the largest finite neighbouring value.
    /// Returns the capped function and the indices that were capped.
    pub fn capped(&self) -> (GridFn, Vec<usize>) {
        let n = self.values.len();
        let mut out = self.values.clone();
        let mut capped = Vec::new();
        for j in 0..n {
            if self.values[j].is_finite() {
                continue;
            }
            let mut best = f64::NEG_INFINITY;
            let mut r = 1;
            while best == f64::NEG_INFINITY && r < n {
                for k in [j.checked_sub(r), Some(j + r)].into_iter().flatten() {
                    if k < n && self.values[k].is_finite() {
                        best = best.max(self.values[k]);
                    }
                }
                r += 1;
            }
            out[j] = if best.is_finite() { best } else { 0.0 };
            capped.push(j);
        }
        (GridFn { grid: self.grid, values: out }, capped)
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "x,value")?;
        for (j, v) in self.values.iter().enumerate() {
            writeln!(w, "{},{}", self.grid.x_at(j), fmt_value(*v))?;
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        let js = PotentialFnJson {
            schema: "rootsep.potential.v1".into(),
            grid: self.grid,
            values: self.values.iter().map(|v| v.is_finite().then_some(*v)).collect(),
        };
        Ok(serde_json::to_string_pretty(&js)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let js: PotentialFnJson = serde_json::from_str(s)?;
        Self::new(js.grid, js.values.into_iter().map(|v| v.unwrap_or(f64::INFINITY)).collect())
    }
}

pub(crate) fn fmt_value(v: f64) -> String {
    if v == f64::INFINITY {
        "inf".to_string()
    } else if v == f64::NEG_INFINITY {
        "-inf".to_string()
    } else {
        format!("{v}")
    }
}

/// `μÛ` sampled on `grid`.
pub fn potential_of_measure(spec: &ProcessSpec, mu: &Measure, grid: &GridSpec1D) -> Result<PotentialFn> {
    let pot = MeasurePotential::new(spec, mu)?;
    if let ProcessSpec::BmInterval { a, b } = *spec.base() {
        if grid.x_min < a || grid.x_max > b {
            return Err(Error::OutsideDomain { x: grid.x_min.min(grid.x_max), lo: a, hi: b });
        }
    }
    let values = grid.points().into_iter().map(|y| pot.eval(y)).collect();
    PotentialFn::new(*grid, values)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BalayageReport {
    pub ok: bool,
    pub min_margin: f64,
    pub argmin: f64,
}

/// Checks `μÛ ≥ νÛ - tol` on every grid node.
pub fn check_balayage(mu_u: &PotentialFn, nu_u: &PotentialFn, tol: f64) -> Result<BalayageReport> {
    mu_u.grid.ensure_same(&nu_u.grid)?;
    let mut min_margin = f64::INFINITY;
    let mut argmin = mu_u.grid.x_min;
    for (j, (m, n)) in mu_u.values.iter().zip(&nu_u.values).enumerate() {
        let mut d = m - n;
        if d.is_nan() {
            // both infinite: a shared atom
            d = 0.0;
        }
        if d < min_margin {
            min_margin = d;
            argmin = mu_u.grid.x_at(j);
        }
    }
    Ok(BalayageReport { ok: min_margin >= -tol, min_margin, argmin })
}
