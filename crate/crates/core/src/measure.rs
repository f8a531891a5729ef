//! Finite (sub-)probability measures on the line: a list of atoms plus an
//! optional density sampled on a uniform grid (piecewise linear between
//! samples, zero outside the grid).

use std::io::Write;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::densities::beta_density;
use crate::error::{invalid, Result};
use crate::grid::GridSpec1D;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub location: f64,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Density {
    pub grid: GridSpec1D,
    pub values: Vec<f64>,
}

impl Density {
    fn mass(&self) -> f64 {
        let h = self.grid.dx();
        let v = &self.values;
        let inner: f64 = v.iter().sum::<f64>() - 0.5 * (v[0] + v[v.len() - 1]);
        inner * h
    }

    /// Value of the piecewise-linear density at `x`.
    pub fn eval(&self, x: f64) -> f64 {
        if !self.grid.contains(x) {
            return 0.0;
        }
        let s = (x - self.grid.x_min) / self.grid.dx();
        let k = (s.floor() as usize).min(self.grid.n_points - 2);
        let phi = s - k as f64;
        (1.0 - phi) * self.values[k] + phi * self.values[k + 1]
    }

    /// Cumulative table `F_k = ∫_{x_min}^{x_k}` (trapezoid, exact for the linear interpolant).
    fn cumulative(&self) -> Vec<f64> {
        let h = self.grid.dx();
        let mut acc = 0.0;
        let mut out = Vec::with_capacity(self.values.len());
        out.push(0.0);
        for w in self.values.windows(2) {
            acc += 0.5 * h * (w[0] + w[1]);
            out.push(acc);
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Measure {
    pub atoms: Vec<Atom>,
    pub density: Option<Density>,
    pub total_mass: f64,
}

impl Measure {
    pub fn new(atoms: Vec<Atom>, density: Option<Density>) -> Result<Self> {
        for a in &atoms {
            if !(a.weight > 0.0) || !a.location.is_finite() {
                return Err(invalid(format!("atom weights must be positive, got {a:?}")));
            }
        }
        let mut total = atoms.iter().map(|a| a.weight).sum::<f64>();
        if let Some(d) = &density {
            if d.values.len() != d.grid.n_points {
                return Err(invalid("density sample count does not match its grid"));
            }
            if d.values.iter().any(|v| !(*v >= 0.0) || !v.is_finite()) {
                return Err(invalid("density samples must be finite and non-negative"));
            }
            total += d.mass();
        }
        if !(total > 0.0) || total > 1.0 + 1e-9 {
            return Err(invalid(format!("total mass must lie in (0, 1], got {total}")));
        }
        Ok(Self { atoms, density, total_mass: total })
    }

    pub fn dirac(x: f64) -> Self {
        Self::new(vec![Atom { location: x, weight: 1.0 }], None).expect("valid dirac")
    }

    pub fn atoms(pairs: &[(f64, f64)]) -> Result<Self> {
        Self::new(
            pairs.iter().map(|&(location, weight)| Atom { location, weight }).collect(),
            None,
        )
    }

    /// Density measure `mass · g` where `g` is sampled on `grid`.
    pub fn from_density(grid: GridSpec1D, g: impl Fn(f64) -> f64, mass: f64) -> Result<Self> {
        let values = grid.points().into_iter().map(|x| mass * g(x)).collect();
        Self::new(Vec::new(), Some(Density { grid, values }))
    }

    pub fn uniform(a: f64, b: f64, n_points: usize) -> Result<Self> {
        let grid = GridSpec1D::new(a, b, n_points)?;
        Self::from_density(grid, |_| 1.0 / (b - a), 1.0)
    }

    /// `mass · Beta(a, b)` transported to `[-1, 1]`.
    pub fn beta(a: f64, b: f64, mass: f64, n_points: usize) -> Result<Self> {
        let grid = GridSpec1D::new(-1.0, 1.0, n_points)?;
        let m = Self::from_density(grid, |x| beta_density(a, b, x), mass)?;
        Ok(m.with_mass(mass))
    }

    /// Rescale so the total mass equals `mass` (removes discretisation drift).
    pub fn with_mass(mut self, mass: f64) -> Self {
        let f = mass / self.total_mass;
        for a in &mut self.atoms {
            a.weight *= f;
        }
        if let Some(d) = &mut self.density {
            d.values.iter_mut().for_each(|v| *v *= f);
        }
        self.total_mass = mass;
        self
    }

    /// `α μ₁ + β μ₂` (densities must share a grid).
    pub fn combine(a: f64, m1: &Measure, b: f64, m2: &Measure) -> Result<Self> {
        let mut atoms: Vec<Atom> = m1
            .atoms
            .iter()
            .map(|x| Atom { weight: a * x.weight, ..*x })
            .chain(m2.atoms.iter().map(|x| Atom { weight: b * x.weight, ..*x }))
            .collect();
        atoms.retain(|x| x.weight > 0.0);
        let density = match (&m1.density, &m2.density) {
            (None, None) => None,
            (Some(d), None) => Some(Density { grid: d.grid, values: d.values.iter().map(|v| a * v).collect() }),
            (None, Some(d)) => Some(Density { grid: d.grid, values: d.values.iter().map(|v| b * v).collect() }),
            (Some(d1), Some(d2)) => {
                d1.grid.ensure_same(&d2.grid)?;
                Some(Density {
                    grid: d1.grid,
                    values: d1.values.iter().zip(&d2.values).map(|(x, y)| a * x + b * y).collect(),
                })
            }
        };
        Self::new(atoms, density)
    }

    /// Smallest interval containing the support.
    pub fn support(&self) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for a in &self.atoms {
            lo = lo.min(a.location);
            hi = hi.max(a.location);
        }
        if let Some(d) = &self.density {
            lo = lo.min(d.grid.x_min);
            hi = hi.max(d.grid.x_max);
        }
        (lo, hi)
    }

    fn density_mass(&self) -> f64 {
        self.density.as_ref().map_or(0.0, |d| d.mass())
    }

    /// CDF of the normalised measure `μ / μ(ℝ)`; `left` selects `F(x-)`.
    fn normalised_cdf(&self, x: f64, left: bool) -> f64 {
        let mut acc = 0.0;
        for a in &self.atoms {
            if a.location < x || (!left && a.location == x) {
                acc += a.weight;
            }
        }
        if let Some(d) = &self.density {
            if x >= d.grid.x_max {
                acc += d.mass();
            } else if x > d.grid.x_min {
                let h = d.grid.dx();
                let s = (x - d.grid.x_min) / h;
                let k = (s.floor() as usize).min(d.grid.n_points - 2);
                let cum = d.cumulative();
                let t = x - d.grid.x_at(k);
                let slope = (d.values[k + 1] - d.values[k]) / h;
                acc += cum[k] + d.values[k] * t + 0.5 * slope * t * t;
            }
        }
        (acc / self.total_mass).clamp(0.0, 1.0)
    }

    pub fn cdf(&self, x: f64) -> f64 {
        self.normalised_cdf(x, false)
    }

    pub fn cdf_left(&self, x: f64) -> f64 {
        self.normalised_cdf(x, true)
    }

    /// Quantile of the normalised measure (bisection on the CDF).
    pub fn quantile(&self, q: f64) -> f64 {
        let (mut lo, mut hi) = self.support();
        if q <= 0.0 {
            return lo;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if self.cdf(mid) >= q {
                hi = mid;
            } else {
                lo = mid;
            }
            if hi - lo < 1e-14 * (1.0 + hi.abs()) {
                break;
            }
        }
        hi
    }

    /// Draw from the normalised measure. Densities use inverse-CDF on the
    /// grid with linear interpolation of the cumulative table.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u: f64 = rng.random::<f64>() * self.total_mass;
        let mut acc = 0.0;
        for a in &self.atoms {
            acc += a.weight;
            if u < acc {
                return a.location;
            }
        }
        match &self.density {
            Some(d) => {
                let cum = d.cumulative();
                let target = (u - acc).min(cum[cum.len() - 1]);
                let k = match cum.partition_point(|c| *c <= target) {
                    0 => 0,
                    k => (k - 1).min(cum.len() - 2),
                };
                let span = cum[k + 1] - cum[k];
                let phi = if span > 0.0 { (target - cum[k]) / span } else { 0.0 };
                d.grid.x_at(k) + phi.clamp(0.0, 1.0) * d.grid.dx()
            }
            // rounding pushed u past the last atom
            None => self.atoms.last().map(|a| a.location).unwrap_or(0.0),
        }
    }

    /// Mass carried by the density part.
    pub fn continuous_mass(&self) -> f64 {
        self.density_mass()
    }

    /// CSV export: atom rows first (`value` = weight), then density samples.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "x,value")?;
        for a in &self.atoms {
            writeln!(w, "{},{}", a.location, a.weight)?;
        }
        if let Some(d) = &self.density {
            for (j, v) in d.values.iter().enumerate() {
                writeln!(w, "{},{}", d.grid.x_at(j), v)?;
            }
        }
        Ok(())
    }
}

impl GridSpec1D {
    #[inline]
    pub(crate) fn x_at(&self, j: usize) -> f64 {
        self.x(j as isize)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn masses() {
        let u = Measure::uniform(-1.0, 1.0, 11).unwrap();
        assert!((u.total_mass - 1.0).abs() < 1e-14);
        let b = Measure::beta(2.0, 2.0, 0.75, 401).unwrap();
        assert!((b.total_mass - 0.75).abs() < 1e-14);
        assert!(Measure::atoms(&[(0.0, 0.7), (1.0, 0.7)]).is_err());
        assert!(Measure::atoms(&[(0.0, -0.1)]).is_err());
    }

    #[test]
    fn cdf_of_atoms_has_left_limits() {
        let nu = Measure::atoms(&[(2.0, 0.25), (4.0, 0.75)]).unwrap();
        assert_eq!(nu.cdf(2.0), 0.25);
        assert_eq!(nu.cdf_left(2.0), 0.0);
        assert_eq!(nu.cdf(3.9), 0.25);
        assert_eq!(nu.cdf(4.0), 1.0);
    }

    #[test]
    fn uniform_cdf_and_quantile() {
        let u = Measure::uniform(-1.0, 1.0, 5).unwrap();
        assert!((u.cdf(0.3) - 0.65).abs() < 1e-14);
        assert!((u.quantile(0.25) + 0.5).abs() < 1e-10);
    }

    #[test]
    fn beta_cdf_matches_closed_form() {
        // Beta(2,2) on [-1,1]: F(x) = (2 + 3x - x^3)/4
        let b = Measure::beta(2.0, 2.0, 0.75, 2001).unwrap();
        for &x in &[-0.9, -0.3, 0.0, 0.5, 0.95] {
            let exact = (2.0 + 3.0 * x - x * x * x) / 4.0;
            assert!((b.cdf(x) - exact).abs() < 1e-6, "x={x}");
        }
    }

    #[test]
    fn sampling_uniform_mean() {
        let u = Measure::uniform(-1.0, 1.0, 3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let n = 20_000;
        let mean = (0..n).map(|_| u.sample(&mut rng)).sum::<f64>() / n as f64;
        assert!(mean.abs() < 3.0 * (1.0f64 / 3.0).sqrt() / (n as f64).sqrt());
    }

    #[test]
    fn sampling_atoms_frequencies() {
        let nu = Measure::atoms(&[(2.0, 0.25), (4.0, 0.75)]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let n = 40_000;
        let c2 = (0..n).filter(|_| nu.sample(&mut rng) == 2.0).count() as f64 / n as f64;
        assert!((c2 - 0.25).abs() < 3.0 * (0.25f64 * 0.75 / n as f64).sqrt());
    }
}
