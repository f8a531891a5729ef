use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Uniform 1-d grid `x_j = x_min + j Δx`, `j = 0..n_points`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec1D {
    pub x_min: f64,
    pub x_max: f64,
    pub n_points: usize,
}

impl GridSpec1D {
    pub fn new(x_min: f64, x_max: f64, n_points: usize) -> Result<Self> {
        if !(x_min.is_finite() && x_max.is_finite()) || x_min >= x_max {
            return Err(invalid(format!("grid needs x_min < x_max, got [{x_min}, {x_max}]")));
        }
        if n_points < 2 {
            return Err(invalid(format!("grid needs at least 2 points, got {n_points}")));
        }
        Ok(Self { x_min, x_max, n_points })
    }

    /// Integer lattice `lo, lo+1, ..., hi`.
    pub fn integer(lo: i64, hi: i64) -> Result<Self> {
        if hi <= lo {
            return Err(invalid(format!("integer grid needs lo < hi, got {lo}..{hi}")));
        }
        Self::new(lo as f64, hi as f64, (hi - lo + 1) as usize)
    }

    /// Grid with the given spacing; `x_max` is rounded to a whole number of cells.
    pub fn with_spacing(x_min: f64, x_max: f64, dx: f64) -> Result<Self> {
        if dx <= 0.0 {
            return Err(invalid("grid spacing must be positive"));
        }
        let cells = ((x_max - x_min) / dx).round() as usize;
        Self::new(x_min, x_min + cells as f64 * dx, cells + 1)
    }

    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / (self.n_points - 1) as f64
    }

    pub fn len(&self) -> usize {
        self.n_points
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Coordinate of node `j`; also valid for indices outside the grid.
    #[inline]
    pub fn x(&self, j: isize) -> f64 {
        self.x_min + j as f64 * self.dx()
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n_points).map(|j| self.x(j as isize)).collect()
    }

    /// Index of the node nearest to `x`, clamped into the grid.
    pub fn nearest(&self, x: f64) -> usize {
        let s = ((x - self.x_min) / self.dx()).round();
        if s <= 0.0 {
            0
        } else {
            (s as usize).min(self.n_points - 1)
        }
    }

    /// Index of the node nearest to `x` if `x` is within half a cell of the grid.
    pub fn locate(&self, x: f64) -> Option<usize> {
        let s = ((x - self.x_min) / self.dx()).round();
        if s < 0.0 || s > (self.n_points - 1) as f64 {
            None
        } else {
            Some(s as usize)
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.x_min && x <= self.x_max
    }

    pub(crate) fn ensure_same(&self, other: &GridSpec1D) -> Result<()> {
        let tol = 1e-12 * (self.x_max - self.x_min).abs().max(1.0);
        if self.n_points != other.n_points
            || (self.x_min - other.x_min).abs() > tol
            || (self.x_max - other.x_max).abs() > tol
        {
            return Err(Error::GridMismatch(format!("{self:?} vs {other:?}")));
        }
        Ok(())
    }
}

/// Real values sampled on a grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridFn {
    pub grid: GridSpec1D,
    pub values: Vec<f64>,
}

impl GridFn {
    pub fn new(grid: GridSpec1D, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.n_points {
            return Err(Error::GridMismatch(format!(
                "{} values for {} grid points",
                values.len(),
                grid.n_points
            )));
        }
        Ok(Self { grid, values })
    }

    pub fn from_fn(grid: GridSpec1D, f: impl Fn(f64) -> f64) -> Self {
        let values = grid.points().into_iter().map(f).collect();
        Self { grid, values }
    }

    pub fn constant(grid: GridSpec1D, c: f64) -> Self {
        Self { grid, values: vec![c; grid.n_points] }
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// Piecewise-linear interpolation, clamped at the ends.
    pub fn interpolate(&self, x: f64) -> f64 {
        let s = (x - self.grid.x_min) / self.grid.dx();
        if s <= 0.0 {
            return self.values[0];
        }
        let last = self.grid.n_points - 1;
        if s >= last as f64 {
            return self.values[last];
        }
        let k = s.floor() as usize;
        let phi = s - k as f64;
        (1.0 - phi) * self.values[k] + phi * self.values[k + 1]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spacing_and_nodes() {
        let g = GridSpec1D::new(-1.0, 1.0, 201).unwrap();
        assert!((g.dx() - 0.01).abs() < 1e-15);
        assert_eq!(g.nearest(0.0), 100);
        assert_eq!(g.nearest(-5.0), 0);
        assert_eq!(g.locate(1.004), Some(200));
        assert_eq!(g.locate(1.006), None);
        assert_eq!(GridSpec1D::integer(-3, 4).unwrap().n_points, 8);
    }

    #[test]
    fn rejects_degenerate_grids() {
        assert!(GridSpec1D::new(1.0, 1.0, 10).is_err());
        assert!(GridSpec1D::new(0.0, 1.0, 1).is_err());
        assert!(GridFn::new(GridSpec1D::new(0.0, 1.0, 3).unwrap(), vec![0.0; 2]).is_err());
    }

    #[test]
    fn interpolation_is_exact_for_linear_data() {
        let g = GridSpec1D::new(0.0, 2.0, 5).unwrap();
        let f = GridFn::from_fn(g, |x| 3.0 * x - 1.0);
        assert!((f.interpolate(0.7) - 1.1).abs() < 1e-14);
        assert_eq!(f.interpolate(-1.0), -1.0);
    }
}
