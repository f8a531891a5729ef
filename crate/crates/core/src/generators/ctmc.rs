use crate::error::{invalid, Error, Result};
use crate::grid::{GridFn, GridSpec1D};
use crate::process::ProcessSpec;

use super::{Extension, StepOperator};

/// Uniformised step of the dual walk: from `y` to `y-1` with prob. `p`, to `y+1` with `q`.
#[derive(Debug, Clone)]
pub(crate) struct CtmcStep {
    p: f64,
    lambda: f64,
    /// `λ dt / a(y)` per node.
    jump: Vec<f64>,
    left: f64,
    right: f64,
}

impl CtmcStep {
    pub(crate) fn new(
        p: f64,
        lambda: f64,
        grid: &GridSpec1D,
        dt: f64,
        ext: &Extension,
        rates: Option<&[f64]>,
    ) -> Result<Self> {
        if (grid.dx() - 1.0).abs() > 1e-12 {
            return Err(invalid(format!("random-walk grid must have unit spacing, got {}", grid.dx())));
        }
        let ldt = lambda * dt;
        let jump: Vec<f64> = match rates {
            Some(a) => a.iter().map(|a| ldt / a).collect(),
            None => vec![ldt; grid.n_points],
        };
        let worst = jump.iter().cloned().fold(0.0, f64::max);
        if worst >= 1.0 {
            return Err(Error::Stability(format!("λ·dt/a = {worst} must stay below 1")));
        }
        let n = grid.n_points as isize;
        Ok(Self { p, lambda, jump, left: ext.eval(grid.x(-1)), right: ext.eval(grid.x(n)) })
    }

    #[inline]
    fn neighbours(&self, f: &[f64], j: usize) -> (f64, f64) {
        let lo = if j == 0 { self.left } else { f[j - 1] };
        let hi = if j + 1 == f.len() { self.right } else { f[j + 1] };
        (lo, hi)
    }

    pub(crate) fn apply(&self, f: &[f64], out: &mut [f64]) {
        let q = 1.0 - self.p;
        for j in 0..f.len() {
            let (lo, hi) = self.neighbours(f, j);
            let c = self.jump[j];
            out[j] = (1.0 - c) * f[j] + c * (self.p * lo + q * hi);
        }
    }

    pub(crate) fn generator(&self, f: &[f64], out: &mut [f64]) {
        let q = 1.0 - self.p;
        for j in 0..f.len() {
            let (lo, hi) = self.neighbours(f, j);
            out[j] = self.lambda * (self.p * lo + q * hi - f[j]);
        }
    }
}

/// `(1 - λdt) f(y) + λdt (p f(y-1) + q f(y+1))`.
pub fn ctmc_dual_step(f: &GridFn, op: &StepOperator) -> Result<GridFn> {
    if !matches!(op.spec().base(), ProcessSpec::CtmcRandomWalk { .. }) {
        return Err(Error::Unsupported(format!("ctmc step on a {} operator", op.spec().name())));
    }
    op.step(f)
}
