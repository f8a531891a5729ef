use crate::error::{Error, Result};
use crate::grid::{GridFn, GridSpec1D};
use crate::process::ProcessSpec;

use super::{padded_extension, Extension, StepOperator};

/// Kernel half-width in standard deviations.
const TRUNCATION_SIGMAS: f64 = 6.0;

#[derive(Debug, Clone)]
enum Weights {
    Shared(Vec<f64>),
    /// Local variance `dt / a(x_j)` at each node (time-changed motion).
    PerNode(Vec<Vec<f64>>),
}

/// Discrete Gaussian convolution with normalised weights.
#[derive(Debug, Clone)]
pub(crate) struct GaussStep {
    weights: Weights,
    dx: f64,
    pad: usize,
    padded: Vec<f64>,
    /// Nodes outside an absorbing interval are pinned to zero.
    dead: Vec<bool>,
}

fn gauss_weights(var: f64, dx: f64) -> Vec<f64> {
    let half = (TRUNCATION_SIGMAS * var.sqrt() / dx).floor() as usize;
    let mut w: Vec<f64> = (0..=2 * half)
        .map(|i| {
            let z = (i as f64 - half as f64) * dx;
            (-z * z / (2.0 * var)).exp()
        })
        .collect();
    let s: f64 = w.iter().sum();
    w.iter_mut().for_each(|v| *v /= s);
    w
}

impl GaussStep {
    pub(crate) fn new(
        grid: &GridSpec1D,
        dt: f64,
        ext: &Extension,
        interval: Option<(f64, f64)>,
        rates: Option<&[f64]>,
    ) -> Self {
        let dx = grid.dx();
        let weights = match rates {
            None => Weights::Shared(gauss_weights(dt, dx)),
            Some(a) => Weights::PerNode(a.iter().map(|a| gauss_weights(dt / a, dx)).collect()),
        };
        let min_var = match rates {
            None => dt,
            Some(a) => dt / a.iter().cloned().fold(0.0, f64::max),
        };
        if min_var.sqrt() < dx / 2.0 {
            log::warn!(
                "Brownian step is sub-grid: sqrt(dt) = {:.3e} < dx/2 = {:.3e}; the step is nearly the identity",
                min_var.sqrt(),
                dx / 2.0
            );
        }
        let pad = match &weights {
            Weights::Shared(w) => w.len() / 2,
            Weights::PerNode(ws) => ws.iter().map(|w| w.len() / 2).max().unwrap_or(0),
        };
        let outside = |x: f64| interval.is_some_and(|(a, b)| x <= a || x >= b);
        let mut padded = padded_extension(grid, ext, pad);
        for (i, v) in padded.iter_mut().enumerate() {
            if outside(grid.x(i as isize - pad as isize)) {
                *v = 0.0;
            }
        }
        let dead = grid.points().into_iter().map(outside).collect();
        Self { weights, dx, pad, padded, dead }
    }

    #[inline]
    fn value(&self, f: &[f64], i: isize) -> f64 {
        if i >= 0 && (i as usize) < f.len() {
            if self.dead[i as usize] {
                0.0
            } else {
                f[i as usize]
            }
        } else {
            self.padded[(i + self.pad as isize) as usize]
        }
    }

    pub(crate) fn apply(&self, f: &[f64], out: &mut [f64]) {
        for j in 0..f.len() {
            if self.dead[j] {
                out[j] = 0.0;
                continue;
            }
            let w = match &self.weights {
                Weights::Shared(w) => w,
                Weights::PerNode(ws) => &ws[j],
            };
            let half = (w.len() / 2) as isize;
            let mut acc = 0.0;
            for (i, wk) in w.iter().enumerate() {
                acc += wk * self.value(f, j as isize + i as isize - half);
            }
            out[j] = acc;
        }
    }

    /// `½ f''` by the central second difference.
    pub(crate) fn generator(&self, f: &[f64], out: &mut [f64]) {
        let c = 0.5 / (self.dx * self.dx);
        for j in 0..f.len() {
            let i = j as isize;
            out[j] = if self.dead[j] {
                0.0
            } else {
                c * (self.value(f, i + 1) - 2.0 * self.value(f, i) + self.value(f, i - 1))
            };
        }
    }
}

/// Discrete Gaussian convolution step for Brownian motion on the line or an interval.
pub fn bm1d_dual_step(f: &GridFn, op: &StepOperator) -> Result<GridFn> {
    if !matches!(op.spec().base(), ProcessSpec::BmLine | ProcessSpec::BmInterval { .. }) {
        return Err(Error::Unsupported(format!("Brownian step on a {} operator", op.spec().name())));
    }
    op.step(f)
}
