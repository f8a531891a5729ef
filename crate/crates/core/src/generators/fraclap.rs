//! Discrete fractional Laplacian `(-Δ)^{α/2}` and the explicit stable step built on it.

use std::fmt;
use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::error::{invalid, Error, Result};
use crate::grid::{GridFn, GridSpec1D};
use crate::potential::stable_c2;
use crate::special::gk15_points;

use super::{padded_extension, Extension};

/// Radius beyond which the integral is replaced by its analytic tail.
pub const DEFAULT_RADIUS: f64 = 1.0e4;

/// Stencils with more multiply-adds per application than this go through the FFT.
const DIRECT_LIMIT: usize = 1 << 22;

/// `(-Δ)^{α/2} f(y_j) = C₂ [D f_j - Σ_{k≥1} w_k (f_{j+k} + f_{j-k}) - b_j]`.
///
/// The principal value integral is split into a Taylor cell `[0, Δx]`, the
/// linear interpolant of `f` integrated exactly against `z^{-1-α}` cell by cell
/// up to the grid width, Gauss–Kronrod panels on the off-grid continuation up to
/// `radius`, and an analytic tail. Off-grid values enter only through `b_j`.
#[derive(Clone)]
pub struct FracLaplacian {
    alpha: f64,
    c2: f64,
    /// `w[k - 1]` multiplies `f_{j±k}`.
    weights: Vec<f64>,
    diag: f64,
    outside: Vec<f64>,
    fft: Option<FftConv>,
}

#[derive(Clone)]
struct FftConv {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    kernel: Vec<Complex<f64>>,
    offset: usize,
}

impl fmt::Debug for FracLaplacian {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FracLaplacian")
            .field("alpha", &self.alpha)
            .field("taps", &self.weights.len())
            .field("diag", &self.diag)
            .field("fft", &self.fft.is_some())
            .finish()
    }
}

impl FracLaplacian {
    pub fn new(alpha: f64, grid: &GridSpec1D, ext: &Extension, radius: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(invalid(format!("stable index must lie in (0,1), got {alpha}")));
        }
        let h = grid.dx();
        let n = grid.n_points;
        if !(radius >= 2.0 * h) {
            return Err(invalid(format!("integration radius {radius} must cover at least two cells")));
        }
        let width = grid.x_max - grid.x_min;
        // cells [kh, (k+1)h], k = 1..m, carry the interpolated part
        let m = if radius >= width { n - 1 } else { ((radius / h) + 1e-9).floor() as usize };
        let radius = if radius >= width { radius } else { m as f64 * h };

        let near = h.powf(-alpha) / (2.0 - alpha);
        let mut weights = vec![0.0; m];
        weights[0] = near;
        for k in 1..m {
            let a = k as f64 * h;
            for (z, w) in gk15_points(a, a + h) {
                let c = w * z.powf(-1.0 - alpha);
                let s = (z - a) / h;
                weights[k - 1] += c * (1.0 - s);
                weights[k] += c * s;
            }
        }

        let mut far = Vec::new();
        let mut lo = m as f64 * h;
        while lo < radius {
            let hi = (2.0 * lo).min(radius);
            far.extend(gk15_points(lo, hi).iter().map(|&(z, w)| (z, w * z.powf(-1.0 - alpha))));
            lo = hi;
        }
        let diag = 2.0 * weights.iter().sum::<f64>()
            + 2.0 * far.iter().map(|(_, c)| c).sum::<f64>()
            + 2.0 * radius.powf(-alpha) / alpha;

        let padded = padded_extension(grid, ext, m);
        let tail = ext.tail_integral(alpha, radius);
        let far_left = FarTable::new(ext, grid.x_min, -1.0, radius, h);
        let far_right = FarTable::new(ext, grid.x_max, 1.0, radius, h);
        let outside = (0..n)
            .map(|j| {
                let mut b = tail;
                // f_{j+k} off the grid for k > n-1-j, f_{j-k} for k > j
                for k in (n - j)..=m {
                    b += weights[k - 1] * padded[j + k + m];
                }
                for k in (j + 1)..=m {
                    b += weights[k - 1] * padded[j + m - k];
                }
                let y = grid.x(j as isize);
                for &(z, c) in &far {
                    b += c * (far_right.eval(y + z) + far_left.eval(y - z));
                }
                b
            })
            .collect();

        let fft = if 2 * m * n > DIRECT_LIMIT { Some(FftConv::new(&weights, n)) } else { None };
        Ok(Self { alpha, c2: stable_c2(alpha), weights, diag, outside, fft })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Diagonal coefficient `C₂ D`; explicit steps need `dt · C₂ D ≤ a_min`.
    pub fn diagonal(&self) -> f64 {
        self.c2 * self.diag
    }

    pub fn apply(&self, f: &[f64], out: &mut [f64]) {
        let n = f.len();
        match &self.fft {
            Some(conv) => conv.convolve(f, out),
            None => {
                for (j, o) in out.iter_mut().enumerate() {
                    let mut acc = 0.0;
                    for (k, w) in self.weights.iter().enumerate() {
                        let k = k + 1;
                        let up = if j + k < n { f[j + k] } else { 0.0 };
                        let down = if k <= j { f[j - k] } else { 0.0 };
                        acc += w * (up + down);
                    }
                    *o = acc;
                }
            }
        }
        for j in 0..n {
            out[j] = self.c2 * (self.diag * f[j] - out[j] - self.outside[j]);
        }
    }
}

/// Extension values beyond one end of the grid, tabulated on nodes uniform in
/// `log(1 + d/δ)` where `d` is the distance from the grid end.
struct FarTable {
    edge: f64,
    side: f64,
    delta: f64,
    ds: f64,
    values: Vec<f64>,
}

impl FarTable {
    const NODES_PER_UNIT: f64 = 500.0;

    fn new(ext: &Extension, edge: f64, side: f64, radius: f64, delta: f64) -> Self {
        let s_max = (1.0 + 2.0 * radius / delta).ln();
        let n = (s_max * Self::NODES_PER_UNIT).ceil() as usize + 2;
        let ds = s_max / (n - 2) as f64;
        let values = (0..n).map(|i| ext.eval(edge + side * delta * ((i as f64 * ds).exp() - 1.0))).collect();
        Self { edge, side, delta, ds, values }
    }

    fn eval(&self, x: f64) -> f64 {
        let d = (self.side * (x - self.edge)).max(0.0);
        let u = (1.0 + d / self.delta).ln() / self.ds;
        let i = (u.floor() as usize).min(self.values.len() - 2);
        let t = u - i as f64;
        (1.0 - t) * self.values[i] + t * self.values[i + 1]
    }
}

impl FftConv {
    fn new(weights: &[f64], n: usize) -> Self {
        let m = weights.len();
        let len = (n + 2 * m + 1).next_power_of_two();
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(len);
        let inverse = planner.plan_fft_inverse(len);
        // kernel index i ↔ offset i - m
        let mut kernel = vec![Complex::new(0.0, 0.0); len];
        for (k, w) in weights.iter().enumerate() {
            kernel[m + k + 1].re = *w;
            kernel[m - k - 1].re = *w;
        }
        forward.process(&mut kernel);
        let scale = 1.0 / len as f64;
        kernel.iter_mut().for_each(|c| *c *= scale);
        Self { forward, inverse, kernel, offset: m }
    }

    /// `out_j = Σ_k w_{|k|} f_{j+k}` with `f` zero off the grid.
    fn convolve(&self, f: &[f64], out: &mut [f64]) {
        let len = self.kernel.len();
        let mut buf = vec![Complex::new(0.0, 0.0); len];
        // reversed signal so that the linear convolution picks up f_{j+k}
        let n = f.len();
        for (i, v) in f.iter().enumerate() {
            buf[n - 1 - i].re = *v;
        }
        self.forward.process(&mut buf);
        for (b, k) in buf.iter_mut().zip(&self.kernel) {
            *b *= k;
        }
        self.inverse.process(&mut buf);
        // (rev f * w)[i] = Σ_k w[k-m] f[n-1-(i-k)]; choose i = n-1-j+m ⇒ f index j + (k - m)
        for (j, o) in out.iter_mut().enumerate() {
            *o = buf[n - 1 - j + self.offset].re;
        }
    }
}

/// `(-Δ)^{α/2} f` on the grid of `f`, integrated out to `radius`, with `f`
/// continued off the grid by `ext`.
pub fn frac_laplacian_apply(f: &GridFn, alpha: f64, radius: f64, ext: &Extension) -> Result<GridFn> {
    let lap = FracLaplacian::new(alpha, &f.grid, ext, radius)?;
    let mut out = vec![0.0; f.values.len()];
    lap.apply(&f.values, &mut out);
    Ok(GridFn { grid: f.grid, values: out })
}

/// Explicit Euler step `f - dt (-Δ)^{α/2} f / a` of the dual stable semigroup.
#[derive(Debug, Clone)]
pub(crate) struct StableStep {
    lap: FracLaplacian,
    dt: f64,
    rates: Option<Vec<f64>>,
}

impl StableStep {
    pub(crate) fn new(
        alpha: f64,
        grid: &GridSpec1D,
        dt: f64,
        ext: &Extension,
        radius: f64,
        rates: Option<Vec<f64>>,
    ) -> Result<Self> {
        let lap = FracLaplacian::new(alpha, grid, ext, radius)?;
        let a_min = rates.as_ref().map_or(1.0, |a| a.iter().cloned().fold(f64::INFINITY, f64::min));
        let c = dt * lap.diagonal() / a_min;
        if c > 1.0 {
            return Err(Error::Stability(format!(
                "dt·C₂·D/a_min = {c:.4} exceeds 1; use dt ≤ {:.4e}",
                a_min / lap.diagonal()
            )));
        }
        Ok(Self { lap, dt, rates })
    }

    pub(crate) fn apply(&self, f: &[f64], out: &mut [f64]) {
        let mut lap = vec![0.0; f.len()];
        self.lap.apply(f, &mut lap);
        match &self.rates {
            None => {
                for j in 0..f.len() {
                    out[j] = f[j] - self.dt * lap[j];
                }
            }
            Some(a) => {
                for j in 0..f.len() {
                    out[j] = f[j] - self.dt * (lap[j] / a[j]);
                }
            }
        }
    }

    pub(crate) fn generator(&self, f: &[f64], out: &mut [f64]) {
        self.lap.apply(f, out);
        out.iter_mut().for_each(|v| *v = -*v);
    }
}
