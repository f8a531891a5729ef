use std::f64::consts::FRAC_PI_4;
use std::sync::OnceLock;

use crate::special::ln_gamma;

/// Density of a Beta(a, b) law transported to `[-1, 1]`.
pub fn beta_density(a: f64, b: f64, x: f64) -> f64 {
    if x.abs() > 1.0 {
        return 0.0;
    }
    let log_norm = ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b) + (1.0 - a - b) * 2f64.ln();
    let left = if a == 1.0 { 1.0 } else { (x + 1.0).powf(a - 1.0) };
    let right = if b == 1.0 { 1.0 } else { (1.0 - x).powf(b - 1.0) };
    log_norm.exp() * left * right
}

const BM2D_SHIFT: f64 = 0.15;

fn bm2d_unnormalised(x1: f64, x2: f64) -> f64 {
    let (a, b) = (FRAC_PI_4.cos(), FRAC_PI_4.sin());
    let (d1, d2) = (x1 - BM2D_SHIFT, x2 - BM2D_SHIFT);
    let u = a * d1 - b * d2 - BM2D_SHIFT;
    let v = b * d1 + a * d2 - BM2D_SHIFT;
    (-2.5 * u * u - 6.0 * v * v).exp()
}

/// Normalising constant of the rotated Gaussian target, by 2-d trapezoid
/// quadrature on `[-4, 4]²`.
pub fn bm2d_normaliser() -> f64 {
    static C: OnceLock<f64> = OnceLock::new();
    *C.get_or_init(|| {
        let n = 1601usize;
        let h = 8.0 / (n - 1) as f64;
        let mut acc = 0.0;
        for i in 0..n {
            let wi = if i == 0 || i == n - 1 { 0.5 } else { 1.0 };
            let x1 = -4.0 + i as f64 * h;
            for j in 0..n {
                let wj = if j == 0 || j == n - 1 { 0.5 } else { 1.0 };
                acc += wi * wj * bm2d_unnormalised(x1, -4.0 + j as f64 * h);
            }
        }
        1.0 / (acc * h * h)
    })
}

/// Anisotropic, rotated Gaussian target density used in the 2-d Brownian demo.
pub fn bm2d_target_density(x1: f64, x2: f64) -> f64 {
    bm2d_normaliser() * bm2d_unnormalised(x1, x2)
}
