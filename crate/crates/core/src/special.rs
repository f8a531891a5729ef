//! Special functions and quadrature shared by the potentials, the
//! fractional Laplacian and the no-return probability.

use std::f64::consts::PI;

const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEF: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// Gamma function (Lanczos approximation, reflection for `x < 1/2`).
pub fn gamma(x: f64) -> f64 {
    if x < 0.5 {
        // Γ(x)Γ(1-x) = π / sin(πx)
        PI / ((PI * x).sin() * gamma(1.0 - x))
    } else {
        let x = x - 1.0;
        let mut acc = LANCZOS_COEF[0];
        for (i, c) in LANCZOS_COEF.iter().enumerate().skip(1) {
            acc += c / (x + i as f64);
        }
        let t = x + LANCZOS_G + 0.5;
        (2.0 * PI).sqrt() * t.powf(x + 0.5) * (-t).exp() * acc
    }
}

/// Natural log of |Γ(x)| for positive `x`.
pub fn ln_gamma(x: f64) -> f64 {
    debug_assert!(x > 0.0);
    if x < 0.5 {
        return gamma(x).abs().ln();
    }
    let x = x - 1.0;
    let mut acc = LANCZOS_COEF[0];
    for (i, c) in LANCZOS_COEF.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    let t = x + LANCZOS_G + 0.5;
    0.5 * (2.0 * PI).ln() + (x + 0.5) * t.ln() - t + acc.ln()
}

/// Kronrod abscissae of the 15-point rule on [-1, 1] (non-negative half).
pub const GK15_NODES: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

/// Kronrod weights matching [`GK15_NODES`].
pub const GK15_WEIGHTS: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

/// Embedded 7-point Gauss weights (nodes are the odd Kronrod nodes).
const G7_WEIGHTS: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// The 15 (node, weight) pairs of the Kronrod rule mapped onto `[a, b]`.
pub fn gk15_points(a: f64, b: f64) -> [(f64, f64); 15] {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut out = [(0.0, 0.0); 15];
    for i in 0..7 {
        out[2 * i] = (c - h * GK15_NODES[i], h * GK15_WEIGHTS[i]);
        out[2 * i + 1] = (c + h * GK15_NODES[i], h * GK15_WEIGHTS[i]);
    }
    out[14] = (c, h * GK15_WEIGHTS[7]);
    out
}

/// One Gauss–Kronrod panel: returns (Kronrod estimate, |Kronrod − Gauss|).
pub fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = fc * GK15_WEIGHTS[7];
    let mut gauss = fc * G7_WEIGHTS[3];
    for i in 0..7 {
        let dx = h * GK15_NODES[i];
        let s = f(c - dx) + f(c + dx);
        kron += GK15_WEIGHTS[i] * s;
        if i % 2 == 1 {
            gauss += G7_WEIGHTS[i / 2] * s;
        }
    }
    (kron * h, ((kron - gauss) * h).abs())
}

/// Adaptive Gauss–Kronrod integration of `f` over `[a, b]`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    fn recurse<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
        let (val, err) = gk15(f, a, b);
        if err <= tol.max(1e-15 * val.abs()) || depth == 0 {
            return val;
        }
        let m = 0.5 * (a + b);
        recurse(f, a, m, 0.5 * tol, depth - 1) + recurse(f, m, b, 0.5 * tol, depth - 1)
    }
    recurse(&f, a, b, tol, 40)
}

/// Regularised lower incomplete integral of `u^{p-1}(1-u)^{q-1}` on `[0, x]`,
/// unnormalised. Endpoint singularities are removed by substitution.
pub fn incomplete_beta_integral(p: f64, q: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    let x = x.min(1.0);
    let split = 0.5f64.min(x);
    // u = v^{1/p}: u^{p-1} du = dv / p
    let lower = integrate(
        |v: f64| (1.0 - v.powf(1.0 / p)).powf(q - 1.0) / p,
        0.0,
        split.powf(p),
        1e-13,
    );
    if x <= 0.5 {
        return lower;
    }
    // 1 - u = w^{1/q}: (1-u)^{q-1} du = -dw / q
    let upper = integrate(
        |w: f64| (1.0 - w.powf(1.0 / q)).powf(p - 1.0) / q,
        (1.0 - x).powf(q),
        0.5f64.powf(q),
        1e-13,
    );
    lower + upper
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gamma_reference_values() {
        assert!((gamma(0.25) - 3.625_609_908_221_908).abs() < 1e-12);
        assert!((gamma(0.5) - PI.sqrt()).abs() < 1e-13);
        assert!((gamma(5.0) - 24.0).abs() < 1e-11);
        assert!((gamma(0.75) - 1.225_416_702_465_177_6).abs() < 1e-12);
        assert!((ln_gamma(10.0) - 362_880f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn gk_integrates_polynomials_exactly() {
        let (v, _) = gk15(&|x: f64| x.powi(6) - 3.0 * x, 0.0, 2.0);
        assert!((v - (128.0 / 7.0 - 6.0)).abs() < 1e-12);
        let pts = gk15_points(0.0, 2.0);
        let s: f64 = pts.iter().map(|(x, w)| w * x * x).sum();
        assert!((s - 8.0 / 3.0).abs() < 1e-13);
    }

    #[test]
    fn incomplete_beta_full_range_is_beta_function() {
        let (p, q) = (0.25, 0.5);
        let b = gamma(p) * gamma(q) / gamma(p + q);
        assert!((incomplete_beta_integral(p, q, 1.0) - b).abs() < 1e-9);
        assert_eq!(incomplete_beta_integral(p, q, 0.0), 0.0);
    }
}
