use std::f64::consts::FRAC_PI_2;

use rand::Rng;
use rand_distr::{Distribution, Exp1};

use crate::special::{gamma, incomplete_beta_integral};

/// Standard symmetric α-stable variate, `E exp(iθS) = exp(-|θ|^α)`, by the
/// Chambers–Mallows–Stuck transform.
pub fn sample_symmetric_stable<R: Rng + ?Sized>(alpha: f64, rng: &mut R) -> f64 {
    let v = FRAC_PI_2 * (2.0 * rng.random::<f64>() - 1.0);
    let w: f64 = Exp1.sample(rng);
    if alpha == 1.0 {
        return v.tan();
    }
    (alpha * v).sin() / v.cos().powf(1.0 / alpha) * (((1.0 - alpha) * v).cos() / w).powf((1.0 - alpha) / alpha)
}

/// Probability that the symmetric α-stable process started at `|x| > 1`
/// never enters `(-1, 1)`.
pub fn stable_no_return_prob(alpha: f64, x: f64) -> f64 {
    let x = x.abs();
    if x <= 1.0 {
        return 0.0;
    }
    if x.is_infinite() {
        return 1.0;
    }
    let a2 = 0.5 * alpha;
    let pref = gamma(1.0 - a2) / (gamma(a2) * gamma(1.0 - alpha));
    (pref * incomplete_beta_integral(a2, 1.0 - alpha, (x - 1.0) / (x + 1.0))).clamp(0.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn no_return_limits() {
        assert_eq!(stable_no_return_prob(0.5, 1.0), 0.0);
        assert_eq!(stable_no_return_prob(0.5, 0.3), 0.0);
        assert!((stable_no_return_prob(0.5, 1e12) - 1.0).abs() < 1e-3);
        let mut last = 0.0;
        for x in [1.01, 1.5, 2.0, 3.0, 5.0, 10.0, 100.0] {
            let p = stable_no_return_prob(0.5, x);
            assert!(p > last && p < 1.0);
            last = p;
        }
        let p3 = stable_no_return_prob(0.5, 3.0);
        assert!(p3 > 0.0 && p3 < 1.0);
    }

    #[test]
    fn no_return_matches_direct_quadrature() {
        // u^{-3/4}(1-u)^{-1/2} on [0, 1/2] without the substitution, after
        // subtracting the singular part analytically
        let alpha = 0.5;
        let upper = 0.5;
        let smooth = crate::special::integrate(|u: f64| u.powf(-0.75) * ((1.0 - u).powf(-0.5) - 1.0), 0.0, upper, 1e-12);
        let integral = smooth + upper.powf(0.25) / 0.25;
        let pref = statrs::function::gamma::gamma(0.75)
            / (statrs::function::gamma::gamma(0.25) * statrs::function::gamma::gamma(0.5));
        assert!((stable_no_return_prob(alpha, 3.0) - pref * integral).abs() < 1e-6);
    }

    #[test]
    fn cauchy_case_is_tangent() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let n = 20_000;
        let mut below = 0;
        for _ in 0..n {
            if sample_symmetric_stable(1.0, &mut rng) < 1.0 {
                below += 1;
            }
        }
        // P(Cauchy < 1) = 3/4
        let p = below as f64 / n as f64;
        assert!((p - 0.75).abs() < 4.0 * (0.75f64 * 0.25 / n as f64).sqrt());
    }
}
