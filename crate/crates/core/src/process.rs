use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Strictly positive rate `a(x)` of an additive functional `A_t = ∫ a(X_s) ds`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum RateFunction {
    /// `a(x) = value`
    Constant { value: f64 },
    /// `a(x) = exp(scale · x)`
    Exp { scale: f64 },
    /// `a(x) = offset + arctan(slope · x)`
    Arctan { offset: f64, slope: f64 },
}

impl RateFunction {
    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            RateFunction::Constant { value } => value,
            RateFunction::Exp { scale } => (scale * x).exp(),
            RateFunction::Arctan { offset, slope } => offset + (slope * x).atan(),
        }
    }

    /// Lower and upper bounds of `a` on `[lo, hi]` (every variant is monotone).
    pub fn bounds_on(&self, lo: f64, hi: f64) -> (f64, f64) {
        let (u, v) = (self.eval(lo), self.eval(hi));
        (u.min(v), u.max(v))
    }

    /// Global bounds `c1 ≤ a ≤ c2` (may be `0` / `∞` for the exponential).
    pub fn global_bounds(&self) -> (f64, f64) {
        match *self {
            RateFunction::Constant { value } => (value, value),
            RateFunction::Exp { scale } if scale == 0.0 => (1.0, 1.0),
            RateFunction::Exp { .. } => (0.0, f64::INFINITY),
            RateFunction::Arctan { offset, slope } if slope == 0.0 => (offset, offset),
            RateFunction::Arctan { offset, .. } => (
                offset - std::f64::consts::FRAC_PI_2,
                offset + std::f64::consts::FRAC_PI_2,
            ),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            RateFunction::Constant { value } if !(value > 0.0 && value.is_finite()) => {
                Err(invalid(format!("constant rate must be positive, got {value}")))
            }
            RateFunction::Arctan { offset, slope } if slope != 0.0 && offset <= std::f64::consts::FRAC_PI_2 => {
                Err(invalid(format!(
                    "offset + arctan(slope x) needs offset > π/2 to stay positive, got {offset}"
                )))
            }
            RateFunction::Arctan { offset, .. } if offset <= 0.0 => {
                Err(invalid(format!("rate must be positive, got offset {offset}")))
            }
            _ => Ok(()),
        }
    }
}

/// Descriptor of the Markov model whose Root barrier is computed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ProcessSpec {
    /// Continuous-time random walk on ℤ: jumps at rate `lambda`,
    /// `+1` with probability `p`, `-1` with `q = 1 - p`.
    CtmcRandomWalk { p: f64, lambda: f64 },
    /// Brownian motion on the line with the compensated kernel `-|x - y|`.
    BmLine,
    /// Brownian motion killed on leaving `(a, b)`.
    BmInterval { a: f64, b: f64 },
    /// Symmetric α-stable Lévy process, `E exp(iθX_t) = exp(-t|θ|^α)`.
    Stable { alpha: f64 },
    /// `base` run on the clock of the additive functional `∫ rate(X_s) ds`.
    TimeChanged { base: Box<ProcessSpec>, rate: RateFunction },
}

impl ProcessSpec {
    pub fn ctmc(p: f64, lambda: f64) -> Result<Self> {
        let s = ProcessSpec::CtmcRandomWalk { p, lambda };
        s.validate()?;
        Ok(s)
    }

    pub fn stable(alpha: f64) -> Result<Self> {
        let s = ProcessSpec::Stable { alpha };
        s.validate()?;
        Ok(s)
    }

    pub fn bm_interval(a: f64, b: f64) -> Result<Self> {
        let s = ProcessSpec::BmInterval { a, b };
        s.validate()?;
        Ok(s)
    }

    pub fn time_changed(base: ProcessSpec, rate: RateFunction) -> Result<Self> {
        let s = ProcessSpec::TimeChanged { base: Box::new(base), rate };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            ProcessSpec::CtmcRandomWalk { p, lambda } => {
                if !(*p > 0.5 && *p <= 1.0) {
                    return Err(invalid(format!(
                        "random walk needs 1/2 < p ≤ 1 for transience, got p = {p}"
                    )));
                }
                if !(*lambda > 0.0 && lambda.is_finite()) {
                    return Err(invalid(format!("jump rate must be positive, got {lambda}")));
                }
                Ok(())
            }
            ProcessSpec::BmLine => Ok(()),
            ProcessSpec::BmInterval { a, b } => {
                if !(a < b) {
                    return Err(invalid(format!("interval needs a < b, got ({a}, {b})")));
                }
                Ok(())
            }
            ProcessSpec::Stable { alpha } => {
                if !(*alpha > 0.0 && *alpha < 1.0) {
                    return Err(invalid(format!("stable index must lie in (0,1), got {alpha}")));
                }
                Ok(())
            }
            ProcessSpec::TimeChanged { base, rate } => {
                if matches!(**base, ProcessSpec::TimeChanged { .. }) {
                    return Err(invalid("time change must wrap a plain process"));
                }
                base.validate()?;
                rate.validate()
            }
        }
    }

    /// The underlying process with any time change stripped.
    pub fn base(&self) -> &ProcessSpec {
        match self {
            ProcessSpec::TimeChanged { base, .. } => base,
            other => other,
        }
    }

    pub fn rate(&self) -> Option<&RateFunction> {
        match self {
            ProcessSpec::TimeChanged { rate, .. } => Some(rate),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ProcessSpec::CtmcRandomWalk { .. } => "ctmc-random-walk",
            ProcessSpec::BmLine => "bm-line",
            ProcessSpec::BmInterval { .. } => "bm-interval",
            ProcessSpec::Stable { .. } => "stable",
            ProcessSpec::TimeChanged { .. } => "time-changed",
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parameter_ranges() {
        assert!(ProcessSpec::ctmc(2.0 / 3.0, 1.0).is_ok());
        assert!(ProcessSpec::ctmc(0.4, 1.0).is_err());
        assert!(ProcessSpec::ctmc(0.7, 0.0).is_err());
        assert!(ProcessSpec::stable(0.5).is_ok());
        assert!(ProcessSpec::stable(1.2).is_err());
        assert!(ProcessSpec::bm_interval(1.0, -1.0).is_err());
    }

    #[test]
    fn nested_time_change_is_rejected() {
        let rate = RateFunction::Constant { value: 1.0 };
        let tc = ProcessSpec::time_changed(ProcessSpec::BmLine, rate.clone()).unwrap();
        assert!(ProcessSpec::time_changed(tc, rate).is_err());
    }

    #[test]
    fn arctan_rate_bounds() {
        let a = RateFunction::Arctan { offset: 2.0, slope: 4.0 };
        a.validate().unwrap();
        let (c1, c2) = a.global_bounds();
        assert!(c1 > 0.4 && c2 < 3.6);
        assert!(RateFunction::Arctan { offset: 1.0, slope: 4.0 }.validate().is_err());
    }

    #[test]
    fn serde_tagging() {
        let s = ProcessSpec::time_changed(
            ProcessSpec::Stable { alpha: 0.5 },
            RateFunction::Arctan { offset: 2.0, slope: 4.0 },
        )
        .unwrap();
        let js = serde_json::to_string(&s).unwrap();
        let back: ProcessSpec = serde_json::from_str(&js).unwrap();
        assert_eq!(back, s);
    }
}
