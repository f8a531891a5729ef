use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, StandardNormal};

use super::stable::sample_symmetric_stable;
use crate::error::{invalid, Error, Result};
use crate::process::{ProcessSpec, RateFunction};

/// A sampled trajectory. For the random walk the points are the jump times
/// (plus `t = 0` and the horizon) and the path is constant in between.
#[derive(Debug, Clone, PartialEq)]
pub struct PathSample {
    pub times: Vec<f64>,
    pub states: Vec<f64>,
    pub additive: Option<Vec<f64>>,
}

impl PathSample {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

/// Incremental generator of `(t_i, X_{t_i})`, shared by [`sample_path`] and the
/// streaming Monte Carlo loop so both see identical paths for a given RNG.
pub(crate) struct PathGen {
    kind: Kind,
    dt: f64,
    t_max: f64,
    n_steps: u64,
    i: u64,
    t: f64,
    x: f64,
    done: bool,
}

enum Kind {
    Ctmc { p: f64, wait: Exp<f64> },
    Gauss { sd: f64, killed_outside: Option<(f64, f64)> },
    Stable { alpha: f64, scale: f64 },
}

impl PathGen {
    pub(crate) fn new(spec: &ProcessSpec, x0: f64, dt: f64, t_max: f64) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) || !(t_max > 0.0 && t_max.is_finite()) {
            return Err(invalid(format!("need dt > 0 and t_max > 0, got dt = {dt}, t_max = {t_max}")));
        }
        let kind = match *spec {
            ProcessSpec::CtmcRandomWalk { p, lambda } => {
                if x0.fract() != 0.0 {
                    return Err(invalid(format!("random walk must start on ℤ, got {x0}")));
                }
                Kind::Ctmc { p, wait: Exp::new(lambda).map_err(|e| invalid(e.to_string()))? }
            }
            ProcessSpec::BmLine => Kind::Gauss { sd: dt.sqrt(), killed_outside: None },
            ProcessSpec::BmInterval { a, b } => Kind::Gauss { sd: dt.sqrt(), killed_outside: Some((a, b)) },
            ProcessSpec::Stable { alpha } => Kind::Stable { alpha, scale: dt.powf(1.0 / alpha) },
            ProcessSpec::TimeChanged { .. } => {
                return Err(Error::Unsupported(
                    "sample the base process and attach the additive functional".into(),
                ))
            }
        };
        Ok(Self {
            kind,
            dt,
            t_max,
            n_steps: (t_max / dt + 1e-9).floor() as u64,
            i: 0,
            t: 0.0,
            x: x0,
            done: false,
        })
    }

    /// Next sample point; the first call returns `(0, x0)`.
    pub(crate) fn next<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Option<(f64, f64)> {
        if self.done {
            return None;
        }
        if self.i == 0 {
            self.i = 1;
            if let Kind::Gauss { killed_outside: Some((a, b)), .. } = self.kind {
                self.done = self.x <= a || self.x >= b;
            }
            return Some((0.0, self.x));
        }
        match &mut self.kind {
            Kind::Ctmc { p, wait } => {
                let t = self.t + wait.sample(rng);
                if t >= self.t_max {
                    self.done = true;
                    // close the last holding interval at the horizon
                    return (self.t < self.t_max).then_some((self.t_max, self.x));
                }
                self.t = t;
                self.x += if rng.random::<f64>() < *p { 1.0 } else { -1.0 };
            }
            Kind::Gauss { sd, killed_outside } => {
                if self.i > self.n_steps {
                    self.done = true;
                    return None;
                }
                let z: f64 = StandardNormal.sample(rng);
                self.x += *sd * z;
                self.t = self.i as f64 * self.dt;
                if let Some((a, b)) = *killed_outside {
                    self.done = self.x <= a || self.x >= b;
                }
            }
            Kind::Stable { alpha, scale } => {
                if self.i > self.n_steps {
                    self.done = true;
                    return None;
                }
                self.x += *scale * sample_symmetric_stable(*alpha, rng);
                self.t = self.i as f64 * self.dt;
            }
        }
        self.i += 1;
        Some((self.t, self.x))
    }
}

/// Left-endpoint Riemann sum of `∫ a(X_s) ds` along a path.
#[derive(Debug, Clone)]
pub(crate) struct AdditiveClock<'a> {
    rate: &'a RateFunction,
    value: f64,
    last: Option<(f64, f64)>,
}

impl<'a> AdditiveClock<'a> {
    pub(crate) fn new(rate: &'a RateFunction) -> Self {
        Self { rate, value: 0.0, last: None }
    }

    /// Clock value at the new point `(t, x)`.
    pub(crate) fn advance(&mut self, t: f64, x: f64) -> Result<f64> {
        if let Some((s, y)) = self.last {
            let a = self.rate.eval(y);
            if !(a > 0.0) {
                return Err(Error::OutsideDomain { x: y, lo: f64::NAN, hi: f64::NAN });
            }
            self.value = match *self.rate {
                // exact, so that a ≡ c gives A_t = c·t
                RateFunction::Constant { value } => value * t,
                _ => self.value + a * (t - s),
            };
        }
        self.last = Some((t, x));
        Ok(self.value)
    }
}

/// Trajectory of `spec` (a time change is ignored; see [`accumulate_additive`])
/// started at `x0` on `[0, t_max]`, deterministic in `seed`.
pub fn sample_path(spec: &ProcessSpec, x0: f64, dt: f64, t_max: f64, seed: u64) -> Result<PathSample> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sample_path_with(spec.base(), x0, dt, t_max, &mut rng)
}

pub fn sample_path_with<R: Rng + ?Sized>(
    spec: &ProcessSpec,
    x0: f64,
    dt: f64,
    t_max: f64,
    rng: &mut R,
) -> Result<PathSample> {
    let mut g = PathGen::new(spec, x0, dt, t_max)?;
    let (mut times, mut states) = (Vec::new(), Vec::new());
    while let Some((t, x)) = g.next(rng) {
        times.push(t);
        states.push(x);
    }
    Ok(PathSample { times, states, additive: None })
}

/// Fills `path.additive` with `A_{t_i} = Σ a(X_{t_{j}}) (t_{j+1} − t_j)`.
pub fn accumulate_additive(mut path: PathSample, a: &RateFunction) -> Result<PathSample> {
    let mut clock = AdditiveClock::new(a);
    let mut acc = Vec::with_capacity(path.len());
    for (t, x) in path.times.iter().zip(&path.states) {
        acc.push(clock.advance(*t, *x)?);
    }
    path.additive = Some(acc);
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ctmc_waits_are_exponential() {
        let spec = ProcessSpec::ctmc(2.0 / 3.0, 1.0).unwrap();
        let path = sample_path(&spec, 0.0, 1.0, 100_000.0, 11).unwrap();
        let n = path.len() - 2;
        let mean = path.times[n] / n as f64;
        // Exp(1): σ = 1
        assert!((mean - 1.0).abs() < 3.0 / (n as f64).sqrt(), "n={n} mean={mean}");
        assert!(path.times.windows(2).all(|w| w[0] < w[1]));
        let ups = path.states.windows(2).take(n).filter(|w| w[1] > w[0]).count() as f64 / n as f64;
        assert!((ups - 2.0 / 3.0).abs() < 3.0 * (2.0f64 / 9.0 / n as f64).sqrt());
        assert_eq!(*path.times.last().unwrap(), 100_000.0);
    }

    #[test]
    fn brownian_terminal_variance() {
        let (n, t_max) = (20_000, 2.0);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut s2 = 0.0;
        for _ in 0..n {
            let p = sample_path_with(&ProcessSpec::BmLine, 0.0, 0.125, t_max, &mut rng).unwrap();
            assert_eq!(p.len(), 17);
            s2 += p.states[16].powi(2);
        }
        let var = s2 / n as f64;
        // Var(X²) = 2 t², so the standard error of the mean square is t √(2/n)
        assert!((var - t_max).abs() < 3.0 * t_max * (2.0 / n as f64).sqrt(), "{var}");
    }

    #[test]
    fn interval_paths_stop_on_exit() {
        let spec = ProcessSpec::bm_interval(-0.5, 0.5).unwrap();
        let p = sample_path(&spec, 0.0, 0.01, 50.0, 1).unwrap();
        let last = *p.states.last().unwrap();
        assert!(last.abs() >= 0.5);
        assert!(p.states[..p.len() - 1].iter().all(|x| x.abs() < 0.5));
    }

    #[test]
    fn determinism() {
        let spec = ProcessSpec::stable(0.5).unwrap();
        assert_eq!(sample_path(&spec, 0.2, 0.01, 3.0, 9).unwrap(), sample_path(&spec, 0.2, 0.01, 3.0, 9).unwrap());
        assert_ne!(sample_path(&spec, 0.2, 0.01, 3.0, 9).unwrap(), sample_path(&spec, 0.2, 0.01, 3.0, 10).unwrap());
        assert!(sample_path(&spec, 0.0, 0.0, 1.0, 0).is_err());
    }

    #[test]
    fn additive_constant_rates() {
        let spec = ProcessSpec::ctmc(0.7, 2.0).unwrap();
        let p = sample_path(&spec, 0.0, 1.0, 10.0, 4).unwrap();
        let one = accumulate_additive(p.clone(), &RateFunction::Constant { value: 1.0 }).unwrap();
        assert_eq!(one.additive.as_ref().unwrap(), &one.times);
        let two = accumulate_additive(p, &RateFunction::Constant { value: 2.0 }).unwrap();
        for (a, t) in two.additive.unwrap().iter().zip(&two.times) {
            assert_eq!(*a, 2.0 * t);
        }
    }

    #[test]
    fn additive_riemann_sum_converges() {
        // the same Brownian path at dt and dt/2 via Brownian bridge refinement
        let rate = RateFunction::Exp { scale: 2.0 };
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let fine = sample_path_with(&ProcessSpec::BmLine, 0.0, 2f64.powi(-14), 1.0, &mut rng).unwrap();
        let coarsen = |k: usize| PathSample {
            times: fine.times.iter().step_by(k).copied().collect(),
            states: fine.states.iter().step_by(k).copied().collect(),
            additive: None,
        };
        let end = |p: PathSample| *accumulate_additive(p, &rate).unwrap().additive.unwrap().last().unwrap();
        let reference = end(coarsen(1));
        let errs: Vec<f64> = [64, 32, 16].iter().map(|&k| (end(coarsen(k)) - reference).abs()).collect();
        assert!(errs[2] < errs[0], "{errs:?}");
        assert!(errs[0] < 0.1 * reference.max(1.0), "{errs:?}");
        let neg = RateFunction::Constant { value: -1.0 };
        assert!(accumulate_additive(fine, &neg).is_err());
    }

    #[test]
    fn time_changed_spec_samples_its_base() {
        let spec = ProcessSpec::time_changed(ProcessSpec::BmLine, RateFunction::Exp { scale: 2.0 }).unwrap();
        assert_eq!(sample_path(&spec, 0.0, 0.1, 1.0, 2).unwrap(), sample_path(&ProcessSpec::BmLine, 0.0, 0.1, 1.0, 2).unwrap());
    }
}
