use serde::{Deserialize, Serialize};

use super::path::PathSample;
use crate::barrier::Barrier;
use crate::error::{invalid, Result};

/// Which time coordinate is compared with the barrier's entry times.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Clock {
    #[default]
    Physical,
    Additive,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HittingResult {
    pub hit: bool,
    pub t_hit: f64,
    pub x_hit: f64,
    pub a_hit: Option<f64>,
}

impl HittingResult {
    pub const MISS: HittingResult = HittingResult { hit: false, t_hit: f64::NAN, x_hit: f64::NAN, a_hit: None };
}

/// Online barrier check over successive path points `(t_i, c_i, x_i)` where
/// `c_i` is the clock value. With `holding` the path is piecewise constant and
/// the barrier can also be entered while the state sits still.
pub(crate) struct HitScanner<'a> {
    barrier: &'a Barrier,
    holding: bool,
    additive: bool,
    prev: Option<(f64, f64, f64)>,
}

impl<'a> HitScanner<'a> {
    pub(crate) fn new(barrier: &'a Barrier, holding: bool, additive: bool) -> Self {
        Self { barrier, holding, additive, prev: None }
    }

    fn result(&self, t: f64, c: f64, x: f64) -> HittingResult {
        HittingResult { hit: true, t_hit: t, x_hit: x, a_hit: self.additive.then_some(c) }
    }

    pub(crate) fn push(&mut self, t: f64, c: f64, x: f64) -> Option<HittingResult> {
        if self.holding {
            if let Some((s, cs, y)) = self.prev {
                let r = self.barrier.entry_at(y);
                if r < c {
                    let ch = r.max(cs);
                    // the clock is affine in t on a holding interval
                    let th = if ch == cs { s } else { s + (ch - cs) / (c - cs) * (t - s) };
                    return Some(self.result(th, ch, y));
                }
            }
        }
        self.prev = Some((t, c, x));
        (c >= self.barrier.entry_at(x)).then(|| self.result(t, c, x))
    }
}

/// First `i ≥ 0` with `(clock_i, X_{t_i}) ∈ R`. Random-walk paths (`holding`)
/// are also checked along their holding intervals.
pub fn first_hitting(path: &PathSample, b: &Barrier, clock: Clock, holding: bool) -> Result<HittingResult> {
    let clocks = match clock {
        Clock::Physical => &path.times,
        Clock::Additive => path
            .additive
            .as_ref()
            .ok_or_else(|| invalid("additive clock requested but the path carries no additive functional"))?,
    };
    let mut scan = HitScanner::new(b, holding, clock == Clock::Additive);
    for i in 0..path.len() {
        if let Some(h) = scan.push(path.times[i], clocks[i], path.states[i]) {
            return Ok(h);
        }
    }
    Ok(HittingResult::MISS)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridSpec1D;
    use crate::pathsim::{accumulate_additive, sample_path};
    use crate::process::{ProcessSpec, RateFunction};

    fn barrier(entries: Vec<f64>) -> Barrier {
        let g = GridSpec1D::integer(-2, entries.len() as i64 - 3).unwrap();
        Barrier::new(g, entries, 1e-8, 10.0).unwrap()
    }

    fn fixture() -> PathSample {
        PathSample { times: vec![0.0, 0.4, 1.1, 3.0, 5.0], states: vec![0.0, 1.0, 2.0, 1.0, 0.0], additive: None }
    }

    #[test]
    fn trivial_barriers() {
        let p = fixture();
        let all = first_hitting(&p, &barrier(vec![0.0; 7]), Clock::Physical, true).unwrap();
        assert!(all.hit && all.t_hit == 0.0 && all.x_hit == 0.0);
        let none = first_hitting(&p, &barrier(vec![f64::INFINITY; 7]), Clock::Physical, true).unwrap();
        assert!(!none.hit);
    }

    #[test]
    fn hit_while_holding() {
        // entry at 2 after 1.7: the path sits at 2 on [1.1, 3.0)
        let mut e = vec![f64::INFINITY; 7];
        e[4] = 1.7;
        let h = first_hitting(&fixture(), &barrier(e.clone()), Clock::Physical, true).unwrap();
        assert_eq!((h.hit, h.t_hit, h.x_hit), (true, 1.7, 2.0));
        // sampled-only scanning sees the state 2 only at t = 1.1
        assert!(!first_hitting(&fixture(), &barrier(e), Clock::Physical, false).unwrap().hit);
    }

    #[test]
    fn entry_before_arrival_hits_on_arrival() {
        let mut e = vec![f64::INFINITY; 7];
        e[4] = 0.5;
        let h = first_hitting(&fixture(), &barrier(e), Clock::Physical, true).unwrap();
        assert_eq!((h.t_hit, h.x_hit), (1.1, 2.0));
    }

    #[test]
    fn additive_clock_on_holding_interval() {
        let mut e = vec![f64::INFINITY; 7];
        e[4] = 3.0;
        let p = accumulate_additive(fixture(), &RateFunction::Constant { value: 2.0 }).unwrap();
        let h = first_hitting(&p, &barrier(e), Clock::Additive, true).unwrap();
        assert_eq!((h.t_hit, h.a_hit), (1.5, Some(3.0)));
        assert!(first_hitting(&fixture(), &barrier(vec![0.0; 7]), Clock::Additive, true).is_err());
    }

    #[test]
    fn unit_rate_clock_matches_physical() {
        let spec = ProcessSpec::ctmc(2.0 / 3.0, 1.0).unwrap();
        let b = barrier(vec![f64::INFINITY, 9.0, 6.0, 3.0, 1.0, 0.7, 0.2]);
        for seed in 0..50 {
            let p = sample_path(&spec, 0.0, 1.0, 20.0, seed).unwrap();
            let p = accumulate_additive(p, &RateFunction::Constant { value: 1.0 }).unwrap();
            let a = first_hitting(&p, &b, Clock::Physical, true).unwrap();
            let c = first_hitting(&p, &b, Clock::Additive, true).unwrap();
            assert_eq!((a.hit, a.t_hit.to_bits(), a.x_hit.to_bits()), (c.hit, c.t_hit.to_bits(), c.x_hit.to_bits()));
            if a.hit {
                assert!(b.entry_at(a.x_hit).is_finite());
                assert!(crate::barrier::barrier_contains(&b, a.t_hit, a.x_hit));
            }
        }
    }
}
