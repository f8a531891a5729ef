use proptest::prelude::*;

use rootsep::error::Error;
use rootsep::experiment::{build_barrier, preset, MeasureSpec};
use rootsep::pathsim::simulate_hits;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn ctmc_targets_either_refused_or_embedded(a in 1i64..4, gap in 1i64..4, w in 0.05f64..0.95) {
        let mut cfg = preset("fig1-ctmc").unwrap();
        let b = (a + gap).min(4);
        prop_assume!(b > a);
        cfg.nu = Some(MeasureSpec::Atoms { atoms: vec![[a as f64, w], [b as f64, 1.0 - w]] });
        let dp = cfg.dp.as_mut().unwrap();
        dp.dt = 2f64.powi(-6);
        dp.n_steps = 1024;
        match build_barrier(&cfg) {
            Err(Error::Balayage { .. }) => {}
            Err(e) => panic!("{e}"),
            Ok((_, _, _, obstacle, surface, tol, barrier)) => {
                let inv = rootsep::reduite::check_invariants(&surface, &obstacle, tol);
                prop_assert!(inv.passes(0.0), "{inv:?}");
                for j in 0..barrier.grid.len() {
                    let (x, e) = (barrier.grid.x(j as isize), barrier.entry_time[j]);
                    if e > 0.0 && e.is_finite() {
                        prop_assert!(x == a as f64 || x == b as f64, "late contact at {x}");
                    }
                }
            }
        }
    }

    #[test]
    fn brownian_symmetric_pairs_stop_on_the_atoms(k in 20usize..150) {
        let a = k as f64 * 0.01;
        let mut cfg = preset("fig7-bm").unwrap();
        cfg.nu = Some(MeasureSpec::Atoms { atoms: vec![[-a, 0.5], [a, 0.5]] });
        cfg.dp.as_mut().unwrap().n_steps = 1024;
        cfg.simulation.n_paths = 200;
        let (spec, mu, _, obstacle, surface, tol, barrier) = build_barrier(&cfg).unwrap();
        let inv = rootsep::reduite::check_invariants(&surface, &obstacle, tol);
        prop_assert!(inv.passes(1e-10), "{inv:?}");
        // inside (−a, a) the gap to νÛ only decays exponentially, so contact there
        // is a tolerance effect and never immediate
        for j in 0..barrier.grid.len() {
            if barrier.grid.x(j as isize).abs() < a - 1e-9 {
                prop_assert!(barrier.entry_time[j] > 0.0);
            }
        }
        let hits = simulate_hits(&spec, &mu, &barrier, &cfg.simulation).unwrap();
        prop_assert!(hits.iter().all(|h| h.hit.hit));
        for h in &hits {
            prop_assert!(barrier.entry_at(h.hit.x_hit).is_finite());
            prop_assert!(h.hit.t_hit >= barrier.entry_at(h.hit.x_hit));
        }
        // optional stopping keeps the stopped mean at 0; |x_hit| ≤ a + overshoot
        let n = hits.len() as f64;
        let mean = hits.iter().map(|h| h.hit.x_hit).sum::<f64>() / n;
        prop_assert!(mean.abs() < 4.0 * (a + 0.05) / n.sqrt(), "{mean}");
    }
}
