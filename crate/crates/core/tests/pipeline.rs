//! End-to-end checks of the potential → réduite → barrier → simulation chain.

use rootsep::experiment::{build_barrier, preset, run_one_dim, ExperimentConfig};
use rootsep::measure::Measure;
use rootsep::pathsim::{path_rng, sample_path_with, stable_no_return_prob};
use rootsep::potential::MeasurePotential;
use rootsep::process::ProcessSpec;
use rootsep::reduite::grid_refinement_check;

fn load(name: &str) -> ExperimentConfig {
    preset(name).unwrap()
}

fn with_dp(mut cfg: ExperimentConfig, dt: f64, horizon: f64) -> ExperimentConfig {
    let dp = cfg.dp.as_mut().unwrap();
    dp.dt = dt;
    dp.n_steps = (horizon / dt).round() as usize;
    cfg
}

#[test]
fn ctmc_barrier_lives_on_the_target_support() {
    let (_, _, _, _, _, _, b) = build_barrier(&load("fig1-ctmc")).unwrap();
    let finite: Vec<f64> = b.finite_nodes();
    assert_eq!(finite, vec![2.0, 4.0]);
    // the right edge of the target support is in contact from the start
    assert_eq!(b.entry_at(4.0), 0.0);
    assert!(b.entry_at(2.0) > 0.0 && b.entry_at(2.0).is_finite());
}

#[test]
fn stable_barrier_only_inside_support() {
    let (_, _, _, _, _, _, b) = build_barrier(&with_dp(load("fig4-stable"), 2f64.powi(-8), 4.0)).unwrap();
    let finite = b.finite_nodes();
    assert!(finite.len() > 150, "{}", finite.len());
    assert!(finite.iter().all(|x| x.abs() <= 1.0 + 1e-12), "{finite:?}");
}

#[test]
fn stable_refinement_gap() {
    let base = load("fig4-stable");
    let (.., s8, _, _) = build_barrier(&with_dp(base.clone(), 2f64.powi(-8), 2.0)).unwrap();
    let (.., s9, _, _) = build_barrier(&with_dp(base, 2f64.powi(-9), 2.0)).unwrap();
    let gap = grid_refinement_check(&s8, &s9).unwrap();
    assert!(gap < 5e-3, "{gap}");
}

#[test]
fn stable_surface_settles() {
    // doubling the horizon barely moves the surface on the target support
    let (_, _, _, obstacle, s, _, _) = build_barrier(&with_dp(load("fig4-stable"), 2f64.powi(-8), 32.0)).unwrap();
    let grid = *obstacle.grid();
    let (mid, end) = (s.at_time(16.0), s.at_time(32.0));
    let scale = obstacle.nu().sup_norm();
    let mut drift = 0.0f64;
    for j in 0..grid.len() {
        if grid.x(j as isize).abs() <= 1.0 {
            drift = drift.max(mid[j] - end[j]);
            assert!(end[j] >= obstacle.nu().values[j]);
        }
    }
    eprintln!("drift {drift:.3e} scale {scale:.3e}");
    assert!(drift < 1e-3 * scale, "{drift}");
}

#[test]
fn ctmc_mean_time_matches_potential_gap() {
    // E[T] = Σ_y (μÛ − νÛ)(y) / λ: expected occupation removed by stopping
    let cfg = load("fig1-ctmc");
    let spec = cfg.process.clone().unwrap();
    let (mu, nu) = (Measure::dirac(0.0), Measure::atoms(&[(2.0, 0.25), (4.0, 0.75)]).unwrap());
    let (mu_u, nu_u) = (MeasurePotential::new(&spec, &mu).unwrap(), MeasurePotential::new(&spec, &nu).unwrap());
    let expected: f64 = (-400..=4).map(|y| mu_u.eval(y as f64) - nu_u.eval(y as f64)).sum();
    for dt in [2f64.powi(-9), 2f64.powi(-10)] {
        let mut c = with_dp(cfg.clone(), dt, 16.0);
        c.simulation.n_paths = 20_000;
        let run = run_one_dim(&c).unwrap();
        let rel = (run.stats.mean_hit_time - expected).abs() / expected;
        assert!(rel < 0.05, "dt {dt}: E[T] {} vs {expected}", run.stats.mean_hit_time);
    }
}

#[test]
fn no_return_probability_matches_long_paths() {
    let spec = ProcessSpec::stable(0.5).unwrap();
    let p = stable_no_return_prob(0.5, 3.0);
    let n = 2000;
    let mut escaped = 0usize;
    for i in 0..n {
        let mut rng = path_rng(11, i);
        let path = sample_path_with(&spec, 3.0, 2f64.powi(-6), 200.0, &mut rng).unwrap();
        if path.states.iter().all(|x| x.abs() >= 1.0) {
            escaped += 1;
        }
    }
    let freq = escaped as f64 / n as f64;
    eprintln!("p(3) = {p:.4}, Monte Carlo {freq:.4}");
    assert!(p > 0.0 && p < 1.0);
    assert!((freq - p).abs() < 0.03, "{freq} vs {p}");
}

#[test]
fn grid_mismatch_is_reported() {
    let base = load("fig1-ctmc");
    let (.., a, _, _) = build_barrier(&with_dp(base.clone(), 0.25, 2.0)).unwrap();
    let mut other = base;
    let g = other.grid.as_mut().unwrap();
    g.x_min = -10.0;
    g.n_points = None;
    g.dx = Some(1.0);
    let (.., b, _, _) = build_barrier(&with_dp(other, 0.125, 2.0)).unwrap();
    assert!(grid_refinement_check(&a, &b).is_err());
}
