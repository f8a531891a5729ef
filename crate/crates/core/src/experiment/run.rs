use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::sync::Arc;
use std::time::Instant;

use serde::Serialize;
use serde_json::json;

use super::config::{Bm2dTarget, ExperimentConfig};
use crate::barrier::{extract_barrier, validate_barrier, Barrier, BarrierReport};
use crate::bm2d::{self, DiscGrid, Dp2dResult, Hit2d, Stats2d};
use crate::error::Result;
use crate::generators::{BoundaryPolicy, Extension, StepOperator, DEFAULT_RADIUS};
use crate::measure::Measure;
use crate::pathsim::{
    accumulate_additive, path_rng, sample_path_with, simulate_hits, summarise, AtomFrequency, EmpiricalStats,
    PathOutcome, QuantileRow,
};
use crate::potential::{fmt_value, potential_of_measure, MeasurePotential};
use crate::process::ProcessSpec;
use crate::reduite::{check_invariants, dp_reduite, InvariantReport, Obstacle, ValueSurface};

pub const STATS_SCHEMA: &str = "rootsep.stats.v1";

/// Everything a 1-d run produces.
#[derive(Debug, Clone)]
pub struct OneDimRun {
    pub spec: ProcessSpec,
    pub mu: Measure,
    pub nu: Measure,
    pub obstacle: Obstacle,
    pub surface: ValueSurface,
    pub tol_contact: f64,
    pub barrier: Barrier,
    pub invariants: InvariantReport,
    pub barrier_report: BarrierReport,
    pub outcomes: Vec<PathOutcome>,
    pub stats: EmpiricalStats,
}

#[derive(Debug, Clone)]
pub struct Bm2dRun {
    pub grid: DiscGrid,
    pub mu_potential: Vec<f64>,
    pub nu_potential: Vec<f64>,
    pub nu_density: Vec<f64>,
    pub tol_contact: f64,
    pub dp: Dp2dResult,
    pub hits: Vec<Hit2d>,
    pub stats: Stats2d,
}

#[derive(Debug, Clone)]
pub enum RunOutput {
    OneDim(Box<OneDimRun>),
    Bm2d(Box<Bm2dRun>),
}

/// Potentials, obstacle, DP surface and barrier of a 1-d config (no simulation).
pub fn build_barrier(cfg: &ExperimentConfig) -> Result<(ProcessSpec, Measure, Measure, Obstacle, ValueSurface, f64, Barrier)> {
    cfg.validate()?;
    let d = cfg.one_dim()?;
    let (mu, nu) = (d.mu.build()?, d.nu.build()?);
    let base = d.process.base();
    let obstacle = Obstacle::new(
        potential_of_measure(base, &mu, &d.grid)?,
        potential_of_measure(base, &nu, &d.grid)?,
        d.dp.balayage_tol,
    )?;
    let policy = match base {
        ProcessSpec::BmInterval { .. } => BoundaryPolicy::AbsorbToZero,
        _ => BoundaryPolicy::FreezeToInitial(Extension::Potential(Arc::new(MeasurePotential::new(base, &mu)?))),
    };
    let step = StepOperator::with_radius(d.process, d.grid, d.dp.dt, policy, d.dp.radius.unwrap_or(DEFAULT_RADIUS))?;
    let surface = dp_reduite(&obstacle, &step, d.dp.n_steps)?;
    let tol = d.dp.tol_contact.unwrap_or_else(|| obstacle.default_tol());
    let barrier = extract_barrier(&surface, &obstacle.target, tol)?;
    Ok((d.process.clone(), mu, nu, obstacle, surface, tol, barrier))
}

pub fn run_one_dim(cfg: &ExperimentConfig) -> Result<OneDimRun> {
    let (spec, mu, nu, obstacle, surface, tol, barrier) = build_barrier(cfg)?;
    let invariants = check_invariants(&surface, &obstacle, tol);
    let barrier_report = validate_barrier(&barrier, &cfg.nu.as_ref().expect("validated").support_intervals());
    if barrier_report.truncation_fraction > 0.0 {
        log::warn!(
            "{:.1}% of the target support has no contact within the horizon {}",
            100.0 * barrier_report.truncation_fraction,
            surface.horizon()
        );
    }
    let outcomes = simulate_hits(&spec, &mu, &barrier, &cfg.simulation)?;
    let stats = summarise(&spec, &outcomes, &nu)?;
    Ok(OneDimRun { spec, mu, nu, obstacle, surface, tol_contact: tol, barrier, invariants, barrier_report, outcomes, stats })
}

pub fn run_bm2d(cfg: &ExperimentConfig) -> Result<Bm2dRun> {
    cfg.validate()?;
    let b = cfg.bm2d.as_ref().expect("validated");
    let grid = DiscGrid::new(b.n_per_side)?;
    let nu_density = match b.target {
        Bm2dTarget::TimeChange { t } => bm2d::time_changed_marginal(&grid, bm2d::exp_sum_rate, t)?,
        Bm2dTarget::Gaussian => bm2d::gaussian_target(&grid),
    };
    let mu_potential = bm2d::discrete_potential(&grid, &bm2d::point_mass(&grid))?;
    let nu_potential = bm2d::discrete_potential(&grid, &nu_density)?;
    let scale = nu_potential.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let tol = b.tol_contact.unwrap_or(crate::reduite::CONTACT_REL_TOL * scale);
    let dp = bm2d::dp_barrier_2d(&grid, &mu_potential, &nu_potential, b.dt, b.n_steps, tol, b.snapshot_every)?;
    let s = &cfg.simulation;
    let hits = bm2d::simulate_2d(&grid, &dp.entry_time, s.dt, s.t_max, s.n_paths, s.seed)?;
    let stats = bm2d::summarise_2d(&grid, &hits, &nu_density)?;
    Ok(Bm2dRun { grid, mu_potential, nu_potential, nu_density, tol_contact: tol, dp, hits, stats })
}

pub fn run_pipeline(cfg: &ExperimentConfig) -> Result<RunOutput> {
    if cfg.is_bm2d() {
        Ok(RunOutput::Bm2d(Box::new(run_bm2d(cfg)?)))
    } else {
        Ok(RunOutput::OneDim(Box::new(run_one_dim(cfg)?)))
    }
}

#[derive(Debug, Clone, Serialize)]
struct SimSummary<'a> {
    n_paths: usize,
    n_hit: usize,
    hit_fraction: f64,
    mean_hit_time: f64,
    mean_additive_hit: Option<f64>,
    ks_stat: f64,
    ks_critical_1pct: f64,
    n_absorbed: usize,
    truncation_bound: Option<f64>,
    atom_frequencies: &'a [AtomFrequency],
    quantile_table: &'a [QuantileRow],
}

/// Machine-readable summary written to `stats.json`.
pub fn stats_json(cfg: &ExperimentConfig, out: &RunOutput) -> serde_json::Value {
    match out {
        RunOutput::OneDim(r) => {
            let s = &r.stats;
            json!({
                "schema": STATS_SCHEMA,
                "name": cfg.name,
                "process": r.spec,
                "balayage": r.obstacle.balayage,
                "capped_nodes": r.obstacle.capped.len(),
                "dp": {
                    "dt": r.surface.dt,
                    "n_steps": r.surface.n_steps,
                    "horizon": r.surface.horizon(),
                    "tol_contact": r.tol_contact,
                    "clamp_max": r.surface.clamp_max,
                },
                "invariants": r.invariants,
                "barrier": {
                    "report": r.barrier_report,
                    "finite_nodes": r.barrier.finite_nodes().len(),
                    "min_entry": r.barrier.min_entry(),
                },
                "simulation": SimSummary {
                    n_paths: s.n_paths,
                    n_hit: s.n_hit,
                    hit_fraction: s.hit_fraction,
                    mean_hit_time: s.mean_hit_time,
                    mean_additive_hit: s.mean_additive_hit,
                    ks_stat: s.ks_stat,
                    ks_critical_1pct: s.ks_critical_1pct,
                    n_absorbed: s.n_absorbed,
                    truncation_bound: s.truncation_bound,
                    atom_frequencies: &s.atom_frequencies,
                    quantile_table: &s.quantile_table,
                },
            })
        }
        RunOutput::Bm2d(r) => {
            let (margin, at) = bm2d::balayage_margin(&r.grid, &r.mu_potential, &r.nu_potential);
            json!({
                "schema": STATS_SCHEMA,
                "name": cfg.name,
                "process": "bm-disc-2d",
                "balayage": { "ok": true, "min_margin": margin, "argmin": at },
                "dp": {
                    "dt": r.dp.dt,
                    "n_steps": r.dp.n_steps,
                    "tol_contact": r.tol_contact,
                    "clamp_max": r.dp.clamp_max,
                },
                "invariants": r.dp.invariants,
                "barrier": {
                    "finite_nodes": r.dp.entry_time.iter().filter(|t| t.is_finite()).count(),
                },
                "simulation": r.stats,
            })
        }
    }
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(dir.join(name))?))
}

/// Writes every artifact of a run into `dir`.
pub fn write_outputs(cfg: &ExperimentConfig, out: &RunOutput, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    match out {
        RunOutput::OneDim(r) => {
            let mut w = create(dir, "potentials.csv")?;
            writeln!(w, "x,mu_potential,nu_potential")?;
            let (mu_u, nu_u) = (&r.obstacle.initial, &r.obstacle.target);
            for j in 0..mu_u.grid.n_points {
                writeln!(w, "{},{},{}", mu_u.grid.x(j as isize), fmt_value(mu_u.values[j]), fmt_value(nu_u.values[j]))?;
            }
            w.flush()?;
            r.mu.write_csv(create(dir, "mu.csv")?)?;
            r.nu.write_csv(create(dir, "nu.csv")?)?;
            let mut w = create(dir, "surface.csv")?;
            r.surface.write_csv(&mut w, cfg.outputs.surface_t_stride, cfg.outputs.surface_x_stride)?;
            w.flush()?;
            if cfg.outputs.surface_binary {
                r.surface.write_binary(&dir.join("surface.bin"), &dir.join("surface.json"))?;
            }
            let mut w = create(dir, "barrier.csv")?;
            r.barrier.write_csv(&mut w)?;
            w.flush()?;
            std::fs::write(dir.join("barrier.json"), r.barrier.to_json()?)?;
            let mut w = create(dir, "samples.csv")?;
            writeln!(w, "path,x0,hit,t_hit,x_hit,a_hit")?;
            for (i, o) in r.outcomes.iter().enumerate() {
                let h = &o.hit;
                if h.hit {
                    let a = h.a_hit.map(|a| a.to_string()).unwrap_or_default();
                    writeln!(w, "{i},{},1,{},{},{a}", o.x0, h.t_hit, h.x_hit)?;
                } else {
                    writeln!(w, "{i},{},0,,,", o.x0)?;
                }
            }
            w.flush()?;
            if cfg.outputs.trace_paths > 0 {
                write_traces(cfg, r, dir)?;
            }
        }
        RunOutput::Bm2d(r) => {
            let g = &r.grid;
            let active: Vec<usize> = (0..g.len()).filter(|&k| g.is_inside(k)).collect();
            let mut w = create(dir, "potentials2d.csv")?;
            writeln!(w, "x1,x2,mu_potential,nu_potential,nu_density")?;
            for &k in &active {
                let [x1, x2] = g.coord(k);
                writeln!(w, "{x1},{x2},{},{},{}", r.mu_potential[k], r.nu_potential[k], r.nu_density[k])?;
            }
            w.flush()?;
            let mut w = create(dir, "barrier2d.csv")?;
            writeln!(w, "x1,x2,entry_time")?;
            for &k in &active {
                let [x1, x2] = g.coord(k);
                writeln!(w, "{x1},{x2},{}", fmt_value(r.dp.entry_time[k]))?;
            }
            w.flush()?;
            let mut w = create(dir, "surface2d.csv")?;
            writeln!(w, "t,x1,x2,value")?;
            for (t, f) in &r.dp.snapshots {
                for &k in &active {
                    let [x1, x2] = g.coord(k);
                    writeln!(w, "{t},{x1},{x2},{}", f[k])?;
                }
            }
            w.flush()?;
            let mut w = create(dir, "samples.csv")?;
            writeln!(w, "path,hit,t_hit,x1,x2")?;
            for (i, h) in r.hits.iter().enumerate() {
                if h.hit {
                    writeln!(w, "{i},1,{},{},{}", h.t, h.x[0], h.x[1])?;
                } else {
                    writeln!(w, "{i},0,,{},{}", h.x[0], h.x[1])?;
                }
            }
            w.flush()?;
        }
    }
    std::fs::write(dir.join("stats.json"), serde_json::to_string_pretty(&stats_json(cfg, out))? + "\n")?;
    Ok(())
}

/// Re-simulates the first paths from their per-path streams and dumps them.
fn write_traces(cfg: &ExperimentConfig, r: &OneDimRun, dir: &Path) -> Result<()> {
    let s = &cfg.simulation;
    let mut w = create(dir, "traces.csv")?;
    writeln!(w, "path,t,x,a")?;
    for i in 0..cfg.outputs.trace_paths.min(s.n_paths) {
        let mut rng = path_rng(s.seed, i);
        let x0 = r.mu.sample(&mut rng);
        let mut p = sample_path_with(r.spec.base(), x0, s.dt, s.t_max, &mut rng)?;
        if let Some(rate) = r.spec.rate() {
            p = accumulate_additive(p, rate)?;
        }
        let stop = r.outcomes[i].hit.t_hit;
        for k in 0..p.len() {
            let a = p.additive.as_ref().map(|a| a[k].to_string()).unwrap_or_default();
            writeln!(w, "{i},{},{},{a}", p.times[k], p.states[k])?;
            if p.times[k] >= stop {
                break;
            }
        }
    }
    w.flush()?;
    Ok(())
}

/// Outcome of [`run_experiment`]: exit code plus the stats summary.
#[derive(Debug, Clone, Serialize)]
pub struct ExitReport {
    pub name: String,
    pub exit_code: i32,
    pub error: Option<String>,
    pub summary: Option<serde_json::Value>,
    pub elapsed_secs: f64,
}

/// Runs a config end to end and writes its artifacts to `out_dir`
/// (default: the config's output directory). Balayage failures exit with 2,
/// stability violations with 3.
pub fn run_experiment(cfg: &ExperimentConfig, out_dir: Option<&Path>) -> ExitReport {
    let start = Instant::now();
    let dir = out_dir.map(Path::to_path_buf).unwrap_or_else(|| cfg.output_dir());
    let result = run_pipeline(cfg).and_then(|out| {
        write_outputs(cfg, &out, &dir)?;
        Ok(stats_json(cfg, &out))
    });
    let elapsed_secs = start.elapsed().as_secs_f64();
    match result {
        Ok(summary) => ExitReport { name: cfg.name.clone(), exit_code: 0, error: None, summary: Some(summary), elapsed_secs },
        Err(e) => {
            ExitReport { name: cfg.name.clone(), exit_code: e.exit_code(), error: Some(e.to_string()), summary: None, elapsed_secs }
        }
    }
}
