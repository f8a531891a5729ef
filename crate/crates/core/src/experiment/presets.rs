use serde::{Deserialize, Serialize};

use super::config::{
    Bm2dConfig, Bm2dTarget, DpConfig, ExperimentConfig, GridConfig, MeasureSpec, OutputConfig, CONFIG_SCHEMA,
};
use crate::error::{Error, Result};
use crate::pathsim::{Clock, SimOptions, StablePolicy};
use crate::process::{ProcessSpec, RateFunction};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PresetInfo {
    pub name: &'static str,
    pub description: &'static str,
}

const PRESETS: [PresetInfo; 6] = [
    PresetInfo { name: "fig1-ctmc", description: "random walk p = 2/3, λ = 1: δ₀ → ¼δ₂ + ¾δ₄" },
    PresetInfo { name: "fig7-bm", description: "Brownian motion: δ₀ → Uniform[-1, 1]" },
    PresetInfo { name: "fig7-bm-tc", description: "Brownian motion on the clock ∫exp(2B): δ₀ → Uniform[-1, 1]" },
    PresetInfo { name: "fig4-stable", description: "1/2-stable: Uniform[-1, 1] → 0.75·Beta(2, 2)" },
    PresetInfo {
        name: "fig8-stable-tc",
        description: "1/2-stable on the clock ∫(2 + arctan(4X)): Uniform[-1, 1] → 0.75·Beta(2, 2)",
    },
    PresetInfo { name: "bm2d-demo", description: "2-d Brownian motion killed on the unit disc: δ₀ → time-changed law" },
];

pub fn list_presets() -> Vec<PresetInfo> {
    PRESETS.to_vec()
}

fn sim(n_paths: usize, dt: f64, t_max: f64, clock: Clock) -> SimOptions {
    SimOptions { n_paths, dt, t_max, seed: 20_240_601, clock, stable_policy: StablePolicy::Simulate }
}

fn one_dim(
    name: &str,
    description: &str,
    process: ProcessSpec,
    mu: MeasureSpec,
    nu: MeasureSpec,
    grid: GridConfig,
    dp: DpConfig,
    simulation: SimOptions,
    outputs: OutputConfig,
) -> ExperimentConfig {
    ExperimentConfig {
        schema: CONFIG_SCHEMA.into(),
        name: name.into(),
        description: description.into(),
        process: Some(process),
        mu: Some(mu),
        nu: Some(nu),
        grid: Some(grid),
        dp: Some(dp),
        bm2d: None,
        simulation,
        outputs,
    }
}

fn dp(dt_log2: i32, horizon: f64) -> DpConfig {
    let dt = 2f64.powi(-dt_log2);
    DpConfig { dt, n_steps: (horizon / dt).round() as usize, tol_contact: None, radius: None, balayage_tol: 1e-10 }
}

fn thinned(t: usize, x: usize) -> OutputConfig {
    OutputConfig { surface_t_stride: t, surface_x_stride: x, ..OutputConfig::default() }
}

fn stable_case(name: &str, description: &str, process: ProcessSpec, clock: Clock) -> ExperimentConfig {
    one_dim(
        name,
        description,
        process,
        MeasureSpec::Uniform { a: -1.0, b: 1.0, n_points: 201 },
        MeasureSpec::Beta { a: 2.0, b: 2.0, mass: 0.75, n_points: 201 },
        GridConfig { x_min: -10.0, x_max: 10.0, n_points: None, dx: Some(0.01) },
        dp(8, 16.0),
        sim(10_000, 2f64.powi(-10), 60.0, clock),
        thinned(16, 5),
    )
}

fn bm_case(name: &str, description: &str, process: ProcessSpec, clock: Clock) -> ExperimentConfig {
    one_dim(
        name,
        description,
        process,
        MeasureSpec::Atoms { atoms: vec![[0.0, 1.0]] },
        MeasureSpec::Uniform { a: -1.0, b: 1.0, n_points: 201 },
        GridConfig { x_min: -3.0, x_max: 3.0, n_points: None, dx: Some(0.01) },
        dp(10, 2.0),
        sim(10_000, 2f64.powi(-12), 20.0, clock),
        thinned(8, 2),
    )
}

/// The named experiment setups.
pub fn preset(name: &str) -> Result<ExperimentConfig> {
    let d = |n: &str| PRESETS.iter().find(|p| p.name == n).map(|p| p.description).unwrap_or_default();
    let cfg = match name {
        "fig1-ctmc" => one_dim(
            name,
            d(name),
            ProcessSpec::CtmcRandomWalk { p: 2.0 / 3.0, lambda: 1.0 },
            MeasureSpec::Atoms { atoms: vec![[0.0, 1.0]] },
            MeasureSpec::Atoms { atoms: vec![[2.0, 0.25], [4.0, 0.75]] },
            GridConfig { x_min: -12.0, x_max: 4.0, n_points: Some(17), dx: None },
            dp(10, 16.0),
            sim(100_000, 1.0, 1000.0, Clock::Physical),
            thinned(64, 1),
        ),
        "fig7-bm" => bm_case(name, d(name), ProcessSpec::BmLine, Clock::Physical),
        "fig7-bm-tc" => bm_case(
            name,
            d(name),
            ProcessSpec::TimeChanged { base: Box::new(ProcessSpec::BmLine), rate: RateFunction::Exp { scale: 2.0 } },
            Clock::Additive,
        ),
        "fig4-stable" => stable_case(name, d(name), ProcessSpec::Stable { alpha: 0.5 }, Clock::Physical),
        "fig8-stable-tc" => stable_case(
            name,
            d(name),
            ProcessSpec::TimeChanged {
                base: Box::new(ProcessSpec::Stable { alpha: 0.5 }),
                rate: RateFunction::Arctan { offset: 2.0, slope: 4.0 },
            },
            Clock::Additive,
        ),
        "bm2d-demo" => ExperimentConfig {
            schema: CONFIG_SCHEMA.into(),
            name: name.into(),
            description: d(name).into(),
            process: None,
            mu: None,
            nu: None,
            grid: None,
            dp: None,
            bm2d: Some(Bm2dConfig {
                n_per_side: 81,
                target: Bm2dTarget::TimeChange { t: 0.1 },
                dt: 2f64.powi(-12),
                n_steps: 1 << 12,
                tol_contact: None,
                snapshot_every: 1 << 9,
            }),
            simulation: sim(4_000, 2f64.powi(-14), 2.0, Clock::Physical),
            outputs: OutputConfig::default(),
        },
        other => {
            let names: Vec<&str> = PRESETS.iter().map(|p| p.name).collect();
            return Err(Error::Config(format!("unknown preset \"{other}\"; available: {}", names.join(", "))));
        }
    };
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn six_presets_all_valid() {
        let list = list_presets();
        assert_eq!(list.len(), 6);
        for p in list {
            let cfg = preset(p.name).unwrap();
            cfg.validate().unwrap_or_else(|e| panic!("{}: {e}", p.name));
            assert_eq!(cfg.name, p.name);
            let back = ExperimentConfig::from_toml(&cfg.to_toml().unwrap()).unwrap();
            assert_eq!(back, cfg);
        }
        assert!(preset("fig2").is_err());
    }

    #[test]
    fn transience_is_enforced() {
        let mut cfg = preset("fig1-ctmc").unwrap();
        cfg.process = Some(ProcessSpec::CtmcRandomWalk { p: 0.4, lambda: 1.0 });
        let e = cfg.validate().unwrap_err();
        assert!(e.to_string().contains("p = 0.4"), "{e}");
    }

    #[test]
    fn mixed_sections_are_rejected() {
        let mut cfg = preset("bm2d-demo").unwrap();
        cfg.process = Some(ProcessSpec::BmLine);
        assert!(cfg.validate().is_err());
        let mut cfg = preset("fig7-bm").unwrap();
        cfg.simulation.clock = Clock::Additive;
        assert!(cfg.validate().is_err());
        let mut cfg = preset("fig7-bm").unwrap();
        cfg.grid = Some(GridConfig { x_min: -0.5, x_max: 0.5, n_points: Some(11), dx: None });
        assert!(cfg.validate().is_err());
    }
}
