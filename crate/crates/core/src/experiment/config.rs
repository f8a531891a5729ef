use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::GridSpec1D;
use crate::measure::Measure;
use crate::pathsim::{Clock, SimOptions, StablePolicy};
use crate::process::ProcessSpec;

pub const CONFIG_SCHEMA: &str = "rootsep.config.v1";

fn cfg_err(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

/// Measure descriptor: atoms or a named density.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum MeasureSpec {
    /// `[[location, weight], ...]`
    Atoms { atoms: Vec<[f64; 2]> },
    /// Uniform density on `[a, b]`.
    Uniform {
        a: f64,
        b: f64,
        #[serde(default = "default_density_points")]
        n_points: usize,
    },
    /// `mass · Beta(a, b)` moved to `[-1, 1]`.
    Beta {
        a: f64,
        b: f64,
        #[serde(default = "one")]
        mass: f64,
        #[serde(default = "default_density_points")]
        n_points: usize,
    },
}

fn default_density_points() -> usize {
    201
}

fn one() -> f64 {
    1.0
}

impl MeasureSpec {
    pub fn build(&self) -> Result<Measure> {
        match self {
            MeasureSpec::Atoms { atoms } => {
                Measure::atoms(&atoms.iter().map(|p| (p[0], p[1])).collect::<Vec<_>>())
            }
            MeasureSpec::Uniform { a, b, n_points } => Measure::uniform(*a, *b, *n_points),
            MeasureSpec::Beta { a, b, mass, n_points } => Measure::beta(*a, *b, *mass, *n_points),
        }
    }

    /// Closed intervals carrying the measure.
    pub fn support_intervals(&self) -> Vec<(f64, f64)> {
        match self {
            MeasureSpec::Atoms { atoms } => atoms.iter().map(|p| (p[0], p[0])).collect(),
            MeasureSpec::Uniform { a, b, .. } => vec![(*a, *b)],
            MeasureSpec::Beta { .. } => vec![(-1.0, 1.0)],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub x_min: f64,
    pub x_max: f64,
    /// Either the number of nodes or the spacing.
    pub n_points: Option<usize>,
    pub dx: Option<f64>,
}

impl GridConfig {
    pub fn build(&self) -> Result<GridSpec1D> {
        match (self.n_points, self.dx) {
            (Some(n), None) => GridSpec1D::new(self.x_min, self.x_max, n),
            (None, Some(dx)) => GridSpec1D::with_spacing(self.x_min, self.x_max, dx),
            _ => Err(cfg_err("[grid] needs exactly one of n_points or dx")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DpConfig {
    pub dt: f64,
    pub n_steps: usize,
    /// Absolute contact tolerance; default `1e-8 · max|νÛ|`.
    pub tol_contact: Option<f64>,
    /// Integration radius of the fractional Laplacian.
    pub radius: Option<f64>,
    /// Allowed negative balayage margin.
    #[serde(default = "default_balayage_tol")]
    pub balayage_tol: f64,
}

fn default_balayage_tol() -> f64 {
    1e-10
}

/// Target of the 2-d demo.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Bm2dTarget {
    /// Law at time `t` of Brownian motion run on the clock `∫ exp(x₁+x₂)`.
    TimeChange { t: f64 },
    /// The rotated, shifted Gaussian density restricted to the disc.
    Gaussian,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Bm2dConfig {
    /// Odd number of nodes per side of `[-1, 1]²`.
    pub n_per_side: usize,
    pub target: Bm2dTarget,
    pub dt: f64,
    pub n_steps: usize,
    pub tol_contact: Option<f64>,
    #[serde(default = "default_snapshot_every")]
    pub snapshot_every: usize,
}

fn default_snapshot_every() -> usize {
    256
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: Option<PathBuf>,
    #[serde(default = "one_usize")]
    pub surface_t_stride: usize,
    #[serde(default = "one_usize")]
    pub surface_x_stride: usize,
    #[serde(default = "yes")]
    pub surface_binary: bool,
    /// Number of per-path traces to dump (debugging aid).
    #[serde(default)]
    pub trace_paths: usize,
}

fn one_usize() -> usize {
    1
}

fn yes() -> bool {
    true
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { dir: None, surface_t_stride: 1, surface_x_stride: 1, surface_binary: true, trace_paths: 0 }
    }
}

/// A full experiment: either a 1-d model (`process`, `mu`, `nu`, `grid`, `dp`)
/// or the 2-d Brownian demo (`bm2d`), plus `simulation` and `outputs`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema: String,
    pub name: String,
    #[serde(default)]
    pub description: String,
    pub process: Option<ProcessSpec>,
    pub mu: Option<MeasureSpec>,
    pub nu: Option<MeasureSpec>,
    pub grid: Option<GridConfig>,
    pub dp: Option<DpConfig>,
    pub bm2d: Option<Bm2dConfig>,
    pub simulation: SimOptions,
    #[serde(default)]
    pub outputs: OutputConfig,
}

/// Validated pieces of a 1-d experiment.
#[derive(Debug, Clone)]
pub struct OneDim<'a> {
    pub process: &'a ProcessSpec,
    pub mu: &'a MeasureSpec,
    pub nu: &'a MeasureSpec,
    pub grid: GridSpec1D,
    pub dp: &'a DpConfig,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| cfg_err(e.to_string()))
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| cfg_err(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml(&text).map_err(|e| cfg_err(format!("{}: {e}", path.display())))
    }

    pub fn is_bm2d(&self) -> bool {
        self.bm2d.is_some()
    }

    pub fn one_dim(&self) -> Result<OneDim<'_>> {
        let need = |name: &str| cfg_err(format!("1-d experiment is missing the [{name}] section"));
        Ok(OneDim {
            process: self.process.as_ref().ok_or_else(|| need("process"))?,
            mu: self.mu.as_ref().ok_or_else(|| need("mu"))?,
            nu: self.nu.as_ref().ok_or_else(|| need("nu"))?,
            grid: self.grid.as_ref().ok_or_else(|| need("grid"))?.build()?,
            dp: self.dp.as_ref().ok_or_else(|| need("dp"))?,
        })
    }

    /// Checks every precondition that can be checked without running.
    pub fn validate(&self) -> Result<()> {
        if self.schema != CONFIG_SCHEMA {
            return Err(cfg_err(format!("schema must be \"{CONFIG_SCHEMA}\", got \"{}\"", self.schema)));
        }
        let sim = &self.simulation;
        if !(sim.dt > 0.0 && sim.t_max > 0.0) {
            return Err(cfg_err("[simulation] needs dt > 0 and t_max > 0"));
        }
        if let StablePolicy::Absorb { x_far } = sim.stable_policy {
            if !(x_far > 1.0) {
                return Err(cfg_err("stable_policy.x_far must exceed 1"));
            }
        }
        if let Some(b) = &self.bm2d {
            if self.process.is_some() || self.mu.is_some() || self.nu.is_some() || self.grid.is_some() || self.dp.is_some() {
                return Err(cfg_err("the [bm2d] demo takes no [process], [mu], [nu], [grid] or [dp] sections"));
            }
            crate::bm2d::DiscGrid::new(b.n_per_side)?;
            if !(b.dt > 0.0) || b.n_steps == 0 {
                return Err(cfg_err("[bm2d] needs dt > 0 and n_steps ≥ 1"));
            }
            if let Bm2dTarget::TimeChange { t } = b.target {
                if !(t > 0.0) {
                    return Err(cfg_err("[bm2d.target] needs t > 0"));
                }
            }
            return Ok(());
        }
        let d = self.one_dim()?;
        d.process.validate()?;
        let (mu, nu) = (d.mu.build()?, d.nu.build()?);
        if !(d.dp.dt > 0.0) || d.dp.n_steps == 0 {
            return Err(cfg_err("[dp] needs dt > 0 and n_steps ≥ 1"));
        }
        if let Some(t) = d.dp.tol_contact {
            if !(t > 0.0) {
                return Err(cfg_err("[dp] tol_contact must be positive"));
            }
        }
        for (name, m) in [("mu", &mu), ("nu", &nu)] {
            let (lo, hi) = m.support();
            if lo < d.grid.x_min || hi > d.grid.x_max {
                return Err(cfg_err(format!(
                    "support [{lo}, {hi}] of {name} is not inside the grid [{}, {}]",
                    d.grid.x_min, d.grid.x_max
                )));
            }
        }
        match d.process.base() {
            ProcessSpec::CtmcRandomWalk { p, lambda } => {
                if (d.grid.dx() - 1.0).abs() > 1e-12 || d.grid.x_min.fract() != 0.0 {
                    return Err(cfg_err("random walk needs an integer grid with unit spacing"));
                }
                if lambda * d.dp.dt >= 1.0 {
                    return Err(Error::Stability(format!("λ·dt = {} must be < 1", lambda * d.dp.dt)));
                }
                let _ = p;
            }
            ProcessSpec::BmInterval { a, b } => {
                for m in [&mu, &nu] {
                    let (lo, hi) = m.support();
                    if lo <= *a || hi >= *b {
                        return Err(cfg_err(format!("measures must live inside the interval ({a}, {b})")));
                    }
                }
            }
            _ => {}
        }
        if sim.clock == Clock::Additive && d.process.rate().is_none() {
            return Err(cfg_err("clock = \"additive\" needs a time-changed process"));
        }
        Ok(())
    }

    pub fn output_dir(&self) -> PathBuf {
        self.outputs.dir.clone().unwrap_or_else(|| PathBuf::from("out").join(&self.name))
    }
}

/// Parses and validates a config file.
pub fn validate_config(path: &Path) -> Result<ExperimentConfig> {
    let cfg = ExperimentConfig::load(path)?;
    cfg.validate()?;
    Ok(cfg)
}
