//! One-step actions of the dual semigroup `P̂_dt` on grid functions.

use std::fmt;
use std::sync::Arc;

use crate::error::{invalid, Error, Result};
use crate::grid::{GridFn, GridSpec1D};
use crate::potential::MeasurePotential;
use crate::process::{ProcessSpec, RateFunction};

pub mod brownian;
pub mod ctmc;
pub mod fraclap;
pub mod timechange;

pub use brownian::bm1d_dual_step;
pub use ctmc::ctmc_dual_step;
pub use fraclap::{frac_laplacian_apply, FracLaplacian, DEFAULT_RADIUS};
pub use timechange::timechange_dual_step;

/// Values taken by a grid function at points off the grid.
#[derive(Clone)]
pub enum Extension {
    Zero,
    Constant(f64),
    /// The potential function of the initial law, frozen in time.
    Potential(Arc<MeasurePotential>),
    Func {
        f: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
        /// Average value far away, used for the analytic tail of non-local operators.
        at_infinity: f64,
    },
}

impl fmt::Debug for Extension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Extension::Zero => write!(f, "Zero"),
            Extension::Constant(c) => write!(f, "Constant({c})"),
            Extension::Potential(p) => write!(f, "Potential({})", p.spec().name()),
            Extension::Func { at_infinity, .. } => write!(f, "Func(at_infinity = {at_infinity})"),
        }
    }
}

impl Extension {
    pub fn func(f: impl Fn(f64) -> f64 + Send + Sync + 'static, at_infinity: f64) -> Self {
        Extension::Func { f: Arc::new(f), at_infinity }
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Extension::Zero => 0.0,
            Extension::Constant(c) => *c,
            Extension::Potential(p) => p.eval(x),
            Extension::Func { f, .. } => f(x),
        }
    }

    /// `∫_R^∞ [ext(y+z) + ext(y-z)] z^{-1-α} dz` to leading order in `1/R`.
    pub(crate) fn tail_integral(&self, alpha: f64, radius: f64) -> f64 {
        match self {
            Extension::Potential(p) => match *p.spec() {
                // ext(y) ~ m C₁ |y|^{α-1}
                ProcessSpec::Stable { alpha: a } => {
                    let m = p.measure().total_mass;
                    2.0 * m * crate::potential::stable_c1(a) * radius.powf(a - alpha - 1.0) / (alpha + 1.0 - a)
                }
                _ => 0.0,
            },
            other => 2.0 * other.at_infinity() * radius.powf(-alpha) / alpha,
        }
    }

    pub fn at_infinity(&self) -> f64 {
        match self {
            Extension::Zero | Extension::Potential(_) => 0.0,
            Extension::Constant(c) => *c,
            Extension::Func { at_infinity, .. } => *at_infinity,
        }
    }
}

/// How the step treats neighbours that fall off the grid.
#[derive(Debug, Clone)]
pub enum BoundaryPolicy {
    /// Off-grid values are held at the extension (the initial potential in the DP).
    FreezeToInitial(Extension),
    AbsorbToZero,
}

impl BoundaryPolicy {
    pub fn extension(&self) -> Extension {
        match self {
            BoundaryPolicy::FreezeToInitial(e) => e.clone(),
            BoundaryPolicy::AbsorbToZero => Extension::Zero,
        }
    }
}

#[derive(Debug, Clone)]
enum Kind {
    Ctmc(ctmc::CtmcStep),
    Gauss(brownian::GaussStep),
    Stable(fraclap::StableStep),
}

/// Explicit one-step map `f ↦ P̂_dt f` on a fixed grid.
#[derive(Debug, Clone)]
pub struct StepOperator {
    spec: ProcessSpec,
    grid: GridSpec1D,
    dt: f64,
    policy: BoundaryPolicy,
    kind: Kind,
}

impl StepOperator {
    pub fn new(spec: &ProcessSpec, grid: GridSpec1D, dt: f64, policy: BoundaryPolicy) -> Result<Self> {
        Self::with_radius(spec, grid, dt, policy, DEFAULT_RADIUS)
    }

    /// As [`StepOperator::new`], with an explicit integration radius for the
    /// non-local stable generator.
    pub fn with_radius(
        spec: &ProcessSpec,
        grid: GridSpec1D,
        dt: f64,
        policy: BoundaryPolicy,
        radius: f64,
    ) -> Result<Self> {
        spec.validate()?;
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(invalid(format!("time step must be positive, got {dt}")));
        }
        let rates = match spec.rate() {
            Some(a) => Some(rates_on_grid(a, &grid)?),
            None => None,
        };
        let ext = policy.extension();
        let kind = match *spec.base() {
            ProcessSpec::CtmcRandomWalk { p, lambda } => {
                Kind::Ctmc(ctmc::CtmcStep::new(p, lambda, &grid, dt, &ext, rates.as_deref())?)
            }
            ProcessSpec::BmLine => Kind::Gauss(brownian::GaussStep::new(&grid, dt, &ext, None, rates.as_deref())),
            ProcessSpec::BmInterval { a, b } => {
                Kind::Gauss(brownian::GaussStep::new(&grid, dt, &ext, Some((a, b)), rates.as_deref()))
            }
            ProcessSpec::Stable { alpha } => {
                Kind::Stable(fraclap::StableStep::new(alpha, &grid, dt, &ext, radius, rates)?)
            }
            ProcessSpec::TimeChanged { .. } => unreachable!("base() strips the time change"),
        };
        Ok(Self { spec: spec.clone(), grid, dt, policy, kind })
    }

    pub fn spec(&self) -> &ProcessSpec {
        &self.spec
    }

    pub fn grid(&self) -> &GridSpec1D {
        &self.grid
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn policy(&self) -> &BoundaryPolicy {
        &self.policy
    }

    /// Applies one step, writing into `out` (same length as the grid).
    pub fn apply(&self, f: &[f64], out: &mut [f64]) {
        debug_assert_eq!(f.len(), self.grid.n_points);
        match &self.kind {
            Kind::Ctmc(s) => s.apply(f, out),
            Kind::Gauss(s) => s.apply(f, out),
            Kind::Stable(s) => s.apply(f, out),
        }
    }

    pub fn step(&self, f: &GridFn) -> Result<GridFn> {
        self.grid.ensure_same(&f.grid)?;
        let mut out = vec![0.0; f.values.len()];
        self.apply(&f.values, &mut out);
        Ok(GridFn { grid: self.grid, values: out })
    }

    /// Discrete generator of the (untime-changed) base process, `L_h f`.
    pub fn base_generator(&self, f: &[f64], out: &mut [f64]) {
        match &self.kind {
            Kind::Ctmc(s) => s.generator(f, out),
            Kind::Gauss(s) => s.generator(f, out),
            Kind::Stable(s) => s.generator(f, out),
        }
    }
}

fn rates_on_grid(a: &RateFunction, grid: &GridSpec1D) -> Result<Vec<f64>> {
    a.validate()?;
    let vals: Vec<f64> = grid.points().into_iter().map(|x| a.eval(x)).collect();
    if let Some((j, v)) = vals.iter().enumerate().find(|(_, v)| !(**v > 0.0 && v.is_finite())) {
        return Err(Error::OutsideDomain { x: grid.x_at(j), lo: *v, hi: f64::INFINITY });
    }
    Ok(vals)
}

/// Values of the extension on the padded lattice `x_{-pad} .. x_{n-1+pad}`;
/// entries that fall on the grid itself are left at zero.
pub(crate) fn padded_extension(grid: &GridSpec1D, ext: &Extension, pad: usize) -> Vec<f64> {
    let n = grid.n_points;
    let mut v = vec![0.0; n + 2 * pad];
    for (i, slot) in v.iter_mut().enumerate() {
        let j = i as isize - pad as isize;
        if j < 0 || j >= n as isize {
            *slot = ext.eval(grid.x(j));
        }
    }
    v
}
