use crate::error::{Error, Result};
use crate::grid::GridFn;
use crate::process::RateFunction;

/// Euler step `f + dt · L f / a` for the time-changed generator `a⁻¹ L`.
///
/// `generator` writes `L_h f` of the base process into its second argument.
pub fn timechange_dual_step(
    f: &GridFn,
    generator: impl Fn(&[f64], &mut [f64]),
    a: &RateFunction,
    dt: f64,
) -> Result<GridFn> {
    let rates: Vec<f64> = f.grid.points().into_iter().map(|x| a.eval(x)).collect();
    if let Some((j, v)) = rates.iter().enumerate().find(|(_, v)| !(**v > 0.0)) {
        return Err(Error::OutsideDomain { x: f.grid.x(j as isize), lo: *v, hi: f64::INFINITY });
    }
    let mut lf = vec![0.0; f.values.len()];
    generator(&f.values, &mut lf);
    let values = f.values.iter().zip(&lf).zip(&rates).map(|((v, l), a)| v + dt * (l / a)).collect();
    Ok(GridFn { grid: f.grid, values })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{BoundaryPolicy, Extension, StepOperator};
    use crate::grid::GridSpec1D;
    use crate::measure::Measure;
    use crate::potential::MeasurePotential;
    use crate::process::ProcessSpec;
    use std::sync::Arc;

    #[test]
    fn unit_rate_matches_base_step() {
        let s = ProcessSpec::ctmc(2.0 / 3.0, 1.0).unwrap();
        let g = GridSpec1D::integer(-10, 6).unwrap();
        let mu = MeasurePotential::new(&s, &Measure::dirac(0.0)).unwrap();
        let f = GridFn::from_fn(g, |y| mu.eval(y));
        let op = StepOperator::new(&s, g, 0.125, BoundaryPolicy::FreezeToInitial(Extension::Potential(Arc::new(mu))))
            .unwrap();
        let one = RateFunction::Constant { value: 1.0 };
        let tc = timechange_dual_step(&f, |x, o| op.base_generator(x, o), &one, 0.125).unwrap();
        let base = op.step(&f).unwrap();
        for (a, b) in tc.values.iter().zip(&base.values) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn constants_are_fixed_and_rate_must_be_positive() {
        let g = GridSpec1D::new(-2.0, 2.0, 81).unwrap();
        let s = ProcessSpec::stable(0.5).unwrap();
        let op = StepOperator::new(&s, g, 0.01, BoundaryPolicy::FreezeToInitial(Extension::Constant(0.7))).unwrap();
        let a = RateFunction::Arctan { offset: 2.0, slope: 4.0 };
        let f = GridFn::constant(g, 0.7);
        let out = timechange_dual_step(&f, |x, o| op.base_generator(x, o), &a, 0.01).unwrap();
        assert!(out.values.iter().all(|v| (v - 0.7).abs() < 1e-12));
        let bad = RateFunction::Arctan { offset: 0.5, slope: 4.0 };
        assert!(timechange_dual_step(&f, |x, o| op.base_generator(x, o), &bad, 0.01).is_err());
    }

    #[test]
    fn arctan_rate_keeps_potential_excessive() {
        let s = ProcessSpec::stable(0.5).unwrap();
        let g = GridSpec1D::new(-4.0, 4.0, 801).unwrap();
        let mu = MeasurePotential::new(&s, &Measure::uniform(-1.0, 1.0, 201).unwrap()).unwrap();
        let f = GridFn::from_fn(g, |y| mu.eval(y));
        let op = StepOperator::new(&s, g, 0.005, BoundaryPolicy::FreezeToInitial(Extension::Potential(Arc::new(mu))))
            .unwrap();
        let a = RateFunction::Arctan { offset: 2.0, slope: 4.0 };
        let out = timechange_dual_step(&f, |x, o| op.base_generator(x, o), &a, 0.005).unwrap();
        // up to the consistency error of the discrete generator off the support,
        // which is largest next to the density jump at ±1
        for (j, (v, w)) in out.values.iter().zip(&f.values).enumerate() {
            let x = g.x(j as isize);
            let tol = if (x.abs() - 1.0).abs() < 0.5 { 5e-3 * 0.005 } else { 3e-5 * 0.005 };
            assert!(*v <= *w + tol, "x={x}");
        }
    }
}
