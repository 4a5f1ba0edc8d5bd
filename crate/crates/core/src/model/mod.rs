//! The filtered model
//!
//! ```text
//! ∂_t w + ∇·(w ⊗ w)‾ʰ - νΔw + ∇q = f‾ʰ,   ∇·w = 0,
//! ```
//!
//! with `‾ʰ = A_h⁻¹`, advanced in Fourier space. The pressure is removed by
//! the Leray projection, so the evolution equation is
//! `∂_t w = -P A_h⁻¹ ∇·(w ⊗ w) + νΔw + P A_h⁻¹ f`.
//!
//! Time stepping integrates `νΔ` exactly through the factor
//! `E(k) = exp(-ν|k|²dt)` and treats the rest with a second-order
//! Adams–Bashforth step (IF-AB2), started by one integrating-factor Euler
//! step.

mod nonlinear;
mod params;

use std::sync::Arc;

use thiserror::Error;

use crate::pathspace::{Sample, Trajectory};
use crate::spectral::{
    apply_horizontal_filter, apply_horizontal_filter_inverse, leray_project, norms, SpectralError,
    SpectralVectorField,
};

pub use nonlinear::{convective_flux, nonlinear_term, stress_tensor, StressTensor};
pub(crate) use params::{lattice_ratio, LATTICE_TOL};
pub use params::{Dealias, SimParams};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("invalid forcing: {0}")]
    InvalidForcing(String),
    #[error("initial state is not admissible: {0}")]
    InvalidInitialState(String),
    #[error("blow-up detected at step {step} (t = {time})")]
    BlowUp { step: usize, time: f64 },
    #[error(transparent)]
    Spectral(#[from] SpectralError),
}

/// Relative divergence accepted for states and forcings.
pub const DIVERGENCE_TOL: f64 = 1e-12;

/// Time-independent body force `f`: divergence free, mean free and with no
/// energy on the vertical column `k1 = k2 = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct Forcing(SpectralVectorField);

impl Forcing {
    pub fn new(field: SpectralVectorField) -> Result<Self, ModelError> {
        field
            .check_reality()
            .map_err(|e| ModelError::InvalidForcing(e.to_string()))?;
        if field.relative_divergence() > DIVERGENCE_TOL {
            return Err(ModelError::InvalidForcing(format!(
                "not divergence free (relative residual {:.3e})",
                field.relative_divergence()
            )));
        }
        if let Some(m) = field
            .grid()
            .modes()
            .find(|m| m.is_horizontal_mean() && field.coeffs()[m.index].iter().any(|z| z.norm_sqr() > 0.0))
        {
            return Err(ModelError::Spectral(SpectralError::HorizontalMeanObstruction { k: m.k }));
        }
        Ok(Self(field))
    }

    pub fn zero(grid: crate::spectral::Grid) -> Self {
        Self(SpectralVectorField::zeros(grid))
    }

    pub fn field(&self) -> &SpectralVectorField {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.coeffs().iter().all(|c| c.iter().all(|z| z.norm_sqr() == 0.0))
    }
}

pub fn check_state(w: &SpectralVectorField, p: &SimParams) -> Result<(), ModelError> {
    if *w.grid() != p.grid() {
        return Err(ModelError::InvalidInitialState(format!(
            "state grid n = {} does not match parameters n = {}",
            w.grid().n(),
            p.n
        )));
    }
    w.check_reality()
        .map_err(|e| ModelError::InvalidInitialState(e.to_string()))?;
    if w.relative_divergence() > DIVERGENCE_TOL {
        return Err(ModelError::InvalidInitialState(format!(
            "not divergence free (relative residual {:.3e})",
            w.relative_divergence()
        )));
    }
    Ok(())
}

/// Full tendency `∂_t w = -P A_h⁻¹∇·(w⊗w) + νΔw + P A_h⁻¹ f`.
pub fn rhs(w: &SpectralVectorField, f: &Forcing, p: &SimParams) -> Result<SpectralVectorField, ModelError> {
    let nl = nonlinear_term(w, p);
    let forcing = leray_project(&apply_horizontal_filter_inverse(f.field(), p.alpha)?);
    let visc = w.scale_by_symbol(|m| -p.nu * m.k_sq());
    Ok(nl.add(&visc)?.add(&forcing)?)
}

/// IF-AB2 time stepper. Holds the previous explicit tendency.
#[derive(Debug, Clone)]
pub struct Integrator {
    params: SimParams,
    forcing_term: SpectralVectorField,
    decay: Vec<f64>,
    previous: Option<SpectralVectorField>,
    steps: usize,
}

impl Integrator {
    pub fn new(f: &Forcing, p: &SimParams) -> Result<Self, ModelError> {
        p.validate()?;
        let grid = p.grid();
        if *f.field().grid() != grid {
            return Err(ModelError::InvalidForcing("forcing grid does not match parameters".into()));
        }
        let forcing_term = leray_project(&apply_horizontal_filter_inverse(f.field(), p.alpha)?);
        let decay = grid.modes().map(|m| (-p.nu * m.k_sq() * p.dt).exp()).collect();
        Ok(Self {
            params: *p,
            forcing_term,
            decay,
            previous: None,
            steps: 0,
        })
    }

    pub fn steps_taken(&self) -> usize {
        self.steps
    }

    /// Advance `w` by one step of size `dt`.
    pub fn step(&mut self, w: &SpectralVectorField) -> Result<SpectralVectorField, ModelError> {
        let dt = self.params.dt;
        let explicit = nonlinear_term(w, &self.params).add(&self.forcing_term)?;
        let mut next = w.clone();
        {
            let out = next.coeffs_mut();
            let g = explicit.coeffs();
            match &self.previous {
                None => {
                    for (i, o) in out.iter_mut().enumerate() {
                        let e = self.decay[i];
                        for d in 0..3 {
                            o[d] = (o[d] + g[i][d] * dt) * e;
                        }
                    }
                }
                Some(prev) => {
                    let gp = prev.coeffs();
                    for (i, o) in out.iter_mut().enumerate() {
                        let e = self.decay[i];
                        for d in 0..3 {
                            o[d] = (o[d] + (g[i][d] * 1.5 - gp[i][d] * (0.5 * e)) * dt) * e;
                        }
                    }
                }
            }
        }
        self.steps += 1;
        if !next.is_finite() {
            return Err(ModelError::BlowUp {
                step: self.steps,
                time: self.steps as f64 * dt,
            });
        }
        self.previous = Some(explicit);
        Ok(next)
    }
}

/// One startup step (integrating-factor Euler) from `w`. Repeated stepping
/// should go through [`Integrator`], which carries the two-step history.
pub fn step(w: &SpectralVectorField, f: &Forcing, p: &SimParams) -> Result<SpectralVectorField, ModelError> {
    check_state(w, p)?;
    Integrator::new(f, p)?.step(w)
}

/// What a simulated trajectory keeps per sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Retention {
    /// Full states plus diagnostics.
    #[default]
    States,
    /// Norms and forcing work only.
    Diagnostics,
}

/// Integrate from `w0` over `[0, T]`, sampling every `sample_dt`.
pub fn simulate(w0: &SpectralVectorField, f: &Forcing, p: &SimParams) -> Result<Trajectory, ModelError> {
    simulate_with(w0, f, p, Retention::States)
}

pub fn simulate_with(
    w0: &SpectralVectorField,
    f: &Forcing,
    p: &SimParams,
    retention: Retention,
) -> Result<Trajectory, ModelError> {
    simulate_observed(w0, f, p, retention, |_, _| Ok::<(), ModelError>(()))
}

/// [`simulate_with`], calling `observe(j, w)` on every sample as it is
/// produced.
pub fn simulate_observed<E: From<ModelError>>(
    w0: &SpectralVectorField,
    f: &Forcing,
    p: &SimParams,
    retention: Retention,
    mut observe: impl FnMut(usize, &SpectralVectorField) -> Result<(), E>,
) -> Result<Trajectory, E> {
    p.validate()?;
    check_state(w0, p)?;
    let mut integrator = Integrator::new(f, p)?;
    let stride = p.stride();
    let count = p.sample_count();
    let record = |w: &SpectralVectorField| -> Result<Sample, ModelError> {
        Ok(Sample {
            norms: norms(w, p.alpha),
            forcing_work: f.field().inner(w)?,
            forcing_work_filtered: f.field().inner(&apply_horizontal_filter(w, p.alpha)?)?,
            state: match retention {
                Retention::States => Some(w.clone()),
                Retention::Diagnostics => None,
            },
        })
    };
    let mut samples = Vec::with_capacity(count);
    samples.push(record(w0)?);
    observe(0, w0)?;
    let mut w = w0.clone();
    for j in 1..count {
        for _ in 0..stride {
            w = integrator.step(&w)?;
        }
        samples.push(record(&w)?);
        observe(j, &w)?;
    }
    Ok(Trajectory::from_samples(*p, 0.0, Arc::new(samples), Some(f.clone())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{random_solenoidal, single_mode, taylor_green};
    use crate::spectral::Grid;

    fn params(n: usize) -> SimParams {
        SimParams {
            n,
            nu: 0.1,
            alpha: 1.0,
            dt: 1e-2,
            final_time: 0.1,
            sample_dt: 1e-2,
            ..SimParams::default()
        }
    }

    #[test]
    fn shear_layer_has_no_nonlinearity() {
        let p = params(8);
        let w = single_mode(p.grid(), [0, 0, 1], 1.0, [1.0, 0.0, 0.0]).unwrap();
        assert_eq!(nonlinear_term(&w, &p), SpectralVectorField::zeros(p.grid()));
    }

    #[test]
    fn taylor_green_nonlinearity_is_a_gradient() {
        for alpha in [0.0, 0.3] {
            let p = SimParams { alpha, ..params(16) };
            let w = taylor_green(p.grid());
            let nl = nonlinear_term(&w, &p);
            let scale = norms(&convective_flux(&w, &p), 0.0).l2;
            assert!(norms(&nl, 0.0).l2 < 1e-14 * scale.max(1.0));
        }
    }

    #[test]
    fn rhs_examples() {
        let p = params(8);
        let grid = p.grid();
        let z = SpectralVectorField::zeros(grid);
        assert_eq!(rhs(&z, &Forcing::zero(grid), &p).unwrap(), z);

        let f = Forcing::new(single_mode(grid, [1, 0, 0], 1.0, [0.0, 1.0, 0.0]).unwrap()).unwrap();
        let r = rhs(&z, &f, &p).unwrap();
        assert_eq!(r, f.field().scaled(0.5));

        let w = single_mode(grid, [0, 0, 1], 1.0, [1.0, 0.0, 0.0]).unwrap();
        let r = rhs(&w, &Forcing::zero(grid), &p).unwrap();
        assert!(r.relative_difference(&w.scaled(-0.1)) < 1e-15);
    }

    #[test]
    fn forcing_rejects_vertical_column() {
        let grid = Grid::new(8, 1.0).unwrap();
        let f = single_mode(grid, [0, 0, 1], 1.0, [1.0, 0.0, 0.0]).unwrap();
        assert!(matches!(
            Forcing::new(f),
            Err(ModelError::Spectral(SpectralError::HorizontalMeanObstruction { .. }))
        ));
    }

    #[test]
    fn single_mode_step_is_exact_decay() {
        let p = params(8);
        let w = single_mode(p.grid(), [0, 0, 1], 1.0, [1.0, 0.0, 0.0]).unwrap();
        let next = step(&w, &Forcing::zero(p.grid()), &p).unwrap();
        let factor = (-p.nu * p.dt).exp();
        assert_eq!(next, w.scaled(factor));
        let z = SpectralVectorField::zeros(p.grid());
        assert_eq!(step(&z, &Forcing::zero(p.grid()), &p).unwrap(), z);
    }

    #[test]
    fn blow_up_is_reported() {
        let p = SimParams {
            nu: 1e-4,
            dt: 5.0,
            final_time: 200.0,
            sample_dt: 5.0,
            ..params(8)
        };
        let w = random_solenoidal(p.grid(), 3, 0.0, 3.0).unwrap().scaled(1e3);
        match simulate(&w, &Forcing::zero(p.grid()), &p) {
            Err(ModelError::BlowUp { step, .. }) => assert!(step >= 1),
            other => panic!("expected blow-up, got {other:?}"),
        }
    }

    #[test]
    fn steps_stay_real_and_solenoidal() {
        let p = SimParams {
            final_time: 0.2,
            sample_dt: 0.05,
            ..params(8)
        };
        let w0 = random_solenoidal(p.grid(), 11, -1.0, 3.0).unwrap();
        let traj = simulate(&w0, &Forcing::zero(p.grid()), &p).unwrap();
        assert_eq!(traj.state(0).unwrap(), &w0);
        for s in traj.states().unwrap() {
            s.check_reality().unwrap();
            assert!(s.relative_divergence() < 1e-12);
        }
    }
}
