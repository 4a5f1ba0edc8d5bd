//! Filtered pressure and the regularity checks built on it.
//!
//! Taking the divergence of the momentum equation gives
//!
//! ```text
//! -Δ A_h q = ∇·∇·(w⊗w) - ∇·f
//! q̂(k) = [-k_j k_l T̂_jl(k) - i k·f̂(k)] / (|k|² (1 + α²|k_h|²)),   q̂(0) = 0
//! ```
//!
//! where `T̂` is the (dealiased) product tensor of the model.

use std::io::Write;

use num_complex::Complex64;
use thiserror::Error;

use crate::estimates::report::fmt;
use crate::model::{
    convective_flux, lattice_ratio, stress_tensor, Forcing, Integrator, ModelError, SimParams,
    StressTensor,
};
use crate::pathspace::{PathError, Trajectory};
use crate::spectral::{
    apply_horizontal_filter_inverse, filter_symbol, norms, project_mode, SpectralError,
    SpectralScalarField, SpectralVectorField,
};

/// Zero-mean scalar field holding `q`.
pub type PressureField = SpectralScalarField;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PressureError {
    #[error("time {t} has no neighbours on both sides for a centered difference")]
    BoundarySample { t: f64 },
    #[error("perturbation direction: {0}")]
    InvalidDirection(String),
    #[error("perturbation sizes must be positive and strictly decreasing")]
    InvalidEpsilons,
    #[error(transparent)]
    Path(#[from] PathError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
}

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// `Σ_{jl} k_j k_l T̂_jl` at one mode.
fn double_contraction(t: &StressTensor, index: usize, k: &[f64; 3]) -> Complex64 {
    let mut acc = ZERO;
    for j in 0..3 {
        for l in 0..3 {
            acc += t.entry(j, l)[index] * (k[j] * k[l]);
        }
    }
    acc
}

/// Fourier transform of `∇·∇·(w⊗w) - ∇·f` at every mode.
fn pressure_source(t: &StressTensor, f: &Forcing) -> Vec<Complex64> {
    let fc = f.field().coeffs();
    t.grid()
        .modes()
        .map(|m| {
            let k = m.wavevector;
            let fk = fc[m.index];
            let kf = fk[0] * k[0] + fk[1] * k[1] + fk[2] * k[2];
            -double_contraction(t, m.index, &k) - Complex64::new(-kf.im, kf.re)
        })
        .collect()
}

fn pressure_symbol(m: &crate::spectral::Mode, alpha: f64) -> f64 {
    m.k_sq() * filter_symbol(m, alpha)
}

/// Solve for the filtered pressure of the state `w` under forcing `f`.
pub fn recover_pressure(w: &SpectralVectorField, f: &Forcing, p: &SimParams) -> PressureField {
    let t = stress_tensor(w, p.dealias);
    let source = pressure_source(&t, f);
    let coeffs = w
        .grid()
        .modes()
        .map(|m| {
            if m.is_mean() {
                ZERO
            } else {
                source[m.index] / pressure_symbol(&m, p.alpha)
            }
        })
        .collect();
    SpectralScalarField::from_raw(*w.grid(), coeffs)
}

/// `‖∇_h q‖`.
pub fn horizontal_gradient_norm(q: &PressureField) -> f64 {
    q.weighted_energy(|m| m.kh_sq()).sqrt()
}

/// Largest mode-wise gap between `-ΔA_h q` and its source, relative to the
/// largest source coefficient. Zero when both vanish.
pub fn pressure_equation_residual(q: &PressureField, w: &SpectralVectorField, f: &Forcing, p: &SimParams) -> f64 {
    let source = pressure_source(&stress_tensor(w, p.dealias), f);
    let scale = source.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let gap = q
        .grid()
        .modes()
        .filter(|m| !m.is_mean())
        .map(|m| (q.coeffs()[m.index] * pressure_symbol(&m, p.alpha) - source[m.index]).norm())
        .fold(0.0, f64::max);
    if scale == 0.0 {
        gap
    } else {
        gap / scale
    }
}

/// `A_h⁻¹ f - A_h⁻¹ ∇·(w⊗w)`, the unprojected explicit part of the momentum
/// balance.
fn explicit_forces(w: &SpectralVectorField, f: &Forcing, p: &SimParams) -> Result<SpectralVectorField, SpectralError> {
    let flux = apply_horizontal_filter_inverse(&convective_flux(w, p), p.alpha)?;
    apply_horizontal_filter_inverse(f.field(), p.alpha)?.sub(&flux)
}

/// Largest mode-wise gap between `∇q` and `(I - P)[A_h⁻¹f - A_h⁻¹∇·(w⊗w)]`,
/// relative to the largest coefficient of the latter.
pub fn gradient_consistency(q: &PressureField, w: &SpectralVectorField, f: &Forcing, p: &SimParams) -> Result<f64, SpectralError> {
    let g = explicit_forces(w, f, p)?;
    let gq = q.gradient();
    let mut gap = 0.0f64;
    let mut scale = 0.0f64;
    for m in w.grid().modes() {
        let c = g.coeffs()[m.index];
        let proj = project_mode(&m, c);
        let grad = gq.coeffs()[m.index];
        for d in 0..3 {
            let expect = c[d] - proj[d];
            scale = scale.max(expect.norm());
            gap = gap.max((grad[d] - expect).norm());
        }
    }
    Ok(if scale == 0.0 { gap } else { gap / scale })
}

/// Fourier-side control of the pressure with `H^{-1}`, `H^{-2}` realized by
/// the weights `(1+|k|²)^{-1}` and `(1+|k|²)^{-2}`:
///
/// ```text
/// ‖A_h q‖_{H⁻¹} <= ‖w⊗w‖_{H⁻¹} + (1 + L²)^{1/2} ‖f‖_{H⁻²}
/// ‖∇_h q‖       <= (2α)⁻¹ (‖w⊗w‖ + L ‖f‖)
/// ```
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PressureControl {
    pub filtered_pressure_hm1: f64,
    pub stress_hm1: f64,
    pub forcing_hm2: f64,
    pub bound: f64,
    pub grad_h: f64,
    pub stress_l2: f64,
    pub forcing_l2: f64,
    /// Infinite when `α = 0`.
    pub grad_h_bound: f64,
}

impl PressureControl {
    pub fn holds(&self) -> bool {
        let tol = 1e-12;
        self.filtered_pressure_hm1 <= self.bound * (1.0 + tol) && self.grad_h <= self.grad_h_bound * (1.0 + tol)
    }
}

fn stress_energy(t: &StressTensor, weight: impl Fn(&crate::spectral::Mode) -> f64) -> f64 {
    let grid = t.grid();
    let mut sum = 0.0;
    for m in grid.modes() {
        let mut s = 0.0;
        for j in 0..3 {
            for l in 0..3 {
                s += t.entry(j, l)[m.index].norm_sqr();
            }
        }
        sum += weight(&m) * s;
    }
    sum * grid.volume()
}

pub fn pressure_control(w: &SpectralVectorField, f: &Forcing, p: &SimParams) -> PressureControl {
    let q = recover_pressure(w, f, p);
    let t = stress_tensor(w, p.dealias);
    let hm1 = |m: &crate::spectral::Mode| 1.0 / (1.0 + m.k_sq());
    let filtered_pressure_hm1 = q.weighted_energy(|m| filter_symbol(m, p.alpha).powi(2) * hm1(m)).sqrt();
    let stress_hm1 = stress_energy(&t, hm1).sqrt();
    let forcing_hm2 = f.field().weighted_energy(|m| hm1(m).powi(2)).sqrt();
    let l = p.period_scale;
    let stress_l2 = stress_energy(&t, |_| 1.0).sqrt();
    let forcing_l2 = norms(f.field(), 0.0).l2;
    let grad_h_bound = if p.alpha > 0.0 {
        (stress_l2 + l * forcing_l2) / (2.0 * p.alpha)
    } else {
        f64::INFINITY
    };
    PressureControl {
        filtered_pressure_hm1,
        stress_hm1,
        forcing_hm2,
        bound: stress_hm1 + (1.0 + l * l).sqrt() * forcing_hm2,
        grad_h: horizontal_gradient_norm(&q),
        stress_l2,
        forcing_l2,
        grad_h_bound,
    }
}

/// Relative residual of the horizontal momentum balance
///
/// ```text
/// ∂_t w_h = [A_h⁻¹f]_h + νΔw_h - ∇_h q - [A_h⁻¹∇·(w⊗w)]_h
/// ```
///
/// at an interior sample `t`, with `∂_t w_h` from a centered difference of
/// the neighbouring samples.
pub fn momentum_residual(traj: &Trajectory, f: &Forcing, t: f64) -> Result<f64, PressureError> {
    let j = traj.index_at(t)?;
    if j == 0 || j + 1 >= traj.len() {
        return Err(PressureError::BoundarySample { t });
    }
    let (prev, cur, next) = match (traj.state(j - 1), traj.state(j), traj.state(j + 1)) {
        (Some(a), Some(b), Some(c)) => (a, b, c),
        _ => return Err(PathError::StatesNotRetained.into()),
    };
    Ok(centered_momentum_residual(prev, cur, next, f, traj.params(), traj.sample_dt())?)
}

/// Momentum-balance residual at `cur` from its neighbours `prev`, `next`
/// sampled `h` before and after.
pub fn centered_momentum_residual(
    prev: &SpectralVectorField,
    cur: &SpectralVectorField,
    next: &SpectralVectorField,
    f: &Forcing,
    p: &SimParams,
    h: f64,
) -> Result<f64, SpectralError> {
    let dwdt = next.sub(prev)?.scaled(0.5 / h).horizontal_part();
    let q = recover_pressure(cur, f, p);
    let balance = explicit_forces(cur, f, p)?
        .add(&cur.scale_by_symbol(|m| -p.nu * m.k_sq()))?
        .sub(&q.gradient())?
        .horizontal_part();
    let gap = norms(&dwdt.sub(&balance)?, 0.0).l2;
    let scale = norms(&dwdt, 0.0).l2.max(norms(&balance, 0.0).l2);
    Ok(if scale == 0.0 { 0.0 } else { gap / scale })
}

/// [`momentum_residual`] at every interior sample, as `(t, residual)`.
pub fn momentum_residual_series(traj: &Trajectory, f: &Forcing) -> Result<Vec<(f64, f64)>, PressureError> {
    (1..traj.len().saturating_sub(1))
        .map(|j| {
            let t = traj.time(j);
            momentum_residual(traj, f, t).map(|r| (t, r))
        })
        .collect()
}

/// Whether the difference ratios are consistent with continuous dependence
/// of `w_h` on the initial datum. A finite window can never prove it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ContinuityVerdict {
    ConsistentWith,
    InconsistentWith,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContinuityReport {
    pub epsilons: Vec<f64>,
    /// `sup_t ‖w_h(t; w0 + εd) - w_h(t; w0)‖_{V_h} / ‖εd‖_{V_h}` per ε.
    pub sup_vh_ratio: Vec<f64>,
    pub verdict: ContinuityVerdict,
}

impl ContinuityReport {
    /// Largest relative change between consecutive ratios.
    pub fn max_relative_step(&self) -> f64 {
        self.sup_vh_ratio
            .windows(2)
            .map(|r| crate::numerics::relative_gap(r[0], r[1]))
            .fold(0.0, f64::max)
    }

    /// Write `epsilon,sup_vh_ratio` rows.
    pub fn write_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["epsilon", "sup_vh_ratio"])?;
        for (e, r) in self.epsilons.iter().zip(&self.sup_vh_ratio) {
            w.write_record(&[fmt(*e), fmt(*r)])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Run `w0` and `w0 + ε·d` side by side for each `ε` and record the largest
/// `V_h` distance of the horizontal components over the sample lattice.
///
/// `direction` is normalized to unit `V_h` norm.
pub fn continuity_modulus(
    w0: &SpectralVectorField,
    direction: &SpectralVectorField,
    epsilons: &[f64],
    f: &Forcing,
    p: &SimParams,
) -> Result<ContinuityReport, PressureError> {
    if epsilons.is_empty() || epsilons.iter().any(|e| !(e.is_finite() && *e > 0.0)) || epsilons.windows(2).any(|e| e[1] >= e[0]) {
        return Err(PressureError::InvalidEpsilons);
    }
    direction
        .check_reality()
        .map_err(|e| PressureError::InvalidDirection(e.to_string()))?;
    if direction.relative_divergence() > crate::model::DIVERGENCE_TOL {
        return Err(PressureError::InvalidDirection("not divergence free".into()));
    }
    let size = norms(direction, p.alpha).vh_sq.sqrt();
    if size == 0.0 {
        return Err(PressureError::InvalidDirection("zero field".into()));
    }
    let unit = direction.scaled(1.0 / size);
    p.validate()?;
    let stride = p.stride();
    let count = p.sample_count();
    debug_assert!(lattice_ratio(p.final_time, p.sample_dt).is_some());

    let mut base = w0.clone();
    let mut base_int = Integrator::new(f, p)?;
    let mut runs = epsilons
        .iter()
        .map(|&e| Ok((w0.axpy(e, &unit)?, Integrator::new(f, p)?)))
        .collect::<Result<Vec<_>, PressureError>>()?;
    let mut sup = vec![0.0f64; epsilons.len()];
    let mut record = |base: &SpectralVectorField, runs: &[(SpectralVectorField, Integrator)]| -> Result<(), PressureError> {
        for (i, (w, _)) in runs.iter().enumerate() {
            let d = w.sub(base)?.horizontal_part();
            let ratio = norms(&d, p.alpha).vh_sq.sqrt() / epsilons[i];
            sup[i] = sup[i].max(ratio);
        }
        Ok(())
    };
    record(&base, &runs)?;
    for _ in 1..count {
        for _ in 0..stride {
            base = base_int.step(&base)?;
            for (w, integ) in runs.iter_mut() {
                *w = integ.step(w)?;
            }
        }
        record(&base, &runs)?;
    }
    let bounded = sup.iter().all(|r| r.is_finite()) && sup.windows(2).all(|r| r[1] <= 2.0 * r[0].max(f64::MIN_POSITIVE));
    Ok(ContinuityReport {
        epsilons: epsilons.to_vec(),
        sup_vh_ratio: sup,
        verdict: if bounded {
            ContinuityVerdict::ConsistentWith
        } else {
            ContinuityVerdict::InconsistentWith
        },
    })
}
