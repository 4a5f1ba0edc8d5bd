//! Constants and a-priori bounds of the filtered model, evaluated along
//! simulated trajectories.
//!
//! With `λ₁ = 1/L²`:
//!
//! ```text
//! k₀(t) = ‖w(t)‖² + α²‖∇_h w(t)‖²
//! K₁    = min{ ‖Λ_h⁻²f‖²/(να²), ‖Λ_h⁻¹f‖²/ν }
//! k₁(t) = k₀(t) + K₁/(νλ₁)
//! k₂(t) = ‖∇w(t)‖² + α²‖∇∇_h w(t)‖²
//! K₂    = (3/ν) min{ ‖Λ_h⁻¹f‖²/α², ‖f‖² }
//! k₃(t) = K₂ + C k₁³/(α⁸ν³) (1/(α⁴λ₁³) + k₁²/ν⁴)
//! k₄(t) = k₂(t) + k₃(t)/(νλ₁)
//! ```
//!
//! `K₁` above is the constant the energy argument actually closes with.
//! The variant `min{‖Λ_h⁻¹f‖², ‖Λ_h^{-1/2}f‖²}` is kept alongside as
//! [`Constants::big_k1_literal`]; bound checks never consume it.

pub(crate) mod report;

use thiserror::Error;

use crate::model::{Forcing, SimParams};
use crate::numerics::{cumulative_trapezoid, relative_gap, trapezoid_error_estimate};
use crate::pathspace::{PathError, Trajectory};
use crate::spectral::{apply_horizontal_filter, lambda_h_power, norms, SpectralError};

pub use report::{BoundReport, EnergyIdentityReport, SignVerdict};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EstimateError {
    #[error(transparent)]
    Path(#[from] PathError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error("trajectory was recorded without states under a different forcing; ⟨f, w⟩ is unavailable")]
    ForcingUnavailable,
    #[error("window length r = {0} must be a positive lattice multiple")]
    BadWindow(f64),
    #[error("generic constant C_h2 = {0} must be finite and >= 0")]
    BadGenericConstant(f64),
}

/// Relative slack granted to every inequality check.
pub const BOUND_RELATIVE_SLACK: f64 = 1e-8;

/// Time-independent constants of one forcing and parameter set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Constants {
    /// Poincaré constant `1/L²`.
    pub lambda1: f64,
    /// `min{‖Λ_h⁻²f‖²/(να²), ‖Λ_h⁻¹f‖²/ν}`.
    pub big_k1: f64,
    /// `min{‖Λ_h⁻¹f‖², ‖Λ_h^{-1/2}f‖²}`.
    pub big_k1_literal: f64,
    /// `(3/ν) min{‖Λ_h⁻¹f‖²/α², ‖f‖²}`.
    pub big_k2: f64,
    /// Generic constant `C` in `k₃`.
    pub c_h2: f64,
}

/// Shape of the Gronwall envelope.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EnvelopeForm {
    /// Exponent `-νλ₁(t + r)`: the envelope decays from time zero.
    #[default]
    FromOrigin,
    /// Exponent `-νλ₁ r`: Gronwall restarted at `t`.
    Restarted,
}

fn sq_norm(f: &crate::spectral::SpectralVectorField) -> f64 {
    norms(f, 0.0).vh_sq
}

pub fn compute_constants(f: &Forcing, p: &SimParams, c_h2: f64) -> Result<Constants, EstimateError> {
    if !(c_h2.is_finite() && c_h2 >= 0.0) {
        return Err(EstimateError::BadGenericConstant(c_h2));
    }
    let field = f.field();
    let m2 = sq_norm(&lambda_h_power(field, -2.0)?);
    let m1 = sq_norm(&lambda_h_power(field, -1.0)?);
    let mhalf = sq_norm(&lambda_h_power(field, -0.5)?);
    let f2 = sq_norm(field);
    let (nu, a2) = (p.nu, p.alpha * p.alpha);
    let alpha_branch = |num: f64| if num == 0.0 { 0.0 } else if a2 > 0.0 { num / a2 } else { f64::INFINITY };
    Ok(Constants {
        lambda1: p.lambda1(),
        big_k1: (alpha_branch(m2) / nu).min(m1 / nu),
        big_k1_literal: m1.min(mhalf),
        big_k2: 3.0 / nu * alpha_branch(m1).min(f2),
        c_h2,
    })
}

/// `k₀e^{-x} + (K/ρ)(1 - e^{-x})` with `x = ρ s`.
pub fn gronwall_envelope(start: f64, source: f64, rate: f64, s: f64) -> f64 {
    let e = (-rate * s).exp();
    start * e + source / rate * (1.0 - e)
}

/// `C`-free factor of `k₃`: `k₁³/(α⁸ν³) (1/(α⁴λ₁³) + k₁²/ν⁴)`.
pub fn h2_growth_factor(k1: f64, alpha: f64, nu: f64, lambda1: f64) -> f64 {
    if k1 == 0.0 {
        return 0.0;
    }
    if alpha == 0.0 {
        return f64::INFINITY;
    }
    let a4 = alpha.powi(4);
    k1.powi(3) / (a4 * a4 * nu.powi(3)) * (1.0 / (a4 * lambda1.powi(3)) + k1 * k1 / nu.powi(4))
}

fn k0_at(traj: &Trajectory, j: usize) -> f64 {
    traj.norm(j).vh_sq
}

fn k1_at(traj: &Trajectory, j: usize, c: &Constants) -> f64 {
    k0_at(traj, j) + c.big_k1 / (traj.params().nu * c.lambda1)
}

fn k2_at(traj: &Trajectory, j: usize) -> f64 {
    traj.norm(j).h2h_sq
}

fn k3_at(traj: &Trajectory, j: usize, c: &Constants) -> f64 {
    let p = traj.params();
    let g = h2_growth_factor(k1_at(traj, j, c), p.alpha, p.nu, c.lambda1);
    if c.c_h2 == 0.0 {
        c.big_k2
    } else {
        c.big_k2 + c.c_h2 * g
    }
}

/// `k₀(t) = ‖w(t)‖² + α²‖∇_h w(t)‖²`.
pub fn k0(traj: &Trajectory, t: f64) -> Result<f64, EstimateError> {
    Ok(k0_at(traj, traj.index_at(t)?))
}

/// `k₁(t) = k₀(t) + K₁/(νλ₁)`.
pub fn k1(traj: &Trajectory, t: f64, c: &Constants) -> Result<f64, EstimateError> {
    Ok(k1_at(traj, traj.index_at(t)?, c))
}

/// `k₂(t) = ‖∇w(t)‖² + α²‖∇∇_h w(t)‖²`.
pub fn k2(traj: &Trajectory, t: f64) -> Result<f64, EstimateError> {
    Ok(k2_at(traj, traj.index_at(t)?))
}

/// `k₃(t) = K₂ + C k₁(t)³/(α⁸ν³)(1/(α⁴λ₁³) + k₁(t)²/ν⁴)`.
pub fn k3(traj: &Trajectory, t: f64, c: &Constants) -> Result<f64, EstimateError> {
    Ok(k3_at(traj, traj.index_at(t)?, c))
}

/// `k₄(t) = k₂(t) + k₃(t)/(νλ₁)`.
pub fn k4(traj: &Trajectory, t: f64, c: &Constants) -> Result<f64, EstimateError> {
    let j = traj.index_at(t)?;
    Ok(k2_at(traj, j) + k3_at(traj, j, c) / (traj.params().nu * c.lambda1))
}

/// Per-sample `⟨f, w⟩` and `⟨f, A_h w⟩` for the forcing `f`.
fn forcing_work(traj: &Trajectory, f: &Forcing) -> Result<Vec<(f64, f64)>, EstimateError> {
    if let Some(states) = traj.states() {
        let alpha = traj.alpha();
        return states
            .into_iter()
            .map(|w| {
                Ok((
                    f.field().inner(w)?,
                    f.field().inner(&apply_horizontal_filter(w, alpha)?)?,
                ))
            })
            .collect();
    }
    match traj.forcing() {
        Some(recorded) if recorded == f => Ok(traj
            .samples()
            .iter()
            .map(|s| (s.forcing_work, s.forcing_work_filtered))
            .collect()),
        _ => Err(EstimateError::ForcingUnavailable),
    }
}

/// Energy balance of the model,
///
/// ```text
/// ½k₀(t) + ν∫₀ᵗ k₂ ds = ½k₀(0) + ∫₀ᵗ ⟨f, w⟩ ds,
/// ```
///
/// with trapezoidal time integrals on the sample lattice. The report also
/// carries the residual of the alternative right-hand side
/// `½k₀(0) - ∫₀ᵗ ⟨f, A_h w⟩ ds` and which of the two the data supports.
pub fn check_energy_identity(traj: &Trajectory, f: &Forcing) -> Result<EnergyIdentityReport, EstimateError> {
    let h = traj.sample_dt();
    let nu = traj.params().nu;
    let dissipation: Vec<f64> = traj.norms().map(|n| nu * n.h2h_sq).collect();
    let work = forcing_work(traj, f)?;
    let plus: Vec<f64> = work.iter().map(|w| w.0).collect();
    let filtered: Vec<f64> = work.iter().map(|w| w.1).collect();
    let diss_int = cumulative_trapezoid(&dissipation, h);
    let plus_int = cumulative_trapezoid(&plus, h);
    let filt_int = cumulative_trapezoid(&filtered, h);
    let e0 = 0.5 * k0_at(traj, 0);
    let mut report = EnergyIdentityReport::default();
    for j in 0..traj.len() {
        let lhs = 0.5 * k0_at(traj, j) + diss_int[j];
        let rhs = e0 + plus_int[j];
        let rhs_printed = e0 - filt_int[j];
        report.times.push(traj.time(j));
        report.lhs.push(lhs);
        report.rhs.push(rhs);
        report.residual.push(relative_gap(lhs, rhs));
        report.rhs_printed.push(rhs_printed);
        report.residual_printed.push(relative_gap(lhs, rhs_printed));
    }
    report.finish(f.is_zero());
    Ok(report)
}

fn rate(traj: &Trajectory, c: &Constants) -> f64 {
    traj.params().nu * c.lambda1
}

/// Decay bound at base time `t`, for every later sample `t + r`:
///
/// ```text
/// k₀(t+r) <= k₀(t) e^{-νλ₁(t+r)} + K₁/(νλ₁)(1 - e^{-νλ₁(t+r)}) <= k₁(t)
/// ```
///
/// Returns the envelope inequality and the uniform one (`<= k₁(t)`).
pub fn check_decay_bound(
    traj: &Trajectory,
    c: &Constants,
    t: f64,
    form: EnvelopeForm,
) -> Result<(BoundReport, BoundReport), EstimateError> {
    let base = traj.index_at(t)?;
    let t_abs = traj.time(base);
    let rho = rate(traj, c);
    let start = k0_at(traj, base);
    let bound1 = k1_at(traj, base, c);
    let mut envelope = BoundReport::builder();
    let mut uniform = BoundReport::builder();
    for j in base + 1..traj.len() {
        let s = match form {
            EnvelopeForm::FromOrigin => traj.time(j),
            EnvelopeForm::Restarted => traj.time(j) - t_abs,
        };
        let lhs = k0_at(traj, j);
        let env = gronwall_envelope(start, c.big_k1, rho, s);
        envelope.push(traj.time(j), lhs, env, 0.0);
        uniform.push(traj.time(j), lhs, bound1, 0.0);
    }
    Ok((envelope.build(), uniform.build()))
}

/// `∫_t^{t+r} ν k₂(s) ds <= rK₁ + k₁(t)` for every base sample `t` whose
/// window fits in the span.
pub fn check_dissipation_bound(traj: &Trajectory, c: &Constants, r: f64) -> Result<BoundReport, EstimateError> {
    let h = traj.sample_dt();
    let steps = match crate::model::lattice_ratio(r, h) {
        Some(k) if k >= 1 => k,
        _ => return Err(EstimateError::BadWindow(r)),
    };
    let nu = traj.params().nu;
    let dissipation: Vec<f64> = traj.norms().map(|n| nu * n.h2h_sq).collect();
    let cum = cumulative_trapezoid(&dissipation, h);
    let mut out = BoundReport::builder();
    for j in 0..traj.len().saturating_sub(steps) {
        let lhs = cum[j + steps] - cum[j];
        let quad = trapezoid_error_estimate(&dissipation[j..=j + steps], h);
        let rhs = r * c.big_k1 + k1_at(traj, j, c);
        out.push(traj.time(j), lhs, rhs, quad);
    }
    Ok(out.build())
}

/// Outcome of the higher-order bound at one base time.
#[derive(Debug, Clone, PartialEq)]
pub struct H2Report {
    /// `k₂(t+r) <= k₂(t)e^{-νλ₁(t+r)} + k₃(t)/(νλ₁)(1 - e^{-νλ₁(t+r)})`.
    pub envelope: BoundReport,
    /// Same left side against `k₄(t)`.
    pub uniform: BoundReport,
    /// Smallest `C` making the envelope hold at every sampled `r` (no slack).
    pub calibrated_c_h2: f64,
}

/// Higher-order estimate at base time `t` with the generic constant from `c`.
pub fn check_h2_bound(
    traj: &Trajectory,
    c: &Constants,
    t: f64,
    form: EnvelopeForm,
) -> Result<H2Report, EstimateError> {
    let base = traj.index_at(t)?;
    let t_abs = traj.time(base);
    let p = traj.params();
    let rho = rate(traj, c);
    let start = k2_at(traj, base);
    let k3v = k3_at(traj, base, c);
    let k4v = start + k3v / rho;
    let growth = h2_growth_factor(k1_at(traj, base, c), p.alpha, p.nu, c.lambda1);
    let mut envelope = BoundReport::builder();
    let mut uniform = BoundReport::builder();
    let mut calibrated = 0.0f64;
    for j in base + 1..traj.len() {
        let s = match form {
            EnvelopeForm::FromOrigin => traj.time(j),
            EnvelopeForm::Restarted => traj.time(j) - t_abs,
        };
        let lhs = k2_at(traj, j);
        envelope.push(traj.time(j), lhs, gronwall_envelope(start, k3v, rho, s), 0.0);
        uniform.push(traj.time(j), lhs, k4v, 0.0);

        let e = (-rho * s).exp();
        let excess = lhs - start * e - c.big_k2 / rho * (1.0 - e);
        if excess > 0.0 {
            let per_c = growth / rho * (1.0 - e);
            let need = if per_c > 0.0 && per_c.is_finite() {
                excess / per_c
            } else if per_c.is_infinite() {
                0.0
            } else {
                f64::INFINITY
            };
            calibrated = calibrated.max(need);
        }
    }
    Ok(H2Report {
        envelope: envelope.build(),
        uniform: uniform.build(),
        calibrated_c_h2: calibrated,
    })
}
