//! Fourier representation of fields on the periodic box `(-πL, πL)³`.
//!
//! All operators here are diagonal (or 3×3 block diagonal) in wavenumber
//! space, so they commute with each other and act mode by mode:
//!
//! | operator | symbol |
//! |---|---|
//! | `A_h = I - α²Δ_h` | `1 + α²|k_h|²` |
//! | `A_h⁻¹` | `1 / (1 + α²|k_h|²)` |
//! | Leray projection `P` | `I - k kᵀ / |k|²` |
//! | `Λ_h^s = (-Δ_h)^{s/2}` | `|k_h|^s` |
//!
//! Norms are Parseval sums with the volume factor `(2πL)³` folded in once,
//! so `‖w‖² = (2πL)³ Σ |ŵ(k)|²` for the coefficient convention
//! `w(x) = Σ ŵ(k) e^{i k·x/L}`.

mod fft;
mod field;
mod grid;

use num_complex::Complex64;
use thiserror::Error;

pub use fft::{analyze, synthesize, Fft3};
pub use field::{SpectralScalarField, SpectralVectorField};
pub use grid::{Grid, Mode};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpectralError {
    #[error("resolution n = {n} must be an even integer >= 4")]
    InvalidResolution { n: usize },
    #[error("period scale L = {0} must be positive and finite")]
    InvalidPeriodScale(f64),
    #[error("coefficient array has {found} modes, grid expects {expected}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("coefficients are not conjugate symmetric at k = {k:?}")]
    NotReal { k: [i64; 3] },
    #[error("field carries a nonzero mean mode")]
    NonzeroMean,
    #[error("fields live on different grids")]
    GridMismatch,
    #[error("horizontal-mean obstruction: negative power of Λ_h requested on a field with energy at k_h = 0 (k = {k:?})")]
    HorizontalMeanObstruction { k: [i64; 3] },
    #[error("filter scale alpha = {0} must be finite and >= 0")]
    InvalidAlpha(f64),
}

/// Norms of a velocity state at one instant.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct NormReport {
    /// `‖w‖`
    pub l2: f64,
    /// `‖∇_h w‖`
    pub grad_h: f64,
    /// `‖∇w‖`
    pub grad: f64,
    /// `‖∇_h ∇w‖`
    pub grad_h_grad: f64,
    /// `‖w‖² + α²‖∇_h w‖²`
    pub vh_sq: f64,
    /// `‖∇w‖² + α²‖∇∇_h w‖²`
    pub h2h_sq: f64,
}

/// Symbol of the horizontal Helmholtz operator, `1 + α²|k_h|²`.
#[inline]
pub fn filter_symbol(mode: &Mode, alpha: f64) -> f64 {
    1.0 + alpha * alpha * mode.kh_sq()
}

fn check_alpha(alpha: f64) -> Result<(), SpectralError> {
    if alpha.is_finite() && alpha >= 0.0 {
        Ok(())
    } else {
        Err(SpectralError::InvalidAlpha(alpha))
    }
}

/// `A_h u = (I - α²Δ_h) u`.
pub fn apply_horizontal_filter(
    u: &SpectralVectorField,
    alpha: f64,
) -> Result<SpectralVectorField, SpectralError> {
    check_alpha(alpha)?;
    Ok(u.scale_by_symbol(|m| filter_symbol(m, alpha)))
}

/// `A_h⁻¹ u`, the horizontal smoothing filter `ū^h`.
pub fn apply_horizontal_filter_inverse(
    u: &SpectralVectorField,
    alpha: f64,
) -> Result<SpectralVectorField, SpectralError> {
    check_alpha(alpha)?;
    Ok(u.scale_by_symbol(|m| 1.0 / filter_symbol(m, alpha)))
}

/// Project one coefficient triple onto the plane orthogonal to `k`.
#[inline]
pub(crate) fn project_mode(mode: &Mode, c: [Complex64; 3]) -> [Complex64; 3] {
    let k2 = mode.k_sq();
    if k2 == 0.0 {
        return c;
    }
    let [a, b, d] = mode.wavevector;
    let kc = c[0] * a + c[1] * b + c[2] * d;
    let s = kc / k2;
    [c[0] - s * a, c[1] - s * b, c[2] - s * d]
}

/// Leray projection onto divergence-free fields.
pub fn leray_project(u: &SpectralVectorField) -> SpectralVectorField {
    u.map_modes(project_mode)
}

/// Norm family of `w` for filter scale `alpha`.
pub fn norms(w: &SpectralVectorField, alpha: f64) -> NormReport {
    let grid = w.grid();
    let mut sums = [0.0f64; 4];
    for m in grid.modes() {
        let c = &w.coeffs()[m.index];
        let e = c[0].norm_sqr() + c[1].norm_sqr() + c[2].norm_sqr();
        if e == 0.0 {
            continue;
        }
        let kh2 = m.kh_sq();
        let k2 = m.k_sq();
        sums[0] += e;
        sums[1] += kh2 * e;
        sums[2] += k2 * e;
        sums[3] += kh2 * k2 * e;
    }
    let v = grid.volume();
    let [l2_sq, gh_sq, g_sq, ghg_sq] = sums.map(|s| s * v);
    let a2 = alpha * alpha;
    NormReport {
        l2: l2_sq.sqrt(),
        grad_h: gh_sq.sqrt(),
        grad: g_sq.sqrt(),
        grad_h_grad: ghg_sq.sqrt(),
        vh_sq: l2_sq + a2 * gh_sq,
        h2h_sq: g_sq + a2 * ghg_sq,
    }
}

/// `Λ_h^s f`, with symbol `|k_h|^s`.
///
/// Negative powers are only defined when `f` has no energy on the vertical
/// column `k1 = k2 = 0`.
pub fn lambda_h_power(f: &SpectralVectorField, s: f64) -> Result<SpectralVectorField, SpectralError> {
    if s < 0.0 {
        if let Some(m) = f
            .grid()
            .modes()
            .find(|m| m.is_horizontal_mean() && f.coeffs()[m.index].iter().any(|z| z.norm_sqr() > 0.0))
        {
            return Err(SpectralError::HorizontalMeanObstruction { k: m.k });
        }
    }
    Ok(f.scale_by_symbol(|m| {
        let kh2 = m.kh_sq();
        if kh2 == 0.0 {
            if s == 0.0 {
                1.0
            } else {
                0.0
            }
        } else {
            kh2.powf(0.5 * s)
        }
    }))
}

/// Zero every mode outside the two-thirds cube `|k_i| <= K`.
pub fn dealias(u: &SpectralVectorField) -> SpectralVectorField {
    let cutoff = u.grid().dealias_cutoff();
    u.restrict(|m| m.max_abs_index() <= cutoff)
}
