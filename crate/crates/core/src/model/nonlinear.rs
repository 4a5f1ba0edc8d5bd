use num_complex::Complex64;

use crate::spectral::{self, analyze, filter_symbol, project_mode, Grid, SpectralVectorField};

use super::{Dealias, SimParams};

/// Index of `(j, l)` in the packed symmetric tensor
/// `[T11, T12, T13, T22, T23, T33]`.
pub(crate) const fn sym(j: usize, l: usize) -> usize {
    const MAP: [[usize; 3]; 3] = [[0, 1, 2], [1, 3, 4], [2, 4, 5]];
    MAP[j][l]
}

/// Fourier coefficients of the product tensor `w ⊗ w`, restricted to the
/// modes the dealiasing rule keeps.
#[derive(Debug, Clone)]
pub struct StressTensor {
    pub(crate) grid: Grid,
    pub(crate) cutoff: i64,
    pub(crate) entries: [Vec<Complex64>; 6],
}

impl StressTensor {
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// Largest per-axis wavenumber carried by the tensor.
    pub fn cutoff(&self) -> i64 {
        self.cutoff
    }

    pub fn entry(&self, j: usize, l: usize) -> &[Complex64] {
        &self.entries[sym(j, l)]
    }

    /// `∇·(w ⊗ w)`, component `l` being `Σ_j i k_j T̂_jl`.
    pub fn divergence(&self) -> SpectralVectorField {
        let coeffs = self
            .grid
            .modes()
            .map(|m| {
                let mut out = [Complex64::new(0.0, 0.0); 3];
                for (l, o) in out.iter_mut().enumerate() {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for j in 0..3 {
                        acc += self.entries[sym(j, l)][m.index] * m.wavevector[j];
                    }
                    *o = Complex64::new(-acc.im, acc.re);
                }
                out
            })
            .collect();
        SpectralVectorField::from_raw(self.grid, coeffs)
    }
}

/// Pseudo-spectral product `w ⊗ w`.
///
/// With [`Dealias::TwoThirds`] the input is truncated to `|k_i| <= K` with
/// `3K < n` and the product is truncated to the same cube, which makes it the
/// exact convolution of the truncated input. With [`Dealias::None`] the
/// product is evaluated on the full collocation grid and aliasing is kept.
pub fn stress_tensor(w: &SpectralVectorField, rule: Dealias) -> StressTensor {
    let grid = *w.grid();
    let (src, cutoff) = match rule {
        Dealias::TwoThirds => (spectral::dealias(w), grid.dealias_cutoff()),
        Dealias::None => (w.clone(), grid.max_index()),
    };
    let [u0, u1, u2] = src.to_physical();
    let prod = |a: &[f64], b: &[f64]| -> Vec<f64> { a.iter().zip(b).map(|(x, y)| x * y).collect() };
    let (t00, t01) = analyze(&grid, &prod(&u0, &u0), &prod(&u0, &u1));
    let (t02, t11) = analyze(&grid, &prod(&u0, &u2), &prod(&u1, &u1));
    let (t12, t22) = analyze(&grid, &prod(&u1, &u2), &prod(&u2, &u2));
    let mut entries = [t00, t01, t02, t11, t12, t22];
    if cutoff < grid.max_index() {
        for m in grid.modes() {
            if m.max_abs_index() > cutoff {
                for e in entries.iter_mut() {
                    e[m.index] = Complex64::new(0.0, 0.0);
                }
            }
        }
    }
    StressTensor { grid, cutoff, entries }
}

/// `∇·(w ⊗ w)` under the dealiasing rule of `p`.
pub fn convective_flux(w: &SpectralVectorField, p: &SimParams) -> SpectralVectorField {
    stress_tensor(w, p.dealias).divergence()
}

/// Filtered, projected nonlinearity `-P A_h⁻¹ ∇·(w ⊗ w)`.
pub fn nonlinear_term(w: &SpectralVectorField, p: &SimParams) -> SpectralVectorField {
    let alpha = p.alpha;
    convective_flux(w, p).map_modes(|m, c| {
        let s = -1.0 / filter_symbol(m, alpha);
        project_mode(m, c.map(|z| z * s))
    })
}
