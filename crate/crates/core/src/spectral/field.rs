use num_complex::Complex64;

use super::fft::{analyze, synthesize};
use super::{Grid, Mode, SpectralError};

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Real vector field on the torus, stored as Fourier coefficients
/// `w(x) = Σ_k ŵ(k) e^{i k·x/L}` over the retained lattice.
///
/// Constructors keep `ŵ(-k) = conj ŵ(k)` and `ŵ(0) = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralVectorField {
    grid: Grid,
    coeffs: Vec<[Complex64; 3]>,
}

/// Real scalar field on the torus in the same representation.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralScalarField {
    grid: Grid,
    coeffs: Vec<Complex64>,
}

impl SpectralVectorField {
    pub fn zeros(grid: Grid) -> Self {
        Self {
            grid,
            coeffs: vec![[ZERO; 3]; grid.mode_count()],
        }
    }

    /// Wrap raw coefficients. The array must match the grid, be conjugate
    /// symmetric and carry no mean.
    pub fn from_coeffs(grid: Grid, coeffs: Vec<[Complex64; 3]>) -> Result<Self, SpectralError> {
        if coeffs.len() != grid.mode_count() {
            return Err(SpectralError::LengthMismatch {
                expected: grid.mode_count(),
                found: coeffs.len(),
            });
        }
        let field = Self { grid, coeffs };
        field.check_reality()?;
        Ok(field)
    }

    /// Build from an arbitrary coefficient generator; the result is forced to
    /// be real (Hermitian average) and mean free.
    pub fn from_fn(grid: Grid, mut f: impl FnMut(&Mode) -> [Complex64; 3]) -> Self {
        let mut coeffs: Vec<[Complex64; 3]> = grid.modes().map(|m| f(&m)).collect();
        hermitize(&grid, &mut coeffs);
        Self { grid, coeffs }
    }

    /// Sample physical components on the collocation grid.
    pub fn from_physical(grid: Grid, components: [&[f64]; 3]) -> Self {
        let zeros = vec![0.0; grid.point_count()];
        let (c0, c1) = analyze(&grid, components[0], components[1]);
        let (c2, _) = analyze(&grid, components[2], &zeros);
        let mut coeffs: Vec<[Complex64; 3]> =
            c0.into_iter().zip(c1).zip(c2).map(|((a, b), c)| [a, b, c]).collect();
        let mean = grid.index_of([0, 0, 0]).expect("mean mode is always retained");
        coeffs[mean] = [ZERO; 3];
        Self { grid, coeffs }
    }

    /// Evaluate the three components on the collocation grid.
    pub fn to_physical(&self) -> [Vec<f64>; 3] {
        let c0 = self.component(0);
        let c1 = self.component(1);
        let c2 = self.component(2);
        let (a, b) = synthesize(&self.grid, &c0, Some(&c1));
        let (c, _) = synthesize(&self.grid, &c2, None);
        [a, b, c]
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn coeffs(&self) -> &[[Complex64; 3]] {
        &self.coeffs
    }

    pub fn coeff(&self, k: [i64; 3]) -> Option<[Complex64; 3]> {
        self.grid.index_of(k).map(|i| self.coeffs[i])
    }

    pub fn component(&self, d: usize) -> Vec<Complex64> {
        self.coeffs.iter().map(|c| c[d]).collect()
    }

    /// Apply a per-mode linear map. The map must commute with `k -> -k`
    /// conjugation for the result to stay real, which holds for every real
    /// even symbol and for derivative symbols `i k`.
    pub fn map_modes(&self, mut f: impl FnMut(&Mode, [Complex64; 3]) -> [Complex64; 3]) -> Self {
        let coeffs = self
            .grid
            .modes()
            .map(|m| f(&m, self.coeffs[m.index]))
            .collect();
        Self {
            grid: self.grid,
            coeffs,
        }
    }

    /// Multiply every mode by a real scalar symbol.
    pub fn scale_by_symbol(&self, mut symbol: impl FnMut(&Mode) -> f64) -> Self {
        self.map_modes(|m, c| {
            let s = symbol(m);
            c.map(|z| z * s)
        })
    }

    pub fn scaled(&self, s: f64) -> Self {
        self.scale_by_symbol(|_| s)
    }

    /// `self + s * other`.
    pub fn axpy(&self, s: f64, other: &Self) -> Result<Self, SpectralError> {
        self.ensure_same_grid(other)?;
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| [a[0] + b[0] * s, a[1] + b[1] * s, a[2] + b[2] * s])
            .collect();
        Ok(Self {
            grid: self.grid,
            coeffs,
        })
    }

    pub fn add(&self, other: &Self) -> Result<Self, SpectralError> {
        self.axpy(1.0, other)
    }

    pub fn sub(&self, other: &Self) -> Result<Self, SpectralError> {
        self.axpy(-1.0, other)
    }

    /// Real L² inner product `∫ u·v dx`.
    pub fn inner(&self, other: &Self) -> Result<f64, SpectralError> {
        self.ensure_same_grid(other)?;
        let sum: f64 = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| (0..3).map(|d| (a[d] * b[d].conj()).re).sum::<f64>())
            .sum();
        Ok(sum * self.grid.volume())
    }

    /// Weighted energy `(2πL)³ Σ weight(k) |ŵ(k)|²`.
    pub fn weighted_energy(&self, mut weight: impl FnMut(&Mode) -> f64) -> f64 {
        let sum: f64 = self
            .grid
            .modes()
            .map(|m| {
                let c = &self.coeffs[m.index];
                let e = c[0].norm_sqr() + c[1].norm_sqr() + c[2].norm_sqr();
                if e == 0.0 {
                    0.0
                } else {
                    weight(&m) * e
                }
            })
            .sum();
        sum * self.grid.volume()
    }

    /// Restrict to the modes selected by `keep`.
    pub fn restrict(&self, mut keep: impl FnMut(&Mode) -> bool) -> Self {
        self.map_modes(|m, c| if keep(m) { c } else { [ZERO; 3] })
    }

    /// The same trigonometric polynomial on another grid with the same
    /// period: zero-padded when `grid` is finer, truncated when coarser.
    pub fn on_grid(&self, grid: Grid) -> Result<Self, SpectralError> {
        if grid.period_scale() != self.grid.period_scale() {
            return Err(SpectralError::GridMismatch);
        }
        let coeffs = grid
            .modes()
            .map(|m| self.coeff(m.k).unwrap_or([ZERO; 3]))
            .collect();
        Ok(Self::from_raw(grid, coeffs))
    }

    /// Keep only the horizontal components `(w1, w2)`.
    pub fn horizontal_part(&self) -> Self {
        self.map_modes(|_, c| [c[0], c[1], ZERO])
    }

    /// `max_k |k·ŵ(k)|` (physical wavevector).
    pub fn max_divergence(&self) -> f64 {
        self.grid
            .modes()
            .map(|m| {
                let c = &self.coeffs[m.index];
                let [a, b, d] = m.wavevector;
                (c[0] * a + c[1] * b + c[2] * d).norm()
            })
            .fold(0.0, f64::max)
    }

    /// Divergence residual relative to the L² norm; zero for the zero field.
    pub fn relative_divergence(&self) -> f64 {
        let l2 = self.weighted_energy(|_| 1.0).sqrt();
        let div = self.max_divergence();
        if div == 0.0 {
            0.0
        } else {
            div / l2
        }
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs
            .iter()
            .all(|c| c.iter().all(|z| z.re.is_finite() && z.im.is_finite()))
    }

    /// Largest coefficient-wise deviation relative to the largest coefficient
    /// of `self`.
    pub fn relative_difference(&self, other: &Self) -> f64 {
        let scale = self
            .coeffs
            .iter()
            .flat_map(|c| c.iter().map(|z| z.norm()))
            .fold(0.0, f64::max);
        let diff = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .flat_map(|(a, b)| (0..3).map(move |d| (a[d] - b[d]).norm()))
            .fold(0.0, f64::max);
        if diff == 0.0 {
            0.0
        } else {
            diff / scale.max(f64::MIN_POSITIVE)
        }
    }

    /// Verify conjugate symmetry bitwise and a vanishing mean.
    pub fn check_reality(&self) -> Result<(), SpectralError> {
        for m in self.grid.modes() {
            let c = self.grid.conjugate_index(m.index);
            let (a, b) = (self.coeffs[m.index], self.coeffs[c]);
            if (0..3).any(|d| a[d] != b[d].conj()) {
                return Err(SpectralError::NotReal { k: m.k });
            }
            if m.is_mean() && a.iter().any(|z| *z != ZERO) {
                return Err(SpectralError::NonzeroMean);
            }
        }
        Ok(())
    }

    pub(crate) fn ensure_same_grid(&self, other: &Self) -> Result<(), SpectralError> {
        if self.grid != other.grid {
            return Err(SpectralError::GridMismatch);
        }
        Ok(())
    }

    pub(crate) fn coeffs_mut(&mut self) -> &mut [[Complex64; 3]] {
        &mut self.coeffs
    }

    pub(crate) fn from_raw(grid: Grid, coeffs: Vec<[Complex64; 3]>) -> Self {
        Self { grid, coeffs }
    }
}

impl SpectralScalarField {
    pub fn zeros(grid: Grid) -> Self {
        Self {
            grid,
            coeffs: vec![ZERO; grid.mode_count()],
        }
    }

    pub fn from_coeffs(grid: Grid, coeffs: Vec<Complex64>) -> Result<Self, SpectralError> {
        if coeffs.len() != grid.mode_count() {
            return Err(SpectralError::LengthMismatch {
                expected: grid.mode_count(),
                found: coeffs.len(),
            });
        }
        for m in grid.modes() {
            if coeffs[grid.conjugate_index(m.index)] != coeffs[m.index].conj() {
                return Err(SpectralError::NotReal { k: m.k });
            }
        }
        Ok(Self { grid, coeffs })
    }

    pub fn from_physical(grid: Grid, values: &[f64]) -> Self {
        let zeros = vec![0.0; grid.point_count()];
        let (coeffs, _) = analyze(&grid, values, &zeros);
        Self { grid, coeffs }
    }

    pub fn to_physical(&self) -> Vec<f64> {
        synthesize(&self.grid, &self.coeffs, None).0
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeff(&self, k: [i64; 3]) -> Option<Complex64> {
        self.grid.index_of(k).map(|i| self.coeffs[i])
    }

    /// `(2πL)³ Σ weight(k) |q̂(k)|²`.
    pub fn weighted_energy(&self, mut weight: impl FnMut(&Mode) -> f64) -> f64 {
        let sum: f64 = self
            .grid
            .modes()
            .map(|m| {
                let e = self.coeffs[m.index].norm_sqr();
                if e == 0.0 {
                    0.0
                } else {
                    weight(&m) * e
                }
            })
            .sum();
        sum * self.grid.volume()
    }

    /// `∇q` as a vector field.
    pub fn gradient(&self) -> SpectralVectorField {
        let coeffs = self
            .grid
            .modes()
            .map(|m| {
                let q = self.coeffs[m.index];
                let iq = Complex64::new(-q.im, q.re);
                m.wavevector.map(|k| iq * k)
            })
            .collect();
        SpectralVectorField::from_raw(self.grid, coeffs)
    }

    pub(crate) fn from_raw(grid: Grid, coeffs: Vec<Complex64>) -> Self {
        Self { grid, coeffs }
    }
}

/// Replace `c(k)` by `(c(k) + conj c(-k)) / 2` and clear the mean.
fn hermitize(grid: &Grid, coeffs: &mut [[Complex64; 3]]) {
    let count = grid.mode_count();
    for i in 0..count / 2 {
        let j = grid.conjugate_index(i);
        let (a, b) = (coeffs[i], coeffs[j]);
        let avg = [0, 1, 2].map(|d| (a[d] + b[d].conj()) * 0.5);
        coeffs[i] = avg;
        coeffs[j] = avg.map(|z| z.conj());
    }
    coeffs[count / 2] = [ZERO; 3];
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn sin_x3(grid: Grid) -> SpectralVectorField {
        let pts = grid.point_count();
        let n = grid.n();
        let mut u = vec![0.0; pts];
        for i in 0..n {
            for j in 0..n {
                for l in 0..n {
                    let x = grid.collocation_point([i, j, l]);
                    u[(i * n + j) * n + l] = (x[2] / grid.period_scale()).sin();
                }
            }
        }
        let z = vec![0.0; pts];
        SpectralVectorField::from_physical(grid, [&u, &z, &z])
    }

    #[test]
    fn sine_has_expected_coefficients() {
        let grid = Grid::new(8, 1.0).unwrap();
        let w = sin_x3(grid);
        let c = w.coeff([0, 0, 1]).unwrap()[0];
        assert!((c - Complex64::new(0.0, -0.5)).norm() < 1e-15);
        let energy = w.weighted_energy(|_| 1.0);
        assert!((energy - 4.0 * PI.powi(3)).abs() < 1e-12 * energy);
        w.check_reality().unwrap();
    }

    #[test]
    fn from_coeffs_rejects_non_hermitian() {
        let grid = Grid::new(4, 1.0).unwrap();
        let mut coeffs = vec![[ZERO; 3]; grid.mode_count()];
        coeffs[grid.index_of([1, 0, 0]).unwrap()][1] = Complex64::new(1.0, 0.0);
        assert!(matches!(
            SpectralVectorField::from_coeffs(grid, coeffs),
            Err(SpectralError::NotReal { .. })
        ));
    }

    #[test]
    fn physical_round_trip() {
        let grid = Grid::new(8, 1.5).unwrap();
        let w = SpectralVectorField::from_fn(grid, |m| {
            let s = (m.index as f64 * 0.7).sin();
            [Complex64::new(s, 0.3 * s), Complex64::new(-s, s), Complex64::new(0.1, s)]
        });
        let phys = w.to_physical();
        let back = SpectralVectorField::from_physical(grid, [&phys[0], &phys[1], &phys[2]]);
        assert!(w.relative_difference(&back) < 1e-13);
    }

    #[test]
    fn scalar_gradient_of_cosine() {
        let grid = Grid::new(8, 1.0).unwrap();
        let n = grid.n();
        let mut v = vec![0.0; grid.point_count()];
        for i in 0..n {
            for j in 0..n {
                for l in 0..n {
                    v[(i * n + j) * n + l] = grid.collocation_point([i, j, l])[0].cos();
                }
            }
        }
        let q = SpectralScalarField::from_physical(grid, &v);
        let g = q.gradient().to_physical();
        for i in 0..n {
            let x = grid.collocation_point([i, 0, 0])[0];
            assert!((g[0][i * n * n] + x.sin()).abs() < 1e-13);
        }
    }
}
