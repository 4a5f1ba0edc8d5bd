use std::f64::consts::PI;

use super::SpectralError;

/// Truncated Fourier lattice on the torus `(-πL, πL)³`.
///
/// A grid with `n` collocation points per axis retains the integer
/// wavenumbers `|k_i| <= n/2 - 1` on every axis. The unmatched Nyquist plane
/// is never stored, so every retained `k` has its partner `-k` retained too.
///
/// Coefficients are stored in lexicographic order of `(k1, k2, k3)` with
/// `k1` slowest. Because the lattice is symmetric, the mode `-k` sits at
/// `mode_count() - 1 - index(k)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    n: usize,
    period_scale: f64,
}

/// One retained lattice point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mode {
    /// Position in coefficient storage.
    pub index: usize,
    /// Integer wavenumber triple.
    pub k: [i64; 3],
    /// Physical wavevector `k / L`.
    pub wavevector: [f64; 3],
}

impl Mode {
    #[inline]
    pub fn k_sq(&self) -> f64 {
        let [a, b, c] = self.wavevector;
        a * a + b * b + c * c
    }

    /// `|k_h|² = (k1² + k2²) / L²`.
    #[inline]
    pub fn kh_sq(&self) -> f64 {
        let [a, b, _] = self.wavevector;
        a * a + b * b
    }

    #[inline]
    pub fn is_mean(&self) -> bool {
        self.k == [0, 0, 0]
    }

    /// True on the vertical column `k1 = k2 = 0` (including the mean).
    #[inline]
    pub fn is_horizontal_mean(&self) -> bool {
        self.k[0] == 0 && self.k[1] == 0
    }

    #[inline]
    pub fn max_abs_index(&self) -> i64 {
        self.k.iter().map(|k| k.abs()).max().unwrap_or(0)
    }
}

impl Grid {
    pub fn new(n: usize, period_scale: f64) -> Result<Self, SpectralError> {
        if n < 4 || !n.is_multiple_of(2) {
            return Err(SpectralError::InvalidResolution { n });
        }
        if !(period_scale.is_finite() && period_scale > 0.0) {
            return Err(SpectralError::InvalidPeriodScale(period_scale));
        }
        Ok(Self { n, period_scale })
    }

    /// Collocation points per axis.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn period_scale(&self) -> f64 {
        self.period_scale
    }

    /// Largest retained `|k_i|`, i.e. `n/2 - 1`.
    pub fn max_index(&self) -> i64 {
        (self.n / 2) as i64 - 1
    }

    /// Retained wavenumbers per axis (`n - 1`).
    pub fn side(&self) -> usize {
        self.n - 1
    }

    pub fn mode_count(&self) -> usize {
        let s = self.side();
        s * s * s
    }

    pub fn point_count(&self) -> usize {
        self.n * self.n * self.n
    }

    /// Volume of the periodic box, `(2πL)³`.
    pub fn volume(&self) -> f64 {
        (2.0 * PI * self.period_scale).powi(3)
    }

    /// Largest per-axis wavenumber kept by the two-thirds rule: the biggest
    /// `K` with `3K < n`, so products of modes `|k_i| <= K` never alias back
    /// onto `|k_i| <= K`.
    pub fn dealias_cutoff(&self) -> i64 {
        (((self.n - 1) / 3) as i64).min(self.max_index())
    }

    pub fn index_of(&self, k: [i64; 3]) -> Option<usize> {
        let m = self.max_index();
        if k.iter().any(|&ki| ki.abs() > m) {
            return None;
        }
        let s = self.side();
        let [a, b, c] = k.map(|ki| (ki + m) as usize);
        Some((a * s + b) * s + c)
    }

    /// Storage index of `-k` given the index of `k`.
    #[inline]
    pub fn conjugate_index(&self, index: usize) -> usize {
        self.mode_count() - 1 - index
    }

    pub fn mode(&self, index: usize) -> Mode {
        let s = self.side();
        let m = self.max_index();
        let c = (index % s) as i64 - m;
        let b = ((index / s) % s) as i64 - m;
        let a = (index / (s * s)) as i64 - m;
        self.make_mode(index, [a, b, c])
    }

    fn make_mode(&self, index: usize, k: [i64; 3]) -> Mode {
        let inv_l = 1.0 / self.period_scale;
        Mode {
            index,
            k,
            wavevector: k.map(|ki| ki as f64 * inv_l),
        }
    }

    /// Every retained mode in storage order.
    pub fn modes(&self) -> impl Iterator<Item = Mode> + '_ {
        let m = self.max_index();
        let s = self.side() as i64;
        (0..self.mode_count()).map(move |index| {
            let i = index as i64;
            let k = [i / (s * s) - m, (i / s) % s - m, i % s - m];
            self.make_mode(index, k)
        })
    }

    /// Flat index into an `n³` FFT buffer holding wavenumber `k` (negative
    /// wavenumbers wrap to `n + k`).
    pub fn fft_index(&self, k: [i64; 3]) -> usize {
        let n = self.n as i64;
        let [a, b, c] = k.map(|ki| ki.rem_euclid(n) as usize);
        (a * self.n + b) * self.n + c
    }

    /// Physical coordinates of collocation point `(i, j, l)`, with the grid
    /// anchored at the origin of one period cell.
    pub fn collocation_point(&self, ijl: [usize; 3]) -> [f64; 3] {
        let h = 2.0 * PI * self.period_scale / self.n as f64;
        ijl.map(|i| i as f64 * h)
    }

    /// Poincaré constant on zero-mean fields, `1/L²`.
    pub fn lambda1(&self) -> f64 {
        1.0 / (self.period_scale * self.period_scale)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smallest_grid_is_unit_cube_lattice() {
        let g = Grid::new(4, 1.0).unwrap();
        assert_eq!(g.max_index(), 1);
        assert_eq!(g.mode_count(), 27);
        let ks: Vec<_> = g.modes().map(|m| m.k).collect();
        assert_eq!(ks.first(), Some(&[-1, -1, -1]));
        assert_eq!(ks.last(), Some(&[1, 1, 1]));
        for m in g.modes() {
            for d in 0..3 {
                assert_eq!(m.wavevector[d], m.k[d] as f64);
            }
        }
    }

    #[test]
    fn scaled_lattice() {
        let g = Grid::new(8, 2.0).unwrap();
        assert_eq!(g.max_index(), 3);
        assert_eq!(g.mode_count(), 343);
        let m = g.mode(g.index_of([3, -3, 1]).unwrap());
        assert_eq!(m.wavevector, [1.5, -1.5, 0.5]);
    }

    #[test]
    fn rejects_odd_or_small_resolution() {
        assert!(matches!(Grid::new(3, 1.0), Err(SpectralError::InvalidResolution { n: 3 })));
        assert!(Grid::new(2, 1.0).is_err());
        assert!(Grid::new(33, 1.0).is_err());
        assert!(Grid::new(8, 0.0).is_err());
        assert!(Grid::new(8, f64::NAN).is_err());
    }

    #[test]
    fn conjugate_index_negates_wavenumber() {
        let g = Grid::new(8, 1.0).unwrap();
        for m in g.modes() {
            let c = g.mode(g.conjugate_index(m.index));
            assert_eq!(c.k, m.k.map(|k| -k));
            assert_eq!(g.index_of(m.k), Some(m.index));
        }
    }

    #[test]
    fn dealias_cutoff_never_aliases() {
        for n in (4..=64).step_by(2) {
            let g = Grid::new(n, 1.0).unwrap();
            let k = g.dealias_cutoff();
            assert!(3 * k < n as i64, "n = {n}");
            assert!(3 * (k + 1) >= n as i64 || k == g.max_index());
        }
        assert_eq!(Grid::new(32, 1.0).unwrap().dealias_cutoff(), 10);
        assert_eq!(Grid::new(4, 1.0).unwrap().dealias_cutoff(), 1);
    }
}
