//! Three-dimensional complex FFTs and the real-field packing used by the
//! pseudo-spectral products.
//!
//! Two real fields `a`, `b` travel through one complex transform as
//! `a + i b`. The unpacking step
//! `â(k) = (Z(k) + conj Z(-k)) / 2`, `b̂(k) = -i (Z(k) - conj Z(-k)) / 2`
//! produces coefficient arrays that are conjugate-symmetric bitwise, not
//! just up to round-off.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::Grid;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Planned forward/inverse transforms for an `n³` periodic box.
///
/// The forward transform is unnormalized (`Σ x e^{-ik·x}`) and so is the
/// inverse (`Σ X e^{+ik·x}`); callers divide by `n³` on the analysis side.
pub struct Fft3 {
    n: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    /// Buffer position of retained mode `i` and of its negative.
    positions: Vec<(usize, usize)>,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Direction {
    Forward,
    Inverse,
}

impl Fft3 {
    pub fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        let grid = Grid::new(n, 1.0).expect("valid grid size");
        let positions = grid
            .modes()
            .map(|m| (grid.fft_index(m.k), grid.fft_index(m.k.map(|k| -k))))
            .collect();
        Self {
            n,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
            positions,
        }
    }

    /// Process-wide plan cache keyed by `n`.
    pub fn shared(n: usize) -> Arc<Fft3> {
        static CACHE: OnceLock<Mutex<HashMap<usize, Arc<Fft3>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let mut map = cache.lock().expect("fft plan cache poisoned");
        map.entry(n).or_insert_with(|| Arc::new(Fft3::new(n))).clone()
    }

    pub fn forward(&self, data: &mut [Complex64]) {
        self.transform(data, Direction::Forward);
    }

    pub fn inverse(&self, data: &mut [Complex64]) {
        self.transform(data, Direction::Inverse);
    }

    fn plan(&self, dir: Direction) -> &Arc<dyn Fft<f64>> {
        match dir {
            Direction::Forward => &self.forward,
            Direction::Inverse => &self.inverse,
        }
    }

    fn transform(&self, data: &mut [Complex64], dir: Direction) {
        let n = self.n;
        assert_eq!(data.len(), n * n * n, "buffer does not match n³");
        let mut buf = vec![Complex64::new(0.0, 0.0); data.len()];

        // axis 3 (contiguous)
        self.lines(data, dir);

        // axis 2: transpose each n×n plane, transform rows, transpose back
        transpose_planes(data, &mut buf, n, n);
        self.lines(&mut buf, dir);
        transpose_planes(&buf, data, n, n);

        // axis 1: view as n × n² and transpose
        transpose(data, &mut buf, n, n * n);
        self.lines(&mut buf, dir);
        transpose(&buf, data, n * n, n);
    }

    /// Transform every contiguous run of `n` values.
    fn lines(&self, data: &mut [Complex64], dir: Direction) {
        let plan = self.plan(dir);
        let n = self.n;
        #[cfg(feature = "parallel")]
        {
            let chunk = n * n;
            data.par_chunks_mut(chunk).for_each(|block| {
                let mut scratch = vec![Complex64::new(0.0, 0.0); plan.get_inplace_scratch_len()];
                plan.process_with_scratch(block, &mut scratch);
            });
        }
        #[cfg(not(feature = "parallel"))]
        {
            let _ = n;
            let mut scratch = vec![Complex64::new(0.0, 0.0); plan.get_inplace_scratch_len()];
            plan.process_with_scratch(data, &mut scratch);
        }
    }
}

/// `dst[c][r] = src[r][c]` for a `rows × cols` row-major matrix.
fn transpose(src: &[Complex64], dst: &mut [Complex64], rows: usize, cols: usize) {
    for r in 0..rows {
        let row = &src[r * cols..(r + 1) * cols];
        for (c, v) in row.iter().enumerate() {
            dst[c * rows + r] = *v;
        }
    }
}

/// Transpose each consecutive `rows × cols` block independently.
fn transpose_planes(src: &[Complex64], dst: &mut [Complex64], rows: usize, cols: usize) {
    let plane = rows * cols;
    for (s, d) in src.chunks(plane).zip(dst.chunks_mut(plane)) {
        transpose(s, d, rows, cols);
    }
}

/// Evaluate up to two coefficient arrays on the collocation grid.
///
/// Returns the physical values of the fields with coefficients `a` and `b`
/// (`b` may be absent, in which case the second output is all zeros).
pub fn synthesize(grid: &Grid, a: &[Complex64], b: Option<&[Complex64]>) -> (Vec<f64>, Vec<f64>) {
    let fft = Fft3::shared(grid.n());
    debug_assert_eq!(a.len(), fft.positions.len());
    let mut buf = vec![Complex64::new(0.0, 0.0); grid.point_count()];
    match b {
        Some(b) => {
            for ((&(pos, _), za), zb) in fft.positions.iter().zip(a).zip(b) {
                buf[pos] = Complex64::new(za.re - zb.im, za.im + zb.re);
            }
        }
        None => {
            for (&(pos, _), za) in fft.positions.iter().zip(a) {
                buf[pos] = *za;
            }
        }
    }
    fft.inverse(&mut buf);
    let re = buf.iter().map(|z| z.re).collect();
    let im = buf.iter().map(|z| z.im).collect();
    (re, im)
}

/// Fourier coefficients of two real fields sampled on the collocation grid,
/// restricted to the retained lattice.
pub fn analyze(grid: &Grid, a: &[f64], b: &[f64]) -> (Vec<Complex64>, Vec<Complex64>) {
    let fft = Fft3::shared(grid.n());
    let mut buf: Vec<Complex64> = a.iter().zip(b).map(|(&x, &y)| Complex64::new(x, y)).collect();
    fft.forward(&mut buf);
    let scale = 1.0 / grid.point_count() as f64;
    let count = grid.mode_count();
    let mut out_a = vec![Complex64::new(0.0, 0.0); count];
    let mut out_b = vec![Complex64::new(0.0, 0.0); count];
    for (i, &(pos, neg)) in fft.positions.iter().enumerate() {
        let z = buf[pos] * scale;
        let zc = buf[neg].conj() * scale;
        out_a[i] = (z + zc) * 0.5;
        // -i (z - zc) / 2
        let d = z - zc;
        out_b[i] = Complex64::new(d.im * 0.5, -d.re * 0.5);
    }
    (out_a, out_b)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive_dft(data: &[Complex64], n: usize, sign: f64) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); data.len()];
        let w = |j: usize, k: usize| {
            let ang = sign * 2.0 * std::f64::consts::PI * (j * k % n) as f64 / n as f64;
            Complex64::new(ang.cos(), ang.sin())
        };
        for k1 in 0..n {
            for k2 in 0..n {
                for k3 in 0..n {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for j1 in 0..n {
                        for j2 in 0..n {
                            for j3 in 0..n {
                                acc += data[(j1 * n + j2) * n + j3] * w(j1, k1) * w(j2, k2) * w(j3, k3);
                            }
                        }
                    }
                    out[(k1 * n + k2) * n + k3] = acc;
                }
            }
        }
        out
    }

    #[test]
    fn matches_naive_dft() {
        let n = 4;
        let data: Vec<Complex64> = (0..n * n * n)
            .map(|i| Complex64::new((i as f64 * 0.37).sin(), (i as f64 * 0.11).cos()))
            .collect();
        let expect = naive_dft(&data, n, -1.0);
        let mut got = data.clone();
        Fft3::new(n).forward(&mut got);
        for (g, e) in got.iter().zip(&expect) {
            assert!((g - e).norm() < 1e-12);
        }
        let expect_inv = naive_dft(&data, n, 1.0);
        let mut got = data;
        Fft3::new(n).inverse(&mut got);
        for (g, e) in got.iter().zip(&expect_inv) {
            assert!((g - e).norm() < 1e-12);
        }
    }

    #[test]
    fn packed_round_trip_is_hermitian() {
        let grid = Grid::new(8, 1.0).unwrap();
        let pts = grid.point_count();
        let a: Vec<f64> = (0..pts).map(|i| (i as f64 * 0.013).sin()).collect();
        let b: Vec<f64> = (0..pts).map(|i| (i as f64 * 0.029).cos()).collect();
        let (ca, cb) = analyze(&grid, &a, &b);
        for m in grid.modes() {
            let c = grid.conjugate_index(m.index);
            assert_eq!(ca[c], ca[m.index].conj());
            assert_eq!(cb[c], cb[m.index].conj());
        }
        // Data band-limited to the retained lattice survives a round trip.
        let (ra, rb) = synthesize(&grid, &ca, Some(&cb));
        let (ca2, cb2) = analyze(&grid, &ra, &rb);
        for m in grid.modes() {
            assert!((ca2[m.index] - ca[m.index]).norm() < 1e-14);
            assert!((cb2[m.index] - cb[m.index]).norm() < 1e-14);
        }
    }
}
