//! Named initial conditions and forcing shapes.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::spectral::{leray_project, Grid, SpectralVectorField};

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum FieldSpecError {
    #[error("wavenumber {k:?} is zero or outside the retained lattice |k_i| <= {max}")]
    WavenumberOutOfRange { k: [i64; 3], max: i64 },
    #[error("direction {direction:?} is not orthogonal to k = {k:?}")]
    NotSolenoidal { k: [i64; 3], direction: [f64; 3] },
    #[error("direction must be a nonzero finite vector")]
    ZeroDirection,
    #[error("cutoff {0} must be positive")]
    BadCutoff(f64),
}

/// `amplitude · d̂ · sin(k·x/L)` with `d̂` the normalized direction.
pub fn single_mode(
    grid: Grid,
    k: [i64; 3],
    amplitude: f64,
    direction: [f64; 3],
) -> Result<SpectralVectorField, FieldSpecError> {
    let max = grid.max_index();
    let idx = match grid.index_of(k) {
        Some(i) if k != [0, 0, 0] => i,
        _ => return Err(FieldSpecError::WavenumberOutOfRange { k, max }),
    };
    let norm = direction.iter().map(|d| d * d).sum::<f64>().sqrt();
    if !(norm.is_finite() && norm > 0.0) {
        return Err(FieldSpecError::ZeroDirection);
    }
    let d = direction.map(|x| x / norm);
    let kf = k.map(|x| x as f64);
    let kn = kf.iter().map(|x| x * x).sum::<f64>().sqrt();
    let dot: f64 = d.iter().zip(&kf).map(|(a, b)| a * b).sum();
    if dot.abs() > 1e-12 * kn {
        return Err(FieldSpecError::NotSolenoidal { k, direction });
    }
    let cidx = grid.conjugate_index(idx);
    let half = 0.5 * amplitude;
    Ok(SpectralVectorField::from_fn(grid, |m| {
        let z = if m.index == idx {
            Complex64::new(0.0, -half)
        } else if m.index == cidx {
            Complex64::new(0.0, half)
        } else {
            return [Complex64::new(0.0, 0.0); 3];
        };
        d.map(|x| z * x)
    }))
}

/// Taylor–Green vortex `(sin x1 cos x2, -cos x1 sin x2, 0)` (in units of `x/L`).
pub fn taylor_green(grid: Grid) -> SpectralVectorField {
    // sin x cos y = ½ sin(x+y) + ½ sin(x-y); cos x sin y = ½ sin(x+y) - ½ sin(x-y)
    let a = single_mode(grid, [1, 1, 0], 0.5 * 2f64.sqrt(), [1.0, -1.0, 0.0]).expect("retained on every grid");
    let b = single_mode(grid, [1, -1, 0], 0.5 * 2f64.sqrt(), [1.0, 1.0, 0.0]).expect("retained on every grid");
    a.add(&b).expect("same grid")
}

/// Seeded random divergence-free field with amplitude spectrum `|k|^slope`
/// on the integer shell `0 < |k| <= cutoff`.
pub fn random_solenoidal(
    grid: Grid,
    seed: u64,
    spectrum_slope: f64,
    cutoff: f64,
) -> Result<SpectralVectorField, FieldSpecError> {
    if !(cutoff.is_finite() && cutoff > 0.0) {
        return Err(FieldSpecError::BadCutoff(cutoff));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let field = SpectralVectorField::from_fn(grid, |m| {
        // Draw for every mode so the stream does not depend on the cutoff.
        let mut draw = || {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            Complex64::new(re, im)
        };
        let c = [draw(), draw(), draw()];
        let kn = m.k.iter().map(|&k| (k * k) as f64).sum::<f64>().sqrt();
        if m.is_mean() || kn > cutoff {
            return [Complex64::new(0.0, 0.0); 3];
        }
        let s = kn.powf(spectrum_slope);
        c.map(|z| z * s)
    });
    Ok(leray_project(&field))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::norms;
    use std::f64::consts::PI;

    #[test]
    fn taylor_green_matches_physical_formula() {
        let grid = Grid::new(8, 1.0).unwrap();
        let w = taylor_green(grid);
        let phys = w.to_physical();
        let n = grid.n();
        for i in 0..n {
            for j in 0..n {
                let x = grid.collocation_point([i, j, 0]);
                let idx = (i * n + j) * n;
                assert!((phys[0][idx] - x[0].sin() * x[1].cos()).abs() < 1e-14);
                assert!((phys[1][idx] + x[0].cos() * x[1].sin()).abs() < 1e-14);
                assert!(phys[2][idx].abs() < 1e-14);
            }
        }
        let r = norms(&w, 0.0);
        assert!((r.l2 * r.l2 - 4.0 * PI.powi(3)).abs() < 1e-11);
        assert!((r.grad_h * r.grad_h - 8.0 * PI.powi(3)).abs() < 1e-11);
        assert_eq!(w.max_divergence(), 0.0);
    }

    #[test]
    fn single_mode_validation() {
        let grid = Grid::new(8, 1.0).unwrap();
        assert!(single_mode(grid, [0, 0, 1], 1.0, [1.0, 0.0, 0.0]).is_ok());
        assert!(matches!(
            single_mode(grid, [0, 0, 1], 1.0, [0.0, 0.0, 1.0]),
            Err(FieldSpecError::NotSolenoidal { .. })
        ));
        assert!(single_mode(grid, [0, 0, 4], 1.0, [1.0, 0.0, 0.0]).is_err());
        assert!(single_mode(grid, [0, 0, 0], 1.0, [1.0, 0.0, 0.0]).is_err());
        assert!(single_mode(grid, [1, 0, 0], 1.0, [0.0, 0.0, 0.0]).is_err());
    }

    #[test]
    fn random_field_is_seeded_and_solenoidal() {
        let grid = Grid::new(8, 1.0).unwrap();
        let a = random_solenoidal(grid, 7, -1.0, 3.0).unwrap();
        let b = random_solenoidal(grid, 7, -1.0, 3.0).unwrap();
        let c = random_solenoidal(grid, 8, -1.0, 3.0).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert!(a.relative_divergence() < 1e-14);
        a.check_reality().unwrap();
    }
}
