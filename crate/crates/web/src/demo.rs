use hfns_core::estimates::{compute_constants, gronwall_envelope};
use hfns_core::fields::{random_solenoidal, single_mode, taylor_green};
use hfns_core::model::{check_state, simulate_with, Forcing, Integrator, Retention, SimParams};
use hfns_core::spectral::{apply_horizontal_filter_inverse, norms, SpectralScalarField, SpectralVectorField};
use num_complex::Complex64;

pub(crate) fn params(n: usize, nu: f64, alpha: f64, dt: f64, final_time: f64, sample_dt: f64) -> Result<SimParams, String> {
    let p = SimParams {
        n,
        nu,
        alpha,
        dt,
        final_time,
        sample_dt,
        ..SimParams::default()
    };
    p.validate().map_err(|e| e.to_string())?;
    Ok(p)
}

/// Steady shear force `F sin(x₁) ê₂`.
pub(crate) fn shear_forcing(p: &SimParams, amplitude: f64) -> Result<Forcing, String> {
    let field = single_mode(p.grid(), [1, 0, 0], amplitude, [0.0, 1.0, 0.0]).map_err(|e| e.to_string())?;
    Forcing::new(field).map_err(|e| e.to_string())
}

/// Taylor–Green flow advanced step by step under the shear force.
pub struct Flow {
    params: SimParams,
    integrator: Integrator,
    state: SpectralVectorField,
    steps: usize,
}

impl Flow {
    pub fn new(n: usize, nu: f64, alpha: f64, amplitude: f64, dt: f64) -> Result<Self, String> {
        let p = params(n, nu, alpha, dt, 0.0, dt)?;
        let f = shear_forcing(&p, amplitude)?;
        let state = taylor_green(p.grid());
        check_state(&state, &p).map_err(|e| e.to_string())?;
        Ok(Self {
            integrator: Integrator::new(&f, &p).map_err(|e| e.to_string())?,
            params: p,
            state,
            steps: 0,
        })
    }

    pub fn advance(&mut self, steps: usize) -> Result<(), String> {
        for _ in 0..steps {
            self.state = self.integrator.step(&self.state).map_err(|e| e.to_string())?;
            self.steps += 1;
        }
        Ok(())
    }

    pub fn time(&self) -> f64 {
        self.steps as f64 * self.params.dt
    }

    pub fn energy(&self) -> f64 {
        norms(&self.state, self.params.alpha).vh_sq
    }

    pub fn n(&self) -> usize {
        self.params.n
    }

    /// Vertical vorticity `∂₁w₂ - ∂₂w₁` on the plane `x₃ = 0`, row-major
    /// with `x₁` along rows.
    pub fn vorticity_plane(&self) -> Vec<f64> {
        let grid = *self.state.grid();
        let coeffs = self
            .state
            .coeffs()
            .iter()
            .zip(grid.modes())
            .map(|(c, m)| {
                let [k1, k2, _] = m.wavevector;
                let z = c[1] * k1 - c[0] * k2;
                Complex64::new(-z.im, z.re)
            })
            .collect();
        let omega = SpectralScalarField::from_coeffs(grid, coeffs).expect("curl of a real field is real");
        plane(&omega.to_physical(), grid.n())
    }
}

/// Values at `x₃ = 0` of a field sampled on the `n³` collocation grid.
pub(crate) fn plane(values: &[f64], n: usize) -> Vec<f64> {
    (0..n * n).map(|ij| values[ij * n]).collect()
}

/// Diverging blue-white-red RGBA image, symmetric about zero.
pub fn diverging_rgba(values: &[f64]) -> Vec<u8> {
    let scale = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut out = Vec::with_capacity(4 * values.len());
    for &v in values {
        let s = if scale > 0.0 { (v / scale).clamp(-1.0, 1.0) } else { 0.0 };
        let fade = |x: f64| (255.0 * (1.0 - x.abs())).round() as u8;
        let (r, g, b) = if s >= 0.0 {
            (255, fade(s), fade(s))
        } else {
            (fade(s), fade(s), 255)
        };
        out.extend_from_slice(&[r, g, b, 255]);
    }
    out
}

/// Rows `[t, k₀(t), envelope(t), k₁(0)]` of a forced Taylor–Green run.
pub fn energy_envelope(n: usize, nu: f64, alpha: f64, amplitude: f64, final_time: f64) -> Result<Vec<[f64; 4]>, String> {
    let sample_dt = 0.05;
    let steps = (final_time / sample_dt).round().max(1.0);
    let p = params(n, nu, alpha, 5e-3, steps * sample_dt, sample_dt)?;
    let f = shear_forcing(&p, amplitude)?;
    let traj = simulate_with(&taylor_green(p.grid()), &f, &p, Retention::Diagnostics).map_err(|e| e.to_string())?;
    let c = compute_constants(&f, &p, 0.0).map_err(|e| e.to_string())?;
    let rate = p.nu * c.lambda1;
    let k00 = traj.norm(0).vh_sq;
    let k10 = k00 + c.big_k1 / rate;
    Ok((0..traj.len())
        .map(|j| {
            let t = traj.time(j);
            [t, traj.norm(j).vh_sq, gronwall_envelope(k00, c.big_k1, rate, t), k10]
        })
        .collect())
}

/// First component of a random divergence-free field smoothed by `A_h⁻¹`,
/// on the plane `x₃ = 0`.
pub fn filtered_plane(n: usize, alpha: f64, seed: u64) -> Result<Vec<f64>, String> {
    let p = params(n, 0.1, alpha, 0.1, 0.0, 0.1)?;
    let w = random_solenoidal(p.grid(), seed, -1.0, n as f64).map_err(|e| e.to_string())?;
    let smooth = apply_horizontal_filter_inverse(&w, alpha).map_err(|e| e.to_string())?;
    let [u, _, _] = smooth.to_physical();
    Ok(plane(&u, n))
}

/// `1/(1 + α²κ²)` for `κ = 0..=kmax`.
pub fn filter_response(alpha: f64, kmax: usize) -> Vec<f64> {
    (0..=kmax)
        .map(|k| 1.0 / (1.0 + alpha * alpha * (k * k) as f64))
        .collect()
}
