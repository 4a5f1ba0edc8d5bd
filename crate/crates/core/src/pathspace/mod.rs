//! Path space: trajectories as points, the time-shift semigroup
//! `S(t)w = w(· + t)`, the metric
//!
//! ```text
//! d(w1, w2) = Σ_{n>=1} 2^{-n} min{1, ‖w1 - w2‖_{L²(0,n;V_h)}}
//! ```
//!
//! truncated after `N` terms, and the Hausdorff semidistance between finite
//! trajectory sets. Time integrals use the trapezoidal rule on the sample
//! lattice; shifts never interpolate between samples.

mod trajectory;

use thiserror::Error;

use crate::estimates::Constants;
use crate::numerics::cumulative_trapezoid;
use crate::spectral::{filter_symbol, SpectralError};

pub use trajectory::{Sample, Trajectory};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PathError {
    #[error("time {t} is not on the sample lattice")]
    OffLattice { t: f64 },
    #[error("time {t} lies beyond the trajectory span {span}")]
    BeyondSpan { t: f64, span: f64 },
    #[error("trajectories live on different grids or filter scales")]
    GridMismatch,
    #[error("trajectories use different sample steps ({0} vs {1})")]
    LatticeMismatch(f64, f64),
    #[error("trajectory spans {have}, at least {need} is required")]
    InsufficientSpan { need: f64, have: f64 },
    #[error("empty trajectory or trajectory set")]
    Empty,
    #[error("trajectory holds diagnostics only; states are required")]
    StatesNotRetained,
    #[error(transparent)]
    Spectral(#[from] SpectralError),
}

/// Truncation of the metric series.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PathMetricConfig {
    pub n_terms: usize,
}

impl Default for PathMetricConfig {
    fn default() -> Self {
        Self { n_terms: 20 }
    }
}

impl PathMetricConfig {
    /// Upper bound on the discarded tail, `Σ_{n>N} 2^{-n} = 2^{-N}`.
    pub fn truncation_bound(&self) -> f64 {
        0.5f64.powi(self.n_terms as i32)
    }
}

/// Truncated metric value with its tail certificate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricValue {
    pub value: f64,
    pub truncation_bound: f64,
}

/// `S(t)`: the path restarted `t` later. `t` must be a lattice multiple of
/// the sample step inside the span.
pub fn time_shift(traj: &Trajectory, t: f64) -> Result<Trajectory, PathError> {
    let j = traj.index_after(t)?;
    Ok(traj.shifted_by(j))
}

fn check_compatible(a: &Trajectory, b: &Trajectory) -> Result<(), PathError> {
    if a.params().grid() != b.params().grid() || a.alpha() != b.alpha() {
        return Err(PathError::GridMismatch);
    }
    let (ha, hb) = (a.sample_dt(), b.sample_dt());
    if (ha - hb).abs() > 1e-12 * ha.max(hb) {
        return Err(PathError::LatticeMismatch(ha, hb));
    }
    Ok(())
}

/// `‖a(s_j) - b(s_j)‖²_{V_h}` for `j = 0..count`.
fn squared_distances(a: &Trajectory, b: &Trajectory, count: usize) -> Result<Vec<f64>, PathError> {
    let alpha = a.alpha();
    (0..count)
        .map(|j| {
            let (wa, wb) = match (a.state(j), b.state(j)) {
                (Some(x), Some(y)) => (x, y),
                _ => return Err(PathError::StatesNotRetained),
            };
            let diff = wa.sub(wb)?;
            Ok(diff.weighted_energy(|m| filter_symbol(m, alpha)))
        })
        .collect()
}

/// `(∫_{t_lo}^{t_hi} ‖a - b‖²_{V_h} ds)^{1/2}` with `s` measured from the
/// start of each path.
pub fn window_distance(a: &Trajectory, b: &Trajectory, t_lo: f64, t_hi: f64) -> Result<f64, PathError> {
    check_compatible(a, b)?;
    let lo = a.index_after(t_lo)?;
    let hi = a.index_after(t_hi)?;
    b.index_after(t_hi)?;
    if hi < lo {
        return Err(PathError::OffLattice { t: t_hi });
    }
    let sq = squared_distances(a, b, hi + 1)?;
    let integral = cumulative_trapezoid(&sq[lo..=hi], a.sample_dt());
    Ok(integral.last().copied().unwrap_or(0.0).max(0.0).sqrt())
}

/// Truncated path metric `d_N(a, b)`.
pub fn path_metric(a: &Trajectory, b: &Trajectory, cfg: &PathMetricConfig) -> Result<MetricValue, PathError> {
    check_compatible(a, b)?;
    let need = cfg.n_terms as f64;
    let h = a.sample_dt();
    let last = |t: &Trajectory| {
        t.index_after(need).map_err(|_| PathError::InsufficientSpan { need, have: t.span() })
    };
    let end = last(a)?;
    last(b)?;
    let sq = squared_distances(a, b, end + 1)?;
    let cum = cumulative_trapezoid(&sq, h);
    let mut value = 0.0;
    let mut weight = 1.0;
    for n in 1..=cfg.n_terms {
        weight *= 0.5;
        let j = a.index_after(n as f64)?;
        value += weight * cum[j].max(0.0).sqrt().min(1.0);
    }
    Ok(MetricValue {
        value,
        truncation_bound: cfg.truncation_bound(),
    })
}

/// `δ(X, Y) = sup_{x∈X} inf_{y∈Y} d(x, y)` over finite sets.
pub fn hausdorff_semidistance(
    xs: &[Trajectory],
    ys: &[Trajectory],
    cfg: &PathMetricConfig,
) -> Result<f64, PathError> {
    if xs.is_empty() || ys.is_empty() {
        return Err(PathError::Empty);
    }
    let mut sup = 0.0f64;
    for x in xs {
        let mut inf = f64::INFINITY;
        for y in ys {
            inf = inf.min(path_metric(x, y, cfg)?.value);
        }
        sup = sup.max(inf);
    }
    Ok(sup)
}

/// Result of scanning a trajectory for entry into the absorbing ball
/// `‖w‖²_{V_h} <= 2K₁/(νλ₁)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AbsorbingOutcome {
    /// From sample `index` (time `time`) on, every sample is inside.
    Entered { index: usize, time: f64 },
    /// Some sample at the end of the span is still outside.
    NeverWithinSpan,
    /// `K₁ = 0`: the ball is the single point 0 and the path is not zero.
    DegenerateThreshold,
}

/// Absorbing-ball radius squared `2K₁/(νλ₁)`.
pub fn absorbing_threshold(c: &Constants, nu: f64) -> f64 {
    2.0 * c.big_k1 / (nu * c.lambda1)
}

/// Earliest time after which membership in the absorbing ball persists to
/// the end of the span.
pub fn absorbing_check(traj: &Trajectory, c: &Constants) -> AbsorbingOutcome {
    let threshold = absorbing_threshold(c, traj.params().nu);
    let vh: Vec<f64> = traj.norms().map(|n| n.vh_sq).collect();
    if c.big_k1 == 0.0 && vh.iter().any(|&v| v > 0.0) {
        return AbsorbingOutcome::DegenerateThreshold;
    }
    match vh.iter().rposition(|&v| v > threshold) {
        None => AbsorbingOutcome::Entered {
            index: 0,
            time: traj.time(0),
        },
        Some(last_out) if last_out + 1 < vh.len() => AbsorbingOutcome::Entered {
            index: last_out + 1,
            time: traj.time(last_out + 1),
        },
        Some(_) => AbsorbingOutcome::NeverWithinSpan,
    }
}

/// Closed-form entry time predicted by the Gronwall envelope: the smallest
/// `t₁ >= 0` with `k₀ e^{-νλ₁t₁} <= K₁/(νλ₁)`.
pub fn gronwall_entry_time(k0: f64, big_k1: f64, nu: f64, lambda1: f64) -> f64 {
    let rate = nu * lambda1;
    let target = big_k1 / rate;
    if k0 <= target {
        0.0
    } else if target <= 0.0 {
        f64::INFINITY
    } else {
        (k0 / target).ln() / rate
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::single_mode;
    use crate::model::SimParams;
    use crate::spectral::{norms, SpectralVectorField};

    fn params(sample_dt: f64) -> SimParams {
        SimParams {
            n: 4,
            alpha: 0.5,
            dt: sample_dt,
            sample_dt,
            final_time: 0.0,
            ..SimParams::default()
        }
    }

    fn constant_path(p: SimParams, w: &SpectralVectorField, len: usize) -> Trajectory {
        Trajectory::from_states(p, 0.0, vec![w.clone(); len], None).unwrap()
    }

    /// Field with `‖w‖²_{V_h} = target`.
    fn field_with_vh(p: &SimParams, target: f64) -> SpectralVectorField {
        let w = single_mode(p.grid(), [1, 0, 0], 1.0, [0.0, 1.0, 0.0]).unwrap();
        let vh = norms(&w, p.alpha).vh_sq;
        w.scaled((target / vh).sqrt())
    }

    #[test]
    fn shift_examples() {
        let p = params(0.5);
        let states: Vec<_> = (0..10)
            .map(|j| field_with_vh(&p, 1.0 + j as f64))
            .collect();
        let traj = Trajectory::from_states(p, 0.0, states, None).unwrap();
        assert_eq!(time_shift(&traj, 0.0).unwrap(), traj);
        let a = time_shift(&time_shift(&traj, 0.5).unwrap(), 1.5).unwrap();
        let b = time_shift(&traj, 2.0).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.t0(), 2.0);
        assert!(matches!(time_shift(&traj, 0.3), Err(PathError::OffLattice { .. })));
        assert!(matches!(time_shift(&traj, 5.0), Err(PathError::BeyondSpan { .. })));

        let w = field_with_vh(&p, 2.0);
        let c = constant_path(p, &w, 6);
        let shifted = time_shift(&c, 1.0).unwrap();
        assert!(shifted.states().unwrap().iter().all(|s| **s == w));
    }

    #[test]
    fn window_distance_examples() {
        let p = params(0.25);
        let z = constant_path(p, &SpectralVectorField::zeros(p.grid()), 17);
        assert_eq!(window_distance(&z, &z, 0.0, 4.0).unwrap(), 0.0);
        let c = 1.7;
        let b = constant_path(p, &field_with_vh(&p, c * c), 17);
        let d = window_distance(&z, &b, 0.0, 4.0).unwrap();
        assert!((d - c * 2.0).abs() < 1e-12);
        assert_eq!(d, window_distance(&b, &z, 0.0, 4.0).unwrap());
    }

    #[test]
    fn metric_closed_forms() {
        let p = params(0.5);
        let cfg = PathMetricConfig { n_terms: 6 };
        let z = constant_path(p, &SpectralVectorField::zeros(p.grid()), 13);
        let sat = constant_path(p, &field_with_vh(&p, 1.0), 13);
        let d = path_metric(&z, &sat, &cfg).unwrap();
        assert!((d.value - (1.0 - 0.5f64.powi(6))).abs() < 1e-12);
        assert_eq!(d.truncation_bound, 0.5f64.powi(6));

        let half = constant_path(p, &field_with_vh(&p, 0.25), 13);
        let d = path_metric(&z, &half, &cfg).unwrap().value;
        let expect: f64 = (1..=6).map(|n| 0.5f64.powi(n) * (0.5 * (n as f64).sqrt()).min(1.0)).sum();
        assert!((d - expect).abs() < 1e-12);
        assert!((d - 0.6444).abs() < 1e-4);

        assert_eq!(path_metric(&z, &z, &cfg).unwrap().value, 0.0);
        let short = constant_path(p, &SpectralVectorField::zeros(p.grid()), 5);
        assert!(matches!(
            path_metric(&short, &z, &cfg),
            Err(PathError::InsufficientSpan { .. })
        ));
    }

    #[test]
    fn hausdorff_examples() {
        let p = params(0.5);
        let cfg = PathMetricConfig { n_terms: 4 };
        let mk = |v: f64| constant_path(p, &field_with_vh(&p, v), 9);
        let (a, b, c) = (mk(0.01), mk(0.04), mk(0.25));
        let ab = path_metric(&a, &b, &cfg).unwrap().value;
        assert_eq!(hausdorff_semidistance(std::slice::from_ref(&a), std::slice::from_ref(&b), &cfg).unwrap(), ab);
        let xs = [a.clone(), b.clone()];
        let ys = [a.clone(), b.clone(), c.clone()];
        assert_eq!(hausdorff_semidistance(&xs, &ys, &cfg).unwrap(), 0.0);
        assert!(hausdorff_semidistance(&ys, &xs, &cfg).unwrap() > 0.0);
        assert!(matches!(hausdorff_semidistance(&[], &ys, &cfg), Err(PathError::Empty)));
    }

    #[test]
    fn gronwall_entry_closed_form() {
        assert_eq!(gronwall_entry_time(1.0, 1.0, 0.1, 1.0), 0.0);
        let t = gronwall_entry_time(100.0, 0.1, 0.1, 1.0);
        assert!((100.0 * (-0.1 * t).exp() - 1.0).abs() < 1e-12);
        assert_eq!(gronwall_entry_time(1.0, 0.0, 0.1, 1.0), f64::INFINITY);
    }
}
