//! Quadrature on uniform sample lattices.

/// Running trapezoidal integral: `out[j] = ∫_{s_0}^{s_j} f`, `out[0] = 0`.
pub fn cumulative_trapezoid(values: &[f64], h: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(values.len());
    let mut acc = 0.0;
    out.push(0.0);
    for w in values.windows(2) {
        acc += 0.5 * h * (w[0] + w[1]);
        out.push(acc);
    }
    out.truncate(values.len());
    out
}

pub fn trapezoid(values: &[f64], h: f64) -> f64 {
    cumulative_trapezoid(values, h).last().copied().unwrap_or(0.0)
}

/// Richardson estimate `|T_h - T_2h| / 3` of the trapezoid error over
/// `values`. With an odd number of intervals the estimate covers the first
/// even run and the trailing interval borrows the error density of the
/// last pair. Fewer than three samples give zero.
pub fn trapezoid_error_estimate(values: &[f64], h: f64) -> f64 {
    let intervals = values.len().saturating_sub(1);
    if intervals < 2 {
        return 0.0;
    }
    let even = intervals - intervals % 2;
    let fine = trapezoid(&values[..=even], h);
    let coarse_samples: Vec<f64> = values[..=even].iter().step_by(2).copied().collect();
    let coarse = trapezoid(&coarse_samples, 2.0 * h);
    let est = (fine - coarse).abs() / 3.0;
    if even == intervals {
        est
    } else {
        let tail = values[intervals - 2..].to_vec();
        let t_fine = trapezoid(&tail, h);
        let t_coarse = h * (tail[0] + tail[2]);
        est + 0.5 * (t_fine - t_coarse).abs() / 3.0
    }
}

/// Relative difference `|a - b| / max(|a|, |b|)`, zero when both vanish.
pub fn relative_gap(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}
