use std::io::Write;

use super::BOUND_RELATIVE_SLACK;

/// Sampled inequality `lhs(t) <= rhs(t)`.
///
/// `slack[i]` is the tolerance granted at sample `i`: a relative part
/// [`BOUND_RELATIVE_SLACK`]`·max(|lhs|, |rhs|)` plus any quadrature error
/// estimate in `quadrature[i]`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct BoundReport {
    pub times: Vec<f64>,
    pub lhs: Vec<f64>,
    pub rhs: Vec<f64>,
    /// `rhs - lhs`.
    pub margin: Vec<f64>,
    pub quadrature: Vec<f64>,
    pub slack: Vec<f64>,
    pub satisfied: bool,
    /// `max(lhs - rhs - slack)`; non-positive when satisfied.
    pub worst_violation: f64,
}

pub(crate) struct BoundBuilder(BoundReport);

impl BoundReport {
    pub(crate) fn builder() -> BoundBuilder {
        BoundBuilder(BoundReport::default())
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn min_margin(&self) -> f64 {
        self.margin.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Write `t,lhs,rhs,margin` rows.
    pub fn write_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["t", "lhs", "rhs", "margin"])?;
        for i in 0..self.len() {
            w.write_record(&[
                fmt(self.times[i]),
                fmt(self.lhs[i]),
                fmt(self.rhs[i]),
                fmt(self.margin[i]),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

impl BoundBuilder {
    pub(crate) fn push(&mut self, t: f64, lhs: f64, rhs: f64, quadrature: f64) {
        let r = &mut self.0;
        r.times.push(t);
        r.lhs.push(lhs);
        r.rhs.push(rhs);
        r.margin.push(rhs - lhs);
        r.quadrature.push(quadrature);
        let scale = if rhs.is_finite() { lhs.abs().max(rhs.abs()) } else { lhs.abs() };
        r.slack.push(BOUND_RELATIVE_SLACK * scale + quadrature);
    }

    pub(crate) fn build(self) -> BoundReport {
        let mut r = self.0;
        r.worst_violation = (0..r.len())
            .map(|i| r.lhs[i] - r.rhs[i] - r.slack[i])
            .fold(f64::NEG_INFINITY, |a, b| if b.is_nan() { f64::INFINITY } else { a.max(b) });
        if r.is_empty() {
            r.worst_violation = 0.0;
        }
        r.satisfied = r.worst_violation <= 0.0;
        r
    }
}

/// Which right-hand side of the energy balance the data supports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SignVerdict {
    /// `+∫⟨f, w⟩` has the smaller residual.
    #[default]
    WorkOnState,
    /// `-∫⟨f, A_h w⟩` has the smaller residual.
    NegativeFilteredWork,
    /// The forcing is zero; both forms agree.
    Indistinguishable,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct EnergyIdentityReport {
    pub times: Vec<f64>,
    pub lhs: Vec<f64>,
    pub rhs: Vec<f64>,
    /// Relative residual against `rhs`.
    pub residual: Vec<f64>,
    /// `½k₀(0) - ∫⟨f, A_h w⟩`.
    pub rhs_printed: Vec<f64>,
    pub residual_printed: Vec<f64>,
    pub max_residual: f64,
    pub max_residual_printed: f64,
    pub supported: SignVerdict,
}

impl EnergyIdentityReport {
    pub(crate) fn finish(&mut self, zero_forcing: bool) {
        self.max_residual = self.residual.iter().copied().fold(0.0, f64::max);
        self.max_residual_printed = self.residual_printed.iter().copied().fold(0.0, f64::max);
        self.supported = if zero_forcing {
            SignVerdict::Indistinguishable
        } else if self.max_residual <= self.max_residual_printed {
            SignVerdict::WorkOnState
        } else {
            SignVerdict::NegativeFilteredWork
        };
    }

    pub fn margin(&self) -> Vec<f64> {
        self.rhs.iter().zip(&self.lhs).map(|(r, l)| r - l).collect()
    }

    /// Write `t,lhs,rhs,margin,residual` rows.
    pub fn write_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["t", "lhs", "rhs", "margin", "residual"])?;
        for i in 0..self.times.len() {
            w.write_record(&[
                fmt(self.times[i]),
                fmt(self.lhs[i]),
                fmt(self.rhs[i]),
                fmt(self.rhs[i] - self.lhs[i]),
                fmt(self.residual[i]),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Shortest round-trip representation.
pub(crate) fn fmt(x: f64) -> String {
    format!("{x:e}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builder_tracks_worst_violation() {
        let mut b = BoundReport::builder();
        b.push(0.0, 1.0, 2.0, 0.0);
        b.push(0.1, 3.0, 2.0, 0.5);
        let r = b.build();
        assert!(!r.satisfied);
        assert!((r.worst_violation - (1.0 - 0.5 - 3e-8)).abs() < 1e-15);
        assert_eq!(r.min_margin(), -1.0);
    }

    #[test]
    fn csv_has_header_and_rows() {
        let mut b = BoundReport::builder();
        b.push(0.0, 1.0, 2.0, 0.0);
        let r = b.build();
        let mut buf = Vec::new();
        r.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().next(), Some("t,lhs,rhs,margin"));
        assert_eq!(text.lines().count(), 2);
    }
}
