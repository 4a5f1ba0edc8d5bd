use std::fmt;
use std::str::FromStr;

use crate::spectral::Grid;

use super::ModelError;

/// Treatment of aliasing in the quadratic product.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Dealias {
    #[default]
    TwoThirds,
    None,
}

impl fmt::Display for Dealias {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Dealias::TwoThirds => f.write_str("two-thirds"),
            Dealias::None => f.write_str("none"),
        }
    }
}

impl FromStr for Dealias {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "two-thirds" | "two_thirds" | "2/3" => Ok(Dealias::TwoThirds),
            "none" => Ok(Dealias::None),
            other => Err(format!("unknown dealias rule '{other}' (expected two-thirds | none)")),
        }
    }
}

/// Physical and numerical parameters of one run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimParams {
    /// Kinematic viscosity ν.
    pub nu: f64,
    /// Horizontal filter scale α.
    pub alpha: f64,
    /// Period scale L; the box is `(-πL, πL)³`.
    pub period_scale: f64,
    /// Collocation points per axis.
    pub n: usize,
    pub dt: f64,
    pub dealias: Dealias,
    /// Final time T.
    pub final_time: f64,
    /// Trajectory sampling step, an integer multiple of `dt`.
    pub sample_dt: f64,
}

/// Relative tolerance for "is an integer multiple of" checks on times.
pub(crate) const LATTICE_TOL: f64 = 1e-9;

pub(crate) fn lattice_ratio(value: f64, step: f64) -> Option<usize> {
    let r = value / step;
    let k = r.round();
    if k >= 0.0 && (r - k).abs() <= LATTICE_TOL * k.max(1.0) {
        Some(k as usize)
    } else {
        None
    }
}

impl Default for SimParams {
    fn default() -> Self {
        Self {
            nu: 0.1,
            alpha: 0.1,
            period_scale: 1.0,
            n: 16,
            dt: 1e-2,
            dealias: Dealias::TwoThirds,
            final_time: 1.0,
            sample_dt: 1e-1,
        }
    }
}

impl SimParams {
    pub fn validate(&self) -> Result<(), ModelError> {
        let bad = |what: &str, msg: String| Err(ModelError::InvalidParams(format!("{what}: {msg}")));
        if !(self.nu.is_finite() && self.nu > 0.0) {
            return bad("nu", format!("{} must be > 0", self.nu));
        }
        if !(self.alpha.is_finite() && self.alpha >= 0.0) {
            return bad("alpha", format!("{} must be >= 0", self.alpha));
        }
        Grid::new(self.n, self.period_scale).map_err(|e| ModelError::InvalidParams(e.to_string()))?;
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return bad("dt", format!("{} must be > 0", self.dt));
        }
        if !(self.final_time.is_finite() && self.final_time >= 0.0) {
            return bad("T", format!("{} must be >= 0", self.final_time));
        }
        match lattice_ratio(self.sample_dt, self.dt) {
            Some(k) if k >= 1 => {}
            _ => {
                return bad(
                    "sample_dt",
                    format!("{} is not a positive integer multiple of dt = {}", self.sample_dt, self.dt),
                )
            }
        }
        if lattice_ratio(self.final_time, self.sample_dt).is_none() {
            return bad(
                "T",
                format!("{} is not an integer multiple of sample_dt = {}", self.final_time, self.sample_dt),
            );
        }
        Ok(())
    }

    pub fn grid(&self) -> Grid {
        Grid::new(self.n, self.period_scale).expect("validated parameters")
    }

    /// Time steps between consecutive samples.
    pub fn stride(&self) -> usize {
        lattice_ratio(self.sample_dt, self.dt).unwrap_or(1).max(1)
    }

    /// Number of stored samples including the initial state.
    pub fn sample_count(&self) -> usize {
        lattice_ratio(self.final_time, self.sample_dt).unwrap_or(0) + 1
    }

    pub fn lambda1(&self) -> f64 {
        1.0 / (self.period_scale * self.period_scale)
    }
}
