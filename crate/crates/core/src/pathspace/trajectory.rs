use std::sync::Arc;

use crate::model::{lattice_ratio, Forcing, SimParams, LATTICE_TOL};
use crate::spectral::{apply_horizontal_filter, norms, NormReport, SpectralVectorField};

use super::PathError;

/// One stored instant of a trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub norms: NormReport,
    /// `⟨f, w⟩` for the forcing the trajectory was produced with.
    pub forcing_work: f64,
    /// `⟨f, A_h w⟩` for the same forcing.
    pub forcing_work_filtered: f64,
    pub state: Option<SpectralVectorField>,
}

/// A time-sampled solution path `s ↦ w(t0 + s)`, with samples at
/// `t0 + j·sample_dt`.
///
/// Samples live behind an `Arc`, so time shifts share storage and only move
/// a start offset.
#[derive(Debug, Clone)]
pub struct Trajectory {
    params: SimParams,
    origin: f64,
    offset: usize,
    samples: Arc<Vec<Sample>>,
    forcing: Option<Forcing>,
}

impl PartialEq for Trajectory {
    /// Same parameters, same absolute sample times, same sample contents.
    fn eq(&self, other: &Self) -> bool {
        self.params == other.params
            && self.origin == other.origin
            && self.offset == other.offset
            && self.samples() == other.samples()
            && self.forcing == other.forcing
    }
}

impl Trajectory {
    pub(crate) fn from_samples(
        params: SimParams,
        origin: f64,
        samples: Arc<Vec<Sample>>,
        forcing: Option<Forcing>,
    ) -> Self {
        Self {
            params,
            origin,
            offset: 0,
            samples,
            forcing,
        }
    }

    /// Wrap externally produced states (loaded from disk, synthetic paths).
    ///
    /// When `forcing` is given the cached forcing work is computed from it,
    /// otherwise it is recorded as zero.
    pub fn from_states(
        params: SimParams,
        t0: f64,
        states: Vec<SpectralVectorField>,
        forcing: Option<Forcing>,
    ) -> Result<Self, PathError> {
        if states.is_empty() {
            return Err(PathError::Empty);
        }
        let grid = params.grid();
        let mut samples = Vec::with_capacity(states.len());
        for w in states {
            if *w.grid() != grid {
                return Err(PathError::GridMismatch);
            }
            let (fw, fwf) = match &forcing {
                Some(f) => (
                    f.field().inner(&w)?,
                    f.field().inner(&apply_horizontal_filter(&w, params.alpha)?)?,
                ),
                None => (0.0, 0.0),
            };
            samples.push(Sample {
                norms: norms(&w, params.alpha),
                forcing_work: fw,
                forcing_work_filtered: fwf,
                state: Some(w),
            });
        }
        Ok(Self::from_samples(params, t0, Arc::new(samples), forcing))
    }

    pub fn params(&self) -> &SimParams {
        &self.params
    }

    pub fn forcing(&self) -> Option<&Forcing> {
        self.forcing.as_ref()
    }

    pub fn sample_dt(&self) -> f64 {
        self.params.sample_dt
    }

    pub fn alpha(&self) -> f64 {
        self.params.alpha
    }

    pub fn len(&self) -> usize {
        self.samples.len() - self.offset
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Index of the first sample in the shared storage.
    pub fn offset(&self) -> usize {
        self.offset
    }

    /// Absolute time of sample `j`.
    pub fn time(&self, j: usize) -> f64 {
        self.origin + (self.offset + j) as f64 * self.params.sample_dt
    }

    pub fn t0(&self) -> f64 {
        self.time(0)
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.len()).map(|j| self.time(j)).collect()
    }

    /// Length of the covered interval, `(len - 1)·sample_dt`.
    pub fn span(&self) -> f64 {
        (self.len() - 1) as f64 * self.params.sample_dt
    }

    pub fn samples(&self) -> &[Sample] {
        &self.samples[self.offset..]
    }

    pub fn norms(&self) -> impl Iterator<Item = &NormReport> + '_ {
        self.samples().iter().map(|s| &s.norms)
    }

    pub fn norm(&self, j: usize) -> &NormReport {
        &self.samples()[j].norms
    }

    pub fn has_states(&self) -> bool {
        self.samples().iter().all(|s| s.state.is_some())
    }

    pub fn state(&self, j: usize) -> Option<&SpectralVectorField> {
        self.samples().get(j).and_then(|s| s.state.as_ref())
    }

    /// All states, if the trajectory retained them.
    pub fn states(&self) -> Option<Vec<&SpectralVectorField>> {
        self.samples().iter().map(|s| s.state.as_ref()).collect()
    }

    /// Sample index for an absolute time on the lattice.
    pub fn index_at(&self, t: f64) -> Result<usize, PathError> {
        let rel = t - self.t0();
        let tol = LATTICE_TOL * self.params.sample_dt;
        let j = if rel.abs() <= tol {
            0
        } else {
            lattice_ratio(rel, self.params.sample_dt).ok_or(PathError::OffLattice { t })?
        };
        if j >= self.len() {
            return Err(PathError::BeyondSpan { t, span: self.span() });
        }
        Ok(j)
    }

    /// Sample index for a time measured from the start of the path.
    pub fn index_after(&self, s: f64) -> Result<usize, PathError> {
        if s < 0.0 {
            return Err(PathError::OffLattice { t: s });
        }
        self.index_at(self.t0() + s)
    }

    /// Recompute the norm of every stored state and compare to the cache.
    pub fn norm_cache_consistent(&self) -> bool {
        self.samples().iter().all(|s| match &s.state {
            Some(w) => norms(w, self.params.alpha) == s.norms,
            None => true,
        })
    }

    pub(crate) fn shifted_by(&self, steps: usize) -> Self {
        Self {
            offset: self.offset + steps,
            samples: Arc::clone(&self.samples),
            forcing: self.forcing.clone(),
            ..*self
        }
    }
}
