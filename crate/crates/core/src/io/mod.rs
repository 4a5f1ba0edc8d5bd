//! Configuration, persistence and run orchestration.

mod config;
mod run;
mod snapshot;

use thiserror::Error;

use crate::estimates::EstimateError;
use crate::model::ModelError;
use crate::pathspace::PathError;
use crate::pressure::PressureError;

pub use config::{
    parse_checks, parse_config, Check, ConfigError, ForcingSpec, GenericConstant, InitialSpec, RunConfig,
};
pub use run::{
    metric_table, run, trajectory_from_snapshots, verify, CheckOutcome, CheckStatus, ExitStatus, RunSummary,
};
pub use snapshot::{load_snapshot, load_trajectory_file, store_snapshot, Snapshot, TrajectoryWriter, MAGIC};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IoError {
    #[error("i/o: {0}")]
    Io(String),
    #[error("not a snapshot file (bad magic bytes)")]
    BadMagic,
    #[error("file ends before the declared data")]
    ShortRead,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid payload: {0}")]
    InvalidPayload(String),
    #[error("stored data does not match the configuration: {0}")]
    Mismatch(String),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Estimate(#[from] EstimateError),
    #[error(transparent)]
    Path(#[from] PathError),
    #[error(transparent)]
    Pressure(#[from] PressureError),
}

impl From<std::io::Error> for IoError {
    fn from(e: std::io::Error) -> Self {
        IoError::Io(e.to_string())
    }
}

impl From<csv::Error> for IoError {
    fn from(e: csv::Error) -> Self {
        IoError::Io(e.to_string())
    }
}

impl From<crate::spectral::SpectralError> for IoError {
    fn from(e: crate::spectral::SpectralError) -> Self {
        IoError::Model(e.into())
    }
}
