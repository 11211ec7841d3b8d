//! Scenario runner and parameter sweeps.

mod run;
mod scenario;
mod sweep;

pub use run::{median, run_scenario, ControlStep, CsvRow, RunReport, CSV_HEADER};
pub use scenario::{
    load_scenario, parse_scenario, write_scenario, BusRef, LoadEvent, NetworkSource, PilotSet,
    Scenario, NOISE_SCALES, SCENARIO_FORMAT,
};
pub use sweep::{
    max_ratio_above, sweep_compression, sweep_compression_synthetic, sweep_pilots,
    CompressionPoint, PilotPoint,
};

use crate::control::ControlError;
use crate::cs::CodecError;
use crate::grid::GridError;
use crate::morphology::MorphologyError;
use crate::mse::DetectorError;
use crate::telemetry::TelemetryError;

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Control(#[from] ControlError),
    #[error(transparent)]
    Codec(#[from] CodecError),
    #[error(transparent)]
    Telemetry(#[from] TelemetryError),
    #[error(transparent)]
    Detector(#[from] DetectorError),
    #[error(transparent)]
    Morphology(#[from] MorphologyError),
    #[error("scenario: {0}")]
    Scenario(String),
    #[error("{0}")]
    Io(String),
}
