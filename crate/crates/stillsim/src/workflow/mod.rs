//! Scenario configuration, batch execution, calibration, serialization and
//! comparison against reference data.

mod calibrate;
mod compare;
mod config;
mod dataset;
mod timeseries;

pub use calibrate::{
    calibrate_correction_factors, nelder_mead, CalibrationResult, FreeParameters,
    NelderMeadResult,
};
pub use compare::{
    compare_series, signal_unit, ComparisonReport, ReferenceSeries, SignalComparison, SignalMap,
};
pub use config::{
    parse_config, parse_plant_config, parse_properties, serialize_plant_config,
    serialize_properties, ParsedConfig,
};
pub use dataset::{
    component_conservation_defect, config_hash, conservation_defect, emit_dataset_layout,
    manifest_entries, read_manifest, run_batch, scenario_dir, write_manifest, write_timeseries,
    BatchOutcome, ManifestEntry, MODALITY_CONFIGURATION, MODALITY_TIMESERIES,
};
pub use timeseries::{
    column_count, csv_header, read_timeseries, signal_names, write_timeseries_file,
    TimeSeriesRecord,
};

use crate::anomaly::{AnomalyAnnotation, AnomalyError, ControlTrajectory, RejectedAnnotation};
use crate::column::{ModelError, PlantParams};
use crate::integrator::IntegratorConfig;
use crate::thermo::{Composition, MixtureModel, ThermoError};
use serde::Serialize;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum WorkflowError {
    #[error("{path}: parse error: {message}")]
    Parse { path: String, message: String },
    #[error("validation error: {0}")]
    Validation(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("comparison error: {0}")]
    Comparison(String),
    #[error("calibration error: {0}")]
    Calibration(String),
    #[error("simulation error in scenario '{id}': {message}")]
    Simulation { id: String, message: String },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Thermo(#[from] ThermoError),
    #[error(transparent)]
    Anomaly(#[from] AnomalyError),
}

impl WorkflowError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        WorkflowError::Io { path: path.display().to_string(), source }
    }
}

/// Per-scenario record of annotations that were skipped and why.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioReport {
    pub scenario_id: String,
    pub rejected: Vec<RejectedAnnotation>,
}

/// One fully specified simulation run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Scenario {
    /// Experiment identifier; also names the operating-point folder.
    pub id: String,
    /// Plant-setup label used in the dataset hierarchy.
    pub plant_id: String,
    /// Chemical-system label used in the dataset hierarchy.
    pub system: String,
    pub plant: PlantParams,
    /// Path of the property file this scenario was resolved against.
    pub mixture_ref: String,
    pub controls: ControlTrajectory,
    /// The anomaly annotations the controls were resolved from, including
    /// entries that were skipped (kept for the emitted configuration copy).
    pub annotations: Vec<AnomalyAnnotation>,
    /// Initial reboiler charge composition.
    pub x1_0: Composition,
    /// Initial apparatus holdup, mol.
    pub n_app_0: f64,
    /// Simulation horizon, s.
    pub horizon: f64,
    pub integrator: IntegratorConfig,
}

impl Scenario {
    pub fn validate(&self, mixture: &MixtureModel) -> Result<(), WorkflowError> {
        self.plant.validate()?;
        self.integrator.validate().map_err(WorkflowError::Validation)?;
        self.controls.baseline().validate(self.plant.stages)?;
        if self.x1_0.len() != mixture.n_components() {
            return Err(WorkflowError::Validation(format!(
                "scenario '{}': initial composition has {} entries for a {}-component system",
                self.id,
                self.x1_0.len(),
                mixture.n_components()
            )));
        }
        if !(self.horizon >= 0.0) {
            return Err(WorkflowError::Validation(format!(
                "scenario '{}': horizon must be >= 0, got {}",
                self.id, self.horizon
            )));
        }
        if !(self.n_app_0 > 0.0) {
            return Err(WorkflowError::Validation(format!(
                "scenario '{}': initial apparatus holdup must be > 0, got {}",
                self.id, self.n_app_0
            )));
        }
        Ok(())
    }
}
