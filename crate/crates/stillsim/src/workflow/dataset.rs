//! Dataset tree emission, batch execution and the run manifest.
//!
//! Outputs mirror the hybrid-database hierarchy: a modality folder on top
//! (`13_...` for simulated time series, `14_...` for the configuration
//! files), one folder per plant-setup/chemical-system combination below it,
//! and one folder per operating point (scenario) at the leaf.

use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::config::{serialize_plant_config, serialize_properties};
use super::timeseries::write_timeseries_file;
use super::{Scenario, WorkflowError};
use crate::integrator::{simulate, SimulationResult};
use crate::thermo::MixtureModel;

pub const MODALITY_TIMESERIES: &str = "13_BatchColumn_Timeseries_Simulation";
pub const MODALITY_CONFIGURATION: &str = "14_BatchColumn_Simulation_Configuration";

/// SHA-256 over the canonical JSON form of a scenario. Field order is fixed
/// by the type definitions and float formatting is shortest-roundtrip, so
/// the hash is stable across runs and platforms.
pub fn config_hash(scenario: &Scenario) -> String {
    let canonical = serde_json::to_string(scenario).expect("scenario serialization is infallible");
    let mut hasher = Sha256::new();
    hasher.update(canonical.as_bytes());
    hex_string(&hasher.finalize())
}

fn hex_string(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

fn safe_label(raw: &str) -> String {
    raw.chars()
        .map(|c| if c.is_ascii_alphanumeric() || "._+-".contains(c) { c } else { '_' })
        .collect()
}

fn system_dir(scenario: &Scenario) -> String {
    format!("{}__{}", safe_label(&scenario.plant_id), safe_label(&scenario.system))
}

/// Leaf directory of one scenario under one modality.
pub fn scenario_dir(root: &Path, modality: &str, scenario: &Scenario) -> PathBuf {
    root.join(modality).join(system_dir(scenario)).join(safe_label(&scenario.id))
}

fn write_if_absent(path: &Path, content: &str, force: bool) -> Result<(), WorkflowError> {
    if path.exists() {
        let existing = std::fs::read_to_string(path).map_err(|e| WorkflowError::io(path, e))?;
        if existing == content {
            return Ok(());
        }
        if !force {
            return Err(WorkflowError::Validation(format!(
                "{} already exists with different content; pass force to overwrite",
                path.display()
            )));
        }
    }
    std::fs::write(path, content).map_err(|e| WorkflowError::io(path, e))
}

/// Creates the scenario's folders under both modalities and places the
/// canonical configuration files in the configuration modality. Emitting
/// the same scenario twice is a no-op; emitting a changed configuration
/// over an existing one is refused unless `force` is set.
///
/// Returns the time-series leaf directory.
pub fn emit_dataset_layout(
    root: &Path,
    scenario: &Scenario,
    mixture: &MixtureModel,
    force: bool,
) -> Result<PathBuf, WorkflowError> {
    let ts_dir = scenario_dir(root, MODALITY_TIMESERIES, scenario);
    let cfg_dir = scenario_dir(root, MODALITY_CONFIGURATION, scenario);
    for dir in [&ts_dir, &cfg_dir] {
        std::fs::create_dir_all(dir).map_err(|e| WorkflowError::io(dir, e))?;
    }
    let plant_xml = serialize_plant_config(std::slice::from_ref(scenario))?;
    write_if_absent(&cfg_dir.join("plant_config.xml"), &plant_xml, force)?;
    write_if_absent(&cfg_dir.join("properties.xml"), &serialize_properties(mixture), force)?;
    Ok(ts_dir)
}

/// Writes a result's records as `<scenario id>.csv` into the scenario's
/// time-series leaf under `root`, creating the directories if needed.
pub fn write_timeseries(
    result: &SimulationResult,
    scenario: &Scenario,
    root: &Path,
) -> Result<PathBuf, WorkflowError> {
    let dir = scenario_dir(root, MODALITY_TIMESERIES, scenario);
    std::fs::create_dir_all(&dir).map_err(|e| WorkflowError::io(&dir, e))?;
    let path = dir.join(format!("{}.csv", safe_label(&scenario.id)));
    write_timeseries_file(&result.records, &path)?;
    Ok(path)
}

/// Outcome of one scenario in a batch.
#[derive(Debug)]
pub struct BatchOutcome {
    pub scenario_id: String,
    pub config_hash: String,
    pub result: Result<SimulationResult, String>,
    pub wall_time_s: f64,
}

/// Runs every scenario independently with up to `jobs` worker threads. A
/// failing scenario is captured in its outcome and never aborts the rest.
pub fn run_batch(scenarios: &[Scenario], mixture: &MixtureModel, jobs: usize) -> Vec<BatchOutcome> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .expect("thread pool construction");
    pool.install(|| {
        use rayon::prelude::*;
        scenarios
            .par_iter()
            .map(|scenario| {
                let started = Instant::now();
                let result = simulate(scenario, mixture).map_err(|e| e.to_string());
                BatchOutcome {
                    scenario_id: scenario.id.clone(),
                    config_hash: config_hash(scenario),
                    result,
                    wall_time_s: started.elapsed().as_secs_f64(),
                }
            })
            .collect()
    })
}

/// One line of the batch manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub scenario_id: String,
    pub config_hash: String,
    /// Stop reason, or "error" when the scenario never produced a result.
    pub status: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub records: usize,
    pub wall_time_s: f64,
}

pub fn manifest_entries(outcomes: &[BatchOutcome]) -> Vec<ManifestEntry> {
    outcomes
        .iter()
        .map(|o| match &o.result {
            Ok(result) => ManifestEntry {
                scenario_id: o.scenario_id.clone(),
                config_hash: o.config_hash.clone(),
                status: result.stop_reason.to_string(),
                error: None,
                records: result.records.len(),
                wall_time_s: o.wall_time_s,
            },
            Err(message) => ManifestEntry {
                scenario_id: o.scenario_id.clone(),
                config_hash: o.config_hash.clone(),
                status: "error".into(),
                error: Some(message.clone()),
                records: 0,
                wall_time_s: o.wall_time_s,
            },
        })
        .collect()
}

/// Line-delimited JSON, one entry per scenario.
pub fn write_manifest(entries: &[ManifestEntry], path: &Path) -> Result<(), WorkflowError> {
    let mut out = String::new();
    for e in entries {
        out.push_str(&serde_json::to_string(e).expect("manifest serialization"));
        out.push('\n');
    }
    std::fs::write(path, out).map_err(|e| WorkflowError::io(path, e))
}

pub fn read_manifest(path: &Path) -> Result<Vec<ManifestEntry>, WorkflowError> {
    let text = std::fs::read_to_string(path).map_err(|e| WorkflowError::io(path, e))?;
    text.lines()
        .filter(|l| !l.is_empty())
        .map(|l| {
            serde_json::from_str(l).map_err(|e| WorkflowError::Parse {
                path: path.display().to_string(),
                message: e.to_string(),
            })
        })
        .collect()
}

/// Worst-sample conservation defect of a run: the apparatus holdup change
/// against the trapezoidal integral of distillate plus withdrawals,
/// relative to the initial inventory.
pub fn conservation_defect(records: &[super::TimeSeriesRecord], scenario: &Scenario) -> f64 {
    let n_buffer = scenario.plant.n_buffer;
    let n_app_0: f64 = match records.first() {
        Some(r) => r.n.iter().sum::<f64>() + n_buffer,
        None => return 0.0,
    };
    let outflow = |r: &super::TimeSeriesRecord| -> f64 {
        let w: f64 = scenario.controls.evaluate(r.t).withdrawal.iter().sum();
        r.distillate + w
    };
    let mut removed = 0.0;
    let mut worst = 0.0f64;
    for pair in records.windows(2) {
        removed += 0.5 * (outflow(&pair[0]) + outflow(&pair[1])) * (pair[1].t - pair[0].t);
        let n_app: f64 = pair[1].n.iter().sum::<f64>() + n_buffer;
        worst = worst.max((n_app - n_app_0 + removed).abs() / n_app_0);
    }
    worst
}

/// Componentwise version of [`conservation_defect`]: the worst relative
/// defect across components and samples.
pub fn component_conservation_defect(
    records: &[super::TimeSeriesRecord],
    scenario: &Scenario,
) -> f64 {
    let first = match records.first() {
        Some(r) => r,
        None => return 0.0,
    };
    let (s, c) = (first.stages(), first.components());
    let n_buffer = scenario.plant.n_buffer;
    let n_app_0: f64 = first.n.iter().sum::<f64>() + n_buffer;
    let inventory = |r: &super::TimeSeriesRecord, i: usize| -> f64 {
        (0..s).map(|j| r.n[j] * r.x[j * c + i]).sum::<f64>() + n_buffer * r.buffer_x[i]
    };
    let outflow = |r: &super::TimeSeriesRecord, i: usize| -> f64 {
        let u = scenario.controls.evaluate(r.t);
        let withdrawn: f64 = (0..s).map(|j| u.withdrawal[j] * r.x[j * c + i]).sum();
        r.distillate * r.buffer_x[i] + withdrawn
    };
    let mut worst = 0.0f64;
    for i in 0..c {
        let start = inventory(first, i);
        let mut removed = 0.0;
        for pair in records.windows(2) {
            removed += 0.5 * (outflow(&pair[0], i) + outflow(&pair[1], i)) * (pair[1].t - pair[0].t);
            worst = worst.max((inventory(&pair[1], i) - start + removed).abs() / n_app_0);
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::anomaly::ControlTrajectory;
    use crate::column::{lab_plant, ControlInputs};
    use crate::integrator::IntegratorConfig;
    use crate::thermo::{butanol_2propanol_water, Composition};

    fn scenario(id: &str) -> Scenario {
        Scenario {
            id: id.into(),
            plant_id: "glass-batch-column".into(),
            system: "1-butanol+2-propanol+water".into(),
            plant: lab_plant(),
            mixture_ref: "properties.xml".into(),
            controls: ControlTrajectory::constant(ControlInputs::new(
                0.44, 70_000.0, 75.0, 79.77, 12,
            )),
            annotations: vec![],
            x1_0: Composition::new(vec![0.454, 0.394, 0.152]).unwrap(),
            n_app_0: 17.85,
            horizon: 120.0,
            integrator: IntegratorConfig { sample_interval: 60.0, ..Default::default() },
        }
    }

    #[test]
    fn hash_is_stable_and_sensitive() {
        let a = scenario("one");
        assert_eq!(config_hash(&a), config_hash(&a.clone()));
        let mut b = a.clone();
        b.n_app_0 += 1e-9;
        assert_ne!(config_hash(&a), config_hash(&b));
    }

    #[test]
    fn layout_is_idempotent_and_guards_collisions() {
        let m = butanol_2propanol_water();
        let dir = tempfile::tempdir().unwrap();
        let sc = scenario("case");
        let leaf = emit_dataset_layout(dir.path(), &sc, &m, false).unwrap();
        assert!(leaf.starts_with(dir.path().join(MODALITY_TIMESERIES)));
        assert!(leaf.ends_with("glass-batch-column__1-butanol+2-propanol+water/case"));

        // second emit: no-op
        emit_dataset_layout(dir.path(), &sc, &m, false).unwrap();

        // changed config under the same id: refused without force
        let mut changed = sc.clone();
        changed.n_app_0 = 20.0;
        assert!(emit_dataset_layout(dir.path(), &changed, &m, false).is_err());
        emit_dataset_layout(dir.path(), &changed, &m, true).unwrap();
    }

    #[test]
    fn batch_isolates_failures_and_reports() {
        let m = butanol_2propanol_water();
        let good = scenario("good");
        let mut bad = scenario("bad");
        bad.n_app_0 = 0.4; // infeasible holdup split
        let outcomes = run_batch(&[good, bad], &m, 2);
        assert_eq!(outcomes.len(), 2);
        assert!(outcomes.iter().find(|o| o.scenario_id == "good").unwrap().result.is_ok());
        assert!(outcomes.iter().find(|o| o.scenario_id == "bad").unwrap().result.is_err());

        let entries = manifest_entries(&outcomes);
        assert_eq!(entries[0].status, "horizon_reached");
        assert_eq!(entries[1].status, "error");
        assert!(entries[1].error.is_some());

        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("manifest.jsonl");
        write_manifest(&entries, &path).unwrap();
        assert_eq!(read_manifest(&path).unwrap(), entries);
    }

    #[test]
    fn empty_batch_gives_empty_manifest() {
        let m = butanol_2propanol_water();
        let outcomes = run_batch(&[], &m, 4);
        assert!(outcomes.is_empty());
        assert!(manifest_entries(&outcomes).is_empty());
    }
}
