//! Command-line surface: validate, simulate, batch, calibrate, compare.
//!
//! Machine-readable output goes to stdout, diagnostics to stderr. Exit
//! codes: 0 success, 1 validation or usage failure, 2 solver failure,
//! 3 I/O failure.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};

use crate::integrator::{simulate, StopReason};
use crate::workflow::{
    self, compare_series, conservation_defect, emit_dataset_layout, manifest_entries, parse_config,
    run_batch, write_manifest, write_timeseries, write_timeseries_file, FreeParameters,
    ParsedConfig, ReferenceSeries, Scenario, SignalMap, WorkflowError,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 1;
pub const EXIT_SOLVER: i32 = 2;
pub const EXIT_IO: i32 = 3;

#[derive(Parser)]
#[command(
    name = "stillsim",
    version,
    about = "Batch-distillation scenario simulator and dataset generator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse both configuration files and report per-scenario validity
    Validate {
        #[arg(long)]
        plant_config: PathBuf,
        #[arg(long)]
        property_config: PathBuf,
    },
    /// Run one scenario and write its time series CSV
    Simulate {
        #[arg(long)]
        plant_config: PathBuf,
        #[arg(long)]
        property_config: PathBuf,
        #[arg(long)]
        scenario_id: String,
        /// Output directory for `<scenario id>.csv`
        #[arg(long)]
        out: PathBuf,
        /// Override the configured horizon, s
        #[arg(long)]
        horizon: Option<f64>,
        /// Override the configured output cadence, s
        #[arg(long)]
        sample_interval: Option<f64>,
    },
    /// Run all scenarios into the dataset layout and write the manifest
    Batch {
        #[arg(long)]
        plant_config: PathBuf,
        #[arg(long)]
        property_config: PathBuf,
        /// Dataset root directory
        #[arg(long)]
        out: PathBuf,
        /// Worker threads
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        #[arg(long)]
        horizon: Option<f64>,
        #[arg(long)]
        sample_interval: Option<f64>,
        /// Overwrite differing configuration copies in the dataset tree
        #[arg(long)]
        force: bool,
    },
    /// Fit correction factors against a reference temperature series
    Calibrate {
        #[arg(long)]
        plant_config: PathBuf,
        #[arg(long)]
        property_config: PathBuf,
        #[arg(long)]
        scenario_id: String,
        /// Wide CSV with a time column and measured signals
        #[arg(long)]
        reference_csv: PathBuf,
        /// TOML file mapping reference columns to schema signal names
        #[arg(long)]
        signal_map: Option<PathBuf>,
        /// Free parameters: "shared", "c1", "shared,c1" or "none"
        #[arg(long, default_value = "shared")]
        free_params: String,
    },
    /// Simulate a scenario and compare it against a reference series
    Compare {
        #[arg(long)]
        plant_config: PathBuf,
        #[arg(long)]
        property_config: PathBuf,
        #[arg(long)]
        scenario_id: String,
        #[arg(long)]
        reference_csv: PathBuf,
        #[arg(long)]
        signal_map: Option<PathBuf>,
        #[arg(long)]
        horizon: Option<f64>,
        #[arg(long)]
        sample_interval: Option<f64>,
    },
}

/// Parses `argv` and runs the selected subcommand, returning the process
/// exit code.
pub fn dispatch<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_VALIDATION,
            };
            let _ = e.print();
            return code;
        }
    };
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code_for(&e)
        }
    }
}

fn exit_code_for(e: &WorkflowError) -> i32 {
    match e {
        WorkflowError::Io { .. } => EXIT_IO,
        WorkflowError::Simulation { .. } => EXIT_SOLVER,
        _ => EXIT_VALIDATION,
    }
}

fn load(plant: &Path, properties: &Path) -> Result<ParsedConfig, WorkflowError> {
    parse_config(plant, properties)
}

fn pick_scenario<'a>(
    parsed: &'a mut ParsedConfig,
    id: &str,
) -> Result<&'a mut Scenario, WorkflowError> {
    parsed
        .scenarios
        .iter_mut()
        .find(|s| s.id == id)
        .ok_or_else(|| WorkflowError::Validation(format!("unknown scenario '{id}'")))
}

fn apply_overrides(scenario: &mut Scenario, horizon: Option<f64>, sample_interval: Option<f64>) {
    if let Some(h) = horizon {
        scenario.horizon = h;
    }
    if let Some(si) = sample_interval {
        scenario.integrator.sample_interval = si;
    }
}

fn load_reference(
    csv: &Path,
    signal_map: Option<&PathBuf>,
) -> Result<(ReferenceSeries, Vec<String>), WorkflowError> {
    let map = match signal_map {
        Some(path) => SignalMap::load(path)?,
        None => SignalMap::identity(),
    };
    let reference = ReferenceSeries::from_wide_csv(csv, &map)?;
    let signals = reference.signal_names();
    Ok((reference, signals))
}

fn run(command: Command) -> Result<i32, WorkflowError> {
    match command {
        Command::Validate { plant_config, property_config } => {
            let parsed = load(&plant_config, &property_config)?;
            for scenario in &parsed.scenarios {
                let report = parsed
                    .reports
                    .iter()
                    .find(|r| r.scenario_id == scenario.id)
                    .expect("one report per scenario");
                let skipped = if report.rejected.is_empty() {
                    String::new()
                } else {
                    let details: Vec<String> = report
                        .rejected
                        .iter()
                        .map(|r| format!("{} ({:?})", r.anomaly_id, r.reason))
                        .collect();
                    format!(", skipped: {}", details.join("; "))
                };
                println!(
                    "scenario {}: OK ({} perturbations{})",
                    scenario.id,
                    scenario.controls.perturbations().len(),
                    skipped
                );
            }
            Ok(EXIT_OK)
        }

        Command::Simulate {
            plant_config,
            property_config,
            scenario_id,
            out,
            horizon,
            sample_interval,
        } => {
            let mut parsed = load(&plant_config, &property_config)?;
            let mixture = parsed.mixture.clone();
            let scenario = pick_scenario(&mut parsed, &scenario_id)?;
            apply_overrides(scenario, horizon, sample_interval);
            let result = simulate(scenario, &mixture).map_err(|e| WorkflowError::Simulation {
                id: scenario.id.clone(),
                message: e.to_string(),
            })?;
            std::fs::create_dir_all(&out).map_err(|e| WorkflowError::io(&out, e))?;
            let path = out.join(format!("{}.csv", scenario.id));
            write_timeseries_file(&result.records, &path)?;
            println!("scenario {scenario_id}: {}", result.stop_reason);
            println!("records {}", result.records.len());
            println!("conservation_defect {:.6e}", conservation_defect(&result.records, scenario));
            println!("csv {}", path.display());
            if result.stop_reason == StopReason::SolverFailure {
                eprintln!("warning: solver failed before the horizon; partial series written");
                return Ok(EXIT_SOLVER);
            }
            Ok(EXIT_OK)
        }

        Command::Batch {
            plant_config,
            property_config,
            out,
            jobs,
            horizon,
            sample_interval,
            force,
        } => {
            let mut parsed = load(&plant_config, &property_config)?;
            for scenario in parsed.scenarios.iter_mut() {
                apply_overrides(scenario, horizon, sample_interval);
            }
            let outcomes = run_batch(&parsed.scenarios, &parsed.mixture, jobs);
            std::fs::create_dir_all(&out).map_err(|e| WorkflowError::io(&out, e))?;

            let mut worst = EXIT_OK;
            for (scenario, outcome) in parsed.scenarios.iter().zip(&outcomes) {
                emit_dataset_layout(&out, scenario, &parsed.mixture, force)?;
                match &outcome.result {
                    Ok(result) => {
                        let path = write_timeseries(result, scenario, &out)?;
                        println!(
                            "scenario {}: {} ({} records) -> {}",
                            scenario.id,
                            result.stop_reason,
                            result.records.len(),
                            path.display()
                        );
                        if result.stop_reason == StopReason::SolverFailure {
                            worst = worst.max(EXIT_SOLVER);
                        }
                    }
                    Err(message) => {
                        eprintln!("scenario {}: failed: {message}", scenario.id);
                        worst = worst.max(EXIT_SOLVER);
                    }
                }
            }
            let manifest_path = out.join("manifest.jsonl");
            write_manifest(&manifest_entries(&outcomes), &manifest_path)?;
            println!("manifest {}", manifest_path.display());
            Ok(worst)
        }

        Command::Calibrate {
            plant_config,
            property_config,
            scenario_id,
            reference_csv,
            signal_map,
            free_params,
        } => {
            let mut parsed = load(&plant_config, &property_config)?;
            let mixture = parsed.mixture.clone();
            let scenario = pick_scenario(&mut parsed, &scenario_id)?;
            let (reference, _) = load_reference(&reference_csv, signal_map.as_ref())?;
            let free = parse_free_params(&free_params)?;
            let result =
                workflow::calibrate_correction_factors(&reference, scenario, &mixture, free)?;
            let summary = serde_json::json!({
                "scenario": scenario_id,
                "shared_correction": result.shared_correction,
                "reboiler_correction": result.reboiler_correction,
                "rmse_kelvin": result.rmse,
                "evaluations": result.evaluations,
                "objective_trace": result.objective_trace,
            });
            println!("{}", serde_json::to_string_pretty(&summary).expect("json"));
            Ok(EXIT_OK)
        }

        Command::Compare {
            plant_config,
            property_config,
            scenario_id,
            reference_csv,
            signal_map,
            horizon,
            sample_interval,
        } => {
            let mut parsed = load(&plant_config, &property_config)?;
            let mixture = parsed.mixture.clone();
            let scenario = pick_scenario(&mut parsed, &scenario_id)?;
            apply_overrides(scenario, horizon, sample_interval);
            let result = simulate(scenario, &mixture).map_err(|e| WorkflowError::Simulation {
                id: scenario.id.clone(),
                message: e.to_string(),
            })?;
            let (reference, signals) = load_reference(&reference_csv, signal_map.as_ref())?;
            let report = compare_series(&result.records, &reference, &signals)?;
            println!("{}", serde_json::to_string_pretty(&report).expect("json"));
            Ok(EXIT_OK)
        }
    }
}

fn parse_free_params(raw: &str) -> Result<FreeParameters, WorkflowError> {
    let mut free = FreeParameters::default();
    if raw == "none" {
        return Ok(free);
    }
    for token in raw.split(',') {
        match token.trim() {
            "shared" => free.shared = true,
            "c1" => free.reboiler = true,
            other => {
                return Err(WorkflowError::Validation(format!(
                    "unknown free parameter '{other}' (expected shared, c1, or none)"
                )))
            }
        }
    }
    Ok(free)
}
