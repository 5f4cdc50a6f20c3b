//! Implicit time integration of the column DAE.
//!
//! Steps are BDF1 (implicit Euler): the differential slots get difference
//! quotients, every algebraic row is enforced at the step endpoint, and the
//! whole system is solved simultaneously by damped Newton. Step boundaries
//! are forced onto control-ramp knots and sample times, the step size grows
//! after a run of successes and halves on Newton failure, and integration
//! stops at the horizon or when the reboiler is about to run dry.

mod newton;

pub use newton::{newton_solve, NewtonReport};

use serde::Serialize;
use thiserror::Error;

use crate::column::{
    initialize_consistent, residuals_flat, ColumnState, ControlInputs, ModelError, PlantParams,
    RowMap, StateLayout,
};
use crate::thermo::MixtureModel;
use crate::workflow::{Scenario, TimeSeriesRecord};

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("newton did not converge: residual max-norm {residual:.3e} after {iterations} iterations")]
    NewtonDidNotConverge { residual: f64, iterations: usize },
    #[error("jacobian is singular")]
    SingularJacobian,
    #[error("time step {0} s fell below the configured minimum")]
    StepTooSmall(f64),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Step-size, tolerance and sampling settings for one simulation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IntegratorConfig {
    /// Initial step, s.
    pub dt_init: f64,
    /// Failure floor: halving below this aborts the run, s.
    pub dt_min: f64,
    /// Growth ceiling, s.
    pub dt_max: f64,
    /// Residual max-norm accepted per step (scaled rows).
    pub newton_tol: f64,
    pub newton_max_iter: usize,
    /// Output cadence, s.
    pub sample_interval: f64,
    /// Reboiler holdup at which the run stops, mol. Integrating to exactly
    /// zero would break the two-phases-everywhere model assumption first.
    pub depletion_threshold: f64,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            dt_init: 1.0,
            dt_min: 1e-3,
            dt_max: 30.0,
            newton_tol: 1e-9,
            newton_max_iter: 25,
            sample_interval: 30.0,
            depletion_threshold: 0.1,
        }
    }
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<(), String> {
        if !(0.0 < self.dt_min && self.dt_min <= self.dt_init && self.dt_init <= self.dt_max) {
            return Err(format!(
                "need 0 < dt_min <= dt_init <= dt_max, got ({}, {}, {})",
                self.dt_min, self.dt_init, self.dt_max
            ));
        }
        if !(self.newton_tol > 0.0) {
            return Err(format!("newton_tol must be > 0, got {}", self.newton_tol));
        }
        if self.newton_max_iter == 0 {
            return Err("newton_max_iter must be >= 1".into());
        }
        if !(self.sample_interval > 0.0) {
            return Err(format!("sample_interval must be > 0, got {}", self.sample_interval));
        }
        if !(self.depletion_threshold >= 0.0) {
            return Err(format!(
                "depletion_threshold must be >= 0, got {}",
                self.depletion_threshold
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    HorizonReached,
    ReboilerDepleted,
    SolverFailure,
}

impl std::fmt::Display for StopReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            StopReason::HorizonReached => "horizon_reached",
            StopReason::ReboilerDepleted => "reboiler_depleted",
            StopReason::SolverFailure => "solver_failure",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct Diagnostics {
    pub accepted_steps: usize,
    pub rejected_steps: usize,
    pub newton_iterations: usize,
    pub jacobian_builds: usize,
}

/// The sampled trajectory of one run plus how and why it ended.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationResult {
    pub records: Vec<TimeSeriesRecord>,
    pub stop_reason: StopReason,
    pub diagnostics: Diagnostics,
}

/// Advances the state by one implicit-Euler step of length `dt` with the
/// controls held at their `t + dt` values.
///
/// The returned state satisfies every residual row at `newton_tol`; a
/// converged state with a negative flow or holdup is rejected as a state
/// violation since the stage model assumes both phases exist everywhere.
pub fn step(
    m: &MixtureModel,
    p: &PlantParams,
    u: &ControlInputs,
    state: &ColumnState,
    dt: f64,
    cfg: &IntegratorConfig,
) -> Result<(ColumnState, NewtonReport), SolverError> {
    let layout = StateLayout::new(p.stages, m.n_components());
    let z_old = layout.pack(state);
    let typical = layout.typical();
    let inv_dt = 1.0 / dt;
    let dim = layout.dim();

    let mut z_dot = vec![0.0; dim];
    let residual = |z: &[f64], out: &mut [f64]| -> Result<(), SolverError> {
        let mut z_dot = vec![0.0; dim];
        for k in 0..dim {
            if layout.is_differential(k) {
                z_dot[k] = (z[k] - z_old[k]) * inv_dt;
            }
        }
        residuals_flat(m, p, u, &layout, z, &z_dot, out).map_err(SolverError::from)
    };
    let _ = &mut z_dot;

    let (z_new, report) =
        newton_solve(residual, &z_old, &typical, cfg.newton_tol, cfg.newton_max_iter)?;
    check_physical(&layout, &z_new)?;
    Ok((layout.unpack(&z_new, m, p, u), report))
}

/// Flow tolerance below zero accepted as roundoff rather than a violation.
const FLOW_EPS: f64 = 1e-10;

fn check_physical(layout: &StateLayout, z: &[f64]) -> Result<(), SolverError> {
    if z[layout.n1()] <= 0.0 {
        return Err(ModelError::StateViolation {
            stage: 0,
            message: format!("reboiler holdup {} mol", z[layout.n1()]),
        }
        .into());
    }
    for j in 0..layout.stages {
        if z[layout.vap(j)] < -FLOW_EPS {
            return Err(ModelError::StateViolation {
                stage: j,
                message: format!("negative vapor flow {}", z[layout.vap(j)]),
            }
            .into());
        }
    }
    for j in 0..layout.stages - 1 {
        if z[layout.liq(j)] < -FLOW_EPS {
            return Err(ModelError::StateViolation {
                stage: j + 1,
                message: format!("negative liquid flow {}", z[layout.liq(j)]),
            }
            .into());
        }
    }
    for (what, idx) in [("buffer outflow", layout.buffer_out()), ("distillate", layout.distillate())]
    {
        if z[idx] < -FLOW_EPS {
            return Err(ModelError::StateViolation {
                stage: layout.stages - 1,
                message: format!("negative {what} {}", z[idx]),
            }
            .into());
        }
    }
    Ok(())
}

/// Solves for a steady state: all time derivatives zero, with the reboiler
/// holdup pinned to its value in `initial` (at steady state the holdup
/// level itself is indifferent, so the mass balance row is replaced by the
/// anchor). The initial state doubles as the Newton guess.
pub fn solve_steady_state(
    m: &MixtureModel,
    p: &PlantParams,
    u: &ControlInputs,
    initial: &ColumnState,
    cfg: &IntegratorConfig,
) -> Result<ColumnState, SolverError> {
    let layout = StateLayout::new(p.stages, m.n_components());
    let rows = RowMap::new(&layout);
    let z0 = layout.pack(initial);
    let typical = layout.typical();
    let dim = layout.dim();
    let n1_anchor = initial.n[0];
    let zeros = vec![0.0; dim];

    let residual = |z: &[f64], out: &mut [f64]| -> Result<(), SolverError> {
        residuals_flat(m, p, u, &layout, z, &zeros, out)?;
        out[rows.reboiler_total()] = (z[layout.n1()] - n1_anchor) / typical[layout.n1()];
        Ok(())
    };

    let (z, _) = newton_solve(residual, &z0, &typical, cfg.newton_tol, 200)?;
    check_physical(&layout, &z)?;
    Ok(layout.unpack(&z, m, p, u))
}

/// Snap window for aligning step targets with event boundaries.
const EVENT_SNAP: f64 = 1e-6;

/// Runs a scenario from `t = 0` to its horizon, the depletion threshold, or
/// solver breakdown, sampling every `sample_interval` seconds.
///
/// Integration failures do not discard work: everything sampled up to the
/// failure is returned with `StopReason::SolverFailure`.
pub fn simulate(
    scenario: &Scenario,
    mixture: &MixtureModel,
) -> Result<SimulationResult, ModelError> {
    let cfg = scenario.integrator;
    cfg.validate().map_err(ModelError::InvalidConfiguration)?;
    let p = &scenario.plant;
    let traj = &scenario.controls;
    let horizon = scenario.horizon;

    let u0 = traj.evaluate(0.0);
    let mut state = initialize_consistent(mixture, p, &u0, &scenario.x1_0, scenario.n_app_0)?;

    let mut diagnostics = Diagnostics::default();
    let mut records =
        vec![TimeSeriesRecord::from_state(0.0, &state, &u0, traj.active_ids(0.0))];

    let knots: Vec<f64> =
        traj.knot_times().into_iter().filter(|&k| k > 0.0 && k < horizon).collect();

    let mut t = 0.0;
    let mut dt = cfg.dt_init.min(cfg.dt_max);
    let mut successes = 0usize;
    let mut sample_index: u64 = 1;

    let push_record = |records: &mut Vec<TimeSeriesRecord>, t: f64, state: &ColumnState| {
        if records.last().map_or(true, |r| r.t < t - 1e-12) {
            records.push(TimeSeriesRecord::from_state(
                t,
                state,
                &traj.evaluate(t),
                traj.active_ids(t),
            ));
        }
    };

    let stop_reason = loop {
        if state.n[0] <= cfg.depletion_threshold {
            push_record(&mut records, t, &state);
            break StopReason::ReboilerDepleted;
        }
        if t >= horizon * (1.0 - 1e-12) {
            push_record(&mut records, t, &state);
            break StopReason::HorizonReached;
        }

        // steps never cross a sample time or a control-ramp knot
        let mut boundary = horizon.min(sample_index as f64 * cfg.sample_interval);
        if let Some(&knot) = knots.iter().find(|&&k| k > t * (1.0 + 1e-14) + 1e-12) {
            boundary = boundary.min(knot);
        }
        let mut target = (t + dt).min(boundary);
        if boundary - target <= EVENT_SNAP * dt {
            target = boundary;
        }

        let u = traj.evaluate(target);
        match step(mixture, p, &u, &state, target - t, &cfg) {
            Ok((next, report)) => {
                diagnostics.accepted_steps += 1;
                diagnostics.newton_iterations += report.iterations;
                diagnostics.jacobian_builds += report.jacobian_builds;
                state = next;
                t = target;
                successes += 1;
                if successes >= 5 {
                    dt = (dt * 1.3).min(cfg.dt_max);
                    successes = 0;
                }
                let next_sample = sample_index as f64 * cfg.sample_interval;
                if (t - next_sample).abs() <= 1e-9 * next_sample.max(1.0) {
                    push_record(&mut records, t, &state);
                    sample_index += 1;
                }
            }
            Err(_) => {
                diagnostics.rejected_steps += 1;
                successes = 0;
                dt *= 0.5;
                if dt < cfg.dt_min {
                    push_record(&mut records, t, &state);
                    break StopReason::SolverFailure;
                }
            }
        }
    };

    Ok(SimulationResult { records, stop_reason, diagnostics })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::anomaly::ControlTrajectory;
    use crate::column::{apparatus_holdup, lab_plant};
    use crate::thermo::{butanol_2propanol_water, Composition};

    fn quiet_plant() -> PlantParams {
        let mut p = lab_plant();
        p.q_loss.iter_mut().for_each(|q| *q = 0.0);
        p
    }

    fn scenario(
        plant: PlantParams,
        controls: ControlTrajectory,
        horizon: f64,
        cfg: IntegratorConfig,
    ) -> Scenario {
        Scenario {
            id: "test".into(),
            plant_id: "rig".into(),
            system: "ternary".into(),
            plant,
            mixture_ref: "builtin".into(),
            controls,
            annotations: vec![],
            x1_0: Composition::new(vec![0.429, 0.43, 0.141]).unwrap(),
            n_app_0: 24.62,
            horizon,
            integrator: cfg,
        }
    }

    #[test]
    fn adiabatic_idle_column_is_a_fixed_point() {
        let m = butanol_2propanol_water();
        let p = quiet_plant();
        let u = ControlInputs::new(0.0, 70_000.0, 93.0, 0.0, 12);
        let x0 = Composition::new(vec![0.429, 0.43, 0.141]).unwrap();
        let state = initialize_consistent(&m, &p, &u, &x0, 24.62).unwrap();
        assert!(state.vap_flow.iter().all(|v| v.abs() < 1e-12));

        let cfg = IntegratorConfig::default();
        let (next, report) = step(&m, &p, &u, &state, 10.0, &cfg).unwrap();
        assert_eq!(report.iterations, 0, "already at the solution");
        assert_eq!(next.temp, state.temp);
        assert_eq!(next.x, state.x);
    }

    #[test]
    fn short_heated_run_conserves_mass_and_sums() {
        let m = butanol_2propanol_water();
        let p = lab_plant();
        let u = ControlInputs::new(0.44, 70_000.0, 75.0, 79.77, 12);
        let cfg = IntegratorConfig { sample_interval: 60.0, ..Default::default() };
        let sc = scenario(p.clone(), ControlTrajectory::constant(u), 600.0, cfg);
        let result = simulate(&sc, &m).unwrap();
        assert_eq!(result.stop_reason, StopReason::HorizonReached);
        // t = 0, 60, ..., 600
        assert_eq!(result.records.len(), 11);
        for pair in result.records.windows(2) {
            assert!(pair[1].t > pair[0].t);
        }
        for r in &result.records {
            for j in 0..12 {
                let sx: f64 = r.x[j * 3..(j + 1) * 3].iter().sum();
                let sy: f64 = r.y[j * 3..(j + 1) * 3].iter().sum();
                assert!((sx - 1.0).abs() <= 1e-8, "stage {j}: sum x = {sx}");
                assert!((sy - 1.0).abs() <= 1e-8, "stage {j}: sum y = {sy}");
            }
        }

        // apparatus holdup only shrinks by what the distillate removes
        let first = &result.records[0];
        let last = result.records.last().unwrap();
        let n_app0: f64 = first.n.iter().sum::<f64>() + p.n_buffer;
        let n_app1: f64 = last.n.iter().sum::<f64>() + p.n_buffer;
        let mut removed = 0.0;
        for pair in result.records.windows(2) {
            removed += 0.5 * (pair[0].distillate + pair[1].distillate) * (pair[1].t - pair[0].t);
        }
        assert!(
            ((n_app1 - n_app0) + removed).abs() / n_app0 < 1e-3,
            "defect {}",
            ((n_app1 - n_app0) + removed).abs() / n_app0
        );
    }

    #[test]
    fn zero_horizon_yields_single_record() {
        let m = butanol_2propanol_water();
        let u = ControlInputs::new(0.44, 70_000.0, 75.0, 79.77, 12);
        let sc = scenario(
            lab_plant(),
            ControlTrajectory::constant(u),
            0.0,
            IntegratorConfig::default(),
        );
        let result = simulate(&sc, &m).unwrap();
        assert_eq!(result.stop_reason, StopReason::HorizonReached);
        assert_eq!(result.records.len(), 1);
        assert_eq!(result.records[0].t, 0.0);
    }

    #[test]
    fn infeasible_withdrawal_fails_with_partial_records() {
        let m = butanol_2propanol_water();
        let mut u = ControlInputs::new(0.3, 70_000.0, 93.0, 150.0, 12);
        // drains far more than the column can pass down
        u.withdrawal[0] = 0.5;
        let cfg = IntegratorConfig { dt_min: 0.25, ..Default::default() };
        let sc = scenario(lab_plant(), ControlTrajectory::constant(u), 600.0, cfg);
        let result = simulate(&sc, &m).unwrap();
        assert_eq!(result.stop_reason, StopReason::SolverFailure);
        assert!(!result.records.is_empty());
        assert!(result.diagnostics.rejected_steps > 0);
    }

    #[test]
    fn total_reflux_steady_state_persists() {
        let m = butanol_2propanol_water();
        let p = quiet_plant();
        let u = ControlInputs::new(0.0, 70_000.0, 93.0, 150.0, 12);
        let x0 = Composition::new(vec![0.429, 0.43, 0.141]).unwrap();
        let cfg = IntegratorConfig::default();
        let guess = initialize_consistent(&m, &p, &u, &x0, 24.62).unwrap();
        let steady = solve_steady_state(&m, &p, &u, &guess, &cfg).unwrap();
        assert_eq!(steady.distillate, 0.0);
        assert!(steady.vap_flow.iter().all(|v| *v > 0.0));

        let (next, _) = step(&m, &p, &u, &steady, 30.0, &cfg).unwrap();
        for j in 0..12 {
            assert!((next.temp[j] - steady.temp[j]).abs() < 1e-7);
            for i in 0..3 {
                assert!((next.x[j * 3 + i] - steady.x[j * 3 + i]).abs() < 1e-9);
            }
        }
        assert!(
            (apparatus_holdup(&next, p.n_buffer) - apparatus_holdup(&steady, p.n_buffer)).abs()
                < 1e-9
        );
    }
}
