//! Control trajectories with ramped perturbations.
//!
//! Normal operation is a constant set of control inputs. An anomaly is a
//! declared deviation: one control target ramps linearly from its baseline
//! to a modified setpoint at `t_start`, holds it until `t_end`, and ramps
//! back. Evaluation is piecewise linear and continuous; records sampled
//! while any target deviates from baseline carry the anomaly label.

use crate::column::ControlInputs;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum AnomalyError {
    #[error("invalid perturbation '{id}': {message}")]
    InvalidPerturbation { id: String, message: String },
    #[error("overlapping perturbations on {target:?}: {ids:?}")]
    Overlap { target: ControlTarget, ids: Vec<String> },
    #[error("invalid baseline: {0}")]
    InvalidBaseline(String),
}

/// The control signals a perturbation can act on. Withdrawal carries the
/// zero-based stage index the stream leaves from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum ControlTarget {
    EffluxRatio,
    HeatDuty,
    HeadPressure,
    CondenserOffset,
    Withdrawal(usize),
}

/// Default ramp durations per target, seconds. Pressure moves slowly; the
/// plant cannot follow a pressure setpoint step anywhere near as fast as
/// the other actuators.
pub fn default_ramp(target: ControlTarget) -> f64 {
    match target {
        ControlTarget::HeadPressure => 300.0,
        _ => 30.0,
    }
}

/// One ramped setpoint change: baseline → `value` over `ramp_up` seconds
/// starting at `t_start`, plateau, then back to baseline over `ramp_down`
/// seconds starting at `t_end`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Perturbation {
    pub target: ControlTarget,
    pub t_start: f64,
    pub t_end: f64,
    /// Modified setpoint in the target's units.
    pub value: f64,
    pub ramp_up: f64,
    pub ramp_down: f64,
    /// Key linking back to the annotation database.
    pub anomaly_id: String,
}

impl Perturbation {
    fn validate(&self) -> Result<(), AnomalyError> {
        let fail = |message: String| {
            Err(AnomalyError::InvalidPerturbation { id: self.anomaly_id.clone(), message })
        };
        if !(self.t_start >= 0.0 && self.t_start < self.t_end) {
            return fail(format!(
                "need 0 <= t_start < t_end, got [{}, {}]",
                self.t_start, self.t_end
            ));
        }
        if self.ramp_up < 0.0 || self.ramp_down < 0.0 {
            return fail("ramp durations must be >= 0".into());
        }
        if self.ramp_up > self.t_end - self.t_start {
            return fail(format!(
                "ramp_up {} exceeds the perturbation window {}",
                self.ramp_up,
                self.t_end - self.t_start
            ));
        }
        if !self.value.is_finite() {
            return fail(format!("non-finite setpoint {}", self.value));
        }
        if self.target == ControlTarget::EffluxRatio && !(0.0..=1.0).contains(&self.value) {
            return fail(format!("efflux setpoint out of [0, 1]: {}", self.value));
        }
        Ok(())
    }

    /// Support of the deviation from baseline, ramp tails included.
    pub fn active_span(&self) -> (f64, f64) {
        (self.t_start, self.t_end + self.ramp_down)
    }

    /// Piecewise-linear value at time `t` given the target's baseline.
    fn value_at(&self, t: f64, baseline: f64) -> f64 {
        if t < self.t_start || t >= self.t_end + self.ramp_down {
            baseline
        } else if t < self.t_start + self.ramp_up {
            baseline + (self.value - baseline) * (t - self.t_start) / self.ramp_up
        } else if t < self.t_end {
            self.value
        } else if self.ramp_down > 0.0 {
            self.value + (baseline - self.value) * (t - self.t_end) / self.ramp_down
        } else {
            baseline
        }
    }
}

/// A labeled deviation window, ramp tails included.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PerturbationWindow {
    pub target: ControlTarget,
    pub t_start: f64,
    pub t_end: f64,
    pub anomaly_id: String,
}

/// Constant baseline controls plus validated, non-overlapping perturbations.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ControlTrajectory {
    baseline: ControlInputs,
    perturbations: Vec<Perturbation>,
}

impl ControlTrajectory {
    /// Validates and freezes a trajectory. Perturbations on the same target
    /// must not overlap; the check includes the ramp-down tails so that
    /// evaluation is unambiguous everywhere.
    pub fn new(
        baseline: ControlInputs,
        mut perturbations: Vec<Perturbation>,
    ) -> Result<Self, AnomalyError> {
        if !(0.0..=1.0).contains(&baseline.efflux_ratio) {
            return Err(AnomalyError::InvalidBaseline(format!(
                "efflux ratio out of [0, 1]: {}",
                baseline.efflux_ratio
            )));
        }
        for p in &perturbations {
            p.validate()?;
            if let ControlTarget::Withdrawal(stage) = p.target {
                if stage >= baseline.withdrawal.len() {
                    return Err(AnomalyError::InvalidPerturbation {
                        id: p.anomaly_id.clone(),
                        message: format!(
                            "withdrawal stage {stage} out of range for {} stages",
                            baseline.withdrawal.len()
                        ),
                    });
                }
            }
        }
        perturbations.sort_by(|a, b| a.t_start.total_cmp(&b.t_start));
        for pair in perturbations.windows(2) {
            let (a, b) = (&pair[0], &pair[1]);
            if a.target == b.target && b.t_start < a.active_span().1 {
                return Err(AnomalyError::Overlap {
                    target: a.target,
                    ids: vec![a.anomaly_id.clone(), b.anomaly_id.clone()],
                });
            }
        }
        Ok(Self { baseline, perturbations })
    }

    /// A trajectory that never deviates from its baseline.
    pub fn constant(baseline: ControlInputs) -> Self {
        Self { baseline, perturbations: Vec::new() }
    }

    pub fn baseline(&self) -> &ControlInputs {
        &self.baseline
    }

    pub fn perturbations(&self) -> &[Perturbation] {
        &self.perturbations
    }

    /// The control inputs in effect at time `t`. Outside every perturbation
    /// window the result is bitwise identical to the baseline.
    pub fn evaluate(&self, t: f64) -> ControlInputs {
        let mut u = self.baseline.clone();
        for p in &self.perturbations {
            let (lo, hi) = p.active_span();
            if t < lo || t >= hi {
                continue;
            }
            match p.target {
                ControlTarget::EffluxRatio => {
                    u.efflux_ratio = p.value_at(t, self.baseline.efflux_ratio)
                }
                ControlTarget::HeatDuty => u.heat_duty = p.value_at(t, self.baseline.heat_duty),
                ControlTarget::HeadPressure => {
                    u.head_pressure = p.value_at(t, self.baseline.head_pressure)
                }
                ControlTarget::CondenserOffset => {
                    u.condenser_offset =
                        Some(p.value_at(t, self.baseline.condenser_offset.unwrap_or(p.value)))
                }
                ControlTarget::Withdrawal(stage) => {
                    u.withdrawal[stage] = p.value_at(t, self.baseline.withdrawal[stage])
                }
            }
        }
        u
    }

    /// Chronological deviation windows used to label output records.
    pub fn windows(&self) -> Vec<PerturbationWindow> {
        let mut w: Vec<PerturbationWindow> = self
            .perturbations
            .iter()
            .map(|p| {
                let (t_start, t_end) = p.active_span();
                PerturbationWindow {
                    target: p.target,
                    t_start,
                    t_end,
                    anomaly_id: p.anomaly_id.clone(),
                }
            })
            .collect();
        w.sort_by(|a, b| a.t_start.total_cmp(&b.t_start));
        w
    }

    /// Anomaly ids active at time `t` (ramps included), in window order.
    pub fn active_ids(&self, t: f64) -> Vec<String> {
        self.windows()
            .into_iter()
            .filter(|w| t >= w.t_start && w.t_end > t)
            .map(|w| w.anomaly_id)
            .collect()
    }

    /// Times where the control signal is not smooth. The integrator aligns
    /// step boundaries with these so no kink falls inside a step.
    pub fn knot_times(&self) -> Vec<f64> {
        let mut knots: Vec<f64> = self
            .perturbations
            .iter()
            .flat_map(|p| [p.t_start, p.t_start + p.ramp_up, p.t_end, p.t_end + p.ramp_down])
            .collect();
        knots.sort_by(f64::total_cmp);
        knots.dedup();
        knots
    }
}

/// How an annotation relates to the simulation: either it maps onto a
/// control-target perturbation, or it is recorded as skipped with a reason.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum RejectionReason {
    /// The annotated cause is not an actuator the model controls
    /// (foaming agents, sensor noise/drift, ...).
    NotMappable { cause: String },
    /// The annotation is flagged not-simulated in the configuration.
    NotSimulated,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RejectedAnnotation {
    pub anomaly_id: String,
    pub reason: RejectionReason,
}

/// One anomaly annotation as recorded in the experiment database: a cause,
/// the perturbation window, the modified setpoint, and whether this
/// anomaly is to be simulated at all.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnomalyAnnotation {
    pub anomaly_id: String,
    /// Free-text cause keyword; see [`map_cause`] for the supported set.
    pub cause: String,
    /// Explicit target, overriding the cause mapping when set.
    pub target: Option<ControlTarget>,
    pub t_start: f64,
    pub t_end: f64,
    pub value: f64,
    pub ramp_up: Option<f64>,
    pub ramp_down: Option<f64>,
    pub simulated: bool,
}

/// Maps an annotated cause keyword onto a control target. Causes that do
/// not correspond to an actuator setpoint return `None`.
pub fn map_cause(cause: &str) -> Option<ControlTarget> {
    match cause {
        "efflux_ratio" | "reflux_splitter" => Some(ControlTarget::EffluxRatio),
        "heat_duty" | "heating_power" | "heater" => Some(ControlTarget::HeatDuty),
        "head_pressure" | "pressure_setpoint" | "pressure" => Some(ControlTarget::HeadPressure),
        "condenser_offset" | "condenser_cooling" | "condenser" => {
            Some(ControlTarget::CondenserOffset)
        }
        // leakage loses liquid from the reboiler vessel
        "leakage" => Some(ControlTarget::Withdrawal(0)),
        "material_withdrawal" | "withdrawal" => Some(ControlTarget::Withdrawal(0)),
        _ => None,
    }
}

/// Builds a validated trajectory from annotations. Annotations that cannot
/// be mapped onto a control target, or that are flagged not-simulated, are
/// reported individually rather than silently dropped; overlaps on the
/// same target fail construction outright.
pub fn build_trajectory(
    baseline: ControlInputs,
    annotations: &[AnomalyAnnotation],
) -> Result<(ControlTrajectory, Vec<RejectedAnnotation>), AnomalyError> {
    let mut perturbations = Vec::new();
    let mut rejected = Vec::new();
    for a in annotations {
        if !a.simulated {
            rejected.push(RejectedAnnotation {
                anomaly_id: a.anomaly_id.clone(),
                reason: RejectionReason::NotSimulated,
            });
            continue;
        }
        let target = match a.target.or_else(|| map_cause(&a.cause)) {
            Some(t) => t,
            None => {
                rejected.push(RejectedAnnotation {
                    anomaly_id: a.anomaly_id.clone(),
                    reason: RejectionReason::NotMappable { cause: a.cause.clone() },
                });
                continue;
            }
        };
        perturbations.push(Perturbation {
            target,
            t_start: a.t_start,
            t_end: a.t_end,
            value: a.value,
            ramp_up: a.ramp_up.unwrap_or_else(|| default_ramp(target)),
            ramp_down: a.ramp_down.unwrap_or_else(|| default_ramp(target)),
            anomaly_id: a.anomaly_id.clone(),
        });
    }
    let trajectory = ControlTrajectory::new(baseline, perturbations)?;
    Ok((trajectory, rejected))
}
