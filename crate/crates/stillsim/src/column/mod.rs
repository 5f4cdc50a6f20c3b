//! The equilibrium-stage batch column model.
//!
//! Stage 0 is the heated reboiler, stage `S-1` the head. Vapor from the head
//! is totally condensed into a buffer vessel of constant molar holdup; the
//! buffer outflow splits into distillate `D = ε·B` and reflux `(1-ε)·B`
//! returned to the head stage as saturated liquid at buffer composition.
//! Packing stages hold a fixed liquid amount, which closes the liquid
//! flows algebraically; only the reboiler holdup, the stage compositions
//! and temperatures, and the buffer composition carry time derivatives.
//!
//! [`assemble_residuals`] evaluates the full square residual of the
//! resulting semi-explicit index-1 system; the integrator discretizes its
//! differential rows and solves everything simultaneously per step.

mod init;
mod layout;
mod residual;

pub use init::initialize_consistent;
pub use layout::StateLayout;
pub(crate) use residual::residuals_flat;
pub use residual::{assemble_residuals, RowMap, ENERGY_ROW_SCALE};

use crate::thermo::ThermoError;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("invalid configuration: {0}")]
    InvalidConfiguration(String),
    #[error("dimension mismatch in {what}: expected {expected}, got {got}")]
    DimensionMismatch { what: String, expected: usize, got: usize },
    #[error("state violation on stage {stage}: {message}")]
    StateViolation { stage: usize, message: String },
    #[error(transparent)]
    Thermo(#[from] ThermoError),
}

/// Plant-specific constants, fixed across all scenarios of a campaign.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlantParams {
    /// Number of equilibrium stages including the reboiler.
    pub stages: usize,
    /// Steel mass on or around each stage, kg.
    pub m_steel: Vec<f64>,
    /// Glass mass on or around each stage, kg.
    pub m_glass: Vec<f64>,
    /// J/(kg K)
    pub cp_steel: f64,
    /// J/(kg K)
    pub cp_glass: f64,
    /// Per-stage thermal-inertia correction factors.
    pub correction: Vec<f64>,
    /// Reference temperature of the equipment energy datum, K.
    pub t_ref: f64,
    /// Constant per-stage heat losses, W. Entry 0 is unused: the reboiler
    /// loss is folded into the net heat duty.
    pub q_loss: Vec<f64>,
    /// Condenser temperature offset below the head stage, K.
    pub dt_condenser: f64,
    /// Fixed liquid molar holdup of each packing stage, mol.
    pub n_hold: f64,
    /// Constant buffer-vessel holdup, mol.
    pub n_buffer: f64,
    /// Optional affine reboiler loss `k_loss (T1 - T_amb)` subtracted from
    /// the heat duty, for configurations that only know setpoint values.
    pub reboiler_loss_coeff: f64,
    /// K
    pub ambient_temperature: f64,
}

impl PlantParams {
    pub fn validate(&self) -> Result<(), ModelError> {
        if self.stages < 2 {
            return Err(ModelError::InvalidConfiguration(format!(
                "need at least 2 stages, got {}",
                self.stages
            )));
        }
        for (name, v) in
            [("m_steel", &self.m_steel), ("m_glass", &self.m_glass), ("q_loss", &self.q_loss)]
        {
            if v.len() != self.stages {
                return Err(ModelError::DimensionMismatch {
                    what: name.into(),
                    expected: self.stages,
                    got: v.len(),
                });
            }
            if v.iter().any(|e| *e < 0.0 || !e.is_finite()) {
                return Err(ModelError::InvalidConfiguration(format!("negative entry in {name}")));
            }
        }
        if self.correction.len() != self.stages {
            return Err(ModelError::DimensionMismatch {
                what: "correction".into(),
                expected: self.stages,
                got: self.correction.len(),
            });
        }
        if self.correction.iter().any(|c| *c <= 0.0) {
            return Err(ModelError::InvalidConfiguration("correction factors must be > 0".into()));
        }
        if self.cp_steel < 0.0 || self.cp_glass < 0.0 {
            return Err(ModelError::InvalidConfiguration("heat capacities must be >= 0".into()));
        }
        if !(self.dt_condenser > 0.0) {
            return Err(ModelError::InvalidConfiguration(format!(
                "condenser offset must be > 0, got {}",
                self.dt_condenser
            )));
        }
        if self.n_hold < 0.0 || self.n_buffer < 0.0 {
            return Err(ModelError::InvalidConfiguration("holdups must be >= 0".into()));
        }
        Ok(())
    }

    /// `c^j (m_steel^j cp_steel + m_glass^j cp_glass)`, the equipment heat
    /// capacity of one stage in J/K.
    pub fn material_heat_capacity(&self, stage: usize) -> f64 {
        self.correction[stage]
            * (self.m_steel[stage] * self.cp_steel + self.m_glass[stage] * self.cp_glass)
    }
}

/// Instantaneous values of the control signals.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ControlInputs {
    /// Distillate share of the buffer outflow, in `[0, 1]`.
    pub efflux_ratio: f64,
    /// Head-stage pressure, Pa.
    pub head_pressure: f64,
    /// Total pressure drop from reboiler to head, Pa.
    pub pressure_drop: f64,
    /// Net reboiler heat duty, W.
    pub heat_duty: f64,
    /// Overrides the plant condenser offset when set, K.
    pub condenser_offset: Option<f64>,
    /// External liquid withdrawal per stage, mol/s.
    pub withdrawal: Vec<f64>,
}

impl ControlInputs {
    /// Constant controls with no withdrawal.
    pub fn new(
        efflux_ratio: f64,
        head_pressure: f64,
        pressure_drop: f64,
        heat_duty: f64,
        stages: usize,
    ) -> Self {
        Self {
            efflux_ratio,
            head_pressure,
            pressure_drop,
            heat_duty,
            condenser_offset: None,
            withdrawal: vec![0.0; stages],
        }
    }

    pub fn validate(&self, stages: usize) -> Result<(), ModelError> {
        if !(0.0..=1.0).contains(&self.efflux_ratio) {
            return Err(ModelError::InvalidConfiguration(format!(
                "efflux ratio out of [0, 1]: {}",
                self.efflux_ratio
            )));
        }
        if !(self.head_pressure > 0.0) {
            return Err(ModelError::InvalidConfiguration(format!(
                "head pressure must be > 0, got {}",
                self.head_pressure
            )));
        }
        if self.pressure_drop < 0.0 {
            return Err(ModelError::InvalidConfiguration(format!(
                "pressure drop must be >= 0, got {}",
                self.pressure_drop
            )));
        }
        if self.withdrawal.len() != stages {
            return Err(ModelError::DimensionMismatch {
                what: "withdrawal".into(),
                expected: stages,
                got: self.withdrawal.len(),
            });
        }
        if self.withdrawal.iter().any(|w| *w < 0.0) {
            return Err(ModelError::InvalidConfiguration("withdrawal must be >= 0".into()));
        }
        if let Some(dt) = self.condenser_offset {
            if !(dt > 0.0) {
                return Err(ModelError::InvalidConfiguration(format!(
                    "condenser offset must be > 0, got {dt}"
                )));
            }
        }
        Ok(())
    }
}

/// The full instantaneous column state. Vectors indexed by stage are
/// zero-based from the reboiler; compositions are row-major
/// `[stage][component]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ColumnState {
    /// Liquid molar holdup per stage, mol.
    pub n: Vec<f64>,
    /// Liquid compositions, `S*C`.
    pub x: Vec<f64>,
    /// Vapor compositions, `S*C`.
    pub y: Vec<f64>,
    /// Stage temperatures, K.
    pub temp: Vec<f64>,
    /// Liquid down-flows; entry `j` flows from stage `j+1` to `j`, mol/s.
    pub liq_flow: Vec<f64>,
    /// Vapor up-flows; entry `j` leaves stage `j`, mol/s.
    pub vap_flow: Vec<f64>,
    /// Buffer liquid composition.
    pub buffer_x: Vec<f64>,
    /// Saturation temperature of the buffer liquid at head pressure, K.
    pub buffer_temp: f64,
    /// Buffer outflow `B`, mol/s.
    pub buffer_out: f64,
    /// Distillate stream `D = ε·B`, mol/s.
    pub distillate: f64,
    /// Reflux stream `(1-ε)·B`, mol/s.
    pub reflux: f64,
    /// Condenser temperature `T^head - ΔT`, K.
    pub t_cond: f64,
    /// Liquid molar enthalpy per stage, J/mol.
    pub h_liq: Vec<f64>,
    /// Vapor molar enthalpy per stage, J/mol.
    pub h_vap: Vec<f64>,
    /// Stage pressures, Pa.
    pub pressure: Vec<f64>,
}

impl ColumnState {
    pub fn stages(&self) -> usize {
        self.n.len()
    }

    pub fn components(&self) -> usize {
        self.buffer_x.len()
    }

    pub fn stage_x(&self, stage: usize) -> &[f64] {
        let c = self.components();
        &self.x[stage * c..(stage + 1) * c]
    }

    pub fn stage_y(&self, stage: usize) -> &[f64] {
        let c = self.components();
        &self.y[stage * c..(stage + 1) * c]
    }
}

/// Time derivatives of the differential states; everything not listed here
/// is algebraic.
#[derive(Debug, Clone, PartialEq)]
pub struct StateDerivatives {
    pub n1: f64,
    /// `S*C`
    pub x: Vec<f64>,
    /// `S`
    pub temp: Vec<f64>,
    /// `C`
    pub buffer_x: Vec<f64>,
}

impl StateDerivatives {
    pub fn zeros(stages: usize, components: usize) -> Self {
        Self {
            n1: 0.0,
            x: vec![0.0; stages * components],
            temp: vec![0.0; stages],
            buffer_x: vec![0.0; components],
        }
    }
}

/// Linear stage-pressure profile: `P^j = P^head + (S - j) ΔP / (S - 1)` with
/// one-based `j`; index 0 of the returned vector is the reboiler at
/// `P^head + ΔP`, the last entry is exactly `P^head`.
pub fn pressure_profile(
    head_pressure: f64,
    pressure_drop: f64,
    stages: usize,
) -> Result<Vec<f64>, ModelError> {
    if stages < 2 {
        return Err(ModelError::InvalidConfiguration(format!(
            "pressure profile needs at least 2 stages, got {stages}"
        )));
    }
    if pressure_drop < 0.0 {
        return Err(ModelError::InvalidConfiguration(format!(
            "pressure drop must be >= 0, got {pressure_drop}"
        )));
    }
    let s = stages as f64;
    Ok((0..stages)
        .map(|j0| {
            let j = (j0 + 1) as f64;
            head_pressure + (s - j) * pressure_drop / (s - 1.0)
        })
        .collect())
}

/// Internal energy stored in packing material and walls of one stage,
/// `U = c^j (m_steel cp_steel + m_glass cp_glass)(T - T_ref)` in J.
pub fn internal_energy_material(
    p: &PlantParams,
    stage: usize,
    t: f64,
) -> Result<f64, ModelError> {
    if stage >= p.stages {
        return Err(ModelError::InvalidConfiguration(format!(
            "stage index {stage} out of range for {} stages",
            p.stages
        )));
    }
    Ok(p.material_heat_capacity(stage) * (t - p.t_ref))
}

/// Total apparatus holdup: all stage holdups plus the buffer content.
pub fn apparatus_holdup(state: &ColumnState, n_buffer: f64) -> f64 {
    state.n.iter().sum::<f64>() + n_buffer
}

#[cfg(test)]
pub(crate) fn lab_plant() -> PlantParams {
    let stages = 12;
    let mut m_steel = vec![0.058; stages];
    let mut m_glass = vec![0.2; stages];
    m_steel[0] = 0.25;
    m_glass[0] = 1.25;
    let mut correction = vec![2.5; stages];
    correction[0] = 1.0;
    let mut q_loss = vec![0.0; stages];
    q_loss[stages - 1] = 2.0;
    PlantParams {
        stages,
        m_steel,
        m_glass,
        cp_steel: 510.79,
        cp_glass: 830.0,
        correction,
        t_ref: 273.15,
        q_loss,
        dt_condenser: 20.0,
        n_hold: 0.03,
        n_buffer: 0.5,
        reboiler_loss_coeff: 0.0,
        ambient_temperature: 298.15,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn pressure_profile_endpoints_and_interior() {
        let p = pressure_profile(70_000.0, 93.0, 12).unwrap();
        assert_eq!(p[0], 70_093.0);
        assert_eq!(p[11], 70_000.0);
        // one-based stage 6
        assert_relative_eq!(p[5], 70_000.0 + 6.0 * 93.0 / 11.0, max_relative = 1e-15);
        assert_relative_eq!(p[5], 70_050.72727272727, max_relative = 1e-12);
        // linear in the stage index
        for j in 1..11 {
            assert_relative_eq!(p[j - 1] - p[j], p[j] - p[j + 1], max_relative = 1e-9);
        }
    }

    #[test]
    fn pressure_profile_rejects_bad_input() {
        assert!(pressure_profile(70_000.0, 93.0, 1).is_err());
        assert!(pressure_profile(70_000.0, -1.0, 12).is_err());
    }

    #[test]
    fn material_energy_reference_case() {
        let p = lab_plant();
        let u = internal_energy_material(&p, 0, 373.15).unwrap();
        assert_relative_eq!(u, 116_519.75, max_relative = 1e-12);
        assert_eq!(internal_energy_material(&p, 0, p.t_ref).unwrap(), 0.0);

        let mut doubled = p.clone();
        doubled.correction[0] *= 2.0;
        assert_relative_eq!(
            internal_energy_material(&doubled, 0, 373.15).unwrap(),
            2.0 * u,
            max_relative = 1e-14
        );

        assert!(internal_energy_material(&p, 12, 300.0).is_err());
    }

    #[test]
    fn apparatus_holdup_sums_stages_and_buffer() {
        let state = ColumnState {
            n: vec![1.0; 12],
            x: vec![1.0 / 3.0; 36],
            y: vec![1.0 / 3.0; 36],
            temp: vec![350.0; 12],
            liq_flow: vec![0.0; 11],
            vap_flow: vec![0.0; 12],
            buffer_x: vec![1.0 / 3.0; 3],
            buffer_temp: 350.0,
            buffer_out: 0.0,
            distillate: 0.0,
            reflux: 0.0,
            t_cond: 330.0,
            h_liq: vec![0.0; 12],
            h_vap: vec![0.0; 12],
            pressure: vec![70_000.0; 12],
        };
        assert_eq!(apparatus_holdup(&state, 0.5), 12.5);
    }

    #[test]
    fn plant_validation_catches_bad_vectors() {
        let mut p = lab_plant();
        p.q_loss.pop();
        assert!(matches!(p.validate(), Err(ModelError::DimensionMismatch { .. })));

        let mut p = lab_plant();
        p.correction[3] = 0.0;
        assert!(p.validate().is_err());

        let mut p = lab_plant();
        p.dt_condenser = 0.0;
        assert!(p.validate().is_err());
    }

    #[test]
    fn control_validation_bounds() {
        let mut u = ControlInputs::new(0.3, 70_000.0, 93.0, 230.0, 12);
        assert!(u.validate(12).is_ok());
        u.efflux_ratio = 1.3;
        assert!(u.validate(12).is_err());
        u.efflux_ratio = 0.3;
        u.withdrawal[4] = -1e-4;
        assert!(u.validate(12).is_err());
        u.withdrawal[4] = 0.0;
        assert!(u.validate(11).is_err());
    }
}
