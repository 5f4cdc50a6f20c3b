//! Residual assembly for the reformulated index-1 column DAE.
//!
//! The system is square: one residual row per unknown slot of
//! [`StateLayout`]. Accumulation terms are expanded by the chain rule, so
//! the residual is linear in the supplied derivative vector; an implicit
//! step simply substitutes difference quotients for the derivatives and
//! solves all rows simultaneously.

use super::{ColumnState, ControlInputs, ModelError, PlantParams, StateDerivatives, StateLayout};
use crate::thermo::MixtureModel;

/// Energy rows are assembled in kW instead of W so that one absolute Newton
/// tolerance is meaningful across mass, equilibrium and energy rows.
pub const ENERGY_ROW_SCALE: f64 = 1e-3;

/// Maps equation groups to rows of the assembled residual vector. Row order:
/// reboiler total and component balances, per-stage total then component
/// balances, energy balances, equilibrium relations, summation conditions,
/// buffer total and component balances, product split, buffer saturation.
#[derive(Debug, Clone, Copy)]
pub struct RowMap {
    stages: usize,
    components: usize,
}

impl RowMap {
    pub fn new(layout: &StateLayout) -> Self {
        Self { stages: layout.stages, components: layout.components }
    }

    pub fn reboiler_total(&self) -> usize {
        0
    }

    pub fn reboiler_component(&self, comp: usize) -> usize {
        1 + comp
    }

    /// Total mass balance of stage `stage >= 1`.
    pub fn stage_total(&self, stage: usize) -> usize {
        debug_assert!(stage >= 1);
        1 + self.components + (stage - 1)
    }

    /// Component balance of stage `stage >= 1`.
    pub fn stage_component(&self, stage: usize, comp: usize) -> usize {
        debug_assert!(stage >= 1);
        1 + self.components + (self.stages - 1) + (stage - 1) * self.components + comp
    }

    pub fn energy(&self, stage: usize) -> usize {
        1 + self.components + (self.stages - 1) * (1 + self.components) + stage
    }

    pub fn equilibrium(&self, stage: usize, comp: usize) -> usize {
        self.energy(0) + self.stages + stage * self.components + comp
    }

    pub fn summation(&self, stage: usize) -> usize {
        self.equilibrium(0, 0) + self.stages * self.components + stage
    }

    pub fn buffer_total(&self) -> usize {
        self.summation(0) + self.stages
    }

    pub fn buffer_component(&self, comp: usize) -> usize {
        self.buffer_total() + 1 + comp
    }

    pub fn split(&self) -> usize {
        self.buffer_total() + 1 + self.components
    }

    pub fn buffer_saturation(&self) -> usize {
        self.split() + 1
    }
}

/// Evaluates the residual of the column DAE at `(s, s_dot)`.
///
/// A zero vector characterizes a consistent state with the given
/// derivatives. The returned vector has exactly [`StateLayout::dim`] rows
/// in [`RowMap`] order.
pub fn assemble_residuals(
    m: &MixtureModel,
    p: &PlantParams,
    u: &ControlInputs,
    s: &ColumnState,
    s_dot: &StateDerivatives,
) -> Result<Vec<f64>, ModelError> {
    let layout = StateLayout::new(p.stages, m.n_components());
    check_dims(&layout, m, p, u, s, s_dot)?;
    let z = layout.pack(s);
    let z_dot = layout.pack_derivatives(s_dot);
    let mut out = vec![0.0; layout.dim()];
    residuals_flat(m, p, u, &layout, &z, &z_dot, &mut out)?;
    Ok(out)
}

fn check_dims(
    layout: &StateLayout,
    m: &MixtureModel,
    p: &PlantParams,
    u: &ControlInputs,
    s: &ColumnState,
    s_dot: &StateDerivatives,
) -> Result<(), ModelError> {
    let (ns, nc) = (layout.stages, layout.components);
    let checks = [
        ("state holdups", s.n.len(), ns),
        ("state x", s.x.len(), ns * nc),
        ("state y", s.y.len(), ns * nc),
        ("state temperatures", s.temp.len(), ns),
        ("state liquid flows", s.liq_flow.len(), ns - 1),
        ("state vapor flows", s.vap_flow.len(), ns),
        ("state buffer composition", s.buffer_x.len(), nc),
        ("derivative x", s_dot.x.len(), ns * nc),
        ("derivative temperatures", s_dot.temp.len(), ns),
        ("derivative buffer composition", s_dot.buffer_x.len(), nc),
    ];
    for (what, got, expected) in checks {
        if got != expected {
            return Err(ModelError::DimensionMismatch { what: what.into(), expected, got });
        }
    }
    let _ = m;
    u.validate(p.stages)?;
    Ok(())
}

/// Flat-vector form of [`assemble_residuals`] used by the Newton solver.
pub(crate) fn residuals_flat(
    m: &MixtureModel,
    p: &PlantParams,
    u: &ControlInputs,
    l: &StateLayout,
    z: &[f64],
    z_dot: &[f64],
    out: &mut [f64],
) -> Result<(), ModelError> {
    let (s, c) = (l.stages, l.components);
    debug_assert_eq!(z.len(), l.dim());
    debug_assert_eq!(z_dot.len(), l.dim());
    debug_assert_eq!(out.len(), l.dim());
    let rows = RowMap::new(l);

    let n1 = z[l.n1()];
    if n1 < 0.0 {
        return Err(ModelError::StateViolation {
            stage: 0,
            message: format!("negative reboiler holdup {n1}"),
        });
    }

    let pressure = super::pressure_profile(u.head_pressure, u.pressure_drop, s)?;
    let eps = u.efflux_ratio;
    let w = &u.withdrawal;

    // per-stage property evaluations at the current iterate
    let mut k = vec![0.0; s * c]; // K-values
    let mut h_liq = vec![0.0; s];
    let mut h_vap = vec![0.0; s];
    let mut cp_mix = vec![0.0; s];
    let mut h_int = vec![0.0; s * c]; // ∫cp_i dτ per stage temperature
    for j in 0..s {
        let xj = &z[l.x(j, 0)..=l.x(j, c - 1)];
        let yj = &z[l.y(j, 0)..=l.y(j, c - 1)];
        let tj = z[l.temp(j)];
        m.k_into(xj, tj, pressure[j], &mut k[j * c..(j + 1) * c]);
        h_liq[j] = m.h_liq_raw(xj, tj);
        h_vap[j] = m.h_vap_raw(yj, tj);
        cp_mix[j] = m.cp_mix(xj, tj);
        for i in 0..c {
            h_int[j * c + i] = m.enthalpy_integral(i, tj);
        }
    }

    let buffer_x: Vec<f64> = (0..c).map(|i| z[l.buffer_x(i)]).collect();
    let t_buffer = z[l.buffer_temp()];
    let h_reflux = m.h_liq_raw(&buffer_x, t_buffer);
    let b = z[l.buffer_out()];
    let d = z[l.distillate()];
    let head = s - 1;
    let v_head = z[l.vap(head)];

    let liq_below = |j: usize| if j == 0 { 0.0 } else { z[l.liq(j - 1)] };
    let vap_below = |j: usize| if j == 0 { 0.0 } else { z[l.vap(j - 1)] };

    // reboiler balances: fed by the liquid from stage 1, boils off V^0
    out[rows.reboiler_total()] = z_dot[l.n1()] - z[l.liq(0)] + z[l.vap(0)] + w[0];
    for i in 0..c {
        out[rows.reboiler_component(i)] = n1 * z_dot[l.x(0, i)] + z[l.x(0, i)] * z_dot[l.n1()]
            - z[l.liq(0)] * z[l.x(1, i)]
            + z[l.vap(0)] * z[l.y(0, i)]
            + w[0] * z[l.x(0, i)];
    }

    // packing and head stages: fixed molar holdup closes the flows
    for j in 1..s {
        let (liq_in, liq_in_x): (f64, &dyn Fn(usize) -> f64) = if j == head {
            (((1.0 - eps) * b), &|i| buffer_x[i])
        } else {
            (z[l.liq(j)], &|i| z[l.x(j + 1, i)])
        };
        out[rows.stage_total(j)] =
            -(liq_in + vap_below(j)) + liq_below(j) + z[l.vap(j)] + w[j];
        for i in 0..c {
            out[rows.stage_component(j, i)] = p.n_hold * z_dot[l.x(j, i)]
                - liq_in * liq_in_x(i)
                - vap_below(j) * z[l.y(j - 1, i)]
                + liq_below(j) * z[l.x(j, i)]
                + z[l.vap(j)] * z[l.y(j, i)]
                + w[j] * z[l.x(j, i)];
        }
    }

    // energy balances with the chain-rule accumulation terms
    for j in 0..s {
        let holdup = if j == 0 { n1 } else { p.n_hold };
        let mut dh_dt = cp_mix[j] * z_dot[l.temp(j)];
        for i in 0..c {
            dh_dt += h_int[j * c + i] * z_dot[l.x(j, i)];
        }
        let mut accumulation = holdup * dh_dt + p.material_heat_capacity(j) * z_dot[l.temp(j)];
        if j == 0 {
            accumulation += h_liq[0] * z_dot[l.n1()];
        }

        let (h_in_liq, liq_in) = if j == head {
            (h_reflux, (1.0 - eps) * b)
        } else {
            (h_liq[j + 1], z[l.liq(j)])
        };
        let mut transport = liq_in * h_in_liq - z[l.vap(j)] * h_vap[j] - w[j] * h_liq[j];
        if j > 0 {
            transport += vap_below(j) * h_vap[j - 1] - liq_below(j) * h_liq[j];
        }
        let heat = if j == 0 {
            u.heat_duty - p.reboiler_loss_coeff * (z[l.temp(0)] - p.ambient_temperature)
        } else {
            -p.q_loss[j]
        };
        out[rows.energy(j)] = (accumulation - transport - heat) * ENERGY_ROW_SCALE;
    }

    // equilibrium and summation
    for j in 0..s {
        let mut y_sum = 0.0;
        for i in 0..c {
            out[rows.equilibrium(j, i)] = z[l.y(j, i)] - k[j * c + i] * z[l.x(j, i)];
            y_sum += z[l.y(j, i)];
        }
        out[rows.summation(j)] = y_sum - 1.0;
    }

    // constant buffer holdup: outflow balances the condensed head vapor
    out[rows.buffer_total()] = b - v_head;
    for i in 0..c {
        out[rows.buffer_component(i)] = p.n_buffer * z_dot[l.buffer_x(i)]
            - v_head * (z[l.y(head, i)] - buffer_x[i]);
    }
    out[rows.split()] = d - eps * b;

    // the reflux stream is saturated liquid: its temperature satisfies the
    // bubble condition of the buffer composition at head pressure
    out[rows.buffer_saturation()] = m.k_dot_x(&buffer_x, t_buffer, u.head_pressure) - 1.0;

    Ok(())
}
