//! Flat vector layout for the DAE unknowns.
//!
//! Ordering: reboiler holdup, stage liquid compositions, stage temperatures,
//! stage vapor compositions, vapor up-flows, liquid down-flows, buffer
//! outflow, distillate, buffer composition, buffer saturation temperature.
//! Stage indices are zero-based with stage 0 the reboiler and stage `S-1`
//! the head.

use super::{ColumnState, ControlInputs, PlantParams, StateDerivatives};
use crate::thermo::MixtureModel;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StateLayout {
    pub stages: usize,
    pub components: usize,
}

impl StateLayout {
    pub fn new(stages: usize, components: usize) -> Self {
        Self { stages, components }
    }

    pub fn dim(&self) -> usize {
        let (s, c) = (self.stages, self.components);
        2 * s * c + 3 * s + c + 3
    }

    pub fn n1(&self) -> usize {
        0
    }

    pub fn x(&self, stage: usize, comp: usize) -> usize {
        1 + stage * self.components + comp
    }

    pub fn temp(&self, stage: usize) -> usize {
        1 + self.stages * self.components + stage
    }

    pub fn y(&self, stage: usize, comp: usize) -> usize {
        1 + self.stages * self.components + self.stages + stage * self.components + comp
    }

    pub fn vap(&self, stage: usize) -> usize {
        1 + 2 * self.stages * self.components + self.stages + stage
    }

    /// Liquid down-flow from stage `stage + 1` into stage `stage`.
    pub fn liq(&self, stage: usize) -> usize {
        1 + 2 * self.stages * self.components + 2 * self.stages + stage
    }

    pub fn buffer_out(&self) -> usize {
        self.liq(0) + self.stages - 1
    }

    pub fn distillate(&self) -> usize {
        self.buffer_out() + 1
    }

    pub fn buffer_x(&self, comp: usize) -> usize {
        self.distillate() + 1 + comp
    }

    pub fn buffer_temp(&self) -> usize {
        self.buffer_x(0) + self.components
    }

    /// True for slots that carry a time derivative (reboiler holdup, stage
    /// compositions and temperatures, buffer composition). Everything else
    /// is algebraic.
    pub fn is_differential(&self, idx: usize) -> bool {
        idx < self.y(0, 0) || (idx >= self.buffer_x(0) && idx < self.buffer_temp())
    }

    /// Magnitudes used for Jacobian perturbations and variable scaling.
    pub fn typical(&self) -> Vec<f64> {
        let mut t = vec![1.0; self.dim()];
        t[self.n1()] = 10.0;
        for j in 0..self.stages {
            t[self.temp(j)] = 100.0;
            t[self.vap(j)] = 1e-3;
        }
        for j in 0..self.stages - 1 {
            t[self.liq(j)] = 1e-3;
        }
        t[self.buffer_out()] = 1e-3;
        t[self.distillate()] = 1e-3;
        t[self.buffer_temp()] = 100.0;
        t
    }

    pub fn pack(&self, s: &ColumnState) -> Vec<f64> {
        let mut z = vec![0.0; self.dim()];
        z[self.n1()] = s.n[0];
        for j in 0..self.stages {
            z[self.temp(j)] = s.temp[j];
            z[self.vap(j)] = s.vap_flow[j];
            for i in 0..self.components {
                z[self.x(j, i)] = s.x[j * self.components + i];
                z[self.y(j, i)] = s.y[j * self.components + i];
            }
        }
        for j in 0..self.stages - 1 {
            z[self.liq(j)] = s.liq_flow[j];
        }
        z[self.buffer_out()] = s.buffer_out;
        z[self.distillate()] = s.distillate;
        for i in 0..self.components {
            z[self.buffer_x(i)] = s.buffer_x[i];
        }
        z[self.buffer_temp()] = s.buffer_temp;
        z
    }

    pub fn pack_derivatives(&self, d: &StateDerivatives) -> Vec<f64> {
        let mut z = vec![0.0; self.dim()];
        z[self.n1()] = d.n1;
        for j in 0..self.stages {
            z[self.temp(j)] = d.temp[j];
            for i in 0..self.components {
                z[self.x(j, i)] = d.x[j * self.components + i];
            }
        }
        for i in 0..self.components {
            z[self.buffer_x(i)] = d.buffer_x[i];
        }
        z
    }

    /// Rebuilds a full [`ColumnState`] from the flat unknown vector,
    /// recomputing the derived fields (holdups of the fixed stages,
    /// pressures, enthalpies, reflux, condenser temperature).
    pub fn unpack(
        &self,
        z: &[f64],
        m: &MixtureModel,
        p: &PlantParams,
        u: &ControlInputs,
    ) -> ColumnState {
        let (s, c) = (self.stages, self.components);
        let mut n = vec![p.n_hold; s];
        n[0] = z[self.n1()];
        let mut x = vec![0.0; s * c];
        let mut y = vec![0.0; s * c];
        let mut temp = vec![0.0; s];
        let mut vap_flow = vec![0.0; s];
        for j in 0..s {
            temp[j] = z[self.temp(j)];
            vap_flow[j] = z[self.vap(j)];
            for i in 0..c {
                x[j * c + i] = z[self.x(j, i)];
                y[j * c + i] = z[self.y(j, i)];
            }
        }
        let liq_flow: Vec<f64> = (0..s - 1).map(|j| z[self.liq(j)]).collect();
        let buffer_x: Vec<f64> = (0..c).map(|i| z[self.buffer_x(i)]).collect();
        let buffer_out = z[self.buffer_out()];

        let pressure =
            super::pressure_profile(u.head_pressure, u.pressure_drop, s).expect("validated");
        let h_liq: Vec<f64> =
            (0..s).map(|j| m.h_liq_raw(&x[j * c..(j + 1) * c], temp[j])).collect();
        let h_vap: Vec<f64> =
            (0..s).map(|j| m.h_vap_raw(&y[j * c..(j + 1) * c], temp[j])).collect();
        let dt_cond = u.condenser_offset.unwrap_or(p.dt_condenser);
        let t_cond = temp[s - 1] - dt_cond;

        ColumnState {
            n,
            x,
            y,
            temp,
            liq_flow,
            vap_flow,
            buffer_x,
            buffer_temp: z[self.buffer_temp()],
            buffer_out,
            distillate: z[self.distillate()],
            reflux: (1.0 - u.efflux_ratio) * buffer_out,
            t_cond,
            h_liq,
            h_vap,
            pressure,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dim_counts_all_blocks() {
        let l = StateLayout::new(12, 3);
        assert_eq!(l.dim(), 114);
        assert_eq!(l.buffer_temp(), l.dim() - 1);
        let l2 = StateLayout::new(2, 2);
        assert_eq!(l2.dim(), 2 * 2 * 2 + 3 * 2 + 2 + 3);
    }

    #[test]
    fn differential_mask_selects_expected_slots() {
        let l = StateLayout::new(3, 2);
        let diff: Vec<usize> = (0..l.dim()).filter(|&k| l.is_differential(k)).collect();
        let mut expected = vec![l.n1()];
        for j in 0..3 {
            for i in 0..2 {
                expected.push(l.x(j, i));
            }
        }
        for j in 0..3 {
            expected.push(l.temp(j));
        }
        for i in 0..2 {
            expected.push(l.buffer_x(i));
        }
        expected.sort_unstable();
        assert_eq!(diff, expected);
    }
}
