//! Sampled output records and their CSV schema.
//!
//! The column layout is the repository's contract: `t`, per-stage blocks
//! (holdup, liquid down-flow, vapor up-flow, liquid and vapor enthalpy,
//! pressure, temperature), the condenser temperature, per-stage-per-component
//! liquid and vapor mole fractions, the buffer composition, the scalar
//! controls and product streams, and the anomaly labels. Stage and component
//! indices in header names are one-based. Floats are printed with 17
//! significant digits so re-reading a file reproduces every record exactly.

use std::fmt::Write as _;
use std::path::Path;

use super::WorkflowError;
use crate::column::{ColumnState, ControlInputs};

/// One sampled row of a simulation.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeriesRecord {
    /// Sample time, s.
    pub t: f64,
    /// Per-stage liquid holdup, mol.
    pub n: Vec<f64>,
    /// Liquid down-flows, length `S-1`, mol/s.
    pub liq_flow: Vec<f64>,
    /// Vapor up-flows, mol/s.
    pub vap_flow: Vec<f64>,
    /// Liquid enthalpies, J/mol.
    pub h_liq: Vec<f64>,
    /// Vapor enthalpies, J/mol.
    pub h_vap: Vec<f64>,
    /// Stage pressures, Pa.
    pub pressure: Vec<f64>,
    /// Stage temperatures, K.
    pub temp: Vec<f64>,
    /// Condenser temperature, K.
    pub t_cond: f64,
    /// Liquid mole fractions, row-major `[stage][component]`.
    pub x: Vec<f64>,
    /// Vapor mole fractions, row-major `[stage][component]`.
    pub y: Vec<f64>,
    /// Buffer composition.
    pub buffer_x: Vec<f64>,
    /// Net reboiler heat duty, W.
    pub heat_duty: f64,
    pub efflux_ratio: f64,
    /// Distillate stream, mol/s.
    pub distillate: f64,
    /// Reflux stream, mol/s.
    pub reflux: f64,
    /// True while any control deviates from baseline (ramps included).
    pub anomaly_flag: bool,
    /// Ids of the active perturbation windows.
    pub anomaly_ids: Vec<String>,
}

impl TimeSeriesRecord {
    pub fn from_state(
        t: f64,
        state: &ColumnState,
        controls: &ControlInputs,
        anomaly_ids: Vec<String>,
    ) -> Self {
        Self {
            t,
            n: state.n.clone(),
            liq_flow: state.liq_flow.clone(),
            vap_flow: state.vap_flow.clone(),
            h_liq: state.h_liq.clone(),
            h_vap: state.h_vap.clone(),
            pressure: state.pressure.clone(),
            temp: state.temp.clone(),
            t_cond: state.t_cond,
            x: state.x.clone(),
            y: state.y.clone(),
            buffer_x: state.buffer_x.clone(),
            heat_duty: controls.heat_duty,
            efflux_ratio: controls.efflux_ratio,
            distillate: state.distillate,
            reflux: state.reflux,
            anomaly_flag: !anomaly_ids.is_empty(),
            anomaly_ids,
        }
    }

    pub fn stages(&self) -> usize {
        self.n.len()
    }

    pub fn components(&self) -> usize {
        self.buffer_x.len()
    }

    /// Looks a numeric signal up by its schema column name.
    pub fn signal(&self, name: &str) -> Option<f64> {
        let indexed = |prefix: &str, v: &[f64]| -> Option<f64> {
            let idx: usize = name.strip_prefix(prefix)?.parse().ok()?;
            v.get(idx.checked_sub(1)?).copied()
        };
        let stage_comp = |prefix: &str, v: &[f64]| -> Option<f64> {
            let rest = name.strip_prefix(prefix)?;
            let (j, i) = rest.split_once('_')?;
            let (j, i): (usize, usize) = (j.parse().ok()?, i.parse().ok()?);
            v.get((j.checked_sub(1)?) * self.components() + i.checked_sub(1)?).copied()
        };
        match name {
            "t" => Some(self.t),
            "T_cond" => Some(self.t_cond),
            "Q_in" => Some(self.heat_duty),
            "epsilon" => Some(self.efflux_ratio),
            "D" => Some(self.distillate),
            "reflux" => Some(self.reflux),
            "anomaly_flag" => Some(if self.anomaly_flag { 1.0 } else { 0.0 }),
            _ => {
                if name.starts_with("x_") {
                    stage_comp("x_", &self.x)
                } else if name.starts_with("y_") {
                    stage_comp("y_", &self.y)
                } else if name.starts_with("xB_") {
                    indexed("xB_", &self.buffer_x)
                } else if name.starts_with("n_") {
                    indexed("n_", &self.n)
                } else if name.starts_with("L_") {
                    indexed("L_", &self.liq_flow)
                } else if name.starts_with("V_") {
                    indexed("V_", &self.vap_flow)
                } else if name.starts_with("hL_") {
                    indexed("hL_", &self.h_liq)
                } else if name.starts_with("hV_") {
                    indexed("hV_", &self.h_vap)
                } else if name.starts_with("P_") {
                    indexed("P_", &self.pressure)
                } else if name.starts_with("T_") {
                    indexed("T_", &self.temp)
                } else {
                    None
                }
            }
        }
    }
}

/// Total CSV column count for a column with `s` stages and `c` components.
pub fn column_count(s: usize, c: usize) -> usize {
    6 * s + (s - 1) + 2 * s * c + c + 8
}

/// All numeric signal names of the schema, header order.
pub fn signal_names(s: usize, c: usize) -> Vec<String> {
    let mut names = vec!["t".to_string()];
    let blocks: [(&str, usize); 7] = [
        ("n", s),
        ("L", s - 1),
        ("V", s),
        ("hL", s),
        ("hV", s),
        ("P", s),
        ("T", s),
    ];
    for (prefix, len) in blocks {
        for j in 1..=len {
            names.push(format!("{prefix}_{j}"));
        }
    }
    names.push("T_cond".into());
    for prefix in ["x", "y"] {
        for j in 1..=s {
            for i in 1..=c {
                names.push(format!("{prefix}_{j}_{i}"));
            }
        }
    }
    for i in 1..=c {
        names.push(format!("xB_{i}"));
    }
    names.extend(["Q_in", "epsilon", "D", "reflux", "anomaly_flag"].map(String::from));
    names
}

pub fn csv_header(s: usize, c: usize) -> String {
    let mut header = signal_names(s, c).join(",");
    header.push_str(",anomaly_ids");
    header
}

/// 17 significant digits: enough to reproduce any f64 exactly on re-read.
fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub(super) fn csv_row(r: &TimeSeriesRecord) -> String {
    let mut row = String::with_capacity(32 * column_count(r.stages(), r.components()));
    let mut push = |v: f64| {
        row.push_str(&fmt_f64(v));
        row.push(',');
    };
    push(r.t);
    for block in [&r.n, &r.liq_flow, &r.vap_flow, &r.h_liq, &r.h_vap, &r.pressure, &r.temp] {
        block.iter().copied().for_each(&mut push);
    }
    push(r.t_cond);
    for block in [&r.x, &r.y, &r.buffer_x] {
        block.iter().copied().for_each(&mut push);
    }
    [r.heat_duty, r.efflux_ratio, r.distillate, r.reflux].into_iter().for_each(&mut push);
    let _ = write!(row, "{},", u8::from(r.anomaly_flag));
    row.push_str(&r.anomaly_ids.join(";"));
    row
}

/// Writes records straight to `path` (no dataset layout involved).
pub fn write_timeseries_file(
    records: &[TimeSeriesRecord],
    path: &Path,
) -> Result<(), WorkflowError> {
    let first = records
        .first()
        .ok_or_else(|| WorkflowError::Validation("refusing to write an empty time series".into()))?;
    let (s, c) = (first.stages(), first.components());
    let mut out = String::new();
    out.push_str(&csv_header(s, c));
    out.push('\n');
    for r in records {
        out.push_str(&csv_row(r));
        out.push('\n');
    }
    std::fs::write(path, out).map_err(|e| WorkflowError::io(path, e))
}

/// Reads a schema CSV back into records, inferring the stage and component
/// counts from the header.
pub fn read_timeseries(path: &Path) -> Result<Vec<TimeSeriesRecord>, WorkflowError> {
    let text = std::fs::read_to_string(path).map_err(|e| WorkflowError::io(path, e))?;
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| WorkflowError::Parse { path: path.display().to_string(), message: "empty file".into() })?;
    let cols: Vec<&str> = header.split(',').collect();
    let s = cols.iter().filter(|c| c.starts_with("n_")).count();
    let c = cols.iter().filter(|c| c.starts_with("xB_")).count();
    if s == 0 || c == 0 || header != csv_header(s, c) {
        return Err(WorkflowError::Parse {
            path: path.display().to_string(),
            message: "header does not match the time-series schema".into(),
        });
    }

    let mut records = Vec::new();
    for (lineno, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != column_count(s, c) {
            return Err(WorkflowError::Parse {
                path: path.display().to_string(),
                message: format!(
                    "line {}: {} fields, expected {}",
                    lineno + 2,
                    fields.len(),
                    column_count(s, c)
                ),
            });
        }
        let mut it = fields.iter();
        let mut take = |count: usize| -> Result<Vec<f64>, WorkflowError> {
            (0..count)
                .map(|_| {
                    it.next().unwrap().parse::<f64>().map_err(|e| WorkflowError::Parse {
                        path: path.display().to_string(),
                        message: format!("line {}: {e}", lineno + 2),
                    })
                })
                .collect()
        };
        let t = take(1)?[0];
        let n = take(s)?;
        let liq_flow = take(s - 1)?;
        let vap_flow = take(s)?;
        let h_liq = take(s)?;
        let h_vap = take(s)?;
        let pressure = take(s)?;
        let temp = take(s)?;
        let t_cond = take(1)?[0];
        let x = take(s * c)?;
        let y = take(s * c)?;
        let buffer_x = take(c)?;
        let scalars = take(4)?;
        let flag = take(1)?[0];
        let ids_field = *it.next().unwrap();
        records.push(TimeSeriesRecord {
            t,
            n,
            liq_flow,
            vap_flow,
            h_liq,
            h_vap,
            pressure,
            temp,
            t_cond,
            x,
            y,
            buffer_x,
            heat_duty: scalars[0],
            efflux_ratio: scalars[1],
            distillate: scalars[2],
            reflux: scalars[3],
            anomaly_flag: flag != 0.0,
            anomaly_ids: if ids_field.is_empty() {
                Vec::new()
            } else {
                ids_field.split(';').map(String::from).collect()
            },
        });
    }
    Ok(records)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dummy_record(t: f64, s: usize, c: usize) -> TimeSeriesRecord {
        let sc: Vec<f64> = (0..s * c).map(|k| (k as f64 + 0.1) / (s * c) as f64).collect();
        TimeSeriesRecord {
            t,
            n: (0..s).map(|j| 0.03 + j as f64).collect(),
            liq_flow: (0..s - 1).map(|j| 1e-3 + j as f64 * 1e-5).collect(),
            vap_flow: (0..s).map(|j| 2e-3 + j as f64 * 1e-5).collect(),
            h_liq: (0..s).map(|j| 6000.0 + j as f64).collect(),
            h_vap: (0..s).map(|j| 48_000.0 + j as f64).collect(),
            pressure: (0..s).map(|j| 70_000.0 + j as f64).collect(),
            temp: (0..s).map(|j| 350.0 + j as f64 / 7.0).collect(),
            t_cond: 330.123456789,
            x: sc.clone(),
            y: sc,
            buffer_x: (0..c).map(|i| 1.0 / c as f64 + i as f64 * 1e-6).collect(),
            heat_duty: 79.77,
            efflux_ratio: 0.44,
            distillate: 8.1e-4,
            reflux: 1.03e-3,
            anomaly_flag: t > 100.0,
            anomaly_ids: if t > 100.0 { vec!["A-1".into(), "A-2".into()] } else { vec![] },
        }
    }

    #[test]
    fn column_count_formula() {
        assert_eq!(column_count(12, 3), 166);
        assert_eq!(csv_header(12, 3).split(',').count(), 166);
        assert_eq!(signal_names(12, 3).len(), 165); // everything except anomaly_ids
    }

    #[test]
    fn roundtrip_is_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.csv");
        let records: Vec<_> = (0..5).map(|k| dummy_record(k as f64 * 60.0, 4, 2)).collect();
        write_timeseries_file(&records, &path).unwrap();
        let back = read_timeseries(&path).unwrap();
        assert_eq!(records, back);
    }

    #[test]
    fn single_record_file_has_two_lines() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("single.csv");
        write_timeseries_file(&[dummy_record(0.0, 3, 2)], &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text.trim_end().lines().count(), 2);
        assert!(write_timeseries_file(&[], &path).is_err());
    }

    #[test]
    fn signals_resolve_by_name() {
        let r = dummy_record(0.0, 4, 2);
        assert_eq!(r.signal("T_1"), Some(350.0));
        assert_eq!(r.signal("T_4"), Some(350.0 + 3.0 / 7.0));
        assert_eq!(r.signal("n_2"), Some(1.03));
        assert_eq!(r.signal("x_1_1"), Some(r.x[0]));
        assert_eq!(r.signal("x_2_1"), Some(r.x[2]));
        assert_eq!(r.signal("xB_2"), Some(r.buffer_x[1]));
        assert_eq!(r.signal("D"), Some(8.1e-4));
        assert_eq!(r.signal("T_cond"), Some(330.123456789));
        assert_eq!(r.signal("bogus"), None);
        assert_eq!(r.signal("T_9"), None);
    }
}
