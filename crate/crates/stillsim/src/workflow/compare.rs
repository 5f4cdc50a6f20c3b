//! Alignment and deviation metrics between a simulation and a reference
//! series (another simulation, or measured data from a wide CSV).

use std::collections::BTreeMap;
use std::path::Path;

use serde::Serialize;

use super::timeseries::TimeSeriesRecord;
use super::WorkflowError;

/// Canonical unit of a schema signal, used to refuse comparing mismatched
/// quantities when the reference declares units.
pub fn signal_unit(name: &str) -> &'static str {
    if name == "t" {
        "s"
    } else if name == "Q_in" {
        "W"
    } else if name.starts_with("T_") {
        "K"
    } else if name.starts_with("P_") {
        "Pa"
    } else if name.starts_with("hL_") || name.starts_with("hV_") {
        "J/mol"
    } else if name.starts_with("n_") {
        "mol"
    } else if name.starts_with("L_") || name.starts_with("V_") || name == "D" || name == "reflux" {
        "mol/s"
    } else {
        // mole fractions, efflux ratio, anomaly flag
        "-"
    }
}

/// Maps reference-CSV columns onto canonical signal names. Parsed from a
/// small TOML document:
///
/// ```toml
/// time = "Time_s"
/// [signals]
/// T_1 = "TIR_101"
/// T_12 = "TIR_112"
/// [units]
/// T_1 = "K"
/// ```
#[derive(Debug, Clone, PartialEq)]
pub struct SignalMap {
    pub time_column: String,
    /// canonical name -> reference column
    pub columns: BTreeMap<String, String>,
    /// canonical name -> declared unit
    pub units: BTreeMap<String, String>,
}

impl SignalMap {
    /// Column names already canonical, time column `t`, no unit claims.
    pub fn identity() -> Self {
        Self { time_column: "t".into(), columns: BTreeMap::new(), units: BTreeMap::new() }
    }

    pub fn parse(text: &str) -> Result<Self, WorkflowError> {
        let value: toml::Table = text.parse().map_err(|e| WorkflowError::Parse {
            path: "signal map".into(),
            message: format!("{e}"),
        })?;
        let time_column = value
            .get("time")
            .and_then(|v| v.as_str())
            .unwrap_or("t")
            .to_string();
        let read_table = |key: &str| -> Result<BTreeMap<String, String>, WorkflowError> {
            let mut out = BTreeMap::new();
            if let Some(table) = value.get(key) {
                let table = table.as_table().ok_or_else(|| WorkflowError::Parse {
                    path: "signal map".into(),
                    message: format!("'{key}' must be a table"),
                })?;
                for (k, v) in table {
                    let v = v.as_str().ok_or_else(|| WorkflowError::Parse {
                        path: "signal map".into(),
                        message: format!("{key}.{k} must be a string"),
                    })?;
                    out.insert(k.clone(), v.to_string());
                }
            }
            Ok(out)
        };
        Ok(Self { time_column, columns: read_table("signals")?, units: read_table("units")? })
    }

    pub fn load(path: &Path) -> Result<Self, WorkflowError> {
        let text = std::fs::read_to_string(path).map_err(|e| WorkflowError::io(path, e))?;
        Self::parse(&text)
    }
}

/// A time-indexed set of named reference signals.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceSeries {
    times: Vec<f64>,
    signals: BTreeMap<String, Vec<f64>>,
    units: BTreeMap<String, String>,
}

impl ReferenceSeries {
    /// Uses a simulated series as the reference, exposing every schema
    /// signal under its canonical name.
    pub fn from_records(records: &[TimeSeriesRecord]) -> Result<Self, WorkflowError> {
        let first = records.first().ok_or_else(|| {
            WorkflowError::Comparison("reference series has no records".into())
        })?;
        let names = super::timeseries::signal_names(first.stages(), first.components());
        let times: Vec<f64> = records.iter().map(|r| r.t).collect();
        let mut signals = BTreeMap::new();
        for name in names.into_iter().filter(|n| n != "t") {
            let values: Vec<f64> =
                records.iter().map(|r| r.signal(&name).expect("schema signal")).collect();
            signals.insert(name, values);
        }
        Ok(Self { times, signals, units: BTreeMap::new() })
    }

    /// Loads a generic wide CSV (one time column, one column per signal)
    /// through a [`SignalMap`]. With an empty map every column whose name
    /// is already canonical is taken as-is.
    pub fn from_wide_csv(path: &Path, map: &SignalMap) -> Result<Self, WorkflowError> {
        let text = std::fs::read_to_string(path).map_err(|e| WorkflowError::io(path, e))?;
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header: Vec<String> = lines
            .next()
            .ok_or_else(|| WorkflowError::Parse {
                path: path.display().to_string(),
                message: "empty file".into(),
            })?
            .split(',')
            .map(|c| c.trim().to_string())
            .collect();

        let col_index = |name: &str| header.iter().position(|h| h == name);
        let time_idx = col_index(&map.time_column).ok_or_else(|| WorkflowError::Parse {
            path: path.display().to_string(),
            message: format!("time column '{}' not found", map.time_column),
        })?;

        // (canonical name, column index)
        let mut wanted: Vec<(String, usize)> = Vec::new();
        if map.columns.is_empty() {
            for (idx, name) in header.iter().enumerate() {
                if idx != time_idx && name != "anomaly_ids" {
                    wanted.push((name.clone(), idx));
                }
            }
        } else {
            for (canonical, column) in &map.columns {
                let idx = col_index(column).ok_or_else(|| WorkflowError::Parse {
                    path: path.display().to_string(),
                    message: format!("mapped column '{column}' not found"),
                })?;
                wanted.push((canonical.clone(), idx));
            }
        }

        let mut times = Vec::new();
        let mut data: Vec<Vec<f64>> = vec![Vec::new(); wanted.len()];
        for (lineno, line) in lines.enumerate() {
            let fields: Vec<&str> = line.split(',').collect();
            let parse = |idx: usize| -> Result<f64, WorkflowError> {
                fields
                    .get(idx)
                    .ok_or_else(|| WorkflowError::Parse {
                        path: path.display().to_string(),
                        message: format!("line {}: missing field {idx}", lineno + 2),
                    })?
                    .trim()
                    .parse::<f64>()
                    .map_err(|e| WorkflowError::Parse {
                        path: path.display().to_string(),
                        message: format!("line {}: {e}", lineno + 2),
                    })
            };
            times.push(parse(time_idx)?);
            for (slot, (_, idx)) in data.iter_mut().zip(&wanted) {
                slot.push(parse(*idx)?);
            }
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(WorkflowError::Parse {
                path: path.display().to_string(),
                message: "time column must be strictly increasing".into(),
            });
        }

        let mut signals = BTreeMap::new();
        for ((name, _), values) in wanted.into_iter().zip(data) {
            signals.insert(name, values);
        }
        Ok(Self { times, signals, units: map.units.clone() })
    }

    pub fn signal_names(&self) -> Vec<String> {
        self.signals.keys().cloned().collect()
    }

    pub fn has_signal(&self, name: &str) -> bool {
        self.signals.contains_key(name)
    }

    pub fn span(&self) -> (f64, f64) {
        (
            self.times.first().copied().unwrap_or(f64::NAN),
            self.times.last().copied().unwrap_or(f64::NAN),
        )
    }

    /// Linear interpolation inside the series' span.
    pub fn interpolate(&self, name: &str, t: f64) -> Option<f64> {
        let values = self.signals.get(name)?;
        let (lo, hi) = self.span();
        if t < lo || t > hi {
            return None;
        }
        match self.times.binary_search_by(|probe| probe.total_cmp(&t)) {
            Ok(k) => Some(values[k]),
            Err(k) => {
                let (t0, t1) = (self.times[k - 1], self.times[k]);
                let w = (t - t0) / (t1 - t0);
                Some(values[k - 1] * (1.0 - w) + values[k] * w)
            }
        }
    }

    pub fn declared_unit(&self, name: &str) -> Option<&str> {
        self.units.get(name).map(String::as_str)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SignalComparison {
    pub signal: String,
    pub rmse: f64,
    pub max_abs: f64,
    pub points: usize,
}

/// Per-signal deviation metrics over the overlapping time range.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonReport {
    pub t_overlap: (f64, f64),
    pub aligned_points: usize,
    pub signals: Vec<SignalComparison>,
}

/// Interpolates the reference onto the simulation's sample times over the
/// overlap and reports RMSE and maximum absolute deviation per signal.
pub fn compare_series(
    sim: &[TimeSeriesRecord],
    reference: &ReferenceSeries,
    signals: &[String],
) -> Result<ComparisonReport, WorkflowError> {
    if sim.is_empty() {
        return Err(WorkflowError::Comparison("simulation series is empty".into()));
    }
    let (ref_lo, ref_hi) = reference.span();
    let lo = sim.first().unwrap().t.max(ref_lo);
    let hi = sim.last().unwrap().t.min(ref_hi);
    if !(hi > lo) && !(hi == lo && sim.len() == 1) {
        return Err(WorkflowError::Comparison(format!(
            "no overlap between simulation [{}, {}] and reference [{ref_lo}, {ref_hi}]",
            sim.first().unwrap().t,
            sim.last().unwrap().t
        )));
    }

    let aligned: Vec<&TimeSeriesRecord> =
        sim.iter().filter(|r| r.t >= lo && r.t <= hi).collect();
    if aligned.is_empty() {
        return Err(WorkflowError::Comparison("no simulation samples in the overlap".into()));
    }

    let mut out = Vec::with_capacity(signals.len());
    for name in signals {
        if let Some(declared) = reference.declared_unit(name) {
            let expected = signal_unit(name);
            if declared != expected {
                return Err(WorkflowError::Comparison(format!(
                    "signal '{name}': reference declares unit '{declared}', schema uses '{expected}'"
                )));
            }
        }
        let mut sq_sum = 0.0;
        let mut max_abs = 0.0f64;
        let mut points = 0usize;
        for r in &aligned {
            let sim_value = r.signal(name).ok_or_else(|| {
                WorkflowError::Comparison(format!("signal '{name}' is not a simulation signal"))
            })?;
            let ref_value = reference.interpolate(name, r.t).ok_or_else(|| {
                WorkflowError::Comparison(format!("signal '{name}' missing in the reference"))
            })?;
            let diff = sim_value - ref_value;
            sq_sum += diff * diff;
            max_abs = max_abs.max(diff.abs());
            points += 1;
        }
        out.push(SignalComparison {
            signal: name.clone(),
            rmse: (sq_sum / points as f64).sqrt(),
            max_abs,
            points,
        });
    }
    Ok(ComparisonReport { t_overlap: (lo, hi), aligned_points: aligned.len(), signals: out })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(t: f64, temp0: f64) -> TimeSeriesRecord {
        TimeSeriesRecord {
            t,
            n: vec![20.0, 0.03],
            liq_flow: vec![1e-3],
            vap_flow: vec![2e-3, 2e-3],
            h_liq: vec![6000.0, 6000.0],
            h_vap: vec![48_000.0, 48_000.0],
            pressure: vec![70_093.0, 70_000.0],
            temp: vec![temp0, temp0 - 10.0],
            t_cond: temp0 - 30.0,
            x: vec![0.5, 0.5, 0.5, 0.5],
            y: vec![0.5, 0.5, 0.5, 0.5],
            buffer_x: vec![0.5, 0.5],
            heat_duty: 80.0,
            efflux_ratio: 0.3,
            distillate: 1e-4,
            reflux: 2e-4,
            anomaly_flag: false,
            anomaly_ids: vec![],
        }
    }

    #[test]
    fn self_comparison_is_zero() {
        let sim: Vec<_> = (0..10).map(|k| record(k as f64 * 30.0, 360.0 + k as f64)).collect();
        let reference = ReferenceSeries::from_records(&sim).unwrap();
        let report =
            compare_series(&sim, &reference, &["T_1".into(), "T_2".into(), "D".into()]).unwrap();
        for s in &report.signals {
            assert_eq!(s.rmse, 0.0);
            assert_eq!(s.max_abs, 0.0);
            assert_eq!(s.points, 10);
        }
    }

    #[test]
    fn constant_offset_shows_up_only_in_that_signal() {
        let sim: Vec<_> = (0..10).map(|k| record(k as f64 * 30.0, 360.0)).collect();
        let mut shifted = sim.clone();
        for r in &mut shifted {
            r.temp[0] += 1.0;
        }
        let reference = ReferenceSeries::from_records(&shifted).unwrap();
        let report = compare_series(&sim, &reference, &["T_1".into(), "T_2".into()]).unwrap();
        assert!((report.signals[0].rmse - 1.0).abs() < 1e-12);
        assert!((report.signals[0].max_abs - 1.0).abs() < 1e-12);
        assert_eq!(report.signals[1].rmse, 0.0);
    }

    #[test]
    fn disjoint_ranges_are_an_error() {
        let sim: Vec<_> = (0..5).map(|k| record(k as f64, 360.0)).collect();
        let later: Vec<_> = (100..105).map(|k| record(k as f64, 360.0)).collect();
        let reference = ReferenceSeries::from_records(&later).unwrap();
        assert!(matches!(
            compare_series(&sim, &reference, &["T_1".into()]),
            Err(WorkflowError::Comparison(_))
        ));
    }

    #[test]
    fn wide_csv_with_map_and_units() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ref.csv");
        std::fs::write(&path, "Time_s,TIR101,TIR112\n0,360,340\n60,361,341\n120,362,342\n")
            .unwrap();
        let map = SignalMap::parse(
            "time = \"Time_s\"\n[signals]\nT_1 = \"TIR101\"\nT_2 = \"TIR112\"\n[units]\nT_1 = \"K\"\n",
        )
        .unwrap();
        let reference = ReferenceSeries::from_wide_csv(&path, &map).unwrap();
        assert_eq!(reference.span(), (0.0, 120.0));
        assert_eq!(reference.interpolate("T_1", 30.0), Some(360.5));

        let sim: Vec<_> = (0..3).map(|k| record(k as f64 * 60.0, 360.0 + k as f64)).collect();
        let report = compare_series(&sim, &reference, &["T_1".into()]).unwrap();
        assert!(report.signals[0].rmse < 1e-12);

        // unit claim that contradicts the schema
        let bad_map = SignalMap::parse(
            "time = \"Time_s\"\n[signals]\nT_1 = \"TIR101\"\n[units]\nT_1 = \"degC\"\n",
        )
        .unwrap();
        let bad_ref = ReferenceSeries::from_wide_csv(&path, &bad_map).unwrap();
        assert!(compare_series(&sim, &bad_ref, &["T_1".into()]).is_err());
    }
}
