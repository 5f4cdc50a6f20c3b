//! Correction-factor calibration against measured temperatures.
//!
//! The thermal-inertia correction factors cannot be measured directly; they
//! are fitted once, to a single representative run, by minimizing the
//! squared deviation between simulated and reference reboiler/head
//! temperatures with a derivative-free simplex search. The fitted structure
//! is one shared factor for all packing stages plus an optional separate
//! reboiler factor.

use super::compare::ReferenceSeries;
use super::{Scenario, WorkflowError};
use crate::integrator::simulate;
use crate::thermo::MixtureModel;

/// Objective value assigned to trial points whose simulation fails or whose
/// parameters are out of domain. Finite, so the search can move away.
const PENALTY: f64 = 1e12;

#[derive(Debug, Clone)]
pub struct NelderMeadResult {
    pub x: Vec<f64>,
    pub fx: f64,
    /// Best objective after each iteration; non-increasing by construction.
    pub trace: Vec<f64>,
    pub evaluations: usize,
}

/// Plain Nelder–Mead with the standard coefficients (reflection 1,
/// expansion 2, contraction 0.5, shrink 0.5) and a deterministic initial
/// simplex spanned by per-coordinate steps.
pub fn nelder_mead(
    mut f: impl FnMut(&[f64]) -> f64,
    x0: &[f64],
    initial_step: &[f64],
    max_iter: usize,
    ftol: f64,
) -> NelderMeadResult {
    let n = x0.len();
    assert!(n >= 1, "need at least one free parameter");
    assert_eq!(initial_step.len(), n);
    let mut evaluations = 0;
    let mut eval = |x: &[f64], evals: &mut usize| -> f64 {
        *evals += 1;
        f(x)
    };

    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    let fx0 = eval(x0, &mut evaluations);
    simplex.push((x0.to_vec(), fx0));
    for k in 0..n {
        let mut xk = x0.to_vec();
        xk[k] += initial_step[k];
        let fxk = eval(&xk, &mut evaluations);
        simplex.push((xk, fxk));
    }

    let mut trace = Vec::with_capacity(max_iter);
    for _ in 0..max_iter {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let best = simplex[0].1;
        let worst = simplex[n].1;
        trace.push(best);
        if (worst - best).abs() <= ftol * (best.abs() + 1e-30) {
            break;
        }

        // centroid of all but the worst vertex
        let mut centroid = vec![0.0; n];
        for (x, _) in &simplex[..n] {
            for k in 0..n {
                centroid[k] += x[k] / n as f64;
            }
        }
        let worst_x = simplex[n].0.clone();
        let second_worst = simplex[n - 1].1;
        let combine = |a: f64| -> Vec<f64> {
            (0..n).map(|k| centroid[k] + a * (centroid[k] - worst_x[k])).collect()
        };

        let reflected = combine(1.0);
        let f_reflected = eval(&reflected, &mut evaluations);
        if f_reflected < best {
            let expanded = combine(2.0);
            let f_expanded = eval(&expanded, &mut evaluations);
            simplex[n] = if f_expanded < f_reflected {
                (expanded, f_expanded)
            } else {
                (reflected, f_reflected)
            };
        } else if f_reflected < second_worst {
            simplex[n] = (reflected, f_reflected);
        } else {
            let contracted = if f_reflected < worst { combine(0.5) } else { combine(-0.5) };
            let f_contracted = eval(&contracted, &mut evaluations);
            if f_contracted < worst.min(f_reflected) {
                simplex[n] = (contracted, f_contracted);
            } else {
                // shrink toward the best vertex
                let best_x = simplex[0].0.clone();
                for vertex in simplex.iter_mut().skip(1) {
                    for k in 0..n {
                        vertex.0[k] = best_x[k] + 0.5 * (vertex.0[k] - best_x[k]);
                    }
                    vertex.1 = eval(&vertex.0, &mut evaluations);
                }
            }
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    trace.push(simplex[0].1);
    NelderMeadResult { x: simplex[0].0.clone(), fx: simplex[0].1, trace, evaluations }
}

/// Which correction factors the calibration may move.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct FreeParameters {
    /// One shared factor for stages 2..S.
    pub shared: bool,
    /// The reboiler factor c^1.
    pub reboiler: bool,
}

#[derive(Debug, Clone)]
pub struct CalibrationResult {
    /// The plant with fitted correction factors installed.
    pub plant: crate::column::PlantParams,
    pub shared_correction: f64,
    pub reboiler_correction: f64,
    /// Best objective (sum of squared kelvin deviations) per iteration.
    pub objective_trace: Vec<f64>,
    /// Temperature RMSE of the fitted model over the overlap, K.
    pub rmse: f64,
    pub evaluations: usize,
}

/// Fits the free correction factors by matching simulated reboiler and head
/// temperatures to the reference series.
pub fn calibrate_correction_factors(
    reference: &ReferenceSeries,
    scenario: &Scenario,
    mixture: &MixtureModel,
    free: FreeParameters,
) -> Result<CalibrationResult, WorkflowError> {
    let stages = scenario.plant.stages;
    let signals = [signal_reboiler(), signal_head(stages)];
    for s in &signals {
        if !reference.has_signal(s) {
            return Err(WorkflowError::Calibration(format!(
                "reference series lacks the measured temperature signal '{s}'"
            )));
        }
    }
    let (ref_lo, ref_hi) = reference.span();
    if !(ref_hi - ref_lo >= scenario.integrator.sample_interval) {
        return Err(WorkflowError::Calibration(format!(
            "reference span [{ref_lo}, {ref_hi}] is shorter than one sample interval"
        )));
    }

    // trial runs only need to cover the reference
    let mut trial_scenario = scenario.clone();
    trial_scenario.horizon = scenario.horizon.min(ref_hi);

    let objective = |shared: f64, reboiler: f64| -> (f64, usize) {
        if shared <= 0.0 || reboiler <= 0.0 {
            return (PENALTY, 0);
        }
        let mut sc = trial_scenario.clone();
        sc.plant.correction[0] = reboiler;
        for c in sc.plant.correction[1..].iter_mut() {
            *c = shared;
        }
        let result = match simulate(&sc, mixture) {
            Ok(r) => r,
            Err(_) => return (PENALTY, 0),
        };
        let mut sq_sum = 0.0;
        let mut points = 0usize;
        for record in &result.records {
            if record.t < ref_lo || record.t > ref_hi {
                continue;
            }
            for name in &signals {
                let sim_value = record.signal(name).expect("schema temperature");
                if let Some(ref_value) = reference.interpolate(name, record.t) {
                    let diff = sim_value - ref_value;
                    sq_sum += diff * diff;
                    points += 1;
                }
            }
        }
        if points < 2 {
            return (PENALTY, points);
        }
        (sq_sum, points)
    };

    let shared0 = scenario.plant.correction.get(1).copied().unwrap_or(1.0);
    let reboiler0 = scenario.plant.correction[0];

    if !free.shared && !free.reboiler {
        let (sse, points) = objective(shared0, reboiler0);
        if sse >= PENALTY {
            return Err(WorkflowError::Calibration(
                "reference simulation failed with the given parameters".into(),
            ));
        }
        return Ok(CalibrationResult {
            plant: scenario.plant.clone(),
            shared_correction: shared0,
            reboiler_correction: reboiler0,
            objective_trace: vec![sse],
            rmse: (sse / points as f64).sqrt(),
            evaluations: 1,
        });
    }

    let mut x0 = Vec::new();
    if free.shared {
        x0.push(shared0);
    }
    if free.reboiler {
        x0.push(reboiler0);
    }
    let steps = vec![0.5; x0.len()];
    let unpack = |x: &[f64]| -> (f64, f64) {
        let mut it = x.iter();
        let shared = if free.shared { *it.next().unwrap() } else { shared0 };
        let reboiler = if free.reboiler { *it.next().unwrap() } else { reboiler0 };
        (shared, reboiler)
    };

    let nm = nelder_mead(
        |x| {
            let (shared, reboiler) = unpack(x);
            objective(shared, reboiler).0
        },
        &x0,
        &steps,
        80,
        1e-8,
    );
    if !nm.fx.is_finite() {
        return Err(WorkflowError::Calibration(
            "objective is not finite at the initial simplex".into(),
        ));
    }

    let (shared, reboiler) = unpack(&nm.x);
    let (sse, points) = objective(shared, reboiler);
    let mut plant = scenario.plant.clone();
    plant.correction[0] = reboiler;
    for c in plant.correction[1..].iter_mut() {
        *c = shared;
    }
    Ok(CalibrationResult {
        plant,
        shared_correction: shared,
        reboiler_correction: reboiler,
        objective_trace: nm.trace,
        rmse: (sse / points.max(1) as f64).sqrt(),
        evaluations: nm.evaluations,
    })
}

pub(crate) fn signal_reboiler() -> String {
    "T_1".into()
}

pub(crate) fn signal_head(stages: usize) -> String {
    format!("T_{stages}")
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn quadratic_bowl_is_minimized() {
        let nm = nelder_mead(
            |x| (x[0] - 3.0).powi(2) + 2.0 * (x[1] + 1.5).powi(2),
            &[0.0, 0.0],
            &[1.0, 1.0],
            200,
            1e-14,
        );
        assert_relative_eq!(nm.x[0], 3.0, epsilon = 1e-5);
        assert_relative_eq!(nm.x[1], -1.5, epsilon = 1e-5);
        // monotone best-so-far trace
        for pair in nm.trace.windows(2) {
            assert!(pair[1] <= pair[0] + 1e-15);
        }
    }

    #[test]
    fn one_dimensional_search_works() {
        let nm = nelder_mead(|x| (x[0] - 2.5).powi(2), &[1.0], &[0.5], 100, 1e-14);
        assert_relative_eq!(nm.x[0], 2.5, epsilon = 1e-6);
    }

    #[test]
    fn penalties_do_not_stall_the_search() {
        // objective undefined left of 1.0
        let nm = nelder_mead(
            |x| if x[0] < 1.0 { 1e12 } else { (x[0] - 1.7).powi(2) },
            &[1.2],
            &[0.5],
            100,
            1e-14,
        );
        assert_relative_eq!(nm.x[0], 1.7, epsilon = 1e-5);
    }
}
