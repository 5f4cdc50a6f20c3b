//! Bubble-point solver: safeguarded Newton with bisection fallback.

use super::{Composition, MixtureModel, ThermoError};

/// A converged bubble-point solution.
#[derive(Debug, Clone)]
pub struct BubblePoint {
    /// Bubble temperature in K.
    pub temperature: f64,
    /// Equilibrium vapor composition, `y_i = K_i x_i`.
    pub vapor: Composition,
    /// Final `|Σ K_i x_i - 1|`.
    pub residual: f64,
    pub iterations: usize,
}

const RESIDUAL_TOL: f64 = 1e-12;
const MAX_ITER: usize = 120;

/// Margins around the pure-component saturation temperatures that bracket
/// the root of `Σ K_i x_i - 1`. Strongly positive-deviation (azeotropic)
/// mixtures can boil well below the most volatile pure component, so the
/// lower margin is generous and widened once more on demand.
const BRACKET_BELOW: f64 = 25.0;
const BRACKET_BELOW_WIDE: f64 = 60.0;
const BRACKET_ABOVE: f64 = 5.0;

pub(super) fn solve(m: &MixtureModel, x: &[f64], p: f64) -> Result<BubblePoint, ThermoError> {
    if !(p > 0.0) || !p.is_finite() {
        return Err(ThermoError::InvalidInput(format!("pressure must be positive, got {p}")));
    }

    let tsat: Vec<f64> =
        m.components().iter().map(|c| c.antoine.saturation_temperature(p)).collect();
    let tsat_min = tsat.iter().cloned().fold(f64::INFINITY, f64::min);
    let tsat_max = tsat.iter().cloned().fold(f64::NEG_INFINITY, f64::max);

    // Refuse a bracket that lies entirely outside every component's
    // correlation validity: a root found there would be an artifact of
    // extrapolated Antoine curves, not an answer.
    let valid_lo = m.components().iter().map(|c| c.t_range.0).fold(f64::INFINITY, f64::min);
    let valid_hi = m.components().iter().map(|c| c.t_range.1).fold(f64::NEG_INFINITY, f64::max);
    if tsat_min - BRACKET_BELOW_WIDE > valid_hi || tsat_max + BRACKET_ABOVE < valid_lo {
        return Err(ThermoError::Convergence {
            context: format!(
                "bubble bracket around [{tsat_min:.1}, {tsat_max:.1}] K at P = {p} Pa lies \
                 outside all correlation ranges [{valid_lo:.1}, {valid_hi:.1}] K"
            ),
            residual: f64::INFINITY,
        });
    }

    let residual = |t: f64| -> f64 { m.k_dot_x(x, t, p) - 1.0 };

    let mut lo = tsat_min - BRACKET_BELOW;
    let hi = tsat_max + BRACKET_ABOVE;
    let mut f_lo = residual(lo);
    let f_hi = residual(hi);
    if f_lo > 0.0 {
        lo = tsat_min - BRACKET_BELOW_WIDE;
        f_lo = residual(lo);
    }
    if !(f_lo <= 0.0 && f_hi >= 0.0) {
        return Err(ThermoError::Convergence {
            context: format!(
                "no sign change in bubble bracket [{lo:.2}, {hi:.2}] K at P = {p} Pa \
                 (f_lo = {f_lo:.3e}, f_hi = {f_hi:.3e})"
            ),
            residual: f_lo.abs().min(f_hi.abs()),
        });
    }

    // weighted pure-component boiling points as the starting guess
    let mut t: f64 = x.iter().zip(&tsat).map(|(xi, ti)| xi * ti).sum();
    t = t.clamp(lo, hi);

    let mut f = residual(t);
    let mut bracket = (lo, hi);
    let mut iterations = 0;
    while f.abs() > RESIDUAL_TOL && iterations < MAX_ITER {
        iterations += 1;
        if f > 0.0 {
            bracket.1 = t;
        } else {
            bracket.0 = t;
        }

        // central-difference slope; the convergence test is on |f| itself,
        // so slope accuracy only affects the step count
        let h = 1e-6 * t.max(1.0);
        let slope = (residual(t + h) - residual(t - h)) / (2.0 * h);
        let mut t_next = if slope.abs() > f64::MIN_POSITIVE { t - f / slope } else { f64::NAN };
        if !t_next.is_finite() || t_next <= bracket.0 || t_next >= bracket.1 {
            t_next = 0.5 * (bracket.0 + bracket.1);
        }
        if t_next == t {
            break;
        }
        t = t_next;
        f = residual(t);
    }

    if f.abs() > 1e-10 {
        return Err(ThermoError::Convergence {
            context: format!("bubble point stalled at T = {t:.4} K after {iterations} iterations"),
            residual: f.abs(),
        });
    }

    let mut y = vec![0.0; x.len()];
    m.k_into(x, t, p, &mut y);
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi *= xi;
        // roundoff guard: K_i x_i can land a few ulps outside [0, 1]
        if *yi > 1.0 && *yi < 1.0 + 1e-9 {
            *yi = 1.0;
        }
    }
    let vapor = Composition::new(y)?;
    Ok(BubblePoint { temperature: t, vapor, residual: f.abs(), iterations })
}
