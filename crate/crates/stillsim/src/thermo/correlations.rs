//! Pure-component property correlations.

use serde::Serialize;

/// Antoine vapor-pressure correlation, `log10(P / Pa) = a - b / (c + T / K)`.
///
/// Coefficients published on other bases (mmHg, °C, ln form) must be
/// converted before construction; the XML parser enforces the declared
/// unit basis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Antoine {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl Antoine {
    pub fn pressure(&self, t: f64) -> f64 {
        10f64.powf(self.a - self.b / (self.c + t))
    }

    /// Inverse of `pressure`: the saturation temperature at pressure `p`.
    pub fn saturation_temperature(&self, p: f64) -> f64 {
        self.b / (self.a - p.log10()) - self.c
    }

    /// d(Psat)/dT, used by the bubble-point Newton iteration.
    pub fn pressure_derivative(&self, t: f64) -> f64 {
        let denom = self.c + t;
        self.pressure(t) * std::f64::consts::LN_10 * self.b / (denom * denom)
    }
}

/// Liquid molar heat capacity as a polynomial in temperature,
/// `cp(T) = c0 + c1*T + c2*T^2 + ...` in J/(mol K).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CpPolynomial {
    coeffs: Vec<f64>,
}

impl CpPolynomial {
    pub fn new(coeffs: Vec<f64>) -> Self {
        assert!(!coeffs.is_empty(), "cp polynomial needs at least one coefficient");
        Self { coeffs }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn value(&self, t: f64) -> f64 {
        // Horner
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * t + c)
    }

    /// Analytic `∫_{t0}^{t1} cp(τ) dτ` in J/mol.
    pub fn integral(&self, t0: f64, t1: f64) -> f64 {
        let antiderivative = |t: f64| {
            let mut acc = 0.0;
            for (k, c) in self.coeffs.iter().enumerate().rev() {
                acc = acc * t + c / (k as f64 + 1.0);
            }
            acc * t
        };
        antiderivative(t1) - antiderivative(t0)
    }
}

/// Watson-form enthalpy of vaporization,
/// `Δh_vap(T) = dh_scale * (1 - T / t_crit)^exponent` in J/mol.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Watson {
    pub dh_scale: f64,
    pub t_crit: f64,
    pub exponent: f64,
}

impl Watson {
    pub fn value(&self, t: f64) -> f64 {
        let reduced = (1.0 - t / self.t_crit).max(0.0);
        self.dh_scale * reduced.powf(self.exponent)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn cp_integral_matches_constant_closed_form() {
        let cp = CpPolynomial::new(vec![75.3]);
        assert_relative_eq!(cp.integral(273.15, 373.15), 75.3 * 100.0, max_relative = 1e-14);
    }

    #[test]
    fn cp_integral_matches_simpson_quadrature() {
        let cp = CpPolynomial::new(vec![92.053, -0.039953, -2.1103e-4, 5.3469e-7]);
        let (t0, t1) = (273.15, 390.0);
        // composite Simpson as an independent route
        let n = 2000;
        let h = (t1 - t0) / n as f64;
        let mut sum = cp.value(t0) + cp.value(t1);
        for k in 1..n {
            let w = if k % 2 == 0 { 2.0 } else { 4.0 };
            sum += w * cp.value(t0 + k as f64 * h);
        }
        let quad = sum * h / 3.0;
        assert_relative_eq!(cp.integral(t0, t1), quad, max_relative = 1e-12);
    }

    #[test]
    fn antoine_inverse_is_consistent() {
        let a = Antoine { a: 10.196213, b: 1730.63, c: -39.724 };
        let t = a.saturation_temperature(70_000.0);
        assert_relative_eq!(a.pressure(t), 70_000.0, max_relative = 1e-12);
    }

    #[test]
    fn antoine_derivative_matches_finite_difference() {
        let a = Antoine { a: 10.196213, b: 1730.63, c: -39.724 };
        let t = 350.0;
        let h = 1e-4;
        let fd = (a.pressure(t + h) - a.pressure(t - h)) / (2.0 * h);
        assert_relative_eq!(a.pressure_derivative(t), fd, max_relative = 1e-8);
    }
}
