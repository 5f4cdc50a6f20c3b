//! Mixture thermodynamics for the column model: vapor pressures, NRTL
//! activity coefficients, K-values, bubble points and phase enthalpies.
//!
//! The vapor phase is treated as ideal (modified Raoult closure), which is
//! adequate at the sub-atmospheric pressures the column operates at. Liquid
//! enthalpies use ideal mixing with the datum liquid-at-`T_ref`; vapor
//! enthalpies add the pure-component enthalpies of vaporization.
//!
//! Everything here is pure and immutable after construction: a
//! [`MixtureModel`] can be shared freely across concurrently running
//! simulations.

mod bubble;
mod correlations;
mod nrtl;

pub use bubble::BubblePoint;
pub use correlations::{Antoine, CpPolynomial, Watson};
pub use nrtl::{BinaryNrtl, NrtlParams};

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ThermoError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("invalid composition: {0}")]
    InvalidComposition(String),
    #[error("missing binary interaction parameters for pair ({0}, {1})")]
    MissingBinaryPair(String, String),
    #[error("duplicate binary interaction parameters for pair ({0}, {1})")]
    DuplicateBinaryPair(String, String),
    #[error("{context} (residual {residual:.3e})")]
    Convergence { context: String, residual: f64 },
}

/// Tolerance on `|Σ x_i - 1|` accepted by [`Composition::new`].
pub const COMPOSITION_SUM_TOL: f64 = 1e-10;

/// A mole-fraction vector: entries in `[0, 1]`, summing to one within
/// [`COMPOSITION_SUM_TOL`]. The component order is fixed by the
/// [`MixtureModel`] and identical everywhere a composition appears.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Composition(Vec<f64>);

impl Composition {
    pub fn new(fractions: Vec<f64>) -> Result<Self, ThermoError> {
        if fractions.is_empty() {
            return Err(ThermoError::InvalidComposition("empty fraction vector".into()));
        }
        for (i, &f) in fractions.iter().enumerate() {
            if !(0.0..=1.0).contains(&f) || !f.is_finite() {
                return Err(ThermoError::InvalidComposition(format!(
                    "fraction {i} out of [0, 1]: {f}"
                )));
            }
        }
        let sum: f64 = fractions.iter().sum();
        if (sum - 1.0).abs() > COMPOSITION_SUM_TOL {
            return Err(ThermoError::InvalidComposition(format!(
                "fractions sum to {sum}, expected 1 within {COMPOSITION_SUM_TOL:e}"
            )));
        }
        Ok(Self(fractions))
    }

    /// Pure component `i` of a `c`-component system.
    pub fn pure(c: usize, i: usize) -> Self {
        let mut f = vec![0.0; c];
        f[i] = 1.0;
        Self(f)
    }

    pub fn fractions(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// A value together with a flag marking that the underlying correlation was
/// evaluated outside its declared validity interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Extrapolated<T> {
    pub value: T,
    pub extrapolated: bool,
}

/// Pure-component property set.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PureComponent {
    pub name: String,
    pub antoine: Antoine,
    pub cp_liquid: CpPolynomial,
    pub dh_vap: Watson,
    /// Validity interval of the correlations in K.
    pub t_range: (f64, f64),
    /// kg/mol
    pub molar_mass: f64,
}

/// An ordered multicomponent system with NRTL binary parameters and the
/// enthalpy reference temperature.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MixtureModel {
    components: Vec<PureComponent>,
    nrtl: NrtlParams,
    reference_temperature: f64,
}

/// Saturation pressure of a pure component from its Antoine correlation.
///
/// Outside the component's `t_range` the result carries the extrapolation
/// flag; a non-finite temperature is rejected outright.
pub fn vapor_pressure(c: &PureComponent, t: f64) -> Result<Extrapolated<f64>, ThermoError> {
    if !t.is_finite() || t <= 0.0 {
        return Err(ThermoError::InvalidInput(format!(
            "temperature must be positive and finite, got {t}"
        )));
    }
    Ok(Extrapolated {
        value: c.antoine.pressure(t),
        extrapolated: t < c.t_range.0 || t > c.t_range.1,
    })
}

impl MixtureModel {
    /// Builds a model from components and per-pair NRTL parameters keyed by
    /// component names. Every unordered pair must appear exactly once.
    pub fn new(
        components: Vec<PureComponent>,
        pairs: &[(String, String, BinaryNrtl)],
        reference_temperature: f64,
    ) -> Result<Self, ThermoError> {
        if components.len() < 2 {
            return Err(ThermoError::InvalidInput(format!(
                "a mixture needs at least two components, got {}",
                components.len()
            )));
        }
        let index = |name: &str| -> Result<usize, ThermoError> {
            components
                .iter()
                .position(|c| c.name == name)
                .ok_or_else(|| ThermoError::InvalidInput(format!("unknown component '{name}'")))
        };
        let n = components.len();
        let mut seen = vec![false; n * n];
        let mut indexed = Vec::with_capacity(pairs.len());
        for (a, b, bin) in pairs {
            let (i, j) = (index(a)?, index(b)?);
            if i == j {
                return Err(ThermoError::InvalidInput(format!("self pair ({a}, {b})")));
            }
            let key = i.min(j) * n + i.max(j);
            if seen[key] {
                return Err(ThermoError::DuplicateBinaryPair(a.clone(), b.clone()));
            }
            seen[key] = true;
            indexed.push((i, j, *bin));
        }
        for i in 0..n {
            for j in i + 1..n {
                if !seen[i * n + j] {
                    return Err(ThermoError::MissingBinaryPair(
                        components[i].name.clone(),
                        components[j].name.clone(),
                    ));
                }
            }
        }
        Ok(Self { components, nrtl: NrtlParams::from_pairs(n, &indexed), reference_temperature })
    }

    /// An ideal mixture (all binary parameters zero), mostly for testing and
    /// reference problems.
    pub fn ideal(components: Vec<PureComponent>, reference_temperature: f64) -> Self {
        let n = components.len();
        Self { components, nrtl: NrtlParams::ideal(n), reference_temperature }
    }

    pub fn n_components(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[PureComponent] {
        &self.components
    }

    pub fn component_index(&self, name: &str) -> Option<usize> {
        self.components.iter().position(|c| c.name == name)
    }

    pub fn nrtl(&self) -> &NrtlParams {
        &self.nrtl
    }

    pub fn reference_temperature(&self) -> f64 {
        self.reference_temperature
    }

    /// NRTL activity coefficients at `(x, T)`. All returned values are
    /// strictly positive; the pure-component limit is exactly one.
    pub fn activity_coefficients(
        &self,
        x: &Composition,
        t: f64,
    ) -> Result<Vec<f64>, ThermoError> {
        self.check_state(x, t)?;
        let mut gamma = vec![0.0; self.n_components()];
        self.nrtl.gamma_into(x.fractions(), t, &mut gamma);
        Ok(gamma)
    }

    /// `K_i = γ_i(x, T) · Psat_i(T) / P` (modified Raoult).
    pub fn k_values(&self, x: &Composition, t: f64, p: f64) -> Result<Vec<f64>, ThermoError> {
        self.check_state(x, t)?;
        if !(p > 0.0) || !p.is_finite() {
            return Err(ThermoError::InvalidInput(format!("pressure must be positive, got {p}")));
        }
        let mut k = vec![0.0; self.n_components()];
        self.k_into(x.fractions(), t, p, &mut k);
        Ok(k)
    }

    /// Solves `Σ K_i(x, T, P) x_i = 1` for the bubble temperature and
    /// returns it with the equilibrium vapor composition.
    pub fn bubble_point(&self, x: &Composition, p: f64) -> Result<BubblePoint, ThermoError> {
        self.check_state(x, 300.0)?;
        bubble::solve(self, x.fractions(), p)
    }

    /// Liquid molar enthalpy `h_L(x, T) = Σ x_i ∫_{T_ref}^{T} cp_i dτ`.
    pub fn liquid_enthalpy(&self, x: &Composition, t: f64) -> Result<f64, ThermoError> {
        self.check_state(x, t)?;
        Ok(self.h_liq_raw(x.fractions(), t))
    }

    /// Vapor molar enthalpy `h_V(y, T) = h_L(y, T) + Σ y_i Δh_vap,i(T)`.
    pub fn vapor_enthalpy(&self, y: &Composition, t: f64) -> Result<f64, ThermoError> {
        self.check_state(y, t)?;
        Ok(self.h_vap_raw(y.fractions(), t))
    }

    /// Molar excess Gibbs energy over RT at `(x, T)`; the analytic activity
    /// coefficients are its composition gradient, which the test suite
    /// checks by finite differences.
    pub fn excess_gibbs(&self, x: &Composition, t: f64) -> Result<f64, ThermoError> {
        self.check_state(x, t)?;
        Ok(self.nrtl.excess_gibbs(x.fractions(), t))
    }

    fn check_state(&self, x: &Composition, t: f64) -> Result<(), ThermoError> {
        if x.len() != self.n_components() {
            return Err(ThermoError::InvalidInput(format!(
                "composition has {} entries, model has {} components",
                x.len(),
                self.n_components()
            )));
        }
        if !t.is_finite() || t <= 0.0 {
            return Err(ThermoError::InvalidInput(format!(
                "temperature must be positive and finite, got {t}"
            )));
        }
        Ok(())
    }

    // ---- slice-level kernels used by the column residual ----

    pub(crate) fn gamma_into(&self, x: &[f64], t: f64, out: &mut [f64]) {
        self.nrtl.gamma_into(x, t, out);
    }

    pub(crate) fn k_into(&self, x: &[f64], t: f64, p: f64, out: &mut [f64]) {
        self.gamma_into(x, t, out);
        for (ki, c) in out.iter_mut().zip(&self.components) {
            *ki *= c.antoine.pressure(t) / p;
        }
    }

    /// `Σ K_i x_i`, the bubble-point function.
    pub(crate) fn k_dot_x(&self, x: &[f64], t: f64, p: f64) -> f64 {
        let mut k = vec![0.0; x.len()];
        self.k_into(x, t, p, &mut k);
        k.iter().zip(x).map(|(ki, xi)| ki * xi).sum()
    }

    pub(crate) fn h_liq_raw(&self, x: &[f64], t: f64) -> f64 {
        x.iter()
            .zip(&self.components)
            .map(|(xi, c)| xi * c.cp_liquid.integral(self.reference_temperature, t))
            .sum()
    }

    pub(crate) fn h_vap_raw(&self, y: &[f64], t: f64) -> f64 {
        self.h_liq_raw(y, t)
            + y.iter().zip(&self.components).map(|(yi, c)| yi * c.dh_vap.value(t)).sum::<f64>()
    }

    /// Mixture liquid heat capacity `Σ x_i cp_i(T)`.
    pub(crate) fn cp_mix(&self, x: &[f64], t: f64) -> f64 {
        x.iter().zip(&self.components).map(|(xi, c)| xi * c.cp_liquid.value(t)).sum()
    }

    /// `∫_{T_ref}^{T} cp_i dτ` for one component, the partial derivative of
    /// the liquid enthalpy with respect to `x_i`.
    pub(crate) fn enthalpy_integral(&self, i: usize, t: f64) -> f64 {
        self.components[i].cp_liquid.integral(self.reference_temperature, t)
    }
}

/// The open-literature default system (1-butanol + 2-propanol + water),
/// identical to the shipped property file. Antoine coefficients are
/// converted from published mmHg/°C tables to the Pa/K log10 basis; heat
/// capacities and Watson vaporization enthalpies are literature fits; the
/// 2-propanol/water NRTL pair is a published set and the other two pairs
/// are anchored to open infinite-dilution data.
pub fn butanol_2propanol_water() -> MixtureModel {
    let components = vec![
        PureComponent {
            name: "1-butanol".into(),
            antoine: Antoine { a: 9.601703, b: 1362.39, c: -94.38 },
            cp_liquid: CpPolynomial::new(vec![-77.0, 0.852]),
            dh_vap: Watson { dh_scale: 67_918.0, t_crit: 563.0, exponent: 0.38 },
            t_range: (283.15, 500.0),
            molar_mass: 0.074122,
        },
        PureComponent {
            name: "2-propanol".into(),
            antoine: Antoine { a: 10.242683, b: 1580.92, c: -53.54 },
            cp_liquid: CpPolynomial::new(vec![25.0, 0.437]),
            dh_vap: Watson { dh_scale: 62_905.0, t_crit: 508.3, exponent: 0.38 },
            t_range: (273.15, 460.0),
            molar_mass: 0.060096,
        },
        PureComponent {
            name: "water".into(),
            antoine: Antoine { a: 10.196213, b: 1730.63, c: -39.724 },
            cp_liquid: CpPolynomial::new(vec![92.053, -0.039953, -2.1103e-4, 5.3469e-7]),
            dh_vap: Watson { dh_scale: 56_352.0, t_crit: 647.1, exponent: 0.38 },
            t_range: (273.15, 423.15),
            molar_mass: 0.0180153,
        },
    ];
    let pairs = vec![
        (
            "1-butanol".to_string(),
            "2-propanol".to_string(),
            BinaryNrtl { a_ij: 0.0, a_ji: 0.0, b_ij: 50.0, b_ji: -20.0, alpha: 0.3 },
        ),
        (
            "2-propanol".to_string(),
            "water".to_string(),
            BinaryNrtl { a_ij: -1.3115, a_ji: 6.8284, b_ij: 426.398, b_ji: -1483.46, alpha: 0.3 },
        ),
        (
            "1-butanol".to_string(),
            "water".to_string(),
            BinaryNrtl { a_ij: 0.0, a_ji: 0.0, b_ij: 113.0, b_ji: 1361.6, alpha: 0.3 },
        ),
    ];
    MixtureModel::new(components, &pairs, 273.15).expect("default parameter set is complete")
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn water() -> PureComponent {
        butanol_2propanol_water().components()[2].clone()
    }

    #[test]
    fn water_boils_near_one_atmosphere() {
        // independent bisection inverse of the published coefficients
        let w = water();
        let (mut lo, mut hi) = (350.0, 400.0);
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if w.antoine.pressure(mid) < 101_325.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let t_nbp = 0.5 * (lo + hi);
        assert!((t_nbp - 373.15).abs() < 0.5, "inverted NBP {t_nbp} K");

        let p = vapor_pressure(&w, 373.15).unwrap();
        assert!(!p.extrapolated);
        assert_relative_eq!(p.value, 101_325.0, max_relative = 5e-3);
    }

    #[test]
    fn vapor_pressure_rejects_nan_and_flags_extrapolation() {
        let w = water();
        assert!(vapor_pressure(&w, f64::NAN).is_err());
        assert!(vapor_pressure(&w, -10.0).is_err());
        assert!(vapor_pressure(&w, 500.0).unwrap().extrapolated);
        assert!(!vapor_pressure(&w, 300.0).unwrap().extrapolated);
    }

    proptest! {
        #[test]
        fn vapor_pressure_strictly_increases(t in 280.0f64..420.0) {
            let w = water();
            let p0 = vapor_pressure(&w, t).unwrap().value;
            let p1 = vapor_pressure(&w, t + 1.0).unwrap().value;
            prop_assert!(p1 > p0);
            prop_assert!(p0 > 0.0);
        }

        #[test]
        fn bubble_point_is_monotone_in_pressure(step in 1usize..8) {
            let m = butanol_2propanol_water();
            let x = Composition::new(vec![0.4, 0.35, 0.25]).unwrap();
            let p0 = 30_000.0 + 10_000.0 * step as f64;
            let t0 = m.bubble_point(&x, p0).unwrap().temperature;
            let t1 = m.bubble_point(&x, p0 + 10_000.0).unwrap().temperature;
            prop_assert!(t1 > t0);
        }
    }

    #[test]
    fn pure_component_gamma_is_one() {
        let m = butanol_2propanol_water();
        let x = Composition::new(vec![1.0, 0.0, 0.0]).unwrap();
        let g = m.activity_coefficients(&x, 360.0).unwrap();
        assert_eq!(g[0], 1.0);
    }

    #[test]
    fn ideal_mixture_gammas_are_one() {
        let m = MixtureModel::ideal(butanol_2propanol_water().components().to_vec(), 273.15);
        let x = Composition::new(vec![0.2, 0.5, 0.3]).unwrap();
        assert_eq!(m.activity_coefficients(&x, 340.0).unwrap(), vec![1.0, 1.0, 1.0]);
    }

    #[test]
    fn k_values_follow_their_definition() {
        let m = butanol_2propanol_water();
        let x = Composition::new(vec![0.3, 0.45, 0.25]).unwrap();
        let (t, p) = (350.0, 70_000.0);
        let k = m.k_values(&x, t, p).unwrap();

        // componentwise re-evaluation through independent calls
        let gamma = m.activity_coefficients(&x, t).unwrap();
        for i in 0..3 {
            let psat = vapor_pressure(&m.components()[i], t).unwrap().value;
            assert_relative_eq!(k[i], gamma[i] * psat / p, max_relative = 1e-14);
            assert!(k[i] > 0.0);
        }

        // K scales inversely with pressure
        let k2 = m.k_values(&x, t, 2.0 * p).unwrap();
        for i in 0..3 {
            assert_relative_eq!(k2[i], 0.5 * k[i], max_relative = 1e-14);
        }

        assert!(m.k_values(&x, t, -5.0).is_err());
        assert!(m.k_values(&x, t, 0.0).is_err());
    }

    #[test]
    fn ideal_k_is_one_at_own_saturation_pressure() {
        let m = MixtureModel::ideal(butanol_2propanol_water().components().to_vec(), 273.15);
        let x = Composition::new(vec![0.3, 0.45, 0.25]).unwrap();
        let t = 350.0;
        let psat0 = vapor_pressure(&m.components()[0], t).unwrap().value;
        let k = m.k_values(&x, t, psat0).unwrap();
        assert_relative_eq!(k[0], 1.0, max_relative = 1e-14);
    }

    #[test]
    fn bubble_point_of_pure_component_is_its_boiling_point() {
        let m = butanol_2propanol_water();
        let x = Composition::pure(3, 2);
        let p = 70_000.0;
        let bp = m.bubble_point(&x, p).unwrap();
        let psat = vapor_pressure(&m.components()[2], bp.temperature).unwrap().value;
        assert_relative_eq!(psat, p, max_relative = 1e-10);
        assert_eq!(bp.vapor.fractions()[2], 1.0);
        assert!(bp.residual <= 1e-10);
    }

    #[test]
    fn bubble_point_matches_bisection_oracle_on_ideal_binary() {
        let comps = butanol_2propanol_water().components()[1..].to_vec(); // 2-propanol + water
        let m = MixtureModel::ideal(comps.clone(), 273.15);
        let x = Composition::new(vec![0.5, 0.5]).unwrap();
        let p = 101_325.0;
        let bp = m.bubble_point(&x, p).unwrap();

        // 1e-12-tolerance bisection on the same residual, written directly
        let f = |t: f64| {
            0.5 * comps[0].antoine.pressure(t) / p + 0.5 * comps[1].antoine.pressure(t) / p - 1.0
        };
        let (mut lo, mut hi) = (300.0, 400.0);
        assert!(f(lo) < 0.0 && f(hi) > 0.0);
        while hi - lo > 1e-12 {
            let mid = 0.5 * (lo + hi);
            if f(mid) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let t_oracle = 0.5 * (lo + hi);
        assert!((bp.temperature - t_oracle).abs() < 1e-9, "{} vs {t_oracle}", bp.temperature);
        assert!(bp.residual <= 1e-10);
    }

    #[test]
    fn bubble_point_fails_cleanly_far_outside_range() {
        let m = butanol_2propanol_water();
        let x = Composition::new(vec![0.3, 0.45, 0.25]).unwrap();
        match m.bubble_point(&x, 1e9) {
            Err(ThermoError::Convergence { .. }) => {}
            other => panic!("expected convergence error, got {other:?}"),
        }
    }

    #[test]
    fn liquid_enthalpy_datum_and_closed_form() {
        let m = butanol_2propanol_water();
        let x = Composition::new(vec![0.3, 0.45, 0.25]).unwrap();
        assert_eq!(m.liquid_enthalpy(&x, m.reference_temperature()).unwrap(), 0.0);

        // constant-cp pure component
        let cp = 75.3;
        let mut comps = m.components().to_vec();
        comps[0].cp_liquid = CpPolynomial::new(vec![cp]);
        let m2 = MixtureModel::ideal(comps, 273.15);
        let pure = Composition::pure(3, 0);
        assert_relative_eq!(
            m2.liquid_enthalpy(&pure, 373.15).unwrap(),
            cp * 100.0,
            max_relative = 1e-13
        );
    }

    #[test]
    fn ternary_liquid_enthalpy_matches_quadrature_oracle() {
        let m = butanol_2propanol_water();
        let x = Composition::new(vec![0.3, 0.45, 0.25]).unwrap();
        let t = 350.0;
        let h = m.liquid_enthalpy(&x, t).unwrap();

        // composite Simpson over the mixture cp
        let n = 4000;
        let (t0, t1) = (m.reference_temperature(), t);
        let step = (t1 - t0) / n as f64;
        let cp_mix = |tau: f64| -> f64 {
            x.fractions()
                .iter()
                .zip(m.components())
                .map(|(xi, c)| xi * c.cp_liquid.value(tau))
                .sum()
        };
        let mut sum = cp_mix(t0) + cp_mix(t1);
        for k in 1..n {
            sum += if k % 2 == 0 { 2.0 } else { 4.0 } * cp_mix(t0 + k as f64 * step);
        }
        let quad = sum * step / 3.0;
        assert_relative_eq!(h, quad, max_relative = 1e-12);
        assert_relative_eq!(h, 11_367.504648180031, max_relative = 1e-12);
    }

    #[test]
    fn vapor_enthalpy_exceeds_liquid_by_vaporization_terms() {
        let m = butanol_2propanol_water();
        let y = Composition::new(vec![0.5, 0.5, 0.0]).unwrap();
        let t = 360.0;
        let hv = m.vapor_enthalpy(&y, t).unwrap();
        let hl = m.liquid_enthalpy(&y, t).unwrap();
        let dh: f64 = y
            .fractions()
            .iter()
            .zip(m.components())
            .map(|(yi, c)| yi * c.dh_vap.value(t))
            .sum();
        assert_relative_eq!(hv - hl, dh, max_relative = 1e-12);
        assert!(hv > hl);

        // pure component
        let pure = Composition::pure(3, 1);
        assert_relative_eq!(
            m.vapor_enthalpy(&pure, t).unwrap(),
            m.liquid_enthalpy(&pure, t).unwrap() + m.components()[1].dh_vap.value(t),
            max_relative = 1e-13
        );
    }

    #[test]
    fn operations_are_bitwise_deterministic() {
        let m = butanol_2propanol_water();
        let x = Composition::new(vec![0.31, 0.47, 0.22]).unwrap();
        assert_eq!(
            m.activity_coefficients(&x, 347.3).unwrap(),
            m.activity_coefficients(&x, 347.3).unwrap()
        );
        assert_eq!(
            m.k_values(&x, 347.3, 66_000.0).unwrap(),
            m.k_values(&x, 347.3, 66_000.0).unwrap()
        );
        assert_eq!(m.liquid_enthalpy(&x, 347.3).unwrap(), m.liquid_enthalpy(&x, 347.3).unwrap());
        let b0 = m.bubble_point(&x, 66_000.0).unwrap();
        let b1 = m.bubble_point(&x, 66_000.0).unwrap();
        assert_eq!(b0.temperature, b1.temperature);
        assert_eq!(b0.vapor.fractions(), b1.vapor.fractions());
    }

    #[test]
    fn missing_pair_is_rejected() {
        let comps = butanol_2propanol_water().components().to_vec();
        let pairs = vec![(
            "1-butanol".to_string(),
            "2-propanol".to_string(),
            BinaryNrtl::IDEAL,
        )];
        match MixtureModel::new(comps, &pairs, 273.15) {
            Err(ThermoError::MissingBinaryPair(a, b)) => {
                assert!(a.contains("butanol") && b == "water");
            }
            other => panic!("expected missing pair, got {other:?}"),
        }
    }

    #[test]
    fn gibbs_gradient_smoke_check() {
        // gamma_i = exp(d(n_tot * gE/RT)/dn_i), probed by central differences
        let m = butanol_2propanol_water();
        let x = vec![0.35, 0.40, 0.25];
        let t = 350.0;
        let gamma = m.activity_coefficients(&Composition::new(x.clone()).unwrap(), t).unwrap();
        for i in 0..3 {
            let h = 1e-6;
            let eval = |delta: f64| {
                let mut n = x.clone();
                n[i] += delta;
                let tot: f64 = n.iter().sum();
                let frac: Vec<f64> = n.iter().map(|v| v / tot).collect();
                tot * m.nrtl().excess_gibbs(&frac, t)
            };
            let ln_gamma_fd = (eval(h) - eval(-h)) / (2.0 * h);
            assert_relative_eq!(gamma[i].ln(), ln_gamma_fd, max_relative = 1e-7, epsilon = 1e-9);
        }
    }
}
