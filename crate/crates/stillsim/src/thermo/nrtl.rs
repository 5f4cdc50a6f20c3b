//! NRTL activity-coefficient model for multicomponent liquid mixtures.
//!
//! Binary interaction energies use the two-parameter temperature form
//! `τ_ij = a_ij + b_ij / T` with a symmetric non-randomness factor
//! `α_ij = α_ji`. Diagonal entries are zero by construction.

use serde::Serialize;

/// Interaction parameters for one unordered component pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BinaryNrtl {
    pub a_ij: f64,
    pub a_ji: f64,
    /// K
    pub b_ij: f64,
    /// K
    pub b_ji: f64,
    pub alpha: f64,
}

impl BinaryNrtl {
    pub const IDEAL: BinaryNrtl = BinaryNrtl { a_ij: 0.0, a_ji: 0.0, b_ij: 0.0, b_ji: 0.0, alpha: 0.3 };
}

/// Dense parameter matrices for a C-component system.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NrtlParams {
    n: usize,
    a: Vec<f64>,
    b: Vec<f64>,
    alpha: Vec<f64>,
}

impl NrtlParams {
    pub fn ideal(n: usize) -> Self {
        Self { n, a: vec![0.0; n * n], b: vec![0.0; n * n], alpha: vec![0.3; n * n] }
    }

    /// Builds the matrices from per-pair parameters. `pairs[(i, j)]` carries
    /// the directed values `a_ij`, `b_ij` in the `i -> j` slot and `a_ji`,
    /// `b_ji` in the `j -> i` slot.
    pub fn from_pairs(n: usize, pairs: &[(usize, usize, BinaryNrtl)]) -> Self {
        let mut p = Self::ideal(n);
        for &(i, j, bin) in pairs {
            p.a[i * n + j] = bin.a_ij;
            p.b[i * n + j] = bin.b_ij;
            p.a[j * n + i] = bin.a_ji;
            p.b[j * n + i] = bin.b_ji;
            p.alpha[i * n + j] = bin.alpha;
            p.alpha[j * n + i] = bin.alpha;
        }
        p
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn pair(&self, i: usize, j: usize) -> BinaryNrtl {
        let n = self.n;
        BinaryNrtl {
            a_ij: self.a[i * n + j],
            a_ji: self.a[j * n + i],
            b_ij: self.b[i * n + j],
            b_ji: self.b[j * n + i],
            alpha: self.alpha[i * n + j],
        }
    }

    fn tau(&self, i: usize, j: usize, t: f64) -> f64 {
        if i == j {
            0.0
        } else {
            self.a[i * self.n + j] + self.b[i * self.n + j] / t
        }
    }

    /// Writes the activity coefficients for composition `x` at temperature
    /// `t` into `gamma`. Zero mole fractions are handled by the analytic
    /// limits of the model; no division by zero can occur for a composition
    /// that sums to one.
    pub fn gamma_into(&self, x: &[f64], t: f64, gamma: &mut [f64]) {
        let n = self.n;
        debug_assert_eq!(x.len(), n);
        debug_assert_eq!(gamma.len(), n);

        // tau and G = exp(-alpha * tau), row-major [i][j]
        let mut tau = vec![0.0; n * n];
        let mut g = vec![1.0; n * n];
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    let tv = self.tau(i, j, t);
                    tau[i * n + j] = tv;
                    g[i * n + j] = (-self.alpha[i * n + j] * tv).exp();
                }
            }
        }

        // s_j = sum_k x_k G_kj ; c_j = sum_k x_k tau_kj G_kj
        let mut s = vec![0.0; n];
        let mut c = vec![0.0; n];
        for j in 0..n {
            let mut sj = 0.0;
            let mut cj = 0.0;
            for k in 0..n {
                let xg = x[k] * g[k * n + j];
                sj += xg;
                cj += xg * tau[k * n + j];
            }
            s[j] = sj;
            c[j] = cj;
        }

        for i in 0..n {
            let mut ln_gamma = c[i] / s[i];
            for j in 0..n {
                let frac = x[j] * g[i * n + j] / s[j];
                ln_gamma += frac * (tau[i * n + j] - c[j] / s[j]);
            }
            gamma[i] = ln_gamma.exp();
        }
    }

    /// Molar excess Gibbs energy over RT: `g^E / RT = Σ_i x_i c_i / s_i`.
    pub fn excess_gibbs(&self, x: &[f64], t: f64) -> f64 {
        let n = self.n;
        let mut total = 0.0;
        for i in 0..n {
            if x[i] == 0.0 {
                continue;
            }
            let mut si = 0.0;
            let mut ci = 0.0;
            for k in 0..n {
                let tau = self.tau(k, i, t);
                let g = (-self.alpha[k * n + i] * tau).exp();
                si += x[k] * g;
                ci += x[k] * tau * g;
            }
            total += x[i] * ci / si;
        }
        total
    }
}
