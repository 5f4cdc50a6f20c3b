//! Damped Newton iteration with finite-difference Jacobians.
//!
//! The Jacobian is built column-wise by forward differences in a scaled
//! space and reused across iterations while the contraction stays strong; a
//! step that fails to reduce the residual first triggers a rebuild, then a
//! convergence error. Steps are accepted on an RMS merit, which tolerates a
//! single row briefly rising while the system as a whole contracts; the
//! convergence test itself is the stricter max-norm, so callers should
//! assemble rows of comparable magnitude.

use nalgebra::{DMatrix, DVector, LU};

use super::SolverError;

const FD_EPS: f64 = 1e-7;
const MIN_DAMPING: f64 = 1.0 / 4096.0;

#[derive(Debug, Clone, Copy, Default)]
pub struct NewtonReport {
    pub iterations: usize,
    pub residual_norm: f64,
    pub jacobian_builds: usize,
}

fn max_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |acc, x| acc.max(x.abs()))
}

fn rms(v: &[f64]) -> f64 {
    (v.iter().map(|x| x * x).sum::<f64>() / v.len() as f64).sqrt()
}

/// Solves `residual(z) = 0` starting from `guess`.
///
/// `typical` holds per-variable magnitudes; finite-difference steps and the
/// internal column scaling both derive from it. The returned vector has
/// residual max-norm at most `tol`.
pub fn newton_solve<F>(
    mut residual: F,
    guess: &[f64],
    typical: &[f64],
    tol: f64,
    max_iter: usize,
) -> Result<(Vec<f64>, NewtonReport), SolverError>
where
    F: FnMut(&[f64], &mut [f64]) -> Result<(), SolverError>,
{
    let dim = guess.len();
    assert_eq!(typical.len(), dim, "typical scales must match the problem dimension");
    let mut report = NewtonReport::default();

    let mut z = guess.to_vec();
    let mut r = vec![0.0; dim];
    residual(&z, &mut r)?;
    let mut norm = max_norm(&r);
    let mut merit = rms(&r);
    report.residual_norm = norm;
    if norm <= tol {
        return Ok((z, report));
    }

    let mut lu: Option<LU<f64, nalgebra::Dyn, nalgebra::Dyn>> = None;
    let mut jacobian_fresh = false;

    while report.iterations < max_iter {
        report.iterations += 1;

        if lu.is_none() {
            let jac = build_jacobian(&mut residual, &z, &r, typical)?;
            report.jacobian_builds += 1;
            jacobian_fresh = true;
            let factored = jac.lu();
            if factored.determinant() == 0.0 {
                return Err(SolverError::SingularJacobian);
            }
            lu = Some(factored);
        }

        // solve in the scaled space: J D (D^-1 dz) = -r with D = diag(typical)
        let rhs = DVector::from_iterator(dim, r.iter().map(|v| -v));
        let scaled_step = match lu.as_ref().unwrap().solve(&rhs) {
            Some(s) => s,
            None => return Err(SolverError::SingularJacobian),
        };

        let mut lambda = 1.0;
        let mut accepted = false;
        let mut r_new = vec![0.0; dim];
        while lambda >= MIN_DAMPING {
            let z_trial: Vec<f64> =
                (0..dim).map(|k| z[k] + lambda * scaled_step[k] * typical[k]).collect();
            if residual(&z_trial, &mut r_new).is_ok() {
                let norm_new = max_norm(&r_new);
                let merit_new = rms(&r_new);
                if norm_new.is_finite()
                    && (norm_new <= tol || merit_new < merit * (1.0 - 1e-4 * lambda))
                {
                    z = z_trial;
                    // keep the factorization only while contraction is strong
                    if merit_new > 0.2 * merit {
                        lu = None;
                    }
                    norm = norm_new;
                    merit = merit_new;
                    r.copy_from_slice(&r_new);
                    accepted = true;
                    break;
                }
            }
            lambda *= 0.5;
        }

        if !accepted {
            if jacobian_fresh {
                return Err(SolverError::NewtonDidNotConverge {
                    residual: norm,
                    iterations: report.iterations,
                });
            }
            // stale Jacobian could not produce a descent step; rebuild
            lu = None;
            jacobian_fresh = false;
            continue;
        }
        jacobian_fresh = false;

        report.residual_norm = norm;
        if norm <= tol {
            return Ok((z, report));
        }
    }

    Err(SolverError::NewtonDidNotConverge { residual: norm, iterations: report.iterations })
}

/// Forward-difference Jacobian with respect to the scaled variables
/// `w_k = z_k / typical_k`.
fn build_jacobian<F>(
    residual: &mut F,
    z: &[f64],
    r0: &[f64],
    typical: &[f64],
) -> Result<DMatrix<f64>, SolverError>
where
    F: FnMut(&[f64], &mut [f64]) -> Result<(), SolverError>,
{
    let dim = z.len();
    let mut jac = DMatrix::<f64>::zeros(dim, dim);
    let mut z_pert = z.to_vec();
    let mut r_pert = vec![0.0; dim];
    for k in 0..dim {
        let h = FD_EPS * z[k].abs().max(typical[k]);
        // snap to the actually representable difference
        z_pert[k] = z[k] + h;
        let h_eff = z_pert[k] - z[k];
        let forward = residual(&z_pert, &mut r_pert);
        let inv = if forward.is_ok() {
            typical[k] / h_eff
        } else {
            // fall back to a backward step at domain boundaries
            z_pert[k] = z[k] - h;
            let h_eff = z_pert[k] - z[k];
            residual(&z_pert, &mut r_pert)?;
            typical[k] / h_eff
        };
        for row in 0..dim {
            jac[(row, k)] = (r_pert[row] - r0[row]) * inv;
        }
        z_pert[k] = z[k];
    }
    Ok(jac)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ok_residual(
        f: impl Fn(&[f64], &mut [f64]),
    ) -> impl FnMut(&[f64], &mut [f64]) -> Result<(), SolverError> {
        move |z, out| {
            f(z, out);
            Ok(())
        }
    }

    #[test]
    fn linear_system_converges_in_one_iteration() {
        let a = [3.0, -1.5, 0.25];
        let (z, report) = newton_solve(
            ok_residual(move |z, out| {
                for k in 0..3 {
                    out[k] = z[k] - a[k];
                }
            }),
            &[100.0, -7.0, 55.5],
            &[1.0; 3],
            1e-12,
            10,
        )
        .unwrap();
        for k in 0..3 {
            assert!((z[k] - a[k]).abs() < 1e-9);
        }
        assert_eq!(report.iterations, 1);
        assert_eq!(report.jacobian_builds, 1);
    }

    #[test]
    fn scalar_quadratic_reaches_the_root() {
        let (z, _) = newton_solve(
            ok_residual(|z, out| out[0] = z[0] * z[0] - 4.0),
            &[3.0],
            &[1.0],
            1e-11,
            30,
        )
        .unwrap();
        assert!((z[0] - 2.0).abs() < 1e-9, "got {}", z[0]);
    }

    #[test]
    fn rootless_residual_reports_no_convergence() {
        let result = newton_solve(
            ok_residual(|z, out| out[0] = z[0] * z[0] + 1.0),
            &[1.0],
            &[1.0],
            1e-10,
            40,
        );
        match result {
            Err(SolverError::NewtonDidNotConverge { residual, .. }) => assert!(residual >= 1.0),
            other => panic!("expected convergence failure, got {other:?}"),
        }
    }

    #[test]
    fn singular_jacobian_is_reported() {
        // residual ignores z entirely
        let result = newton_solve(
            ok_residual(|_, out| {
                out[0] = 1.0;
                out[1] = -1.0;
            }),
            &[0.0, 0.0],
            &[1.0; 2],
            1e-10,
            10,
        );
        assert!(matches!(result, Err(SolverError::SingularJacobian)));
    }

    #[test]
    fn damping_handles_strong_nonlinearity() {
        // atan has tiny curvature radius at large |z|; undamped Newton
        // overshoots and diverges from this start
        let (z, _) = newton_solve(
            ok_residual(|z, out| out[0] = z[0].atan()),
            &[20.0],
            &[1.0],
            1e-12,
            60,
        )
        .unwrap();
        assert!(z[0].abs() < 1e-10);
    }
}
