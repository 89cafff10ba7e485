//! Levenberg–Marquardt least squares with Marquardt diagonal scaling.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct LmOptions {
    pub max_iter: usize,
    /// Relative cost reduction below which a step counts as stalled.
    pub ftol: f64,
    /// Relative step size below which the iteration stops.
    pub xtol: f64,
    /// Infinity norm of Jᵀr below which the iteration stops.
    pub gtol: f64,
}

impl Default for LmOptions {
    fn default() -> Self {
        Self { max_iter: 200, ftol: 1e-15, xtol: 1e-13, gtol: 1e-14 }
    }
}

#[derive(Debug, Clone)]
pub struct LmReport {
    pub params: DVector<f64>,
    /// Sum of squared residuals.
    pub ssr: f64,
    pub iterations: usize,
    pub converged: bool,
    pub jacobian: DMatrix<f64>,
    pub residuals: DVector<f64>,
}

impl LmReport {
    /// Parameter covariance σ²(JᵀJ)⁻¹ with σ² = SSR/(m − n).
    pub fn covariance(&self) -> Option<DMatrix<f64>> {
        let (m, n) = self.jacobian.shape();
        if m <= n {
            return None;
        }
        let jtj = self.jacobian.transpose() * &self.jacobian;
        let inv = jtj.try_inverse()?;
        Some(inv * (self.ssr / (m - n) as f64))
    }

    pub fn standard_errors(&self) -> Option<Vec<f64>> {
        let cov = self.covariance()?;
        let se: Vec<f64> = (0..cov.nrows()).map(|i| cov[(i, i)].max(0.0).sqrt()).collect();
        se.iter().all(|v| v.is_finite()).then_some(se)
    }
}

/// Minimises ½‖r(p)‖² given the residual and its Jacobian.
pub fn levenberg_marquardt<R, J>(residual: R, jacobian: J, x0: DVector<f64>, opts: LmOptions) -> Result<LmReport>
where
    R: Fn(&DVector<f64>) -> DVector<f64>,
    J: Fn(&DVector<f64>) -> DMatrix<f64>,
{
    let n = x0.len();
    let mut x = x0;
    let mut r = residual(&x);
    let m = r.len();
    if m < n {
        return Err(Error::Underdetermined { points: m, params: n });
    }
    let mut ssr = r.norm_squared();
    if !ssr.is_finite() {
        return Err(Error::fit("non-finite residual at the initial guess", 0, ssr));
    }
    let mut jac = jacobian(&x);
    let mut lambda = -1.0;
    let mut nu = 2.0;
    let mut converged = false;
    let mut iterations = 0;

    while iterations < opts.max_iter {
        iterations += 1;
        let jt = jac.transpose();
        let jtj = &jt * &jac;
        let g = &jt * &r;
        if g.amax() <= opts.gtol * (1.0 + ssr) {
            converged = true;
            break;
        }
        let diag: Vec<f64> = (0..n).map(|i| jtj[(i, i)].max(1e-300)).collect();
        if lambda < 0.0 {
            lambda = 1e-3 * diag.iter().cloned().fold(0.0, f64::max);
        }

        let mut accepted = false;
        for _ in 0..60 {
            let mut a = jtj.clone();
            for i in 0..n {
                a[(i, i)] += lambda * diag[i];
            }
            let Some(chol) = a.cholesky() else {
                lambda *= nu;
                nu *= 2.0;
                continue;
            };
            let step = chol.solve(&(-&g));
            let x_new = &x + &step;
            let r_new = residual(&x_new);
            let ssr_new = r_new.norm_squared();
            if ssr_new.is_finite() && ssr_new < ssr {
                let predicted = step.dot(&(step.component_mul(&DVector::from_vec(diag.clone())) * lambda - &g));
                let rho = (ssr - ssr_new) / predicted.max(1e-300);
                lambda *= (1.0_f64 / 3.0).max(1.0 - (2.0 * rho - 1.0).powi(3));
                nu = 2.0;
                let rel_drop = (ssr - ssr_new) / ssr.max(1e-300);
                let rel_step = step.amax() / (x.amax() + opts.xtol);
                x = x_new;
                r = r_new;
                ssr = ssr_new;
                jac = jacobian(&x);
                accepted = true;
                if rel_drop < opts.ftol || rel_step < opts.xtol {
                    converged = true;
                }
                break;
            }
            lambda *= nu;
            nu *= 2.0;
        }
        if !accepted {
            // no descent direction left: already at a minimum to working precision
            converged = true;
            break;
        }
        if converged {
            break;
        }
    }

    if !x.iter().all(|v| v.is_finite()) {
        return Err(Error::fit("parameters diverged", iterations, ssr));
    }
    Ok(LmReport { params: x, ssr, iterations, converged, jacobian: jac, residuals: r })
}
