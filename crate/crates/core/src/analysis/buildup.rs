//! Mono-exponential build-up fitting S(t) = S_∞ (1 − e^{−t/τ}).

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::lsq::{levenberg_marquardt, LmOptions};
use crate::error::{Error, Result};

pub const MIN_BUILDUP_POINTS: usize = 5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BuildUpResult {
    pub s_inf: f64,
    pub tau: f64,
    pub samples: Vec<(f64, f64)>,
    /// Relative standard errors of (S_∞, τ).
    pub fit_rel_err: (f64, f64),
    /// Set when the series ends before half a time constant.
    pub extrapolation_warning: bool,
    /// Durbin–Watson statistic of the residuals.
    pub durbin_watson: f64,
    pub iterations: usize,
}

fn model(t: f64, s_inf: f64, tau: f64) -> f64 {
    -s_inf * (-t / tau).exp_m1()
}

/// Seeds the fit with S_∞⁰ at the largest |S| and τ⁰ from a straight-line fit
/// of log(1 − S/S_∞⁰) over the first half of the series.
pub fn initial_guess(points: &[(f64, f64)]) -> (f64, f64) {
    let s0 = points.iter().map(|p| p.1).fold(0.0, |a: f64, b| if b.abs() > a.abs() { b } else { a });
    let half = &points[..points.len().div_ceil(2)];
    let (mut n, mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for &(t, s) in half {
        let r = 1.0 - s / s0;
        if r > 0.0 && r < 1.0 + 1e-12 {
            let y = r.ln();
            n += 1.0;
            sx += t;
            sy += y;
            sxx += t * t;
            sxy += t * y;
        }
    }
    let span = points[points.len() - 1].0 - points[0].0;
    let denom = n * sxx - sx * sx;
    let tau0 = if n >= 2.0 && denom > 0.0 {
        let slope = (n * sxy - sx * sy) / denom;
        if slope < 0.0 { -1.0 / slope } else { span / 3.0 }
    } else {
        span / 3.0
    };
    (s0, tau0.max(f64::MIN_POSITIVE))
}

pub fn durbin_watson(residuals: &[f64]) -> f64 {
    let ss: f64 = residuals.iter().map(|e| e * e).sum();
    if ss == 0.0 {
        return 2.0;
    }
    residuals.windows(2).map(|w| (w[1] - w[0]).powi(2)).sum::<f64>() / ss
}

pub fn fit_buildup(points: &[(f64, f64)]) -> Result<BuildUpResult> {
    if points.len() < MIN_BUILDUP_POINTS {
        return Err(Error::Underdetermined { points: points.len(), params: MIN_BUILDUP_POINTS });
    }
    if points.iter().any(|p| !p.0.is_finite() || !p.1.is_finite()) {
        return Err(Error::invalid("non-finite sample in build-up series"));
    }
    if points.windows(2).any(|w| w[1].0 <= w[0].0) {
        return Err(Error::invalid("build-up times must be strictly increasing"));
    }
    let smax = points.iter().fold(0.0_f64, |a, p| a.max(p.1.abs()));
    let smin = points.iter().fold(f64::INFINITY, |a, p| a.min(p.1));
    let srange = points.iter().fold(f64::NEG_INFINITY, |a, p| a.max(p.1)) - smin;
    if smax == 0.0 || srange <= 1e-12 * smax {
        return Err(Error::fit("constant series leaves the time constant unidentifiable", 0, 0.0));
    }

    let (s0, tau0) = initial_guess(points);
    let m = points.len();
    // parameters: S_∞ / |S_∞⁰| and ln τ
    let scale = s0.abs();
    let residual = |p: &DVector<f64>| {
        let tau = p[1].exp();
        DVector::from_iterator(m, points.iter().map(|&(t, s)| model(t, p[0], tau) - s / scale))
    };
    let jacobian = |p: &DVector<f64>| {
        let tau = p[1].exp();
        let mut j = DMatrix::zeros(m, 2);
        for (i, &(t, _)) in points.iter().enumerate() {
            let e = (-t / tau).exp();
            j[(i, 0)] = 1.0 - e;
            j[(i, 1)] = -p[0] * e * t / tau;
        }
        j
    };
    let x0 = DVector::from_vec(vec![s0 / scale, tau0.ln()]);
    let rep = levenberg_marquardt(residual, jacobian, x0, LmOptions { max_iter: 500, ..LmOptions::default() })?;
    if !rep.converged {
        return Err(Error::fit("build-up fit did not converge", rep.iterations, rep.ssr * scale * scale));
    }
    let s_inf = rep.params[0] * scale;
    let tau = rep.params[1].exp();
    if !(tau.is_finite() && tau > 0.0 && s_inf.is_finite()) {
        return Err(Error::fit("build-up parameters left the physical range", rep.iterations, rep.ssr));
    }
    let se = rep
        .standard_errors()
        .ok_or_else(|| Error::fit("singular covariance; τ unidentifiable", rep.iterations, rep.ssr))?;
    let fit_rel_err = (se[0] / rep.params[0].abs(), se[1]);
    let residuals: Vec<f64> = rep.residuals.iter().map(|r| r * scale).collect();
    let t_end = points[m - 1].0;
    Ok(BuildUpResult {
        s_inf,
        tau,
        samples: points.to_vec(),
        fit_rel_err,
        extrapolation_warning: t_end < 0.5 * tau,
        durbin_watson: durbin_watson(&residuals),
        iterations: rep.iterations,
    })
}
