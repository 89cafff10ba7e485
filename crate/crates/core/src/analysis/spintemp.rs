//! Spin temperatures from enhanced signals and their comparison.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nucleus::NucleusSpec;
use crate::polarization::{polarization_from_spin_temperature, SpinTempResult};
use crate::constants::zeeman_ratio;

pub const DEFAULT_COVERAGE: f64 = 2.0;

/// P_n = P_eq(T_bath)·S_∞/S_eq converted to a spin temperature.
///
/// `rel_err` is the relative one-sigma error of the ratio S_∞/S_eq; when
/// given, it is propagated linearly to `sigma_t_s`.
pub fn extract_spin_temperature(
    s_inf: f64,
    s_eq: f64,
    nucleus: &NucleusSpec,
    t_bath: f64,
    rel_err: Option<f64>,
) -> Result<SpinTempResult> {
    if s_eq == 0.0 || !s_eq.is_finite() {
        return Err(Error::invalid(format!("reference signal must be non-zero and finite, got {s_eq}")));
    }
    if !(t_bath > 0.0 && t_bath.is_finite()) {
        return Err(Error::invalid(format!("bath temperature must be positive, got {t_bath}")));
    }
    if !s_inf.is_finite() {
        return Err(Error::invalid("enhanced signal is not finite"));
    }
    let p_eq = polarization_from_spin_temperature(t_bath, nucleus)?;
    let ratio = s_inf / s_eq;
    let p_n = p_eq * ratio;
    if p_n.abs() >= 1.0 {
        return Err(Error::UnphysicalEnhancement(p_n));
    }
    if p_n == 0.0 {
        return Err(Error::InfiniteTemperature);
    }
    let a = zeeman_ratio(nucleus.omega(), 1.0);
    let t_s = if ratio == 1.0 { t_bath } else { a / p_n.atanh() };
    let sigma_t_s = rel_err.map(|r| {
        let x = p_n.atanh();
        let dt_dp = a / (x * x * (1.0 - p_n * p_n));
        (dt_dp * p_n * r).abs()
    });
    Ok(SpinTempResult { t_s, p_n, sigma_t_s })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Coincidence {
    Coincide,
    Differ,
}

/// Coincide iff |T_a − T_b| ≤ k·√(σ_a² + σ_b²).
pub fn spin_temp_coincidence(a: &SpinTempResult, b: &SpinTempResult, sigma_a: f64, sigma_b: f64, k: f64) -> Coincidence {
    let bound = k * sigma_a.hypot(sigma_b);
    if (a.t_s - b.t_s).abs() <= bound {
        Coincidence::Coincide
    } else {
        Coincidence::Differ
    }
}
