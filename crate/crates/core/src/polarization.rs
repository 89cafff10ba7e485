//! Closed-form relations between nuclear polarization and spin temperature, and
//! the two-electron cross-effect pair formula.

use serde::{Deserialize, Serialize};

use crate::constants::zeeman_ratio;
use crate::error::{Error, Result};
use crate::nucleus::NucleusSpec;

/// A nuclear polarization together with the spin temperature it implies.
///
/// `t_s` is signed: inverted polarization gives a negative spin temperature.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpinTempResult {
    pub t_s: f64,
    pub p_n: f64,
    /// One-sigma uncertainty of `t_s`, when error propagation was requested.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma_t_s: Option<f64>,
}

/// T_s = ħω_n / (2 k_B artanh P_n).
pub fn spin_temperature_from_polarization(p_n: f64, nucleus: &NucleusSpec) -> Result<f64> {
    if !p_n.is_finite() || p_n.abs() >= 1.0 {
        return Err(Error::OutOfRange(p_n));
    }
    if p_n == 0.0 {
        return Err(Error::InfiniteTemperature);
    }
    // zeeman_ratio(ω, 1 K) = ħω/(2 k_B · 1 K)
    Ok(zeeman_ratio(nucleus.omega(), 1.0) / p_n.atanh())
}

/// P_n = tanh(ħω_n / (2 k_B T_s)).
///
/// For |ħω_n/(2k_B T_s)| < 0.1 the result agrees with the linear form
/// ħω_n/(2k_B T_s) to better than 1% relative.
pub fn polarization_from_spin_temperature(t_s: f64, nucleus: &NucleusSpec) -> Result<f64> {
    if t_s == 0.0 || t_s.is_nan() {
        return Err(Error::invalid(format!("spin temperature must be non-zero, got {t_s}")));
    }
    if t_s.is_infinite() {
        return Ok(0.0_f64.copysign(t_s));
    }
    Ok(zeeman_ratio(nucleus.omega(), t_s).tanh())
}

/// Linearised high-temperature form ħω_n / (2 k_B T_s).
pub fn linear_polarization(t_s: f64, nucleus: &NucleusSpec) -> Result<f64> {
    if t_s == 0.0 || t_s.is_nan() {
        return Err(Error::invalid(format!("spin temperature must be non-zero, got {t_s}")));
    }
    Ok(zeeman_ratio(nucleus.omega(), t_s))
}

/// Cross-effect pair formula (P_e1 − P_e2) / (1 − P_e1 P_e2).
pub fn ce_pair_polarization(p_e1: f64, p_e2: f64) -> Result<f64> {
    if !(p_e1.abs() <= 1.0) || !(p_e2.abs() <= 1.0) {
        return Err(Error::invalid(format!("electron polarizations ({p_e1}, {p_e2}) outside [-1, 1]")));
    }
    let denom = 1.0 - p_e1 * p_e2;
    if denom == 0.0 {
        return Err(Error::Indeterminate(format!("P_e1 = P_e2 = {p_e1}")));
    }
    Ok((p_e1 - p_e2) / denom)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    const H: f64 = 6.626_070_15e-34;
    const KB: f64 = 1.380_649e-23;

    #[test]
    fn carbon_half_polarization_spin_temperature() {
        let t = spin_temperature_from_polarization(0.5, &NucleusSpec::carbon13()).unwrap();
        let expected = H * 71.3e6 / (2.0 * KB * 0.5_f64.atanh());
        assert_relative_eq!(t, expected, max_relative = 1e-12);
        assert!((t - 3.115e-3).abs() < 1e-6);
    }

    #[test]
    fn inverse_identity_at_one_kelvin() {
        // ν chosen so that ħω_n/(2k_B) = 1 K
        let nu = 2.0 * KB / H;
        let n = NucleusSpec::new("unit", nu).unwrap();
        let t = spin_temperature_from_polarization(1.0_f64.tanh(), &n).unwrap();
        assert_relative_eq!(t, 1.0, max_relative = 1e-12);
    }

    #[test]
    fn out_of_range_and_zero_are_distinct_errors() {
        let n = NucleusSpec::carbon13();
        assert_eq!(spin_temperature_from_polarization(1.0, &n), Err(Error::OutOfRange(1.0)));
        assert_eq!(spin_temperature_from_polarization(-1.2, &n), Err(Error::OutOfRange(-1.2)));
        assert_eq!(spin_temperature_from_polarization(0.0, &n), Err(Error::InfiniteTemperature));
    }

    #[test]
    fn negative_polarization_gives_negative_temperature() {
        let t = spin_temperature_from_polarization(-0.3, &NucleusSpec::proton()).unwrap();
        assert!(t < 0.0);
    }

    #[test]
    fn equilibrium_polarizations_at_1p5k() {
        let p_h = polarization_from_spin_temperature(1.5, &NucleusSpec::proton()).unwrap();
        assert_relative_eq!(p_h, (H * 285.3e6 / (2.0 * KB * 1.5)).tanh(), max_relative = 1e-12);
        assert!((p_h - 4.564e-3).abs() < 1e-6);
        let p_c = polarization_from_spin_temperature(1.5, &NucleusSpec::carbon13()).unwrap();
        assert!((p_c - 1.141e-3).abs() < 1e-6);
    }

    #[test]
    fn infinite_temperature_limits() {
        let n = NucleusSpec::proton();
        let hot = polarization_from_spin_temperature(f64::INFINITY, &n).unwrap();
        assert_eq!(hot, 0.0);
        assert!(hot.is_sign_positive());
        let hot_neg = polarization_from_spin_temperature(f64::NEG_INFINITY, &n).unwrap();
        assert!(hot_neg == 0.0 && hot_neg.is_sign_negative());
        let p = polarization_from_spin_temperature(1e9, &n).unwrap();
        assert!(p > 0.0 && p < 1e-10);
        assert!(polarization_from_spin_temperature(0.0, &n).is_err());
    }

    #[test]
    fn linear_form_within_one_percent_below_point_one() {
        let n = NucleusSpec::proton();
        // ħω/(2kT) = 0.1 at T = ħω/(0.2 k)
        let t_edge = zeeman_ratio(n.omega(), 1.0) / 0.1;
        for f in [1.0, 1.5, 3.0, 10.0, 1e3] {
            let t = t_edge * f;
            let exact = polarization_from_spin_temperature(t, &n).unwrap();
            let lin = linear_polarization(t, &n).unwrap();
            assert!(((lin - exact) / exact).abs() < 1e-2);
        }
    }

    #[test]
    fn ce_pair_examples() {
        assert_relative_eq!(ce_pair_polarization(0.9, -0.9).unwrap(), 1.8 / 1.81, max_relative = 1e-15);
        assert_eq!(ce_pair_polarization(0.3, 0.3).unwrap(), 0.0);
        assert_eq!(ce_pair_polarization(1.0, -1.0).unwrap(), 1.0);
        assert!(matches!(ce_pair_polarization(1.0, 1.0), Err(Error::Indeterminate(_))));
        assert!(matches!(ce_pair_polarization(-1.0, -1.0), Err(Error::Indeterminate(_))));
        assert!(ce_pair_polarization(1.1, 0.0).is_err());
    }

    #[test]
    fn round_trip_fixed_points() {
        for n in [NucleusSpec::proton(), NucleusSpec::carbon13()] {
            for p in [0.9, -0.9, 0.5, -0.5, 1e-4, -1e-4] {
                let t = spin_temperature_from_polarization(p, &n).unwrap();
                let back = polarization_from_spin_temperature(t, &n).unwrap();
                assert_relative_eq!(back, p, max_relative = 1e-12);
            }
        }
    }

    proptest! {
        #[test]
        fn ce_pair_is_antisymmetric_and_bounded(a in -1.0f64..=1.0, b in -1.0f64..=1.0) {
            prop_assume!(a * b != 1.0);
            let ab = ce_pair_polarization(a, b).unwrap();
            let ba = ce_pair_polarization(b, a).unwrap();
            prop_assert_eq!(ab, -ba);
            prop_assert!(ab.abs() <= 1.0);
        }

        #[test]
        fn spin_temperature_decreases_with_polarization(p in 1e-6f64..0.999, dp in 1e-6f64..1e-3) {
            let n = NucleusSpec::carbon13();
            let q = (p + dp).min(0.999_999);
            prop_assume!(q > p);
            let tp = spin_temperature_from_polarization(p, &n).unwrap();
            let tq = spin_temperature_from_polarization(q, &n).unwrap();
            prop_assert!(tq < tp);
        }

        #[test]
        fn sign_of_spin_temperature_follows_polarization(p in -0.999f64..0.999) {
            prop_assume!(p != 0.0);
            let t = spin_temperature_from_polarization(p, &NucleusSpec::proton()).unwrap();
            prop_assert_eq!(t.signum(), p.signum());
        }
    }
}
