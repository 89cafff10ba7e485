//! Nuclear polarization from an electron profile, the three canonical irradiated
//! line shapes, and the two-temperature stationary state.
//!
//! Sign convention: electron polarizations are positive at thermal equilibrium
//! and the nuclear polarization integral is evaluated as written,
//!
//! ```text
//!        Σ_i w_i [P(ω_i) − P(ω_i + ω_n)]
//! P_n = ─────────────────────────────────
//!        Σ_i w_i [1 − P(ω_i) P(ω_i + ω_n)]
//! ```
//!
//! so a tanh profile at spin temperature T_s yields P_n = −tanh(ħω_n/2k_B T_s).

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::constants::{BOLTZMANN, HBAR};
use crate::error::{Error, Result};
use crate::line::{thermal_electron_profile, ElectronProfile, EprLine};
use crate::nucleus::NucleusSpec;

/// ħ/(2k_B) in K·s/rad.
const HALF_HBAR_OVER_KB: f64 = HBAR / (2.0 * BOLTZMANN);

/// Normalised residual accepted by the stationarity solver.
pub const BORGHINI_TOLERANCE: f64 = 1e-10;

/// Two-temperature state of the electron spins, held as inverse
/// temperatures. `beta_s == 0` is an infinite spin temperature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TmState {
    /// 1/T_s of the non-Zeeman reservoir, 1/K, signed.
    pub beta_s: f64,
    /// 1/T_Z of the Zeeman reservoir, 1/K. Zero under full saturation.
    pub beta_z: f64,
    /// Microwave frequency, rad/s.
    pub omega_mw: f64,
}

impl TmState {
    /// Fully saturated state (T_Z = ∞) at spin temperature `t_s`.
    pub fn new(t_s: f64, omega_mw: f64) -> Result<Self> {
        if t_s == 0.0 || t_s.is_nan() {
            return Err(Error::invalid(format!("spin temperature must be non-zero, got {t_s}")));
        }
        Ok(Self { beta_s: 1.0 / t_s, beta_z: 0.0, omega_mw })
    }

    pub fn spin_temperature(&self) -> Result<f64> {
        if self.beta_s == 0.0 {
            Err(Error::InfiniteTemperature)
        } else {
            Ok(1.0 / self.beta_s)
        }
    }

    pub fn zeeman_temperature(&self) -> Result<f64> {
        if self.beta_z == 0.0 {
            Err(Error::InfiniteTemperature)
        } else {
            Ok(1.0 / self.beta_z)
        }
    }

    /// P_e(ω) = tanh(ħ[β_Z ω_MW + β_s (ω − ω_MW)] / 2k_B).
    pub fn polarization_at(&self, omega: f64) -> f64 {
        (HALF_HBAR_OVER_KB * (self.beta_z * self.omega_mw + self.beta_s * (omega - self.omega_mw))).tanh()
    }
}

/// Parameters for the three sketched regimes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegimeProfileParams {
    /// Uniform saturation s ∈ [0, 1] (homogeneous case).
    pub saturation: f64,
    /// Hole FWHM, rad/s (breakdown case).
    pub hole_width: f64,
    /// Hole depth d ∈ [0, 1] (breakdown case).
    pub hole_depth: f64,
    /// Spin temperature, K (inhomogeneous case).
    pub t_s: f64,
}

impl RegimeProfileParams {
    pub fn validate(&self) -> Result<()> {
        check_unit("saturation", self.saturation)?;
        check_unit("hole depth", self.hole_depth)?;
        if !(self.hole_width > 0.0) {
            return Err(Error::invalid(format!("hole width must be positive, got {}", self.hole_width)));
        }
        if self.t_s == 0.0 || self.t_s.is_nan() {
            return Err(Error::invalid("spin temperature must be non-zero"));
        }
        Ok(())
    }
}

fn check_unit(name: &str, v: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&v) {
        return Err(Error::invalid(format!("{name} must lie in [0, 1], got {v}")));
    }
    Ok(())
}

/// ω_n in units of the grid spacing.
pub fn larmor_shift(line: &EprLine, nucleus: &NucleusSpec) -> Result<f64> {
    let omega_n = nucleus.omega();
    let spacing = line.spacing();
    if spacing > omega_n * (1.0 + 1e-9) {
        return Err(Error::Resolution { spacing, larmor: omega_n });
    }
    Ok((omega_n / spacing).max(1.0))
}

/// Pair sum on raw arrays with the partner at a fractional offset of
/// `shift` grid steps, linearly interpolated. Pairs are weighted by
/// g(ω)·g(ω + ω_n); a partner beyond the grid has g = 0 and drops out. With
/// no overlapping pair the result is 0.
pub fn pair_polarization(values: &[f64], weights: &[f64], shift: f64) -> Result<f64> {
    let n = values.len();
    if n != weights.len() {
        return Err(Error::invalid("values and weights differ in length"));
    }
    if !(shift >= 1.0 - 1e-9) || !shift.is_finite() {
        return Err(Error::invalid("shift must be at least one grid step"));
    }
    let mut k = shift.floor();
    let mut frac = shift - k;
    if frac < 1e-9 {
        frac = 0.0;
    } else if frac > 1.0 - 1e-9 {
        k += 1.0;
        frac = 0.0;
    }
    let k = k as usize;
    let reach = if frac == 0.0 { k } else { k + 1 };
    if reach >= n {
        return Ok(0.0);
    }
    let lerp = |v: &[f64], j: usize| if frac == 0.0 { v[j] } else { v[j] + frac * (v[j + 1] - v[j]) };
    let mut num = 0.0;
    let mut den = 0.0;
    for i in 0..n - reach {
        let a = values[i];
        let b = lerp(values, i + k);
        let w = weights[i] * lerp(weights, i + k);
        num += w * (a - b);
        den += w * (1.0 - a * b);
    }
    if den == 0.0 {
        if num == 0.0 {
            return Err(Error::Indeterminate("every pair is fully polarized in the same direction".into()));
        }
        return Err(Error::Numeric("vanishing pair denominator".into()));
    }
    Ok((num / den).clamp(-1.0, 1.0))
}

/// Nuclear polarization reached by triple-spin-flip transfer from the electron
/// profile, nuclear relaxation neglected.
pub fn nuclear_polarization(profile: &ElectronProfile, nucleus: &NucleusSpec) -> Result<f64> {
    let line = profile.line();
    let shift = larmor_shift(line, nucleus)?;
    pair_polarization(profile.values(), line.weights(), shift)
}

/// Uniformly reduced line: P_e = (1 − s) P₀.
pub fn profile_homogeneous(line: &Arc<EprLine>, temperature: f64, saturation: f64) -> Result<ElectronProfile> {
    check_unit("saturation", saturation)?;
    thermal_electron_profile(line, temperature)?.scaled(1.0 - saturation)
}

/// Spin-temperature profile around the irradiation frequency.
pub fn profile_inhomogeneous(line: &Arc<EprLine>, tm: &TmState) -> Result<ElectronProfile> {
    if !tm.beta_s.is_finite() || !tm.beta_z.is_finite() {
        return Err(Error::invalid("spin temperature must be non-zero"));
    }
    let values = line.grid().iter().map(|&w| tm.polarization_at(w)).collect();
    ElectronProfile::new(Arc::clone(line), values)
}

/// Unit-peak Lorentzian with the given half width at half maximum.
pub fn lorentzian(offset: f64, hwhm: f64) -> f64 {
    let x = offset / hwhm;
    1.0 / (1.0 + x * x)
}

/// Thermal line with a Lorentzian hole of FWHM `hole_width` and depth `hole_depth`.
pub fn profile_holeburn(
    line: &Arc<EprLine>,
    temperature: f64,
    omega_mw: f64,
    hole_width: f64,
    hole_depth: f64,
) -> Result<ElectronProfile> {
    if !(hole_width > 0.0) {
        return Err(Error::invalid(format!("hole width must be positive, got {hole_width}")));
    }
    check_unit("hole depth", hole_depth)?;
    let thermal = thermal_electron_profile(line, temperature)?;
    let hwhm = 0.5 * hole_width;
    let values = line
        .grid()
        .iter()
        .zip(thermal.values())
        .map(|(&w, &p0)| p0 * (1.0 - hole_depth * lorentzian(w - omega_mw, hwhm)))
        .collect();
    ElectronProfile::new(Arc::clone(line), values)
}

/// Stationary spin temperature for full saturation at `omega_mw`.
///
/// Solves the first-moment balance
/// Σ g_i (ω_i − ω_MW) [P₀(ω_i) − tanh(ħβ_s(ω_i − ω_MW)/2k_B)] = 0
/// for β_s by bisection on ±10³·2k_B/(ħΔ).
pub fn borghini_steady_state(line: &Arc<EprLine>, omega_mw: f64, temperature: f64) -> Result<TmState> {
    let reference = thermal_electron_profile(line, temperature)?;
    borghini_with_reference(&reference, omega_mw)
}

/// [`borghini_steady_state`] against an arbitrary reference profile.
pub fn borghini_with_reference(reference: &ElectronProfile, omega_mw: f64) -> Result<TmState> {
    let line = reference.line();
    if !line.contains(omega_mw) {
        return Err(Error::invalid(format!(
            "microwave frequency {omega_mw:.6e} rad/s outside the line [{:.6e}, {:.6e}]",
            line.lo(),
            line.hi()
        )));
    }
    let residual = BorghiniResidual::new(reference, omega_mw);

    if residual.eval(0.0).abs() < BORGHINI_TOLERANCE {
        return Ok(TmState { beta_s: 0.0, beta_z: 0.0, omega_mw });
    }

    let beta_max = 1e3 / (HALF_HBAR_OVER_KB * line.width());
    let (mut lo, mut hi) = (-beta_max, beta_max);
    let (mut f_lo, f_hi) = (residual.eval(lo), residual.eval(hi));
    if f_lo.signum() == f_hi.signum() {
        return Err(Error::NoRoot { lo, hi });
    }
    for _ in 0..400 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let f_mid = residual.eval(mid);
        if f_mid == 0.0 {
            lo = mid;
            hi = mid;
            break;
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    let beta_s = 0.5 * (lo + hi);
    let r = residual.eval(beta_s);
    if r.abs() >= BORGHINI_TOLERANCE {
        return Err(Error::Numeric(format!("stationarity residual {r:.3e} after bisection")));
    }
    Ok(TmState { beta_s, beta_z: 0.0, omega_mw })
}

/// First-moment residual normalised by Σ g|ω − ω_MW|.
pub fn borghini_residual(reference: &ElectronProfile, omega_mw: f64, beta_s: f64) -> f64 {
    BorghiniResidual::new(reference, omega_mw).eval(beta_s)
}

struct BorghiniResidual<'a> {
    offsets: Vec<f64>,
    weights: &'a [f64],
    reference: &'a [f64],
    norm: f64,
}

impl<'a> BorghiniResidual<'a> {
    fn new(reference: &'a ElectronProfile, omega_mw: f64) -> Self {
        let line = reference.line();
        let offsets: Vec<f64> = line.grid().iter().map(|w| w - omega_mw).collect();
        let norm = offsets.iter().zip(line.weights()).map(|(x, g)| g * x.abs()).sum::<f64>();
        Self { offsets, weights: line.weights(), reference: reference.values(), norm }
    }

    fn eval(&self, beta_s: f64) -> f64 {
        let c = HALF_HBAR_OVER_KB * beta_s;
        let sum: f64 = self
            .offsets
            .iter()
            .zip(self.weights)
            .zip(self.reference)
            .map(|((&x, &g), &p0)| g * x * (p0 - (c * x).tanh()))
            .sum();
        sum / self.norm
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::line::{make_epr_line, LineShape};
    use crate::polarization::ce_pair_polarization;
    use std::f64::consts::PI;

    const TWO_PI: f64 = 2.0 * PI;

    fn rect(n: usize) -> Arc<EprLine> {
        Arc::new(make_epr_line(LineShape::Rectangular, TWO_PI * 188.15e9, TWO_PI * 0.6e9, n).unwrap())
    }

    fn nucleus_for_shift(line: &EprLine, steps: usize) -> NucleusSpec {
        NucleusSpec::new("test", steps as f64 * line.spacing() / TWO_PI).unwrap()
    }

    #[test]
    fn uniform_profile_gives_zero() {
        let line = rect(201);
        let n = nucleus_for_shift(&line, 10);
        for p in [0.0, 0.3, -0.7, 0.9975] {
            let prof = ElectronProfile::new(Arc::clone(&line), vec![p; 201]).unwrap();
            assert_eq!(nuclear_polarization(&prof, &n).unwrap(), 0.0);
        }
    }

    #[test]
    fn two_packets_reduce_to_cross_effect_pair() {
        // three-point line with δω = ω_n/2: the only pair is (0, 2)
        let line = Arc::new(make_epr_line(LineShape::Rectangular, 1e12, 2e8, 3).unwrap());
        let n = nucleus_for_shift(&line, 2);
        let prof = ElectronProfile::new(Arc::clone(&line), vec![0.9, 0.1, -0.9]).unwrap();
        let pn = nuclear_polarization(&prof, &n).unwrap();
        assert!((pn - ce_pair_polarization(0.9, -0.9).unwrap()).abs() < 1e-12);
        assert!((pn - 0.99448).abs() < 1e-5);
    }

    #[test]
    fn global_sign_flip_negates_exactly() {
        let line = rect(201);
        let n = nucleus_for_shift(&line, 7);
        let values: Vec<f64> = (0..201).map(|i| ((i as f64) * 0.37).sin() * 0.8).collect();
        let prof = ElectronProfile::new(Arc::clone(&line), values).unwrap();
        let a = nuclear_polarization(&prof, &n).unwrap();
        let b = nuclear_polarization(&prof.negated(), &n).unwrap();
        assert_eq!(a, -b);
    }

    #[test]
    fn coarse_grid_is_a_resolution_error() {
        let line = rect(11);
        let n = NucleusSpec::new("slow", 0.5 * line.spacing() / TWO_PI).unwrap();
        let prof = thermal_electron_profile(&line, 1.5).unwrap();
        assert!(matches!(nuclear_polarization(&prof, &n), Err(Error::Resolution { .. })));
    }

    #[test]
    fn shift_wider_than_line_evaluates_to_zero() {
        let line = rect(11);
        let n = nucleus_for_shift(&line, 40);
        let prof = thermal_electron_profile(&line, 1.5).unwrap();
        assert_eq!(nuclear_polarization(&prof, &n).unwrap(), 0.0);
    }

    #[test]
    fn thermal_line_gives_lattice_nuclear_polarization() {
        let line = rect(201);
        let n = nucleus_for_shift(&line, 24);
        let prof = thermal_electron_profile(&line, 1.5).unwrap();
        let pn = nuclear_polarization(&prof, &n).unwrap();
        let expected = -(HALF_HBAR_OVER_KB * n.omega() / 1.5).tanh();
        assert!((pn - expected).abs() < 1e-9 * expected.abs().max(1e-12) + 1e-15);
    }

    #[test]
    fn homogeneous_limits() {
        let line = rect(201);
        let n = nucleus_for_shift(&line, 10);
        let thermal = thermal_electron_profile(&line, 1.5).unwrap();
        assert_eq!(profile_homogeneous(&line, 1.5, 0.0).unwrap(), thermal);
        let zero = profile_homogeneous(&line, 1.5, 1.0).unwrap();
        assert!(zero.values().iter().all(|&v| v == 0.0));
        assert_eq!(nuclear_polarization(&zero, &n).unwrap(), 0.0);
        assert!(profile_homogeneous(&line, 1.5, 1.2).is_err());
        assert!(profile_homogeneous(&line, 1.5, -0.1).is_err());
    }

    #[test]
    fn inhomogeneous_profile_crosses_zero_at_mw() {
        let line = rect(201);
        let omega_mw = line.grid()[50];
        let tm = TmState::new(0.01, omega_mw).unwrap();
        let prof = profile_inhomogeneous(&line, &tm).unwrap();
        assert_eq!(prof.values()[50], 0.0);
        assert!(prof.values().windows(2).all(|w| w[1] > w[0]));
        assert!(TmState::new(0.0, omega_mw).is_err());
    }

    #[test]
    fn inhomogeneous_polarization_sign_follows_convention() {
        let line = rect(201);
        let n = nucleus_for_shift(&line, 10);
        for t_s in [0.005, -0.005, 0.05] {
            let tm = TmState::new(t_s, line.center()).unwrap();
            let pn = nuclear_polarization(&profile_inhomogeneous(&line, &tm).unwrap(), &n).unwrap();
            assert!(pn != 0.0);
            assert_eq!(pn.signum(), -t_s.signum());
            let exact = -(HALF_HBAR_OVER_KB * n.omega() / t_s).tanh();
            assert!((pn - exact).abs() < 1e-12);
        }
    }

    #[test]
    fn infinite_spin_temperature_gives_flat_zero_profile() {
        let line = rect(101);
        let n = nucleus_for_shift(&line, 5);
        let tm = TmState::new(f64::INFINITY, line.center()).unwrap();
        assert_eq!(tm.spin_temperature(), Err(Error::InfiniteTemperature));
        let prof = profile_inhomogeneous(&line, &tm).unwrap();
        assert!(prof.values().iter().all(|&v| v == 0.0));
        assert_eq!(nuclear_polarization(&prof, &n).unwrap(), 0.0);
    }

    #[test]
    fn holeburn_limits_and_errors() {
        let line = rect(201);
        let thermal = thermal_electron_profile(&line, 1.5).unwrap();
        let no_hole = profile_holeburn(&line, 1.5, line.center(), 1e7, 0.0).unwrap();
        assert_eq!(no_hole, thermal);
        assert!(profile_holeburn(&line, 1.5, line.center(), 0.0, 0.5).is_err());
        assert!(profile_holeburn(&line, 1.5, line.center(), 1e7, 1.5).is_err());
        let full = profile_holeburn(&line, 1.5, line.grid()[60], 1e7, 1.0).unwrap();
        assert_eq!(full.values()[60], 0.0);
    }

    #[test]
    fn hole_deficit_is_localised() {
        let line = rect(2001);
        let omega_mw = line.grid()[800];
        let hole_width = 20.0 * line.spacing();
        let thermal = thermal_electron_profile(&line, 1.5).unwrap();
        let hole = profile_holeburn(&line, 1.5, omega_mw, hole_width, 0.8).unwrap();
        let mut inside = 0.0;
        let mut total = 0.0;
        for ((&w, &p0), &p) in line.grid().iter().zip(thermal.values()).zip(hole.values()) {
            let d = p0 - p;
            total += d;
            if (w - omega_mw).abs() <= 5.0 * hole_width {
                inside += d;
            }
        }
        assert!(inside / total >= 0.9);
    }

    #[test]
    fn borghini_rejects_out_of_line_frequency() {
        let line = rect(201);
        let err = borghini_steady_state(&line, line.hi() + 10.0 * line.spacing(), 1.5);
        assert!(matches!(err, Err(Error::InvalidArgument(_))));
        assert!(borghini_steady_state(&line, line.center(), 0.0).is_err());
    }

    #[test]
    fn borghini_symmetric_reference_gives_infinite_spin_temperature() {
        let line = rect(201);
        let flat = ElectronProfile::new(Arc::clone(&line), vec![0.9; 201]).unwrap();
        let tm = borghini_with_reference(&flat, line.center()).unwrap();
        assert_eq!(tm.beta_s, 0.0);
        assert_eq!(tm.spin_temperature(), Err(Error::InfiniteTemperature));
    }

    #[test]
    fn borghini_edge_irradiation_sign_and_residual() {
        let line = rect(201);
        let low = borghini_steady_state(&line, line.lo(), 1.5).unwrap();
        let high = borghini_steady_state(&line, line.hi(), 1.5).unwrap();
        assert!(low.spin_temperature().unwrap() > 0.0);
        assert!(high.spin_temperature().unwrap() < 0.0);
        let reference = thermal_electron_profile(&line, 1.5).unwrap();
        assert!(borghini_residual(&reference, line.lo(), low.beta_s).abs() < BORGHINI_TOLERANCE);
    }
}
