//! Discretised inhomogeneous EPR line and electron polarization profiles on it.

use std::f64::consts::{LN_2, PI};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::constants::zeeman_ratio;
use crate::error::{Error, Result};

/// Default number of spin packets; odd so the line center is a grid point.
pub const DEFAULT_POINTS: usize = 201;

/// Half-width of the Gaussian window in standard deviations.
const GAUSSIAN_SPAN_SIGMAS: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LineShape {
    Rectangular,
    Gaussian,
}

impl std::str::FromStr for LineShape {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "rect" | "rectangular" => Ok(LineShape::Rectangular),
            "gauss" | "gaussian" => Ok(LineShape::Gaussian),
            other => Err(Error::invalid(format!("unknown line shape '{other}'"))),
        }
    }
}

/// Spectral density g(ω) sampled on a uniform grid of absolute electron
/// frequencies, normalised so that Σ g_i δω = 1.
#[derive(Debug, Clone, PartialEq)]
pub struct EprLine {
    grid: Vec<f64>,
    weights: Vec<f64>,
    spacing: f64,
    center: f64,
    width: f64,
    shape: LineShape,
    mass: f64,
}

/// Builds a normalised line. `width` is the full width for a rectangular line
/// and the FWHM for a Gaussian one (sampled over ±3σ, truncated mass folded
/// back in by the normalisation).
pub fn make_epr_line(shape: LineShape, center: f64, width: f64, n_points: usize) -> Result<EprLine> {
    if !(width > 0.0) || !width.is_finite() {
        return Err(Error::invalid(format!("line width must be positive, got {width}")));
    }
    if !center.is_finite() {
        return Err(Error::invalid("line center must be finite"));
    }
    if n_points < 3 {
        return Err(Error::invalid(format!("need at least 3 grid points, got {n_points}")));
    }
    if n_points % 2 == 0 {
        return Err(Error::invalid(format!("grid point count must be odd, got {n_points}")));
    }

    let span = match shape {
        LineShape::Rectangular => width,
        LineShape::Gaussian => 2.0 * GAUSSIAN_SPAN_SIGMAS * fwhm_to_sigma(width),
    };
    let spacing = span / (n_points - 1) as f64;
    let half = (n_points / 2) as isize;
    let grid: Vec<f64> = (0..n_points as isize).map(|i| center + (i - half) as f64 * spacing).collect();

    let raw: Vec<f64> = grid.iter().map(|&w| shape_value(shape, center, width, w)).collect();
    let mass: f64 = raw.iter().sum::<f64>() * spacing;
    let weights = raw.into_iter().map(|g| g / mass).collect();

    Ok(EprLine { grid, weights, spacing, center, width, shape, mass })
}

fn fwhm_to_sigma(fwhm: f64) -> f64 {
    fwhm / (2.0 * (2.0 * LN_2).sqrt())
}

fn shape_value(shape: LineShape, center: f64, width: f64, omega: f64) -> f64 {
    match shape {
        LineShape::Rectangular => 1.0,
        LineShape::Gaussian => {
            let s = fwhm_to_sigma(width);
            let x = (omega - center) / s;
            (-0.5 * x * x).exp()
        }
    }
}

impl EprLine {
    /// Like [`make_epr_line`] but nudges the width so that `omega_n` is an exact
    /// integer number of grid steps.
    pub fn commensurate(
        shape: LineShape,
        center: f64,
        width: f64,
        n_points: usize,
        omega_n: f64,
    ) -> Result<EprLine> {
        let trial = make_epr_line(shape, center, width, n_points)?;
        if !(omega_n > 0.0) {
            return Err(Error::invalid("nuclear frequency must be positive"));
        }
        let steps = (omega_n / trial.spacing).round().max(1.0);
        let scale = (omega_n / steps) / trial.spacing;
        make_epr_line(shape, center, width * scale, n_points)
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Uniform grid step δω (rad/s).
    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn center(&self) -> f64 {
        self.center
    }

    pub fn width(&self) -> f64 {
        self.width
    }

    pub fn shape(&self) -> LineShape {
        self.shape
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn lo(&self) -> f64 {
        self.grid[0]
    }

    pub fn hi(&self) -> f64 {
        self.grid[self.grid.len() - 1]
    }

    pub fn contains(&self, omega: f64) -> bool {
        let tol = 1e-9 * self.spacing;
        omega >= self.lo() - tol && omega <= self.hi() + tol
    }

    /// Index of the grid point closest to `omega`, clamped to the grid.
    pub fn nearest_index(&self, omega: f64) -> usize {
        let x = ((omega - self.lo()) / self.spacing).round();
        x.clamp(0.0, (self.len() - 1) as f64) as usize
    }

    /// Continuous normalised density at `omega` (zero outside the sampled window).
    pub fn density(&self, omega: f64) -> f64 {
        if !self.contains(omega) {
            return 0.0;
        }
        shape_value(self.shape, self.center, self.width, omega) / self.mass
    }

    /// Σ g_i δω; equals one up to rounding.
    pub fn total_mass(&self) -> f64 {
        self.weights.iter().sum::<f64>() * self.spacing
    }
}

/// Per-packet electron polarization P_e(ω_i) on a shared line.
#[derive(Debug, Clone, PartialEq)]
pub struct ElectronProfile {
    line: Arc<EprLine>,
    values: Vec<f64>,
}

impl ElectronProfile {
    /// Values must satisfy |P| <= 1; excursions up to 1e-9 from rounding are clamped.
    pub fn new(line: Arc<EprLine>, values: Vec<f64>) -> Result<Self> {
        if values.len() != line.len() {
            return Err(Error::invalid(format!(
                "profile has {} values for a {}-point line",
                values.len(),
                line.len()
            )));
        }
        let mut values = values;
        for v in values.iter_mut() {
            if !v.is_finite() || v.abs() > 1.0 + 1e-9 {
                return Err(Error::invalid(format!("electron polarization {v} outside [-1, 1]")));
            }
            *v = v.clamp(-1.0, 1.0);
        }
        Ok(Self { line, values })
    }

    pub fn line(&self) -> &EprLine {
        &self.line
    }

    pub fn shared_line(&self) -> Arc<EprLine> {
        Arc::clone(&self.line)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Global sign flip P → −P.
    pub fn negated(&self) -> ElectronProfile {
        ElectronProfile { line: Arc::clone(&self.line), values: self.values.iter().map(|v| -v).collect() }
    }

    /// Uniform scaling by `factor` in [-1, 1].
    pub fn scaled(&self, factor: f64) -> Result<ElectronProfile> {
        ElectronProfile::new(Arc::clone(&self.line), self.values.iter().map(|v| v * factor).collect())
    }
}

/// Equilibrium profile P₀(ω) = tanh(ħω/(2k_B T)) at absolute electron frequency.
pub fn thermal_electron_profile(line: &Arc<EprLine>, temperature: f64) -> Result<ElectronProfile> {
    if !(temperature > 0.0) {
        return Err(Error::invalid(format!("temperature must be positive, got {temperature}")));
    }
    let values = line.grid().iter().map(|&w| zeeman_ratio(w, temperature).tanh()).collect();
    ElectronProfile::new(Arc::clone(line), values)
}

/// 2π·ν helper for callers that build lines from GHz.
pub fn line_from_ghz(shape: LineShape, center_ghz: f64, width_ghz: f64, n_points: usize) -> Result<EprLine> {
    make_epr_line(shape, 2.0 * PI * center_ghz * 1e9, 2.0 * PI * width_ghz * 1e9, n_points)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    const TWO_PI: f64 = 2.0 * PI;

    #[test]
    fn rectangular_line_has_equal_normalised_weights() {
        let line = make_epr_line(LineShape::Rectangular, 0.0, TWO_PI * 500e6, 201).unwrap();
        assert_eq!(line.len(), 201);
        let w0 = line.weights()[0];
        assert!(line.weights().iter().all(|&w| w == w0));
        assert_relative_eq!(line.total_mass(), 1.0, max_relative = 1e-10);
        assert_relative_eq!(line.hi() - line.lo(), TWO_PI * 500e6, max_relative = 1e-12);
    }

    #[test]
    fn gaussian_half_maximum_at_half_fwhm() {
        let fwhm = TWO_PI * 300e6;
        let line = make_epr_line(LineShape::Gaussian, 0.0, fwhm, 201).unwrap();
        let ratio = line.density(0.0) / line.density(fwhm / 2.0);
        assert_relative_eq!(ratio, 2.0, max_relative = 1e-12);
        assert_relative_eq!(line.total_mass(), 1.0, max_relative = 1e-10);
        // window spans ±3σ
        let sigma = fwhm_to_sigma(fwhm);
        assert_relative_eq!(line.hi(), 3.0 * sigma, max_relative = 1e-12);
    }

    #[test]
    fn bad_arguments_are_rejected() {
        assert!(matches!(
            make_epr_line(LineShape::Rectangular, 0.0, -1.0, 201),
            Err(Error::InvalidArgument(_))
        ));
        assert!(make_epr_line(LineShape::Rectangular, 0.0, 0.0, 201).is_err());
        assert!(make_epr_line(LineShape::Rectangular, 0.0, 1.0, 1).is_err());
        assert!(make_epr_line(LineShape::Rectangular, 0.0, 1.0, 200).is_err());
    }

    #[test]
    fn center_sits_on_grid_and_grid_is_uniform() {
        let center = TWO_PI * 188.0e9;
        let line = make_epr_line(LineShape::Gaussian, center, TWO_PI * 0.6e9, 201).unwrap();
        assert_eq!(line.grid()[100], center);
        for pair in line.grid().windows(2) {
            assert_relative_eq!(pair[1] - pair[0], line.spacing(), max_relative = 1e-9);
        }
    }

    #[test]
    fn normalisation_holds_for_any_point_count() {
        for n in [3, 5, 11, 201, 2001] {
            for shape in [LineShape::Rectangular, LineShape::Gaussian] {
                let line = make_epr_line(shape, 1e12, 3e9, n).unwrap();
                assert_relative_eq!(line.total_mass(), 1.0, max_relative = 1e-10);
            }
        }
    }

    #[test]
    fn commensurate_line_puts_larmor_on_grid() {
        let omega_n = TWO_PI * 71.3e6;
        let line =
            EprLine::commensurate(LineShape::Rectangular, TWO_PI * 188e9, TWO_PI * 0.6e9, 201, omega_n).unwrap();
        let k = omega_n / line.spacing();
        assert!((k - k.round()).abs() < 1e-6 * k);
    }

    #[test]
    fn thermal_profile_at_188ghz_and_1p5k() {
        let line = Arc::new(make_epr_line(LineShape::Rectangular, TWO_PI * 188.0e9, TWO_PI * 1e6, 3).unwrap());
        let p = thermal_electron_profile(&line, 1.5).unwrap();
        // tanh(h·188e9 / (2 kB 1.5)) evaluated independently
        let x: f64 = 6.626_070_15e-34 * 188.0e9 / (2.0 * 1.380_649e-23 * 1.5);
        assert_relative_eq!(p.values()[1], x.tanh(), max_relative = 1e-12);
        assert!((p.values()[1] - 0.99513).abs() < 1e-5);
    }

    #[test]
    fn thermal_profile_vanishes_at_high_temperature_and_rejects_zero() {
        let line = Arc::new(make_epr_line(LineShape::Rectangular, TWO_PI * 188.0e9, TWO_PI * 0.6e9, 11).unwrap());
        let p = thermal_electron_profile(&line, 1e9).unwrap();
        assert!(p.values().iter().all(|v| v.abs() < 1e-8));
        assert!(thermal_electron_profile(&line, 0.0).is_err());
        assert!(thermal_electron_profile(&line, -2.0).is_err());
    }

    #[test]
    fn thermal_profile_decreases_with_temperature() {
        let line = Arc::new(make_epr_line(LineShape::Gaussian, TWO_PI * 188.0e9, TWO_PI * 0.6e9, 21).unwrap());
        let temps = [0.5, 1.0, 1.5, 3.0, 6.5, 20.0, 100.0];
        let profiles: Vec<_> = temps.iter().map(|&t| thermal_electron_profile(&line, t).unwrap()).collect();
        for pair in profiles.windows(2) {
            for (a, b) in pair[0].values().iter().zip(pair[1].values()) {
                assert!(a > b);
            }
        }
    }

    #[test]
    fn profile_rejects_values_beyond_unity() {
        let line = Arc::new(make_epr_line(LineShape::Rectangular, 0.0, 1.0, 3).unwrap());
        assert!(ElectronProfile::new(Arc::clone(&line), vec![0.0, 1.5, 0.0]).is_err());
        assert!(ElectronProfile::new(Arc::clone(&line), vec![0.0, 0.0]).is_err());
        let p = ElectronProfile::new(line, vec![1.0 + 1e-12, 0.0, -1.0]).unwrap();
        assert_eq!(p.values()[0], 1.0);
    }
}
