//! Synthetic build-up series and free induction decays for self-tests.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::spectrum::{ScanMeta, ScanRecord};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthParams {
    pub s_inf: f64,
    /// Build-up time constant, s.
    pub tau: f64,
    /// Noise standard deviation relative to |S_∞|.
    pub noise: f64,
    /// Seconds between scans.
    pub cadence: f64,
    /// Length of the series, s.
    pub duration: f64,
    /// FID points per scan.
    pub fid_points: usize,
    /// Dwell time, s.
    pub dwell: f64,
    /// Resonance offset, Hz.
    pub offset_hz: f64,
    /// FID decay constant, s.
    pub t2: f64,
}

impl Default for SynthParams {
    fn default() -> Self {
        Self {
            s_inf: 10.0,
            tau: 600.0,
            noise: 0.01,
            cadence: 5.0,
            duration: 5400.0,
            fid_points: 512,
            dwell: 20e-6,
            offset_hz: 1000.0,
            t2: 2e-3,
        }
    }
}

impl SynthParams {
    pub fn validate(&self) -> Result<()> {
        let pos = [("tau", self.tau), ("cadence", self.cadence), ("duration", self.duration), ("dwell", self.dwell), ("t2", self.t2)];
        for (name, v) in pos {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::invalid(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.noise >= 0.0 && self.noise.is_finite()) || !self.s_inf.is_finite() || !self.offset_hz.is_finite() {
            return Err(Error::invalid("noise must be non-negative and amplitudes finite"));
        }
        if self.fid_points == 0 {
            return Err(Error::invalid("fid_points must be at least 1"));
        }
        Ok(())
    }

    /// Scan times cadence, 2·cadence, … up to the duration.
    pub fn times(&self) -> Vec<f64> {
        let n = (self.duration / self.cadence + 1e-9).floor() as usize;
        (1..=n).map(|k| k as f64 * self.cadence).collect()
    }

    fn noise_dist(&self) -> Normal<f64> {
        Normal::new(0.0, self.noise * self.s_inf.abs()).expect("validated noise")
    }
}

pub fn buildup_value(s_inf: f64, tau: f64, t: f64) -> f64 {
    -s_inf * (-t / tau).exp_m1()
}

/// Noisy amplitudes S(t) = S_∞(1 − e^{−t/τ}) + ε.
pub fn synth_buildup_points<R: Rng + ?Sized>(p: &SynthParams, rng: &mut R) -> Result<Vec<(f64, f64)>> {
    p.validate()?;
    let dist = p.noise_dist();
    Ok(p.times().into_iter().map(|t| (t, buildup_value(p.s_inf, p.tau, t) + dist.sample(rng))).collect())
}

/// Complex FID of the given amplitude with white complex noise of standard
/// deviation `noise_sd` per quadrature.
pub fn synth_fid<R: Rng + ?Sized>(
    amplitude: f64,
    n: usize,
    dwell: f64,
    offset_hz: f64,
    t2: f64,
    noise_sd: f64,
    rng: &mut R,
) -> Vec<Complex64> {
    let dist = Normal::new(0.0, noise_sd.max(0.0)).expect("finite noise");
    (0..n)
        .map(|k| {
            let t = k as f64 * dwell;
            let clean = Complex64::from_polar(amplitude * (-t / t2).exp(), 2.0 * PI * offset_hz * t);
            if noise_sd > 0.0 {
                clean + Complex64::new(dist.sample(rng), dist.sample(rng))
            } else {
                clean
            }
        })
        .collect()
}

/// Scans whose FID amplitudes follow the build-up law with `noise` relative
/// amplitude scatter. The decays themselves are noiseless.
pub fn synth_series<R: Rng + ?Sized>(p: &SynthParams, meta: &ScanMeta, rng: &mut R) -> Result<Vec<ScanRecord>> {
    p.validate()?;
    let amp_dist = p.noise_dist();
    p.times()
        .into_iter()
        .map(|t| {
            let amp = buildup_value(p.s_inf, p.tau, t) + amp_dist.sample(rng);
            let samples = synth_fid(amp, p.fid_points, p.dwell, p.offset_hz, p.t2, 0.0, rng);
            ScanRecord::new(samples, p.dwell, ScanMeta { timestamp: t, ..meta.clone() })
        })
        .collect()
}
