//! Gaussian apodization and Fourier transformation of free induction decays.

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nucleus::NucleusSpec;

/// Acquisition metadata of one scan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanMeta {
    pub nucleus: NucleusSpec,
    /// Bath temperature, K.
    pub t_bath: f64,
    pub radical_mm: f64,
    pub mw_ghz: f64,
    pub flip_deg: f64,
    /// Seconds since the start of the series.
    pub timestamp: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanRecord {
    samples: Vec<Complex64>,
    dwell: f64,
    pub meta: ScanMeta,
}

impl ScanRecord {
    pub fn new(samples: Vec<Complex64>, dwell: f64, meta: ScanMeta) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::NoData);
        }
        if !(dwell > 0.0 && dwell.is_finite()) {
            return Err(Error::invalid(format!("dwell time must be positive, got {dwell}")));
        }
        Ok(Self { samples, dwell, meta })
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn dwell(&self) -> f64 {
        self.dwell
    }

    /// Acquisition window n·dwell, s.
    pub fn acquisition_time(&self) -> f64 {
        self.samples.len() as f64 * self.dwell
    }
}

/// Complex spectrum on a centred frequency axis in Hz.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub freq: Vec<f64>,
    pub values: Vec<Complex64>,
}

impl Spectrum {
    pub fn real(&self) -> Vec<f64> {
        self.values.iter().map(|c| c.re).collect()
    }

    pub fn magnitude(&self) -> Vec<f64> {
        self.values.iter().map(|c| c.norm()).collect()
    }
}

/// Multiplies by exp(−t²/2σ²), zero-fills to the next power of two and
/// transforms. The zero frequency sits at index n/2.
pub fn apodize_and_transform(scan: &ScanRecord, sigma: f64) -> Result<Spectrum> {
    if !(sigma > 0.0) || sigma.is_nan() {
        return Err(Error::invalid(format!("apodization width must be positive, got {sigma}")));
    }
    let n = scan.samples.len().next_power_of_two();
    let mut buf = vec![Complex64::new(0.0, 0.0); n];
    let inv = 1.0 / (2.0 * sigma * sigma);
    for (k, (&s, slot)) in scan.samples.iter().zip(buf.iter_mut()).enumerate() {
        let t = k as f64 * scan.dwell;
        *slot = s * (-t * t * inv).exp();
    }
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    buf.rotate_right(n / 2);
    let df = 1.0 / (n as f64 * scan.dwell);
    let freq = (0..n).map(|k| (k as f64 - (n / 2) as f64) * df).collect();
    Ok(Spectrum { freq, values: buf })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn meta() -> ScanMeta {
        ScanMeta {
            nucleus: NucleusSpec::carbon13(),
            t_bath: 1.5,
            radical_mm: 40.0,
            mw_ghz: 188.0,
            flip_deg: 5.0,
            timestamp: 0.0,
        }
    }

    fn fid(n: usize, dwell: f64, f: f64, t2: f64) -> Vec<Complex64> {
        (0..n)
            .map(|k| {
                let t = k as f64 * dwell;
                Complex64::from_polar((-t / t2).exp(), 2.0 * PI * f * t)
            })
            .collect()
    }

    #[test]
    fn tone_lands_on_its_bin_with_full_height() {
        let n = 1024;
        let dwell = 1e-5;
        let f = 50.0 / (n as f64 * dwell);
        let cos: Vec<Complex64> = (0..n)
            .map(|k| Complex64::new((2.0 * PI * f * k as f64 * dwell).cos(), 0.0))
            .collect();
        let scan = ScanRecord::new(cos, dwell, meta()).unwrap();
        let spec = apodize_and_transform(&scan, 1e6).unwrap();
        let mag = spec.magnitude();
        let (imax, &peak) = mag.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).unwrap();
        assert!((spec.freq[imax].abs() - f).abs() < 1e-9);
        assert!((peak - n as f64 / 2.0).abs() < 1e-6 * n as f64);
    }

    #[test]
    fn narrower_window_lowers_the_peak() {
        let scan = ScanRecord::new(fid(1000, 1e-5, 2000.0, 2e-3), 1e-5, meta()).unwrap();
        let h1 = apodize_and_transform(&scan, 5e-3).unwrap().real().into_iter().fold(f64::MIN, f64::max);
        let h2 = apodize_and_transform(&scan, 1e-3).unwrap().real().into_iter().fold(f64::MIN, f64::max);
        assert!(h2 < h1);
    }

    #[test]
    fn zero_fill_and_zero_signal() {
        let scan = ScanRecord::new(vec![Complex64::new(0.0, 0.0); 300], 1e-5, meta()).unwrap();
        let spec = apodize_and_transform(&scan, 1e-3).unwrap();
        assert_eq!(spec.values.len(), 512);
        assert!(spec.values.iter().all(|c| c.norm() == 0.0));
        assert_eq!(spec.freq[256], 0.0);
        assert!(apodize_and_transform(&scan, 0.0).is_err());
        assert!(ScanRecord::new(vec![], 1e-5, meta()).is_err());
        assert!(ScanRecord::new(vec![Complex64::new(1.0, 0.0)], 0.0, meta()).is_err());
    }
}
