//! Data reduction for DNP experiments: spectra, peak amplitudes, build-up
//! curves, spin temperatures and microwave-sweep comparison.

pub mod baseline;
pub mod buildup;
pub mod lsq;
pub mod peak;
pub mod spectrum;
pub mod spintemp;
pub mod sweep;
pub mod synth;

use serde::{Deserialize, Serialize};

pub use baseline::{baseline_correct, subtract_background};
pub use buildup::{fit_buildup, BuildUpResult};
pub use peak::{fit_peak_amplitude, PeakFit};
pub use spectrum::{apodize_and_transform, ScanMeta, ScanRecord, Spectrum};
pub use spintemp::{extract_spin_temperature, spin_temp_coincidence, Coincidence};
pub use sweep::{compare_sweeps, SweepComparison, SweepProfile};

use crate::error::{Error, Result};

/// Settings for reducing one FID to a peak amplitude.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineSettings {
    pub baseline_degree: usize,
    /// Apodization σ in seconds; a third of the acquisition window if absent.
    pub apodization_sigma: Option<f64>,
    /// Half width of the peak window around the strongest point, Hz.
    pub peak_window_hz: f64,
}

impl Default for PipelineSettings {
    fn default() -> Self {
        Self { baseline_degree: 3, apodization_sigma: None, peak_window_hz: 1500.0 }
    }
}

/// Transform, baseline-correct outside the peak window and fit the
/// absorptive peak of one scan.
pub fn scan_amplitude(scan: &ScanRecord, settings: &PipelineSettings) -> Result<PeakFit> {
    let sigma = settings.apodization_sigma.unwrap_or(scan.acquisition_time() / 3.0);
    let spec = apodize_and_transform(scan, sigma)?;
    let re = spec.real();
    let ipk = (0..re.len()).max_by(|&a, &b| re[a].abs().total_cmp(&re[b].abs())).ok_or(Error::NoData)?;
    let center = spec.freq[ipk];
    let (lo, hi) = (center - settings.peak_window_hz, center + settings.peak_window_hz);
    let first = spec.freq.partition_point(|&f| f < lo);
    let last = spec.freq.partition_point(|&f| f <= hi);
    let corrected = baseline_correct(&re, settings.baseline_degree, &[first..last])?;
    fit_peak_amplitude(&spec.freq, &corrected, (lo, hi))
}
