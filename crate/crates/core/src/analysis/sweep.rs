//! Shape comparison of microwave-frequency sweeps of two nuclei.

use serde::{Deserialize, Serialize};

use super::baseline::interp;
use crate::error::{Error, Result};

pub const DEFAULT_SWEEP_THRESHOLD: f64 = 0.05;
pub const MIN_SWEEP_POINTS: usize = 5;

/// Signal amplitude against microwave frequency (GHz).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepProfile {
    pub points: Vec<(f64, f64)>,
    #[serde(default)]
    pub normalized: bool,
    #[serde(default)]
    pub zero_crossing: Option<f64>,
}

impl SweepProfile {
    pub fn new(points: Vec<(f64, f64)>) -> Result<Self> {
        if points.len() < MIN_SWEEP_POINTS {
            return Err(Error::Underdetermined { points: points.len(), params: MIN_SWEEP_POINTS });
        }
        if points.iter().any(|p| !p.0.is_finite() || !p.1.is_finite()) {
            return Err(Error::invalid("non-finite point in sweep profile"));
        }
        if points.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(Error::invalid("sweep frequencies must be strictly increasing"));
        }
        Ok(Self { points, normalized: false, zero_crossing: None })
    }

    /// Zero crossing between the global maximum and minimum, by linear
    /// interpolation.
    pub fn find_zero_crossing(&self) -> Result<f64> {
        let pts = &self.points;
        let imax = (0..pts.len()).max_by(|&a, &b| pts[a].1.total_cmp(&pts[b].1)).ok_or(Error::NoData)?;
        let imin = (0..pts.len()).min_by(|&a, &b| pts[a].1.total_cmp(&pts[b].1)).ok_or(Error::NoData)?;
        let (lo, hi) = (imax.min(imin), imax.max(imin));
        for i in lo..hi {
            let (f0, s0) = pts[i];
            let (f1, s1) = pts[i + 1];
            if s0 == 0.0 {
                return Ok(f0);
            }
            if s0 * s1 < 0.0 {
                return Ok(f0 + (f1 - f0) * s0 / (s0 - s1));
            }
        }
        Err(Error::NoCrossing)
    }

    /// Shifted so the crossing sits at zero and scaled to unit max |S|.
    pub fn aligned(&self) -> Result<SweepProfile> {
        let c = self.find_zero_crossing()?;
        let peak = self.points.iter().fold(0.0_f64, |m, p| m.max(p.1.abs()));
        let points = self.points.iter().map(|&(f, s)| (f - c, s / peak)).collect();
        Ok(SweepProfile { points, normalized: true, zero_crossing: Some(0.0) })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepComparison {
    /// ∫|h − x| dν / ∫dν over the common aligned range.
    pub discrepancy: f64,
    pub tm_verdict: bool,
    pub threshold: f64,
    pub crossing_a: f64,
    pub crossing_b: f64,
    pub aligned_a: SweepProfile,
    pub aligned_b: SweepProfile,
}

/// Aligns both profiles at their zero crossings, normalises each to its own
/// maximum and integrates the absolute difference of the linear
/// interpolants exactly over the overlap.
pub fn compare_sweeps(a: &SweepProfile, b: &SweepProfile, threshold: f64) -> Result<SweepComparison> {
    for p in [a, b] {
        if p.points.len() < MIN_SWEEP_POINTS {
            return Err(Error::Underdetermined { points: p.points.len(), params: MIN_SWEEP_POINTS });
        }
    }
    let (crossing_a, crossing_b) = (a.find_zero_crossing()?, b.find_zero_crossing()?);
    let (aa, bb) = (a.aligned()?, b.aligned()?);
    let discrepancy = mean_abs_difference(&aa.points, &bb.points)?;
    Ok(SweepComparison {
        discrepancy,
        tm_verdict: discrepancy < threshold,
        threshold,
        crossing_a,
        crossing_b,
        aligned_a: aa,
        aligned_b: bb,
    })
}

fn mean_abs_difference(a: &[(f64, f64)], b: &[(f64, f64)]) -> Result<f64> {
    let lo = a[0].0.max(b[0].0);
    let hi = a[a.len() - 1].0.min(b[b.len() - 1].0);
    if !(hi > lo) {
        return Err(Error::Indeterminate("aligned sweeps do not overlap".into()));
    }
    let mut nodes: Vec<f64> = a.iter().chain(b).map(|p| p.0).filter(|&f| f > lo && f < hi).collect();
    nodes.push(lo);
    nodes.push(hi);
    nodes.sort_by(f64::total_cmp);
    nodes.dedup();
    let (ax, ay): (Vec<f64>, Vec<f64>) = a.iter().cloned().unzip();
    let (bx, by): (Vec<f64>, Vec<f64>) = b.iter().cloned().unzip();
    let d: Vec<f64> = nodes.iter().map(|&f| interp(&ax, &ay, f) - interp(&bx, &by, f)).collect();
    let mut area = 0.0;
    for i in 0..nodes.len() - 1 {
        let w = nodes[i + 1] - nodes[i];
        let (d0, d1) = (d[i].abs(), d[i + 1].abs());
        area += if d[i] * d[i + 1] < 0.0 {
            0.5 * w * (d0 * d0 + d1 * d1) / (d0 + d1)
        } else {
            0.5 * w * (d0 + d1)
        };
    }
    Ok(area / (hi - lo))
}
