//! Lorentzian-plus-constant peak fitting.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::lsq::{levenberg_marquardt, LmOptions};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PeakFit {
    pub height: f64,
    pub center: f64,
    pub hwhm: f64,
    pub offset: f64,
    pub iterations: usize,
}

const MIN_WINDOW_POINTS: usize = 5;

/// Fits h/(1 + ((f − f₀)/γ)²) + b to the points of `spectrum` whose
/// frequency lies in `window` and returns the fitted parameters.
pub fn fit_peak_amplitude(freq: &[f64], spectrum: &[f64], window: (f64, f64)) -> Result<PeakFit> {
    if freq.len() != spectrum.len() {
        return Err(Error::invalid("frequency axis and spectrum differ in length"));
    }
    let (lo, hi) = (window.0.min(window.1), window.0.max(window.1));
    let idx: Vec<usize> = (0..freq.len()).filter(|&i| freq[i] >= lo && freq[i] <= hi).collect();
    if idx.len() < MIN_WINDOW_POINTS {
        return Err(Error::fit(format!("window holds {} points, need {MIN_WINDOW_POINTS}", idx.len()), 0, f64::NAN));
    }
    let f: Vec<f64> = idx.iter().map(|&i| freq[i]).collect();
    let y: Vec<f64> = idx.iter().map(|&i| spectrum[i]).collect();
    let m = f.len();

    let base0 = 0.5 * (y[0] + y[m - 1]);
    let (imax, ymax) = y.iter().enumerate().fold((0, base0), |b, (i, &v)| if (v - base0).abs() > (b.1 - base0).abs() { (i, v) } else { b });
    let height0 = ymax - base0;
    let df = (f[m - 1] - f[0]) / (m - 1) as f64;
    let above = y.iter().filter(|&&v| (v - base0) / height0 > 0.5).count().max(1);
    let scale = (above as f64 * df * 0.5).max(df);
    let center0 = f[imax];
    let x: Vec<f64> = f.iter().map(|v| (v - center0) / scale).collect();
    let yscale = height0.abs().max(y.iter().fold(0.0_f64, |a, v| a.max(v.abs()))).max(f64::MIN_POSITIVE);
    let yn: Vec<f64> = y.iter().map(|v| v / yscale).collect();

    // parameters: height, centre, width, offset (scaled units)
    let residual = |p: &DVector<f64>| {
        DVector::from_iterator(m, x.iter().zip(&yn).map(|(&x, &y)| {
            let u = (x - p[1]) / p[2];
            p[0] / (1.0 + u * u) + p[3] - y
        }))
    };
    let jacobian = |p: &DVector<f64>| {
        let mut j = DMatrix::zeros(m, 4);
        for (i, &xi) in x.iter().enumerate() {
            let u = (xi - p[1]) / p[2];
            let l = 1.0 / (1.0 + u * u);
            j[(i, 0)] = l;
            j[(i, 1)] = p[0] * 2.0 * u * l * l / p[2];
            j[(i, 2)] = p[0] * 2.0 * u * u * l * l / p[2];
            j[(i, 3)] = 1.0;
        }
        j
    };
    let x0 = DVector::from_vec(vec![height0 / yscale, 0.0, 1.0, base0 / yscale]);
    let rep = levenberg_marquardt(residual, jacobian, x0, LmOptions { max_iter: 500, ..LmOptions::default() })?;
    let p = &rep.params;
    if !rep.converged || p[2] == 0.0 {
        return Err(Error::fit("Lorentzian fit did not converge", rep.iterations, rep.ssr));
    }
    Ok(PeakFit {
        height: p[0] * yscale,
        center: center0 + p[1] * scale,
        hwhm: p[2].abs() * scale,
        offset: p[3] * yscale,
        iterations: rep.iterations,
    })
}
