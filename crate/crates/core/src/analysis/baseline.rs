//! Polynomial baseline removal.

use std::ops::Range;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

pub const MAX_BASELINE_DEGREE: usize = 6;

/// Fits a polynomial of `degree` to the points outside `exclude` and
/// subtracts it from every point.
///
/// The abscissa is the point index mapped onto [−1, 1].
pub fn baseline_correct(spectrum: &[f64], degree: usize, exclude: &[Range<usize>]) -> Result<Vec<f64>> {
    if degree > MAX_BASELINE_DEGREE {
        return Err(Error::invalid(format!("baseline degree {degree} exceeds {MAX_BASELINE_DEGREE}")));
    }
    let n = spectrum.len();
    let free: Vec<usize> = (0..n).filter(|i| !exclude.iter().any(|r| r.contains(i))).collect();
    if free.len() < degree + 1 {
        return Err(Error::Underdetermined { points: free.len(), params: degree + 1 });
    }
    let x = |i: usize| if n > 1 { 2.0 * i as f64 / (n - 1) as f64 - 1.0 } else { 0.0 };
    let design = DMatrix::from_fn(free.len(), degree + 1, |r, c| x(free[r]).powi(c as i32));
    let rhs = DVector::from_iterator(free.len(), free.iter().map(|&i| spectrum[i]));
    let coef = design
        .svd(true, true)
        .solve(&rhs, 1e-14)
        .map_err(|e| Error::Numeric(format!("baseline least squares failed: {e}")))?;
    Ok((0..n)
        .map(|i| {
            let xi = x(i);
            let fit = coef.iter().rev().fold(0.0, |acc, c| acc * xi + c);
            spectrum[i] - fit
        })
        .collect())
}

/// Subtracts a background spectrum sampled on `bg_freq`, linearly resampled
/// onto `freq`. Outside the background axis the nearest end value is used.
pub fn subtract_background(spectrum: &[f64], freq: &[f64], background: &[f64], bg_freq: &[f64]) -> Result<Vec<f64>> {
    if spectrum.len() != freq.len() || background.len() != bg_freq.len() {
        return Err(Error::invalid("spectrum and axis lengths differ"));
    }
    if bg_freq.is_empty() {
        return Err(Error::NoData);
    }
    if bg_freq.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid("background axis must be strictly increasing"));
    }
    Ok(spectrum.iter().zip(freq).map(|(&s, &f)| s - interp(bg_freq, background, f)).collect())
}

pub(crate) fn interp(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    let n = xs.len();
    if x <= xs[0] {
        return ys[0];
    }
    if x >= xs[n - 1] {
        return ys[n - 1];
    }
    let j = xs.partition_point(|&v| v <= x);
    let (x0, x1, y0, y1) = (xs[j - 1], xs[j], ys[j - 1], ys[j]);
    if x == x0 {
        return y0;
    }
    y0 + (y1 - y0) * (x - x0) / (x1 - x0)
}
