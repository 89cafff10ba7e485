//! Tridiagonal and bordered-tridiagonal linear solves.

use crate::error::{Error, Result};

/// Tridiagonal matrix stored by diagonals. `lower[i]` couples row i+1 to
/// column i, `upper[i]` couples row i to column i+1.
#[derive(Debug, Clone)]
pub(crate) struct Tridiag {
    pub lower: Vec<f64>,
    pub diag: Vec<f64>,
    pub upper: Vec<f64>,
}

impl Tridiag {
    pub fn zeros(n: usize) -> Self {
        Self { lower: vec![0.0; n.saturating_sub(1)], diag: vec![0.0; n], upper: vec![0.0; n.saturating_sub(1)] }
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    /// Thomas algorithm. Fails on a vanishing pivot.
    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        let n = self.len();
        debug_assert_eq!(rhs.len(), n);
        if n == 0 {
            return Ok(Vec::new());
        }
        let mut c = vec![0.0; n];
        let mut d = vec![0.0; n];
        let mut pivot = self.diag[0];
        check_pivot(pivot, 0)?;
        if n > 1 {
            c[0] = self.upper[0] / pivot;
        }
        d[0] = rhs[0] / pivot;
        for i in 1..n {
            pivot = self.diag[i] - self.lower[i - 1] * c[i - 1];
            check_pivot(pivot, i)?;
            if i + 1 < n {
                c[i] = self.upper[i] / pivot;
            }
            d[i] = (rhs[i] - self.lower[i - 1] * d[i - 1]) / pivot;
        }
        for i in (0..n - 1).rev() {
            d[i] -= c[i] * d[i + 1];
        }
        Ok(d)
    }

    #[cfg(test)]
    pub fn mul(&self, x: &[f64]) -> Vec<f64> {
        let n = self.len();
        (0..n)
            .map(|i| {
                let mut v = self.diag[i] * x[i];
                if i > 0 {
                    v += self.lower[i - 1] * x[i - 1];
                }
                if i + 1 < n {
                    v += self.upper[i] * x[i + 1];
                }
                v
            })
            .collect()
    }
}

fn check_pivot(p: f64, row: usize) -> Result<()> {
    if p == 0.0 || !p.is_finite() {
        return Err(Error::Numeric(format!("singular tridiagonal system at row {row}")));
    }
    Ok(())
}

/// Solves [A u; vᵀ d] [x; z] = [r; rz] by block elimination on the corner.
pub(crate) fn solve_bordered(a: &Tridiag, u: &[f64], v: &[f64], d: f64, r: &[f64], rz: f64) -> Result<(Vec<f64>, f64)> {
    let x1 = a.solve(r)?;
    let x2 = a.solve(u)?;
    let schur = d - dot(v, &x2);
    if schur == 0.0 || !schur.is_finite() {
        return Err(Error::Numeric("singular bordered system".into()));
    }
    let z = (rz - dot(v, &x1)) / schur;
    let x = x1.iter().zip(&x2).map(|(a, b)| a - z * b).collect();
    Ok((x, z))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
