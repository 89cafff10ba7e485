//! Concentration × temperature sweeps of the packet model.

use std::collections::BTreeSet;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::line::{ElectronProfile, EprLine};
use crate::nucleus::NucleusSpec;
use crate::packet_sim::{build_model, classify_regime, steady_state, LatticeConfig, Regime, RegimeThresholds, RegimeVerdict};
use crate::polarization::spin_temperature_from_polarization;
use crate::tm_model::nuclear_polarization;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum CellOutcome {
    Solved {
        verdict: RegimeVerdict,
        p_n: f64,
        /// Spin temperature implied by `p_n`, K. Absent under breakdown;
        /// infinite when `p_n` vanishes.
        t_s: Option<f64>,
    },
    Failed {
        error: String,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseCell {
    pub c_mm: f64,
    pub t_k: f64,
    pub eta: f64,
    pub outcome: CellOutcome,
}

impl PhaseCell {
    pub fn regime(&self) -> Option<Regime> {
        match &self.outcome {
            CellOutcome::Solved { verdict, .. } => Some(verdict.regime),
            CellOutcome::Failed { .. } => None,
        }
    }

    pub fn p_n(&self) -> Option<f64> {
        match &self.outcome {
            CellOutcome::Solved { p_n, .. } => Some(*p_n),
            CellOutcome::Failed { .. } => None,
        }
    }

    pub fn t_s(&self) -> Option<f64> {
        match &self.outcome {
            CellOutcome::Solved { t_s, .. } => *t_s,
            CellOutcome::Failed { .. } => None,
        }
    }
}

/// Sweep result. Cells are stored concentration-major:
/// index = i_c · len(T) + i_T.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseGrid {
    pub c_values: Vec<f64>,
    pub t_values: Vec<f64>,
    pub cells: Vec<PhaseCell>,
}

impl PhaseGrid {
    pub fn cell(&self, ic: usize, it: usize) -> &PhaseCell {
        &self.cells[ic * self.t_values.len() + it]
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.c_values.len(), self.t_values.len())
    }

    /// Cells with an edge neighbour on the other side of the TM/breakdown
    /// divide, scanning rows (fixed T) first.
    pub fn boundary_cells(&self) -> BTreeSet<(usize, usize)> {
        self.boundary_scan(false)
    }

    /// Same set as [`boundary_cells`](Self::boundary_cells), scanning columns.
    pub fn boundary_cells_by_column(&self) -> BTreeSet<(usize, usize)> {
        self.boundary_scan(true)
    }

    fn boundary_scan(&self, by_column: bool) -> BTreeSet<(usize, usize)> {
        let (nc, nt) = self.shape();
        let class = |ic: usize, it: usize| self.cell(ic, it).regime().map(Regime::is_tm);
        let mut set = BTreeSet::new();
        let mut mark_pair = |a: (usize, usize), b: (usize, usize)| {
            if let (Some(x), Some(y)) = (class(a.0, a.1), class(b.0, b.1)) {
                if x != y {
                    set.insert(a);
                    set.insert(b);
                }
            }
        };
        let (outer, inner) = if by_column { (nc, nt) } else { (nt, nc) };
        for o in 0..outer {
            for i in 0..inner.saturating_sub(1) {
                let (a, b) = if by_column { ((o, i), (o, i + 1)) } else { ((i, o), (i + 1, o)) };
                mark_pair(a, b);
            }
        }
        for o in 0..inner {
            for i in 0..outer.saturating_sub(1) {
                let (a, b) = if by_column { ((i, o), (i + 1, o)) } else { ((o, i), (o, i + 1)) };
                mark_pair(a, b);
            }
        }
        set
    }
}

/// Maximum-|P_n| cell and its distance to the TM/breakdown boundary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Optimum {
    pub c_mm: f64,
    pub t_k: f64,
    pub p_n: f64,
    pub regime: Regime,
    /// Chebyshev distance in cells to the nearest boundary cell, if the grid
    /// has a boundary at all.
    pub boundary_distance_cells: Option<usize>,
}

/// Solves, classifies and evaluates a single (c, T) point.
pub fn evaluate_cell(
    line: &Arc<EprLine>,
    config: &LatticeConfig,
    nucleus: &NucleusSpec,
    thresholds: &RegimeThresholds,
) -> Result<(RegimeVerdict, f64, Option<f64>, ElectronProfile)> {
    let model = build_model(line, config)?;
    let ss = steady_state(&model)?;
    let verdict = classify_regime(&model, &ss, thresholds);
    let profile = ElectronProfile::new(Arc::clone(line), ss.p)?;
    let p_n = nuclear_polarization(&profile, nucleus)?;
    let t_s = if verdict.regime.is_tm() {
        match spin_temperature_from_polarization(p_n, nucleus) {
            Ok(t) => Some(t),
            Err(Error::InfiniteTemperature) => Some(f64::INFINITY),
            Err(e) => return Err(e),
        }
    } else {
        None
    };
    Ok((verdict, p_n, t_s, profile))
}

fn check_grid(name: &str, values: &[f64]) -> Result<()> {
    if values.is_empty() {
        return Err(Error::invalid(format!("{name} grid is empty")));
    }
    if values.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
        return Err(Error::invalid(format!("{name} grid must hold positive finite values")));
    }
    if values.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid(format!("{name} grid must be strictly increasing")));
    }
    Ok(())
}

/// Evaluates every (c, T) cell in parallel. A cell that fails to solve is
/// recorded as [`CellOutcome::Failed`] and the sweep continues.
pub fn sweep(
    line: &Arc<EprLine>,
    base: &LatticeConfig,
    c_grid: &[f64],
    t_grid: &[f64],
    nucleus: &NucleusSpec,
    thresholds: &RegimeThresholds,
) -> Result<PhaseGrid> {
    check_grid("concentration", c_grid)?;
    check_grid("temperature", t_grid)?;
    base.validate()?;
    let nt = t_grid.len();
    let cells = (0..c_grid.len() * nt)
        .into_par_iter()
        .map(|idx| {
            let (c, t) = (c_grid[idx / nt], t_grid[idx % nt]);
            let cfg = LatticeConfig { concentration: c, temperature: t, ..base.clone() };
            let outcome = match evaluate_cell(line, &cfg, nucleus, thresholds) {
                Ok((verdict, p_n, t_s, _)) => CellOutcome::Solved { verdict, p_n, t_s },
                Err(e) => CellOutcome::Failed { error: e.to_string() },
            };
            PhaseCell { c_mm: c, t_k: t, eta: cfg.eta(), outcome }
        })
        .collect();
    Ok(PhaseGrid { c_values: c_grid.to_vec(), t_values: t_grid.to_vec(), cells })
}

/// Cell of largest |P_n|; ties go to the lower concentration, then the
/// lower temperature.
pub fn find_optimum(grid: &PhaseGrid) -> Result<Optimum> {
    let (nc, nt) = grid.shape();
    let mut best: Option<(usize, usize, f64, Regime)> = None;
    for ic in 0..nc {
        for it in 0..nt {
            let cell = grid.cell(ic, it);
            if let (Some(p), Some(r)) = (cell.p_n(), cell.regime()) {
                if best.is_none_or(|(_, _, b, _)| p.abs() > b.abs()) {
                    best = Some((ic, it, p, r));
                }
            }
        }
    }
    let (ic, it, p_n, regime) = best.ok_or(Error::NoData)?;
    let boundary = grid.boundary_cells();
    let boundary_distance_cells = boundary
        .iter()
        .map(|&(bc, bt)| bc.abs_diff(ic).max(bt.abs_diff(it)))
        .min();
    Ok(Optimum { c_mm: grid.c_values[ic], t_k: grid.t_values[it], p_n, regime, boundary_distance_cells })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::packet_sim::RegimeMetrics;

    fn solved(c: f64, t: f64, regime: Regime, p_n: f64) -> PhaseCell {
        let verdict = RegimeVerdict {
            regime,
            eta: 1.0,
            metrics: RegimeMetrics { hole_localization: 0.0, reversal: false, tanh_fit_residual: 0.0 },
        };
        PhaseCell { c_mm: c, t_k: t, eta: 1.0, outcome: CellOutcome::Solved { verdict, p_n, t_s: None } }
    }

    fn grid_from(regimes: &[&[Regime]], p: impl Fn(usize, usize) -> f64) -> PhaseGrid {
        let nc = regimes.len();
        let nt = regimes[0].len();
        let c_values: Vec<f64> = (0..nc).map(|i| 10.0 + i as f64).collect();
        let t_values: Vec<f64> = (0..nt).map(|i| 1.0 + i as f64).collect();
        let mut cells = Vec::new();
        for ic in 0..nc {
            for it in 0..nt {
                cells.push(solved(c_values[ic], t_values[it], regimes[ic][it], p(ic, it)));
            }
        }
        PhaseGrid { c_values, t_values, cells }
    }

    use Regime::{Breakdown as B, HomogeneousTM as H, InhomogeneousTM as I};

    #[test]
    fn single_nonzero_cell_is_the_optimum() {
        let g = grid_from(&[&[B, B, B], &[I, I, B], &[H, I, B]], |ic, it| if (ic, it) == (1, 1) { -0.2 } else { 0.0 });
        let o = find_optimum(&g).unwrap();
        assert_eq!((o.c_mm, o.t_k, o.p_n), (11.0, 2.0, -0.2));
        assert_eq!(o.boundary_distance_cells, Some(0));
    }

    #[test]
    fn ties_prefer_low_concentration_then_low_temperature() {
        let g = grid_from(&[&[H, H], &[H, H]], |_, _| 0.1);
        let o = find_optimum(&g).unwrap();
        assert_eq!((o.c_mm, o.t_k), (10.0, 1.0));
        assert_eq!(o.boundary_distance_cells, None);
    }

    #[test]
    fn all_failed_grid_has_no_optimum() {
        let mut g = grid_from(&[&[H]], |_, _| 0.1);
        g.cells[0].outcome = CellOutcome::Failed { error: "x".into() };
        assert_eq!(find_optimum(&g), Err(Error::NoData));
    }

    #[test]
    fn boundary_is_scan_order_independent() {
        let g = grid_from(
            &[&[B, B, B, B], &[I, B, B, B], &[I, I, B, B], &[H, I, I, B], &[H, H, I, I]],
            |_, _| 0.0,
        );
        let rows = g.boundary_cells();
        assert_eq!(rows, g.boundary_cells_by_column());
        assert!(rows.contains(&(1, 0)) && rows.contains(&(0, 0)));
        assert!(!rows.contains(&(4, 0)));
    }

    #[test]
    fn grid_validation() {
        let line = Arc::new(crate::line::make_epr_line(crate::line::LineShape::Rectangular, 1.2e12, 3e9, 51).unwrap());
        let base = LatticeConfig { omega_mw: 1.2e12, ..LatticeConfig::default() };
        let n = NucleusSpec::carbon13();
        let th = RegimeThresholds::default();
        assert!(sweep(&line, &base, &[], &[1.0], &n, &th).is_err());
        assert!(sweep(&line, &base, &[2.0, 1.0], &[1.0], &n, &th).is_err());
        assert!(sweep(&line, &base, &[1.0], &[0.0], &n, &th).is_err());
    }
}
