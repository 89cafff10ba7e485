use serde_json::json;
use tmdnp_core::phase_map::{find_optimum, sweep, CellOutcome, PhaseCell};
use tmdnp_core::Regime;

use crate::config::RunConfig;
use crate::error::CliResult;
use crate::io::{csv_text, num, sidecar, to_json, write_atomic, write_json};
use crate::PhaseArgs;

pub const PHASE_HEADER: &str = "c_mM,T_K,eta,regime,P_n,T_s_K";

/// One CSV row; `T_s_K` stays empty under breakdown and `P_n` on failure.
pub fn phase_row(c: f64, t: f64, eta: f64, regime: Option<Regime>, p_n: Option<f64>, t_s: Option<f64>) -> String {
    let tag = regime.map_or("ERROR", Regime::tag);
    let p = p_n.map(num).unwrap_or_default();
    let ts = t_s.map(num).unwrap_or_default();
    format!("{},{},{},{tag},{p},{ts}", num(c), num(t), num(eta))
}

fn cell_row(cell: &PhaseCell) -> String {
    phase_row(cell.c_mm, cell.t_k, cell.eta, cell.regime(), cell.p_n(), cell.t_s())
}

pub fn run(args: PhaseArgs) -> CliResult<()> {
    let cfg = RunConfig::load(args.config.as_deref())?;
    let nucleus = cfg.nucleus_spec(args.nucleus.as_deref())?;
    let c_grid = args.c_grid.unwrap_or(cfg.sweep.c_grid);
    let t_grid = args.t_grid.unwrap_or(cfg.sweep.t_grid);
    let line = cfg.line()?;
    let grid = sweep(&line, &cfg.lattice(), &c_grid.values(), &t_grid.values(), &nucleus, &cfg.thresholds)?;

    write_atomic(&args.out, csv_text(PHASE_HEADER, grid.cells.iter().map(cell_row)).as_bytes())?;

    let failures: Vec<_> = grid
        .cells
        .iter()
        .filter_map(|c| match &c.outcome {
            CellOutcome::Failed { error } => Some(json!({ "c_mM": c.c_mm, "T_K": c.t_k, "error": error })),
            CellOutcome::Solved { .. } => None,
        })
        .collect();
    let optimum = find_optimum(&grid).ok();
    let meta = json!({
        "config": cfg,
        "nucleus": nucleus,
        "c_grid": c_grid,
        "t_grid": t_grid,
        "optimum": optimum,
        "failed_cells": failures,
    });
    write_json(&sidecar(&args.out, ".meta.json"), &meta)?;
    print!("{}", to_json(&json!({ "cells": grid.cells.len(), "optimum": optimum, "out": args.out })));
    Ok(())
}
