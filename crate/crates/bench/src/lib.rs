//! Shared fixtures for the criterion benches.

use std::f64::consts::PI;
use std::sync::Arc;

use tmdnp_core::{make_epr_line, EprLine, LatticeConfig, LineShape};

/// The 201-point rectangular line used throughout the benches.
pub fn bench_line() -> Arc<EprLine> {
    Arc::new(make_epr_line(LineShape::Rectangular, 2.0 * PI * 188.15e9, 2.0 * PI * 0.6e9, 201).expect("valid line"))
}

pub fn bench_config(line: &EprLine, gamma_ref: f64) -> LatticeConfig {
    LatticeConfig {
        gamma_ref,
        mw_width: Some(10.0 * line.spacing()),
        omega_mw: line.grid()[50],
        ..LatticeConfig::default()
    }
}
