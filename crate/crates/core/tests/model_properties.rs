use std::f64::consts::PI;
use std::sync::Arc;

use proptest::prelude::*;
use tmdnp_core::packet_sim::{build_model, classify_regime, steady_state};
use tmdnp_core::phase_map::sweep;
use tmdnp_core::tm_model::{nuclear_polarization, profile_inhomogeneous, borghini_steady_state};
use tmdnp_core::{make_epr_line, EprLine, ElectronProfile, LatticeConfig, LineShape, NucleusSpec, Regime, RegimeThresholds, TmState};

fn rect(n: usize) -> Arc<EprLine> {
    Arc::new(make_epr_line(LineShape::Rectangular, 2.0 * PI * 188.15e9, 2.0 * PI * 0.6e9, n).unwrap())
}

fn calibrated(line: &EprLine) -> LatticeConfig {
    let cfg = LatticeConfig {
        t1_exponent: 2.0,
        gamma_exponent: 8.0,
        mw_width: Some(2.0 * PI * 30e6),
        omega_mw: 2.0 * PI * 188.0e9,
        ..LatticeConfig::default()
    };
    assert!(line.contains(cfg.omega_mw));
    cfg
}

#[test]
fn grid_refinement_barely_moves_tanh_profile_polarization() {
    let coarse = rect(201);
    let fine = rect(2001);
    for nucleus in [NucleusSpec::carbon13(), NucleusSpec::proton()] {
        for t_s in [0.004, -0.01, 0.05] {
            let tm = TmState::new(t_s, 2.0 * PI * 188.0e9).unwrap();
            let a = nuclear_polarization(&profile_inhomogeneous(&coarse, &tm).unwrap(), &nucleus).unwrap();
            let b = nuclear_polarization(&profile_inhomogeneous(&fine, &tm).unwrap(), &nucleus).unwrap();
            assert!((a - b).abs() < 1e-3, "{a} vs {b}");
        }
    }
}

#[test]
fn spin_temperature_grows_with_lattice_temperature() {
    let line = rect(201);
    let cold = borghini_steady_state(&line, line.grid()[40], 1.5).unwrap();
    let warm = borghini_steady_state(&line, line.grid()[40], 3.0).unwrap();
    assert!(warm.spin_temperature().unwrap().abs() > cold.spin_temperature().unwrap().abs());
}

#[test]
fn steady_state_is_nearly_linear_in_thermal_polarization_when_hot() {
    let line = rect(201);
    let base = LatticeConfig {
        t1_exponent: 0.0,
        gamma_ref: 3e4,
        mw_width: Some(10.0 * line.spacing()),
        omega_mw: line.grid()[50],
        ..LatticeConfig::default()
    };
    let solve = |t: f64| {
        let m = build_model(&line, &LatticeConfig { temperature: t, ..base.clone() }).unwrap();
        steady_state(&m).unwrap().p
    };
    let (a, b) = (solve(300.0), solve(600.0));
    let scale = a.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    for (x, y) in a.iter().zip(&b) {
        assert!((x - 2.0 * y).abs() < 1e-3 * scale);
    }
}

#[test]
fn hole_localization_never_grows_with_eta() {
    let line = rect(201);
    let mut last = f64::INFINITY;
    for k in 0..10 {
        let g = 300.0 * 10f64.powf(4.0 * k as f64 / 9.0);
        let cfg = LatticeConfig {
            temperature: 4.0,
            gamma_ref: g,
            mw_width: Some(10.0 * line.spacing()),
            omega_mw: line.grid()[50],
            ..LatticeConfig::default()
        };
        let m = build_model(&line, &cfg).unwrap();
        let v = classify_regime(&m, &steady_state(&m).unwrap(), &RegimeThresholds::default());
        assert!(v.metrics.hole_localization <= last);
        last = v.metrics.hole_localization;
    }
}

#[test]
fn phase_rows_and_columns_are_monotone() {
    let line = rect(201);
    let base = calibrated(&line);
    let c: Vec<f64> = (0..10).map(|i| 10.0 + 10.0 * i as f64).collect();
    let t: Vec<f64> = (0..10).map(|i| 1.0 + 2.0 * i as f64).collect();
    let g = sweep(&line, &base, &c, &t, &NucleusSpec::carbon13(), &RegimeThresholds::default()).unwrap();
    let rank = |r: Regime| match r {
        Regime::Breakdown => 0,
        Regime::InhomogeneousTM => 1,
        Regime::HomogeneousTM => 2,
    };
    for it in 0..t.len() {
        let row: Vec<i32> = (0..c.len()).map(|ic| rank(g.cell(ic, it).regime().unwrap())).collect();
        assert!(row.windows(2).all(|w| w[1] >= w[0]), "T = {}: {row:?}", t[it]);
    }
    for ic in 0..c.len() {
        let tm: Vec<bool> = (0..t.len()).map(|it| g.cell(ic, it).regime().unwrap().is_tm()).collect();
        assert!(tm.windows(2).all(|w| w[0] || !w[1]), "c = {}: {tm:?}", c[ic]);
    }
    assert_eq!(g.boundary_cells(), g.boundary_cells_by_column());
}

#[test]
fn sweep_is_a_pure_map() {
    let line = rect(101);
    let base = calibrated(&line);
    let n = NucleusSpec::carbon13();
    let th = RegimeThresholds::default();
    let full = sweep(&line, &base, &[40.0, 60.0, 80.0], &[1.5, 5.0], &n, &th).unwrap();
    let single = sweep(&line, &base, &[60.0], &[5.0], &n, &th).unwrap();
    assert_eq!(full.cell(1, 1), &single.cells[0]);
    let again = sweep(&line, &base, &[40.0, 60.0, 80.0], &[1.5, 5.0], &n, &th).unwrap();
    assert_eq!(full, again);
}

#[test]
fn failed_cells_are_tagged_not_fatal() {
    // a carbon line too coarse to resolve the proton shift fails every cell
    let line = Arc::new(make_epr_line(LineShape::Rectangular, 2.0 * PI * 188.15e9, 2.0 * PI * 0.6e9, 3).unwrap());
    let base = LatticeConfig { omega_mw: line.center(), ..LatticeConfig::default() };
    let g = sweep(&line, &base, &[40.0], &[1.5, 3.0], &NucleusSpec::proton(), &RegimeThresholds::default()).unwrap();
    assert!(g.cells.iter().all(|c| c.regime().is_none()));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn eq3_stays_bounded(values in prop::collection::vec(-1.0f64..=1.0, 41), shift in 1usize..45) {
        let line = Arc::new(make_epr_line(LineShape::Gaussian, 1e12, 1e9, 41).unwrap());
        let nucleus = NucleusSpec::new("x", shift as f64 * line.spacing() / (2.0 * PI)).unwrap();
        let profile = ElectronProfile::new(Arc::clone(&line), values).unwrap();
        if let Ok(p) = nuclear_polarization(&profile, &nucleus) {
            prop_assert!(p.abs() <= 1.0);
        }
    }

    #[test]
    fn steady_state_stays_in_physical_range(log_g in 0.0f64..7.0, log_w in 0.0f64..4.0, t in 1.0f64..20.0) {
        let line = rect(101);
        let cfg = LatticeConfig {
            temperature: t,
            gamma_ref: 10f64.powf(log_g),
            w_mw: 10f64.powf(log_w),
            mw_width: Some(5.0 * line.spacing()),
            omega_mw: line.grid()[30],
            ..LatticeConfig::default()
        };
        let m = build_model(&line, &cfg).unwrap();
        let ss = steady_state(&m).unwrap();
        prop_assert!(ss.p.iter().all(|v| v.abs() < 1.0));
    }
}
