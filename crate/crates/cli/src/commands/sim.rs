use std::f64::consts::PI;
use std::path::PathBuf;
use std::sync::Arc;

use clap::{Args, ValueEnum};
use serde_json::json;
use tmdnp_core::line::line_from_ghz;
use tmdnp_core::phase_map::evaluate_cell;
use tmdnp_core::tm_model::{
    borghini_steady_state, nuclear_polarization, profile_holeburn, profile_homogeneous, profile_inhomogeneous,
};
use tmdnp_core::{thermal_electron_profile, ElectronProfile, LatticeConfig, LineShape, TmState};

use super::phase::phase_row;
use crate::config::RunConfig;
use crate::error::{CliError, CliResult};
use crate::io::{csv_text, num, sidecar, to_json, write_atomic};

#[derive(Clone, Copy, ValueEnum)]
pub enum RegimeArg {
    Homo,
    Inhomo,
    Hole,
}

/// `SHAPE:WIDTH_GHZ`, e.g. `rect:0.6`.
#[derive(Clone, Copy, Debug)]
pub struct LineArg {
    shape: LineShape,
    width_ghz: f64,
}

impl std::str::FromStr for LineArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let (shape, width) = s.split_once(':').ok_or_else(|| format!("line '{s}' is not SHAPE:WIDTH_GHZ"))?;
        let shape: LineShape = shape.parse().map_err(|e: tmdnp_core::Error| e.to_string())?;
        let width_ghz: f64 = width.parse().map_err(|_| format!("bad width in '{s}'"))?;
        if !(width_ghz > 0.0 && width_ghz.is_finite()) {
            return Err(format!("line width must be positive in '{s}'"));
        }
        Ok(LineArg { shape, width_ghz })
    }
}

#[derive(Args)]
pub struct RegimesArgs {
    #[arg(long, value_enum)]
    regime: RegimeArg,
    /// Line shape and width, e.g. rect:0.6.
    #[arg(long)]
    line: Option<LineArg>,
    /// Line centre, GHz.
    #[arg(long)]
    center_ghz: Option<f64>,
    #[arg(long)]
    points: Option<usize>,
    /// Microwave frequency relative to the line centre, GHz.
    #[arg(long, allow_hyphen_values = true)]
    mw_offset: Option<f64>,
    #[arg(long)]
    nucleus: Option<String>,
    /// Lattice temperature, K.
    #[arg(long)]
    temperature: Option<f64>,
    /// Uniform saturation for the homogeneous sketch.
    #[arg(long, default_value_t = 0.5)]
    saturation: f64,
    /// Spin temperature for the inhomogeneous sketch, K; from the stationary
    /// two-temperature balance when omitted.
    #[arg(long, allow_hyphen_values = true)]
    t_s: Option<f64>,
    /// Hole FWHM, MHz; two grid steps when omitted.
    #[arg(long)]
    hole_width_mhz: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    hole_depth: f64,
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

fn profile_csv(thermal: &ElectronProfile, irradiated: &ElectronProfile, last: &str) -> String {
    let header = format!("omega_ghz,p_thermal,{last}");
    let rows = thermal
        .line()
        .grid()
        .iter()
        .zip(thermal.values())
        .zip(irradiated.values())
        .map(|((&w, &a), &b)| format!("{},{},{}", num(w / (2.0 * PI) / 1e9), num(a), num(b)));
    csv_text(&header, rows)
}

fn publish(out: &std::path::Path, csv: String, report: serde_json::Value) -> CliResult<()> {
    write_atomic(out, csv.as_bytes())?;
    let text = to_json(&report);
    write_atomic(&sidecar(out, ".report.json"), text.as_bytes())?;
    print!("{text}");
    Ok(())
}

pub fn regimes(args: RegimesArgs) -> CliResult<()> {
    let cfg = RunConfig::load(args.config.as_deref())?;
    let nucleus = cfg.nucleus_spec(args.nucleus.as_deref())?;
    let (shape, width_ghz) = args.line.map_or((cfg.line.shape, cfg.line.width_ghz), |l| (l.shape, l.width_ghz));
    let center_ghz = args.center_ghz.unwrap_or(cfg.line.center_ghz);
    let points = args.points.unwrap_or(cfg.line.points);
    let line = Arc::new(line_from_ghz(shape, center_ghz, width_ghz, points)?);
    let temperature = args.temperature.unwrap_or(cfg.lattice.temperature_k);
    if !(temperature > 0.0) {
        return Err(CliError::usage("--temperature must be positive"));
    }
    let mw_ghz = center_ghz + args.mw_offset.unwrap_or(cfg.lattice.mw_ghz - cfg.line.center_ghz);
    let omega_mw = 2.0 * PI * mw_ghz * 1e9;
    let thermal = thermal_electron_profile(&line, temperature)?;

    let mut params = json!({
        "line": { "shape": shape, "center_ghz": center_ghz, "width_ghz": width_ghz, "points": points },
        "temperature_k": temperature,
        "mw_ghz": mw_ghz,
        "nucleus": nucleus,
    });
    let mut t_s_report = None;
    let (name, irradiated) = match args.regime {
        RegimeArg::Homo => {
            params["saturation"] = json!(args.saturation);
            ("homo", profile_homogeneous(&line, temperature, args.saturation)?)
        }
        RegimeArg::Inhomo => {
            let tm = match args.t_s {
                Some(t_s) => TmState::new(t_s, omega_mw)?,
                None => borghini_steady_state(&line, omega_mw, temperature)?,
            };
            t_s_report = Some(tm.spin_temperature().ok());
            ("inhomo", profile_inhomogeneous(&line, &tm)?)
        }
        RegimeArg::Hole => {
            let width = args.hole_width_mhz.map_or(2.0 * line.spacing(), |m| 2.0 * PI * m * 1e6);
            params["hole_width_mhz"] = json!(width / (2.0 * PI) / 1e6);
            params["hole_depth"] = json!(args.hole_depth);
            ("hole", profile_holeburn(&line, temperature, omega_mw, width, args.hole_depth)?)
        }
    };
    let p_n = nuclear_polarization(&irradiated, &nucleus)?;
    let mut report = json!({ "regime": name, "P_n": p_n, "parameters": params });
    if let Some(t_s) = t_s_report {
        report["T_s_K"] = json!(t_s);
    }
    publish(&args.out, profile_csv(&thermal, &irradiated, "p_irradiated"), report)
}

#[derive(Args)]
pub struct SteadyArgs {
    /// Radical concentration, mM.
    #[arg(long)]
    c: f64,
    /// Lattice temperature, K.
    #[arg(long)]
    t: f64,
    #[arg(long)]
    nucleus: Option<String>,
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

pub fn steady(args: SteadyArgs) -> CliResult<()> {
    let cfg = RunConfig::load(args.config.as_deref())?;
    let nucleus = cfg.nucleus_spec(args.nucleus.as_deref())?;
    let line = cfg.line()?;
    let lattice = LatticeConfig { concentration: args.c, temperature: args.t, ..cfg.lattice() };
    let (verdict, p_n, t_s, profile) = evaluate_cell(&line, &lattice, &nucleus, &cfg.thresholds)?;
    let thermal = thermal_electron_profile(&line, args.t)?;
    let report = json!({
        "c_mM": args.c,
        "T_K": args.t,
        "eta": verdict.eta,
        "regime": verdict.regime.tag(),
        "metrics": verdict.metrics,
        "P_n": p_n,
        "T_s_K": t_s,
        "phase_row": phase_row(args.c, args.t, verdict.eta, Some(verdict.regime), Some(p_n), t_s),
        "config": cfg,
    });
    publish(&args.out, profile_csv(&thermal, &profile, "p_steady"), report)
}
