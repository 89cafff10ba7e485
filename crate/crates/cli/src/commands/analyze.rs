use std::path::{Path, PathBuf};

use clap::Args;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::json;
use tmdnp_core::analysis::{
    compare_sweeps, extract_spin_temperature, fit_buildup, scan_amplitude, ScanMeta, ScanRecord, SweepProfile,
};
use tmdnp_core::NucleusSpec;

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};
use crate::io::{read_csv, read_text, to_json, write_atomic};

pub const SCAN_HEADER: [&str; 3] = ["index", "re", "im"];
pub const AMPLITUDE_HEADER: [&str; 2] = ["t_s", "amplitude"];
pub const SWEEP_HEADER: [&str; 2] = ["mw_ghz", "signal"];

/// `manifest.json` of a scan directory. Scan `scan_%05d.csv` with index i
/// was acquired at i·repetition_s.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub nucleus: String,
    pub larmor_mhz: f64,
    pub t_bath_k: f64,
    pub radical_mm: f64,
    pub mw_ghz: f64,
    pub flip_deg: f64,
    pub repetition_s: f64,
    pub dwell_us: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AmplitudePoint {
    pub t_s: f64,
    pub amplitude: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BuildupErrors {
    #[serde(rename = "S_inf_rel")]
    pub s_inf_rel: f64,
    pub tau_rel: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BuildupReport {
    #[serde(rename = "S_inf")]
    pub s_inf: f64,
    pub tau_s: f64,
    pub errors: BuildupErrors,
    pub extrapolation_warning: bool,
    pub durbin_watson: f64,
    pub iterations: usize,
    #[serde(default)]
    pub manifest: Option<Manifest>,
    pub amplitudes: Vec<AmplitudePoint>,
}

#[derive(Args)]
pub struct BuildupArgs {
    /// Scan directory with manifest.json, or a `t_s,amplitude` CSV.
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

pub fn read_manifest(dir: &Path) -> CliResult<Manifest> {
    let path = dir.join("manifest.json");
    let text = read_text(&path)?;
    let m: Manifest = serde_json::from_str(&text).map_err(|e| CliError::io(&path, e))?;
    let checks = [("larmor_mhz", m.larmor_mhz), ("repetition_s", m.repetition_s), ("dwell_us", m.dwell_us)];
    for (name, v) in checks {
        if !(v > 0.0 && v.is_finite()) {
            return Err(CliError::io(&path, format!("{name} must be positive")));
        }
    }
    Ok(m)
}

fn scan_files(dir: &Path) -> CliResult<Vec<(u32, PathBuf)>> {
    let entries = std::fs::read_dir(dir).map_err(|e| CliError::io(dir, e))?;
    let mut scans = Vec::new();
    for entry in entries {
        let entry = entry.map_err(|e| CliError::io(dir, e))?;
        let name = entry.file_name().to_string_lossy().into_owned();
        let Some(idx) = name.strip_prefix("scan_").and_then(|s| s.strip_suffix(".csv")) else {
            continue;
        };
        if idx.len() == 5 && idx.bytes().all(|b| b.is_ascii_digit()) {
            scans.push((idx.parse::<u32>().expect("five digits"), entry.path()));
        }
    }
    if scans.is_empty() {
        return Err(CliError::io(dir, "no scan_%05d.csv files"));
    }
    scans.sort();
    Ok(scans)
}

fn read_scan(path: &Path, dwell: f64, meta: ScanMeta) -> CliResult<ScanRecord> {
    let rows = read_csv(path, &SCAN_HEADER)?;
    for (k, r) in rows.iter().enumerate() {
        if r[0] != k as f64 {
            return Err(CliError::io(path, format!("row {} has index {}, expected {k}", k + 2, r[0])));
        }
    }
    let samples = rows.iter().map(|r| Complex64::new(r[1], r[2])).collect();
    ScanRecord::new(samples, dwell, meta).map_err(|e| CliError::io(path, e))
}

fn amplitudes_from_dir(dir: &Path, cfg: &RunConfig) -> CliResult<(Manifest, Vec<AmplitudePoint>)> {
    let m = read_manifest(dir)?;
    let nucleus = NucleusSpec::new(m.nucleus.clone(), m.larmor_mhz * 1e6)?;
    let settings = cfg.pipeline();
    let mut points = Vec::new();
    for (idx, path) in scan_files(dir)? {
        let t = idx as f64 * m.repetition_s;
        let meta = ScanMeta {
            nucleus: nucleus.clone(),
            t_bath: m.t_bath_k,
            radical_mm: m.radical_mm,
            mw_ghz: m.mw_ghz,
            flip_deg: m.flip_deg,
            timestamp: t,
        };
        let scan = read_scan(&path, m.dwell_us * 1e-6, meta)?;
        let fit = scan_amplitude(&scan, &settings)?;
        points.push(AmplitudePoint { t_s: t, amplitude: fit.height });
    }
    Ok((m, points))
}

pub fn buildup(args: BuildupArgs) -> CliResult<()> {
    let cfg = RunConfig::load(args.config.as_deref())?;
    let (manifest, amplitudes) = if args.input.is_dir() {
        let (m, a) = amplitudes_from_dir(&args.input, &cfg)?;
        (Some(m), a)
    } else {
        let rows = read_csv(&args.input, &AMPLITUDE_HEADER)?;
        (None, rows.iter().map(|r| AmplitudePoint { t_s: r[0], amplitude: r[1] }).collect())
    };
    let pts: Vec<(f64, f64)> = amplitudes.iter().map(|p| (p.t_s, p.amplitude)).collect();
    let fit = fit_buildup(&pts)?;
    let report = BuildupReport {
        s_inf: fit.s_inf,
        tau_s: fit.tau,
        errors: BuildupErrors { s_inf_rel: fit.fit_rel_err.0, tau_rel: fit.fit_rel_err.1 },
        extrapolation_warning: fit.extrapolation_warning,
        durbin_watson: fit.durbin_watson,
        iterations: fit.iterations,
        manifest,
        amplitudes,
    };
    let text = to_json(&report);
    write_atomic(&args.out, text.as_bytes())?;
    print!("{text}");
    Ok(())
}

#[derive(Args)]
pub struct SpintempArgs {
    /// Build-up result under on-resonance irradiation.
    #[arg(long)]
    buildup: PathBuf,
    /// Build-up result under off-resonance irradiation (thermal reference).
    #[arg(long)]
    reference: PathBuf,
    /// Bath temperature, K.
    #[arg(long, allow_hyphen_values = true)]
    t_bath: f64,
    #[arg(long)]
    nucleus: Option<String>,
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn read_buildup(path: &Path) -> CliResult<BuildupReport> {
    serde_json::from_str(&read_text(path)?).map_err(|e| CliError::io(path, e))
}

pub fn spintemp(args: SpintempArgs) -> CliResult<()> {
    if !(args.t_bath > 0.0 && args.t_bath.is_finite()) {
        return Err(CliError::usage(format!("--t-bath must be a positive temperature, got {}", args.t_bath)));
    }
    let cfg = RunConfig::load(args.config.as_deref())?;
    let nucleus = cfg.nucleus_spec(args.nucleus.as_deref())?;
    let on = read_buildup(&args.buildup)?;
    let off = read_buildup(&args.reference)?;
    let rel = on.errors.s_inf_rel.hypot(off.errors.s_inf_rel);
    let result = extract_spin_temperature(on.s_inf, off.s_inf, &nucleus, args.t_bath, Some(rel))?;
    let text = to_json(&result);
    if let Some(out) = &args.out {
        write_atomic(out, text.as_bytes())?;
    }
    print!("{text}");
    Ok(())
}

#[derive(Args)]
pub struct SweepArgs {
    /// First sweep, CSV `mw_ghz,signal`.
    #[arg(long)]
    a: PathBuf,
    /// Second sweep, CSV `mw_ghz,signal`.
    #[arg(long)]
    b: PathBuf,
    /// Discrepancy below which the shapes count as identical.
    #[arg(long)]
    threshold: Option<f64>,
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn read_sweep(path: &Path) -> CliResult<SweepProfile> {
    let rows = read_csv(path, &SWEEP_HEADER)?;
    SweepProfile::new(rows.iter().map(|r| (r[0], r[1])).collect()).map_err(|e| CliError::io(path, e))
}

pub fn sweep(args: SweepArgs) -> CliResult<()> {
    let cfg = RunConfig::load(args.config.as_deref())?;
    let threshold = args.threshold.unwrap_or(cfg.analysis.sweep_threshold);
    if !(threshold > 0.0 && threshold.is_finite()) {
        return Err(CliError::usage("--threshold must be positive"));
    }
    let a = read_sweep(&args.a)?;
    let b = read_sweep(&args.b)?;
    let cmp = compare_sweeps(&a, &b, threshold)?;
    let report = json!({
        "discrepancy": cmp.discrepancy,
        "tm_verdict": if cmp.tm_verdict { "TM" } else { "no-TM" },
        "threshold": cmp.threshold,
        "crossing_a_ghz": cmp.crossing_a,
        "crossing_b_ghz": cmp.crossing_b,
        "aligned_a": cmp.aligned_a.points,
        "aligned_b": cmp.aligned_b.points,
    });
    let text = to_json(&report);
    if let Some(out) = &args.out {
        write_atomic(out, text.as_bytes())?;
    }
    print!("{text}");
    Ok(())
}
