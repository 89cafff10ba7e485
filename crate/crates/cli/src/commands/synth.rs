use std::path::PathBuf;

use clap::{Args, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;
use tmdnp_core::analysis::synth::{synth_buildup_points, synth_series, SynthParams};
use tmdnp_core::analysis::ScanMeta;

use super::analyze::Manifest;
use crate::config::RunConfig;
use crate::error::{CliError, CliResult};
use crate::io::{csv_text, num, sidecar, to_json, write_atomic, write_json};

#[derive(Clone, Copy, ValueEnum)]
pub enum SynthFormat {
    /// A directory of raw FIDs with a manifest.
    Scans,
    /// A single `t_s,amplitude` CSV.
    Amplitudes,
}

#[derive(Args)]
pub struct SynthArgs {
    #[arg(long, value_enum, default_value = "scans")]
    format: SynthFormat,
    #[arg(long, default_value_t = 10.0, allow_hyphen_values = true)]
    s_inf: f64,
    /// Build-up time constant, s.
    #[arg(long, default_value_t = 600.0)]
    tau: f64,
    /// Noise relative to |S_inf|.
    #[arg(long, default_value_t = 0.01)]
    noise: f64,
    /// Seconds between scans.
    #[arg(long, default_value_t = 5.0)]
    cadence: f64,
    /// Series length, s.
    #[arg(long, default_value_t = 5400.0)]
    duration: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    nucleus: Option<String>,
    #[arg(long, default_value_t = 1.5)]
    t_bath: f64,
    #[arg(long, default_value_t = 40.0)]
    radical_mm: f64,
    #[arg(long)]
    mw_ghz: Option<f64>,
    #[arg(long, default_value_t = 5.0)]
    flip_deg: f64,
    #[arg(long, default_value_t = 512)]
    fid_points: usize,
    #[arg(long, default_value_t = 20.0)]
    dwell_us: f64,
    #[arg(long, default_value_t = 1000.0, allow_hyphen_values = true)]
    offset_hz: f64,
    /// FID decay constant, ms.
    #[arg(long, default_value_t = 2.0)]
    t2_ms: f64,
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory (scans) or CSV file (amplitudes).
    #[arg(long)]
    out: PathBuf,
}

pub fn run(args: SynthArgs) -> CliResult<()> {
    let cfg = RunConfig::load(args.config.as_deref())?;
    let nucleus = cfg.nucleus_spec(args.nucleus.as_deref())?;
    let params = SynthParams {
        s_inf: args.s_inf,
        tau: args.tau,
        noise: args.noise,
        cadence: args.cadence,
        duration: args.duration,
        fid_points: args.fid_points,
        dwell: args.dwell_us * 1e-6,
        offset_hz: args.offset_hz,
        t2: args.t2_ms * 1e-3,
    };
    params.validate()?;
    if !(args.t_bath > 0.0) {
        return Err(CliError::usage("--t-bath must be positive"));
    }
    let mw_ghz = args.mw_ghz.unwrap_or(cfg.lattice.mw_ghz);
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let echo = json!({ "params": params, "seed": args.seed, "nucleus": nucleus, "t_bath_k": args.t_bath });

    match args.format {
        SynthFormat::Amplitudes => {
            let pts = synth_buildup_points(&params, &mut rng)?;
            let rows = pts.iter().map(|(t, s)| format!("{},{}", num(*t), num(*s)));
            write_atomic(&args.out, csv_text("t_s,amplitude", rows).as_bytes())?;
            write_json(&sidecar(&args.out, ".synth.json"), &echo)?;
        }
        SynthFormat::Scans => {
            std::fs::create_dir_all(&args.out).map_err(|e| CliError::io(&args.out, e))?;
            let meta = ScanMeta {
                nucleus: nucleus.clone(),
                t_bath: args.t_bath,
                radical_mm: args.radical_mm,
                mw_ghz,
                flip_deg: args.flip_deg,
                timestamp: 0.0,
            };
            let scans = synth_series(&params, &meta, &mut rng)?;
            for (k, scan) in scans.iter().enumerate() {
                let rows = scan
                    .samples()
                    .iter()
                    .enumerate()
                    .map(|(i, c)| format!("{i},{},{}", num(c.re), num(c.im)));
                let path = args.out.join(format!("scan_{:05}.csv", k + 1));
                write_atomic(&path, csv_text("index,re,im", rows).as_bytes())?;
            }
            let manifest = Manifest {
                nucleus: nucleus.name.clone(),
                larmor_mhz: nucleus.larmor_freq / 1e6,
                t_bath_k: args.t_bath,
                radical_mm: args.radical_mm,
                mw_ghz,
                flip_deg: args.flip_deg,
                repetition_s: args.cadence,
                dwell_us: args.dwell_us,
            };
            write_json(&args.out.join("manifest.json"), &manifest)?;
            write_json(&args.out.join("synth.json"), &echo)?;
        }
    }
    print!("{}", to_json(&echo));
    Ok(())
}
