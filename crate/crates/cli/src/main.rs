//! `tmdnp`: simulate DNP electron profiles, map regimes over concentration
//! and temperature, and reduce experimental build-up data.

mod commands;
mod config;
mod error;
mod io;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::config::GridSpec;
use crate::error::CliResult;

#[derive(Parser)]
#[command(name = "tmdnp", version, about = "Thermal-mixing DNP simulation and analysis")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Electron-profile simulations.
    #[command(subcommand)]
    Sim(SimCommand),
    /// Regime map over a concentration × temperature grid.
    Phase(PhaseArgs),
    /// Data reduction.
    #[command(subcommand)]
    Analyze(AnalyzeCommand),
    /// Generate a synthetic build-up series.
    Synth(commands::synth::SynthArgs),
}

#[derive(Subcommand)]
enum SimCommand {
    /// Sketch one of the three irradiated line shapes and its P_n.
    Regimes(commands::sim::RegimesArgs),
    /// Steady state of the packet model at one (c, T).
    Steady(commands::sim::SteadyArgs),
}

#[derive(Args)]
pub struct PhaseArgs {
    /// Concentration grid LO:HI:N in mM.
    #[arg(long)]
    c_grid: Option<GridSpec>,
    /// Temperature grid LO:HI:N in K.
    #[arg(long)]
    t_grid: Option<GridSpec>,
    /// Run configuration; the embedded default preset when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Nucleus name from the config table.
    #[arg(long)]
    nucleus: Option<String>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Subcommand)]
enum AnalyzeCommand {
    /// Fit the build-up of a scan directory or amplitude CSV.
    Buildup(commands::analyze::BuildupArgs),
    /// Spin temperature from a build-up result and an off-resonance reference.
    Spintemp(commands::analyze::SpintempArgs),
    /// Compare the shapes of two microwave sweeps.
    Sweep(commands::analyze::SweepArgs),
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Sim(SimCommand::Regimes(a)) => commands::sim::regimes(a),
        Command::Sim(SimCommand::Steady(a)) => commands::sim::steady(a),
        Command::Phase(a) => commands::phase::run(a),
        Command::Analyze(AnalyzeCommand::Buildup(a)) => commands::analyze::buildup(a),
        Command::Analyze(AnalyzeCommand::Spintemp(a)) => commands::analyze::spintemp(a),
        Command::Analyze(AnalyzeCommand::Sweep(a)) => commands::analyze::sweep(a),
        Command::Synth(a) => commands::synth::run(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            e.report();
            ExitCode::from(e.exit_code())
        }
    }
}
