//! Thermal-mixing dynamic nuclear polarization toolkit.
//!
//! The crate is organised bottom-up:
//!
//! * [`constants`], [`nucleus`] and [`line`] hold the physical constants, nuclear
//!   species and the discretised EPR line with its electron polarization profiles.
//! * [`polarization`] converts between nuclear polarization and spin temperature
//!   and evaluates the two-electron cross-effect pair formula.
//! * [`tm_model`] evaluates the nuclear polarization integral over an electron
//!   profile, builds the three canonical irradiated line shapes and solves the
//!   two-temperature (Borghini) stationarity condition.
//! * [`packet_sim`] is the spin-packet rate-equation model with lattice relaxation,
//!   microwave saturation and spectral diffusion, plus the regime classifier.
//! * [`phase_map`] sweeps concentration and temperature and locates the optimum.
//! * [`analysis`] is the experimental signal-reduction pipeline.
//!
//! Frequencies are angular (rad/s) everywhere inside the crate. Conversions from
//! Hz/GHz happen at the edges, see [`units`].

pub mod analysis;
pub mod constants;
pub mod error;
pub mod line;
pub mod nucleus;
pub mod packet_sim;
pub mod phase_map;
pub mod polarization;
pub mod tm_model;
mod tridiag;
pub mod units;

pub use constants::PhysConstants;
pub use error::{Error, Result};
pub use line::{make_epr_line, thermal_electron_profile, ElectronProfile, EprLine, LineShape};
pub use nucleus::NucleusSpec;
pub use packet_sim::{
    ExcitationShape, LatticeConfig, PacketModel, PacketState, Regime, RegimeThresholds,
    RegimeVerdict,
};
pub use phase_map::{Optimum, PhaseCell, PhaseGrid};
pub use polarization::SpinTempResult;
pub use tm_model::TmState;
