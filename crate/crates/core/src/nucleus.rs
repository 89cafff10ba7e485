use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A spin-1/2 nuclear species at the working field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NucleusSpec {
    pub name: String,
    /// Larmor frequency ν_n in Hz.
    pub larmor_freq: f64,
}

impl NucleusSpec {
    pub fn new(name: impl Into<String>, larmor_freq: f64) -> Result<Self> {
        if !(larmor_freq > 0.0) || !larmor_freq.is_finite() {
            return Err(Error::invalid(format!("Larmor frequency must be positive, got {larmor_freq}")));
        }
        Ok(Self { name: name.into(), larmor_freq })
    }

    /// ¹H at 6.7 T (285.3 MHz).
    pub fn proton() -> Self {
        Self { name: "1H".into(), larmor_freq: 285.3e6 }
    }

    /// ¹³C at 6.7 T (71.3 MHz).
    pub fn carbon13() -> Self {
        Self { name: "13C".into(), larmor_freq: 71.3e6 }
    }

    /// Angular Larmor frequency ω_n = 2πν_n.
    pub fn omega(&self) -> f64 {
        2.0 * PI * self.larmor_freq
    }
}
