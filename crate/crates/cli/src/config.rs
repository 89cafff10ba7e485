//! Run configuration shared by every command.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::path::Path;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use tmdnp_core::analysis::PipelineSettings;
use tmdnp_core::line::line_from_ghz;
use tmdnp_core::{EprLine, ExcitationShape, LatticeConfig, LineShape, NucleusSpec, RegimeThresholds};

use crate::error::{CliError, CliResult};
use crate::io::read_text;

pub const DEFAULT_PRESET: &str = include_str!("../presets/paper.json");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub line: LineSection,
    pub lattice: LatticeSection,
    /// Nucleus used when a command does not name one.
    pub nucleus: String,
    /// Larmor frequencies in MHz.
    pub nuclei: BTreeMap<String, f64>,
    pub field_t: f64,
    /// Off-resonance reference irradiation, GHz.
    pub reference_ghz: f64,
    pub thresholds: RegimeThresholds,
    pub analysis: AnalysisSection,
    pub sweep: SweepSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            line: LineSection::default(),
            lattice: LatticeSection::default(),
            nucleus: "13C".into(),
            nuclei: BTreeMap::from([("13C".to_string(), 71.3), ("1H".to_string(), 285.3)]),
            field_t: 6.7,
            reference_ghz: 187.52,
            thresholds: RegimeThresholds::default(),
            analysis: AnalysisSection::default(),
            sweep: SweepSection::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LineSection {
    pub shape: LineShape,
    pub center_ghz: f64,
    pub width_ghz: f64,
    pub points: usize,
}

impl Default for LineSection {
    fn default() -> Self {
        Self { shape: LineShape::Rectangular, center_ghz: 188.15, width_ghz: 0.6, points: 201 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LatticeSection {
    pub temperature_k: f64,
    pub concentration_mm: f64,
    pub t1_ref_s: f64,
    pub t_ref_k: f64,
    pub t1_exponent: f64,
    pub gamma_ref_per_s: f64,
    pub c_ref_mm: f64,
    pub gamma_exponent: f64,
    pub w_mw_per_s: f64,
    /// Excitation HWHM in MHz; two grid steps when absent.
    pub mw_width_mhz: Option<f64>,
    pub mw_ghz: f64,
    pub excitation: ExcitationShape,
    pub dipolar_coupling: f64,
}

impl Default for LatticeSection {
    fn default() -> Self {
        let d = LatticeConfig::default();
        Self {
            temperature_k: d.temperature,
            concentration_mm: d.concentration,
            t1_ref_s: d.t1_ref,
            t_ref_k: d.t_ref,
            t1_exponent: d.t1_exponent,
            gamma_ref_per_s: d.gamma_ref,
            c_ref_mm: d.c_ref,
            gamma_exponent: d.gamma_exponent,
            w_mw_per_s: d.w_mw,
            mw_width_mhz: None,
            mw_ghz: 188.0,
            excitation: d.excitation,
            dipolar_coupling: d.dipolar_coupling,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalysisSection {
    pub baseline_degree: usize,
    /// Apodization σ in seconds; a third of the acquisition window when absent.
    pub apodization_sigma_s: Option<f64>,
    pub peak_window_hz: f64,
    pub coverage_k: f64,
    pub sweep_threshold: f64,
}

impl Default for AnalysisSection {
    fn default() -> Self {
        let p = PipelineSettings::default();
        Self {
            baseline_degree: p.baseline_degree,
            apodization_sigma_s: p.apodization_sigma,
            peak_window_hz: p.peak_window_hz,
            coverage_k: 2.0,
            sweep_threshold: 0.05,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSection {
    pub c_grid: GridSpec,
    pub t_grid: GridSpec,
}

impl Default for SweepSection {
    fn default() -> Self {
        Self { c_grid: GridSpec { lo: 10.0, hi: 100.0, n: 19 }, t_grid: GridSpec { lo: 1.0, hi: 20.0, n: 20 } }
    }
}

/// Evenly spaced grid written `LO:HI:N`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct GridSpec {
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
}

impl GridSpec {
    pub fn values(&self) -> Vec<f64> {
        if self.n == 1 {
            return vec![self.lo];
        }
        let step = (self.hi - self.lo) / (self.n - 1) as f64;
        (0..self.n).map(|i| if i + 1 == self.n { self.hi } else { self.lo + step * i as f64 }).collect()
    }
}

impl FromStr for GridSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        let [lo, hi, n] = parts.as_slice() else {
            return Err(format!("grid '{s}' is not of the form LO:HI:N"));
        };
        let lo: f64 = lo.trim().parse().map_err(|_| format!("bad lower bound in '{s}'"))?;
        let hi: f64 = hi.trim().parse().map_err(|_| format!("bad upper bound in '{s}'"))?;
        let n: usize = n.trim().parse().map_err(|_| format!("bad point count in '{s}'"))?;
        if n == 0 || !lo.is_finite() || !hi.is_finite() || lo <= 0.0 {
            return Err(format!("grid '{s}' needs N ≥ 1 and a positive finite range"));
        }
        if (n == 1 && hi != lo) || (n > 1 && hi <= lo) {
            return Err(format!("grid '{s}' must increase (N = 1 requires LO = HI)"));
        }
        Ok(GridSpec { lo, hi, n })
    }
}

impl TryFrom<String> for GridSpec {
    type Error = String;
    fn try_from(s: String) -> Result<Self, String> {
        s.parse()
    }
}

impl From<GridSpec> for String {
    fn from(g: GridSpec) -> String {
        g.to_string()
    }
}

impl fmt::Display for GridSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.lo, self.hi, self.n)
    }
}

impl RunConfig {
    pub fn preset() -> Self {
        serde_json::from_str(DEFAULT_PRESET).expect("embedded preset parses")
    }

    /// Reads a config file, or the embedded preset when `path` is `None`.
    pub fn load(path: Option<&Path>) -> CliResult<Self> {
        let cfg: RunConfig = match path {
            None => Self::preset(),
            Some(p) => {
                let text = read_text(p)?;
                serde_json::from_str(&text)
                    .map_err(|e| CliError::usage(format!("{}: invalid config: {e}", p.display())))?
            }
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> CliResult<()> {
        self.nucleus_spec(None)?;
        for (name, mhz) in &self.nuclei {
            NucleusSpec::new(name.clone(), mhz * 1e6)?;
        }
        self.line()?;
        self.lattice().validate()?;
        Ok(())
    }

    pub fn line(&self) -> CliResult<Arc<EprLine>> {
        let l = &self.line;
        Ok(Arc::new(line_from_ghz(l.shape, l.center_ghz, l.width_ghz, l.points)?))
    }

    pub fn lattice(&self) -> LatticeConfig {
        let l = &self.lattice;
        LatticeConfig {
            temperature: l.temperature_k,
            concentration: l.concentration_mm,
            t1_ref: l.t1_ref_s,
            t_ref: l.t_ref_k,
            t1_exponent: l.t1_exponent,
            gamma_ref: l.gamma_ref_per_s,
            c_ref: l.c_ref_mm,
            gamma_exponent: l.gamma_exponent,
            w_mw: l.w_mw_per_s,
            mw_width: l.mw_width_mhz.map(|m| 2.0 * PI * m * 1e6),
            omega_mw: 2.0 * PI * l.mw_ghz * 1e9,
            excitation: l.excitation,
            dipolar_coupling: l.dipolar_coupling,
        }
    }

    pub fn nucleus_spec(&self, name: Option<&str>) -> CliResult<NucleusSpec> {
        let name = name.unwrap_or(&self.nucleus);
        let mhz = self
            .nuclei
            .get(name)
            .ok_or_else(|| CliError::usage(format!("unknown nucleus '{name}'; known: {}", self.known_nuclei())))?;
        Ok(NucleusSpec::new(name, mhz * 1e6)?)
    }

    fn known_nuclei(&self) -> String {
        self.nuclei.keys().cloned().collect::<Vec<_>>().join(", ")
    }

    pub fn pipeline(&self) -> PipelineSettings {
        PipelineSettings {
            baseline_degree: self.analysis.baseline_degree,
            apodization_sigma: self.analysis.apodization_sigma_s,
            peak_window_hz: self.analysis.peak_window_hz,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn preset_parses_and_validates() {
        let cfg = RunConfig::preset();
        cfg.validate().unwrap();
        assert_eq!(cfg.lattice.mw_ghz, 188.0);
        assert_eq!(cfg.reference_ghz, 187.52);
        assert_eq!(cfg.nuclei["1H"], 285.3);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err = serde_json::from_str::<RunConfig>(r#"{"lattice": {"temprature_k": 2.0}}"#);
        assert!(err.is_err());
        let err = serde_json::from_str::<RunConfig>(r#"{"colour": 1}"#);
        assert!(err.is_err());
    }

    #[test]
    fn round_trips_through_json() {
        let cfg = RunConfig::preset();
        let text = serde_json::to_string(&cfg).unwrap();
        assert_eq!(serde_json::from_str::<RunConfig>(&text).unwrap(), cfg);
    }

    #[test]
    fn grid_specs() {
        let g: GridSpec = "10:100:19".parse().unwrap();
        let v = g.values();
        assert_eq!(v.len(), 19);
        assert_eq!(v[6], 40.0);
        assert_eq!(v[18], 100.0);
        assert_eq!("40:40:1".parse::<GridSpec>().unwrap().values(), vec![40.0]);
        for bad in ["1:2", "a:2:3", "5:1:3", "1:2:0", "0:2:3", "1:2:1"] {
            assert!(bad.parse::<GridSpec>().is_err(), "{bad}");
        }
    }
}
