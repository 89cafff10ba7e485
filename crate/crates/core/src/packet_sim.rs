//! Spin-packet rate equations: lattice relaxation, microwave saturation and
//! flip-flop spectral diffusion across the discretised EPR line.
//!
//! Each packet obeys
//!
//! ```text
//! dP_i/dt = −(P_i − P₀_i)/T₁ − 2 W_i P_i + J_{i+½} − J_{i−½}
//! J_{i+½} = Γ [(P_{i+1} − P_i) − s (1 − P_i P_{i+1})]
//! ```
//!
//! with no flux through the outer edges. The slope variable `s` is the
//! dipolar (non-Zeeman) order carried by the flip-flops: a flux vanishes when
//! neighbouring packets sit on a common tanh profile with
//! tanh(ħβδω/2) = s. It relaxes towards the lattice value s_L and is driven by
//! the mean flux mismatch,
//!
//! ```text
//! ds/dt = (1/T₁) [q · mean_e((P_{e+1} − P_e) − s (1 − P_e P_{e+1})) − (s − s_L)]
//! ```
//!
//! where `q` measures the heat capacity of the dipolar reservoir relative to
//! its lattice coupling. At W = 0 the thermal profile with s = s_L is an exact
//! fixed point.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::analysis::lsq::{levenberg_marquardt, LmOptions};
use crate::constants::{BOLTZMANN, HBAR};
use crate::error::{Error, Result};
use crate::line::{thermal_electron_profile, ElectronProfile, EprLine};
use crate::tridiag::{solve_bordered, Tridiag};

/// Spectral profile of the microwave excitation, unit peak.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExcitationShape {
    #[default]
    Gaussian,
    Lorentzian,
}

impl ExcitationShape {
    /// Unit-peak profile at `offset` for half width at half maximum `hwhm`.
    pub fn eval(self, offset: f64, hwhm: f64) -> f64 {
        let x = offset / hwhm;
        match self {
            ExcitationShape::Gaussian => (-std::f64::consts::LN_2 * x * x).exp(),
            ExcitationShape::Lorentzian => 1.0 / (1.0 + x * x),
        }
    }
}

/// Regime classifier thresholds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RegimeThresholds {
    /// Breakdown when more than this fraction of the deficit sits near ω_MW.
    pub localization: f64,
    /// Maximum normalised RMS residual of the tanh fit for inhomogeneous TM.
    pub tanh_residual: f64,
    /// Half width of the localization window in units of the excitation HWHM.
    pub window_widths: f64,
}

impl Default for RegimeThresholds {
    fn default() -> Self {
        Self { localization: 0.8, tanh_residual: 0.1, window_widths: 5.0 }
    }
}

/// Physical parameters of one packet simulation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LatticeConfig {
    /// Lattice temperature, K.
    pub temperature: f64,
    /// Radical concentration, mM.
    pub concentration: f64,
    /// T₁ at `t_ref`, s.
    pub t1_ref: f64,
    /// Reference temperature of the T₁ law, K.
    pub t_ref: f64,
    pub t1_exponent: f64,
    /// Flip-flop rate at `c_ref`, 1/s.
    pub gamma_ref: f64,
    /// Reference concentration of the flip-flop law, mM.
    pub c_ref: f64,
    pub gamma_exponent: f64,
    /// On-resonance saturation rate, 1/s.
    pub w_mw: f64,
    /// Excitation HWHM, rad/s. Two grid steps when absent.
    pub mw_width: Option<f64>,
    /// Irradiation frequency, rad/s.
    pub omega_mw: f64,
    pub excitation: ExcitationShape,
    /// Dipolar reservoir coupling `q`.
    pub dipolar_coupling: f64,
}

impl Default for LatticeConfig {
    fn default() -> Self {
        Self {
            temperature: 1.5,
            concentration: 40.0,
            t1_ref: 1.0,
            t_ref: 4.0,
            t1_exponent: 3.0,
            gamma_ref: 150.0,
            c_ref: 40.0,
            gamma_exponent: 2.0,
            w_mw: 100.0,
            mw_width: None,
            omega_mw: 2.0 * std::f64::consts::PI * 188.0e9,
            excitation: ExcitationShape::Gaussian,
            dipolar_coupling: 10.0,
        }
    }
}

impl LatticeConfig {
    /// T₁(T) = t1_ref·(T_ref/T)^b.
    pub fn t1(&self) -> f64 {
        self.t1_ref * (self.t_ref / self.temperature).powf(self.t1_exponent)
    }

    /// Γ_ff(c) = gamma_ref·(c/c_ref)^a.
    pub fn gamma(&self) -> f64 {
        self.gamma_ref * (self.concentration / self.c_ref).powf(self.gamma_exponent)
    }

    /// Dimensionless η = Γ_ff·T₁.
    pub fn eta(&self) -> f64 {
        self.gamma() * self.t1()
    }

    pub fn validate(&self) -> Result<()> {
        positive("temperature", self.temperature)?;
        positive("concentration", self.concentration)?;
        positive("t1_ref", self.t1_ref)?;
        positive("t_ref", self.t_ref)?;
        positive("c_ref", self.c_ref)?;
        non_negative("gamma_ref", self.gamma_ref)?;
        non_negative("w_mw", self.w_mw)?;
        non_negative("dipolar_coupling", self.dipolar_coupling)?;
        finite("t1_exponent", self.t1_exponent)?;
        finite("gamma_exponent", self.gamma_exponent)?;
        finite("omega_mw", self.omega_mw)?;
        if let Some(w) = self.mw_width {
            positive("mw_width", w)?;
        }
        let t1 = self.t1();
        if !(t1 > 0.0 && t1.is_finite()) {
            return Err(Error::invalid(format!("derived T1 = {t1} is not a positive finite time")));
        }
        if !self.gamma().is_finite() {
            return Err(Error::invalid("derived flip-flop rate is not finite"));
        }
        Ok(())
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!("{name} must be positive and finite, got {v}")))
    }
}

fn non_negative(name: &str, v: f64) -> Result<()> {
    if v >= 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!("{name} must be non-negative and finite, got {v}")))
    }
}

fn finite(name: &str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!("{name} must be finite, got {v}")))
    }
}

/// A configured line ready to be solved.
#[derive(Debug, Clone)]
pub struct PacketModel {
    line: Arc<EprLine>,
    config: LatticeConfig,
    thermal: ElectronProfile,
    rates: Vec<f64>,
    t1: f64,
    gamma: f64,
    slope_ref: f64,
    mw_hwhm: f64,
}

/// Per-packet polarizations, the dipolar slope and the elapsed time.
#[derive(Debug, Clone, PartialEq)]
pub struct PacketState {
    pub p: Vec<f64>,
    pub slope: f64,
    pub t: f64,
}

pub fn build_model(line: &Arc<EprLine>, config: &LatticeConfig) -> Result<PacketModel> {
    config.validate()?;
    let thermal = thermal_electron_profile(line, config.temperature)?;
    let mw_hwhm = config.mw_width.unwrap_or(2.0 * line.spacing());
    let rates = line
        .grid()
        .iter()
        .map(|&w| config.w_mw * config.excitation.eval(w - config.omega_mw, mw_hwhm))
        .collect();
    let slope_ref = (HBAR * line.spacing() / (2.0 * BOLTZMANN * config.temperature)).tanh();
    Ok(PacketModel {
        line: Arc::clone(line),
        config: config.clone(),
        thermal,
        rates,
        t1: config.t1(),
        gamma: config.gamma(),
        slope_ref,
        mw_hwhm,
    })
}

impl PacketModel {
    pub fn line(&self) -> &Arc<EprLine> {
        &self.line
    }

    pub fn config(&self) -> &LatticeConfig {
        &self.config
    }

    pub fn thermal(&self) -> &ElectronProfile {
        &self.thermal
    }

    pub fn rates(&self) -> &[f64] {
        &self.rates
    }

    pub fn t1(&self) -> f64 {
        self.t1
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn eta(&self) -> f64 {
        self.gamma * self.t1
    }

    pub fn mw_hwhm(&self) -> f64 {
        self.mw_hwhm
    }

    /// Dipolar slope of the thermal profile.
    pub fn lattice_slope(&self) -> f64 {
        self.slope_ref
    }

    /// Thermal equilibrium state at t = 0.
    pub fn thermal_state(&self) -> PacketState {
        PacketState { p: self.thermal.values().to_vec(), slope: self.slope_ref, t: 0.0 }
    }

    /// Rate scale used for residual tolerances.
    pub fn rate_scale(&self) -> f64 {
        (1.0 / self.t1).max(self.config.w_mw).max(self.gamma)
    }

    /// Right-hand side; writes dP/dt into `dp` and returns ds/dt.
    pub fn rhs(&self, p: &[f64], s: f64, dp: &mut [f64]) -> f64 {
        let n = p.len();
        let inv_t1 = 1.0 / self.t1;
        let p0 = self.thermal.values();
        for i in 0..n {
            dp[i] = -(p[i] - p0[i]) * inv_t1 - 2.0 * self.rates[i] * p[i];
        }
        let mut mismatch = 0.0;
        for e in 0..n - 1 {
            let (a, b) = (p[e], p[e + 1]);
            let m = (b - a) - s * (1.0 - a * b);
            mismatch += m;
            let j = self.gamma * m;
            dp[e] += j;
            dp[e + 1] -= j;
        }
        let mean = mismatch / (n - 1) as f64;
        (self.config.dipolar_coupling * mean - (s - self.slope_ref)) * inv_t1
    }

    /// Bordered Jacobian of [`rhs`](Self::rhs): tridiagonal block, slope
    /// column, slope row and corner.
    fn jacobian(&self, p: &[f64], s: f64) -> (Tridiag, Vec<f64>, Vec<f64>, f64) {
        let n = p.len();
        let inv_t1 = 1.0 / self.t1;
        let g = self.gamma;
        let qn = self.config.dipolar_coupling / (n - 1) as f64 * inv_t1;
        let mut a = Tridiag::zeros(n);
        let mut u = vec![0.0; n];
        let mut v = vec![0.0; n];
        let mut d = -inv_t1;
        for i in 0..n {
            a.diag[i] = -inv_t1 - 2.0 * self.rates[i];
        }
        for e in 0..n - 1 {
            let (pa, pb) = (p[e], p[e + 1]);
            let dma = -1.0 + s * pb;
            let dmb = 1.0 + s * pa;
            let dms = -(1.0 - pa * pb);
            a.diag[e] += g * dma;
            a.upper[e] += g * dmb;
            a.lower[e] -= g * dma;
            a.diag[e + 1] -= g * dmb;
            u[e] += g * dms;
            u[e + 1] -= g * dms;
            v[e] += qn * dma;
            v[e + 1] += qn * dmb;
            d += qn * dms;
        }
        (a, u, v, d)
    }

    fn residual_norm(&self, p: &[f64], s: f64, scratch: &mut [f64]) -> f64 {
        let ds = self.rhs(p, s, scratch);
        scratch.iter().fold(ds.abs(), |m, v| m.max(v.abs()))
    }
}

fn inside_unit(p: &[f64], s: f64) -> bool {
    s.abs() < 1.0 && p.iter().all(|v| v.abs() < 1.0)
}

/// Stationary state by damped Newton iteration on the bordered system.
///
/// The residual max_i |dP_i/dt| (and |ds/dt|) is driven below
/// 1e-12·max(1/T₁, w_mw, Γ_ff).
pub fn steady_state(model: &PacketModel) -> Result<PacketState> {
    let n = model.line.len();
    let tol = 1e-12 * model.rate_scale();
    let mut p: Vec<f64> = model
        .thermal
        .values()
        .iter()
        .zip(&model.rates)
        .map(|(&p0, &w)| p0 / (1.0 + 2.0 * w * model.t1))
        .collect();
    let mut s = model.slope_ref;
    let mut f = vec![0.0; n];
    let mut trial = vec![0.0; n];

    for _ in 0..200 {
        let fs = model.rhs(&p, s, &mut f);
        let norm = f.iter().fold(fs.abs(), |m, v| m.max(v.abs()));
        if norm <= tol {
            return Ok(PacketState { p, slope: s, t: f64::INFINITY });
        }
        let (a, u, v, d) = model.jacobian(&p, s);
        let rhs: Vec<f64> = f.iter().map(|x| -x).collect();
        let (dp, dz) = solve_bordered(&a, &u, &v, d, &rhs, -fs)?;

        let mut lambda = 1.0;
        let mut accepted = false;
        while lambda > 1e-12 {
            for i in 0..n {
                trial[i] = p[i] + lambda * dp[i];
            }
            let st = s + lambda * dz;
            if inside_unit(&trial, st) {
                let tn = model.residual_norm(&trial, st, &mut f);
                if tn < (1.0 - 1e-4 * lambda) * norm || tn <= tol {
                    std::mem::swap(&mut p, &mut trial);
                    s = st;
                    accepted = true;
                    break;
                }
            }
            lambda *= 0.5;
        }
        if !accepted {
            return Err(Error::Numeric(format!("steady-state line search stalled at residual {norm:.3e}")));
        }
    }
    Err(Error::Numeric("steady-state Newton iteration did not converge".into()))
}

/// Time-steps the rate equations from `state` up to `t_end` past its time stamp.
///
/// Uses classical Runge–Kutta when `dt` is below 0.5 over the fastest rate and
/// backward Euler otherwise. Returns the initial state, every `stride`-th
/// step and the final state.
pub fn integrate(model: &PacketModel, state: &PacketState, dt: f64, t_end: f64, stride: usize) -> Result<Vec<PacketState>> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::invalid(format!("time step must be positive, got {dt}")));
    }
    if !(t_end >= 0.0 && t_end.is_finite()) {
        return Err(Error::invalid(format!("end time must be non-negative, got {t_end}")));
    }
    if stride == 0 {
        return Err(Error::invalid("sample stride must be at least 1"));
    }
    if state.p.len() != model.line.len() {
        return Err(Error::invalid("state does not match the model grid"));
    }
    let explicit = dt < 0.5 / model.max_rate();
    let steps = (t_end / dt).ceil() as usize;
    let t0 = state.t;
    let mut out = vec![state.clone()];
    let mut cur = state.clone();
    for k in 1..=steps {
        let t_next = (k as f64 * dt).min(t_end);
        let h = t_next - (cur.t - t0);
        if explicit {
            rk4_step(model, &mut cur, h);
        } else {
            backward_euler_step(model, &mut cur, h)?;
        }
        cur.t = t0 + t_next;
        if k % stride == 0 || k == steps {
            out.push(cur.clone());
        }
    }
    Ok(out)
}

impl PacketModel {
    fn max_rate(&self) -> f64 {
        let w_max = self.rates.iter().cloned().fold(0.0, f64::max);
        let packet = 1.0 / self.t1 + 2.0 * w_max + 4.0 * self.gamma;
        let slope = (1.0 + 2.0 * self.config.dipolar_coupling) / self.t1;
        packet.max(slope)
    }
}

fn rk4_step(model: &PacketModel, st: &mut PacketState, h: f64) {
    let n = st.p.len();
    let mut k = [vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]];
    let mut ks = [0.0; 4];
    let mut tmp = vec![0.0; n];
    ks[0] = model.rhs(&st.p, st.slope, &mut k[0]);
    for (stage, c) in [(1usize, 0.5), (2, 0.5), (3, 1.0)] {
        for i in 0..n {
            tmp[i] = st.p[i] + c * h * k[stage - 1][i];
        }
        let s = st.slope + c * h * ks[stage - 1];
        let (_, rest) = k.split_at_mut(stage);
        ks[stage] = model.rhs(&tmp, s, &mut rest[0]);
    }
    for i in 0..n {
        st.p[i] += h / 6.0 * (k[0][i] + 2.0 * k[1][i] + 2.0 * k[2][i] + k[3][i]);
    }
    st.slope += h / 6.0 * (ks[0] + 2.0 * ks[1] + 2.0 * ks[2] + ks[3]);
}

fn backward_euler_step(model: &PacketModel, st: &mut PacketState, h: f64) -> Result<()> {
    let n = st.p.len();
    let mut p = st.p.clone();
    let mut s = st.slope;
    let mut f = vec![0.0; n];
    for _ in 0..50 {
        let fs = model.rhs(&p, s, &mut f);
        let g: Vec<f64> = (0..n).map(|i| -(p[i] - st.p[i] - h * f[i])).collect();
        let gs = -(s - st.slope - h * fs);
        let (mut a, u, v, d) = model.jacobian(&p, s);
        for x in a.diag.iter_mut() {
            *x = 1.0 - h * *x;
        }
        for x in a.lower.iter_mut().chain(a.upper.iter_mut()) {
            *x *= -h;
        }
        let u: Vec<f64> = u.iter().map(|x| -h * x).collect();
        let v: Vec<f64> = v.iter().map(|x| -h * x).collect();
        let (dp, dz) = solve_bordered(&a, &u, &v, 1.0 - h * d, &g, gs)?;
        let mut lambda = 1.0;
        while !inside_unit(&p.iter().zip(&dp).map(|(a, b)| a + lambda * b).collect::<Vec<_>>(), s + lambda * dz) {
            lambda *= 0.5;
            if lambda < 1e-12 {
                return Err(Error::Numeric("implicit step left the physical range".into()));
            }
        }
        for i in 0..n {
            p[i] += lambda * dp[i];
        }
        s += lambda * dz;
        let step = dp.iter().fold(dz.abs(), |m, v| m.max(v.abs())) * lambda;
        if step < 1e-15 {
            break;
        }
    }
    st.p = p;
    st.slope = s;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Regime {
    HomogeneousTM,
    InhomogeneousTM,
    Breakdown,
}

impl Regime {
    /// Short tag used in tabular output.
    pub fn tag(self) -> &'static str {
        match self {
            Regime::HomogeneousTM => "HOMO",
            Regime::InhomogeneousTM => "INHOMO",
            Regime::Breakdown => "BREAK",
        }
    }

    pub fn is_tm(self) -> bool {
        self != Regime::Breakdown
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegimeMetrics {
    pub hole_localization: f64,
    pub reversal: bool,
    pub tanh_fit_residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegimeVerdict {
    pub regime: Regime,
    pub eta: f64,
    pub metrics: RegimeMetrics,
}

/// Classifies a stationary profile as homogeneous TM, inhomogeneous TM or
/// breakdown.
pub fn classify_regime(model: &PacketModel, ss: &PacketState, thresholds: &RegimeThresholds) -> RegimeVerdict {
    let metrics = regime_metrics(model, &ss.p, thresholds);
    let regime = if metrics.hole_localization > thresholds.localization {
        Regime::Breakdown
    } else if metrics.reversal && metrics.tanh_fit_residual < thresholds.tanh_residual {
        Regime::InhomogeneousTM
    } else {
        Regime::HomogeneousTM
    };
    RegimeVerdict { regime, eta: model.eta(), metrics }
}

fn regime_metrics(model: &PacketModel, p: &[f64], thresholds: &RegimeThresholds) -> RegimeMetrics {
    let grid = model.line.grid();
    let p0 = model.thermal.values();
    let window = thresholds.window_widths * model.mw_hwhm;
    let mut total = 0.0;
    let mut near = 0.0;
    for i in 0..p.len() {
        let deficit = p0[i] - p[i];
        total += deficit;
        if (grid[i] - model.config.omega_mw).abs() <= window {
            near += deficit;
        }
    }
    let hole_localization = if total > 0.0 { (near / total).clamp(0.0, 1.0) } else { 0.0 };
    let reversal = p.iter().zip(p0).any(|(a, b)| a * b < 0.0);
    RegimeMetrics { hole_localization, reversal, tanh_fit_residual: tanh_fit_residual(&model.line, p) }
}

/// Normalised RMS residual of the best fit A·tanh(β(u − u₀)), with u the
/// frequency offset from the line centre in units of the line width.
pub fn tanh_fit_residual(line: &EprLine, p: &[f64]) -> f64 {
    let scale = p.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    if scale == 0.0 {
        return 0.0;
    }
    let u: Vec<f64> = line.grid().iter().map(|w| (w - line.center()) / line.width()).collect();
    let y: Vec<f64> = p.iter().map(|v| v / scale).collect();
    let m = y.len();
    let residual = |q: &DVector<f64>| DVector::from_iterator(m, u.iter().zip(&y).map(|(&u, &y)| q[0] * (q[1] * (u - q[2])).tanh() - y));
    let jacobian = |q: &DVector<f64>| {
        let mut jm = DMatrix::zeros(m, 3);
        for (i, &ui) in u.iter().enumerate() {
            let th = (q[1] * (ui - q[2])).tanh();
            let sech2 = 1.0 - th * th;
            jm[(i, 0)] = th;
            jm[(i, 1)] = q[0] * sech2 * (ui - q[2]);
            jm[(i, 2)] = -q[0] * q[1] * sech2;
        }
        jm
    };
    let opts = LmOptions { max_iter: 100, ..LmOptions::default() };
    let mut best = f64::INFINITY;
    for beta0 in [1.0, 5.0, 20.0] {
        for u0 in [-0.3, 0.0, 0.3] {
            let x0 = DVector::from_vec(vec![1.0, beta0, u0]);
            if let Ok(rep) = levenberg_marquardt(residual, jacobian, x0, opts) {
                best = best.min(rep.ssr);
            }
        }
    }
    if best.is_finite() {
        (best / m as f64).sqrt()
    } else {
        1.0
    }
}
