use std::f64::consts::PI;

/// Planck constant, J s (exact, SI 2019).
pub const PLANCK: f64 = 6.626_070_15e-34;
/// Reduced Planck constant, J s.
pub const HBAR: f64 = PLANCK / (2.0 * PI);
/// Boltzmann constant, J/K (exact, SI 2019).
pub const BOLTZMANN: f64 = 1.380_649e-23;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysConstants {
    pub h: f64,
    pub hbar: f64,
    pub k_b: f64,
}

impl PhysConstants {
    pub const CODATA: PhysConstants = PhysConstants { h: PLANCK, hbar: HBAR, k_b: BOLTZMANN };
}

impl Default for PhysConstants {
    fn default() -> Self {
        Self::CODATA
    }
}

/// ħω / (2 k_B T), the argument of every Brillouin tanh in the crate.
#[inline]
pub fn zeeman_ratio(omega: f64, temperature: f64) -> f64 {
    HBAR * omega / (2.0 * BOLTZMANN * temperature)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hbar_is_h_over_two_pi() {
        let c = PhysConstants::CODATA;
        assert!(((c.hbar - c.h / (2.0 * PI)) / c.hbar).abs() < 1e-12);
    }
}
