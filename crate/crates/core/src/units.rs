//! Boundary conversions between the Hz-based file/CLI world and angular frequency.

use std::f64::consts::PI;

pub fn hz_to_rad(hz: f64) -> f64 {
    2.0 * PI * hz
}

pub fn rad_to_hz(omega: f64) -> f64 {
    omega / (2.0 * PI)
}

pub fn ghz_to_rad(ghz: f64) -> f64 {
    hz_to_rad(ghz * 1e9)
}

pub fn rad_to_ghz(omega: f64) -> f64 {
    rad_to_hz(omega) * 1e-9
}

pub fn mhz_to_rad(mhz: f64) -> f64 {
    hz_to_rad(mhz * 1e6)
}
