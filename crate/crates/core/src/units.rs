//! Physical constants and unit helpers.
//!
//! Everything inside the crate is SI: henry, farad, rad/s. Frequencies shown
//! to users are ordinary frequencies (omega / 2 pi) in Hz, MHz or GHz, and
//! flux biases are shown in turns (phi / 2 pi).

use std::f64::consts::TAU;

/// Reduced Planck constant [J s].
pub const HBAR: f64 = 1.054_571_817e-34;

/// Magnetic flux quantum h / 2e [Wb].
pub const FLUX_QUANTUM: f64 = 2.067_833_848e-15;

pub const NANO: f64 = 1e-9;
pub const PICO: f64 = 1e-12;
pub const FEMTO: f64 = 1e-15;
pub const MEGA: f64 = 1e6;
pub const GIGA: f64 = 1e9;

/// Angular frequency [rad/s] from a frequency in GHz.
#[inline]
pub fn from_ghz(f: f64) -> f64 {
    angular(f * GIGA)
}

/// Angular frequency [rad/s] from a frequency in MHz.
#[inline]
pub fn from_mhz(f: f64) -> f64 {
    angular(f * MEGA)
}

/// Angular frequency [rad/s] from an ordinary frequency [Hz].
#[inline]
pub fn angular(hz: f64) -> f64 {
    TAU * hz
}

/// Ordinary frequency [Hz] from an angular frequency [rad/s].
#[inline]
pub fn hertz(omega: f64) -> f64 {
    omega / TAU
}

#[inline]
pub fn ghz(omega: f64) -> f64 {
    hertz(omega) / GIGA
}

#[inline]
pub fn mhz(omega: f64) -> f64 {
    hertz(omega) / MEGA
}

#[inline]
pub fn turns_to_rad(turns: f64) -> f64 {
    TAU * turns
}

#[inline]
pub fn rad_to_turns(rad: f64) -> f64 {
    rad / TAU
}

/// Wraps a phase to [-pi, pi).
#[inline]
pub fn wrap_phase(phi: f64) -> f64 {
    let w = (phi + std::f64::consts::PI).rem_euclid(TAU) - std::f64::consts::PI;
    // rem_euclid can return exactly TAU for tiny negative inputs
    if w >= std::f64::consts::PI {
        w - TAU
    } else {
        w
    }
}
