//! Shared inputs for the benchmarks.

use coupler_core::lindblad::{DriveConfig, Port};
use coupler_core::units::{from_mhz, turns_to_rad};
use coupler_core::FluxBias;

/// `n` evenly spaced biases over one flux period.
pub fn flux_period(n: usize) -> Vec<FluxBias> {
    (0..n).map(|k| FluxBias::from_turns(k as f64 / n as f64)).collect()
}

/// `n` bias coordinates in rad over `(-0.5, 0.5)` turn.
pub fn centred_biases(n: usize) -> Vec<f64> {
    (0..n).map(|k| turns_to_rad((k as f64 + 0.5) / n as f64 - 0.5)).collect()
}

/// Weak drive with the measured port rates.
pub fn measured_drive(eta: f64) -> DriveConfig {
    DriveConfig {
        epsilon: from_mhz(1.5),
        eta,
        kappa_a: from_mhz(3.3e-4),
        kappa_b: from_mhz(3.3e-4),
        omega_p: 0.0,
        input_port: Port::A,
    }
}
