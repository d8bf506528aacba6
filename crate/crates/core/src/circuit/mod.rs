//! Classical circuit model of two LC resonators joined by an rf-SQUID coupler.
//!
//! The junction is treated as a flux-tunable inductance. For a given flux
//! bias the junction phase sits at the minimum of the rf-SQUID potential, the
//! resulting three-inductor network is reduced by a star-delta transform to an
//! effective mutual inductance `M_*` and series inductance `L_*`, and the
//! two-resonator Lagrangian is quantized into [`ModeCoefficients`].

mod calibration;
mod coefficients;
mod junction;
mod modes;
mod potential;
mod three_junction;

pub use calibration::{flux_calibration, CalibrationConstants, RF_TO_DC_LEAK_RATIO};
pub use coefficients::{
    coefficients_from_network, mode_coefficients, mode_coefficients_with, record_sweep,
    zpf_coupling_approx, CoefficientRecord, NetworkRecord,
};
pub use junction::{
    junction_inductance, junction_inductance_with, star_delta, star_delta_general,
    EffectiveCoupler,
};
pub use modes::{
    eigenmodes, effective_qubit_coupling, infinite_mutual_limits, rwa_modes, InfiniteLimits,
    NormalModes,
};
pub use potential::{
    minimize_rf_potential, minimize_rf_potential_with, rf_potential, rf_potential_derivative,
    BranchSelection, RfMinimum,
};
pub use three_junction::{
    minimize_3j_potential, three_junction_coefficients, three_junction_gradient,
    three_junction_potential, ThreeJunctionMinimum, ThreeJunctionParams,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::units::{FEMTO, NANO};

/// Numerical thresholds shared by the circuit operations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Minimum allowed |cos(phi) - gamma| before the junction inductance is a pole.
    pub pole: f64,
    /// Minimum allowed magnitude [H] of inductance denominators.
    pub inductance_pole: f64,
    /// Convergence tolerance on junction phases [rad].
    pub phase: f64,
    pub max_iterations: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            pole: 1e-9,
            inductance_pole: 1e-15,
            phase: 1e-10,
            max_iterations: 200,
        }
    }
}

/// Lumped-element values of the resonator pair and rf-SQUID coupler (SI units).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CircuitParams {
    pub l_a: f64,
    pub l_b: f64,
    pub c_a: f64,
    pub c_b: f64,
    /// Inductance shared between each resonator and the rf-SQUID loop.
    pub l_sh: f64,
    /// Junction inductance scale (dc-SQUID at its operating point).
    pub l_j0: f64,
    /// Geometric mutual inductance between the resonators.
    pub m_0: f64,
    /// Unshared loop inductance of the rf-SQUID.
    pub l_0: f64,
    /// Offset of the cosine modulation of the junction inductance.
    pub gamma: f64,
}

/// Whether the rf-SQUID potential has a single minimum for every bias.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Stability {
    Monostable,
    Multistable,
}

impl CircuitParams {
    /// Fitted parameters of the measured single-junction device.
    pub fn table1() -> Self {
        Self {
            l_a: 2.023 * NANO,
            l_b: 2.023 * NANO,
            c_a: 184.3 * FEMTO,
            c_b: 182.7 * FEMTO,
            l_sh: 0.446 * NANO,
            l_j0: 1.210 * NANO,
            m_0: 0.381 * NANO,
            l_0: 0.177 * NANO,
            gamma: 0.053,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("L_a", self.l_a),
            ("L_b", self.l_b),
            ("C_a", self.c_a),
            ("C_b", self.c_b),
            ("L_sh", self.l_sh),
            ("L_J0", self.l_j0),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::invalid(name, format!("must be finite and > 0, got {v}")));
            }
        }
        // M_0 = 0 and L_0 = 0 are legal idealizations.
        for (name, v) in [("M_0", self.m_0), ("L_0", self.l_0)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::invalid(name, format!("must be finite and >= 0, got {v}")));
            }
        }
        if !(self.gamma.is_finite() && (0.0..1.0).contains(&self.gamma)) {
            return Err(Error::invalid("gamma", format!("must lie in [0, 1), got {}", self.gamma)));
        }
        Ok(())
    }

    /// Loop inductance seen by the junction phase, `2 L_sh + L_0`.
    pub fn loop_inductance(&self) -> f64 {
        2.0 * self.l_sh + self.l_0
    }

    /// `(2 L_sh + L_0) / L_J0`; the potential is convex everywhere when this is below 1.
    pub fn screening_ratio(&self) -> f64 {
        self.loop_inductance() / self.l_j0
    }

    /// Screening parameter `2 L_sh / L_J0`.
    pub fn beta(&self) -> f64 {
        2.0 * self.l_sh / self.l_j0
    }

    pub fn stability(&self) -> Stability {
        if self.screening_ratio() < 1.0 {
            Stability::Monostable
        } else {
            Stability::Multistable
        }
    }

    pub fn is_monostable(&self) -> bool {
        self.stability() == Stability::Monostable
    }

    /// Junction inductance scale at a dc-SQUID phase offset from the operating point.
    ///
    /// The dc-SQUID critical current scales as |cos(phi_dc / 2)|, so the
    /// inductance scale grows as its inverse.
    pub fn l_j0_at(&self, phi_dc: f64) -> f64 {
        self.l_j0 / (0.5 * phi_dc).cos().abs()
    }
}

/// External phases applied to the rf-SQUID loop and the dc-SQUID loop [rad].
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct FluxBias {
    pub phi_ex: f64,
    /// dc-SQUID phase measured from the operating point where `L_J0` was fitted.
    pub phi_dc: f64,
}

impl FluxBias {
    pub fn new(phi_ex: f64, phi_dc: f64) -> Self {
        Self { phi_ex, phi_dc }
    }

    /// Bias on the rf loop only.
    pub fn rf(phi_ex: f64) -> Self {
        Self { phi_ex, phi_dc: 0.0 }
    }

    pub fn from_turns(turns: f64) -> Self {
        Self::rf(crate::units::turns_to_rad(turns))
    }

    /// Local-line bias: the dc loop picks up `phi_ex / 313` of the rf-loop phase.
    pub fn with_local_leak(phi_ex: f64) -> Self {
        Self {
            phi_ex,
            phi_dc: phi_ex / RF_TO_DC_LEAK_RATIO,
        }
    }
}

/// Coefficients of the quantized two-mode Hamiltonian (angular frequencies, rad/s).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModeCoefficients {
    pub omega_a: f64,
    pub omega_b: f64,
    /// Signed resonator-resonator coupling.
    pub g_r: f64,
}

impl ModeCoefficients {
    pub fn new(omega_a: f64, omega_b: f64, g_r: f64) -> Self {
        Self { omega_a, omega_b, g_r }
    }

    /// Degenerate resonators at `omega` with coupling `ratio * omega`.
    pub fn degenerate(omega: f64, ratio: f64) -> Self {
        Self::new(omega, omega, ratio * omega)
    }

    /// Largest stable coupling, `sqrt(omega_a omega_b) / 2`.
    pub fn coupling_limit(&self) -> f64 {
        (self.omega_a * self.omega_b).sqrt() / 2.0
    }

    pub fn is_stable(&self) -> bool {
        self.g_r.abs() < self.coupling_limit()
    }

    /// The same physics with the mode labels exchanged.
    pub fn swapped(&self) -> Self {
        Self::new(self.omega_b, self.omega_a, self.g_r)
    }
}
