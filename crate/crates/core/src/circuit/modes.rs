use serde::{Deserialize, Serialize};

use super::{mode_coefficients, CircuitParams, FluxBias, ModeCoefficients};
use crate::error::{Error, Result};

/// Normal-mode angular frequencies, `plus >= minus`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalModes {
    pub plus: f64,
    pub minus: f64,
}

/// Exact normal modes of the full coupling Hamiltonian.
///
/// `omega_pm^2 = (wa^2 + wb^2 +- sqrt((wa^2 - wb^2)^2 + 16 g^2 wa wb)) / 2`.
/// The lower root is taken from the product of roots,
/// `omega_-^2 omega_+^2 = wa wb (wa wb - 4 g^2)`, which is exact at the
/// stability boundary.
pub fn eigenmodes(c: &ModeCoefficients) -> Result<NormalModes> {
    let (wa, wb, g) = (c.omega_a, c.omega_b, c.g_r);
    let sum = wa * wa + wb * wb;
    let diff = wa * wa - wb * wb;
    let disc = (diff * diff + 16.0 * g * g * wa * wb).sqrt();
    let plus_sq = 0.5 * (sum + disc);
    let product = wa * wb * (wa * wb - 4.0 * g * g);
    if product < 0.0 {
        return Err(Error::ImaginaryMode {
            g,
            limit: c.coupling_limit(),
        });
    }
    Ok(NormalModes {
        plus: plus_sq.sqrt(),
        minus: (product / plus_sq).sqrt(),
    })
}

/// Normal modes with the counter-rotating terms dropped.
pub fn rwa_modes(c: &ModeCoefficients) -> NormalModes {
    let (wa, wb, g) = (c.omega_a, c.omega_b, c.g_r);
    let root = (4.0 * g * g + (wa - wb) * (wa - wb)).sqrt();
    NormalModes {
        plus: 0.5 * (wa + wb + root),
        minus: 0.5 * (wa + wb - root),
    }
}

/// Coefficients approached as the effective mutual inductance diverges.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InfiniteLimits {
    pub omega_a: f64,
    pub omega_b: f64,
    pub g: f64,
}

/// `omega_k -> 1 / sqrt((L_a0 + L_b0) C_k)` and `g -> sqrt(omega_a omega_b) / 2`.
///
/// The bare inductances `L_k0 = L_k + L_*` depend on the bias through `L_*`.
pub fn infinite_mutual_limits(params: &CircuitParams, bias: FluxBias) -> Result<InfiniteLimits> {
    let rec = mode_coefficients(params, bias)?;
    let total = rec.network.l_a0 + rec.network.l_b0;
    let omega_a = 1.0 / (total * params.c_a).sqrt();
    let omega_b = 1.0 / (total * params.c_b).sqrt();
    Ok(InfiniteLimits {
        omega_a,
        omega_b,
        g: (omega_a * omega_b).sqrt() / 2.0,
    })
}

/// Effective qubit-qubit coupling mediated by two coupled resonators,
/// `J12 = 4 g_r g_q^2 / (omega_r^2 - 4 g_r^2)`.
pub fn effective_qubit_coupling(g_r: f64, g_q: f64, omega_r: f64) -> Result<f64> {
    let denom = omega_r * omega_r - 4.0 * g_r * g_r;
    if denom.abs() <= 1e-12 * omega_r * omega_r {
        return Err(Error::CouplingDivergence);
    }
    Ok(4.0 * g_r * g_q * g_q / denom)
}
