use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{
    junction_inductance_with, minimize_rf_potential_with, star_delta_general, BranchSelection,
    CircuitParams, EffectiveCoupler, FluxBias, ModeCoefficients, Tolerances,
};
use crate::error::{Error, Result};
use crate::units::{wrap_phase, HBAR};

/// Intermediates of the Lagrangian-to-Hamiltonian chain for one reduced network.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NetworkRecord {
    pub coupler: EffectiveCoupler,
    /// Bare resonator inductances `L_k + L_*`.
    pub l_a0: f64,
    pub l_b0: f64,
    /// `L'_k = L_k0 + M_*`.
    pub l_prime_a: f64,
    pub l_prime_b: f64,
    /// Effective masses `L_ma = L'_a - M_*^2 / L'_b` and `L_mb`.
    pub l_m_a: f64,
    pub l_m_b: f64,
    /// Coupling mass `-M_* + L'_a L'_b / M_*`; infinite when `M_* = 0`.
    pub m_m: f64,
    pub z_a: f64,
    pub z_b: f64,
    /// Bare resonator frequencies `1 / sqrt(L_k0 C_k)` (NaN when `L_k0 <= 0`).
    pub omega_a0: f64,
    pub omega_b0: f64,
    /// Zero-point current of the bare resonators [A].
    pub i_zpf_a: f64,
    pub i_zpf_b: f64,
    pub coefficients: ModeCoefficients,
}

/// Full computation record at one bias point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientRecord {
    pub bias: FluxBias,
    /// Junction phase at the potential minimum, on the same branch as `bias.phi_ex`.
    pub phi_star: f64,
    pub multistable: bool,
    /// Junction inductance at `phi_star` [H].
    pub l_j: f64,
    pub network: NetworkRecord,
}

impl CoefficientRecord {
    pub fn coefficients(&self) -> ModeCoefficients {
        self.network.coefficients
    }

    pub fn m_star(&self) -> f64 {
        self.network.coupler.m_star
    }

    pub fn l_star(&self) -> f64 {
        self.network.coupler.l_star()
    }
}

/// Quantized Hamiltonian coefficients from resonator elements and a reduced coupler.
///
/// `g_r = sqrt(Z_a Z_b) / (2 M_m)` is evaluated as
/// `sqrt(Z_a Z_b) M_* / (2 (L'_a L'_b - M_*^2))` so that `M_* = 0` is regular.
pub fn coefficients_from_network(
    l_a: f64,
    l_b: f64,
    c_a: f64,
    c_b: f64,
    coupler: EffectiveCoupler,
) -> Result<NetworkRecord> {
    let m = coupler.m_star;
    let l_a0 = l_a + coupler.l_star_a;
    let l_b0 = l_b + coupler.l_star_b;
    let l_prime_a = l_a0 + m;
    let l_prime_b = l_b0 + m;
    // L'_a L'_b - M_*^2 expanded to avoid cancellation at large M_*
    let det = l_a0 * l_b0 + m * (l_a0 + l_b0);
    let l_m_a = det / l_prime_b;
    let l_m_b = det / l_prime_a;
    if !(l_m_a > 0.0) {
        return Err(Error::NegativeMass { mode: 'a', value: l_m_a });
    }
    if !(l_m_b > 0.0) {
        return Err(Error::NegativeMass { mode: 'b', value: l_m_b });
    }
    let m_m = if m == 0.0 { f64::INFINITY } else { det / m };
    let z_a = (l_m_a / c_a).sqrt();
    let z_b = (l_m_b / c_b).sqrt();
    let omega_a = 1.0 / (l_m_a * c_a).sqrt();
    let omega_b = 1.0 / (l_m_b * c_b).sqrt();
    let g_r = (z_a * z_b).sqrt() * m / (2.0 * det);
    let omega_a0 = 1.0 / (l_a0 * c_a).sqrt();
    let omega_b0 = 1.0 / (l_b0 * c_b).sqrt();
    Ok(NetworkRecord {
        coupler,
        l_a0,
        l_b0,
        l_prime_a,
        l_prime_b,
        l_m_a,
        l_m_b,
        m_m,
        z_a,
        z_b,
        omega_a0,
        omega_b0,
        i_zpf_a: (HBAR * omega_a0 / (2.0 * l_a0)).sqrt(),
        i_zpf_b: (HBAR * omega_b0 / (2.0 * l_b0)).sqrt(),
        coefficients: ModeCoefficients::new(omega_a, omega_b, g_r),
    })
}

/// Hamiltonian coefficients at one flux bias, using the ground-state junction phase.
pub fn mode_coefficients(params: &CircuitParams, bias: FluxBias) -> Result<CoefficientRecord> {
    mode_coefficients_with(params, bias, BranchSelection::Global, &Tolerances::default())
}

pub fn mode_coefficients_with(
    params: &CircuitParams,
    bias: FluxBias,
    selection: BranchSelection,
    tol: &Tolerances,
) -> Result<CoefficientRecord> {
    params.validate()?;
    if !bias.phi_ex.is_finite() || !bias.phi_dc.is_finite() {
        return Err(Error::invalid("bias", "phases must be finite"));
    }
    let effective = CircuitParams {
        l_j0: params.l_j0_at(bias.phi_dc),
        ..*params
    };
    // Work on the wrapped bias so results are exactly periodic in phi_ex.
    let wrapped = wrap_phase(bias.phi_ex);
    let shift = bias.phi_ex - wrapped;
    let selection = match selection {
        BranchSelection::Nearest(prev) => BranchSelection::Nearest(prev - shift),
        s => s,
    };
    let min = minimize_rf_potential_with(wrapped, &effective, selection, tol)?;
    let l_j = junction_inductance_with(min.phi, &effective, tol)?;
    let coupler = star_delta_general(params.l_sh, params.l_sh, l_j, params.m_0, tol.inductance_pole)?;
    let network = coefficients_from_network(params.l_a, params.l_b, params.c_a, params.c_b, coupler)?;
    Ok(CoefficientRecord {
        bias,
        phi_star: min.phi + shift,
        multistable: min.is_multistable(),
        l_j,
        network,
    })
}

/// Evaluates [`mode_coefficients`] at every bias, in parallel, preserving order.
pub fn record_sweep(params: &CircuitParams, biases: &[FluxBias]) -> Vec<Result<CoefficientRecord>> {
    biases
        .par_iter()
        .map(|b| mode_coefficients(params, *b))
        .collect()
}

/// Weak-mutual estimate `g ~ M_* I_zpf,a I_zpf,b / hbar` [rad/s].
pub fn zpf_coupling_approx(params: &CircuitParams, bias: FluxBias) -> Result<f64> {
    let rec = mode_coefficients(params, bias)?;
    Ok(zpf_from_network(&rec.network))
}

pub(crate) fn zpf_from_network(n: &NetworkRecord) -> f64 {
    n.coupler.m_star * (n.omega_a0 * n.omega_b0).sqrt() / (2.0 * (n.l_a0 * n.l_b0).sqrt())
}
