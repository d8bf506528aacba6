use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circuit::{eigenmodes, mode_coefficients, rwa_modes, CircuitParams, FluxBias, NormalModes};
use crate::error::Result;

/// Normal modes at each bias; `None` where the model has no stable solution.
pub fn predict_modes(params: &CircuitParams, biases: &[FluxBias]) -> Vec<Option<NormalModes>> {
    biases
        .par_iter()
        .map(|b| {
            mode_coefficients(params, *b)
                .and_then(|r| eigenmodes(&r.coefficients()))
                .ok()
        })
        .collect()
}

/// Coupling extrema over one flux period.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CouplingRange {
    /// [rad/s]
    pub g_min: f64,
    /// `phi_ex` of the minimum [rad]
    pub phi_min: f64,
    pub g_max: f64,
    pub phi_max: f64,
}

fn coupling(params: &CircuitParams, phi: f64) -> Result<f64> {
    mode_coefficients(params, FluxBias::rf(phi)).map(|r| r.network.coefficients.g_r)
}

/// Golden-section search for a minimum of `f` on `[a, b]`.
fn golden_min(f: impl Fn(f64) -> Result<f64>, mut a: f64, mut b: f64) -> Result<(f64, f64)> {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c)?, f(d)?);
    for _ in 0..100 {
        if (b - a).abs() < 1e-13 * (1.0 + a.abs()) {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d)?;
        }
    }
    Ok(if fc < fd { (c, fc) } else { (d, fd) })
}

/// Extrema of `g_r` over `phi_ex` in `[-pi, pi)`: a `points` sweep followed by
/// golden-section refinement between the neighbours of each grid extremum.
pub fn g_range(params: &CircuitParams, points: usize) -> Result<CouplingRange> {
    let n = points.max(8);
    let step = std::f64::consts::TAU / n as f64;
    let phis: Vec<f64> = (0..n).map(|k| -std::f64::consts::PI + step * k as f64).collect();
    let g = phis
        .par_iter()
        .map(|&p| coupling(params, p))
        .collect::<Result<Vec<_>>>()?;
    let kmin = (0..n).min_by(|&a, &b| g[a].total_cmp(&g[b])).unwrap();
    let kmax = (0..n).max_by(|&a, &b| g[a].total_cmp(&g[b])).unwrap();
    let (phi_min, g_min) = golden_min(|p| coupling(params, p), phis[kmin] - step, phis[kmin] + step)?;
    let (phi_max, neg) = golden_min(|p| coupling(params, p).map(|v| -v), phis[kmax] - step, phis[kmax] + step)?;
    Ok(CouplingRange {
        g_min: g_min.min(g[kmin]),
        phi_min,
        g_max: (-neg).max(g[kmax]),
        phi_max,
    })
}

/// `(omega_+^RWA - omega_+, omega_-^RWA - omega_-)` at one bias [rad/s].
pub fn rwa_shift(params: &CircuitParams, bias: FluxBias) -> Result<(f64, f64)> {
    let c = mode_coefficients(params, bias)?.coefficients();
    let exact = eigenmodes(&c)?;
    let rwa = rwa_modes(&c);
    Ok((rwa.plus - exact.plus, rwa.minus - exact.minus))
}
