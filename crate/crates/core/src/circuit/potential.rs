//! Ground-state phase of the rf-SQUID.
//!
//! With the `(Phi_0 / 2 pi)^2` prefactor dropped the potential reads
//! `U(phi) = (phi - phi_ex)^2 / (2 L_loop) - cos(phi) / L_J0` with
//! `L_loop = 2 L_sh + L_0`. Every stationary point satisfies
//! `|phi - phi_ex| <= L_loop / L_J0`, which bounds the search.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::{CircuitParams, Tolerances};
use crate::error::{Error, Result};

pub fn rf_potential(phi: f64, phi_ex: f64, params: &CircuitParams) -> f64 {
    let d = phi - phi_ex;
    0.5 * d * d / params.loop_inductance() - phi.cos() / params.l_j0
}

pub fn rf_potential_derivative(phi: f64, phi_ex: f64, params: &CircuitParams) -> f64 {
    (phi - phi_ex) / params.loop_inductance() + phi.sin() / params.l_j0
}

fn curvature(phi: f64, params: &CircuitParams) -> f64 {
    1.0 / params.loop_inductance() + phi.cos() / params.l_j0
}

/// Which local minimum to report when the potential has several.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum BranchSelection {
    /// Lowest potential energy.
    #[default]
    Global,
    /// Minimum closest to a previous solution (sweep continuation).
    Nearest(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RfMinimum {
    /// Selected junction phase [rad].
    pub phi: f64,
    /// `U''` at the solution, in units of 1/H.
    pub curvature: f64,
    /// All local minima found, sorted by phase.
    pub minima: Vec<f64>,
}

impl RfMinimum {
    pub fn is_multistable(&self) -> bool {
        self.minima.len() > 1
    }
}

/// Global minimizer of the rf-SQUID potential.
pub fn minimize_rf_potential(phi_ex: f64, params: &CircuitParams) -> Result<RfMinimum> {
    minimize_rf_potential_with(phi_ex, params, BranchSelection::Global, &Tolerances::default())
}

pub fn minimize_rf_potential_with(
    phi_ex: f64,
    params: &CircuitParams,
    selection: BranchSelection,
    tol: &Tolerances,
) -> Result<RfMinimum> {
    if !phi_ex.is_finite() {
        return Err(Error::invalid("phi_ex", "must be finite"));
    }
    let ratio = params.screening_ratio();
    if ratio < 1.0 {
        // U'' > 0 everywhere: the single root of U' is bracketed by phi_ex +- pi.
        let phi = safeguarded_newton(phi_ex, params, phi_ex - PI, phi_ex + PI, tol)?;
        return Ok(RfMinimum {
            phi,
            curvature: curvature(phi, params),
            minima: vec![phi],
        });
    }

    // Multistable: locate every sign change of U' on the bounded interval.
    let half_width = ratio + 1e-3;
    let lo = phi_ex - half_width;
    let hi = phi_ex + half_width;
    // U'' varies on the scale of the cosine; 0.01 rad resolves every root pair.
    let steps = ((hi - lo) / 0.01).ceil() as usize;
    let mut minima = Vec::new();
    let mut prev_x = lo;
    let mut prev_f = rf_potential_derivative(lo, phi_ex, params);
    for i in 1..=steps {
        let x = lo + (hi - lo) * i as f64 / steps as f64;
        let f = rf_potential_derivative(x, phi_ex, params);
        if prev_f < 0.0 && f >= 0.0 {
            let root = safeguarded_newton(phi_ex, params, prev_x, x, tol)?;
            if curvature(root, params) >= 0.0 {
                minima.push(root);
            }
        }
        prev_x = x;
        prev_f = f;
    }
    if minima.is_empty() {
        return Err(Error::NonConvergence {
            what: "rf-SQUID minimizer",
            iterations: steps,
            residual: f64::NAN,
        });
    }
    if minima.len() > 1 {
        log::warn!(
            "rf-SQUID potential is multistable at phi_ex = {phi_ex}: {} minima",
            minima.len()
        );
    }
    let phi = match selection {
        BranchSelection::Global => *minima
            .iter()
            .min_by(|a, b| {
                rf_potential(**a, phi_ex, params).total_cmp(&rf_potential(**b, phi_ex, params))
            })
            .unwrap(),
        BranchSelection::Nearest(prev) => *minima
            .iter()
            .min_by(|a, b| (**a - prev).abs().total_cmp(&(**b - prev).abs()))
            .unwrap(),
    };
    Ok(RfMinimum {
        phi,
        curvature: curvature(phi, params),
        minima,
    })
}

/// Newton iteration on `U'` kept inside a shrinking bracket `[lo, hi]` with
/// `U'(lo) < 0 < U'(hi)`; falls back to bisection whenever a step leaves it.
fn safeguarded_newton(
    phi_ex: f64,
    params: &CircuitParams,
    mut lo: f64,
    mut hi: f64,
    tol: &Tolerances,
) -> Result<f64> {
    let mut x = phi_ex.clamp(lo, hi);
    for _ in 0..tol.max_iterations {
        let f = rf_potential_derivative(x, phi_ex, params);
        if f == 0.0 {
            return Ok(x);
        }
        if f < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let df = curvature(x, params);
        let mut next = x - f / df;
        if !(df > 0.0 && next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if (next - x).abs() < tol.phase || hi - lo < tol.phase {
            return Ok(next);
        }
        x = next;
    }
    Err(Error::NonConvergence {
        what: "rf-SQUID minimizer",
        iterations: tol.max_iterations,
        residual: rf_potential_derivative(x, phi_ex, params).abs(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, TAU};

    /// Dense grid over one period around phi_ex, then bisection on U' in the
    /// winning cell.
    fn grid_oracle(phi_ex: f64, p: &CircuitParams, n: usize) -> f64 {
        let lo = phi_ex - PI;
        let h = TAU / n as f64;
        let mut best = (f64::INFINITY, lo);
        for i in 0..n {
            let x = lo + h * i as f64;
            let u = rf_potential(x, phi_ex, p);
            if u < best.0 {
                best = (u, x);
            }
        }
        let (mut a, mut b) = (best.1 - h, best.1 + h);
        for _ in 0..100 {
            let m = 0.5 * (a + b);
            if rf_potential_derivative(m, phi_ex, p) < 0.0 {
                a = m;
            } else {
                b = m;
            }
        }
        0.5 * (a + b)
    }

    #[test]
    fn zero_bias_gives_zero_phase() {
        let m = minimize_rf_potential(0.0, &CircuitParams::table1()).unwrap();
        assert_eq!(m.phi, 0.0);
        assert!(m.curvature > 0.0);
    }

    #[test]
    fn half_flux_is_stationary_minimum() {
        let p = CircuitParams::table1();
        let m = minimize_rf_potential(PI, &p).unwrap();
        assert!((m.phi - PI).abs() < 1e-10);
        assert!(m.curvature > 0.0);
        assert!(!m.is_multistable());
    }

    #[test]
    fn quarter_flux_matches_grid_search() {
        let p = CircuitParams::table1();
        let m = minimize_rf_potential(FRAC_PI_2, &p).unwrap();
        let oracle = grid_oracle(FRAC_PI_2, &p, 1_000_000);
        assert!((m.phi - oracle).abs() < 1e-6, "{} vs {}", m.phi, oracle);
        assert!(rf_potential_derivative(m.phi, FRAC_PI_2, &p).abs() < 1e-6 / p.l_j0);
    }

    #[test]
    fn derivative_matches_finite_differences() {
        let p = CircuitParams::table1();
        let h = 1e-6;
        for &(phi, ex) in &[(0.3, 1.0), (2.0, 2.5), (-1.2, 0.4), (3.0, PI)] {
            let fd = (rf_potential(phi + h, ex, &p) - rf_potential(phi - h, ex, &p)) / (2.0 * h);
            let an = rf_potential_derivative(phi, ex, &p);
            assert!((fd - an).abs() <= 1e-6 * an.abs().max(1.0 / p.l_j0), "{fd} {an}");
        }
    }

    #[test]
    fn multistable_reports_all_minima() {
        let p = CircuitParams {
            l_j0: 0.3e-9,
            ..CircuitParams::table1()
        };
        assert!(!p.is_monostable());
        let m = minimize_rf_potential(PI, &p).unwrap();
        assert!(m.is_multistable());
        // symmetric double well at half flux: minima mirror around pi
        let lo = m.minima.first().unwrap();
        let hi = m.minima.last().unwrap();
        assert!(((lo - PI) + (hi - PI)).abs() < 1e-8);
        let global = m.phi;
        let oracle = grid_oracle(PI + 0.05, &p, 200_000);
        let shifted = minimize_rf_potential(PI + 0.05, &p).unwrap();
        assert!((shifted.phi - oracle).abs() < 1e-6);
        assert!(global.is_finite());

        let near = minimize_rf_potential_with(
            PI + 0.05,
            &p,
            BranchSelection::Nearest(*lo),
            &Tolerances::default(),
        )
        .unwrap();
        assert!(near.phi < PI);
    }
}
